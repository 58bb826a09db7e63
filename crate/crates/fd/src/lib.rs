//! Finite-volume reference solution of the stationary density `F(x, eta)`
//! at moderate `eps`, and its comparison with the asymptotic formulas.

pub mod compare;
pub mod error;
pub mod export;
pub mod grid;
pub mod oracle;

pub use compare::{check_oracle, compare_to_asymptotics, oracle_report, truncation_sensitivity, CompareSpec, Comparison, OracleReport};
pub use error::{FdError, Result};
pub use grid::{GridSpec, Scheme};
pub use oracle::{eta_gaussian_l1, oracle_marginal_eta, oracle_marginal_x, solve_fd, OracleGrid};
