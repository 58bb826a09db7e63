//! Runs every acceptance criterion (or those given as arguments, by
//! number) and prints one PASS/FAIL line each. Failing checks are listed
//! on stderr; the exit status is 1 if anything failed.

use mmq_cli::acceptance::{run_one, CRITERIA};

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| wanted.is_empty() || wanted.contains(&c.id)) {
        let o = run_one(c);
        println!("{}", o.line());
        if !o.report.passed {
            failed += 1;
            for l in o.report.failures() {
                eprintln!("    criterion {}: {} = {:.6e}", o.id, l.label, l.value);
            }
        }
    }
    std::process::exit(i32::from(failed > 0));
}
