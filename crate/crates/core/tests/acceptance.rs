//! End-to-end acceptance run: one line per criterion, nonzero exit on failure.

use polylab::acceptance::{run_criterion, CRITERIA};

fn main() {
    let mut failed = 0;
    for c in &CRITERIA {
        let report = run_criterion(c.number).expect("listed criterion");
        if !report.passed() {
            failed += 1;
        }
        println!("{}", report.line(true));
    }
    println!("acceptance: {} of {} criteria pass", CRITERIA.len() - failed, CRITERIA.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
