//! Runs the full invariant suite, as `frachq verify --level full` does.

use frachq::cli::{run_suite, Level};
use frachq::kernel::KernelConfig;

fn main() {
    let outcomes = run_suite(Level::Full, &KernelConfig::default());
    for o in &outcomes {
        println!("{}", o.line());
    }
    if outcomes.iter().any(|o| !o.passed) {
        std::process::exit(1);
    }
}
