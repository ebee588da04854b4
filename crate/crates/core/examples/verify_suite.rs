// Runs the default verification suite and prints one line per check.
//
// Optional argument: a glob over check names, e.g. `'kernel_duality/*'`.

use std::time::Instant;

use parabound::verify::{run_suite, SuiteConfig};

fn main() -> parabound::Result<()> {
    let cfg = SuiteConfig {
        filter: std::env::args().nth(1),
        ..SuiteConfig::default()
    };
    let start = Instant::now();
    let outcome = run_suite(&cfg)?;
    for r in &outcome.reports {
        let mark = if r.passed { "pass" } else { "FAIL" };
        println!("{mark}  {:<44} rel_err {:.3e}  {}", r.check, r.rel_err, r.details.as_deref().unwrap_or(""));
    }
    for (name, e) in &outcome.errors {
        println!("ERR   {name:<44} {e}");
    }
    println!(
        "{} passed, {} failed, {} errors in {:.1?}",
        outcome.passed(),
        outcome.failed(),
        outcome.errors.len(),
        start.elapsed()
    );
    Ok(())
}
