//! The full invariant suite that `mixnum verify` runs.

use mixnum::experiment::run_verify;
use mixnum::{ExperimentSpec, Session};

fn main() -> mixnum::Result<()> {
    let session = Session::new(ExperimentSpec::nr_reference(), None)?;
    let report = run_verify(&session)?;
    print!("{}", report.render(session.config()));
    std::process::exit(if report.passed() { 0 } else { 1 });
}
