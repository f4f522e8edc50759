//! End-to-end acceptance run: every check at its stated tolerance, one line each.
//! Exits nonzero if any check fails.

use std::process::ExitCode;

use gjms_residue::verify::{Suite, Verifier};

fn main() -> ExitCode {
    let v = Verifier::new();
    let mut failed = 0;
    for &id in Suite::All.checks() {
        let o = v.run(id);
        println!("[{}] {:>2} {} ({:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.seconds, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} checks pass", Suite::All.checks().len() - failed, Suite::All.checks().len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
