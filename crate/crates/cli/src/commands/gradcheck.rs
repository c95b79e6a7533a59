//! `semrel gradcheck`: run the finite-difference suites and report per-group
//! maxima. Exit status is nonzero unless every group passes.

use anyhow::{bail, Result};

use crate::gradcheck;

pub fn run(inject_wrong_sign: bool) -> Result<()> {
    let reports = gradcheck::run(inject_wrong_sign);
    let mut all_pass = true;
    for report in &reports {
        let verdict = if report.pass() { "PASS" } else { "FAIL" };
        println!(
            "group {:<4} max relative error {:>10.3e}  {verdict}",
            report.group, report.max_rel_err
        );
        all_pass &= report.pass();
    }
    if !all_pass {
        bail!(
            "analytic gradients diverge from finite differences (tolerance {:.0e})",
            gradcheck::TOLERANCE
        );
    }
    Ok(())
}
