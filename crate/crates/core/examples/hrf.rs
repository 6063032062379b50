//! Canonical double-gamma HRF and the BOLD regressor of a block design.
//!
//! cargo run --example hrf

use bdlm::sim::{convolve_stimulus, hrf, HrfParams, StimulusDesign};

fn main() -> bdlm::Result<()> {
    let p = HrfParams::default();
    let (peak, _) = (0..=3000)
        .map(|k| k as f64 * 0.01)
        .map(|u| (u, hrf(u, &p)))
        .fold((0.0, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
    println!("peak at {peak:.2} s, total mass {:.4}", p.integral(1e4));

    let tr = 2.0;
    let n_scans = 72;
    let design = StimulusDesign::default_blocks(n_scans, tr)?;
    let x = convolve_stimulus(&design, &p, tr, n_scans)?;
    for (k, v) in x.iter().enumerate().step_by(3) {
        let t = k as f64 * tr;
        let bar = "#".repeat((v.max(0.0) * 40.0).round() as usize);
        println!("{t:>5.0} s {} {v:>7.4} {bar}", if design.is_on(t) { "on " } else { "off" });
    }
    Ok(())
}
