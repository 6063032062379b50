//! Kalman filter and one backward-sampled path on a local-level model.
//!
//! cargo run --example filter

use bdlm::dlm::{ffbs_sample, kalman_filter, one_step_predictive_density, DlmModel};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> bdlm::Result<()> {
    let horizon = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let scalar = |v: f64| DMatrix::from_element(1, 1, v);

    // Random walk observed with noise: y_t = θ_t + v_t, θ_t = θ_{t-1} + w_t.
    let mut level = 0.0;
    let y = DMatrix::from_fn(horizon, 1, |_, _| {
        level += 0.3 * rng.sample::<f64, _>(StandardNormal);
        level + rng.sample::<f64, _>(StandardNormal)
    });
    let model = DlmModel::new(scalar(1.0), scalar(1.0), scalar(1.0), scalar(0.09), DVector::zeros(1), scalar(10.0), horizon)?;

    let filt = kalman_filter(&model, &y)?;
    let path = ffbs_sample(&model, &filt, &mut rng)?;
    println!("{:>3} {:>8} {:>8} {:>8} {:>9}", "t", "y", "m_t", "sd", "draw");
    for t in (1..=horizon).step_by(4) {
        println!(
            "{t:>3} {:>8.3} {:>8.3} {:>8.3} {:>9.3}",
            y[(t - 1, 0)],
            filt.m[t][0],
            filt.c[t][(0, 0)].sqrt(),
            path.theta[t][0]
        );
    }
    let last = DVector::from_element(1, y[(horizon - 1, 0)]);
    println!("log-likelihood {:.3}", filt.loglik);
    println!("log p(y_T | y_1:T-1) {:.3}", one_step_predictive_density(&filt, horizon, &last)?);
    Ok(())
}
