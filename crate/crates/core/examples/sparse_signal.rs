//! Univariate series with rare large state jumps. Small posterior means of
//! the local precisions ω_t flag the jumps.
//!
//! cargo run --release --example sparse_signal

use bdlm::sampler::{run_chain, McmcConfig, ModelSpec};
use bdlm::sim::UnivariateRecipe;
use bdlm::structure::ConnectivityLayout;

fn main() -> bdlm::Result<()> {
    let recipe = UnivariateRecipe {
        w_over_v: 0.6,
        seed: 4,
        ..UnivariateRecipe::default()
    };
    let (data, truth) = recipe.simulate()?;
    let horizon = data.horizon();
    let spec = ModelSpec::new(data.series.clone(), ConnectivityLayout::plain(1, horizon)?)?;
    let cfg = McmcConfig {
        n_iter: 22_000,
        burn_in: 2_000,
        thin: 10,
        seed: 9,
        ..McmcConfig::default()
    };
    let store = run_chain(&spec, &cfg)?;

    let n = store.len() as f64;
    let mean = |f: &dyn Fn(&bdlm::sampler::Draw) -> f64| store.draws.iter().map(f).sum::<f64>() / n;
    println!("V        truth {:.3}  posterior mean {:.3}", truth.obs_var, mean(&|d| 1.0 / d.lambda_y[0]));
    println!("W        truth {:.3}  posterior mean {:.3}", truth.state_var, mean(&|d| 1.0 / (d.lambda_y[0] * d.lambda_theta[0])));
    println!("phi      truth {:.3}  posterior mean {:.3}", truth.phi, mean(&|d| d.phi[(0, 0)]));

    let omega = &store.omega_mean[0];
    let flagged = truth.outliers.iter().filter(|&&t| omega[t - 1] < 1.0).count();
    println!("jumps with E[omega] < 1: {flagged}/{}", truth.outliers.len());
    println!("{:>4} {:>8} {:>8}", "t", "w_t", "E[omega]");
    for &t in truth.outliers.iter().take(10) {
        println!("{t:>4} {:>8.3} {:>8.3}", truth.state_noise[t - 1], omega[t - 1]);
    }
    Ok(())
}
