//! Simulate the trivariate connectivity model and recover which
//! coefficients are non-zero.
//!
//! cargo run --release --example connectivity

use bdlm::eval::{mad_mse, summarize};
use bdlm::sampler::{run_chain, McmcConfig, ModelSpec};
use bdlm::sim::{simulate_trivariate, SimRecipe};
use bdlm::structure::ConnectivityLayout;

fn main() -> bdlm::Result<()> {
    let recipe = SimRecipe {
        seed: 7,
        ..SimRecipe::default()
    };
    let x = recipe.default_regressors()?;
    let (data, truth) = simulate_trivariate(&recipe, &x, &x)?;

    let layout = ConnectivityLayout::new(true, x.clone(), x.clone())?;
    let spec = ModelSpec::new(data.series.clone(), layout)?;
    let cfg = McmcConfig {
        n_iter: 5_000,
        burn_in: 2_000,
        thin: 1,
        seed: 11,
        ..McmcConfig::default()
    };
    let start = std::time::Instant::now();
    let store = run_chain(&spec, &cfg)?;
    println!("{} draws in {:.1?}", store.len(), start.elapsed());

    let summary = summarize(&store)?;
    println!("{:>8} {:>9} {:>9} {:>9} {:>8}", "coef", "truth", "mean", "sd", "P(=0)");
    for i in 0..3 {
        for j in 0..3 {
            let p = summary.get(&format!("phi_{}_{}", i + 1, j + 1)).expect("coefficient");
            println!(
                "{:>8} {:>9.4} {:>9.4} {:>9.4} {:>8.2}",
                format!("phi_{}{}", i + 1, j + 1),
                truth.phi[(i, j)],
                p.mean,
                p.sd,
                p.prob_zero.unwrap_or(f64::NAN)
            );
        }
    }
    let acc = mad_mse(&data.series, &store.trend_mean(), &store.activation_mean(), &data.regressors)?;
    println!("MAD {:.3}  MSE {:.3}", acc.mad, acc.mse);
    Ok(())
}
