//! Convergence diagnostics of a short multi-chain run.
//!
//! cargo run --release --example diagnostics

use bdlm::eval::{diagnostics, mc_standard_error};
use bdlm::sampler::{run_chain, McmcConfig, ModelSpec};
use bdlm::sim::{simulate_trivariate, SimRecipe};
use bdlm::structure::ConnectivityLayout;

fn main() -> bdlm::Result<()> {
    let recipe = SimRecipe::default();
    let x = recipe.default_regressors()?;
    let (data, _) = simulate_trivariate(&recipe, &x, &x)?;
    let spec = ModelSpec::new(data.series, ConnectivityLayout::new(true, x.clone(), x)?)?;
    let cfg = McmcConfig {
        n_iter: 3_000,
        burn_in: 1_000,
        thin: 2,
        n_chains: 2,
        ..McmcConfig::default()
    };
    let store = run_chain(&spec, &cfg)?;
    println!("{:>14} {:>8} {:>7} {:>7} {:>9}", "parameter", "ESS", "acf1", "acf10", "MCSE");
    for d in diagnostics(&store)?.iter().filter(|d| !d.name.starts_with("inc_") && !d.name.starts_with("tau_")) {
        let trace = store.column(&d.name).expect("known column");
        println!(
            "{:>14} {:>8.0} {:>7.3} {:>7.3} {:>9.5}",
            d.name,
            d.ess,
            d.acf[1],
            d.acf[10],
            mc_standard_error(&trace)
        );
    }
    Ok(())
}
