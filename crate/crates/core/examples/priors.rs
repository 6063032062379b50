//! The Beta-prime variance prior: density, Gamma-mixture draws and the
//! heavy-tailed marginal it induces on a state.
//!
//! cargo run --example priors

use bdlm::priors::{beta_prime_cdf, beta_prime_density, marginal_state_prior_density, sample_beta_prime_mixture};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bdlm::Result<()> {
    let nu = 3.0;
    let q = (nu - 1.0) / 2.0;
    let beta = 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 50_000;
    let draws: Vec<f64> = (0..n).map(|_| sample_beta_prime_mixture(q, beta, &mut rng)).collect::<Result<_, _>>()?;
    println!("tau^2 ~ Beta-prime(1, {q}, {beta})");
    println!("{:>8} {:>10} {:>10} {:>10}", "x", "density", "cdf", "empirical");
    for &x in &[0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let emp = draws.iter().filter(|&&d| d <= x).count() as f64 / n as f64;
        println!(
            "{x:>8.1} {:>10.5} {:>10.5} {emp:>10.5}",
            beta_prime_density(x, 1.0, q, beta)?,
            beta_prime_cdf(x, 1.0, q, beta)?
        );
    }

    println!("\nmarginal state prior at sigma = 1, beta = 1");
    println!("{:>6} {:>10} {:>10} {:>10}", "theta", "nu=2", "nu=5", "nu=20");
    for &th in &[0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let d = |nu| marginal_state_prior_density(th, 0.0, 1.0, nu, 1.0);
        println!("{th:>6.1} {:>10.5} {:>10.5} {:>10.5}", d(2.0)?, d(5.0)?, d(20.0)?);
    }
    Ok(())
}
