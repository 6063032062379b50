//! Turning prior statements into the spike-and-slab hyperparameters.
//!
//! cargo run --example elicitation

use bdlm::priors::{
    elicit_inclusion_prior, elicit_slab_precision, elicit_slab_precision_from_quantile, PUBLISHED_SLAB_RATE,
    PUBLISHED_SLAB_TAU0,
};

fn main() -> bdlm::Result<()> {
    let slab = elicit_slab_precision(PUBLISHED_SLAB_TAU0, PUBLISHED_SLAB_RATE)?;
    println!("mode {PUBLISHED_SLAB_TAU0}: tau ~ Gamma({:.4}, {:.4}), mean {:.4}", slab.shape, slab.rate, slab.mean());

    // "A coefficient below -1 has prior probability 1%."
    let (tau0, from_q) = elicit_slab_precision_from_quantile(-1.0, 0.01, PUBLISHED_SLAB_RATE)?;
    println!("P(phi < -1) = 0.01: tau0 {tau0:.4}, tau ~ Gamma({:.4}, {:.4})", from_q.shape, from_q.rate);

    for (a, b) in [(1.0, 1.0), (6.0, 3.0), (2.0, 8.0)] {
        let p = elicit_inclusion_prior(a, b)?;
        println!("pi ~ Beta({a}, {b}): mean {:.4}, sd {:.4}", p.mean(), p.sd());
    }
    Ok(())
}
