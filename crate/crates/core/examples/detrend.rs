//! Load a CSV, remove slow drift with the running-line smoother and
//! standardize, as done before fitting.
//!
//! cargo run --example detrend

use bdlm::io::{load_csv, save_csv, Dataset, DEFAULT_DETREND_K};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> bdlm::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let horizon = 200;
    // Scanner drift: a slow sinusoid plus a linear ramp on top of noise.
    let series = DMatrix::from_fn(horizon, 2, |t, i| {
        let t = t as f64;
        100.0 + 0.02 * t + (t / 40.0 + i as f64).sin() * 3.0 + rng.sample::<f64, _>(StandardNormal)
    });
    let raw = Dataset::new(series, DMatrix::from_element(horizon, 2, 1.0), vec!["roi_a".into(), "roi_b".into()], 2.0)?;

    let dir = tempfile::tempdir().map_err(|e| bdlm::Error::Io { path: "tmp".into(), source: e })?;
    let path = dir.path().join("roi.csv");
    save_csv(&raw, &path)?;
    let mut data = load_csv(&path, 2.0)?;
    data.preprocess(Some(DEFAULT_DETREND_K), true)?;

    for i in 0..2 {
        let before = raw.series.column(i);
        let after = data.series.column(i);
        println!(
            "{}: raw mean {:.2} range {:.2}; cleaned mean {:.2e} sd {:.3}",
            data.labels[i],
            before.mean(),
            before.max() - before.min(),
            after.mean(),
            after.variance().sqrt() * (horizon as f64 / (horizon as f64 - 1.0)).sqrt()
        );
    }
    Ok(())
}
