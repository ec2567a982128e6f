//! Classical, White and cluster-robust standard errors for one fit.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use didkit::ols::{fit_ols, inference_table, vcov_cluster, vcov_white};

fn main() -> didkit::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let (n, g) = (400, 20);
    let clusters: Vec<u32> = (0..n).map(|i| (i % g) as u32).collect();
    let shocks: Vec<f64> = (0..g).map(|_| rng.random_range(-0.5..0.5)).collect();
    let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { (i % g) as f64 / g as f64 });
    let y = DVector::from_fn(n, |i, _| 1.0 + 0.5 * x[(i, 1)] + shocks[i % g] + rng.random_range(-0.2..0.2));
    let names = vec!["constant".to_string(), "x".to_string()];

    let fit = fit_ols(&x, &y, &names)?;
    let white = fit.clone().with_vcov(vcov_white(&fit));
    let cluster = fit.clone().with_vcov(vcov_cluster(&fit, &clusters)?);
    for (label, f) in [("classical", &fit), ("white", &white), ("cluster", &cluster)] {
        let row = &inference_table(f)[1];
        println!("{label:<9} x = {:.4}  se {:.4}  p {:.4}  df {}", row.estimate, row.se, row.p, row.df);
    }
    Ok(())
}
