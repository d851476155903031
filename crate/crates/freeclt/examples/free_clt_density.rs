//! Watch the free central limit theorem happen: the density of the
//! rescaled convolution power of a skewed two-atom law flattens into
//! the standard semicircle as the order grows.

use freeclt::measure::semicircle_density;
use freeclt::{density_pn, DensityOptions, Measure};

fn main() -> freeclt::Result<()> {
    freeclt::init_threads();
    let mu = Measure::TwoAtom { p: 0.8 };
    let xs: Vec<f64> = (0..=1200).map(|k| -3.0 + k as f64 * 6.0 / 1200.0).collect();
    let opts = DensityOptions::default();

    println!("rescaled powers of the two-atom law with p = 0.8 (skewness -3/2)");
    println!(
        "{:<5} {:>16} {:>13} {:>10}",
        "n", "sup |p_n - p_w|", "mass defect", "flagged"
    );
    for n in [8u32, 16, 32, 64, 128] {
        let rec = density_pn(&mu, n, &xs, &opts)?;
        let sup = rec
            .density
            .nodes
            .iter()
            .zip(&rec.density.values)
            .map(|(x, v)| (v - semicircle_density(1.0, *x)).abs())
            .fold(0.0f64, f64::max);
        println!(
            "{n:<5} {sup:>16.6} {:>13.2e} {:>7} /{}",
            (rec.density.mass() - 1.0).abs(),
            rec.flagged.len(),
            xs.len()
        );
    }

    // A profile slice at n = 16: density, semicircle, difference.
    let n = 16;
    let rec = density_pn(&mu, n, &xs, &opts)?;
    println!("\nprofile at n = {n}");
    println!("{:>6} {:>10} {:>10} {:>10}", "x", "p_n", "p_w", "diff");
    for k in (100..=1100).step_by(200) {
        let x = rec.density.nodes[k];
        let p = rec.density.values[k];
        let w = semicircle_density(1.0, x);
        println!("{x:>6.2} {p:>10.6} {w:>10.6} {:>+10.2e}", p - w);
    }
    Ok(())
}
