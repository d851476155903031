//! The first-order correction to the semicircle limit: inside the
//! certified window the corrected density v_n tracks p_n an order
//! better than the semicircle itself.

use freeclt::{
    build_truncated, certified_window, stieltjes_density, transform_of_power, DensityOptions,
    EdgeworthParams, Measure, SolverOptions,
};
use num_complex::Complex64;

fn main() -> freeclt::Result<()> {
    let mu = Measure::TwoAtom { p: 0.8 };
    let sopts = SolverOptions::default();
    let ladder = DensityOptions::default().ladder;

    println!("corrected density for powers of the two-atom law, p = 0.8");
    println!(
        "{:<5} {:>13} {:>15} {:>7} {:>12} {:>10}",
        "n", "sup |p_n-w|", "sup |p_n-v_n|", "gain", "window half", "mass(v_n)"
    );
    for n in [8u32, 16, 32, 64] {
        let ctx = build_truncated(&mu, n)?;
        let params = EdgeworthParams::from_context(&ctx)?;
        let window = certified_window(&params, ctx.eta, 1.0);
        let mut vs_semicircle: f64 = 0.0;
        let mut vs_corrected: f64 = 0.0;
        let mut warm: Option<Complex64> = None;
        for x in window.nodes(801) {
            // x is centered at the correction shift a_n; the physical
            // point of the rescaled power is x + a_n.
            let y = x + params.a;
            let mut g = |z: Complex64| {
                let pp = transform_of_power(&mu, n, z, warm, &sopts).expect("interior point");
                warm = Some(pp.w);
                pp.g
            };
            let pn = stieltjes_density(&mut g, y, &ladder).value.max(0.0);
            let w = freeclt::measure::semicircle_density(1.0, y);
            vs_semicircle = vs_semicircle.max((pn - w).abs());
            vs_corrected = vs_corrected.max((pn - params.correction_density(x)).abs());
        }
        println!(
            "{n:<5} {vs_semicircle:>13.2e} {vs_corrected:>15.2e} {:>6.1}x {:>12.4} {:>10.6}",
            vs_semicircle / vs_corrected,
            window.half,
            params.correction_mass()
        );
    }

    println!("\nthe correction parameters shrink with n:");
    for n in [8u32, 64] {
        let ctx = build_truncated(&mu, n)?;
        let p = EdgeworthParams::from_context(&ctx)?;
        println!(
            "  n = {n:<3}  a = {:+.4} (skew term), b = {:+.5}, d = {:+.5}, edge scale e = {:.5}",
            p.a, p.b, p.d, p.e
        );
    }
    Ok(())
}
