//! Gaussian cat state `φ(x) ∝ e^{−(x−a)²/4d²} + e^{−(x+a)²/4d²}`: the off-diagonal peaks of
//! `|ρ(x, x′, t)|` fade as `e^{−4γta²}` while the diagonal ones stay put.
//!
//! Pass a directory to also write one SVG heat map per time.

use adiabatic_decoherence::cli::render_svg;
use adiabatic_decoherence::density::{peak_heights, rho_gaussian};
use adiabatic_decoherence::*;

fn main() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1);
    let (d, a, gamma) = (1.0, 3.0, 0.1);
    let pair = GaussianPair::new(d, a)?;
    let grid = GridSpec::new(-8.0, 8.0, 256)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>12} {:>12}", "t", "P11", "P10", "P00", "ratio", "e^(-4γta²)");
    for (k, t) in [0.0, 0.25, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let rho = rho_gaussian(&pair, gamma, 0.0, t, grid)?;
        let h = peak_heights(&rho, &pair)?;
        println!(
            "{t:>6.2} {:>10.7} {:>10.7} {:>10.7} {:>12.9} {:>12.9}",
            h.p11,
            h.p10,
            h.p00,
            h.coherence_ratio(),
            (-4.0 * gamma * t * a * a).exp()
        );
        if let Some(dir) = &out {
            std::fs::write(format!("{dir}/four_peaks_t{k}.svg"), render_svg(&rho))?;
        }
    }
    Ok(())
}
