//! Two plane waves under localization: the interference fringes on the diagonal survive
//! while the coherence between distant points is suppressed.

use adiabatic_decoherence::density::rho_plane_waves;
use adiabatic_decoherence::*;

fn main() -> Result<()> {
    let pair = PlaneWavePair::new(2.0, -1.0, 1.0)?;
    let grid = GridSpec::new(-4.0, 4.0, 81)?;
    let t = 0.5;
    let clean = rho_plane_waves(&pair, 0.0, t, grid)?;
    for gamma in [0.5, 5.0] {
        let noisy = rho_plane_waves(&pair, gamma, t, grid)?;
        let diag: f64 = (0..grid.n).map(|i| (noisy.get(i, i) - clean.get(i, i)).norm()).fold(0.0, f64::max);
        let far = noisy.get(0, grid.n - 1).norm() / clean.get(0, grid.n - 1).norm();
        println!("γ = {gamma}: diagonal change {diag:.1e}, |ρ(−4, 4)| kept fraction {far:.3e}");
    }
    println!("\nfringes ρ(x, x, t):");
    for i in (0..grid.n).step_by(8) {
        let x = grid.point(i);
        let v = pair.diagonal(x, t);
        println!("  x = {x:>5.2}  {v:.5}  {}", "#".repeat((v * 60.0).round() as usize));
    }
    Ok(())
}
