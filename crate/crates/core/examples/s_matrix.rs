//! Single-particle S-matrix: dressed eigensystem, closed form against a numeric
//! exponential, and the Rabi period of the dressed frequency.

use adiabatic_decoherence::oracle::s_matrix_numeric;
use adiabatic_decoherence::*;

fn main() -> Result<()> {
    let p = TwoLevelParticle::new(1.0, 0.3)?;
    let c = CouplingForm::Linear;
    for x in [-2.0, 0.0, 1.0, 4.0] {
        let eig = dressed_eigensystem(&p, &c, x)?;
        println!(
            "x = {x:>4}: f = {:>6.3}  Ω = {:.6}  θ = {:>8.5}",
            eig.coupling, eig.omega_rabi, eig.theta
        );
    }

    let (x, t) = (1.5, 2.0);
    let s = s_matrix_single(&p, &c, x, t)?;
    println!("\nS(x = {x}, t = {t}):");
    for row in s.0 {
        println!("  [{:>+.6} {:>+.6}i, {:>+.6} {:>+.6}i]", row[0].re, row[0].im, row[1].re, row[1].im);
    }
    println!("‖S†S − I‖∞            = {:.2e}", s.unitarity_defect());
    println!("|closed form − expm|   = {:.2e}", s.max_abs_diff(&s_matrix_numeric(&p, &c, x, t)?));

    // S(t + π/Ω) = −S(t).
    let omega = dressed_eigensystem(&p, &c, x)?.omega_rabi;
    let half = s_matrix_single(&p, &c, x, t + std::f64::consts::PI / omega)?;
    let flipped = UnitaryTwo(half.0.map(|r| r.map(|v| -v)));
    println!("|S(t + π/Ω) + S(t)|    = {:.2e}", s.max_abs_diff(&flipped));
    Ok(())
}
