//! Exact product decoherence factor against its weak-coupling exponential and `R(t)`.

use adiabatic_decoherence::*;

fn main() -> Result<()> {
    let band = SpectralDensity::HomogeneousBand { omega1: 0.5, omega2: 2.0, n: 400.0, g: 0.05 };
    let particles = band.particles(400)?;
    let c = CouplingForm::Linear;
    let (x, x_prime) = (0.8, -0.6);

    println!("{:>6} {:>12} {:>12} {:>12} {:>10}", "t", "|F| exact", "|F| weak", "exp(-R dx²)", "R(t)");
    for k in 0..=10 {
        let t = 0.5 * k as f64;
        let exact = factor_product(&particles, &c, x, x_prime, t, FactorMode::Exact)?;
        let weak = factor_product(&particles, &c, x, x_prime, t, FactorMode::Weak)?;
        let r = r_sum(&particles, t);
        println!(
            "{t:>6.2} {:>12.8} {:>12.8} {:>12.8} {r:>10.6}",
            exact.factor.magnitude,
            weak.factor.magnitude,
            (-r * (x - x_prime).powi(2)).exp()
        );
    }

    let p = TwoLevelParticle::new(1.0, 0.01)?;
    let single = factor_single_exact(&p, &c, 1.0, -1.0, 1.0, &QubitState::ground())?;
    let weak = factor_single_weak(&p, 1.0, -1.0, 1.0)?;
    println!("\nsingle particle g/ω = 1e-2 at mirror points: |exact − weak| = {:.3e}", (single.value - weak.value).norm());
    Ok(())
}
