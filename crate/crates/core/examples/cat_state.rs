//! Which-way record in a cat state: the overlap of the internal states dragged along two
//! collective positions is the decoherence factor, and it only shrinks as particles join.

use adiabatic_decoherence::*;

fn main() -> Result<()> {
    let c = CouplingForm::Linear;
    let (x, x_prime, t) = (1.0, -1.0, 3.0);
    let particles: Vec<_> = (0..12)
        .map(|k| TwoLevelParticle::new(0.5 + 0.25 * k as f64, 0.2))
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    println!("{:>3} {:>12} {:>12}", "N", "|overlap|", "|F_N|");
    for (n, p) in particles.iter().enumerate() {
        let drag = |pos: f64| -> Result<QubitState> {
            let v = s_matrix_single(p, &c, pos, t)?.apply(&QubitState::ground());
            QubitState::new(v[0], v[1])
        };
        pairs.push((drag(x_prime)?, drag(x)?));
        let overlap = cat_overlap(&pairs)?;
        let f = factor_product(&particles[..=n], &c, x, x_prime, t, FactorMode::Exact)?;
        println!("{:>3} {:>12.8} {:>12.8}", n + 1, overlap.norm(), f.factor.magnitude);
    }

    let orthogonal = cat_overlap(&[(QubitState::ground(), QubitState::excited())])?;
    println!("\nperfect which-way record: overlap = {orthogonal}");
    Ok(())
}
