//! Free and Ohmically damped packet widths; damping freezes the width at a finite breadth.

use adiabatic_decoherence::dissipation::{deformed_time, limit_width, width_damped, width_free};
use adiabatic_decoherence::*;

fn main() -> Result<()> {
    let p = PacketParams::new(0.5, 2.0, 0.4)?;
    println!("a0 = {}, M = {}, η = {}: limit breadth {:.6}", p.a0, p.mass, p.eta, limit_width(&p)?);
    println!("{:>8} {:>10} {:>10} {:>10}", "t", "t_eta", "free", "damped");
    for t in [0.0, 1.0, 5.0, 10.0, 50.0, 250.0] {
        println!(
            "{t:>8.1} {:>10.5} {:>10.5} {:>10.6}",
            deformed_time(&p, t)?,
            width_free(&p, t)?,
            width_damped(&p, t)?
        );
    }
    Ok(())
}
