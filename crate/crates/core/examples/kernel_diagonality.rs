//! Split-step propagation of a narrow packet in a harmonic well: the growth of its
//! second moment over a fixed time falls off as `1/M`, so a heavy collective coordinate
//! is carried along almost diagonally in position.

use adiabatic_decoherence::oracle::{harmonic_potential, kernel_diagonality, GridWave};
use adiabatic_decoherence::Result;

fn main() -> Result<()> {
    let wave = GridWave::gaussian(-40.0, 40.0, 4096, 0.0, 1.0)?;
    let v = harmonic_potential(&wave, 1.0);
    println!("{:>6} {:>14} {:>14} {:>12}", "M", "spread", "M·spread", "norm drift");
    for mass in [1.0, 10.0, 100.0, 200.0, 400.0, 800.0] {
        let r = kernel_diagonality(mass, &v, &wave, 1.0, 500)?;
        println!(
            "{mass:>6} {:>14.6e} {:>14.6e} {:>12.1e}",
            r.spread_metric,
            mass * r.spread_metric,
            r.max_norm_drift
        );
    }
    Ok(())
}
