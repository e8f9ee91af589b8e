//! `R(t)` for continuous spectra: linear growth for an Ohmic-like density and the lower
//! bound for a homogeneous band.

use adiabatic_decoherence::oracle::band_closed_form;
use adiabatic_decoherence::*;

fn main() -> Result<()> {
    let ohmic = SpectralDensity::OhmicLike { gamma: 0.7, g: 1.0 };
    println!("Ohmic-like, γ = 0.7");
    for t in [0.1, 1.0, 5.0, 10.0] {
        let r = r_continuum(&ohmic, t)?;
        println!("  t = {t:>5}: R = {:.9} (γt = {:.9}, error estimate {:.1e})", r.value, 0.7 * t, r.error_estimate);
    }

    let band = SpectralDensity::HomogeneousBand { omega1: 1.0, omega2: 3.0, n: 1000.0, g: 0.02 };
    println!("\nhomogeneous band [1, 3], sub-band [1.5, 2.5]");
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "R", "closed form", "bound");
    for k in 0..=8 {
        let t = 1.25 * k as f64;
        let r = r_continuum(&band, t)?;
        let bound = r_bound_homogeneous(&band, t, 1.5, 2.5)?;
        println!("{t:>6.2} {:>12.8} {:>12.8} {bound:>12.8}", r.value, band_closed_form(&band, t)?);
    }
    Ok(())
}
