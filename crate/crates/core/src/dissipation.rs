//! Width of a free Gaussian packet, with and without Ohmic damping.
//!
//! Damping enters only through the deformed time `t_η = M(1 − e^{−ηt/M})/η`, which
//! replaces `t` in the free spreading law and saturates at `M/η`.

use crate::error::{check_time, invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    /// Initial width.
    pub a0: f64,
    pub mass: f64,
    /// Damping rate η.
    pub eta: f64,
}

impl PacketParams {
    pub fn new(a0: f64, mass: f64, eta: f64) -> Result<Self> {
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(invalid("a0", format!("initial width must be > 0, got {a0}")));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(invalid("mass", format!("must be > 0, got {mass}")));
        }
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(invalid("eta", format!("damping rate must be >= 0, got {eta}")));
        }
        Ok(Self { a0, mass, eta })
    }

    fn spread(&self, t: f64) -> f64 {
        let a2 = self.a0 * self.a0;
        let r = t / (2.0 * self.mass * a2);
        self.a0 * r.hypot(1.0)
    }
}

/// `a0 sqrt(1 + t²/(4M²a0⁴))`.
pub fn width_free(p: &PacketParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(p.spread(t))
}

/// `t_η = M(1 − e^{−ηt/M})/η`, equal to `t` when `η = 0`.
pub fn deformed_time(p: &PacketParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let u = p.eta * t / p.mass;
    if u < 1e-8 {
        // (1 − e^{−u})/u = 1 − u/2 + u²/6 − …
        return Ok(t * (1.0 - 0.5 * u + u * u / 6.0));
    }
    Ok(-(-u).exp_m1() * p.mass / p.eta)
}

/// `a0 sqrt(1 + t_η²/(4M²a0⁴))`.
pub fn width_damped(p: &PacketParams, t: f64) -> Result<f64> {
    Ok(p.spread(deformed_time(p, t)?))
}

/// Limiting breadth `a0 sqrt(1 + (1/(2η a0²))²)`.
pub fn limit_width(p: &PacketParams) -> Result<f64> {
    if p.eta == 0.0 {
        return Err(Error::ZeroDamping);
    }
    let r = 1.0 / (2.0 * p.eta * p.a0 * p.a0);
    Ok(p.a0 * r.hypot(1.0))
}
