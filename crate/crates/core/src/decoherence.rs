//! Decoherence factors of the internal environment and the spectral decay function R(t).
//!
//! For a collective coordinate entangled with `N` two-level particles prepared in
//! `∏|g_j⟩`, the off-diagonal element `ρ(x, x′, t)` of the reduced density matrix is
//! weighted by
//!
//! ```text
//! F_N(x′, x, t) = ∏_j ⟨g_j| S_j†(x′; t) S_j(x; t) |g_j⟩.
//! ```
//!
//! In the weak-coupling regime `g_j |x| ≪ ω_j` the magnitude reduces to
//! `exp(−(x − x′)² R(t))` with `R(t) = Σ_j g_j² sin²(ω_j t) / (2 ω_j²)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_time, invalid, Error, Result};
use crate::model::{dressed_eigensystem, s_matrix_from_eigensystem, CouplingForm, QubitState, TwoLevelParticle};
use crate::quadrature::{self, QuadOptions};

/// Complex decoherence factor together with its polar decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceFactor {
    pub value: Complex64,
    pub magnitude: f64,
    /// Principal value in `(−π, π]`.
    pub phase: f64,
}

impl DecoherenceFactor {
    pub fn from_value(value: Complex64) -> Self {
        Self {
            value,
            magnitude: value.norm(),
            phase: value.arg(),
        }
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Self {
        let phase = wrap_phase(phase);
        Self {
            value: Complex64::from_polar(magnitude, phase),
            magnitude,
            phase,
        }
    }

    pub fn one() -> Self {
        Self::from_value(Complex64::new(1.0, 0.0))
    }
}

pub(crate) fn wrap_phase(phi: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut w = phi.rem_euclid(two_pi);
    if w > PI {
        w -= two_pi;
    }
    w
}

/// `⟨φ| S†(x′; t) S(x; t) |φ⟩` for a single particle.
pub fn factor_single_exact(
    p: &TwoLevelParticle,
    coupling: &CouplingForm,
    x: f64,
    x_prime: f64,
    t: f64,
    initial: &QubitState,
) -> Result<DecoherenceFactor> {
    check_time(t)?;
    initial.check_normalized()?;
    let s = s_matrix_from_eigensystem(&dressed_eigensystem(p, coupling, x)?, t);
    let s_prime = s_matrix_from_eigensystem(&dressed_eigensystem(p, coupling, x_prime)?, t);
    let a = s.apply(initial);
    let b = s_prime.apply(initial);
    Ok(DecoherenceFactor::from_value(b[0].conj() * a[0] + b[1].conj() * a[1]))
}

fn weak_terms(p: &TwoLevelParticle, x: f64, x_prime: f64, t: f64) -> Result<(f64, f64)> {
    check_time(t)?;
    p.validate()?;
    if p.ell != 0.0 {
        return Err(invalid("ell", "weak-coupling form requires a linear coupling with zero offset"));
    }
    let ratio = p.g * p.g / (p.omega * p.omega);
    let (s, _) = (p.omega * t).sin_cos();
    let dx = x - x_prime;
    let decay = dx * dx * ratio * 0.5 * s * s;
    let phase = 0.25 * ratio * (x * x - x_prime * x_prime) * (2.0 * p.omega * t).sin();
    Ok((decay, phase))
}

/// Weak-coupling factor `1 − (x−x′)² g²/(2ω²) sin²(ωt) + i g²/(4ω²) (x²−x′²) sin(2ωt)`.
///
/// The expansion drops the dressed-frequency shift `Ω − ω`, so the phase agrees with
/// [`factor_single_exact`] only to leading order when `x² ≠ x′²`; the magnitude
/// agrees through second order in `g/ω`.
pub fn factor_single_weak(p: &TwoLevelParticle, x: f64, x_prime: f64, t: f64) -> Result<DecoherenceFactor> {
    let (decay, phase) = weak_terms(p, x, x_prime, t)?;
    Ok(DecoherenceFactor::from_value(Complex64::new(1.0 - decay, phase)))
}

/// Exponentiated weak-coupling factor `exp(−(x−x′)² g²/(2ω²) sin²(ωt)) · exp(i g²/(4ω²) (x²−x′²) sin(2ωt))`.
pub fn factor_single_weak_exponentiated(
    p: &TwoLevelParticle,
    x: f64,
    x_prime: f64,
    t: f64,
) -> Result<DecoherenceFactor> {
    let (decay, phase) = weak_terms(p, x, x_prime, t)?;
    Ok(DecoherenceFactor::from_polar((-decay).exp(), phase))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorMode {
    /// Per-particle factors from the exact S-matrices.
    Exact,
    /// Per-particle exponentiated weak-coupling factors.
    Weak,
}

/// N-particle product of decoherence factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductFactor {
    /// Direct product. `value` underflows to zero for very large ensembles; use
    /// `log_magnitude` there.
    pub factor: DecoherenceFactor,
    /// `Σ_j ln |F^{[j]}|`.
    pub log_magnitude: f64,
    /// Smallest single-particle magnitude in the product.
    pub min_single: f64,
    pub particles: usize,
}

pub fn factor_product(
    particles: &[TwoLevelParticle],
    coupling: &CouplingForm,
    x: f64,
    x_prime: f64,
    t: f64,
    mode: FactorMode,
) -> Result<ProductFactor> {
    if particles.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if mode == FactorMode::Weak && !coupling.is_linear() {
        return Err(invalid("coupling", "weak-coupling mode requires the linear coupling form"));
    }
    let ground = QubitState::ground();
    let mut value = Complex64::new(1.0, 0.0);
    let mut log_magnitude = 0.0;
    let mut phase = 0.0;
    let mut min_single = f64::INFINITY;
    for p in particles {
        let f = match mode {
            FactorMode::Exact => factor_single_exact(p, coupling, x, x_prime, t, &ground)?,
            FactorMode::Weak => factor_single_weak_exponentiated(p, x, x_prime, t)?,
        };
        value *= f.value;
        log_magnitude += f.magnitude.ln();
        phase += f.phase;
        min_single = min_single.min(f.magnitude);
    }
    Ok(ProductFactor {
        factor: DecoherenceFactor {
            value,
            magnitude: log_magnitude.exp(),
            phase: wrap_phase(phase),
        },
        log_magnitude,
        min_single,
        particles: particles.len(),
    })
}

/// `R(t) = Σ_j g_j² sin²(ω_j t) / (2 ω_j²)`.
pub fn r_sum(particles: &[TwoLevelParticle], t: f64) -> f64 {
    particles
        .iter()
        .map(|p| {
            let s = (p.omega * t).sin();
            p.g * p.g * s * s / (2.0 * p.omega * p.omega)
        })
        .sum()
}

/// `Σ_j g_j² sin(2 ω_j t) / (4 ω_j²)`; the weak-coupling phase is `(x² − x′²)` times this.
pub fn phase_s(particles: &[TwoLevelParticle], t: f64) -> f64 {
    particles
        .iter()
        .map(|p| p.g * p.g * (2.0 * p.omega * t).sin() / (4.0 * p.omega * p.omega))
        .sum()
}

/// Distribution of level splittings in the internal environment.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// Explicit `(ω_j, g_j)` pairs.
    Discrete(Vec<(f64, f64)>),
    /// `ρ(ω) = n / (ω₂ − ω₁)` on `[ω₁, ω₂]` with a common coupling `g`.
    HomogeneousBand { omega1: f64, omega2: f64, n: f64, g: f64 },
    /// `ρ(ω) = 4γ / (π g²)` on `(0, ∞)`.
    OhmicLike { gamma: f64, g: f64 },
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SpectralDensity::Discrete(ref pairs) => {
                for &(w, g) in pairs {
                    if !(w > 0.0) || !w.is_finite() {
                        return Err(Error::NonPositiveOmega(w));
                    }
                    if !g.is_finite() {
                        return Err(invalid("g", "coupling must be finite"));
                    }
                }
            }
            SpectralDensity::HomogeneousBand { omega1, omega2, n, g } => {
                if !(omega1 > 0.0 && omega1 < omega2 && omega2.is_finite()) {
                    return Err(invalid("band", format!("need 0 < ω₁ < ω₂, got [{omega1}, {omega2}]")));
                }
                if !(n >= 1.0) || !n.is_finite() {
                    return Err(invalid("n", format!("particle count must be >= 1, got {n}")));
                }
                if !g.is_finite() {
                    return Err(invalid("g", "coupling must be finite"));
                }
            }
            SpectralDensity::OhmicLike { gamma, g } => {
                if !(gamma > 0.0) || !gamma.is_finite() {
                    return Err(invalid("gamma", format!("must be > 0, got {gamma}")));
                }
                if !(g > 0.0) || !g.is_finite() {
                    return Err(invalid("g", format!("must be > 0, got {g}")));
                }
            }
        }
        Ok(())
    }

    /// `ρ(ω) g(ω)²`, the weight multiplying `sin²(ωt) / (2ω²)` in R(t).
    pub fn weight(&self, omega: f64) -> f64 {
        match *self {
            SpectralDensity::Discrete(_) => 0.0,
            SpectralDensity::HomogeneousBand { omega1, omega2, n, g } => {
                if omega >= omega1 && omega <= omega2 {
                    n / (omega2 - omega1) * g * g
                } else {
                    0.0
                }
            }
            SpectralDensity::OhmicLike { gamma, .. } => 4.0 * gamma / PI,
        }
    }

    /// Particles sampled from the density. Discrete spectra are returned as given;
    /// a homogeneous band is split into `count` equal cells sampled at their midpoints.
    pub fn particles(&self, count: usize) -> Result<Vec<TwoLevelParticle>> {
        self.validate()?;
        match *self {
            SpectralDensity::Discrete(ref pairs) => {
                pairs.iter().map(|&(w, g)| TwoLevelParticle::new(w, g)).collect()
            }
            SpectralDensity::HomogeneousBand { omega1, omega2, n, g } => {
                if count == 0 {
                    return Err(Error::EmptyEnsemble);
                }
                let h = (omega2 - omega1) / count as f64;
                // Each sampled particle stands for n/count physical ones.
                let g_eff = g * (n / count as f64).sqrt();
                (0..count)
                    .map(|k| TwoLevelParticle::new(omega1 + (k as f64 + 0.5) * h, g_eff))
                    .collect()
            }
            SpectralDensity::OhmicLike { .. } => Err(invalid(
                "spectrum",
                "an Ohmic-like density has no finite particle sample",
            )),
        }
    }
}

/// `sin²(ωt) / ω²`, continuous at `ω = 0`.
pub(crate) fn sin_sq_over_sq(omega: f64, t: f64) -> f64 {
    let u = omega * t;
    let s = t * sinc(u);
    s * s
}

/// `sin(u)/u` with `sinc(0) = 1`.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// R(t) with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RValue {
    pub value: f64,
    pub error_estimate: f64,
}

/// Default relative tolerance of [`r_continuum`].
pub const R_CONTINUUM_REL_TOL: f64 = 1e-9;

pub fn r_continuum(spec: &SpectralDensity, t: f64) -> Result<RValue> {
    r_continuum_with_tol(spec, t, R_CONTINUUM_REL_TOL)
}

/// `R(t) = ∫ ρ(ω) g² sin²(ωt) / (2ω²) dω` by adaptive quadrature.
///
/// Quadrature nodes are seeded at the zeros `kπ/t` of the integrand. On `(0, ∞)` the
/// range is cut at Λ and the tail is added as `w/(4Λ)` (the mean of `sin²` is ½), whose
/// error is bounded by `w/(4tΛ²)` after one integration by parts; Λ keeps that bound
/// under 10 % of the tolerance.
pub fn r_continuum_with_tol(spec: &SpectralDensity, t: f64, rel_tol: f64) -> Result<RValue> {
    check_time(t)?;
    spec.validate()?;
    if !(rel_tol > 0.0) {
        return Err(invalid("rel_tol", "tolerance must be positive"));
    }
    if t == 0.0 {
        return Ok(RValue { value: 0.0, error_estimate: 0.0 });
    }
    match *spec {
        SpectralDensity::Discrete(ref pairs) => {
            let value = pairs
                .iter()
                .map(|&(w, g)| 0.5 * g * g * sin_sq_over_sq(w, t))
                .sum();
            Ok(RValue { value, error_estimate: 0.0 })
        }
        SpectralDensity::HomogeneousBand { omega1, omega2, .. } => {
            let integrand = |w: f64| 0.5 * spec.weight(w) * sin_sq_over_sq(w, t);
            let r = quadrature::integrate(
                integrand,
                omega1,
                omega2,
                &zeros_between(omega1, omega2, t),
                QuadOptions { abs_tol: 0.0, rel_tol, ..QuadOptions::default() },
            )?;
            Ok(RValue { value: r.value, error_estimate: r.error })
        }
        SpectralDensity::OhmicLike { .. } => {
            let w = spec.weight(1.0);
            let integrand = |om: f64| 0.5 * w * sin_sq_over_sq(om, t);
            let opts = QuadOptions { abs_tol: 0.0, rel_tol: 0.25 * rel_tol, ..QuadOptions::default() };
            // First lobe fixes the scale of the answer.
            let first = PI / t;
            let head = quadrature::integrate(integrand, 0.0, first, &[], opts)?;
            let tol = rel_tol * head.value;
            let cutoff = (w / (4.0 * t * 0.1 * tol)).sqrt().max(first);
            let body = quadrature::integrate(
                integrand,
                first,
                cutoff,
                &zeros_between(first, cutoff, t),
                QuadOptions { abs_tol: 0.25 * tol, rel_tol: 0.0, ..QuadOptions::default() },
            )?;
            let tail = w / (4.0 * cutoff);
            let tail_err = w / (4.0 * t * cutoff * cutoff);
            let error_estimate = head.error + body.error + tail_err;
            let value = head.value + body.value + tail;
            if error_estimate > rel_tol * value {
                return Err(Error::QuadratureNonConvergence {
                    estimate: error_estimate,
                    tolerance: rel_tol * value,
                });
            }
            Ok(RValue { value, error_estimate })
        }
    }
}

fn zeros_between(a: f64, b: f64, t: f64) -> Vec<f64> {
    let step = PI / t;
    let first = (a / step).floor() as i64 + 1;
    let last = (b / step).ceil() as i64 - 1;
    if last < first || last - first > 1_000_000 {
        return Vec::new();
    }
    (first..=last).map(|k| k as f64 * step).collect()
}

/// Lower bound on R(t) from a sub-band `[ω₃, ω₄]` on which `ρ(ω) ≥ N/(ω₂ − ω₁)`:
///
/// ```text
/// (N/4) (g²/ω₄²) ((ω₄−ω₃)/(ω₂−ω₁)) (1 − cos((ω₄+ω₃)t) sinc((ω₄−ω₃)t))
/// ```
pub fn r_bound_homogeneous(spec: &SpectralDensity, t: f64, omega3: f64, omega4: f64) -> Result<f64> {
    check_time(t)?;
    let SpectralDensity::HomogeneousBand { omega1, omega2, n, g } = *spec else {
        return Err(Error::BandConditionViolated(
            "the bound needs a band density on a finite interval".into(),
        ));
    };
    spec.validate()?;
    if !(omega1 <= omega3 && omega3 < omega4 && omega4 <= omega2) {
        return Err(Error::BandConditionViolated(format!(
            "need ω₁ ≤ ω₃ < ω₄ ≤ ω₂, got ω₁={omega1}, ω₃={omega3}, ω₄={omega4}, ω₂={omega2}"
        )));
    }
    let bracket = 1.0 - ((omega4 + omega3) * t).cos() * sinc((omega4 - omega3) * t);
    Ok(0.25 * n * g * g / (omega4 * omega4) * (omega4 - omega3) / (omega2 - omega1) * bracket)
}
