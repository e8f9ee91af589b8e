//! Brute-force cross-checks for the analytic routes.
//!
//! Nothing here reuses the closed forms of [`crate::model`] or [`crate::decoherence`]:
//! S-matrices come from a generic symmetric eigensolver, N-particle factors from a full
//! `2^N` state vector, R(t) from adaptive Simpson quadrature and a sine-integral closed
//! form, and the adiabatic kernel claim from split-step propagation on a grid.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::decoherence::SpectralDensity;
use crate::error::{check_time, invalid, Error, Result};
use crate::model::{CouplingForm, TwoLevelParticle, UnitaryTwo};

/// Eigenpairs of the real symmetric matrix `[[a, b], [b, d]]` by one Jacobi rotation.
/// Columns of the returned matrix are the eigenvectors.
fn symmetric_eigen(a: f64, b: f64, d: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    if b == 0.0 {
        return ([a, d], [[1.0, 0.0], [0.0, 1.0]]);
    }
    let phi = 0.5 * (2.0 * b).atan2(a - d);
    let (s, c) = phi.sin_cos();
    let l1 = c * c * a + 2.0 * s * c * b + s * s * d;
    let l2 = s * s * a - 2.0 * s * c * b + c * c * d;
    ([l1, l2], [[c, -s], [s, c]])
}

/// `e^{−i h t}` with `h = [[ω, f], [f, −ω]]` in the basis `(|e⟩, |g⟩)`.
pub fn s_matrix_numeric(p: &TwoLevelParticle, coupling: &CouplingForm, x: f64, t: f64) -> Result<UnitaryTwo> {
    p.validate()?;
    check_time(t)?;
    let f = coupling.eval(p, x);
    if !f.is_finite() {
        return Err(Error::NonFiniteCoupling { x, value: f });
    }
    let (vals, vecs) = symmetric_eigen(p.omega, f, -p.omega);
    let phases = [Complex64::from_polar(1.0, -vals[0] * t), Complex64::from_polar(1.0, -vals[1] * t)];
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = (0..2).map(|k| phases[k] * vecs[r][k] * vecs[c][k]).sum();
        }
    }
    Ok(UnitaryTwo(out))
}

pub const MAX_TENSOR_PARTICLES: usize = 12;

/// `⟨Φ(x′)|Φ(x)⟩` with `|Φ(x)⟩ = S_1(x) ⋯ S_N(x) |g … g⟩` built as a full `2^N` vector.
pub fn factor_brute_tensor(
    particles: &[TwoLevelParticle],
    coupling: &CouplingForm,
    x: f64,
    x_prime: f64,
    t: f64,
) -> Result<Complex64> {
    if particles.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if particles.len() > MAX_TENSOR_PARTICLES {
        return Err(Error::EnsembleTooLarge { got: particles.len(), max: MAX_TENSOR_PARTICLES });
    }
    let evolve = |pos: f64| -> Result<Vec<Complex64>> {
        let n = particles.len();
        // Bit j of the index is 0 for |e⟩ and 1 for |g⟩ on particle j.
        let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n];
        psi[(1 << n) - 1] = Complex64::new(1.0, 0.0);
        for (j, p) in particles.iter().enumerate() {
            let u = s_matrix_numeric(p, coupling, pos, t)?;
            let bit = 1 << j;
            for idx in 0..psi.len() {
                if idx & bit != 0 {
                    continue;
                }
                let (e, g) = (psi[idx], psi[idx | bit]);
                psi[idx] = u.0[0][0] * e + u.0[0][1] * g;
                psi[idx | bit] = u.0[1][0] * e + u.0[1][1] * g;
            }
        }
        Ok(psi)
    };
    let a = evolve(x)?;
    let b = evolve(x_prime)?;
    Ok(a.iter().zip(&b).map(|(u, v)| v.conj() * u).sum())
}

/// `Si(x) = ∫_0^x sin(u)/u du`: power series for `|x| ≤ 2`, continued fraction for
/// `E1(ix)` beyond.
pub fn sine_integral(x: f64) -> f64 {
    let ax = x.abs();
    if ax == 0.0 {
        return 0.0;
    }
    let si = if ax <= 2.0 {
        let mut sum = 0.0;
        let mut term = ax; // x^{2k+1}/(2k+1)!
        let mut k = 0;
        loop {
            let contrib = term / (2 * k + 1) as f64;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs() {
                break;
            }
            k += 1;
            term *= -ax * ax / ((2 * k) as f64 * (2 * k + 1) as f64);
        }
        sum
    } else {
        let tiny = 1e-300;
        let one = Complex64::new(1.0, 0.0);
        let mut b = Complex64::new(1.0, ax);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = one / b;
        let mut h = d;
        for i in 2..10_000 {
            let a = -((i - 1) * (i - 1)) as f64;
            b += 2.0;
            d = one / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(ax.cos(), -ax.sin());
        FRAC_PI_2 + h.im
    };
    si.copysign(x)
}

/// Closed-form R(t) for a homogeneous band, from the antiderivative
/// `∫ sin²(tω)/ω² dω = −sin²(tω)/ω + t Si(2tω)`.
pub fn band_closed_form(spec: &SpectralDensity, t: f64) -> Result<f64> {
    let SpectralDensity::HomogeneousBand { omega1, omega2, n, g } = *spec else {
        return Err(invalid("spectrum", "closed form exists for homogeneous bands only"));
    };
    spec.validate()?;
    let anti = |w: f64| -(t * w).sin().powi(2) / w + t * sine_integral(2.0 * t * w);
    Ok(n / (omega2 - omega1) * g * g * 0.5 * (anti(omega2) - anti(omega1)))
}

/// Error bound of the midpoint rule with `count` cells for a homogeneous band, i.e. how
/// far a `count`-particle sample of the band may sit from the continuum R(t).
pub fn midpoint_discretization_bound(spec: &SpectralDensity, t: f64, count: usize) -> Result<f64> {
    let SpectralDensity::HomogeneousBand { omega1, omega2, n, g } = *spec else {
        return Err(invalid("spectrum", "bound exists for homogeneous bands only"));
    };
    let width = omega2 - omega1;
    let h = width / count as f64;
    let c = n / width * g * g * 0.5;
    // |d²/dω² (sin²(ωt)/ω²)| ≤ 2t²/ω² + 4t/ω³ + 6/ω⁴, largest at ω₁.
    let w = omega1;
    let second = 2.0 * t * t / (w * w) + 4.0 * t / w.powi(3) + 6.0 / w.powi(4);
    Ok(width * h * h / 24.0 * c * second)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (v1, e1) = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    let (v2, e2) = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    (v1 + v2, e1 + e2)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// R(t) by adaptive Simpson quadrature lobe by lobe (`[kπ/t, (k+1)π/t]`).
///
/// On `(0, ∞)` the tail beyond Λ is bounded with `sin² ≤ 1` and `∫_Λ^∞ dω/ω² = 1/Λ`;
/// its midpoint estimate is added and half the bound is charged to the error.
pub fn quadrature_r(spec: &SpectralDensity, t: f64, tolerance: f64) -> Result<(f64, f64)> {
    check_time(t)?;
    spec.validate()?;
    if !(tolerance > 0.0) {
        return Err(invalid("tolerance", "must be > 0"));
    }
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    let integrand = |w: f64| {
        let s = if w == 0.0 { t } else { (w * t).sin() / w };
        0.5 * spec.weight(w) * s * s
    };
    let (lo, hi, tail, tail_err) = match *spec {
        SpectralDensity::Discrete(ref pairs) => {
            let v = pairs
                .iter()
                .map(|&(w, g)| g * g * (w * t).sin().powi(2) / (2.0 * w * w))
                .sum();
            return Ok((v, 0.0));
        }
        SpectralDensity::HomogeneousBand { omega1, omega2, .. } => (omega1, omega2, 0.0, 0.0),
        SpectralDensity::OhmicLike { .. } => {
            let w = spec.weight(1.0);
            let cutoff = 2.5 * w / tolerance;
            (0.0, cutoff, 0.25 * w / cutoff, 0.25 * w / cutoff)
        }
    };
    let lobe = PI / t;
    let mut edges = vec![lo];
    let mut k = (lo / lobe).floor() + 1.0;
    while k * lobe < hi {
        edges.push(k * lobe);
        k += 1.0;
    }
    edges.push(hi);
    let budget = 0.5 * (tolerance - tail_err) / (edges.len() - 1) as f64;
    let (mut value, mut error) = (tail, tail_err);
    for w in edges.windows(2) {
        let (v, e) = adaptive_simpson(&integrand, w[0], w[1], budget);
        value += v;
        error += e;
    }
    if error > tolerance {
        return Err(Error::QuadratureNonConvergence { estimate: error, tolerance });
    }
    Ok((value, error))
}

/// Collective wave function sampled on a periodic grid `x_k = x_min + k Δx`, `k < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWave {
    pub x_min: f64,
    pub x_max: f64,
    pub amplitudes: Vec<Complex64>,
}

impl GridWave {
    /// Real Gaussian centred at `centre` with position spread `width` (std. dev. of |ψ|²).
    pub fn gaussian(x_min: f64, x_max: f64, n: usize, centre: f64, width: f64) -> Result<Self> {
        if !(x_min < x_max) || n < 4 {
            return Err(invalid("grid", "need x_min < x_max and at least 4 points"));
        }
        if !(width > 0.0) {
            return Err(invalid("width", "must be > 0"));
        }
        let dx = (x_max - x_min) / n as f64;
        let amplitudes = (0..n)
            .map(|k| {
                let x = x_min + k as f64 * dx;
                Complex64::new((-(x - centre).powi(2) / (4.0 * width * width)).exp(), 0.0)
            })
            .collect();
        let mut wave = Self { x_min, x_max, amplitudes };
        let norm = wave.norm();
        for a in &mut wave.amplitudes {
            *a /= norm.sqrt();
        }
        Ok(wave)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.len() as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx()
    }

    /// `Σ |ψ_k|² Δx`.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dx()
    }

    fn moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        let dx = self.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a.norm_sqr() * f(self.x(k)))
            .sum::<f64>()
            * dx
            / self.norm()
    }

    pub fn mean(&self) -> f64 {
        self.moment(|x| x)
    }

    pub fn second_moment(&self) -> f64 {
        self.moment(|x| x * x)
    }

    /// Position spread `sqrt(⟨x²⟩ − ⟨x⟩²)`.
    pub fn width(&self) -> f64 {
        let m = self.mean();
        (self.second_moment() - m * m).max(0.0).sqrt()
    }

    fn edge_amplitude(&self) -> f64 {
        let n = self.len();
        self.amplitudes[0].norm().max(self.amplitudes[n - 1].norm())
    }
}

/// `V(x) = κ x² / 2` sampled on the grid of `wave`.
pub fn harmonic_potential(wave: &GridWave, kappa: f64) -> Vec<f64> {
    (0..wave.len()).map(|k| 0.5 * kappa * wave.x(k).powi(2)).collect()
}

/// Strang-split propagator for `H = p²/(2M) + V(x)` on a periodic grid.
pub struct SplitStep {
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl SplitStep {
    pub fn new(mass: f64, potential: &[f64], x_min: f64, x_max: f64, dt: f64) -> Self {
        let n = potential.len();
        let length = x_max - x_min;
        let half_potential = potential.iter().map(|&v| Complex64::from_polar(1.0, -0.5 * v * dt)).collect();
        let kinetic = (0..n)
            .map(|k| {
                let j = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                let p = 2.0 * PI * j / length;
                // Inverse FFT is unnormalized; fold 1/n in here.
                Complex64::from_polar(1.0 / n as f64, -p * p * dt / (2.0 * mass))
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch = vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
        Self { half_potential, kinetic, forward, inverse, scratch }
    }

    pub fn step(&mut self, psi: &mut [Complex64]) {
        for (a, v) in psi.iter_mut().zip(&self.half_potential) {
            *a *= v;
        }
        self.forward.process_with_scratch(psi, &mut self.scratch);
        for (a, k) in psi.iter_mut().zip(&self.kinetic) {
            *a *= k;
        }
        self.inverse.process_with_scratch(psi, &mut self.scratch);
        for (a, v) in psi.iter_mut().zip(&self.half_potential) {
            *a *= v;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalityReport {
    pub mass: f64,
    /// `|⟨x²⟩(T) − ⟨x²⟩(0)|`, the absolute change of the second moment of `|ψ|²`.
    pub spread_metric: f64,
    pub run_time: f64,
    pub initial_width: f64,
    pub final_width: f64,
    pub final_wave: GridWave,
    pub max_norm_drift: f64,
}

pub const MIN_POINTS_PER_PACKET: f64 = 16.0;
pub const NORM_DRIFT_TOL: f64 = 1e-6;
const EDGE_TOL: f64 = 1e-10;

/// Propagates a narrow packet under `p²/(2M) + V(x)` for `horizon` in `steps`
/// Strang steps and reports how far it spreads away from a position eigenstate.
pub fn kernel_diagonality(
    mass: f64,
    potential: &[f64],
    initial: &GridWave,
    horizon: f64,
    steps: usize,
) -> Result<DiagonalityReport> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(invalid("mass", format!("must be > 0, got {mass}")));
    }
    check_time(horizon)?;
    if potential.len() != initial.len() {
        return Err(invalid("potential", "must be sampled on the wave's grid"));
    }
    let initial_width = initial.width();
    if initial_width / initial.dx() < MIN_POINTS_PER_PACKET {
        return Err(Error::GridUnderResolved(format!(
            "{:.1} points across the packet, need {MIN_POINTS_PER_PACKET}",
            initial_width / initial.dx()
        )));
    }
    if initial.edge_amplitude() > EDGE_TOL {
        return Err(Error::GridUnderResolved("initial packet touches the domain edge".into()));
    }
    let initial_moment = initial.second_moment();
    let norm0 = initial.norm();
    let mut wave = initial.clone();
    let mut max_norm_drift = 0.0_f64;
    if steps > 0 && horizon > 0.0 {
        let dt = horizon / steps as f64;
        let mut prop = SplitStep::new(mass, potential, initial.x_min, initial.x_max, dt);
        for step in 1..=steps {
            prop.step(&mut wave.amplitudes);
            let drift = (wave.norm() - norm0).abs();
            max_norm_drift = max_norm_drift.max(drift);
            if drift > NORM_DRIFT_TOL {
                return Err(Error::NormDrift { drift, step });
            }
        }
        if wave.edge_amplitude() > EDGE_TOL {
            return Err(Error::GridUnderResolved("packet reached the domain edge".into()));
        }
    }
    Ok(DiagonalityReport {
        mass,
        spread_metric: (wave.second_moment() - initial_moment).abs(),
        run_time: horizon,
        initial_width,
        final_width: wave.width(),
        final_wave: wave,
        max_norm_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::{width_free, PacketParams};
    use approx::assert_abs_diff_eq;

    #[test]
    fn numeric_s_matrix_limits() {
        let p = TwoLevelParticle::new(1.7, 0.0).unwrap();
        let s = s_matrix_numeric(&p, &CouplingForm::Linear, 3.0, 0.4).unwrap();
        let d = UnitaryTwo::diag(Complex64::from_polar(1.0, -1.7 * 0.4), Complex64::from_polar(1.0, 1.7 * 0.4));
        assert!(s.max_abs_diff(&d) < 1e-15);
        let q = TwoLevelParticle::new(1.0, 0.5).unwrap();
        let id = s_matrix_numeric(&q, &CouplingForm::Linear, 2.0, 0.0).unwrap();
        assert!(id.max_abs_diff(&UnitaryTwo::identity()) < 1e-15);
        let s = s_matrix_numeric(&q, &CouplingForm::Linear, -1.0, 2.5).unwrap();
        assert!(s.unitarity_defect() < 1e-14);
    }

    #[test]
    fn symmetric_eigen_reconstructs() {
        for &(a, b, d) in &[(1.0, 0.3, -1.0), (-2.0, -5.0, 0.5), (0.0, 1.0, 0.0)] {
            let (l, v) = symmetric_eigen(a, b, d);
            for k in 0..2 {
                let (x, y) = (v[0][k], v[1][k]);
                assert_abs_diff_eq!(a * x + b * y, l[k] * x, epsilon = 1e-14);
                assert_abs_diff_eq!(b * x + d * y, l[k] * y, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn tensor_oracle_limits() {
        let ps: Vec<_> = (1..=4).map(|k| TwoLevelParticle::new(0.5 * k as f64, 0.3).unwrap()).collect();
        let f = factor_brute_tensor(&ps, &CouplingForm::Linear, 1.1, 1.1, 2.0).unwrap();
        assert_abs_diff_eq!(f.re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.im, 0.0, epsilon = 1e-14);
        let too_many = vec![ps[0]; 13];
        assert!(matches!(
            factor_brute_tensor(&too_many, &CouplingForm::Linear, 0.0, 1.0, 1.0),
            Err(Error::EnsembleTooLarge { got: 13, max: 12 })
        ));
    }

    #[test]
    fn sine_integral_reference_values() {
        // scipy.special.sici
        let cases = [
            (0.5, 0.49310741804306674),
            (2.0, 1.605412976802695),
            (2.0000001, 1.605413022267564),
            (5.0, 1.549931244944674),
            (40.0, 1.5869851193547846),
            (-3.0, -1.848652527999468),
        ];
        for (x, si) in cases {
            assert_abs_diff_eq!(sine_integral(x), si, epsilon = 1e-14);
        }
    }

    #[test]
    fn band_closed_form_reference() {
        let spec = SpectralDensity::HomogeneousBand { omega1: 0.5, omega2: 3.0, n: 1000.0, g: 0.02 };
        assert_abs_diff_eq!(band_closed_form(&spec, 7.5).unwrap(), 0.07476021639591722, epsilon = 1e-13);
        let (v, e) = quadrature_r(&spec, 7.5, 1e-9).unwrap();
        assert!(e <= 1e-9);
        assert_abs_diff_eq!(v, 0.07476021639591722, epsilon = 1e-9);
    }

    #[test]
    fn ohmic_quadrature() {
        let spec = SpectralDensity::OhmicLike { gamma: 1.0, g: 1.0 };
        let (v, e) = quadrature_r(&spec, 1.0, 1e-4).unwrap();
        assert!(e <= 1e-4);
        assert!((v - 1.0).abs() <= 1e-3);
        assert_eq!(quadrature_r(&spec, 0.0, 1e-4).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn free_propagation_matches_spreading_law() {
        let wave = GridWave::gaussian(-40.0, 40.0, 4096, 0.0, 0.5).unwrap();
        let v = vec![0.0; wave.len()];
        let rep = kernel_diagonality(1.0, &v, &wave, 2.0, 50).unwrap();
        let expect = width_free(&PacketParams::new(0.5, 1.0, 0.0).unwrap(), 2.0).unwrap();
        assert!((rep.final_width / expect - 1.0).abs() < 1e-6);
        assert!(rep.max_norm_drift < 1e-9);
    }

    #[test]
    fn zero_horizon_has_no_spread() {
        let wave = GridWave::gaussian(-20.0, 20.0, 1024, 0.0, 1.0).unwrap();
        let v = harmonic_potential(&wave, 1.0);
        let rep = kernel_diagonality(100.0, &v, &wave, 0.0, 10).unwrap();
        assert_eq!(rep.spread_metric, 0.0);
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let wave = GridWave::gaussian(-20.0, 20.0, 128, 0.0, 1.0).unwrap();
        let v = vec![0.0; wave.len()];
        assert!(matches!(
            kernel_diagonality(1.0, &v, &wave, 1.0, 10),
            Err(Error::GridUnderResolved(_))
        ));
    }
}
