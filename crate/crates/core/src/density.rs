//! Reduced density matrices of the collective coordinate sampled on a square grid.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::decoherence::{factor_product, FactorMode};
use crate::error::{check_time, invalid, Error, Result};
use crate::model::{CouplingForm, TwoLevelParticle};

/// Uniform grid `x_min, …, x_max` (endpoints included) used for both axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = Self { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min < self.x_max) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(invalid("grid", format!("need x_min < x_max, got [{}, {}]", self.x_min, self.x_max)));
        }
        if self.n < 2 {
            return Err(invalid("grid", format!("need at least 2 points, got {}", self.n)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    fn nearest_index(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.spacing()).round();
        k.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// Coherent superposition of two Gaussian packets of width `d` centred at `±a`,
/// `φ(x) = (8πd²)^{-1/4} [exp(−(x−a)²/4d²) + exp(−(x+a)²/4d²)]`.
///
/// The prefactor normalizes φ only when the packets do not overlap (`a ≫ d`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPair {
    pub d: f64,
    pub a: f64,
}

impl GaussianPair {
    pub fn new(d: f64, a: f64) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() || !a.is_finite() {
            return Err(invalid("d", format!("packet width must be > 0, got {d}")));
        }
        Ok(Self { d, a })
    }

    pub fn prefactor(&self) -> f64 {
        (8.0 * PI * self.d * self.d).powf(-0.25)
    }

    pub fn amplitude(&self, x: f64) -> f64 {
        let w = 4.0 * self.d * self.d;
        self.prefactor() * ((-(x - self.a).powi(2) / w).exp() + (-(x + self.a).powi(2) / w).exp())
    }

    /// Interval the grid must cover to hold both packets.
    pub fn support(&self) -> (f64, f64) {
        let r = self.a.abs() + 5.0 * self.d;
        (-r, r)
    }

    /// The four terms `P_kl(x, x′, t)`, ordered `[P11, P10, P01, P00]`, whose sum is `|ρ|`.
    /// `P11` sits at `(a, a)`, `P10` at `(a, −a)`, `P01` at `(−a, a)`, `P00` at `(−a, −a)`.
    pub fn peak_terms(&self, gamma: f64, t: f64, x: f64, x_prime: f64) -> [f64; 4] {
        let w = 4.0 * self.d * self.d;
        let h = 1.0 / (8.0 * PI * self.d * self.d).sqrt();
        let decay = (-gamma * t * (x - x_prime).powi(2)).exp();
        let g = |u: f64, c: f64| (-(u - c).powi(2) / w).exp();
        let a = self.a;
        [
            h * decay * g(x, a) * g(x_prime, a),
            h * decay * g(x, a) * g(x_prime, -a),
            h * decay * g(x, -a) * g(x_prime, a),
            h * decay * g(x, -a) * g(x_prime, -a),
        ]
    }
}

/// Superposition of two plane waves `(e^{ik₁x} + e^{ik₂x}) / sqrt(4π)` freely evolving with mass `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWavePair {
    pub k1: f64,
    pub k2: f64,
    pub m: f64,
}

impl PlaneWavePair {
    pub fn new(k1: f64, k2: f64, m: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(invalid("m", format!("mass must be > 0, got {m}")));
        }
        if !k1.is_finite() || !k2.is_finite() {
            return Err(invalid("k", "wave numbers must be finite"));
        }
        Ok(Self { k1, k2, m })
    }

    /// `φ(x, t) = (e^{i(k₁x − k₁²t/2m)} + e^{i(k₂x − k₂²t/2m)}) / sqrt(4π)`.
    pub fn amplitude(&self, x: f64, t: f64) -> Complex64 {
        let phase = |k: f64| k * x - k * k * t / (2.0 * self.m);
        (Complex64::from_polar(1.0, phase(self.k1)) + Complex64::from_polar(1.0, phase(self.k2))) / (4.0 * PI).sqrt()
    }

    /// Undecohered `ρ₀(x, x′, t)`, summed term by term.
    pub fn rho0(&self, x: f64, x_prime: f64, t: f64) -> Complex64 {
        let (k1, k2) = (self.k1, self.k2);
        let free = (k1 * k1 - k2 * k2) * t / (2.0 * self.m);
        let terms = [
            k1 * (x - x_prime),
            k2 * (x - x_prime),
            free + k2 * x - k1 * x_prime,
            -free + k1 * x - k2 * x_prime,
        ];
        terms
            .iter()
            .map(|&phi| Complex64::from_polar(1.0, phi))
            .sum::<Complex64>()
            / (4.0 * PI)
    }

    /// Diagonal `ρ₀(x, x, t) = (2 + 2cos((k₁−k₂)x + (k₂²−k₁²)t/2m)) / 4π`.
    pub fn diagonal(&self, x: f64, t: f64) -> f64 {
        let (k1, k2) = (self.k1, self.k2);
        (2.0 + 2.0 * ((k1 - k2) * x + (k2 * k2 - k1 * k1) * t / (2.0 * self.m)).cos()) / (4.0 * PI)
    }
}

/// What produced the off-diagonal weights of a [`DensityGrid`].
#[derive(Debug, Clone, PartialEq)]
pub enum Decoherence {
    None,
    /// `exp(−γt(x−x′)²) exp(i(x²−x′²) s)`.
    Rate { gamma: f64, s_phase: f64 },
    Ensemble { particles: usize, mode: FactorMode },
}

/// `ρ(x_i, x′_j, t)` on a square grid, row `i` indexing `x` and column `j` indexing `x′`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub grid: GridSpec,
    pub t: f64,
    pub values: Vec<Complex64>,
    pub decoherence: Decoherence,
}

impl DensityGrid {
    /// Builds `φ(x) φ*(x′)` for a pure collective state.
    pub fn pure(grid: GridSpec, psi: impl Fn(f64) -> Complex64) -> Result<Self> {
        grid.validate()?;
        let amps: Vec<Complex64> = grid.points().into_iter().map(psi).collect();
        let mut values = Vec::with_capacity(grid.n * grid.n);
        for a in &amps {
            values.extend(amps.iter().map(|b| a * b.conj()));
        }
        Ok(Self { grid, t: 0.0, values, decoherence: Decoherence::None })
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.n + j]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `max_ij |ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Discrete purity `tr(ρ²) Δx²`.
    pub fn purity(&self) -> f64 {
        let dx = self.grid.spacing();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx * dx
    }

    /// Discrete trace `Σ_i ρ_ii Δx`.
    pub fn trace(&self) -> f64 {
        self.diagonal().iter().map(|v| v.re).sum::<f64>() * self.grid.spacing()
    }
}

pub fn rho_gaussian(pair: &GaussianPair, gamma: f64, s_phase: f64, t: f64, grid: GridSpec) -> Result<DensityGrid> {
    grid.validate()?;
    check_time(t)?;
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("decay rate must be >= 0, got {gamma}")));
    }
    let (lo, hi) = pair.support();
    // Slack of a few ulps so that grids built from the nominal support pass.
    let slack = 1e-12 * hi.abs().max(1.0);
    if grid.x_min > lo + slack || grid.x_max < hi - slack {
        return Err(Error::GridTooNarrow { x_min: grid.x_min, x_max: grid.x_max, lo, hi });
    }
    let xs = grid.points();
    let amps: Vec<f64> = xs.iter().map(|&x| pair.amplitude(x)).collect();
    let mut values = Vec::with_capacity(grid.n * grid.n);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &xp) in xs.iter().enumerate() {
            let decay = (-gamma * t * (x - xp).powi(2)).exp();
            let phase = (x * x - xp * xp) * s_phase;
            values.push(Complex64::from_polar(amps[i] * amps[j] * decay, phase));
        }
    }
    Ok(DensityGrid { grid, t, values, decoherence: Decoherence::Rate { gamma, s_phase } })
}

pub fn rho_plane_waves(pair: &PlaneWavePair, gamma: f64, t: f64, grid: GridSpec) -> Result<DensityGrid> {
    grid.validate()?;
    check_time(t)?;
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("decay rate must be >= 0, got {gamma}")));
    }
    let xs = grid.points();
    let mut values = Vec::with_capacity(grid.n * grid.n);
    for &x in &xs {
        for &xp in &xs {
            let decay = (-gamma * t * (x - xp).powi(2)).exp();
            values.push(pair.rho0(x, xp, t) * decay);
        }
    }
    Ok(DensityGrid { grid, t, values, decoherence: Decoherence::Rate { gamma, s_phase: 0.0 } })
}

/// Multiplies every sample of a pure-state grid by the ensemble factor `F_N(x′, x, t)`.
pub fn apply_ensemble_decoherence(
    base: &DensityGrid,
    particles: &[TwoLevelParticle],
    coupling: &CouplingForm,
    t: f64,
    mode: FactorMode,
) -> Result<DensityGrid> {
    if particles.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    check_time(t)?;
    let xs = base.grid.points();
    let n = base.n();
    let mut values = base.values.clone();
    for (i, &x) in xs.iter().enumerate() {
        for (j, &xp) in xs.iter().enumerate() {
            if i == j {
                continue;
            }
            let f = factor_product(particles, coupling, x, xp, t, mode)?;
            values[i * n + j] *= f.factor.value;
        }
    }
    Ok(DensityGrid {
        grid: base.grid,
        t,
        values,
        decoherence: Decoherence::Ensemble { particles: particles.len(), mode },
    })
}

/// `|ρ|` at `(a, a)`, `(a, −a)`, `(−a, a)`, `(−a, −a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakHeights {
    pub p11: f64,
    pub p10: f64,
    pub p01: f64,
    pub p00: f64,
}

impl PeakHeights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.p11, self.p10, self.p01, self.p00]
    }

    /// Mean off-diagonal height over mean diagonal height.
    pub fn coherence_ratio(&self) -> f64 {
        (self.p10 + self.p01) / (self.p11 + self.p00)
    }
}

/// Minimum number of samples per packet width for [`peak_heights`].
pub const MIN_POINTS_PER_WIDTH: f64 = 8.0;

/// Peak heights from the grid samples nearest to `(±a, ±a)`.
///
/// `ln|ρ|` is interpolated with a 3×3 tensor-product quadratic around the nearest
/// sample, which is exact for a single Gaussian peak and removes the offset between the
/// grid and the peak centres. When the stencil holds underflowed samples the nearest
/// sample is returned as is.
pub fn peak_heights(grid: &DensityGrid, pair: &GaussianPair) -> Result<PeakHeights> {
    let spec = grid.grid;
    let dx = spec.spacing();
    if pair.d / dx < MIN_POINTS_PER_WIDTH {
        return Err(Error::UnresolvedPeaks(format!(
            "{:.2} points per width, need {MIN_POINTS_PER_WIDTH}",
            pair.d / dx
        )));
    }
    let a = pair.a;
    for c in [a, -a] {
        let k = spec.nearest_index(c);
        if k == 0 || k + 1 >= spec.n || (spec.point(k) - c).abs() > dx {
            return Err(Error::UnresolvedPeaks(format!("peak centre {c} is not inside the grid")));
        }
    }
    let at = |x: f64, xp: f64| interpolate_log_abs(grid, x, xp);
    Ok(PeakHeights { p11: at(a, a), p10: at(a, -a), p01: at(-a, a), p00: at(-a, -a) })
}

fn interpolate_log_abs(grid: &DensityGrid, x: f64, xp: f64) -> f64 {
    let spec = grid.grid;
    let dx = spec.spacing();
    let (i, j) = (spec.nearest_index(x), spec.nearest_index(xp));
    let nearest = grid.get(i, j).norm();
    let u = (x - spec.point(i)) / dx;
    let v = (xp - spec.point(j)) / dx;
    let mut logs = [[0.0; 3]; 3];
    for (di, row) in logs.iter_mut().enumerate() {
        for (dj, cell) in row.iter_mut().enumerate() {
            let m = grid.get(i + di - 1, j + dj - 1).norm();
            if !(m > f64::MIN_POSITIVE) {
                return nearest;
            }
            *cell = m.ln();
        }
    }
    let lu = lagrange3(u);
    let lv = lagrange3(v);
    let mut acc = 0.0;
    for (di, wu) in lu.iter().enumerate() {
        for (dj, wv) in lv.iter().enumerate() {
            acc += wu * wv * logs[di][dj];
        }
    }
    acc.exp()
}

// Quadratic Lagrange weights on nodes −1, 0, 1.
fn lagrange3(u: f64) -> [f64; 3] {
    [0.5 * u * (u - 1.0), (1.0 - u) * (1.0 + u), 0.5 * u * (u + 1.0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn standard() -> (GaussianPair, GridSpec) {
        (GaussianPair::new(1.0, 3.0).unwrap(), GridSpec::new(-8.0, 8.0, 256).unwrap())
    }

    #[test]
    fn grid_points_hit_endpoints() {
        let g = GridSpec::new(-1.0, 2.0, 7).unwrap();
        assert_eq!(g.point(0), -1.0);
        assert_eq!(g.point(6), 2.0);
        assert_abs_diff_eq!(g.spacing(), 0.5);
        assert!(GridSpec::new(1.0, 1.0, 5).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn gaussian_grid_is_hermitian_with_real_diagonal() {
        let (pair, grid) = standard();
        let rho = rho_gaussian(&pair, 0.3, 0.17, 1.1, grid).unwrap();
        assert!(rho.hermiticity_defect() <= 1e-12);
        for v in rho.diagonal() {
            assert!(v.im.abs() <= 1e-12 && v.re >= -1e-12);
        }
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let pair = GaussianPair::new(1.0, 3.0).unwrap();
        let r = rho_gaussian(&pair, 0.1, 0.0, 1.0, GridSpec::new(-7.0, 8.0, 64).unwrap());
        assert!(matches!(r, Err(Error::GridTooNarrow { .. })));
    }

    #[test]
    fn four_peak_decomposition_is_exact() {
        let (pair, grid) = standard();
        let (gamma, t) = (0.05, 0.7);
        let rho = rho_gaussian(&pair, gamma, 0.2, t, grid).unwrap();
        let xs = grid.points();
        let mut worst = 0.0_f64;
        for (i, &x) in xs.iter().enumerate() {
            for (j, &xp) in xs.iter().enumerate() {
                let sum: f64 = pair.peak_terms(gamma, t, x, xp).iter().sum();
                worst = worst.max((rho.get(i, j).norm() - sum).abs());
            }
        }
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn peaks_start_equal_and_decay_off_diagonal() {
        let (pair, grid) = standard();
        let h0 = peak_heights(&rho_gaussian(&pair, 0.0, 0.0, 0.0, grid).unwrap(), &pair).unwrap();
        let ref_height = 1.0 / (8.0 * PI).sqrt();
        for h in h0.as_array() {
            // Overlap of the far packet adds a relative e^{-9} to each amplitude and bends
            // ln|ρ| slightly away from a quadratic.
            assert_abs_diff_eq!(h, ref_height * (1.0 + (-9.0f64).exp()).powi(2), epsilon = 1e-7);
        }
        // γ t a² = 1.
        let gamma = 1.0 / 9.0;
        let h = peak_heights(&rho_gaussian(&pair, gamma, 0.0, 1.0, grid).unwrap(), &pair).unwrap();
        assert_abs_diff_eq!(h.p11, h0.p11, epsilon = 1e-9);
        assert!((h.coherence_ratio() - (-4.0f64).exp()).abs() <= 1e-6);

        let late = peak_heights(&rho_gaussian(&pair, 1.0, 0.0, 1e4, grid).unwrap(), &pair).unwrap();
        assert!(late.p10 < 1e-12 && late.p01 < 1e-12);
        assert_abs_diff_eq!(late.p00, h0.p00, epsilon = 1e-9);
    }

    #[test]
    fn coarse_grid_is_unresolved() {
        let pair = GaussianPair::new(1.0, 3.0).unwrap();
        let rho = rho_gaussian(&pair, 0.1, 0.0, 1.0, GridSpec::new(-8.0, 8.0, 64).unwrap()).unwrap();
        assert!(matches!(peak_heights(&rho, &pair), Err(Error::UnresolvedPeaks(_))));
    }

    #[test]
    fn purity_decreases() {
        let (pair, _) = standard();
        let grid = GridSpec::new(-8.0, 8.0, 128).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..8 {
            let p = rho_gaussian(&pair, 0.2, 0.0, k as f64 * 0.5, grid).unwrap().purity();
            assert!(p <= last + 1e-15);
            last = p;
        }
    }

    #[test]
    fn plane_wave_terms_match_outer_product() {
        let pw = PlaneWavePair::new(1.3, -0.4, 2.0).unwrap();
        let t = 0.9;
        let phi = |x: f64| {
            (Complex64::from_polar(1.0, pw.k1 * x - pw.k1 * pw.k1 * t / (2.0 * pw.m))
                + Complex64::from_polar(1.0, pw.k2 * x - pw.k2 * pw.k2 * t / (2.0 * pw.m)))
                / (4.0 * PI).sqrt()
        };
        for (x, xp) in [(0.3, -1.2), (2.0, 2.0), (-3.5, 0.1)] {
            let direct = phi(x) * phi(xp).conj();
            assert!((pw.rho0(x, xp, t) - direct).norm() < 1e-15);
            assert!((pw.amplitude(x, t) - phi(x)).norm() < 1e-15);
        }
        assert_abs_diff_eq!(pw.rho0(0.7, 0.7, t).re, pw.diagonal(0.7, t), epsilon = 1e-15);
    }

    #[test]
    fn plane_wave_decoherence_leaves_diagonal() {
        let pw = PlaneWavePair::new(1.0, 2.0, 1.0).unwrap();
        let grid = GridSpec::new(-5.0, 5.0, 41).unwrap();
        let clean = rho_plane_waves(&pw, 0.0, 1.5, grid).unwrap();
        let noisy = rho_plane_waves(&pw, 5.0, 1.5, grid).unwrap();
        assert_eq!(clean.diagonal(), noisy.diagonal());
        assert!(noisy.get(0, 40).norm() < 1e-12);
        let single = rho_plane_waves(&PlaneWavePair::new(1.0, 1.0, 1.0).unwrap(), 0.0, 1.0, grid).unwrap();
        // Identical wave numbers: ρ depends on x − x′ only.
        assert!((single.get(3, 5) - single.get(10, 12)).norm() < 1e-14);
    }

    #[test]
    fn ensemble_decoherence_matches_rate_form() {
        let (pair, _) = standard();
        let grid = GridSpec::new(-8.0, 8.0, 48).unwrap();
        let particles: Vec<_> = (1..=5).map(|k| TwoLevelParticle::new(0.4 * k as f64, 0.02).unwrap()).collect();
        let t = 2.3;
        let gamma = crate::decoherence::r_sum(&particles, t) / t;
        let base = DensityGrid::pure(grid, |x| Complex64::new(pair.amplitude(x), 0.0)).unwrap();
        let rho = apply_ensemble_decoherence(&base, &particles, &CouplingForm::Linear, t, FactorMode::Weak).unwrap();
        let reference = rho_gaussian(&pair, gamma, 0.0, t, grid).unwrap();
        for (a, b) in rho.values.iter().zip(&reference.values) {
            assert!((a.norm() - b.norm()).abs() <= 1e-10);
        }
        assert_eq!(rho.diagonal(), base.diagonal());
        assert!(apply_ensemble_decoherence(&base, &[], &CouplingForm::Linear, t, FactorMode::Weak).is_err());
    }
}
