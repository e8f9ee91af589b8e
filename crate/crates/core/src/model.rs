//! Two-level particles of the internal environment, their dressed eigensystems and
//! single-particle S-matrices.
//!
//! A particle `j` carries the Hamiltonian
//!
//! ```text
//! h_j(x) = ω_j (|e⟩⟨e| − |g⟩⟨g|) + f_j(x) |e⟩⟨g| + f_j(x) |g⟩⟨e|
//! ```
//!
//! in the basis `(|e⟩, |g⟩)`, with `ħ = 1`. For a fixed collective position `x` its
//! eigenvalues are `±Ω = ±sqrt(f² + ω²)` and the mixing angle satisfies `tan θ = f/ω`.

use std::fmt;
use std::ops::Mul;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{check_time, Error, Result};

/// Tolerance used when validating the normalization of a [`QubitState`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// One particle of the internal environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParticle {
    /// Level splitting ω (inverse time).
    pub omega: f64,
    /// Linear coupling strength g (inverse time per unit length).
    pub g: f64,
    /// Position offset of the particle relative to the collective coordinate.
    pub ell: f64,
}

impl TwoLevelParticle {
    pub fn new(omega: f64, g: f64) -> Result<Self> {
        Self::with_offset(omega, g, 0.0)
    }

    pub fn with_offset(omega: f64, g: f64, ell: f64) -> Result<Self> {
        let p = Self { omega, g, ell };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::NonPositiveOmega(self.omega));
        }
        if !self.g.is_finite() {
            return Err(crate::error::invalid("g", format!("must be finite, got {}", self.g)));
        }
        if !self.ell.is_finite() {
            return Err(crate::error::invalid("ell", format!("must be finite, got {}", self.ell)));
        }
        Ok(())
    }
}

/// Position dependence of the coupling `f_j(x) = f(x + ell_j)`.
#[derive(Clone, Default)]
pub enum CouplingForm {
    /// `f_j(x) = g_j (x + ell_j)`.
    #[default]
    Linear,
    /// `f_j(x) = f(x + ell_j)` for an arbitrary real function `f`; `g_j` is ignored.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl CouplingForm {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CouplingForm::Custom(Arc::new(f))
    }

    /// Evaluates `f_j(x)` for particle `p`.
    pub fn eval(&self, p: &TwoLevelParticle, x: f64) -> f64 {
        match self {
            CouplingForm::Linear => p.g * (x + p.ell),
            CouplingForm::Custom(f) => f(x + p.ell),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, CouplingForm::Linear)
    }
}

impl fmt::Debug for CouplingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingForm::Linear => f.write_str("Linear"),
            CouplingForm::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Eigensystem of `h_j(x)` at a fixed collective position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedEigensystem {
    /// Mixing angle θ on the principal branch, `tan θ = f/ω`.
    pub theta: f64,
    /// Dressed frequency Ω = sqrt(f² + ω²).
    pub omega_rabi: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    /// The coupling value f(x) the system was built from.
    pub coupling: f64,
    pub omega: f64,
}

impl DressedEigensystem {
    /// `|+[x]⟩ = cos(θ/2)|e⟩ + sin(θ/2)|g⟩`.
    pub fn plus_state(&self) -> QubitState {
        let (s, c) = (0.5 * self.theta).sin_cos();
        QubitState::unchecked(Complex64::new(c, 0.0), Complex64::new(s, 0.0))
    }

    /// `|−[x]⟩ = sin(θ/2)|e⟩ − cos(θ/2)|g⟩`.
    pub fn minus_state(&self) -> QubitState {
        let (s, c) = (0.5 * self.theta).sin_cos();
        QubitState::unchecked(Complex64::new(s, 0.0), Complex64::new(-c, 0.0))
    }

    /// `cos θ = ω/Ω`, evaluated without going through the angle.
    pub fn cos_theta(&self) -> f64 {
        self.omega / self.omega_rabi
    }

    /// `sin θ = f/Ω`.
    pub fn sin_theta(&self) -> f64 {
        self.coupling / self.omega_rabi
    }
}

pub fn dressed_eigensystem(
    p: &TwoLevelParticle,
    coupling: &CouplingForm,
    x: f64,
) -> Result<DressedEigensystem> {
    if !(p.omega > 0.0) || !p.omega.is_finite() {
        return Err(Error::NonPositiveOmega(p.omega));
    }
    let f = coupling.eval(p, x);
    if !f.is_finite() {
        return Err(Error::NonFiniteCoupling { x, value: f });
    }
    let omega_rabi = f.hypot(p.omega);
    Ok(DressedEigensystem {
        theta: (f / p.omega).atan(),
        omega_rabi,
        v_plus: omega_rabi,
        v_minus: -omega_rabi,
        coupling: f,
        omega: p.omega,
    })
}

/// 2×2 complex matrix in row-major order, basis `(|e⟩, |g⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryTwo(pub [[Complex64; 2]; 2]);

impl UnitaryTwo {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        UnitaryTwo([[one, zero], [zero, one]])
    }

    pub fn diag(a: Complex64, b: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        UnitaryTwo([[a, zero], [zero, b]])
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        UnitaryTwo([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, s: &QubitState) -> [Complex64; 2] {
        let m = &self.0;
        [
            m[0][0] * s.c_e + m[0][1] * s.c_g,
            m[1][0] * s.c_e + m[1][1] * s.c_g,
        ]
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &UnitaryTwo) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// `max |(U†U − I)_{rc}|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&UnitaryTwo::identity())
    }
}

impl Mul for UnitaryTwo {
    type Output = UnitaryTwo;

    fn mul(self, rhs: UnitaryTwo) -> UnitaryTwo {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        UnitaryTwo(out)
    }
}

/// Single-particle S-matrix `S_j(x;t) = Σ_± e^{∓iΩt} |±[x]⟩⟨±[x]| = e^{−i h_j(x) t}`.
///
/// Entries are `cos Ωt ∓ i sin Ωt cos θ` on the diagonal and `−i sin Ωt sin θ` off it.
pub fn s_matrix_single(
    p: &TwoLevelParticle,
    coupling: &CouplingForm,
    x: f64,
    t: f64,
) -> Result<UnitaryTwo> {
    check_time(t)?;
    let eig = dressed_eigensystem(p, coupling, x)?;
    Ok(s_matrix_from_eigensystem(&eig, t))
}

pub(crate) fn s_matrix_from_eigensystem(eig: &DressedEigensystem, t: f64) -> UnitaryTwo {
    let (s, c) = (eig.omega_rabi * t).sin_cos();
    let (ct, st) = (eig.cos_theta(), eig.sin_theta());
    let off = Complex64::new(0.0, -s * st);
    UnitaryTwo([
        [Complex64::new(c, -s * ct), off],
        [off, Complex64::new(c, s * ct)],
    ])
}

/// Normalized two-level state `c_e|e⟩ + c_g|g⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub c_e: Complex64,
    pub c_g: Complex64,
}

impl QubitState {
    pub fn new(c_e: Complex64, c_g: Complex64) -> Result<Self> {
        let s = Self { c_e, c_g };
        s.check_normalized()?;
        Ok(s)
    }

    fn unchecked(c_e: Complex64, c_g: Complex64) -> Self {
        Self { c_e, c_g }
    }

    pub fn ground() -> Self {
        Self::unchecked(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn excited() -> Self {
        Self::unchecked(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// `cos(θ/2)|e⟩ + e^{iφ} sin(θ/2)|g⟩`.
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Self::unchecked(Complex64::new(c, 0.0), Complex64::from_polar(s, phi))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_e.norm_sqr() + self.c_g.norm_sqr()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORMALIZATION_TOL || !n.is_finite() {
            return Err(Error::UnnormalizedState(n));
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QubitState) -> Complex64 {
        self.c_e.conj() * other.c_e + self.c_g.conj() * other.c_g
    }
}

/// Off-diagonal weight `∏_j ⟨d_j|l_j⟩` of a cat state `|L⟩∏|l_j⟩ + |D⟩∏|d_j⟩`.
///
/// Each pair is `(d_j, l_j)`. Overlaps whose modulus is at rounding level
/// (≤ 4 ε) are treated as orthogonal, making the product exactly zero.
pub fn cat_overlap(pairs: &[(QubitState, QubitState)]) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for (d, l) in pairs {
        d.check_normalized()?;
        l.check_normalized()?;
        let o = d.inner(l);
        if o.norm() <= 4.0 * f64::EPSILON {
            return Ok(Complex64::new(0.0, 0.0));
        }
        acc *= o;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn three_four_five() {
        let p = TwoLevelParticle::new(3.0, 4.0).unwrap();
        let e = dressed_eigensystem(&p, &CouplingForm::Linear, 1.0).unwrap();
        assert_abs_diff_eq!(e.omega_rabi, 5.0, epsilon = 1e-15);
        assert_eq!(e.v_plus, -e.v_minus);
        assert_abs_diff_eq!(e.theta.tan(), 4.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn decoupled_case() {
        let p = TwoLevelParticle::new(1.0, 0.0).unwrap();
        let e = dressed_eigensystem(&p, &CouplingForm::Linear, 7.0).unwrap();
        assert_eq!(e.theta, 0.0);
        assert_eq!(e.omega_rabi, 1.0);
    }

    #[test]
    fn linear_substitution() {
        let p = TwoLevelParticle::new(1.0, 0.1).unwrap();
        let e = dressed_eigensystem(&p, &CouplingForm::Linear, 2.0).unwrap();
        assert_abs_diff_eq!(e.theta, 0.2_f64.atan(), epsilon = 1e-15);
        assert_abs_diff_eq!(e.omega_rabi, 1.04_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn offset_and_custom_coupling() {
        let p = TwoLevelParticle::with_offset(1.0, 0.5, 2.0).unwrap();
        assert_eq!(CouplingForm::Linear.eval(&p, 1.0), 1.5);
        let cubic = CouplingForm::custom(|y| y * y * y);
        assert_eq!(cubic.eval(&p, 1.0), 27.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            TwoLevelParticle::new(0.0, 1.0).unwrap_err(),
            Error::NonPositiveOmega(0.0)
        );
        let p = TwoLevelParticle { omega: -1.0, g: 0.0, ell: 0.0 };
        assert!(matches!(
            dressed_eigensystem(&p, &CouplingForm::Linear, 0.0),
            Err(Error::NonPositiveOmega(_))
        ));
        let p = TwoLevelParticle::new(1.0, 1.0).unwrap();
        let blowup = CouplingForm::custom(|y| 1.0 / y);
        assert!(matches!(
            dressed_eigensystem(&p, &blowup, 0.0),
            Err(Error::NonFiniteCoupling { .. })
        ));
        assert!(s_matrix_single(&p, &CouplingForm::Linear, 0.0, -1.0).is_err());
    }

    #[test]
    fn eigenvectors_diagonalize_h() {
        let p = TwoLevelParticle::new(0.7, 0.9).unwrap();
        let e = dressed_eigensystem(&p, &CouplingForm::Linear, -1.3).unwrap();
        let f = e.coupling;
        let h = UnitaryTwo([[c(p.omega, 0.0), c(f, 0.0)], [c(f, 0.0), c(-p.omega, 0.0)]]);
        for (v, lam) in [(e.plus_state(), e.v_plus), (e.minus_state(), e.v_minus)] {
            let hv = h.apply(&v);
            assert_abs_diff_eq!((hv[0] - v.c_e * lam).norm(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!((hv[1] - v.c_g * lam).norm(), 0.0, epsilon = 1e-14);
        }
        assert!(e.theta < 0.0);
    }

    #[test]
    fn s_matrix_limits() {
        let p = TwoLevelParticle::new(1.3, 0.4).unwrap();
        let s0 = s_matrix_single(&p, &CouplingForm::Linear, 2.0, 0.0).unwrap();
        assert_eq!(s0, UnitaryTwo::identity());

        let t = 0.83;
        let s = s_matrix_single(&p, &CouplingForm::Linear, 0.0, t).unwrap();
        let expect = UnitaryTwo::diag(Complex64::from_polar(1.0, -1.3 * t), Complex64::from_polar(1.0, 1.3 * t));
        assert!(s.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn s_matrix_matches_projector_sum() {
        let p = TwoLevelParticle::new(1.0, 0.1).unwrap();
        let e = dressed_eigensystem(&p, &CouplingForm::Linear, 1.0).unwrap();
        let t = PI / 2.0;
        let s = s_matrix_single(&p, &CouplingForm::Linear, 1.0, t).unwrap();
        let mut sum = [[c(0.0, 0.0); 2]; 2];
        for (v, lam) in [(e.plus_state(), e.v_plus), (e.minus_state(), e.v_minus)] {
            let ph = Complex64::from_polar(1.0, -lam * t);
            let a = [v.c_e, v.c_g];
            for r in 0..2 {
                for k in 0..2 {
                    sum[r][k] += ph * a[r] * a[k].conj();
                }
            }
        }
        assert!(s.max_abs_diff(&UnitaryTwo(sum)) < 1e-15);
    }

    #[test]
    fn s_matrix_frozen_value() {
        // expm(-i h t) for ω=1, f=0.1, t=π/2 computed with scipy.linalg.expm.
        let p = TwoLevelParticle::new(1.0, 0.1).unwrap();
        let s = s_matrix_single(&p, &CouplingForm::Linear, 1.0, PI / 2.0).unwrap();
        let expect = UnitaryTwo([
            [c(-7.83436410e-03, -0.99500665), c(0.0, -0.09950067)],
            [c(0.0, -0.09950067), c(-7.83436410e-03, 0.99500665)],
        ]);
        assert!(s.max_abs_diff(&expect) < 1e-8);
        assert_abs_diff_eq!(s.det().norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cat_overlap_cases() {
        let g = QubitState::ground();
        let e = QubitState::excited();
        let tilt = QubitState::from_bloch(0.3, 0.1);
        assert!((cat_overlap(&[(g, g), (tilt, tilt)]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(cat_overlap(&[(g, g), (g, e), (tilt, g)]).unwrap(), c(0.0, 0.0));

        // Rotated orthogonal pair: only rounding separates the overlap from zero.
        let a = QubitState::from_bloch(1.1, 0.4);
        let b = QubitState::from_bloch(1.1 - PI, 0.4);
        assert_eq!(cat_overlap(&[(a, b)]).unwrap(), c(0.0, 0.0));

        // Overlap 0.9 per pair.
        let d = QubitState::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let l = QubitState::new(c((1.0f64 - 0.81).sqrt(), 0.0), c(0.9, 0.0)).unwrap();
        for n in [1usize, 10, 100, 1000] {
            let pairs = vec![(d, l); n];
            let v = cat_overlap(&pairs).unwrap();
            assert_abs_diff_eq!(v.re, 0.9f64.powi(n as i32), epsilon = 1e-12);
        }
        assert!(cat_overlap(&vec![(d, l); 1000]).unwrap().norm() < 1e-40);

        let bad = QubitState { c_e: c(1.0, 0.0), c_g: c(1.0, 0.0) };
        assert!(matches!(cat_overlap(&[(bad, g)]), Err(Error::UnnormalizedState(_))));
    }
}
