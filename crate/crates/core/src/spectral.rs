//! Stieltjes inversion of characteristic matrices: interval increments,
//! point masses and the resulting (pseudo)spectral function, plus the
//! discrete `L²(Σ)` space of a pure-jump Σ.

use nalgebra::Complex;
use rayon::prelude::*;

use crate::boundary::{eigenvalues_selfadjoint, validate_pair, BoundaryPair, PairKind};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, imag_part, psd_project};
use crate::quadrature::integrate_adaptive;
use crate::scalar::{cplx, creal, lit, pi, to_f64, CMat, CVec, Real};
use crate::system::SymmetricSystem;
use crate::weyl::characteristic_matrix;

/// `0.1 · 2^{-k}`, `k = 0..6`.
pub fn default_eps_seq<T: Real>() -> Vec<T> {
    (0..7).map(|k| lit(0.1 * 0.5f64.powi(k))).collect()
}

fn check_eps<T: Real>(eps: &[T]) -> Result<()> {
    if eps.len() < 3 {
        return Err(Error::InvalidInput("need at least three epsilon values".into()));
    }
    if eps.iter().any(|&e| !(e > T::zero())) || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("epsilon sequence must be positive and decreasing".into()));
    }
    Ok(())
}

/// Limit at `x = 0` of the polynomial through `(xs[i], ys[i])`, evaluated by
/// Neville's scheme. Returns the value and the change of the last diagonal
/// step as an error estimate.
fn neville_at_zero<T: Real>(xs: &[T], ys: &[CMat<T>]) -> (CMat<T>, T) {
    let mut p: Vec<CMat<T>> = ys.to_vec();
    let mut diag = vec![p[0].clone()];
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            // p_i <- (x_{i+m} p_i - x_i p_{i+1}) / (x_{i+m} - x_i), at x = 0.
            let (xi, xj) = (xs[i], xs[i + m]);
            p[i] = (&p[i] * creal(xj) - &p[i + 1] * creal(xi)) / creal(xj - xi);
        }
        diag.push(p[0].clone());
    }
    let k = diag.len();
    let err = (&diag[k - 1] - &diag[k - 2]).norm();
    (diag[k - 1].clone(), err)
}

/// Best extrapolation over tails of the sequence (dropping the largest
/// ε values when they only add noise).
fn extrapolate_eps<T: Real>(eps: &[T], vals: &[CMat<T>]) -> (CMat<T>, T) {
    let mut best: Option<(CMat<T>, T)> = None;
    for start in 0..=eps.len().saturating_sub(4) {
        let (v, e) = neville_at_zero(&eps[start..], &vals[start..]);
        if best.as_ref().map_or(true, |b| e < b.1) {
            best = Some((v, e));
        }
    }
    best.expect("at least one window")
}

/// Extrapolated `Σ(β) - Σ(α)` with its error estimate.
#[derive(Debug, Clone)]
pub struct Increment<T: Real> {
    pub alpha: T,
    pub beta: T,
    pub value: CMat<T>,
    pub error: T,
}

/// Relative spread that counts as a failed extrapolation.
const DIVERGENCE_TOL: f64 = 1e-6;

/// Detects a pole of `Ω` within about `ε` of the real point `x` from the
/// scaling of `ε Im Ω(x + iε)` at the two smallest `ε`.
fn pole_near<T: Real, F>(omega: &F, x: T, eps: &[T]) -> Result<Option<T>>
where
    F: Fn(Complex<T>) -> Result<CMat<T>> + Sync,
{
    let e1 = eps[eps.len() - 1];
    let e2 = eps[eps.len() - 2];
    let p1 = (imag_part(&omega(cplx(x, e1))?) * creal(e1)).norm();
    let p2 = (imag_part(&omega(cplx(x, e2))?) * creal(e2)).norm();
    // A pole at distance d gives p ∝ ε²/(d² + ε²); a regular point gives p ∝ ε².
    let ratio = p1 / p2;
    Ok(if p1 > lit(1e-9) && ratio > lit(0.5) { Some(p1) } else { None })
}

/// `lim_{ε→0} (1/π) ∫_α^β Im Ω(σ + iε) dσ`.
pub fn stieltjes_increment<T: Real, F>(omega: &F, alpha: T, beta: T, eps: &[T]) -> Result<Increment<T>>
where
    F: Fn(Complex<T>) -> Result<CMat<T>> + Sync,
{
    if !(alpha < beta) {
        return Err(Error::InvalidInput("increment interval must satisfy alpha < beta".into()));
    }
    check_eps(eps)?;
    for x in [alpha, beta] {
        if let Some(p) = pole_near(omega, x, eps)? {
            return Err(Error::ExtrapolationDivergence { spread: to_f64(p) });
        }
    }
    let pieces = to_f64((beta - alpha) / lit(0.05)).ceil().max(1.0) as usize;
    let seeds: Vec<T> = (0..=pieces).map(|i| alpha + (beta - alpha) * lit(i as f64 / pieces as f64)).collect();
    let inv_pi = creal(T::one() / pi::<T>());
    let vals: Vec<CMat<T>> = eps
        .par_iter()
        .map(|&e| {
            let f = |s: T| omega(cplx(s, e)).map(|m| imag_part(&m) * inv_pi);
            integrate_adaptive(f, &seeds, lit(1e-12), lit(1e-11), 20_000).map(|r| r.value)
        })
        .collect::<Result<_>>()?;
    let (value, error) = extrapolate_eps(eps, &vals);
    if error > lit::<T>(DIVERGENCE_TOL) * (T::one() + value.norm()) {
        return Err(Error::ExtrapolationDivergence { spread: to_f64(error) });
    }
    Ok(Increment { alpha, beta, value, error })
}

/// `lim_{ε→0} ε Im Ω(s₀ + iε)`, projected onto the PSD cone.
pub fn extract_jump<T: Real, F>(omega: &F, s0: T, eps: &[T], psd_tol: T) -> Result<CMat<T>>
where
    F: Fn(Complex<T>) -> Result<CMat<T>> + Sync,
{
    check_eps(eps)?;
    let vals: Vec<CMat<T>> = eps
        .par_iter()
        .map(|&e| omega(cplx(s0, e)).map(|m| imag_part(&m) * creal(e)))
        .collect::<Result<_>>()?;
    let (value, _) = extrapolate_eps(eps, &vals);
    let min_eig = hermitian_eigenvalues(&value).first().copied().unwrap_or_else(T::zero);
    if min_eig < -psd_tol {
        return Err(Error::NotPsd { min_eig: to_f64(min_eig) });
    }
    Ok(psd_project(&value))
}

#[derive(Debug, Clone)]
pub struct Jump<T: Real> {
    pub s: T,
    pub mass: CMat<T>,
}

/// Left-continuous matrix distribution function with `Σ(0) = 0`.
#[derive(Debug, Clone)]
pub struct SpectralFunction<T: Real> {
    pub dim: usize,
    pub window: (T, T),
    pub jumps: Vec<Jump<T>>,
    /// Interval increments for pairs without an eigenvalue solver.
    pub increments: Vec<Increment<T>>,
    /// Set when increments are nonzero, so a continuous part cannot be ruled out.
    pub possible_continuous: bool,
}

impl<T: Real> SpectralFunction<T> {
    pub fn empty(dim: usize, window: (T, T)) -> Self {
        SpectralFunction { dim, window, jumps: Vec::new(), increments: Vec::new(), possible_continuous: false }
    }

    /// `Σ(s)`: mass in `[0, s)` for `s > 0`, minus the mass in `[s, 0)`
    /// for `s ≤ 0`. Increments count once their whole interval is covered.
    pub fn eval(&self, s: T) -> CMat<T> {
        let mut out = CMat::zeros(self.dim, self.dim);
        for j in &self.jumps {
            if s > T::zero() && j.s >= T::zero() && j.s < s {
                out += &j.mass;
            } else if s <= T::zero() && j.s >= s && j.s < T::zero() {
                out -= &j.mass;
            }
        }
        for inc in &self.increments {
            if s > T::zero() && inc.alpha >= T::zero() && inc.beta <= s {
                out += &inc.value;
            } else if s <= T::zero() && inc.alpha >= s && inc.beta <= T::zero() {
                out -= &inc.value;
            }
        }
        out
    }

    pub fn support(&self) -> Vec<T> {
        self.jumps.iter().map(|j| j.s).collect()
    }
}

/// Width of the tiles used for pairs that depend on `λ`.
pub const INCREMENT_TILE: f64 = 0.25;

/// Σ_τ on a window: jumps at the eigenvalues for constant self-adjoint
/// pairs, tiled increments otherwise.
pub fn build_spectral_function<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>, window: (T, T), eps: &[T]) -> Result<SpectralFunction<T>> {
    let n = sys.dims().total();
    let (lo, hi) = window;
    if !(lo < hi) {
        return Ok(SpectralFunction::empty(n, window));
    }
    let omega = |l: Complex<T>| characteristic_matrix(sys, tau, l);
    let rep = validate_pair(tau, sys.dims(), sys.tol.sym);
    if tau.kind == PairKind::Constant && rep.selfadjoint {
        let eig = eigenvalues_selfadjoint(sys, tau, window)?;
        let jumps = eig
            .par_iter()
            .map(|e| Ok(Jump { s: e.lambda, mass: extract_jump(&omega, e.lambda, eps, sys.tol.jump_psd)? }))
            .collect::<Result<Vec<_>>>()?;
        return Ok(SpectralFunction { dim: n, window, jumps, increments: Vec::new(), possible_continuous: false });
    }
    let tiles = to_f64((hi - lo) / lit(INCREMENT_TILE)).ceil().max(1.0) as usize;
    let shift = eps[eps.len() - 1] * lit(20.0);
    let mut edges: Vec<T> = (0..=tiles).map(|i| lo + (hi - lo) * lit(i as f64 / tiles as f64)).collect();
    // Move interior edges off poles; the outer edges are the caller's.
    for e in edges.iter_mut().take(tiles).skip(1) {
        let mut x = *e;
        for _ in 0..8 {
            if pole_near(&omega, x, eps)?.is_none() {
                break;
            }
            x += shift;
        }
        *e = x;
    }
    let increments = edges
        .par_windows(2)
        .map(|w| stieltjes_increment(&omega, w[0], w[1], eps))
        .collect::<Result<Vec<_>>>()?;
    let possible_continuous = increments.iter().any(|i| i.value.norm() > sys.tol.psd);
    Ok(SpectralFunction { dim: n, window, jumps: Vec::new(), increments, possible_continuous })
}

/// `L²(Σ)` for a pure-jump Σ: elements are their values on the support.
#[derive(Debug, Clone)]
pub struct DiscreteL2Sigma<T: Real> {
    pub support: Vec<T>,
    pub weights: Vec<CMat<T>>,
    /// The support is a finite window of an infinite one.
    pub truncated: bool,
}

pub type SigmaElement<T> = Vec<CVec<T>>;

impl<T: Real> DiscreteL2Sigma<T> {
    pub fn from_spectral_function(sf: &SpectralFunction<T>, truncated: bool) -> Self {
        DiscreteL2Sigma { support: sf.support(), weights: sf.jumps.iter().map(|j| j.mass.clone()).collect(), truncated }
    }

    /// Samples `f` on the support.
    pub fn element<F: FnMut(T) -> CVec<T>>(&self, f: F) -> SigmaElement<T> {
        self.support.iter().copied().map(f).collect()
    }

    pub fn inner(&self, f: &SigmaElement<T>, g: &SigmaElement<T>) -> Complex<T> {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, (fv, gv))| acc + gv.dotc(&(a * fv)))
    }

    pub fn norm(&self, f: &SigmaElement<T>) -> T {
        self.inner(f, f).re.max(T::zero()).sqrt()
    }

    /// `s ↦ s f(s)`.
    pub fn lambda_apply(&self, f: &SigmaElement<T>) -> Result<SigmaElement<T>> {
        if self.truncated && self.grows_unbounded(f) {
            return Err(Error::UnboundedElement);
        }
        Ok(self.support.iter().zip(f).map(|(&s, v)| v * creal(s)).collect())
    }

    /// Multiplication by the indicator of `[lo, hi)`.
    pub fn spectral_projector(&self, f: &SigmaElement<T>, lo: T, hi: T) -> SigmaElement<T> {
        self.support
            .iter()
            .zip(f)
            .map(|(&s, v)| if s >= lo && s < hi { v.clone() } else { v * creal(T::zero()) })
            .collect()
    }

    /// Whether `Σ s_k² (A_k f_k, f_k)` looks divergent: terms in the outer
    /// half of the support decay no faster than `|s|^{-1}`.
    fn grows_unbounded(&self, f: &SigmaElement<T>) -> bool {
        let mut pts: Vec<(T, T)> = self
            .support
            .iter()
            .zip(self.weights.iter().zip(f))
            .filter(|(s, _)| s.abs() > T::zero())
            .map(|(&s, (a, v))| (s.abs(), s * s * v.dotc(&(a * v)).re))
            .collect();
        pts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
        let outer: Vec<(T, T)> = pts[pts.len() / 2..].iter().copied().filter(|p| p.1 > T::zero()).collect();
        if outer.len() < 3 {
            return false;
        }
        let k = lit::<T>(outer.len() as f64);
        let lx: Vec<T> = outer.iter().map(|p| p.0.ln()).collect();
        let ly: Vec<T> = outer.iter().map(|p| p.1.ln()).collect();
        let mx = lx.iter().fold(T::zero(), |a, &b| a + b) / k;
        let my = ly.iter().fold(T::zero(), |a, &b| a + b) / k;
        let sxy = lx.iter().zip(&ly).fold(T::zero(), |a, (&x, &y)| a + (x - mx) * (y - my));
        let sxx = lx.iter().fold(T::zero(), |a, &x| a + (x - mx) * (x - mx));
        sxx > T::zero() && sxy / sxx > -T::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockDims;
    use crate::linalg::max_abs_diff;
    use crate::poly::PiecewiseMatrixPoly;
    use std::f64::consts::PI;

    fn free1() -> SymmetricSystem<f64> {
        SymmetricSystem::new(
            BlockDims::new(1, 0).unwrap(),
            (0.0, PI),
            PiecewiseMatrixPoly::constant(0.0, PI, CMat::zeros(2, 2)),
            PiecewiseMatrixPoly::constant(0.0, PI, CMat::identity(2, 2)),
        )
        .unwrap()
    }

    fn e1_mass() -> CMat<f64> {
        CMat::from_row_slice(2, 2, &[creal(1.0 / PI), creal(0.0), creal(0.0), creal(0.0)])
    }

    /// Closed-form `Ω` for the `(I, 0)` pair on the free system.
    fn omega_free(l: Complex<f64>) -> Result<CMat<f64>> {
        Ok(CMat::from_row_slice(2, 2, &[(l * PI).tan(), creal(-0.5), creal(-0.5), creal(0.0)]))
    }

    #[test]
    fn increments_of_closed_form() {
        let eps = default_eps_seq();
        let gap = stieltjes_increment(&omega_free, 0.6, 1.4, &eps).unwrap();
        assert!(gap.value.norm() < 1e-6, "{}", gap.value);
        let one = stieltjes_increment(&omega_free, 0.0, 1.0, &eps).unwrap();
        assert!(max_abs_diff(&one.value, &e1_mass()) < 1e-5, "{}", one.value);
        let constant = |_: Complex<f64>| Ok(CMat::from_row_slice(2, 2, &[creal(1.0), creal(2.0), creal(2.0), creal(0.0)]));
        assert!(stieltjes_increment(&constant, -1.0, 1.0, &eps).unwrap().value.norm() < 1e-12);
        assert!(matches!(stieltjes_increment(&omega_free, 0.5, 1.0, &eps), Err(Error::ExtrapolationDivergence { .. })));
    }

    #[test]
    fn additivity() {
        let eps = default_eps_seq();
        let ac = stieltjes_increment(&omega_free, 0.2, 1.8, &eps).unwrap();
        let ab = stieltjes_increment(&omega_free, 0.2, 1.0, &eps).unwrap();
        let bc = stieltjes_increment(&omega_free, 1.0, 1.8, &eps).unwrap();
        let tol = 2.0 * (ab.error + bc.error + ac.error) + 1e-12;
        assert!(max_abs_diff(&ac.value, &(ab.value + bc.value)) < tol.max(1e-9));
    }

    #[test]
    fn jumps_from_system() {
        let sys = free1();
        let eps = default_eps_seq();
        let tau = BoundaryPair::zeroth(2);
        let om = |l| characteristic_matrix(&sys, &tau, l);
        let j = extract_jump(&om, 0.5, &eps, 1e-7).unwrap();
        assert!(max_abs_diff(&j, &e1_mass()) < 1e-8, "{j}");
        assert!(extract_jump(&om, 1.0, &eps, 1e-7).unwrap().norm() < 1e-8);

        let mixed = BoundaryPair::diagonal(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        let om = |l| characteristic_matrix(&sys, &mixed, l);
        let j = extract_jump(&om, 0.0, &eps, 1e-7).unwrap();
        assert!(max_abs_diff(&j, &e1_mass()) < 1e-8, "{j}");
    }

    #[test]
    fn spectral_function_windows() {
        let sys = free1();
        let eps = default_eps_seq();
        let sf = build_spectral_function(&sys, &BoundaryPair::zeroth(2), (-2.0, 2.0), &eps).unwrap();
        let s: Vec<f64> = sf.support();
        assert_eq!(s.len(), 4);
        for (got, want) in s.iter().zip([-1.5, -0.5, 0.5, 1.5]) {
            assert!((got - want).abs() < 1e-9);
        }
        for j in &sf.jumps {
            assert!(max_abs_diff(&j.mass, &e1_mass()) < 1e-8);
        }
        assert!(max_abs_diff(&sf.eval(1.0), &e1_mass()) < 1e-8);
        assert!(max_abs_diff(&sf.eval(-1.0), &(-e1_mass())) < 1e-8);
        assert_eq!(sf.eval(0.0).norm(), 0.0);

        let l2 = DiscreteL2Sigma::from_spectral_function(&sf, true);
        let e1 = l2.element(|_| CVec::from_vec(vec![creal(1.0), creal(0.0)]));
        assert!((l2.inner(&e1, &e1).re - 4.0 / PI).abs() < 1e-8);
        let empty = build_spectral_function(&sys, &BoundaryPair::zeroth(2), (1.0, 1.0), &eps).unwrap();
        assert!(empty.jumps.is_empty());
    }

    #[test]
    fn multiplication_operator() {
        let l2 = DiscreteL2Sigma { support: vec![2.0], weights: vec![e1_mass()], truncated: false };
        let f = l2.element(|_| CVec::from_vec(vec![creal(1.0), creal(5.0)]));
        let lf = l2.lambda_apply(&f).unwrap();
        assert!((l2.inner(&lf, &lf).re - 4.0 * l2.inner(&f, &f).re).abs() < 1e-14);
        let p = l2.spectral_projector(&f, 3.0, 4.0);
        assert_eq!(l2.norm(&p), 0.0);

        let many = DiscreteL2Sigma {
            support: (0..40).map(|k| k as f64 + 0.5).collect(),
            weights: vec![e1_mass(); 40],
            truncated: true,
        };
        let g = many.element(|_| CVec::from_vec(vec![creal(1.0), creal(0.0)]));
        assert!(matches!(many.lambda_apply(&g), Err(Error::UnboundedElement)));
        let h = many.element(|s| CVec::from_vec(vec![creal(1.0 / (s * s)), creal(0.0)]));
        assert!(many.lambda_apply(&h).is_ok());
    }
}
