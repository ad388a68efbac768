//! Boundary maps for a regular right endpoint, boundary pairs `(C₀, C₁)`,
//! the boundary-value problem and real eigenvalues for self-adjoint pairs.

use std::sync::Arc;

use nalgebra::{Complex, ComplexField};
use rayon::prelude::*;

use crate::block::BlockDims;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::{condition_number, imag_part, max_abs_diff, min_hermitian_eigenvalue, null_space, rank, singular_values, solve_conditioned};
use crate::poly::MatrixPoly;
use crate::propagator::{align_mesh, monodromy, propagate_forced, propagate_on_mesh};
use crate::scalar::{cplx, creal, imag_unit, lit, to_f64, CMat, CVec, Real};
use crate::system::{weighted_inner_product, SymmetricSystem};

/// `Γ'₀ y = G0a y(a) + G0b y(b)` and `Γ'₁ y = G1a y(a) + G1b y(b)`, with
/// values in `H₀ ⊕ H` (same block layout as the state space).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMaps<T: Real> {
    pub g0a: CMat<T>,
    pub g0b: CMat<T>,
    pub g1a: CMat<T>,
    pub g1b: CMat<T>,
}

impl<T: Real> BoundaryMaps<T> {
    pub fn new(dims: BlockDims) -> Self {
        let n = dims.total();
        let (h, hh, off) = (dims.h, dims.hhat, dims.h0());
        let one = creal(T::one());
        let half = creal(lit::<T>(0.5));
        let i = imag_unit::<T>();
        let mut g0a = CMat::zeros(n, n);
        let mut g0b = CMat::zeros(n, n);
        let mut g1a = CMat::zeros(n, n);
        let mut g1b = CMat::zeros(n, n);
        for k in 0..h {
            // Γ'₀ = (-y₁(a), ..., y₀(b)), Γ'₁ = (y₀(a), ..., -y₁(b)).
            g0a[(k, off + k)] = -one;
            g0b[(off + k, k)] = one;
            g1a[(k, k)] = one;
            g1b[(off + k, off + k)] = -one;
        }
        for k in h..h + hh {
            g0a[(k, k)] = i;
            g0b[(k, k)] = -i;
            g1a[(k, k)] = half;
            g1b[(k, k)] = half;
        }
        BoundaryMaps { g0a, g0b, g1a, g1b }
    }

    /// `(Γ'₀ y, Γ'₁ y)` from the endpoint values.
    pub fn apply(&self, ya: &CMat<T>, yb: &CMat<T>) -> (CMat<T>, CMat<T>) {
        (&self.g0a * ya + &self.g0b * yb, &self.g1a * ya + &self.g1b * yb)
    }

    pub fn apply_vec(&self, ya: &CVec<T>, yb: &CVec<T>) -> (CVec<T>, CVec<T>) {
        (&self.g0a * ya + &self.g0b * yb, &self.g1a * ya + &self.g1b * yb)
    }

    /// `[[G0a, G0b], [G1a, G1b]]`, which has full rank.
    pub fn stacked(&self) -> CMat<T> {
        let n = self.g0a.nrows();
        let mut m = CMat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.g0a);
        m.view_mut((0, n), (n, n)).copy_from(&self.g0b);
        m.view_mut((n, 0), (n, n)).copy_from(&self.g1a);
        m.view_mut((n, n), (n, n)).copy_from(&self.g1b);
        m
    }

    pub fn is_surjective(&self) -> bool {
        let s = self.stacked();
        rank(&s, lit(1e-12)) == s.nrows()
    }
}

pub fn boundary_maps<T: Real>(sys: &SymmetricSystem<T>) -> BoundaryMaps<T> {
    BoundaryMaps::new(sys.dims())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Constant,
    Polynomial,
}

/// Boundary parameter `τ(λ) = (C₀(λ), C₁(λ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPair<T: Real> {
    pub c0: MatrixPoly<T>,
    pub c1: MatrixPoly<T>,
    pub kind: PairKind,
}

impl<T: Real> BoundaryPair<T> {
    pub fn constant(c0: CMat<T>, c1: CMat<T>) -> Result<Self> {
        Self::polynomial(MatrixPoly::constant(c0), MatrixPoly::constant(c1))
    }

    pub fn polynomial(c0: MatrixPoly<T>, c1: MatrixPoly<T>) -> Result<Self> {
        let (r, c) = c0.shape();
        if r != c || c1.shape() != (r, c) {
            return Err(Error::InvalidInput("boundary pair matrices must be square and of equal size".into()));
        }
        let kind = if c0.is_constant() && c1.is_constant() { PairKind::Constant } else { PairKind::Polynomial };
        Ok(BoundaryPair { c0, c1, kind })
    }

    /// `(I, 0)`: Dirichlet-type condition `Γ'₀ y = 0`.
    pub fn zeroth(n: usize) -> Self {
        Self::constant(CMat::identity(n, n), CMat::zeros(n, n)).expect("square")
    }

    /// `(0, I)`: `Γ'₁ y = 0`.
    pub fn first(n: usize) -> Self {
        Self::constant(CMat::zeros(n, n), CMat::identity(n, n)).expect("square")
    }

    /// `(diag(d0), diag(d1))` with real diagonals.
    pub fn diagonal(d0: &[f64], d1: &[f64]) -> Result<Self> {
        let mk = |d: &[f64]| CMat::<T>::from_diagonal(&CVec::from_iterator(d.len(), d.iter().map(|&x| creal(lit(x)))));
        Self::constant(mk(d0), mk(d1))
    }

    pub fn size(&self) -> usize {
        self.c0.shape().0
    }

    pub fn eval(&self, lambda: Complex<T>) -> (CMat<T>, CMat<T>) {
        (self.c0.eval(lambda), self.c1.eval(lambda))
    }
}

/// Outcome of the checks on a boundary pair.
#[derive(Debug, Clone)]
pub struct PairReport {
    pub kind: PairKind,
    pub size_ok: bool,
    /// `‖Im(C₁ C₀*)‖` (constant pairs).
    pub imag_defect: f64,
    pub cond_plus: f64,
    pub cond_minus: f64,
    pub selfadjoint: bool,
    /// `rank [C₀ | C₁] = dim` at every sample.
    pub rank_ok: bool,
    /// Most negative eigenvalue of `Im(C₁ C₀*) / sign(Im λ)` over samples in the upper half-plane.
    pub min_sign_upper: f64,
    pub min_sign_lower: f64,
    pub sign_upper_ok: bool,
    pub sign_lower_ok: bool,
    /// `C_j(λ̄) = conj(C_j(λ))`; `None` when the coefficients are not real.
    pub conj_symmetric: Option<bool>,
}

pub fn validate_pair<T: Real>(tau: &BoundaryPair<T>, dims: BlockDims, tol: T) -> PairReport {
    let n = tau.size();
    let size_ok = n == dims.total();
    let samples: Vec<Complex<T>> = [(0.0, 1.0), (1.5, 0.5), (-2.0, 3.0), (0.3, 0.1), (-0.7, 7.0)]
        .iter()
        .map(|&(re, im)| cplx(lit(re), lit(im)))
        .collect();
    let mut rank_ok = true;
    let mut min_up = f64::INFINITY;
    let mut min_lo = f64::INFINITY;
    let mut conj_ok = true;
    for &z in &samples {
        for (lam, sgn) in [(z, T::one()), (z.conj(), -T::one())] {
            let (c0, c1) = tau.eval(lam);
            let mut stacked = CMat::zeros(n, 2 * n);
            stacked.view_mut((0, 0), (n, n)).copy_from(&c0);
            stacked.view_mut((0, n), (n, n)).copy_from(&c1);
            if rank(&stacked, lit(1e-10)) < n {
                rank_ok = false;
            }
            let s = to_f64(min_hermitian_eigenvalue(&(imag_part(&(&c1 * c0.adjoint())) * creal(sgn))));
            if sgn > T::zero() {
                min_up = min_up.min(s);
            } else {
                min_lo = min_lo.min(s);
            }
        }
        let (a0, a1) = tau.eval(z);
        let (b0, b1) = tau.eval(z.conj());
        let scale = T::one() + a0.norm() + a1.norm();
        if max_abs_diff(&b0, &a0.map(|x| x.conj())) > tol * scale || max_abs_diff(&b1, &a1.map(|x| x.conj())) > tol * scale {
            conj_ok = false;
        }
    }
    let real_coeffs = tau.c0.has_real_coefficients() && tau.c1.has_real_coefficients();
    let (c0, c1) = tau.eval(cplx(T::zero(), T::zero()));
    let imag_defect = to_f64(imag_part(&(&c1 * c0.adjoint())).norm());
    let i = imag_unit::<T>();
    let cond_plus = to_f64(condition_number(&(&c0 + &c1 * i)));
    let cond_minus = to_f64(condition_number(&(&c0 - &c1 * i)));
    let scale = to_f64(T::one() + c0.norm() * c1.norm());
    let selfadjoint = size_ok
        && tau.kind == PairKind::Constant
        && imag_defect <= to_f64(tol) * scale
        && cond_plus.is_finite()
        && cond_plus < 1e12
        && cond_minus.is_finite()
        && cond_minus < 1e12;
    let t = to_f64(tol);
    PairReport {
        kind: tau.kind,
        size_ok,
        imag_defect,
        cond_plus,
        cond_minus,
        selfadjoint,
        rank_ok,
        min_sign_upper: min_up,
        min_sign_lower: min_lo,
        sign_upper_ok: min_up >= -t,
        sign_lower_ok: min_lo >= -t,
        conj_symmetric: if real_coeffs { Some(conj_ok) } else { None },
    }
}

fn ensure_selfadjoint<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>) -> Result<()> {
    let rep = validate_pair(tau, sys.dims(), sys.tol.sym);
    if !rep.selfadjoint {
        return Err(Error::InvalidInput(format!(
            "boundary pair is not constant self-adjoint (imag defect {:e}, cond {:e}/{:e})",
            rep.imag_defect, rep.cond_plus, rep.cond_minus
        )));
    }
    Ok(())
}

/// A pair `{y, f}` with `J y' - B y = Δ f`.
#[derive(Debug, Clone)]
pub struct MaximalPair<T: Real> {
    pub y: GridFunction<T>,
    pub f: GridFunction<T>,
}

impl<T: Real> MaximalPair<T> {
    /// Largest `|J y' - B y - Δ f|` over the nodes of `y`'s mesh, relative
    /// to `1 + max|y| + max|f|`.
    pub fn membership_residual(&self, sys: &SymmetricSystem<T>) -> T {
        let dy = self.y.derivative_at_nodes();
        let nodes = self.y.mesh().nodes();
        let j = sys.structure();
        let mut worst = T::zero();
        for ((t, yv), d) in nodes.iter().zip(self.y.values()).zip(&dy) {
            let r = j * d - sys.b_at(*t) * yv - sys.delta_at(*t) * self.f.eval(*t);
            worst = worst.max(r.camax());
        }
        worst / (T::one() + self.y.max_abs() + self.f.max_abs())
    }

    pub fn ensure_member(&self, sys: &SymmetricSystem<T>) -> Result<()> {
        let r = self.membership_residual(sys);
        if r > sys.tol.member {
            return Err(Error::NotInMaximalRelation { residual: to_f64(r) });
        }
        Ok(())
    }

    pub fn boundary_values(&self) -> (CVec<T>, CVec<T>) {
        (self.y.left_end(), self.y.right_end())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GreenResidual<T> {
    /// `(f, z)_Δ - (y, g)_Δ`.
    pub lhs: Complex<T>,
    /// `(Γ'₁ y, Γ'₀ z) - (Γ'₀ y, Γ'₁ z)`.
    pub rhs: Complex<T>,
    pub residual: T,
}

/// Compares both sides of the Green identity for two maximal pairs.
pub fn green_identity_residual<T: Real>(sys: &SymmetricSystem<T>, first: &MaximalPair<T>, second: &MaximalPair<T>) -> Result<GreenResidual<T>> {
    first.ensure_member(sys)?;
    second.ensure_member(sys)?;
    let lhs = weighted_inner_product(sys, &first.f, &second.y)? - weighted_inner_product(sys, &first.y, &second.f)?;
    let maps = boundary_maps(sys);
    let (ya, yb) = first.boundary_values();
    let (za, zb) = second.boundary_values();
    let (g0y, g1y) = maps.apply_vec(&ya, &yb);
    let (g0z, g1z) = maps.apply_vec(&za, &zb);
    // (u, v) = v* u.
    let rhs = g0z.dotc(&g1y) - g1z.dotc(&g0y);
    Ok(GreenResidual { lhs, rhs, residual: (lhs - rhs).modulus() })
}

/// Matrices of `Γ'₀` and `Γ'₁` applied to the columns of `Y₀(·, λ)`.
pub fn boundary_matrices<T: Real>(sys: &SymmetricSystem<T>, lambda: Complex<T>) -> Result<(CMat<T>, CMat<T>)> {
    let yb = monodromy(sys, lambda)?;
    let n = sys.dims().total();
    let maps = boundary_maps(sys);
    Ok(maps.apply(&CMat::identity(n, n), &yb))
}

/// `C₀(λ) A(λ) - C₁(λ) B(λ)`; its kernel gives the eigenvectors at `λ`.
pub fn boundary_system<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>, lambda: Complex<T>) -> Result<CMat<T>> {
    let (a, b) = boundary_matrices(sys, lambda)?;
    let (c0, c1) = tau.eval(lambda);
    Ok(c0 * a - c1 * b)
}

/// `det(C₀ A(λ) - C₁ B(λ))`.
pub fn characteristic_determinant<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>, lambda: Complex<T>) -> Result<Complex<T>> {
    Ok(boundary_system(sys, tau, lambda)?.determinant())
}

#[derive(Debug, Clone)]
pub struct BvpSolution<T: Real> {
    pub y: GridFunction<T>,
    pub cond: T,
    /// `|C₀ Γ'₀ y - C₁ Γ'₁ y|`.
    pub bc_residual: T,
}

/// Solves `J y' - B y - λ Δ y = Δ f` with `C₀(λ) Γ'₀ y = C₁(λ) Γ'₁ y`.
pub fn solve_bvp<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>, lambda: Complex<T>, f: &GridFunction<T>) -> Result<BvpSolution<T>> {
    let n = sys.dims().total();
    if tau.size() != n {
        return Err(Error::InvalidInput("boundary pair size does not match the system".into()));
    }
    let mesh = align_mesh(sys, &sys.mesh_for(lambda.modulus()).union(f.mesh()));
    let prop = propagate_forced(sys, lambda, mesh.clone(), f)?;
    let end = prop.at_end();
    let yb = end.columns(0, n).into_owned();
    let ypb: CVec<T> = end.column(n).into_owned();
    let maps = boundary_maps(sys);
    let (c0, c1) = tau.eval(lambda);
    let (a, b) = maps.apply(&CMat::identity(n, n), &yb);
    let k = &c0 * a - &c1 * b;
    let rhs = -(&c0 * &maps.g0b - &c1 * &maps.g1b) * &ypb;
    let rhs = CMat::from_column_slice(n, 1, rhs.as_slice());
    let (c, cond) = solve_conditioned(&k, &rhs, sys.tol.bvp_cond).map_err(|cond| Error::SingularBoundaryMatrix { cond: to_f64(cond) })?;
    let c: CVec<T> = c.column(0).into_owned();
    let values: Vec<CVec<T>> = prop
        .node_values()
        .iter()
        .map(|x| x.columns(0, n) * &c + x.column(n))
        .collect();
    let y = GridFunction::from_values(mesh, values)?;
    let ya = c.clone();
    let ybv = &yb * &c + &ypb;
    let (g0, g1) = maps.apply_vec(&ya, &ybv);
    let bc_residual = (&c0 * g0 - &c1 * g1).camax();
    Ok(BvpSolution { y, cond, bc_residual })
}

/// An eigenvalue with a `Δ`-orthonormal basis of eigenfunctions
/// `Y₀(·, λ) c_j` (the columns of `coeffs`).
#[derive(Debug, Clone)]
pub struct Eigenpair<T: Real> {
    pub lambda: T,
    pub multiplicity: usize,
    pub coeffs: CMat<T>,
    /// `σ_min / σ_max` of the boundary system at `lambda`.
    pub residual: T,
}

impl<T: Real> Eigenpair<T> {
    pub fn eigenfunction(&self, sys: &SymmetricSystem<T>, j: usize, mesh: Arc<crate::quadrature::Mesh<T>>) -> Result<GridFunction<T>> {
        let prop = propagate_on_mesh(sys, creal(self.lambda), align_mesh(sys, &mesh))?;
        let c: CVec<T> = self.coeffs.column(j).into_owned();
        let values = prop.node_values().iter().map(|y| y * &c).collect();
        GridFunction::from_values(prop.mesh().clone(), values)
    }

    /// `Σ_j c_j c_j*`, the spectral jump this eigenvalue contributes.
    pub fn jump(&self) -> CMat<T> {
        &self.coeffs * self.coeffs.adjoint()
    }
}

/// `∫ Y₀(t,λ)* Δ Y₀(t,λ) dt` for real `λ`.
pub fn gram_matrix<T: Real>(sys: &SymmetricSystem<T>, lambda: T) -> Result<CMat<T>> {
    let prop = propagate_on_mesh(sys, creal(lambda), sys.mesh_for(lambda.abs()))?;
    let mesh = prop.mesh();
    let n = sys.dims().total();
    let mut g = CMat::zeros(n, n);
    for p in 0..mesh.num_panels() {
        for j in 0..mesh.order() {
            let t = mesh.node(p, j);
            let y = prop.at_node(p * mesh.order() + j);
            g += y.adjoint() * sys.delta_at(t) * y * creal(mesh.weight(p, j));
        }
    }
    Ok(g)
}

/// Scale-free smallness of the boundary system and its determinant.
fn scan_point<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>, s: T) -> Result<(T, Complex<T>)> {
    let k = boundary_system(sys, tau, creal(s))?;
    let sv = singular_values(&k);
    let ratio = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if hi > T::zero() => lo / hi,
        _ => T::zero(),
    };
    Ok((ratio, k.determinant()))
}

/// Root of a real function with a sign change on `[lo, hi]`
/// (bisection safeguarded secant / inverse quadratic steps).
pub fn brent_root<T: Real, F: FnMut(T) -> Result<T>>(mut f: F, mut a: T, mut b: T, xtol: T, max_iter: usize) -> Result<T> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa * fb > T::zero() {
        return Err(Error::RootFindingFailure("no sign change in bracket".into()));
    }
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb * fc > T::zero() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::default_epsilon() * b.abs() + half * xtol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = lit::<T>(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else if xm > T::zero() { tol1 } else { -tol1 };
        fb = f(b)?;
    }
    Err(Error::RootFindingFailure("root refinement did not converge".into()))
}

/// Minimiser of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_min<T: Real, F: FnMut(T) -> Result<T>>(mut f: F, mut lo: T, mut hi: T, xtol: T) -> Result<T> {
    let g = lit::<T>((5f64.sqrt() - 1.0) / 2.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > xtol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { x1 } else { x2 })
}

/// Scan step used by the eigenvalue search.
pub const EIGEN_SCAN_STEP: f64 = 0.05;

/// Real eigenvalues in `[smin, smax]` for a constant self-adjoint pair.
pub fn eigenvalues_selfadjoint<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>, window: (T, T)) -> Result<Vec<Eigenpair<T>>> {
    ensure_selfadjoint(sys, tau)?;
    let (smin, smax) = window;
    if !(smin < smax) {
        return Ok(Vec::new());
    }
    let steps = to_f64((smax - smin) / lit(EIGEN_SCAN_STEP)).ceil().max(1.0) as usize;
    let h = (smax - smin) / lit(steps as f64);
    let grid: Vec<T> = (0..=steps + 2).map(|i| smin - h + h * lit(i as f64)).collect();
    let scan: Vec<(T, Complex<T>)> = grid.par_iter().map(|&s| scan_point(sys, tau, s)).collect::<Result<_>>()?;

    // Sign changes of Re d or Im d between neighbours, plus local minima of
    // the singular value ratio (even-order roots do not change sign).
    let mut brackets: Vec<(T, T, Complex<T>, Complex<T>)> = Vec::new();
    for i in 0..grid.len() - 1 {
        let (a, b) = (scan[i].1, scan[i + 1].1);
        if a.re * b.re < T::zero() || a.im * b.im < T::zero() {
            brackets.push((grid[i], grid[i + 1], a, b));
        }
        if i > 0 && scan[i].0 <= scan[i - 1].0 && scan[i].0 <= scan[i + 1].0 {
            brackets.push((grid[i - 1], grid[i + 1], scan[i - 1].1, scan[i + 1].1));
        }
    }

    let accept = sys.tol.nullity;
    let xtol = sys.tol.eig * lit(1e-3);
    let roots: Vec<Option<(T, T)>> = brackets
        .par_iter()
        .map(|&(lo, hi, dlo, dhi)| -> Result<Option<(T, T)>> {
            // Real part, imaginary part, and the projection onto the
            // direction the determinant travels along.
            let dir = dhi - dlo;
            let rot = if dir.modulus() > T::zero() { dir.conj() / creal(dir.modulus()) } else { creal(T::one()) };
            let one = creal(T::one());
            let minus_i = -imag_unit::<T>();
            let mut best: Option<(T, T)> = None;
            for r in [one, minus_i, rot] {
                let proj = |d: Complex<T>| (d * r).re;
                if !(proj(dlo) * proj(dhi) < T::zero()) {
                    continue;
                }
                let root = brent_root(|s| Ok(proj(scan_point(sys, tau, s)?.1)), lo, hi, xtol, 200)?;
                let (ratio, _) = scan_point(sys, tau, root)?;
                if best.is_none_or(|b| ratio < b.1) {
                    best = Some((root, ratio));
                }
            }
            if best.is_none_or(|b| b.1 > accept) {
                let root = golden_min(|s| Ok(scan_point(sys, tau, s)?.0), lo, hi, xtol)?;
                let (ratio, _) = scan_point(sys, tau, root)?;
                if best.is_none_or(|b| ratio < b.1) {
                    best = Some((root, ratio));
                }
            }
            Ok(best.filter(|&(root, ratio)| ratio <= accept && root >= smin && root <= smax))
        })
        .collect::<Result<_>>()?;

    let mut roots: Vec<(T, T)> = roots.into_iter().flatten().collect();
    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite roots"));
    let mut found: Vec<(T, T)> = Vec::new();
    for (root, ratio) in roots {
        match found.last_mut() {
            Some(last) if (root - last.0).abs() < lit(1e-8) => {
                if ratio < last.1 {
                    *last = (root, ratio);
                }
            }
            _ => found.push((root, ratio)),
        }
    }

    found
        .par_iter()
        .map(|&(s, ratio)| {
            let k = boundary_system(sys, tau, creal(s))?;
            let basis = null_space(&k, sys.tol.nullity);
            if basis.ncols() == 0 {
                return Err(Error::RootFindingFailure(format!("no null vector at detected eigenvalue {}", to_f64(s))));
            }
            let g = basis.adjoint() * gram_matrix(sys, s)? * &basis;
            let g = crate::linalg::hermitian_part(&g);
            let chol = g
                .clone()
                .cholesky()
                .ok_or_else(|| Error::RootFindingFailure(format!("eigenfunctions at {} have zero weighted norm", to_f64(s))))?;
            // coeffs = basis L^{-*}, so that coeffs* G coeffs = I.
            let linv_adj = chol.l().adjoint().try_inverse().expect("Cholesky factor is invertible");
            Ok(Eigenpair { lambda: s, multiplicity: basis.ncols(), coeffs: basis * linv_adj, residual: ratio })
        })
        .collect()
}
