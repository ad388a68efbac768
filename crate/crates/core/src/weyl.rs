//! Weyl solutions, the block Weyl function `M(λ)`, characteristic matrices
//! `Ω_τ(λ)` and the admissibility limits of a boundary pair.

use nalgebra::Complex;
use rayon::prelude::*;

use crate::block::BlockDims;
use crate::boundary::{boundary_maps, BoundaryPair};
use crate::error::{Error, Result};
use crate::linalg::{condition_number, solve_conditioned};
use crate::propagator::{monodromy, monodromy_graph};
use crate::scalar::{cplx, creal, imag_unit, lit, to_f64, CMat, Real};
use crate::system::SymmetricSystem;

/// Coefficients of the Weyl solutions: `[v₀ | u] = Y₀(·, λ) coeffs`, with
/// `v₀` the first `h + ĥ` columns and `u` the last `h`.
#[derive(Debug, Clone)]
pub struct WeylSolutions<T: Real> {
    pub lambda: Complex<T>,
    pub coeffs: CMat<T>,
    pub dims: BlockDims,
    /// Condition number of the two-point system that was inverted.
    pub cond: T,
}

impl<T: Real> WeylSolutions<T> {
    pub fn v0(&self) -> CMat<T> {
        self.coeffs.columns(0, self.dims.h0()).into_owned()
    }

    pub fn u(&self) -> CMat<T> {
        self.coeffs.columns(self.dims.h0(), self.dims.h).into_owned()
    }
}

/// Solutions whose `Γ'₀` values are the unit vectors, via the monodromy.
pub fn weyl_solutions<T: Real>(sys: &SymmetricSystem<T>, lambda: Complex<T>) -> Result<WeylSolutions<T>> {
    let n = sys.dims().total();
    let yb = monodromy(sys, lambda)?;
    let maps = boundary_maps(sys);
    let a = &maps.g0a + &maps.g0b * &yb;
    let (coeffs, cond) = solve_conditioned(&a, &CMat::identity(n, n), sys.tol.weyl_cond)
        .map_err(|cond| Error::SingularConstraintSystem { cond: to_f64(cond) })?;
    Ok(WeylSolutions { lambda, coeffs, dims: sys.dims(), cond })
}

/// Largest deviation of `Γ'₀ [v₀ | u]` from the identity.
pub fn weyl_constraint_residual<T: Real>(sys: &SymmetricSystem<T>, ws: &WeylSolutions<T>) -> Result<T> {
    let n = sys.dims().total();
    let yb = monodromy(sys, ws.lambda)?;
    let maps = boundary_maps(sys);
    let (g0, _) = maps.apply(&ws.coeffs, &(&yb * &ws.coeffs));
    Ok((g0 - CMat::identity(n, n)).camax())
}

#[derive(Debug, Clone)]
pub struct WeylData<T: Real> {
    pub lambda: Complex<T>,
    pub m0: CMat<T>,
    pub m2: CMat<T>,
    pub m3: CMat<T>,
    pub m4: CMat<T>,
    /// `[[m0, m2], [m3, m4]]`.
    pub m: CMat<T>,
    pub omega0: CMat<T>,
    pub s_mat: CMat<T>,
}

impl<T: Real> WeylData<T> {
    fn assemble(dims: BlockDims, lambda: Complex<T>, m: CMat<T>) -> Self {
        let (h0, h) = (dims.h0(), dims.h);
        let m0 = m.view((0, 0), (h0, h0)).into_owned();
        let m2 = m.view((0, h0), (h0, h)).into_owned();
        let m3 = m.view((h0, 0), (h, h0)).into_owned();
        let m4 = m.view((h0, h0), (h, h)).into_owned();
        let half = creal(lit::<T>(0.5));
        let n = dims.total();

        let mut omega0 = CMat::zeros(n, n);
        omega0.view_mut((0, 0), (h0, h0)).copy_from(&m0);
        for k in 0..h {
            omega0[(k, h0 + k)] = -half;
            omega0[(h0 + k, k)] = -half;
        }

        let mut s_mat = CMat::zeros(n, n);
        s_mat.view_mut((0, 0), (h0, h0)).copy_from(&m0);
        for k in h..h0 {
            s_mat[(k, k)] -= imag_unit::<T>() * half;
        }
        s_mat.view_mut((0, h0), (h0, h)).copy_from(&m2);
        for k in 0..h {
            s_mat[(h0 + k, k)] = -creal(T::one());
        }
        WeylData { lambda, m0, m2, m3, m4, m, omega0, s_mat }
    }
}

/// `M(λ) = Γ'₁ [v₀ | u]`, computed from an orthonormal basis of the
/// boundary-value graph so that large `|Im λ|` stays finite.
pub fn weyl_function<T: Real>(sys: &SymmetricSystem<T>, lambda: Complex<T>) -> Result<WeylData<T>> {
    let n = sys.dims().total();
    let (u, v) = monodromy_graph(sys, lambda)?;
    let maps = boundary_maps(sys);
    let (a, b) = maps.apply(&u, &v);
    // M = B A⁻¹, solved as A* M* = B*.
    let (mt, _) = solve_conditioned(&a.adjoint(), &b.adjoint(), sys.tol.weyl_cond)
        .map_err(|cond| Error::SingularConstraintSystem { cond: to_f64(cond) })?;
    debug_assert_eq!(mt.nrows(), n);
    Ok(WeylData::assemble(sys.dims(), lambda, mt.adjoint()))
}

/// The same `M(λ)` assembled block by block from the Weyl solutions.
pub fn weyl_function_by_blocks<T: Real>(sys: &SymmetricSystem<T>, lambda: Complex<T>) -> Result<WeylData<T>> {
    let dims = sys.dims();
    let (h0, h, n) = (dims.h0(), dims.h, dims.total());
    let ws = weyl_solutions(sys, lambda)?;
    let yb = monodromy(sys, lambda)?;
    let v0a = ws.v0();
    let ua = ws.u();
    let v0b = &yb * &v0a;
    let ub = &yb * &ua;
    let mut m0 = v0a.rows(0, h0).into_owned();
    for k in h..h0 {
        m0[(k, k)] += imag_unit::<T>() * lit::<T>(0.5);
    }
    let m2 = ua.rows(0, h0).into_owned();
    let m3 = -v0b.rows(h0, h).into_owned();
    let m4 = -ub.rows(h0, h).into_owned();
    let mut m = CMat::zeros(n, n);
    m.view_mut((0, 0), (h0, h0)).copy_from(&m0);
    m.view_mut((0, h0), (h0, h)).copy_from(&m2);
    m.view_mut((h0, 0), (h, h0)).copy_from(&m3);
    m.view_mut((h0, h0), (h, h)).copy_from(&m4);
    Ok(WeylData::assemble(dims, lambda, m))
}

fn is_zero<T: Real>(m: &CMat<T>) -> bool {
    m.iter().all(|z| z.re == T::zero() && z.im == T::zero())
}

/// `Ω_τ(λ) = Ω₀ + S(λ)(C₀ - C₁M)⁻¹C₁ S(λ̄)*`, with `S(λ̄)` taken from a
/// separate computation at `λ̄`.
pub fn characteristic_matrix<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>, lambda: Complex<T>) -> Result<CMat<T>> {
    let n = sys.dims().total();
    if tau.size() != n {
        return Err(Error::InvalidInput("boundary pair size does not match the system".into()));
    }
    let w = weyl_function(sys, lambda)?;
    let (c0, c1) = tau.eval(lambda);
    if is_zero(&c1) {
        return Ok(w.omega0);
    }
    let wc = weyl_function(sys, lambda.conj())?;
    let pencil = &c0 - &c1 * &w.m;
    let rhs = &c1 * wc.s_mat.adjoint();
    let (x, _) = solve_conditioned(&pencil, &rhs, sys.tol.weyl_cond).map_err(|cond| Error::SingularPencil { cond: to_f64(cond) })?;
    Ok(&w.omega0 + &w.s_mat * x)
}

/// `Ω_τ` at many points, evaluated in parallel (order preserved).
pub fn characteristic_matrices<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>, lambdas: &[Complex<T>]) -> Result<Vec<CMat<T>>> {
    lambdas.par_iter().map(|&l| characteristic_matrix(sys, tau, l)).collect()
}

pub const DEFAULT_ADMISSIBILITY_RADII: [f64; 8] = [10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0, 1280.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T> {
    /// Exponent `p` in `‖X(y)‖ ~ y^{-p}`; infinite when `X` vanishes identically.
    pub b: T,
    pub bhat: T,
}

#[derive(Debug, Clone)]
pub struct AdmissibilityEstimate<T: Real> {
    /// Extrapolated `lim (1/iy)(C₀ - C₁M)⁻¹C₁`.
    pub b_tau: CMat<T>,
    /// Extrapolated `lim (1/iy)M(C₀ - C₁M)⁻¹C₀`.
    pub bhat_tau: CMat<T>,
    pub y_sequence: Vec<T>,
    pub norms_b: Vec<T>,
    pub norms_bhat: Vec<T>,
    pub decay_fit: DecayFit<T>,
    pub admissible: bool,
}

fn decay_exponent<T: Real>(ys: &[T], norms: &[T]) -> T {
    if norms.iter().all(|&x| x == T::zero()) {
        return lit(f64::INFINITY);
    }
    let floor = lit::<T>(1e-300);
    let pts: Vec<(T, T)> = ys.iter().zip(norms).map(|(&y, &x)| (y.ln(), x.max(floor).ln())).collect();
    let k = lit::<T>(pts.len() as f64);
    let mx = pts.iter().fold(T::zero(), |s, p| s + p.0) / k;
    let my = pts.iter().fold(T::zero(), |s, p| s + p.1) / k;
    let sxy = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.1 - my));
    let sxx = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.0 - mx));
    -sxy / sxx
}

/// Limit of `X(y_k)` on geometric radii, assuming an expansion
/// `L + c₁ y^{-p₁} + c₂ y^{-p₂} + ...`. Each level removes the leading
/// power with an exponent estimated from the last three entries; stops at
/// roundoff or when the estimate stops making sense.
fn extrapolate<T: Real>(ys: &[T], xs: &[CMat<T>]) -> CMat<T> {
    let q = ys[1] / ys[0];
    let scale = xs.iter().fold(T::zero(), |m, x| m.max(x.norm()));
    let floor = scale * T::default_epsilon() * lit(64.0);
    let mut seq = xs.to_vec();
    while seq.len() >= 3 {
        let k = seq.len();
        let d1 = &seq[k - 1] - &seq[k - 2];
        let d0 = &seq[k - 2] - &seq[k - 3];
        let (n1, n0) = (d1.norm(), d0.norm());
        if n1 <= floor || n0 <= floor {
            break;
        }
        let p = (n0 / n1).ln() / q.ln();
        if !(p > lit(0.1)) {
            break;
        }
        let f = creal(q.powf(p) - T::one());
        seq = (1..k).map(|i| &seq[i] + (&seq[i] - &seq[i - 1]) / f).collect();
    }
    seq.pop().expect("at least one radius")
}

/// Estimates both admissibility limits along `λ = iy`.
pub fn admissibility<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>, radii: &[T]) -> Result<AdmissibilityEstimate<T>> {
    if radii.len() < 4 {
        return Err(Error::InvalidInput("admissibility needs at least four radii".into()));
    }
    if radii.windows(2).any(|w| !(w[0] > T::zero() && w[1] > w[0])) {
        return Err(Error::InvalidInput("admissibility radii must be positive and increasing".into()));
    }
    let q = radii[1] / radii[0];
    if radii.windows(2).any(|w| ((w[1] / w[0]) - q).abs() > lit::<T>(1e-9) * q) {
        return Err(Error::InvalidInput("admissibility radii must form a geometric progression".into()));
    }
    let samples: Vec<(CMat<T>, CMat<T>)> = radii
        .par_iter()
        .map(|&y| {
            let lambda = cplx(T::zero(), y);
            let w = weyl_function(sys, lambda)?;
            let (c0, c1) = tau.eval(lambda);
            let pencil = &c0 - &c1 * &w.m;
            let cond = condition_number(&pencil);
            if !(cond <= sys.tol.weyl_cond) {
                return Err(Error::SingularPencil { cond: to_f64(cond) });
            }
            let inv = pencil.try_inverse().ok_or(Error::SingularPencil { cond: to_f64(cond) })?;
            let scale = Complex::new(T::zero(), -T::one() / y);
            let xb = &inv * &c1 * scale;
            let xbh = &w.m * &inv * &c0 * scale;
            Ok((xb, xbh))
        })
        .collect::<Result<_>>()?;
    let (xb, xbh): (Vec<CMat<T>>, Vec<CMat<T>>) = samples.into_iter().unzip();
    let norms_b: Vec<T> = xb.iter().map(|m| m.norm()).collect();
    let norms_bhat: Vec<T> = xbh.iter().map(|m| m.norm()).collect();
    let b_tau = extrapolate(radii, &xb);
    let bhat_tau = extrapolate(radii, &xbh);
    let admissible = b_tau.norm() <= sys.tol.adm && bhat_tau.norm() <= sys.tol.adm;
    Ok(AdmissibilityEstimate {
        decay_fit: DecayFit { b: decay_exponent(radii, &norms_b), bhat: decay_exponent(radii, &norms_bhat) },
        b_tau,
        bhat_tau,
        y_sequence: radii.to_vec(),
        norms_b,
        norms_bhat,
        admissible,
    })
}

pub fn default_radii<T: Real>() -> Vec<T> {
    DEFAULT_ADMISSIBILITY_RADII.iter().map(|&r| lit(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, imag_part, max_abs_diff};
    use crate::poly::PiecewiseMatrixPoly;
    use std::f64::consts::PI;

    fn free(dims: BlockDims, b: f64) -> SymmetricSystem<f64> {
        let n = dims.total();
        SymmetricSystem::new(
            dims,
            (0.0, b),
            PiecewiseMatrixPoly::constant(0.0, b, CMat::zeros(n, n)),
            PiecewiseMatrixPoly::constant(0.0, b, CMat::identity(n, n)),
        )
        .unwrap()
    }

    fn free1() -> SymmetricSystem<f64> {
        free(BlockDims::new(1, 0).unwrap(), PI)
    }

    fn free1_m(l: Complex<f64>) -> CMat<f64> {
        let t = (l * PI).tan();
        let s = creal(1.0) / (l * PI).cos();
        CMat::from_row_slice(2, 2, &[t, s, s, t])
    }

    #[test]
    fn free_weyl_solutions() {
        let sys = free1();
        let l = cplx(0.3, 0.2);
        let ws = weyl_solutions(&sys, l).unwrap();
        let t = (l * PI).tan();
        let s = creal(1.0) / (l * PI).cos();
        assert!((ws.coeffs[(0, 0)] - t).norm() < 1e-9);
        assert!((ws.coeffs[(1, 0)] + 1.0).norm() < 1e-9);
        assert!((ws.coeffs[(0, 1)] - s).norm() < 1e-9);
        assert!(ws.coeffs[(1, 1)].norm() < 1e-9);
        assert!(weyl_constraint_residual(&sys, &ws).unwrap() < 1e-9);
    }

    #[test]
    fn free_weyl_function_both_routes() {
        let sys = free1();
        for l in [cplx(0.3, 0.2), cplx(0.0, 1.0), cplx(-1.7, 0.5)] {
            let want = free1_m(l);
            let graph = weyl_function(&sys, l).unwrap();
            let blocks = weyl_function_by_blocks(&sys, l).unwrap();
            assert!(max_abs_diff(&graph.m, &want) < 1e-9, "{l}");
            assert!(max_abs_diff(&blocks.m, &want) < 1e-9, "{l}");
        }
    }

    #[test]
    fn hhat_block_closed_form() {
        // Order (H, Ĥ, H_b): M = [[tan λ, 0, sec λ], [0, -cot(λ/2)/2, 0], [sec λ, 0, tan λ]].
        let sys = free(BlockDims::new(1, 1).unwrap(), 1.0);
        let l = cplx(0.4, 0.7);
        let w = weyl_function(&sys, l).unwrap();
        let sec = creal(1.0) / l.cos();
        let cot = creal(1.0) / (l * 0.5).tan();
        let z = creal(0.0);
        let want = CMat::from_row_slice(3, 3, &[l.tan(), z, sec, z, -cot * 0.5, z, sec, z, l.tan()]);
        assert!(max_abs_diff(&w.m, &want) < 1e-9);
        let ws = weyl_solutions(&sys, l).unwrap();
        assert!(weyl_constraint_residual(&sys, &ws).unwrap() < 1e-9);
    }

    #[test]
    fn nevanlinna_cone_and_symmetry() {
        let sys = free(BlockDims::new(1, 1).unwrap(), 1.0);
        for l in [cplx(0.5, 0.1), cplx(-3.0, 2.0), cplx(2.0, 3.0)] {
            let up = weyl_function(&sys, l).unwrap();
            let down = weyl_function(&sys, l.conj()).unwrap();
            assert!(max_abs_diff(&down.m, &up.m.adjoint()) < 1e-9);
            assert!(hermitian_eigenvalues(&imag_part(&up.m))[0] >= -1e-9);
        }
    }

    #[test]
    fn characteristic_matrix_cases() {
        let sys = free1();
        let l = cplx(0.3, 0.4);
        let om = characteristic_matrix(&sys, &BoundaryPair::zeroth(2), l).unwrap();
        let t = (l * PI).tan();
        let want = CMat::from_row_slice(2, 2, &[t, creal(-0.5), creal(-0.5), creal(0.0)]);
        assert!(max_abs_diff(&om, &want) < 1e-9);

        let tau = BoundaryPair::first(2);
        let om = characteristic_matrix(&sys, &tau, l).unwrap();
        let want = CMat::from_row_slice(2, 2, &[creal(0.0), creal(0.5), creal(0.5), t]);
        assert!(max_abs_diff(&om, &want) < 1e-8);

        let l = cplx(1.0, 2.0);
        let up = characteristic_matrix(&sys, &tau, l).unwrap();
        let down = characteristic_matrix(&sys, &tau, l.conj()).unwrap();
        assert!(max_abs_diff(&down, &up.adjoint()) < 1e-8);
    }

    #[test]
    fn admissibility_of_simple_pairs() {
        let sys = free1();
        let radii = default_radii();
        let est = admissibility(&sys, &BoundaryPair::zeroth(2), &radii).unwrap();
        assert!(est.norms_b.iter().all(|&x| x == 0.0));
        assert!(est.admissible, "{:?}", est.bhat_tau);
        assert!((est.decay_fit.bhat - 1.0).abs() < 1e-3);
        let est = admissibility(&sys, &BoundaryPair::first(2), &radii).unwrap();
        assert!(est.admissible);
        assert!(admissibility(&sys, &BoundaryPair::first(2), &radii[..3]).is_err());
    }
}
