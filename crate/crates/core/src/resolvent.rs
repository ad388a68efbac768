//! The generalized resolvent applied through its integral representation
//! with a characteristic matrix, and cross-checks against direct solves of
//! the boundary problem.

use nalgebra::{Complex, ComplexField};

use crate::boundary::{boundary_maps, solve_bvp, BoundaryPair, MaximalPair};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::propagator::{align_mesh, propagate_on_mesh};
use crate::scalar::{creal, lit, CMat, CVec, Real};
use crate::system::{weighted_inner_product, weighted_norm, SymmetricSystem};
use crate::weyl::characteristic_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventMethod {
    Integral,
    Bvp,
}

#[derive(Debug, Clone)]
pub struct ResolventApplication<T: Real> {
    pub lambda: Complex<T>,
    pub f: GridFunction<T>,
    pub y: GridFunction<T>,
    pub method: ResolventMethod,
}

/// `y(x) = Y₀(x,λ) ∫ (Ω + ½ sgn(t - x) J) Y₀(t,λ̄)* Δ(t) f(t) dt`.
///
/// Forward and backward running integrals are accumulated once on the
/// panel nodes, so each output node costs O(1).
pub fn apply_resolvent_integral<T: Real>(sys: &SymmetricSystem<T>, omega: &CMat<T>, lambda: Complex<T>, f: &GridFunction<T>) -> Result<GridFunction<T>> {
    let n = sys.dims().total();
    if f.dim() != n || omega.shape() != (n, n) {
        return Err(Error::InvalidInput("resolvent input dimension does not match the system".into()));
    }
    if lambda.im == T::zero() {
        return Err(Error::InvalidInput("the resolvent integral needs non-real lambda".into()));
    }
    let mesh = align_mesh(sys, &sys.mesh_for(lambda.modulus()).union(f.mesh()));
    let fwd = propagate_on_mesh(sys, lambda, mesh.clone())?;
    let bwd = propagate_on_mesh(sys, lambda.conj(), mesh.clone())?;
    let fm = f.resample(mesh.clone());
    let order = mesh.order();
    let cumul = mesh.rule().cumulative_matrix();

    // Integrand Y₀(t,λ̄)* Δ(t) f(t) at the nodes.
    let nodes = mesh.nodes();
    let integrand: Vec<CVec<T>> = nodes
        .iter()
        .enumerate()
        .map(|(i, &t)| bwd.at_node(i).adjoint() * (sys.delta_at(t) * &fm.values()[i]))
        .collect();

    // Running integral from a to each node, and the panel totals.
    let mut running = Vec::with_capacity(nodes.len());
    let mut acc = CVec::<T>::zeros(n);
    for p in 0..mesh.num_panels() {
        let (l, r) = mesh.panel_bounds(p);
        let half = creal((r - l) * lit(0.5));
        for i in 0..order {
            let mut part = CVec::zeros(n);
            for j in 0..order {
                part.axpy(creal(cumul[i][j]), &integrand[p * order + j], creal(T::one()));
            }
            running.push(&acc + part * half);
        }
        for j in 0..order {
            acc.axpy(creal(mesh.weight(p, j)), &integrand[p * order + j], creal(T::one()));
        }
    }
    let total = acc;
    let j = sys.structure();
    let half = creal(lit::<T>(0.5));
    let values = running
        .iter()
        .enumerate()
        .map(|(i, left)| {
            let right = &total - left;
            let c = omega * &total + j * (right - left) * half;
            fwd.at_node(i) * c
        })
        .collect();
    GridFunction::from_values(mesh, values)
}

pub fn apply_resolvent<T: Real>(
    sys: &SymmetricSystem<T>,
    tau: &BoundaryPair<T>,
    lambda: Complex<T>,
    f: &GridFunction<T>,
    method: ResolventMethod,
) -> Result<ResolventApplication<T>> {
    let y = match method {
        ResolventMethod::Integral => apply_resolvent_integral(sys, &characteristic_matrix(sys, tau, lambda)?, lambda, f)?,
        ResolventMethod::Bvp => solve_bvp(sys, tau, lambda, f)?.y,
    };
    Ok(ResolventApplication { lambda, f: f.clone(), y, method })
}

#[derive(Debug, Clone)]
pub struct CrossCheckReport<T: Real> {
    pub lambda: Complex<T>,
    /// `‖y_int - y_bvp‖_Δ / (‖f‖_Δ + 1)`.
    pub defect: T,
    /// Relative residual of `J y' - B y - λ Δ y = Δ f` for each method.
    pub ode_residual_integral: T,
    pub ode_residual_bvp: T,
    /// `|C₀ Γ'₀ y - C₁ Γ'₁ y|` for each method.
    pub boundary_residual_integral: T,
    pub boundary_residual_bvp: T,
}

fn ode_residual<T: Real>(sys: &SymmetricSystem<T>, lambda: Complex<T>, y: &GridFunction<T>, f: &GridFunction<T>) -> T {
    let pair = MaximalPair { y: y.clone(), f: y.scale(lambda).add_scaled(creal(T::one()), f) };
    pair.membership_residual(sys)
}

fn boundary_residual<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>, lambda: Complex<T>, y: &GridFunction<T>) -> T {
    let (g0, g1) = boundary_maps(sys).apply_vec(&y.left_end(), &y.right_end());
    let (c0, c1) = tau.eval(lambda);
    (c0 * g0 - c1 * g1).camax()
}

pub fn resolvent_crosscheck<T: Real>(sys: &SymmetricSystem<T>, tau: &BoundaryPair<T>, lambda: Complex<T>, f: &GridFunction<T>) -> Result<CrossCheckReport<T>> {
    let y_int = apply_resolvent(sys, tau, lambda, f, ResolventMethod::Integral)?.y;
    let y_bvp = apply_resolvent(sys, tau, lambda, f, ResolventMethod::Bvp)?.y;
    let diff = y_int.add_scaled(creal(-T::one()), &y_bvp);
    let defect = weighted_norm(sys, &diff)? / (weighted_norm(sys, f)? + T::one());
    Ok(CrossCheckReport {
        lambda,
        defect,
        ode_residual_integral: ode_residual(sys, lambda, &y_int, f),
        ode_residual_bvp: ode_residual(sys, lambda, &y_bvp, f),
        boundary_residual_integral: boundary_residual(sys, tau, lambda, &y_int),
        boundary_residual_bvp: boundary_residual(sys, tau, lambda, &y_bvp),
    })
}

/// `‖R(λ)f - R(μ)f - (λ - μ) R(λ) R(μ) f‖_Δ` with all solves done directly.
pub fn resolvent_identity_check<T: Real>(
    sys: &SymmetricSystem<T>,
    tau: &BoundaryPair<T>,
    lambda: Complex<T>,
    mu: Complex<T>,
    f: &GridFunction<T>,
) -> Result<T> {
    let rl = solve_bvp(sys, tau, lambda, f)?.y;
    if lambda == mu {
        return Ok(T::zero());
    }
    let rm = solve_bvp(sys, tau, mu, f)?.y;
    let rlrm = solve_bvp(sys, tau, lambda, &rm)?.y;
    let r = rl.add_scaled(-creal(T::one()), &rm).add_scaled(-(lambda - mu), &rlrm);
    weighted_norm(sys, &r)
}

/// `|(R(λ)f, g)_Δ - (f, R(λ̄)g)_Δ|`.
pub fn resolvent_adjoint_defect<T: Real>(
    sys: &SymmetricSystem<T>,
    tau: &BoundaryPair<T>,
    lambda: Complex<T>,
    f: &GridFunction<T>,
    g: &GridFunction<T>,
) -> Result<T> {
    let rf = solve_bvp(sys, tau, lambda, f)?.y;
    let rg = solve_bvp(sys, tau, lambda.conj(), g)?.y;
    Ok((weighted_inner_product(sys, &rf, g)? - weighted_inner_product(sys, f, &rg)?).modulus())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockDims;
    use crate::poly::PiecewiseMatrixPoly;
    use crate::scalar::cplx;
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

    fn vec2(a: Complex<f64>, b: Complex<f64>) -> CVec<f64> {
        CVec::from_vec(vec![a, b])
    }

    #[test]
    fn integral_matches_bvp() {
        let sys = free1();
        let mesh = sys.mesh_for(1.0);
        let f = GridFunction::sample(mesh.clone(), |_| vec2(creal(1.0), creal(0.0)));
        let rep = resolvent_crosscheck(&sys, &BoundaryPair::zeroth(2), cplx(0.0, 1.0), &f).unwrap();
        assert!(rep.defect < 1e-8, "{rep:?}");
        assert!(rep.ode_residual_integral < 1e-8 && rep.ode_residual_bvp < 1e-8, "{rep:?}");

        let f = GridFunction::sample(mesh, |t| vec2(creal(t), creal(1.0)));
        let tau = BoundaryPair::diagonal(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        let rep = resolvent_crosscheck(&sys, &tau, cplx(0.0, 2.0), &f).unwrap();
        assert!(rep.defect < 1e-8, "{rep:?}");
    }

    #[test]
    fn null_input_gives_null_output() {
        let sys = free1();
        let f = GridFunction::zeros(sys.mesh_for(1.0), 2);
        let rep = resolvent_crosscheck(&sys, &BoundaryPair::first(2), cplx(0.5, 1.0), &f).unwrap();
        assert_eq!(rep.defect, 0.0);
    }

    #[test]
    fn first_identity_and_adjoint() {
        let sys = free1();
        let mesh = sys.mesh_for(1.0);
        let f = GridFunction::sample(mesh.clone(), |_| vec2(creal(1.0), creal(0.0)));
        let tau = BoundaryPair::zeroth(2);
        let r = resolvent_identity_check(&sys, &tau, cplx(0.0, 1.0), cplx(0.0, 2.0), &f).unwrap();
        assert!(r < 1e-7, "{r}");
        let g = GridFunction::sample(mesh, |t| vec2(cplx(t * t, 1.0), creal(1.0 - t)));
        let d = resolvent_adjoint_defect(&sys, &tau, cplx(0.0, 1.0), &f, &g).unwrap();
        assert!(d < 1e-8, "{d}");
    }
}
