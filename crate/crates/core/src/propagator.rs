//! Fundamental solutions `Y₀(t, λ)` of `J y' - B y = λ Δ y` with
//! `Y₀(a, λ) = I`.

use std::sync::Arc;

use nalgebra::{Complex, ComplexField};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::norm2;
use crate::ode::{integrate, OdeFailure, OdeOptions};
use crate::poly::MatrixPoly;
use crate::quadrature::Mesh;
use crate::scalar::{complex_to_f64, creal, lit, to_f64, CMat, CVec, Real};
use crate::system::{Segment, SymmetricSystem};

/// `-J (B(t) + λ Δ(t))` on one segment.
fn generator<T: Real>(seg: &Segment<T>, lambda: Complex<T>) -> MatrixPoly<T> {
    let deg = seg.jb.degree().max(seg.jd.degree());
    let (r, c) = seg.jb.shape();
    let coeffs = (0..=deg)
        .map(|k| {
            let mut m = CMat::zeros(r, c);
            if let Some(b) = seg.jb.coeffs().get(k) {
                m += b;
            }
            if let Some(d) = seg.jd.coeffs().get(k) {
                m += d * lambda;
            }
            m
        })
        .collect();
    MatrixPoly::new(coeffs).expect("consistent shapes")
}

fn ode_options<T: Real>(sys: &SymmetricSystem<T>, h: T) -> OdeOptions<T> {
    // Local tolerances two orders tighter than the advertised accuracy.
    let mut o = OdeOptions::with_tol(sys.tol.ode * lit(1e-2));
    o.h_init = if h > T::zero() { Some(h) } else { None };
    o
}

fn map_failure<T: Real>(lambda: Complex<T>, f: OdeFailure<T>) -> Error {
    let (re, im) = complex_to_f64(lambda);
    let t = match f {
        OdeFailure::StepSizeUnderflow { t } | OdeFailure::MaxSteps { t } => t,
    };
    Error::StepSizeUnderflow { lambda_re: re, lambda_im: im, t: to_f64(t) }
}

/// Optional inhomogeneity `-J Δ(t) g(t)` added to the last state column.
struct Forcing<'a, T: Real> {
    g: &'a GridFunction<T>,
}

impl<T: Real> Forcing<'_, T> {
    fn value(&self, seg: &Segment<T>, t: T) -> CVec<T> {
        let mesh = self.g.mesh();
        let mut p = mesh.panel_of(t);
        // Stay on the segment's side of a discontinuity of g.
        if p > 0 && mesh.panel_bounds(p).0 >= seg.end {
            p -= 1;
        }
        if p + 1 < mesh.num_panels() && mesh.panel_bounds(p).1 <= seg.start {
            p += 1;
        }
        self.g.eval_in_panel(p, t)
    }
}

/// Integrates over one segment from `x0` at `seg.start` through `stops`.
fn run_segment<T: Real, O: FnMut(usize, &CMat<T>)>(
    sys: &SymmetricSystem<T>,
    seg: &Segment<T>,
    lambda: Complex<T>,
    x0: CMat<T>,
    stops: &[T],
    forcing: Option<&Forcing<'_, T>>,
    h: &mut T,
    output: O,
) -> Result<CMat<T>> {
    let gen = generator(seg, lambda);
    let n = sys.dims().total();
    let rhs = |t: T, x: &CMat<T>, dx: &mut CMat<T>| {
        let a = gen.eval_real(t);
        a.mul_to(x, dx);
        if let Some(fc) = forcing {
            let g = fc.value(seg, t);
            let add = seg.jd.eval_real(t) * g;
            let mut col = dx.column_mut(n);
            col += add;
        }
    };
    let (x, stats) = integrate(rhs, seg.start, stops, x0, &ode_options(sys, *h), output).map_err(|f| map_failure(lambda, f))?;
    if stats.next_h > T::zero() {
        *h = stats.next_h;
    }
    Ok(x)
}

/// `Y₀(t, λ)`.
pub fn fundamental_solution<T: Real>(sys: &SymmetricSystem<T>, lambda: Complex<T>, t: T) -> Result<CMat<T>> {
    let (a, b) = sys.interval();
    if !(t >= a && t <= b) {
        return Err(Error::InvalidInput(format!("t = {} lies outside [{}, {}]", to_f64(t), to_f64(a), to_f64(b))));
    }
    let n = sys.dims().total();
    let mut y = CMat::identity(n, n);
    let mut h = T::zero();
    for seg in sys.segments() {
        if t <= seg.start {
            break;
        }
        let stop = if t < seg.end { t } else { seg.end };
        y = run_segment(sys, seg, lambda, y, &[stop], None, &mut h, |_, _| {})?;
    }
    Ok(y)
}

/// `Y₀(b, λ)`, memoised per `λ`.
pub fn monodromy<T: Real>(sys: &SymmetricSystem<T>, lambda: Complex<T>) -> Result<CMat<T>> {
    if let Some(m) = sys.cached_monodromy(lambda) {
        return Ok(m);
    }
    let m = fundamental_solution(sys, lambda, sys.b())?;
    sys.store_monodromy(lambda, &m);
    Ok(m)
}

/// `Y₀(·, λ)` (or `[Y₀ | y_p]` for forced runs) at every node and edge of a
/// mesh whose edges contain the coefficient breakpoints.
#[derive(Debug, Clone)]
pub struct Propagation<T: Real> {
    pub lambda: Complex<T>,
    mesh: Arc<Mesh<T>>,
    nodes: Vec<CMat<T>>,
    edges: Vec<CMat<T>>,
}

impl<T: Real> Propagation<T> {
    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    /// Value at node `i` (panel-major numbering).
    pub fn at_node(&self, i: usize) -> &CMat<T> {
        &self.nodes[i]
    }

    pub fn node_values(&self) -> &[CMat<T>] {
        &self.nodes
    }

    /// Value at mesh edge `k`; these are the checkpoints.
    pub fn at_edge(&self, k: usize) -> &CMat<T> {
        &self.edges[k]
    }

    pub fn checkpoints(&self) -> impl Iterator<Item = (T, &CMat<T>)> {
        self.mesh.edges().iter().copied().zip(self.edges.iter())
    }

    pub fn at_end(&self) -> &CMat<T> {
        self.edges.last().expect("non-empty")
    }

    /// Interpolated value from the panel's node samples.
    pub fn interpolate(&self, t: T) -> CMat<T> {
        let p = self.mesh.panel_of(t);
        let basis = self.mesh.rule().lagrange_basis(self.mesh.to_reference(p, t));
        let n = self.mesh.order();
        let mut out = CMat::zeros(self.nodes[0].nrows(), self.nodes[0].ncols());
        for (j, &l) in basis.iter().enumerate() {
            out += &self.nodes[p * n + j] * creal(l);
        }
        out
    }

    /// Dense output: re-integrates from the panel's left edge to `t`.
    /// Only available for homogeneous propagations.
    pub fn eval(&self, sys: &SymmetricSystem<T>, t: T) -> Result<CMat<T>> {
        let p = self.mesh.panel_of(t);
        let (l, _) = self.mesh.panel_bounds(p);
        if t == l {
            return Ok(self.edges[p].clone());
        }
        let seg = &sys.segments()[sys.segment_of((l + t) * lit(0.5))];
        let sub = Segment { start: l, ..seg.clone() };
        let mut h = T::zero();
        run_segment(sys, &sub, self.lambda, self.edges[p].clone(), &[t], None, &mut h, |_, _| {})
    }
}

/// Adds the coefficient breakpoints to a mesh.
pub fn align_mesh<T: Real>(sys: &SymmetricSystem<T>, mesh: &Mesh<T>) -> Arc<Mesh<T>> {
    Arc::new(mesh.with_extra_breaks(sys.breaks()))
}

fn propagate_impl<T: Real>(
    sys: &SymmetricSystem<T>,
    lambda: Complex<T>,
    mesh: Arc<Mesh<T>>,
    x0: CMat<T>,
    forcing: Option<&Forcing<'_, T>>,
) -> Result<Propagation<T>> {
    let n = mesh.order();
    let mut nodes: Vec<CMat<T>> = Vec::with_capacity(mesh.num_nodes());
    let mut edges: Vec<CMat<T>> = Vec::with_capacity(mesh.num_panels() + 1);
    edges.push(x0.clone());
    let mut x = x0;
    let mut h = T::zero();
    let mut p0 = 0;
    for seg in sys.segments() {
        // Panels of this segment.
        let mut p1 = p0;
        while p1 < mesh.num_panels() && mesh.panel_bounds(p1).1 <= seg.end {
            p1 += 1;
        }
        if p1 == p0 {
            continue;
        }
        let mut stops = Vec::with_capacity((p1 - p0) * (n + 1));
        for p in p0..p1 {
            for j in 0..n {
                stops.push(mesh.node(p, j));
            }
            stops.push(mesh.panel_bounds(p).1);
        }
        x = run_segment(sys, seg, lambda, x, &stops, forcing, &mut h, |i, y| {
            if i % (n + 1) == n {
                edges.push(y.clone());
            } else {
                nodes.push(y.clone());
            }
        })?;
        p0 = p1;
    }
    if p0 != mesh.num_panels() {
        return Err(Error::InvalidInput("mesh edges do not contain the coefficient breakpoints".into()));
    }
    Ok(Propagation { lambda, mesh, nodes, edges })
}

/// `Y₀(·, λ)` on `mesh`, which must contain every coefficient breakpoint
/// (see [`align_mesh`]).
pub fn propagate_on_mesh<T: Real>(sys: &SymmetricSystem<T>, lambda: Complex<T>, mesh: Arc<Mesh<T>>) -> Result<Propagation<T>> {
    let n = sys.dims().total();
    propagate_impl(sys, lambda, mesh, CMat::identity(n, n), None)
}

/// `Y₀(·, λ)` on the default mesh for `λ`.
pub fn propagate<T: Real>(sys: &SymmetricSystem<T>, lambda: Complex<T>) -> Result<Propagation<T>> {
    propagate_on_mesh(sys, lambda, sys.mesh_for(lambda.modulus()))
}

/// `[Y₀ | y_p]` where `y_p` solves `J y' - B y - λ Δ y = Δ g`, `y_p(a) = 0`.
pub fn propagate_forced<T: Real>(
    sys: &SymmetricSystem<T>,
    lambda: Complex<T>,
    mesh: Arc<Mesh<T>>,
    g: &GridFunction<T>,
) -> Result<Propagation<T>> {
    let n = sys.dims().total();
    if g.dim() != n {
        return Err(Error::InvalidInput("forcing dimension does not match the system".into()));
    }
    let mut x0 = CMat::zeros(n, n + 1);
    x0.view_mut((0, 0), (n, n)).fill_with_identity();
    propagate_impl(sys, lambda, mesh, x0, Some(&Forcing { g }))
}

/// Orthonormal basis `[U; V]` of `{(y(a), y(b))}` over all solutions at `λ`.
///
/// The solution span is re-orthonormalised after every short subinterval,
/// so the basis stays well conditioned even when `Y₀(b, λ)` would overflow.
pub fn monodromy_graph<T: Real>(sys: &SymmetricSystem<T>, lambda: Complex<T>) -> Result<(CMat<T>, CMat<T>)> {
    let n = sys.dims().total();
    let s = creal(T::one() / lit::<T>(2.0).sqrt());
    let mut u = CMat::<T>::identity(n, n) * s;
    let mut v = u.clone();
    let mut h = T::zero();
    let rate = sys.rate(lambda);
    for seg in sys.segments() {
        let len = seg.end - seg.start;
        let k = to_f64(len * rate).ceil().max(1.0) as usize;
        let step = len / lit(k as f64);
        for i in 0..k {
            let start = seg.start + step * lit(i as f64);
            let end = if i + 1 == k { seg.end } else { start + step };
            let sub = Segment { start, ..seg.clone() };
            v = run_segment(sys, &sub, lambda, v, &[end], None, &mut h, |_, _| {})?;
            let mut w = CMat::zeros(2 * n, n);
            w.view_mut((0, 0), (n, n)).copy_from(&u);
            w.view_mut((n, 0), (n, n)).copy_from(&v);
            let q = w.qr().q();
            u = q.view((0, 0), (n, n)).into_owned();
            v = q.view((n, 0), (n, n)).into_owned();
        }
    }
    Ok((u, v))
}

/// Result of checking `Y₀(t, λ̄)* J Y₀(t, λ) = J` at the checkpoints.
#[derive(Debug, Clone, Copy)]
pub struct LagrangeCheck<T> {
    /// `max_t ‖Y₀(t, λ̄)* J Y₀(t, λ) − J‖`.
    pub absolute: T,
    /// The same residual divided by `‖Y₀(t, λ̄)‖ ‖Y₀(t, λ)‖` at each `t`.
    pub relative: T,
    pub worst_t: T,
}

pub fn lagrange_bilinear_check<T: Real>(sys: &SymmetricSystem<T>, lambda: Complex<T>) -> Result<LagrangeCheck<T>> {
    let mesh = sys.mesh_for(lambda.modulus());
    let fwd = propagate_on_mesh(sys, lambda, mesh.clone())?;
    let bwd = propagate_on_mesh(sys, lambda.conj(), mesh)?;
    let j = sys.structure();
    let mut out = LagrangeCheck { absolute: T::zero(), relative: T::zero(), worst_t: sys.a() };
    for ((t, y), (_, z)) in fwd.checkpoints().zip(bwd.checkpoints()) {
        let r = norm2(&(z.adjoint() * j * y - j));
        let scale = norm2(y) * norm2(z);
        if r > out.absolute {
            out.absolute = r;
            out.worst_t = t;
        }
        out.relative = out.relative.max(r / scale);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockDims;
    use crate::linalg::max_abs_diff;
    use crate::poly::PiecewiseMatrixPoly;
    use crate::scalar::cplx;

    fn free1() -> SymmetricSystem<f64> {
        let pi = std::f64::consts::PI;
        SymmetricSystem::new(
            BlockDims::new(1, 0).unwrap(),
            (0.0, pi),
            PiecewiseMatrixPoly::constant(0.0, pi, CMat::zeros(2, 2)),
            PiecewiseMatrixPoly::constant(0.0, pi, CMat::identity(2, 2)),
        )
        .unwrap()
    }

    fn rotation(lam: Complex<f64>, t: f64) -> CMat<f64> {
        let c = (lam * t).cos();
        let s = (lam * t).sin();
        CMat::from_row_slice(2, 2, &[c, s, -s, c])
    }

    #[test]
    fn free_rotation() {
        let sys = free1();
        for &(lam, t) in &[(cplx(1.0, 0.0), 1.0), (cplx(0.3, 1.2), 2.5), (cplx(-2.0, -0.5), std::f64::consts::PI)] {
            let y = fundamental_solution(&sys, lam, t).unwrap();
            assert!(max_abs_diff(&y, &rotation(lam, t)) < 1e-10, "{lam} {t}");
        }
    }

    #[test]
    fn monodromy_at_half() {
        let m = monodromy(&free1(), cplx(0.5, 0.0)).unwrap();
        let want = CMat::from_row_slice(2, 2, &[creal(0.0), creal(1.0), creal(-1.0), creal(0.0)]);
        assert!(max_abs_diff(&m, &want) < 1e-10);
    }

    #[test]
    fn mesh_propagation_and_dense_output() {
        let sys = free1();
        let lam = cplx(1.5, 0.5);
        let p = propagate(&sys, lam).unwrap();
        let nodes = p.mesh().nodes();
        for (i, &t) in nodes.iter().enumerate().step_by(7) {
            assert!(max_abs_diff(p.at_node(i), &rotation(lam, t)) < 1e-10);
        }
        let y = p.eval(&sys, 1.2345).unwrap();
        assert!(max_abs_diff(&y, &rotation(lam, 1.2345)) < 1e-10);
        assert!(max_abs_diff(&p.interpolate(2.2), &rotation(lam, 2.2)) < 1e-10);
    }

    #[test]
    fn graph_basis_spans_solution_pairs() {
        let sys = free1();
        let lam = cplx(0.7, 2.0);
        let (u, v) = monodromy_graph(&sys, lam).unwrap();
        let m = monodromy(&sys, lam).unwrap();
        // V = Y(b) U for the same basis.
        assert!(max_abs_diff(&v, &(&m * &u)) < 1e-9);
    }

    #[test]
    fn graph_basis_survives_large_imaginary_part() {
        let (u, v) = monodromy_graph(&free1(), cplx(0.0, 320.0)).unwrap();
        assert!(u.iter().chain(v.iter()).all(|z| z.re.is_finite() && z.im.is_finite()));
    }

    #[test]
    fn forced_solution_of_constant_source() {
        // λ = 0, B = 0, Δ = I: J y' = g, so y' = -J g and y(t) = -J g t.
        let sys = free1();
        let mesh = sys.mesh_for(0.0);
        let g = GridFunction::sample(mesh.clone(), |_| CVec::from_vec(vec![creal(1.0), creal(2.0)]));
        let p = propagate_forced(&sys, cplx(0.0, 0.0), mesh, &g).unwrap();
        let end = p.at_end();
        let t = std::f64::consts::PI;
        // -J (1, 2) = (2, -1).
        assert!((end[(0, 2)] - creal(2.0 * t)).norm() < 1e-10);
        assert!((end[(1, 2)] - creal(-t)).norm() < 1e-10);
    }

    #[test]
    fn symplectic_identity_on_free_system() {
        let r = lagrange_bilinear_check(&free1(), cplx(0.0, 1.0)).unwrap();
        assert!(r.absolute < 1e-10, "{:?}", r);
    }
}
