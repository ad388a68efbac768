//! Vector-valued functions sampled at the nodes of a panel mesh.

use std::sync::Arc;

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::quadrature::Mesh;
use crate::scalar::{creal, lit, CVec, Real};

/// Samples of a `C^dim`-valued function at the Gauss nodes of a mesh.
/// Between nodes the function is the per-panel interpolating polynomial.
#[derive(Debug, Clone)]
pub struct GridFunction<T: Real> {
    mesh: Arc<Mesh<T>>,
    values: Vec<CVec<T>>,
    dim: usize,
    /// Free-form label carried into reports (e.g. a closed-form name).
    pub tag: Option<String>,
}

impl<T: Real> GridFunction<T> {
    pub fn from_values(mesh: Arc<Mesh<T>>, values: Vec<CVec<T>>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::InvalidInput(format!(
                "{} samples for a mesh with {} nodes",
                values.len(),
                mesh.num_nodes()
            )));
        }
        if mesh.num_nodes() < 2 {
            return Err(Error::InvalidInput("grid function needs at least two nodes".into()));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidInput("grid function samples differ in length".into()));
        }
        Ok(GridFunction { mesh, values, dim, tag: None })
    }

    /// Samples `f` at every node.
    pub fn sample<F: FnMut(T) -> CVec<T>>(mesh: Arc<Mesh<T>>, mut f: F) -> Self {
        let values: Vec<CVec<T>> = mesh.nodes().into_iter().map(&mut f).collect();
        let dim = values[0].len();
        GridFunction { mesh, values, dim, tag: None }
    }

    /// Samples with the panel index available, so piecewise functions can
    /// pick the side of a breakpoint.
    pub fn sample_by_panel<F: FnMut(usize, T) -> CVec<T>>(mesh: Arc<Mesh<T>>, mut f: F) -> Self {
        let mut values = Vec::with_capacity(mesh.num_nodes());
        for p in 0..mesh.num_panels() {
            for j in 0..mesh.order() {
                values.push(f(p, mesh.node(p, j)));
            }
        }
        let dim = values[0].len();
        GridFunction { mesh, values, dim, tag: None }
    }

    pub fn zeros(mesh: Arc<Mesh<T>>, dim: usize) -> Self {
        let values = vec![CVec::zeros(dim); mesh.num_nodes()];
        GridFunction { mesh, values, dim, tag: None }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[CVec<T>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Value at `t` using the interpolant of the panel containing `t`.
    pub fn eval(&self, t: T) -> CVec<T> {
        self.eval_in_panel(self.mesh.panel_of(t), t)
    }

    /// Value of panel `p`'s interpolant at `t`; `t` may lie on either edge.
    pub fn eval_in_panel(&self, p: usize, t: T) -> CVec<T> {
        let x = self.mesh.to_reference(p, t);
        let basis = self.mesh.rule().lagrange_basis(x);
        let n = self.mesh.order();
        let mut out = CVec::zeros(self.dim);
        for (j, &l) in basis.iter().enumerate() {
            out.axpy(creal(l), &self.values[p * n + j], creal(T::one()));
        }
        out
    }

    /// Limit from the left at the right edge of the mesh (`y(b)`).
    pub fn right_end(&self) -> CVec<T> {
        self.eval_in_panel(self.mesh.num_panels() - 1, self.mesh.b())
    }

    pub fn left_end(&self) -> CVec<T> {
        self.eval_in_panel(0, self.mesh.a())
    }

    /// Derivative of the interpolant at every node.
    pub fn derivative_at_nodes(&self) -> Vec<CVec<T>> {
        let n = self.mesh.order();
        let d = self.mesh.rule().diff_matrix();
        let mut out = Vec::with_capacity(self.values.len());
        for p in 0..self.mesh.num_panels() {
            let (l, r) = self.mesh.panel_bounds(p);
            let scale = creal(lit::<T>(2.0) / (r - l));
            for i in 0..n {
                let mut acc = CVec::zeros(self.dim);
                for j in 0..n {
                    acc.axpy(creal(d[i][j]), &self.values[p * n + j], creal(T::one()));
                }
                out.push(acc * scale);
            }
        }
        out
    }

    /// Re-samples the interpolant on another mesh over the same interval.
    pub fn resample(&self, mesh: Arc<Mesh<T>>) -> Self {
        if self.mesh.same_panels(&mesh) {
            return self.clone();
        }
        let mut values = Vec::with_capacity(mesh.num_nodes());
        for p in 0..mesh.num_panels() {
            let (l, r) = mesh.panel_bounds(p);
            // Panel of the source mesh that contains this target panel.
            let src = self.mesh.panel_of((l + r) * lit(0.5));
            for j in 0..mesh.order() {
                values.push(self.eval_in_panel(src, mesh.node(p, j)));
            }
        }
        GridFunction { mesh, values, dim: self.dim, tag: self.tag.clone() }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        if self.mesh.same_panels(&other.mesh) {
            (self.clone(), other.clone())
        } else {
            let m = Arc::new(self.mesh.union(&other.mesh));
            (self.resample(m.clone()), other.resample(m))
        }
    }

    /// `self + alpha * other`, on the union mesh when meshes differ.
    pub fn add_scaled(&self, alpha: Complex<T>, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x + y * alpha).collect();
        GridFunction { mesh: a.mesh, values, dim: self.dim, tag: None }
    }

    pub fn scale(&self, alpha: Complex<T>) -> Self {
        let values = self.values.iter().map(|v| v * alpha).collect();
        GridFunction { mesh: self.mesh.clone(), values, dim: self.dim, tag: None }
    }

    pub fn map_values<F: FnMut(T, &CVec<T>) -> CVec<T>>(&self, mut f: F) -> Self {
        let nodes = self.mesh.nodes();
        let values: Vec<CVec<T>> = nodes.iter().zip(&self.values).map(|(&t, v)| f(t, v)).collect();
        let dim = values.first().map_or(self.dim, |v| v.len());
        GridFunction { mesh: self.mesh.clone(), values, dim, tag: None }
    }

    /// Largest entry modulus over the nodes.
    pub fn max_abs(&self) -> T {
        self.values.iter().flat_map(|v| v.iter()).fold(T::zero(), |acc, z| acc.max(nalgebra::ComplexField::modulus(*z)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn mesh() -> Arc<Mesh<f64>> {
        Arc::new(Mesh::new(&[0.0, 1.0, 2.0], 0.5, 8).unwrap())
    }

    #[test]
    fn polynomial_samples_interpolate_exactly() {
        let g = GridFunction::sample(mesh(), |t| CVec::from_vec(vec![cplx(t * t, -t), creal(1.0)]));
        for &t in &[0.0, 0.3, 1.0, 1.77, 2.0] {
            let v = g.eval(t);
            assert!((v[0] - cplx(t * t, -t)).norm() < 1e-13);
        }
        let d = g.derivative_at_nodes();
        let nodes = g.mesh().nodes();
        for (t, dv) in nodes.iter().zip(d) {
            assert!((dv[0] - cplx(2.0 * t, -1.0)).norm() < 1e-11);
            assert!(dv[1].norm() < 1e-11);
        }
    }

    #[test]
    fn resample_and_combine() {
        let f = GridFunction::sample(mesh(), |t| CVec::from_vec(vec![creal(t)]));
        let other = Arc::new(Mesh::new(&[0.0, 0.7, 2.0], 0.3, 5).unwrap());
        let g = GridFunction::sample(other, |t| CVec::from_vec(vec![creal(t * t)]));
        let h = f.add_scaled(creal(2.0), &g);
        assert!((h.eval(1.3)[0].re - (1.3 + 2.0 * 1.69)).abs() < 1e-12);
        assert!(h.mesh().edges().contains(&0.7));
    }

    #[test]
    fn breakpoint_sides() {
        let g = GridFunction::sample_by_panel(mesh(), |p, _| {
            let v = if p < 2 { 0.0 } else { 1.0 };
            CVec::from_vec(vec![creal(v)])
        });
        assert!(g.eval_in_panel(1, 1.0)[0].norm() < 1e-14);
        assert!((g.eval(1.0)[0].re - 1.0).abs() < 1e-14);
    }
}
