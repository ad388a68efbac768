//! Regular symmetric systems `J y' - B(t) y = λ Δ(t) y` on `[a, b]`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{Complex, ComplexField};

use crate::block::{canonical_structure_matrix, BlockDims};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::{hermitian_part, min_hermitian_eigenvalue, null_space};
use crate::poly::{MatrixPoly, PiecewiseMatrixPoly};
use crate::quadrature::{merge_breaks, GaussLegendre, Mesh};
use crate::scalar::{complex_to_f64, lit, max_abs, to_f64, CMat, Real};

/// Default Gauss–Legendre order for meshes built by the library.
pub const MESH_ORDER: usize = 16;

/// Numerical tolerances; every field is configurable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Hermiticity defect allowed in `B`.
    pub sym: T,
    /// Most negative eigenvalue allowed in `Δ`.
    pub psd: T,
    pub quad: T,
    /// Target local accuracy of the ODE integrator (relative to `1 + |Y|`).
    pub ode: T,
    pub eig: T,
    pub adm: T,
    pub jump_psd: T,
    /// Relative singular-value threshold for null spaces and multiplicities.
    pub nullity: T,
    /// Largest condition number accepted for the Weyl constraint system.
    pub weyl_cond: T,
    /// Largest condition number accepted for boundary-value systems.
    pub bvp_cond: T,
    /// Relative residual accepted when checking `J y' - B y = Δ f`.
    pub member: T,
}

impl<T: Real> Default for Tolerances<T> {
    /// Defaults tuned for `f64`; the small ones are floored at a multiple
    /// of the machine epsilon so coarser types stay usable.
    fn default() -> Self {
        let floor = T::default_epsilon() * lit(256.0);
        let small = |x: f64| lit::<T>(x).max(floor);
        Tolerances {
            sym: small(1e-10),
            psd: small(1e-10),
            quad: small(1e-10),
            ode: small(1e-10),
            eig: small(1e-10),
            adm: small(1e-6),
            jump_psd: small(1e-7),
            nullity: small(1e-8),
            weyl_cond: lit(1e12),
            bvp_cond: lit(1e8),
            member: small(1e-6),
        }
    }
}

impl<T: Real> Tolerances<T> {
    /// One-line summary written into report and CSV headers.
    pub fn profile(&self) -> String {
        format!(
            "sym={:e} psd={:e} quad={:e} ode={:e} eig={:e} adm={:e} jump_psd={:e} nullity={:e} weyl_cond={:e} bvp_cond={:e} member={:e}",
            to_f64(self.sym),
            to_f64(self.psd),
            to_f64(self.quad),
            to_f64(self.ode),
            to_f64(self.eig),
            to_f64(self.adm),
            to_f64(self.jump_psd),
            to_f64(self.nullity),
            to_f64(self.weyl_cond),
            to_f64(self.bvp_cond),
            to_f64(self.member)
        )
    }
}

/// Maximal interval on which both coefficients are single polynomials.
#[derive(Debug, Clone)]
pub(crate) struct Segment<T: Real> {
    pub start: T,
    pub end: T,
    /// `-J B(t)` as a polynomial in `t`.
    pub jb: MatrixPoly<T>,
    /// `-J Δ(t)` as a polynomial in `t`.
    pub jd: MatrixPoly<T>,
    pub delta: MatrixPoly<T>,
    pub coeff_b: MatrixPoly<T>,
}

type LambdaKey = (u64, u64);

fn lambda_key<T: Real>(lambda: Complex<T>) -> LambdaKey {
    let (re, im) = complex_to_f64(lambda);
    // Normalise -0.0 so that 0 and -0 share a cache slot.
    ((re + 0.0).to_bits(), (im + 0.0).to_bits())
}

#[derive(Debug)]
pub struct SymmetricSystem<T: Real> {
    dims: BlockDims,
    a: T,
    b: T,
    coeff_b: PiecewiseMatrixPoly<T>,
    coeff_delta: PiecewiseMatrixPoly<T>,
    j: CMat<T>,
    breaks: Vec<T>,
    segments: Vec<Segment<T>>,
    b_bound: T,
    delta_bound: T,
    pub tol: Tolerances<T>,
    pub name: Option<String>,
    monodromy_cache: Mutex<HashMap<LambdaKey, CMat<T>>>,
}

impl<T: Real> Clone for SymmetricSystem<T> {
    fn clone(&self) -> Self {
        SymmetricSystem {
            dims: self.dims,
            a: self.a,
            b: self.b,
            coeff_b: self.coeff_b.clone(),
            coeff_delta: self.coeff_delta.clone(),
            j: self.j.clone(),
            breaks: self.breaks.clone(),
            segments: self.segments.clone(),
            b_bound: self.b_bound,
            delta_bound: self.delta_bound,
            tol: self.tol,
            name: self.name.clone(),
            monodromy_cache: Mutex::new(HashMap::new()),
        }
    }
}

fn mul_poly<T: Real>(left: &CMat<T>, p: &MatrixPoly<T>) -> MatrixPoly<T> {
    MatrixPoly::new(p.coeffs().iter().map(|c| left * c).collect()).expect("shapes preserved")
}

impl<T: Real> SymmetricSystem<T> {
    pub fn new(
        dims: BlockDims,
        interval: (T, T),
        coeff_b: PiecewiseMatrixPoly<T>,
        coeff_delta: PiecewiseMatrixPoly<T>,
    ) -> Result<Self> {
        let (a, b) = interval;
        if !(a < b) {
            return Err(Error::MalformedCoefficients("interval must satisfy a < b".into()));
        }
        let n = dims.total();
        for (name, c) in [("B", &coeff_b), ("Delta", &coeff_delta)] {
            if c.shape() != (n, n) {
                return Err(Error::MalformedCoefficients(format!(
                    "{name} is {}x{} but the block dimension is {n}",
                    c.shape().0,
                    c.shape().1
                )));
            }
            let span = (b - a).abs().max(T::one()) * T::default_epsilon() * lit(64.0);
            if (c.start() - a).abs() > span || (c.end() - b).abs() > span {
                return Err(Error::MalformedCoefficients(format!(
                    "pieces of {name} cover [{}, {}] instead of [{}, {}]",
                    to_f64(c.start()),
                    to_f64(c.end()),
                    to_f64(a),
                    to_f64(b)
                )));
            }
        }
        let j = canonical_structure_matrix::<T>(dims).j;
        let minus_j = -&j;
        let mut breaks = merge_breaks(&[coeff_b.breaks(), coeff_delta.breaks()]);
        // Snap ends to the interval exactly.
        breaks.retain(|&x| x > a && x < b);
        breaks.insert(0, a);
        breaks.push(b);
        let segments: Vec<Segment<T>> = breaks
            .windows(2)
            .map(|w| {
                let mid = (w[0] + w[1]) * lit(0.5);
                let pb = coeff_b.pieces()[coeff_b.piece_index(mid)].clone();
                let pd = coeff_delta.pieces()[coeff_delta.piece_index(mid)].clone();
                Segment { start: w[0], end: w[1], jb: mul_poly(&minus_j, &pb), jd: mul_poly(&minus_j, &pd), delta: pd, coeff_b: pb }
            })
            .collect();
        let mut sys = SymmetricSystem {
            dims,
            a,
            b,
            coeff_b,
            coeff_delta,
            j,
            breaks,
            segments,
            b_bound: T::zero(),
            delta_bound: T::zero(),
            tol: Tolerances::default(),
            name: None,
            monodromy_cache: Mutex::new(HashMap::new()),
        };
        let (bb, db) = sys.sampled_bounds();
        sys.b_bound = bb;
        sys.delta_bound = db;
        Ok(sys)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_tolerances(mut self, tol: Tolerances<T>) -> Self {
        self.tol = tol;
        self.clear_cache();
        self
    }

    fn sampled_bounds(&self) -> (T, T) {
        let mut bb = T::zero();
        let mut db = T::zero();
        for seg in &self.segments {
            for k in 0..=8 {
                let t = seg.start + (seg.end - seg.start) * lit(k as f64 / 8.0);
                bb = bb.max(seg.coeff_b.eval_real(t).norm());
                db = db.max(seg.delta.eval_real(t).norm());
            }
        }
        (bb, db)
    }

    pub fn dims(&self) -> BlockDims {
        self.dims
    }

    pub fn interval(&self) -> (T, T) {
        (self.a, self.b)
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn coeff_b(&self) -> &PiecewiseMatrixPoly<T> {
        &self.coeff_b
    }

    pub fn coeff_delta(&self) -> &PiecewiseMatrixPoly<T> {
        &self.coeff_delta
    }

    pub fn structure(&self) -> &CMat<T> {
        &self.j
    }

    /// Union of the breakpoints of both coefficients, including `a` and `b`.
    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub(crate) fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub(crate) fn segment_of(&self, t: T) -> usize {
        let n = self.segments.len();
        self.breaks[1..n].partition_point(|&x| x <= t)
    }

    /// `Δ(t)`, taking the right-hand piece at breakpoints.
    pub fn delta_at(&self, t: T) -> CMat<T> {
        self.segments[self.segment_of(t)].delta.eval_real(t)
    }

    pub fn b_at(&self, t: T) -> CMat<T> {
        self.segments[self.segment_of(t)].coeff_b.eval_real(t)
    }

    /// Sampled Frobenius bounds of `B` and `Δ`.
    pub fn coefficient_bounds(&self) -> (T, T) {
        (self.b_bound, self.delta_bound)
    }

    /// Growth rate bound `|B| + |λ| |Δ|` of the first-order system.
    pub fn rate(&self, lambda: Complex<T>) -> T {
        self.b_bound + lambda.modulus() * self.delta_bound
    }

    /// Mesh aligned with the breakpoints and fine enough to resolve
    /// solutions at spectral parameters up to `lambda_abs`.
    pub fn mesh_for(&self, lambda_abs: T) -> Arc<Mesh<T>> {
        let rate = self.b_bound + lambda_abs * self.delta_bound;
        let width = lit::<T>(0.25).min(lit::<T>(1.5) / (T::one() + rate));
        Arc::new(Mesh::new(&self.breaks, width, MESH_ORDER).expect("valid breaks"))
    }

    pub(crate) fn cached_monodromy(&self, lambda: Complex<T>) -> Option<CMat<T>> {
        self.monodromy_cache.lock().ok()?.get(&lambda_key(lambda)).cloned()
    }

    pub(crate) fn store_monodromy(&self, lambda: Complex<T>, m: &CMat<T>) {
        if let Ok(mut cache) = self.monodromy_cache.lock() {
            if cache.len() > 100_000 {
                cache.clear();
            }
            cache.insert(lambda_key(lambda), m.clone());
        }
    }

    pub fn clear_cache(&self) {
        if let Ok(mut cache) = self.monodromy_cache.lock() {
            cache.clear();
        }
    }
}

/// Outcome of the coefficient hypotheses check.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub max_hermitian_defect: f64,
    /// Where the Hermiticity defect of `B` is largest.
    pub defect_location: f64,
    pub min_delta_eigenvalue: f64,
    pub min_eigenvalue_location: f64,
    pub hermitian_ok: bool,
    pub psd_ok: bool,
    /// Breakpoint at the left end of the piece containing the worst defect.
    pub failing_breakpoint: Option<f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.hermitian_ok && self.psd_ok
    }
}

/// Samples each segment at Gauss nodes and both one-sided endpoints.
fn validation_samples<T: Real>(sys: &SymmetricSystem<T>) -> Vec<(usize, T)> {
    let rule = GaussLegendre::<T>::new(12);
    let mut out = Vec::new();
    for (i, seg) in sys.segments.iter().enumerate() {
        out.push((i, seg.start));
        let half = (seg.end - seg.start) * lit(0.5);
        for &x in rule.nodes() {
            out.push((i, seg.start + half + half * x));
        }
        out.push((i, seg.end));
    }
    out
}

pub fn validate_system<T: Real>(sys: &SymmetricSystem<T>) -> ValidationReport {
    let mut herm = (T::zero(), sys.a, 0usize);
    let mut mineig = (T::max_value().unwrap_or_else(|| lit(f64::MAX)), sys.a, 0usize);
    for (i, t) in validation_samples(sys) {
        let seg = &sys.segments[i];
        let b = seg.coeff_b.eval_real(t);
        let defect = max_abs(&(&b - b.adjoint()));
        if defect > herm.0 {
            herm = (defect, t, i);
        }
        let d = seg.delta.eval_real(t);
        let ev = min_hermitian_eigenvalue(&d);
        let asym = max_abs(&(&d - d.adjoint()));
        // A non-Hermitian weight is as bad as a negative one.
        let ev = ev - asym;
        if ev < mineig.0 {
            mineig = (ev, t, i);
        }
    }
    let hermitian_ok = herm.0 <= sys.tol.sym;
    let psd_ok = mineig.0 >= -sys.tol.psd;
    let failing_breakpoint = if !hermitian_ok {
        Some(to_f64(sys.segments[herm.2].start))
    } else if !psd_ok {
        Some(to_f64(sys.segments[mineig.2].start))
    } else {
        None
    };
    ValidationReport {
        max_hermitian_defect: to_f64(herm.0),
        defect_location: to_f64(herm.1),
        min_delta_eigenvalue: to_f64(mineig.0),
        min_eigenvalue_location: to_f64(mineig.1),
        hermitian_ok,
        psd_ok,
        failing_breakpoint,
    }
}

/// Fails with `MalformedCoefficients` unless the system passes validation.
pub fn ensure_valid<T: Real>(sys: &SymmetricSystem<T>) -> Result<ValidationReport> {
    let rep = validate_system(sys);
    if rep.passed() {
        Ok(rep)
    } else {
        Err(Error::MalformedCoefficients(format!(
            "hypotheses fail near t = {} (hermitian defect {:e}, min weight eigenvalue {:e})",
            rep.failing_breakpoint.unwrap_or(rep.defect_location),
            rep.max_hermitian_defect,
            rep.min_delta_eigenvalue
        )))
    }
}

fn weighted_sum<T: Real>(sys: &SymmetricSystem<T>, f: &GridFunction<T>, g: &GridFunction<T>, mesh: &Mesh<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    let fsrc = f.mesh();
    let gsrc = g.mesh();
    for p in 0..mesh.num_panels() {
        let (l, r) = mesh.panel_bounds(p);
        let mid = (l + r) * lit(0.5);
        let seg = &sys.segments[sys.segment_of(mid)];
        let pf = fsrc.panel_of(mid);
        let pg = gsrc.panel_of(mid);
        for j in 0..mesh.order() {
            let t = mesh.node(p, j);
            let w = mesh.weight(p, j);
            let fv = f.eval_in_panel(pf, t);
            let gv = g.eval_in_panel(pg, t);
            let df = seg.delta.eval_real(t) * fv;
            acc += gv.dotc(&df) * w;
        }
    }
    acc
}

/// `∫ (Δ f, g) dt` by composite Gauss–Legendre on the common refinement of
/// both grids and the coefficient breakpoints.
pub fn weighted_inner_product<T: Real>(sys: &SymmetricSystem<T>, f: &GridFunction<T>, g: &GridFunction<T>) -> Result<Complex<T>> {
    if f.dim() != sys.dims().total() || g.dim() != sys.dims().total() {
        return Err(Error::InvalidInput("grid function dimension does not match the system".into()));
    }
    let order = f.mesh().order().max(g.mesh().order()) + 3;
    let edges = merge_breaks(&[f.mesh().edges(), g.mesh().edges(), sys.breaks()]);
    let mesh = Mesh::new(&edges, sys.b - sys.a, order)?;
    let coarse = weighted_sum(sys, f, g, &mesh);
    let fine = weighted_sum(sys, f, g, &mesh.with_order(order + 2));
    let est = (fine - coarse).modulus();
    let tol = sys.tol.quad * (T::one() + fine.modulus());
    if est > tol {
        return Err(Error::QuadratureFailure { estimate: to_f64(est), tol: to_f64(tol) });
    }
    Ok(fine)
}

/// `‖f‖_Δ`.
pub fn weighted_norm<T: Real>(sys: &SymmetricSystem<T>, f: &GridFunction<T>) -> Result<T> {
    Ok(weighted_inner_product(sys, f, f)?.re.max(T::zero()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    /// `Δ` is invertible on a subinterval, so no non-zero solution is Δ-null.
    Certified,
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct DefinitenessReport {
    /// Estimated measure of `{t : Δ(t) invertible}`.
    pub invertible_measure: f64,
    pub absolutely_definite: bool,
    pub definiteness: Definiteness,
}

pub fn probe_definiteness<T: Real>(sys: &SymmetricSystem<T>) -> DefinitenessReport {
    // Each segment is split into cells; a cell counts when Δ is invertible
    // at its midpoint. Polynomial entries make this exact away from isolated
    // singular points.
    let cells = 64;
    let mut measure = T::zero();
    for seg in &sys.segments {
        let h = (seg.end - seg.start) / lit(cells as f64);
        for k in 0..cells {
            let t = seg.start + h * lit(k as f64 + 0.5);
            let d = hermitian_part(&seg.delta.eval_real(t));
            let scale = d.norm().max(T::one());
            if min_hermitian_eigenvalue(&d) > sys.tol.nullity * scale {
                measure += h;
            }
        }
    }
    let absolutely_definite = measure > T::zero();
    DefinitenessReport {
        invertible_measure: to_f64(measure),
        absolutely_definite,
        definiteness: if absolutely_definite { Definiteness::Certified } else { Definiteness::Undetermined },
    }
}

/// Kernel of `Δ` at `t` as orthonormal columns.
pub fn delta_kernel<T: Real>(sys: &SymmetricSystem<T>, seg: usize, t: T) -> CMat<T> {
    let d = hermitian_part(&sys.segments[seg].delta.eval_real(t));
    if d.norm() < sys.tol.nullity {
        return CMat::identity(d.nrows(), d.nrows());
    }
    null_space(&d, sys.tol.nullity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cplx, creal};

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

    #[test]
    fn free_system_validates() {
        let rep = validate_system(&free1());
        assert!(rep.passed());
        assert_eq!(rep.max_hermitian_defect, 0.0);
    }

    #[test]
    fn non_hermitian_piece_is_located() {
        let mut bad = CMat::<f64>::zeros(2, 2);
        bad[(0, 1)] = cplx(1.0, 0.0);
        let b = PiecewiseMatrixPoly::new(
            vec![0.0, 1.0, 2.0],
            vec![MatrixPoly::constant(CMat::zeros(2, 2)), MatrixPoly::constant(bad)],
            6,
        )
        .unwrap();
        let sys = SymmetricSystem::new(
            BlockDims::new(1, 0).unwrap(),
            (0.0, 2.0),
            b,
            PiecewiseMatrixPoly::constant(0.0, 2.0, CMat::identity(2, 2)),
        )
        .unwrap();
        let rep = validate_system(&sys);
        assert!(!rep.passed());
        assert_eq!(rep.failing_breakpoint, Some(1.0));
    }

    #[test]
    fn uncovered_interval_rejected() {
        let err = SymmetricSystem::new(
            BlockDims::new(1, 0).unwrap(),
            (0.0, 2.0),
            PiecewiseMatrixPoly::constant(0.0, 1.0, CMat::<f64>::zeros(2, 2)),
            PiecewiseMatrixPoly::constant(0.0, 2.0, CMat::identity(2, 2)),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MalformedCoefficients(_)));
    }

    #[test]
    fn constant_inner_product() {
        let sys = free1();
        let f = GridFunction::sample(sys.mesh_for(0.0), |_| nalgebra::DVector::from_vec(vec![creal(1.0), creal(0.0)]));
        let v = weighted_inner_product(&sys, &f, &f).unwrap();
        assert!((v.re - std::f64::consts::PI).abs() < 1e-13);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn definiteness_of_identity_weight() {
        let rep = probe_definiteness(&free1());
        assert!(rep.absolutely_definite);
        assert!((rep.invertible_measure - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(rep.definiteness, Definiteness::Certified);
    }
}
