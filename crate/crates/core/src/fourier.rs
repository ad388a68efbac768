//! Fourier transform `f̂(s) = ∫ Y₀(t,s)* Δ(t) f(t) dt`, its inverse on a
//! pure-jump Σ, Parseval diagnostics and the multivalued part of the
//! minimal relation.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::{max_abs_diff, null_space};
use crate::propagator::{align_mesh, propagate_on_mesh};
use crate::quadrature::Mesh;
use crate::scalar::{creal, lit, pi, to_f64, CMat, CVec, Real};
use crate::spectral::{DiscreteL2Sigma, SigmaElement, SpectralFunction};
use crate::system::{delta_kernel, weighted_inner_product, weighted_norm, SymmetricSystem, MESH_ORDER};

#[derive(Debug, Clone)]
pub struct TransformResult<T: Real> {
    pub s_grid: Vec<T>,
    pub values: Vec<CVec<T>>,
    /// System name and a hash of the input samples.
    pub provenance: String,
}

fn sample_hash<T: Real>(f: &GridFunction<T>) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for t in f.mesh().edges() {
        to_f64(*t).to_bits().hash(&mut h);
    }
    for v in f.values() {
        for z in v.iter() {
            to_f64(z.re).to_bits().hash(&mut h);
            to_f64(z.im).to_bits().hash(&mut h);
        }
    }
    h.finish()
}

/// Legendre polynomials `P_0..P_{n-1}` at `x`.
fn legendre_values<T: Real>(n: usize, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(n);
    out.push(T::one());
    if n > 1 {
        out.push(x);
    }
    for k in 2..n {
        let kf = lit::<T>(k as f64);
        let next = ((lit::<T>(2.0) * kf - T::one()) * x * out[k - 1] - (kf - T::one()) * out[k - 2]) / kf;
        out.push(next);
    }
    out
}

/// Mesh used to transform `f` at spectral parameters up to `s_max`.
fn transform_mesh<T: Real>(sys: &SymmetricSystem<T>, f: &GridFunction<T>, s_max: T) -> Arc<Mesh<T>> {
    let order = MESH_ORDER.max(f.mesh().order() + 4);
    align_mesh(sys, &sys.mesh_for(s_max).with_order(order).union(f.mesh()).with_order(order))
}

/// `f̂(s)` with an estimate of the quadrature error from the trailing
/// Legendre coefficients of the integrand on each panel.
fn transform_on_mesh<T: Real>(sys: &SymmetricSystem<T>, mesh: &Arc<Mesh<T>>, fm: &GridFunction<T>, s: T) -> Result<(CVec<T>, T)> {
    let prop = propagate_on_mesh(sys, creal(s), mesh.clone())?;
    let n = sys.dims().total();
    let q = mesh.order();
    let rule = mesh.rule();
    let leg: Vec<Vec<T>> = rule.nodes().iter().map(|&x| legendre_values(q, x)).collect();
    let mut total = CVec::zeros(n);
    let mut err = T::zero();
    for p in 0..mesh.num_panels() {
        let (l, r) = mesh.panel_bounds(p);
        let half = (r - l) * lit(0.5);
        let mut tail = [CVec::<T>::zeros(n), CVec::<T>::zeros(n)];
        for j in 0..q {
            let i = p * q + j;
            let t = mesh.node(p, j);
            let g = prop.at_node(i).adjoint() * (sys.delta_at(t) * &fm.values()[i]);
            total.axpy(creal(mesh.weight(p, j)), &g, creal(T::one()));
            for (slot, k) in [q - 2, q - 1].into_iter().enumerate() {
                let c = lit::<T>((2 * k + 1) as f64 * 0.5) * rule.weights()[j] * leg[j][k];
                tail[slot].axpy(creal(c), &g, creal(T::one()));
            }
        }
        err += (tail[0].norm() + tail[1].norm()) * half;
    }
    Ok((total, err))
}

pub fn fourier_transform<T: Real>(sys: &SymmetricSystem<T>, f: &GridFunction<T>, s_grid: &[T]) -> Result<TransformResult<T>> {
    if f.dim() != sys.dims().total() {
        return Err(Error::InvalidInput("function dimension does not match the system".into()));
    }
    if s_grid.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("transform points must be finite".into()));
    }
    let s_max = s_grid.iter().fold(T::zero(), |m, s| m.max(s.abs()));
    let mesh = transform_mesh(sys, f, s_max);
    let fm = f.resample(mesh.clone());
    let scale = T::one() + fm.max_abs();
    let values = s_grid
        .par_iter()
        .map(|&s| {
            let (v, err) = transform_on_mesh(sys, &mesh, &fm, s)?;
            let tol = sys.tol.quad * scale * (T::one() + v.norm());
            if err > tol {
                return Err(Error::QuadratureFailure { estimate: to_f64(err), tol: to_f64(tol) });
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let provenance = format!("{}#{:016x}", sys.name.as_deref().unwrap_or("system"), sample_hash(f));
    Ok(TransformResult { s_grid: s_grid.to_vec(), values, provenance })
}

/// `f(t) = Σ_k Y₀(t, s_k) A_k g(s_k)` on `mesh`.
pub fn inverse_transform<T: Real>(sys: &SymmetricSystem<T>, sf: &SpectralFunction<T>, g: &SigmaElement<T>, mesh: &Mesh<T>) -> Result<GridFunction<T>> {
    if g.len() != sf.jumps.len() {
        return Err(Error::InvalidInput("element length does not match the support".into()));
    }
    let s_max = sf.jumps.iter().fold(T::zero(), |m, j| m.max(j.s.abs()));
    let mesh = align_mesh(sys, &sys.mesh_for(s_max).with_order(mesh.order().max(MESH_ORDER)).union(mesh));
    let n = sys.dims().total();
    let parts = sf
        .jumps
        .par_iter()
        .zip(g.par_iter())
        .map(|(j, gv)| {
            let coeff = &j.mass * gv;
            if coeff.iter().all(|z| z.re == T::zero() && z.im == T::zero()) {
                return Ok(vec![CVec::zeros(n); mesh.num_nodes()]);
            }
            let prop = propagate_on_mesh(sys, creal(j.s), mesh.clone())?;
            Ok(prop.node_values().iter().map(|y| y * &coeff).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![CVec::zeros(n); mesh.num_nodes()];
    for part in parts {
        for (acc, v) in values.iter_mut().zip(part) {
            *acc += v;
        }
    }
    GridFunction::from_values(mesh, values)
}

/// `f̂` on the support of a pure-jump Σ, as an element of `L²(Σ)`.
pub fn transform_on_support<T: Real>(sys: &SymmetricSystem<T>, sf: &SpectralFunction<T>, f: &GridFunction<T>) -> Result<SigmaElement<T>> {
    Ok(fourier_transform(sys, f, &sf.support())?.values)
}

/// `Σ_{m ≥ 0} (q + m)^{-p}` for `p > 1`, `q > 0` (Euler–Maclaurin after ten terms).
fn hurwitz_zeta(p: f64, q: f64) -> f64 {
    const N: usize = 10;
    let direct: f64 = (0..N).map(|m| (q + m as f64).powf(-p)).sum();
    let x = q + N as f64;
    let mut tail = x.powf(1.0 - p) / (p - 1.0) + 0.5 * x.powf(-p);
    // Bernoulli terms B_2/2!, B_4/4!, B_6/6!.
    let coeffs = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0];
    let mut rising = p;
    for (k, c) in coeffs.iter().enumerate() {
        tail += c * rising * x.powf(-p - (2 * k + 1) as f64);
        rising *= (p + (2 * k + 1) as f64) * (p + (2 * k + 2) as f64);
    }
    direct + tail
}

/// Power-law fit `w ≈ C |s|^{-p}` to the outer half of one side of the
/// support, summed over the continued lattice beyond the window.
#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub spacing: f64,
    pub sum: f64,
}

fn fit_tail(side: &[(f64, f64)]) -> Option<TailFit> {
    // side: (|s|, w) sorted by increasing |s|.
    if side.len() < 6 {
        return None;
    }
    let outer: Vec<(f64, f64)> = side[side.len() / 2..].iter().copied().filter(|p| p.1 > 0.0).collect();
    if outer.len() < 3 {
        return Some(TailFit { coefficient: 0.0, exponent: f64::INFINITY, spacing: 0.0, sum: 0.0 });
    }
    let k = outer.len() as f64;
    let lx: Vec<f64> = outer.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = outer.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let exponent = -slope;
    let coefficient = (my - slope * mx).exp();
    let gaps: Vec<f64> = side.windows(2).rev().take(5).map(|w| w[1].0 - w[0].0).collect();
    let spacing = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let last = side[side.len() - 1].0;
    let sum = if exponent > 1.0 && spacing > 0.0 {
        coefficient * spacing.powf(-exponent) * hurwitz_zeta(exponent, last / spacing + 1.0)
    } else {
        f64::INFINITY
    };
    Some(TailFit { coefficient, exponent, spacing, sum })
}

#[derive(Debug, Clone)]
pub struct DefectReport {
    pub truncation: f64,
    pub terms: usize,
    /// `‖f‖²_Δ`.
    pub norm_sq: f64,
    /// `Σ_{|s_k| ≤ S} (A_k f̂(s_k), f̂(s_k))`.
    pub truncated_sum: f64,
    /// `|truncated_sum - norm_sq|`.
    pub raw_defect: f64,
    pub tail_positive: Option<TailFit>,
    pub tail_negative: Option<TailFit>,
    /// Fitted mass beyond the window (both sides).
    pub tail_estimate: f64,
    /// `|truncated_sum + tail_estimate - norm_sq|`.
    pub corrected_defect: f64,
    /// `‖P₀ f‖²_Δ` after projecting off the given mul T_min basis.
    pub projected_norm_sq: Option<f64>,
    pub projected_defect: Option<f64>,
}

/// Parseval defect of `f` against a pure-jump Σ truncated to `|s| ≤ S`.
pub fn parseval_defect<T: Real>(
    sys: &SymmetricSystem<T>,
    sf: &SpectralFunction<T>,
    f: &GridFunction<T>,
    truncation: T,
    mul_basis: Option<&MulTminBasis<T>>,
) -> Result<DefectReport> {
    // Located eigenvalues carry rounding; keep one sitting on the cutoff.
    let cutoff = truncation * (T::one() + lit::<T>(1e-9));
    let jumps: Vec<_> = sf.jumps.iter().filter(|j| j.s.abs() <= cutoff).cloned().collect();
    let support: Vec<T> = jumps.iter().map(|j| j.s).collect();
    let fhat = fourier_transform(sys, f, &support)?.values;
    let terms: Vec<(f64, f64)> = jumps
        .iter()
        .zip(&fhat)
        .map(|(j, v)| (to_f64(j.s), to_f64(v.dotc(&(&j.mass * v)).re)))
        .collect();
    let truncated_sum: f64 = terms.iter().map(|t| t.1).sum();
    let norm_sq = to_f64(weighted_norm(sys, f)?).powi(2);

    let mut pos: Vec<(f64, f64)> = terms.iter().filter(|t| t.0 > 0.0).copied().collect();
    let mut neg: Vec<(f64, f64)> = terms.iter().filter(|t| t.0 < 0.0).map(|t| (-t.0, t.1)).collect();
    pos.sort_by(|a, b| a.0.total_cmp(&b.0));
    neg.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tail_positive = fit_tail(&pos);
    let tail_negative = fit_tail(&neg);
    let tail_estimate = tail_positive.map_or(0.0, |t| t.sum) + tail_negative.map_or(0.0, |t| t.sum);

    let (projected_norm_sq, projected_defect) = match mul_basis {
        Some(basis) if !basis.elements.is_empty() => {
            let p0 = basis.project_off(sys, f)?;
            let n = to_f64(weighted_norm(sys, &p0)?).powi(2);
            (Some(n), Some((truncated_sum - n).abs()))
        }
        _ => (None, None),
    };
    Ok(DefectReport {
        truncation: to_f64(truncation),
        terms: terms.len(),
        norm_sq,
        truncated_sum,
        raw_defect: (truncated_sum - norm_sq).abs(),
        tail_positive,
        tail_negative,
        tail_estimate,
        corrected_defect: (truncated_sum + tail_estimate - norm_sq).abs(),
        projected_norm_sq,
        projected_defect,
    })
}

/// One element `f` of mul T_min with the solution `y` that certifies it:
/// `J y' - B y = Δ f`, `Δ y = 0`, `y(a) = y(b) = 0`.
#[derive(Debug, Clone)]
pub struct MulElement<T: Real> {
    pub f: GridFunction<T>,
    pub y: GridFunction<T>,
    pub y_a: CVec<T>,
    pub y_b: CVec<T>,
    /// Largest `|J y' - B y - Δ f|` at the nodes.
    pub equation_residual: T,
    /// Largest `|Δ y|` at the nodes.
    pub kernel_residual: T,
}

#[derive(Debug, Clone)]
pub struct MulTminBasis<T: Real> {
    pub elements: Vec<MulElement<T>>,
}

impl<T: Real> MulTminBasis<T> {
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `f - Σ_j (f, e_j)_Δ e_j`.
    pub fn project_off(&self, sys: &SymmetricSystem<T>, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        let mut out = f.clone();
        for e in &self.elements {
            let c = weighted_inner_product(sys, &out, &e.f)?;
            out = out.add_scaled(-c, &e.f);
        }
        Ok(out)
    }
}

const KERNEL_SAMPLES: usize = 7;

/// Constant kernel of `Δ` on segment `seg`, if any.
fn piece_kernel<T: Real>(sys: &SymmetricSystem<T>, seg: usize) -> Result<Option<CMat<T>>> {
    let s = &sys.segments()[seg];
    let ts: Vec<T> = (0..KERNEL_SAMPLES)
        .map(|i| s.start + (s.end - s.start) * lit((i as f64 + 1.0) / (KERNEL_SAMPLES as f64 + 1.0)))
        .collect();
    let kernels: Vec<CMat<T>> = ts.iter().map(|&t| delta_kernel(sys, seg, t)).collect();
    let k0 = &kernels[0];
    if k0.ncols() == 0 {
        if kernels.iter().any(|k| k.ncols() != 0) {
            return Err(Error::UnsupportedWeightStructure(format!("weight kernel changes dimension inside [{}, {}]", to_f64(s.start), to_f64(s.end))));
        }
        return Ok(None);
    }
    let p0 = k0 * k0.adjoint();
    for k in &kernels[1..] {
        if k.ncols() != k0.ncols() || max_abs_diff(&(k * k.adjoint()), &p0) > lit(1e-8) {
            return Err(Error::UnsupportedWeightStructure(format!("weight kernel varies inside [{}, {}]", to_f64(s.start), to_f64(s.end))));
        }
    }
    Ok(Some(k0.clone()))
}

/// Up to `n_max` Δ-orthonormal elements of mul T_min, built on the pieces
/// where `Δ` has a constant kernel `K`: `y = K ζ sin(jπ(t - c)/(d - c))`
/// with `K*JK ζ = 0` and `K*B(t)K ζ = 0`, and `f = Δ⁺(J y' - B y)`.
pub fn mul_tmin_basis<T: Real>(sys: &SymmetricSystem<T>, n_max: usize) -> Result<MulTminBasis<T>> {
    let n = sys.dims().total();
    let j = sys.structure().clone();
    let mut pieces: Vec<(usize, CVec<T>)> = Vec::new();
    for seg in 0..sys.segments().len() {
        let Some(k) = piece_kernel(sys, seg)? else { continue };
        let s = &sys.segments()[seg];
        let m = k.ncols();
        let mut rows = vec![k.adjoint() * &j * &k];
        for i in 0..KERNEL_SAMPLES {
            let t = s.start + (s.end - s.start) * lit(i as f64 / (KERNEL_SAMPLES as f64 - 1.0));
            rows.push(k.adjoint() * s.coeff_b.eval_real(t) * &k);
        }
        let mut stacked = CMat::zeros(m * rows.len(), m);
        for (i, r) in rows.iter().enumerate() {
            stacked.view_mut((i * m, 0), (m, m)).copy_from(r);
        }
        let z = null_space(&stacked, lit(1e-10));
        if z.ncols() == 0 {
            continue;
        }
        let dirs = &k * z;
        for c in 0..dirs.ncols() {
            pieces.push((seg, dirs.column(c).into_owned()));
        }
    }
    let mut elements: Vec<MulElement<T>> = Vec::new();
    if pieces.is_empty() || n_max == 0 {
        return Ok(MulTminBasis { elements });
    }
    let mut mode = 1usize;
    while elements.len() < n_max {
        for (seg, dir) in &pieces {
            if elements.len() >= n_max {
                break;
            }
            let (c, d) = {
                let s = &sys.segments()[*seg];
                (s.start, s.end)
            };
            let len = d - c;
            let width = (len / lit(4.0 * mode as f64)).min(lit(0.25));
            let mesh = align_mesh(sys, &Mesh::new(&[sys.a(), sys.b()], width, MESH_ORDER)?);
            let freq = lit::<T>(mode as f64) * pi::<T>() / len;
            let inside = |p: usize| {
                let (l, r) = mesh.panel_bounds(p);
                let mid = (l + r) * lit(0.5);
                mid > c && mid < d
            };
            let y = GridFunction::sample_by_panel(mesh.clone(), |p, t| {
                if inside(p) {
                    dir * creal((freq * (t - c)).sin())
                } else {
                    CVec::zeros(n)
                }
            });
            let segment = &sys.segments()[*seg];
            let f = GridFunction::sample_by_panel(mesh.clone(), |p, t| {
                if !inside(p) {
                    return CVec::zeros(n);
                }
                let yv = dir * creal((freq * (t - c)).sin());
                let dy = dir * creal(freq * (freq * (t - c)).cos());
                let rhs = &j * dy - segment.coeff_b.eval_real(t) * yv;
                let pinv = segment.delta.eval_real(t).pseudo_inverse(lit(1e-12)).expect("pseudo-inverse");
                pinv * rhs
            });
            // Certificates on the node grid.
            let dy = y.derivative_at_nodes();
            let mut eq = T::zero();
            let mut ker = T::zero();
            for (i, &t) in mesh.nodes().iter().enumerate() {
                let dl = sys.delta_at(t);
                let r = &j * &dy[i] - sys.b_at(t) * &y.values()[i] - &dl * &f.values()[i];
                eq = eq.max(r.camax());
                ker = ker.max((&dl * &y.values()[i]).camax());
            }
            let scale = T::one() + f.max_abs();
            if eq > sys.tol.member * scale {
                return Err(Error::NotInMaximalRelation { residual: to_f64(eq / scale) });
            }
            // Δ-orthonormalise against the elements so far (two passes),
            // carrying the same combination over to y.
            let mut g = f.clone();
            let mut yc = y.clone();
            for _ in 0..2 {
                for e in &elements {
                    let coef = weighted_inner_product(sys, &g, &e.f)?;
                    g = g.add_scaled(-coef, &e.f);
                    yc = yc.add_scaled(-coef, &e.y);
                }
            }
            let nrm = weighted_norm(sys, &g)?;
            if nrm <= lit::<T>(1e-8) * weighted_norm(sys, &f)? {
                continue;
            }
            let inv = creal(T::one() / nrm);
            let fs = g.scale(inv).with_tag(format!("mul[{}]", elements.len()));
            let ys = yc.scale(inv);
            elements.push(MulElement {
                y_a: ys.left_end(),
                y_b: ys.right_end(),
                f: fs,
                y: ys,
                equation_residual: eq,
                kernel_residual: ker,
            });
        }
        mode += 1;
        if mode > 64 * n_max.max(1) {
            break;
        }
    }
    Ok(MulTminBasis { elements })
}

#[derive(Debug, Clone)]
pub struct IsometryReport {
    /// `‖f̂‖_Σ` for each normalised mul T_min element.
    pub mul_images: Vec<f64>,
    pub complement: Vec<DefectReport>,
    pub max_mul_image: f64,
    /// Largest raw truncated defect over the test set.
    pub max_complement_raw: f64,
    /// Largest tail-corrected defect; this one decides the verdict.
    pub max_complement_defect: f64,
    pub verdict: String,
}

pub const VERDICT_SPECTRAL: &str = "spectral behavior confirmed";
pub const VERDICT_PSEUDOSPECTRAL: &str = "pseudospectral behavior confirmed";
pub const VERDICT_INCONCLUSIVE: &str = "inconclusive";
pub const VERDICT_EMPTY: &str = "no test functions";

/// Checks that Σ kills mul T_min and is isometric on the test functions
/// (after projecting them off the mul T_min basis).
pub fn isometry_report<T: Real>(
    sys: &SymmetricSystem<T>,
    sf: &SpectralFunction<T>,
    test_set: &[GridFunction<T>],
    mul_basis: &MulTminBasis<T>,
    truncation: T,
    image_tol: f64,
    defect_tol: f64,
) -> Result<IsometryReport> {
    if test_set.is_empty() && mul_basis.is_empty() {
        return Ok(IsometryReport {
            mul_images: Vec::new(),
            complement: Vec::new(),
            max_mul_image: 0.0,
            max_complement_raw: 0.0,
            max_complement_defect: 0.0,
            verdict: VERDICT_EMPTY.into(),
        });
    }
    let l2 = DiscreteL2Sigma::from_spectral_function(sf, true);
    let mul_images = mul_basis
        .elements
        .iter()
        .map(|e| Ok(to_f64(l2.norm(&transform_on_support(sys, sf, &e.f)?))))
        .collect::<Result<Vec<f64>>>()?;
    let complement = test_set
        .iter()
        .map(|f| {
            let p0 = if mul_basis.is_empty() { f.clone() } else { mul_basis.project_off(sys, f)? };
            parseval_defect(sys, sf, &p0, truncation, None)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_mul_image = mul_images.iter().fold(0.0f64, |a, &b| a.max(b));
    let max_complement_raw = complement.iter().fold(0.0f64, |a, d| a.max(d.raw_defect));
    let max_complement_defect = complement.iter().fold(0.0f64, |a, d| a.max(d.corrected_defect));
    let isometric = max_complement_defect <= defect_tol;
    let verdict = if !isometric || max_mul_image > image_tol {
        VERDICT_INCONCLUSIVE
    } else if mul_basis.is_empty() {
        VERDICT_SPECTRAL
    } else {
        VERDICT_PSEUDOSPECTRAL
    };
    Ok(IsometryReport { mul_images, complement, max_mul_image, max_complement_raw, max_complement_defect, verdict: verdict.into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockDims;
    use crate::boundary::BoundaryPair;
    use crate::poly::{MatrixPoly, PiecewiseMatrixPoly};
    use crate::scalar::cplx;
    use crate::spectral::{build_spectral_function, default_eps_seq};
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

    fn deg1() -> SymmetricSystem<f64> {
        let d0 = CMat::from_diagonal(&CVec::from_vec(vec![creal(0.0), creal(1.0)]));
        SymmetricSystem::new(
            BlockDims::new(1, 0).unwrap(),
            (0.0, 2.0),
            PiecewiseMatrixPoly::constant(0.0, 2.0, CMat::zeros(2, 2)),
            PiecewiseMatrixPoly::new(vec![0.0, 1.0, 2.0], vec![MatrixPoly::constant(d0), MatrixPoly::constant(CMat::identity(2, 2))], 6).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn hurwitz_matches_basel() {
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-10);
        assert!((hurwitz_zeta(2.0, 0.5) - PI * PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn transform_of_constant() {
        let sys = free1();
        let f = GridFunction::sample(sys.mesh_for(1.0), |_| CVec::from_vec(vec![creal(1.0), creal(0.0)]));
        let out = fourier_transform(&sys, &f, &[0.5, 1.0, 2.5]).unwrap();
        // Y₀(t,s)* e₁ = (cos st, sin st).
        for (s, v) in out.s_grid.iter().zip(&out.values) {
            let want0 = (s * PI).sin() / s;
            let want1 = (1.0 - (s * PI).cos()) / s;
            assert!((v[0] - creal(want0)).norm() < 1e-10);
            assert!((v[1] - creal(want1)).norm() < 1e-10);
        }
    }

    #[test]
    fn free_parseval_with_tail() {
        let sys = free1();
        let sf = build_spectral_function(&sys, &BoundaryPair::zeroth(2), (-50.6, 50.6), &default_eps_seq()).unwrap();
        let f = GridFunction::sample(sys.mesh_for(1.0), |_| CVec::from_vec(vec![creal(1.0), creal(0.0)]));
        let rep = parseval_defect(&sys, &sf, &f, 50.5, None).unwrap();
        assert!(rep.raw_defect > 1e-2);
        assert!(rep.corrected_defect < 1e-4, "{rep:?}");
    }

    #[test]
    fn deg1_mul_part() {
        let sys = deg1();
        let basis = mul_tmin_basis(&sys, 3).unwrap();
        assert_eq!(basis.elements.len(), 3);
        for (i, a) in basis.elements.iter().enumerate() {
            assert!(a.equation_residual < 1e-8 && a.kernel_residual < 1e-12);
            assert!(a.y_a.norm() < 1e-12 && a.y_b.norm() < 1e-12);
            for (k, b) in basis.elements.iter().enumerate() {
                let ip = weighted_inner_product(&sys, &a.f, &b.f).unwrap();
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((ip - creal(want)).norm() < 1e-9);
            }
            let grid: Vec<f64> = (0..=20).map(|k| -100.0 + 10.0 * k as f64).collect();
            let fh = fourier_transform(&sys, &a.f, &grid).unwrap();
            assert!(fh.values.iter().all(|v| v.camax() < 1e-8));
        }
        assert!(mul_tmin_basis(&free1(), 3).unwrap().is_empty());
    }

    #[test]
    fn inverse_of_single_jump() {
        let sys = free1();
        let mass = CMat::from_row_slice(2, 2, &[creal(1.0 / PI), creal(0.0), creal(0.0), creal(0.0)]);
        let sf = SpectralFunction { dim: 2, window: (0.0, 1.0), jumps: vec![crate::spectral::Jump { s: 0.5, mass }], increments: vec![], possible_continuous: false };
        let g = vec![CVec::from_vec(vec![creal(1.0), creal(0.0)])];
        let mesh = sys.mesh_for(1.0);
        let f = inverse_transform(&sys, &sf, &g, &mesh).unwrap();
        for &t in &[0.0, 1.0, 2.5] {
            let v = f.eval(t);
            assert!((v[0] - creal((0.5 * t).cos() / PI)).norm() < 1e-9);
            assert!((v[1] - cplx(-(0.5 * t).sin() / PI, 0.0)).norm() < 1e-9);
        }
    }
}
