//! JSON input files for systems, boundary pairs and input functions.
//!
//! Matrices are written row-major as `{"re": [[..]], "im": [[..]]}` with
//! `im` optional; polynomials are lists of coefficient matrices in
//! increasing degree. Unknown fields are rejected.
//!
//! System file:
//! ```json
//! {
//!   "name": "FREE1",
//!   "dims": {"h": 1, "hhat": 0},
//!   "interval": [0.0, 3.141592653589793],
//!   "b": {"breakpoints": [0.0, 3.141592653589793], "pieces": [[{"re": [[0, 0], [0, 0]]}]]},
//!   "delta": {"breakpoints": [0.0, 3.141592653589793], "pieces": [[{"re": [[1, 0], [0, 1]]}]]},
//!   "tolerances": {"quad": 1e-10}
//! }
//! ```
//!
//! Boundary pair file: `{"kind": "constant", "c0": [M], "c1": [M]}` or
//! `"kind": "poly"` with longer lists (powers of `λ`).
//!
//! Input function file: `{"breakpoints": [...], "pieces": [[v0, v1, ...], ...]}`
//! where each `v` is `{"re": [..], "im": [..]}` and piece `k` is
//! `Σ_j v_j t^j` on `[breakpoints[k], breakpoints[k+1])`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::block::BlockDims;
use crate::boundary::{BoundaryPair, PairKind};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::poly::{MatrixPoly, PiecewiseMatrixPoly, DEFAULT_MAX_DEGREE};
use crate::propagator::align_mesh;
use crate::scalar::{cplx, lit, to_f64, CMat, CVec, Real};
use crate::system::{SymmetricSystem, Tolerances, MESH_ORDER};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VectorSpec {
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseSpec {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<Vec<MatrixSpec>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DimsSpec {
    pub h: usize,
    pub hhat: usize,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub sym: Option<f64>,
    pub psd: Option<f64>,
    pub quad: Option<f64>,
    pub ode: Option<f64>,
    pub eig: Option<f64>,
    pub adm: Option<f64>,
    pub jump_psd: Option<f64>,
    pub nullity: Option<f64>,
    pub weyl_cond: Option<f64>,
    pub bvp_cond: Option<f64>,
    pub member: Option<f64>,
}

impl ToleranceSpec {
    /// Field names accepted by [`ToleranceSpec::set`].
    pub const NAMES: [&'static str; 11] = ["sym", "psd", "quad", "ode", "eig", "adm", "jump_psd", "nullity", "weyl_cond", "bvp_cond", "member"];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "sym" => &mut self.sym,
            "psd" => &mut self.psd,
            "quad" => &mut self.quad,
            "ode" => &mut self.ode,
            "eig" => &mut self.eig,
            "adm" => &mut self.adm,
            "jump_psd" => &mut self.jump_psd,
            "nullity" => &mut self.nullity,
            "weyl_cond" => &mut self.weyl_cond,
            "bvp_cond" => &mut self.bvp_cond,
            "member" => &mut self.member,
            _ => return Err(Error::InvalidInput(format!("unknown tolerance {name:?}"))),
        };
        *slot = Some(value);
        Ok(())
    }

    /// Overrides `base` with every value given here (each must be positive).
    pub fn apply<T: Real>(&self, base: Tolerances<T>) -> Result<Tolerances<T>> {
        let pick = |name: &str, v: Option<f64>, d: T| -> Result<T> {
            match v {
                Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::InvalidInput(format!("tolerance {name} must be positive, got {x}"))),
                Some(x) => Ok(lit(x)),
                None => Ok(d),
            }
        };
        Ok(Tolerances {
            sym: pick("sym", self.sym, base.sym)?,
            psd: pick("psd", self.psd, base.psd)?,
            quad: pick("quad", self.quad, base.quad)?,
            ode: pick("ode", self.ode, base.ode)?,
            eig: pick("eig", self.eig, base.eig)?,
            adm: pick("adm", self.adm, base.adm)?,
            jump_psd: pick("jump_psd", self.jump_psd, base.jump_psd)?,
            nullity: pick("nullity", self.nullity, base.nullity)?,
            weyl_cond: pick("weyl_cond", self.weyl_cond, base.weyl_cond)?,
            bvp_cond: pick("bvp_cond", self.bvp_cond, base.bvp_cond)?,
            member: pick("member", self.member, base.member)?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dims: DimsSpec,
    pub interval: [f64; 2],
    pub b: PiecewiseSpec,
    pub delta: PiecewiseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum PairKindSpec {
    Constant,
    Poly,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub kind: PairKindSpec,
    pub c0: Vec<MatrixSpec>,
    pub c1: Vec<MatrixSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<Vec<VectorSpec>>,
}

/// Parses JSON, reporting the offending field path and position.
pub fn parse_json<S: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<S> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse(format!("{what}: field `{path}`: {inner}"))
    })
}

pub fn read_json<S: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<S> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{what}: cannot read {}: {e}", path.display())))?;
    parse_json(&text, &format!("{what} {}", path.display()))
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("field `{field}`: {msg}"))
}

impl MatrixSpec {
    pub fn to_matrix<T: Real>(&self, field: &str) -> Result<CMat<T>> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(field_err(field, "empty matrix"));
        }
        if self.re.iter().any(|r| r.len() != cols) {
            return Err(field_err(&format!("{field}.re"), "ragged rows"));
        }
        if let Some(im) = &self.im {
            if im.len() != rows || im.iter().any(|r| r.len() != cols) {
                return Err(field_err(&format!("{field}.im"), format!("shape must match re ({rows}x{cols})")));
            }
        }
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let re = self.re[i][j];
                let im = self.im.as_ref().map_or(0.0, |im| im[i][j]);
                if !re.is_finite() || !im.is_finite() {
                    return Err(field_err(field, format!("entry ({i},{j}) is not finite")));
                }
                m[(i, j)] = cplx(lit(re), lit(im));
            }
        }
        Ok(m)
    }

    pub fn from_matrix<T: Real>(m: &CMat<T>) -> Self {
        let re = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| to_f64(m[(i, j)].re)).collect()).collect();
        let any_im = m.iter().any(|z| z.im != T::zero());
        let im = any_im.then(|| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| to_f64(m[(i, j)].im)).collect()).collect());
        MatrixSpec { re, im }
    }
}

impl VectorSpec {
    pub fn to_vector<T: Real>(&self, field: &str) -> Result<CVec<T>> {
        if let Some(im) = &self.im {
            if im.len() != self.re.len() {
                return Err(field_err(&format!("{field}.im"), "length must match re"));
            }
        }
        let mut v = CVec::zeros(self.re.len());
        for (i, &re) in self.re.iter().enumerate() {
            let im = self.im.as_ref().map_or(0.0, |im| im[i]);
            if !re.is_finite() || !im.is_finite() {
                return Err(field_err(field, format!("entry {i} is not finite")));
            }
            v[i] = cplx(lit(re), lit(im));
        }
        Ok(v)
    }
}

fn matrix_poly<T: Real>(coeffs: &[MatrixSpec], field: &str) -> Result<MatrixPoly<T>> {
    if coeffs.is_empty() {
        return Err(field_err(field, "polynomial needs at least one coefficient"));
    }
    let mats = coeffs.iter().enumerate().map(|(k, c)| c.to_matrix(&format!("{field}[{k}]"))).collect::<Result<Vec<_>>>()?;
    MatrixPoly::new(mats).map_err(|e| field_err(field, e))
}

impl PiecewiseSpec {
    pub fn to_poly<T: Real>(&self, field: &str) -> Result<PiecewiseMatrixPoly<T>> {
        if self.pieces.len() + 1 != self.breakpoints.len() {
            return Err(field_err(field, format!("{} breakpoints need {} pieces, got {}", self.breakpoints.len(), self.breakpoints.len().saturating_sub(1), self.pieces.len())));
        }
        let pieces = self.pieces.iter().enumerate().map(|(k, p)| matrix_poly(p, &format!("{field}.pieces[{k}]"))).collect::<Result<Vec<_>>>()?;
        PiecewiseMatrixPoly::new(self.breakpoints.iter().map(|&x| lit(x)).collect(), pieces, DEFAULT_MAX_DEGREE).map_err(|e| field_err(field, e))
    }

    pub fn from_poly<T: Real>(p: &PiecewiseMatrixPoly<T>) -> Self {
        PiecewiseSpec {
            breakpoints: p.breaks().iter().map(|&x| to_f64(x)).collect(),
            pieces: p.pieces().iter().map(|q| q.coeffs().iter().map(MatrixSpec::from_matrix).collect()).collect(),
        }
    }
}

impl SystemSpec {
    pub fn build<T: Real>(&self) -> Result<SymmetricSystem<T>> {
        let dims = BlockDims::new(self.dims.h, self.dims.hhat).map_err(|e| field_err("dims", e))?;
        let [a, b] = self.interval;
        let sys = SymmetricSystem::new(dims, (lit(a), lit(b)), self.b.to_poly("b")?, self.delta.to_poly("delta")?)?;
        let sys = match &self.tolerances {
            Some(t) => {
                let tol = t.apply(sys.tol)?;
                sys.with_tolerances(tol)
            }
            None => sys,
        };
        Ok(match &self.name {
            Some(n) => sys.with_name(n.clone()),
            None => sys,
        })
    }

    pub fn from_system<T: Real>(sys: &SymmetricSystem<T>) -> Self {
        let d = sys.dims();
        SystemSpec {
            name: sys.name.clone(),
            dims: DimsSpec { h: d.h, hhat: d.hhat },
            interval: [to_f64(sys.a()), to_f64(sys.b())],
            b: PiecewiseSpec::from_poly(sys.coeff_b()),
            delta: PiecewiseSpec::from_poly(sys.coeff_delta()),
            tolerances: None,
        }
    }
}

impl PairSpec {
    pub fn build<T: Real>(&self) -> Result<BoundaryPair<T>> {
        let c0 = matrix_poly(&self.c0, "c0")?;
        let c1 = matrix_poly(&self.c1, "c1")?;
        if self.kind == PairKindSpec::Constant && (self.c0.len() != 1 || self.c1.len() != 1) {
            return Err(field_err("kind", "a constant pair takes exactly one matrix for c0 and c1"));
        }
        let pair = BoundaryPair::polynomial(c0, c1).map_err(|e| field_err("c0", e))?;
        Ok(pair)
    }

    pub fn from_pair<T: Real>(pair: &BoundaryPair<T>) -> Self {
        PairSpec {
            kind: match pair.kind {
                PairKind::Constant => PairKindSpec::Constant,
                PairKind::Polynomial => PairKindSpec::Poly,
            },
            c0: pair.c0.coeffs().iter().map(MatrixSpec::from_matrix).collect(),
            c1: pair.c1.coeffs().iter().map(MatrixSpec::from_matrix).collect(),
        }
    }
}

impl FunctionSpec {
    /// Samples the piecewise polynomial on the system mesh refined by the
    /// function's own breakpoints.
    pub fn build<T: Real>(&self, sys: &SymmetricSystem<T>) -> Result<GridFunction<T>> {
        let n = sys.dims().total();
        if self.pieces.len() + 1 != self.breakpoints.len() {
            return Err(field_err("pieces", "need one piece per breakpoint interval"));
        }
        if self.breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(field_err("breakpoints", "must be strictly increasing"));
        }
        let (a, b) = (to_f64(sys.a()), to_f64(sys.b()));
        let span = 1e-12 * (b - a).abs().max(1.0);
        if (self.breakpoints[0] - a).abs() > span || (self.breakpoints[self.breakpoints.len() - 1] - b).abs() > span {
            return Err(field_err("breakpoints", format!("must cover the system interval [{a}, {b}]")));
        }
        let mut pieces: Vec<Vec<CVec<T>>> = Vec::with_capacity(self.pieces.len());
        let mut degree = 0;
        for (k, p) in self.pieces.iter().enumerate() {
            if p.is_empty() {
                return Err(field_err(&format!("pieces[{k}]"), "needs at least one coefficient"));
            }
            degree = degree.max(p.len() - 1);
            let vs = p.iter().enumerate().map(|(j, v)| v.to_vector(&format!("pieces[{k}][{j}]"))).collect::<Result<Vec<CVec<T>>>>()?;
            if vs.iter().any(|v| v.len() != n) {
                return Err(field_err(&format!("pieces[{k}]"), format!("vectors must have length {n}")));
            }
            pieces.push(vs);
        }
        let breaks: Vec<T> = self.breakpoints.iter().map(|&x| lit(x)).collect();
        let inner: Vec<T> = breaks[1..breaks.len() - 1].to_vec();
        let order = MESH_ORDER.max(degree + 2);
        let mesh = align_mesh(sys, &sys.mesh_for(T::one()).with_extra_breaks(&inner).with_order(order));
        let mid = |p: usize| {
            let (l, r) = mesh.panel_bounds(p);
            (l + r) * lit(0.5)
        };
        let piece_of = |t: T| breaks[1..].iter().position(|&x| t < x).unwrap_or(breaks.len() - 2);
        Ok(GridFunction::sample_by_panel(mesh.clone(), |p, t| {
            let coeffs = &pieces[piece_of(mid(p))];
            // Horner in t.
            let mut acc = coeffs[coeffs.len() - 1].clone();
            for c in coeffs.iter().rev().skip(1) {
                acc = acc * cplx(t, T::zero()) + c;
            }
            acc
        }))
    }
}

pub fn load_system<T: Real>(path: &Path) -> Result<SymmetricSystem<T>> {
    read_json::<SystemSpec>(path, "system file")?.build()
}

pub fn load_pair<T: Real>(path: &Path) -> Result<BoundaryPair<T>> {
    read_json::<PairSpec>(path, "boundary pair file")?.build()
}

pub fn load_function<T: Real>(path: &Path, sys: &SymmetricSystem<T>) -> Result<GridFunction<T>> {
    read_json::<FunctionSpec>(path, "function file")?.build(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{deg1, free1};

    #[test]
    fn system_round_trip() {
        for sys in [free1::<f64>(), deg1()] {
            let spec = SystemSpec::from_system(&sys);
            let text = serde_json::to_string_pretty(&spec).unwrap();
            let back: SystemSpec = parse_json(&text, "system").unwrap();
            assert_eq!(back, spec);
            let rebuilt: SymmetricSystem<f64> = back.build().unwrap();
            assert_eq!(rebuilt.breaks(), sys.breaks());
            assert_eq!(rebuilt.delta_at(0.5), sys.delta_at(0.5));
        }
    }

    #[test]
    fn unknown_field_is_rejected_with_path() {
        let text = r#"{"kind": "constant", "c0": [{"re": [[1]], "imag": [[0]]}], "c1": [{"re": [[0]]}]}"#;
        let err = parse_json::<PairSpec>(text, "pair").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("c0[0]") && msg.contains("imag"), "{msg}");
        assert!(err.is_validation());
    }

    #[test]
    fn constant_pair_needs_single_coefficients() {
        let m = MatrixSpec { re: vec![vec![1.0, 0.0], vec![0.0, 1.0]], im: None };
        let spec = PairSpec { kind: PairKindSpec::Constant, c0: vec![m.clone(), m.clone()], c1: vec![m] };
        assert!(spec.build::<f64>().is_err());
    }

    #[test]
    fn function_sampling() {
        let sys = deg1::<f64>();
        let spec = FunctionSpec {
            breakpoints: vec![0.0, 1.0, 2.0],
            pieces: vec![
                vec![VectorSpec { re: vec![0.0, 1.0], im: None }],
                vec![VectorSpec { re: vec![1.0, 0.0], im: None }, VectorSpec { re: vec![0.0, 1.0], im: Some(vec![0.0, 0.5]) }],
            ],
        };
        let f = spec.build(&sys).unwrap();
        let v = f.eval(0.5);
        assert!((v[1].re - 1.0).abs() < 1e-14 && v[0].norm() < 1e-14);
        let v = f.eval(1.5);
        assert!((v[0].re - 1.0).abs() < 1e-12 && (v[1] - cplx(1.5, 0.75)).norm() < 1e-12);
    }
}
