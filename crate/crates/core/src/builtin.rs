//! Built-in example systems with closed-form reference data.
//!
//! * `FREE1`: dims (1,0) on `[0, π]`, `B = 0`, `Δ = I₂`.
//! * `DEG1`: dims (1,0) on `[0, 2]`, `B = 0`, `Δ = diag(0, 1)` on `[0, 1)` and `I₂` on `[1, 2]`.
//! * `SMOKE3`: dims (1,1) on `[0, 1]`, `B = 0`, `Δ = I₃`.
//! * `POT1`: dims (1,0) on `[0, 1]` with a polynomial potential and a
//!   non-diagonal weight; no closed form, used by the identity checks.

use nalgebra::{Complex, ComplexField};

use crate::block::BlockDims;
use crate::boundary::brent_root;
use crate::error::{Error, Result};
use crate::poly::{MatrixPoly, PiecewiseMatrixPoly, DEFAULT_MAX_DEGREE};
use crate::scalar::{cplx, creal, lit, pi, CMat, Real};
use crate::system::SymmetricSystem;

pub const BUILTIN_NAMES: [&str; 4] = ["FREE1", "DEG1", "SMOKE3", "POT1"];

fn zero_free<T: Real>(dims: BlockDims, b: T) -> SymmetricSystem<T> {
    let n = dims.total();
    SymmetricSystem::new(
        dims,
        (T::zero(), b),
        PiecewiseMatrixPoly::constant(T::zero(), b, CMat::zeros(n, n)),
        PiecewiseMatrixPoly::constant(T::zero(), b, CMat::identity(n, n)),
    )
    .expect("free system is well formed")
}

pub fn free1<T: Real>() -> SymmetricSystem<T> {
    zero_free(BlockDims::new(1, 0).expect("h > 0"), pi::<T>()).with_name("FREE1")
}

pub fn deg1<T: Real>() -> SymmetricSystem<T> {
    let two = lit::<T>(2.0);
    let mut d0 = CMat::zeros(2, 2);
    d0[(1, 1)] = creal(T::one());
    SymmetricSystem::new(
        BlockDims::new(1, 0).expect("h > 0"),
        (T::zero(), two),
        PiecewiseMatrixPoly::constant(T::zero(), two, CMat::zeros(2, 2)),
        PiecewiseMatrixPoly::new(
            vec![T::zero(), T::one(), two],
            vec![MatrixPoly::constant(d0), MatrixPoly::constant(CMat::identity(2, 2))],
            DEFAULT_MAX_DEGREE,
        )
        .expect("two constant pieces"),
    )
    .expect("DEG1 is well formed")
    .with_name("DEG1")
}

pub fn smoke3<T: Real>() -> SymmetricSystem<T> {
    zero_free(BlockDims::new(1, 1).expect("h > 0"), T::one()).with_name("SMOKE3")
}

pub fn pot1<T: Real>() -> SymmetricSystem<T> {
    let c = |re: f64, im: f64| cplx(lit::<T>(re), lit::<T>(im));
    let b0 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, -0.5), c(0.5, 0.5), c(0.0, 0.0)]);
    let b1 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let b2 = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let d0 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0)]);
    let d1 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    SymmetricSystem::new(
        BlockDims::new(1, 0).expect("h > 0"),
        (T::zero(), T::one()),
        PiecewiseMatrixPoly::new(vec![T::zero(), T::one()], vec![MatrixPoly::new(vec![b0, b1, b2]).expect("square")], DEFAULT_MAX_DEGREE)
            .expect("one piece"),
        PiecewiseMatrixPoly::new(vec![T::zero(), T::one()], vec![MatrixPoly::new(vec![d0, d1]).expect("square")], DEFAULT_MAX_DEGREE)
            .expect("one piece"),
    )
    .expect("POT1 is well formed")
    .with_name("POT1")
}

/// Looks up a built-in system by name (case-insensitive).
pub fn builtin<T: Real>(name: &str) -> Result<SymmetricSystem<T>> {
    match name.to_ascii_uppercase().as_str() {
        "FREE1" => Ok(free1()),
        "DEG1" => Ok(deg1()),
        "SMOKE3" => Ok(smoke3()),
        "POT1" => Ok(pot1()),
        other => Err(Error::InvalidInput(format!("unknown built-in system {other:?} (expected one of {})", BUILTIN_NAMES.join(", ")))),
    }
}

/// Closed-form reference values.
pub mod reference {
    use super::*;

    fn rotation<T: Real>(x: Complex<T>) -> CMat<T> {
        let (s, c) = (x.sin(), x.cos());
        CMat::from_row_slice(2, 2, &[c, s, -s, c])
    }

    /// FREE1 fundamental solution: rotation by `λt`.
    pub fn free1_fundamental<T: Real>(t: T, lambda: Complex<T>) -> CMat<T> {
        rotation(lambda * t)
    }

    /// FREE1 Weyl function `[[tan πλ, sec πλ], [sec πλ, tan πλ]]`.
    pub fn free1_weyl<T: Real>(lambda: Complex<T>) -> CMat<T> {
        let x = lambda * pi::<T>();
        let (t, s) = (x.tan(), creal::<T>(T::one()) / x.cos());
        CMat::from_row_slice(2, 2, &[t, s, s, t])
    }

    /// FREE1 eigenvalues in `[lo, hi]` for `τ = (I, 0)`: the half-integers.
    pub fn free1_dirichlet_eigenvalues(lo: f64, hi: f64) -> Vec<f64> {
        let first = (lo - 0.5).ceil() as i64;
        let last = (hi - 0.5).floor() as i64;
        (first..=last).map(|k| k as f64 + 0.5).collect()
    }

    /// FREE1 eigenvalues in `[lo, hi]` for `τ = (diag(1,0), diag(0,1))`: the integers.
    pub fn free1_mixed_eigenvalues(lo: f64, hi: f64) -> Vec<f64> {
        (lo.ceil() as i64..=hi.floor() as i64).map(|k| k as f64).collect()
    }

    /// Jump of Σ at every FREE1 eigenvalue for both pairs above: `e₁e₁*/π`.
    pub fn free1_jump<T: Real>() -> CMat<T> {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = creal(T::one() / pi::<T>());
        m
    }

    /// DEG1 fundamental solution on `[0, 1]`: `[[1, λt], [0, 1]]`.
    pub fn deg1_fundamental_first_piece<T: Real>(t: T, lambda: Complex<T>) -> CMat<T> {
        let one = creal(T::one());
        let zero = creal(T::zero());
        CMat::from_row_slice(2, 2, &[one, lambda * t, zero, one])
    }

    /// DEG1 fundamental solution on the whole interval.
    pub fn deg1_fundamental<T: Real>(t: T, lambda: Complex<T>) -> CMat<T> {
        if t <= T::one() {
            deg1_fundamental_first_piece(t, lambda)
        } else {
            rotation(lambda * (t - T::one())) * deg1_fundamental_first_piece(T::one(), lambda)
        }
    }

    /// DEG1 eigenvalues in `[lo, hi]` for `τ = (0, I)`: roots of `s tan s = 1`,
    /// one in each `(kπ, kπ + π/2)` and its mirror image.
    pub fn deg1_first_pair_eigenvalues(lo: f64, hi: f64) -> Vec<f64> {
        let g = |s: f64| Ok(s * s.sin() - s.cos());
        let reach = lo.abs().max(hi.abs());
        let mut pos = Vec::new();
        let mut k = 0.0;
        while k * std::f64::consts::PI <= reach {
            let a = k * std::f64::consts::PI;
            let b = a + std::f64::consts::FRAC_PI_2;
            if let Ok(r) = brent_root(g, a, b, 1e-15, 200) {
                pos.push(r);
            }
            k += 1.0;
        }
        let mut all: Vec<f64> = pos.iter().map(|s| -s).chain(pos.iter().copied()).filter(|s| *s >= lo && *s <= hi).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// DEG1 jump at an eigenvalue `s` of `τ = (0, I)`: eigenvector `e₂` and
    /// `‖Y₀(·,s)e₂‖²_Δ = s² + 2`.
    pub fn deg1_first_pair_jump<T: Real>(s: T) -> CMat<T> {
        let mut m = CMat::zeros(2, 2);
        m[(1, 1)] = creal(T::one() / (s * s + lit(2.0)));
        m
    }

    /// SMOKE3 Weyl function in the order `(H, Ĥ, H)`.
    pub fn smoke3_weyl<T: Real>(lambda: Complex<T>) -> CMat<T> {
        let sec = creal::<T>(T::one()) / lambda.cos();
        let cot = creal::<T>(T::one()) / (lambda * lit::<T>(0.5)).tan();
        let z = creal(T::zero());
        CMat::from_row_slice(3, 3, &[lambda.tan(), z, sec, z, -cot * lit::<T>(0.5), z, sec, z, lambda.tan()])
    }
}

#[cfg(test)]
mod tests {
    use super::reference::*;
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::propagator::fundamental_solution;

    #[test]
    fn lookup() {
        assert_eq!(builtin::<f64>("free1").unwrap().name.as_deref(), Some("FREE1"));
        assert!(builtin::<f64>("nope").is_err());
        for name in BUILTIN_NAMES {
            let sys = builtin::<f64>(name).unwrap();
            assert!(crate::system::validate_system(&sys).passed(), "{name}");
        }
    }

    #[test]
    fn deg1_closed_form_fundamental() {
        let sys = deg1::<f64>();
        for &(t, l) in &[(0.3, cplx(2.0, 0.0)), (1.7, cplx(0.5, 1.0)), (2.0, cplx(-3.0, 0.2))] {
            let y = fundamental_solution(&sys, l, t).unwrap();
            assert!(max_abs_diff(&y, &deg1_fundamental(t, l)) < 1e-10);
        }
    }

    #[test]
    fn deg1_roots() {
        let ev = deg1_first_pair_eigenvalues(-10.0, 10.0);
        assert_eq!(ev.len(), 8);
        for s in ev {
            assert!((s * s.tan() - 1.0).abs() < 1e-12);
        }
    }
}
