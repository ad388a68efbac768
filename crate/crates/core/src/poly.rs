//! Matrix polynomials and piecewise matrix polynomials in one real or
//! complex variable.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::scalar::{creal, CMat, Real};

pub const DEFAULT_MAX_DEGREE: usize = 6;

/// `Σ_k c_k x^k` with matrix coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPoly<T: Real> {
    coeffs: Vec<CMat<T>>,
}

impl<T: Real> MatrixPoly<T> {
    pub fn new(coeffs: Vec<CMat<T>>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::MalformedCoefficients("polynomial has no coefficients".into()));
        };
        let shape = first.shape();
        if coeffs.iter().any(|c| c.shape() != shape) {
            return Err(Error::MalformedCoefficients("polynomial coefficients differ in shape".into()));
        }
        Ok(MatrixPoly { coeffs })
    }

    pub fn constant(m: CMat<T>) -> Self {
        MatrixPoly { coeffs: vec![m] }
    }

    pub fn coeffs(&self) -> &[CMat<T>] {
        &self.coeffs
    }

    pub fn shape(&self) -> (usize, usize) {
        self.coeffs[0].shape()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.iter().all(|z| z.re == T::zero() && z.im == T::zero()))
    }

    /// True when every coefficient is real.
    pub fn has_real_coefficients(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|z| z.im == T::zero()))
    }

    pub fn eval(&self, x: Complex<T>) -> CMat<T> {
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_real(&self, x: T) -> CMat<T> {
        self.eval(creal(x))
    }
}

/// Matrix polynomial in `t` on each piece `[breaks[i], breaks[i+1])`.
/// Polynomials are in the global variable `t`, not a local offset.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMatrixPoly<T: Real> {
    breaks: Vec<T>,
    pieces: Vec<MatrixPoly<T>>,
}

impl<T: Real> PiecewiseMatrixPoly<T> {
    pub fn new(breaks: Vec<T>, pieces: Vec<MatrixPoly<T>>, max_degree: usize) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::MalformedCoefficients("need at least two breakpoints".into()));
        }
        if pieces.len() + 1 != breaks.len() {
            return Err(Error::MalformedCoefficients(format!(
                "{} breakpoints need {} pieces, got {}",
                breaks.len(),
                breaks.len() - 1,
                pieces.len()
            )));
        }
        for (i, w) in breaks.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(Error::MalformedCoefficients(format!("breakpoints not increasing at index {}", i + 1)));
            }
        }
        let shape = pieces[0].shape();
        for (i, p) in pieces.iter().enumerate() {
            if p.shape() != shape {
                return Err(Error::MalformedCoefficients(format!("piece {i} has a different shape")));
            }
            if p.degree() > max_degree {
                return Err(Error::MalformedCoefficients(format!(
                    "piece {i} has degree {} above the maximum {max_degree}",
                    p.degree()
                )));
            }
        }
        Ok(PiecewiseMatrixPoly { breaks, pieces })
    }

    pub fn constant(a: T, b: T, m: CMat<T>) -> Self {
        PiecewiseMatrixPoly { breaks: vec![a, b], pieces: vec![MatrixPoly::constant(m)] }
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[MatrixPoly<T>] {
        &self.pieces
    }

    pub fn shape(&self) -> (usize, usize) {
        self.pieces[0].shape()
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn start(&self) -> T {
        self.breaks[0]
    }

    pub fn end(&self) -> T {
        self.breaks[self.breaks.len() - 1]
    }

    /// Piece containing `t`; interior breakpoints belong to the piece on
    /// their right and points outside are clamped.
    pub fn piece_index(&self, t: T) -> usize {
        let n = self.pieces.len();
        self.breaks[1..n].partition_point(|&b| b <= t)
    }

    pub fn eval(&self, t: T) -> CMat<T> {
        self.pieces[self.piece_index(t)].eval_real(t)
    }

    /// Evaluates piece `i` even outside its own interval, so one-sided
    /// limits at breakpoints are available.
    pub fn eval_piece(&self, i: usize, t: T) -> CMat<T> {
        self.pieces[i].eval_real(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn scalar(c: f64) -> CMat<f64> {
        CMat::from_element(1, 1, creal(c))
    }

    #[test]
    fn horner_matches_direct() {
        let p = MatrixPoly::new(vec![scalar(1.0), scalar(-2.0), scalar(0.5)]).unwrap();
        let x = cplx(0.3, 1.1);
        let direct = creal(1.0) - x * 2.0 + x * x * 0.5;
        assert!((p.eval(x)[(0, 0)] - direct).norm() < 1e-15);
    }

    #[test]
    fn piece_lookup() {
        let pw = PiecewiseMatrixPoly::new(
            vec![0.0, 1.0, 2.0],
            vec![MatrixPoly::constant(scalar(1.0)), MatrixPoly::constant(scalar(2.0))],
            6,
        )
        .unwrap();
        assert_eq!(pw.piece_index(0.5), 0);
        assert_eq!(pw.piece_index(1.0), 1);
        assert_eq!(pw.piece_index(2.0), 1);
        assert_eq!(pw.piece_index(-1.0), 0);
        assert_eq!(pw.eval(1.0)[(0, 0)].re, 2.0);
    }

    #[test]
    fn rejects_bad_layout() {
        let one = MatrixPoly::constant(scalar(1.0));
        assert!(PiecewiseMatrixPoly::new(vec![0.0, 1.0], vec![], 6).is_err());
        assert!(PiecewiseMatrixPoly::new(vec![1.0, 0.0], vec![one.clone()], 6).is_err());
        let deg7 = MatrixPoly::new(vec![scalar(1.0); 8]).unwrap();
        assert!(PiecewiseMatrixPoly::new(vec![0.0, 1.0], vec![deg7], 6).is_err());
    }
}
