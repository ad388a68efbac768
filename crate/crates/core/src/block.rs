//! Block layout `H ⊕ Ĥ ⊕ H`, the structure matrix and the canonical
//! projectors and embeddings between the blocks.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{creal, imag_unit, CMat, Real};

/// Dimensions of the outer block `H` and the middle block `Ĥ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDims {
    pub h: usize,
    pub hhat: usize,
}

impl BlockDims {
    pub fn new(h: usize, hhat: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::InvalidInput("block dimension h must be at least 1".into()));
        }
        Ok(BlockDims { h, hhat })
    }

    /// `dim H₀ = h + ĥ`.
    pub fn h0(&self) -> usize {
        self.h + self.hhat
    }

    /// Size of the full space, `2h + ĥ`.
    pub fn total(&self) -> usize {
        2 * self.h + self.hhat
    }

    pub fn first(&self) -> Range<usize> {
        0..self.h
    }

    pub fn middle(&self) -> Range<usize> {
        self.h..self.h + self.hhat
    }

    pub fn last(&self) -> Range<usize> {
        self.h + self.hhat..self.total()
    }

    /// The leading `H ⊕ Ĥ` part.
    pub fn leading(&self) -> Range<usize> {
        0..self.h0()
    }
}

/// The skew-Hermitian unitary matrix `[[0,0,-I],[0,iI,0],[I,0,0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureMatrix<T: Real> {
    pub j: CMat<T>,
}

pub fn canonical_structure_matrix<T: Real>(dims: BlockDims) -> StructureMatrix<T> {
    let n = dims.total();
    let mut j = CMat::zeros(n, n);
    for k in 0..dims.h {
        j[(k, dims.h0() + k)] = -creal::<T>(T::one());
        j[(dims.h0() + k, k)] = creal(T::one());
    }
    for k in dims.middle() {
        j[(k, k)] = imag_unit();
    }
    StructureMatrix { j }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSet<T: Real> {
    pub p0: CMat<T>,
    pub phat: CMat<T>,
    pub p1: CMat<T>,
    /// `H₀ → H`, keeping the `H` component.
    pub p_h0_h: CMat<T>,
    /// `H → H₀`, the adjoint of `p_h0_h`.
    pub i_h_h0: CMat<T>,
    /// Orthoprojector in `H₀` onto `Ĥ`.
    pub p_hhat_in_h0: CMat<T>,
}

fn diag_block<T: Real>(n: usize, r: Range<usize>) -> CMat<T> {
    let mut m = CMat::zeros(n, n);
    for k in r {
        m[(k, k)] = creal(T::one());
    }
    m
}

pub fn projectors<T: Real>(dims: BlockDims) -> ProjectorSet<T> {
    let n = dims.total();
    let mut p_h0_h = CMat::zeros(dims.h, dims.h0());
    for k in 0..dims.h {
        p_h0_h[(k, k)] = creal(T::one());
    }
    ProjectorSet {
        p0: diag_block(n, dims.first()),
        phat: diag_block(n, dims.middle()),
        p1: diag_block(n, dims.last()),
        i_h_h0: p_h0_h.transpose(),
        p_h0_h,
        p_hhat_in_h0: diag_block(dims.h0(), dims.h..dims.h0()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::scalar::{cplx, identity};

    #[test]
    fn hamiltonian_j() {
        let j = canonical_structure_matrix::<f64>(BlockDims::new(1, 0).unwrap()).j;
        let want = CMat::from_row_slice(2, 2, &[creal(0.0), creal(-1.0), creal(1.0), creal(0.0)]);
        assert_eq!(j, want);
    }

    #[test]
    fn three_block_j() {
        let j = canonical_structure_matrix::<f64>(BlockDims::new(1, 1).unwrap()).j;
        let z = creal(0.0);
        let want = CMat::from_row_slice(
            3,
            3,
            &[z, z, creal(-1.0), z, cplx(0.0, 1.0), z, creal(1.0), z, z],
        );
        assert_eq!(j, want);
    }

    #[test]
    fn small_projectors() {
        let p = projectors::<f64>(BlockDims::new(1, 0).unwrap());
        assert_eq!(p.p0[(0, 0)], creal(1.0));
        assert_eq!(p.p1[(1, 1)], creal(1.0));
        assert_eq!(p.phat, CMat::zeros(2, 2));
        let p = projectors::<f64>(BlockDims::new(1, 1).unwrap());
        assert_eq!(p.phat[(1, 1)], creal(1.0));
        assert_eq!(p.phat.iter().filter(|z| z.re != 0.0).count(), 1);
    }

    #[test]
    fn zero_h_rejected() {
        assert!(BlockDims::new(0, 2).is_err());
    }

    #[test]
    fn structure_squares_to_minus_identity_for_all_dims() {
        // J*J = I and J* = -J, hence J² = -I regardless of the middle block.
        for h in 1..4 {
            for hhat in 0..3 {
                let d = BlockDims::new(h, hhat).unwrap();
                let j = canonical_structure_matrix::<f64>(d).j;
                let id = identity::<f64>(d.total());
                assert!(max_abs_diff(&(&j * &j), &(-&id)) == 0.0);
            }
        }
    }
}
