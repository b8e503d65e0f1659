//! Dense operators between grid function spaces.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction, Side};
use crate::linalg::{self, CMatrix};

/// A dense matrix acting from `(domain, from)` to `(codomain, to)`.
///
/// Quadrature weights are folded into the matrix, so composition of operators
/// is plain matrix multiplication.
#[derive(Debug, Clone, PartialEq)]
pub struct LinOp {
    matrix: CMatrix,
    domain: Arc<Grid>,
    codomain: Arc<Grid>,
    from: Side,
    to: Side,
}

impl LinOp {
    pub fn new(
        matrix: CMatrix,
        domain: Arc<Grid>,
        codomain: Arc<Grid>,
        from: Side,
        to: Side,
    ) -> Result<Self> {
        if matrix.ncols() != domain.len() || matrix.nrows() != codomain.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix between grids of {} and {} nodes",
                matrix.nrows(),
                matrix.ncols(),
                domain.len(),
                codomain.len()
            )));
        }
        Ok(LinOp { matrix, domain, codomain, from, to })
    }

    /// Endomorphism of one grid and side.
    pub fn endo(matrix: CMatrix, grid: Arc<Grid>, side: Side) -> Result<Self> {
        LinOp::new(matrix, grid.clone(), grid, side, side)
    }

    pub fn identity(grid: &Arc<Grid>, side: Side) -> Self {
        let n = grid.len();
        LinOp {
            matrix: CMatrix::identity(n, n),
            domain: grid.clone(),
            codomain: grid.clone(),
            from: side,
            to: side,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn domain(&self) -> &Arc<Grid> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<Grid> {
        &self.codomain
    }

    pub fn from_side(&self) -> Side {
        self.from
    }

    pub fn to_side(&self) -> Side {
        self.to
    }

    pub fn is_endomorphism(&self) -> bool {
        self.from == self.to && self.domain.same_as(&self.codomain)
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.domain.check_same(f.grid())?;
        if f.side() != self.from {
            return Err(Error::SideMismatch { expected: self.from, got: f.side() });
        }
        SampledFunction::new(self.codomain.clone(), &self.matrix * f.values(), self.to)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinOp) -> Result<LinOp> {
        inner.codomain.check_same(&self.domain)?;
        if inner.to != self.from {
            return Err(Error::SideMismatch { expected: self.from, got: inner.to });
        }
        Ok(LinOp {
            matrix: &self.matrix * &inner.matrix,
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            from: inner.from,
            to: self.to,
        })
    }

    fn check_same_shape(&self, other: &LinOp) -> Result<()> {
        self.domain.check_same(&other.domain)?;
        self.codomain.check_same(&other.codomain)?;
        if self.from != other.from {
            return Err(Error::SideMismatch { expected: self.from, got: other.from });
        }
        if self.to != other.to {
            return Err(Error::SideMismatch { expected: self.to, got: other.to });
        }
        Ok(())
    }

    pub fn add(&self, other: &LinOp) -> Result<LinOp> {
        self.check_same_shape(other)?;
        Ok(LinOp { matrix: &self.matrix + &other.matrix, ..self.clone() })
    }

    pub fn sub(&self, other: &LinOp) -> Result<LinOp> {
        self.check_same_shape(other)?;
        Ok(LinOp { matrix: &self.matrix - &other.matrix, ..self.clone() })
    }

    pub fn scaled(&self, s: Complex64) -> LinOp {
        LinOp { matrix: &self.matrix * s, ..self.clone() }
    }

    /// `[self, other] = self∘other − other∘self`.
    pub fn commutator(&self, other: &LinOp) -> Result<LinOp> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Transpose with respect to the bilinear pairing:
    /// `pairing(A*f, φ) = pairing(f, Aφ)`, i.e. `W_in⁻¹ Aᵀ W_out`.
    pub fn pairing_adjoint(&self) -> LinOp {
        let m = self.domain.inverse_weight_matrix()
            * self.matrix.transpose()
            * self.codomain.weight_matrix();
        LinOp {
            matrix: m,
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            from: self.to.flip(),
            to: self.from.flip(),
        }
    }

    /// Conjugate transpose with respect to the weighted l2 structure,
    /// `W_in⁻¹ A* W_out`. Coincides with [`LinOp::pairing_adjoint`] for real
    /// matrices.
    pub fn hermitian_adjoint(&self) -> LinOp {
        let m = self.domain.inverse_weight_matrix()
            * self.matrix.adjoint()
            * self.codomain.weight_matrix();
        LinOp {
            matrix: m,
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            from: self.to.flip(),
            to: self.from.flip(),
        }
    }

    /// Same matrix re-tagged for another side contract.
    pub fn with_sides(&self, from: Side, to: Side) -> LinOp {
        LinOp { from, to, ..self.clone() }
    }

    pub fn condition_number(&self) -> f64 {
        linalg::condition_number(&self.matrix)
    }

    pub fn norm_estimate(&self) -> f64 {
        linalg::operator_norm_estimate(&self.matrix, 20)
    }
}
