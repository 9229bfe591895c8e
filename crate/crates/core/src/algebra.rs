//! Finite model of a semi-finite von Neumann algebra `M = ⊕ₖ M_{nₖ}(ℂ)` with
//! a faithful normal trace `τ = Σₖ wₖ Tr(·ₖ)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex;

use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// Default cap on the total dimension `N = Σ nₖ`.
pub const DEFAULT_DIM_CAP: usize = 256;

/// Relative tolerance for accepting an element as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Singular values and eigenvalues below this fraction of the largest one
/// are treated as exact zeros.
pub const ZERO_CUTOFF: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockShape {
    dims: Vec<usize>,
}

impl BlockShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(dims, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(dims: Vec<usize>, cap: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("no blocks".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidShape("block of size 0".into()));
        }
        let total: usize = dims.iter().sum();
        if total > cap {
            return Err(Error::InvalidShape(format!("total dimension {total} exceeds cap {cap}")));
        }
        Ok(BlockShape { dims })
    }

    /// `n` one-dimensional blocks: the diagonal algebra `ℓ∞(n)`.
    pub fn commutative(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.dims.iter().all(|&n| n == 1)
    }

    fn check_same(&self, other: &BlockShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                left: self.dims.clone(),
                right: other.dims.clone(),
            });
        }
        Ok(())
    }
}

/// An element of `M`: one complex matrix per block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockElement {
    shape: BlockShape,
    blocks: Vec<DMatrix<C64>>,
}

impl BlockElement {
    pub fn from_blocks(blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        for b in &blocks {
            if !b.is_square() {
                return Err(Error::InvalidShape(format!("non-square block {}x{}", b.nrows(), b.ncols())));
            }
            if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite("matrix entry".into()));
            }
        }
        let shape = BlockShape::new(blocks.iter().map(|b| b.nrows()).collect())?;
        Ok(BlockElement { shape, blocks })
    }

    pub fn zeros(shape: &BlockShape) -> Self {
        let blocks = shape.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        BlockElement {
            shape: shape.clone(),
            blocks,
        }
    }

    pub fn identity(shape: &BlockShape) -> Self {
        let blocks = shape.dims.iter().map(|&n| DMatrix::identity(n, n)).collect();
        BlockElement {
            shape: shape.clone(),
            blocks,
        }
    }

    /// Element of the commutative algebra with the given coordinates.
    pub fn diagonal(values: &[C64]) -> Result<Self> {
        Self::from_blocks(values.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect())
    }

    pub fn real_diagonal(values: &[f64]) -> Result<Self> {
        let vals: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::diagonal(&vals)
    }

    /// Single-block element.
    pub fn single(block: DMatrix<C64>) -> Result<Self> {
        Self::from_blocks(vec![block])
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &DMatrix<C64> {
        &self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<DMatrix<C64>> {
        self.blocks
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&DMatrix<C64>, &DMatrix<C64>) -> DMatrix<C64>) -> Result<Self> {
        self.shape.check_same(&other.shape)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect();
        Ok(BlockElement {
            shape: self.shape.clone(),
            blocks,
        })
    }

    pub fn map_blocks(&self, f: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> Self {
        BlockElement {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|a| a.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_blocks(|a| a * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map_blocks(|a| a * C64::new(c, 0.0))
    }

    /// `a·x + b·y`.
    pub fn lin_comb(a: C64, x: &Self, b: C64, y: &Self) -> Result<Self> {
        x.zip_with(y, |u, v| u * a + v * b)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|z| *z == C64::new(0.0, 0.0)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Singular values per block (unsorted order as returned by the SVD).
    pub fn singular_values(&self) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(|b| b.clone().singular_values().iter().copied().collect())
            .collect()
    }

    /// Operator norm: the largest singular value over all blocks.
    pub fn op_norm(&self) -> f64 {
        self.singular_values()
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }

    /// `‖x − x*‖_F`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b - b.adjoint()).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_asymmetry() <= HERMITIAN_TOL * self.frobenius_norm()
    }

    /// Checks near-Hermiticity and returns `(x + x*)/2`.
    pub fn symmetrized(&self) -> Result<Self> {
        let asym = self.hermitian_asymmetry();
        let tol = HERMITIAN_TOL * self.frobenius_norm();
        if asym > tol {
            return Err(Error::NotHermitian {
                asymmetry: asym,
                tolerance: tol,
            });
        }
        Ok(self.map_blocks(|b| (b + b.adjoint()) * C64::new(0.5, 0.0)))
    }

    /// Polar decomposition `x = u·|x|` with `|x| = (x*x)^{1/2}`.
    pub fn polar(&self) -> (BlockElement, BlockElement) {
        let cutoff = ZERO_CUTOFF * self.op_norm();
        let mut us = Vec::with_capacity(self.blocks.len());
        let mut abss = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let n = b.nrows();
            let svd = SVD::new(b.clone(), true, true);
            let (w, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
            let mut u = DMatrix::<C64>::zeros(n, n);
            let mut abs = DMatrix::<C64>::zeros(n, n);
            for (j, &s) in svd.singular_values.iter().enumerate() {
                if s <= cutoff || s == 0.0 {
                    continue;
                }
                let vj = vt.row(j).adjoint();
                let wj = w.column(j);
                u += wj * vj.adjoint();
                abs += &vj * vj.adjoint() * C64::new(s, 0.0);
            }
            us.push(u);
            abss.push(abs);
        }
        let shape = self.shape.clone();
        (
            BlockElement {
                shape: shape.clone(),
                blocks: us,
            },
            BlockElement { shape, blocks: abss },
        )
    }

    /// `|x| = (x*x)^{1/2}`.
    pub fn abs(&self) -> BlockElement {
        self.polar().1
    }

    /// Eigendecomposition of a Hermitian element.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen> {
        let x = self.symmetrized()?;
        let mut values = Vec::with_capacity(x.blocks.len());
        let mut vectors = Vec::with_capacity(x.blocks.len());
        for b in x.blocks {
            let eig = SymmetricEigen::new(b);
            values.push(eig.eigenvalues);
            vectors.push(eig.eigenvectors);
        }
        Ok(HermitianEigen {
            shape: self.shape.clone(),
            values,
            vectors,
        })
    }

    /// Spectral functional calculus `f(x)` for Hermitian `x`.
    pub fn func_calc(&self, f: impl Fn(f64) -> f64) -> Result<BlockElement> {
        Ok(self.hermitian_eigen()?.apply(f))
    }

    /// Smallest eigenvalue of a Hermitian element.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = self.hermitian_eigen()?;
        Ok(eig.values.iter().flat_map(|v| v.iter().copied()).fold(f64::INFINITY, f64::min))
    }

    /// `x·(1 − e_λ(x))`: drops the spectral part of a positive `x` at or
    /// below `λ`.
    pub fn spectral_truncate(&self, lambda: f64) -> Result<BlockElement> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("truncation level must be positive, got {lambda}")));
        }
        let eig = self.hermitian_eigen()?;
        let top = eig.max_abs_value();
        let min = eig.values.iter().flat_map(|v| v.iter().copied()).fold(f64::INFINITY, f64::min);
        if min < -1e-10 * top.max(f64::MIN_POSITIVE) {
            return Err(Error::NotPositive(min));
        }
        let cutoff = ZERO_CUTOFF * top;
        Ok(eig.apply(|t| if t <= lambda || t <= cutoff { 0.0 } else { t }))
    }
}

/// Per-block eigendecomposition `xₖ = Vₖ Λₖ Vₖ*` of a Hermitian element.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    shape: BlockShape,
    pub values: Vec<DVector<f64>>,
    pub vectors: Vec<DMatrix<C64>>,
}

impl HermitianEigen {
    /// `V f(Λ) V*` per block.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> BlockElement {
        let blocks = self
            .values
            .iter()
            .zip(&self.vectors)
            .map(|(lam, v)| {
                let d = DMatrix::from_diagonal(&lam.map(|t| C64::new(f(t), 0.0)));
                v * d * v.adjoint()
            })
            .collect();
        BlockElement {
            shape: self.shape.clone(),
            blocks,
        }
    }

    /// Same eigenvectors, eigenvalues mapped through a fallible `f`.
    pub fn try_map_values(&self, f: impl Fn(f64) -> Result<f64>) -> Result<HermitianEigen> {
        let mut values = Vec::with_capacity(self.values.len());
        for lam in &self.values {
            let mut out = lam.clone();
            for v in out.iter_mut() {
                *v = f(*v)?;
            }
            values.push(out);
        }
        Ok(HermitianEigen {
            shape: self.shape.clone(),
            values,
            vectors: self.vectors.clone(),
        })
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .map(|t| t.abs())
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flat_map(|v| v.iter().copied()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().flat_map(|v| v.iter().copied()).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The trace `τ(x) = Σₖ wₖ Tr(xₖ)`. In the commutative algebra the weights
/// are the coordinate masses `νᵢ = τ(fᵢ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSpec {
    shape: BlockShape,
    weights: Vec<f64>,
}

impl TraceSpec {
    pub fn new(shape: BlockShape, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != shape.num_blocks() {
            return Err(Error::InvalidShape(format!(
                "{} trace weights for {} blocks",
                weights.len(),
                shape.num_blocks()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Domain("trace weights must be positive and finite".into()));
        }
        Ok(TraceSpec { shape, weights })
    }

    /// All weights 1: the standard matrix trace on each block.
    pub fn standard(shape: &BlockShape) -> Self {
        TraceSpec {
            shape: shape.clone(),
            weights: vec![1.0; shape.num_blocks()],
        }
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn trace(&self, x: &BlockElement) -> Result<C64> {
        self.shape.check_same(&x.shape)?;
        Ok(self
            .weights
            .iter()
            .zip(&x.blocks)
            .map(|(&w, b)| b.trace() * w)
            .sum())
    }

    /// `τ(1)`.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().zip(&self.shape.dims).map(|(&w, &n)| w * n as f64).sum()
    }

    pub fn check_shape(&self, x: &BlockElement) -> Result<()> {
        self.shape.check_same(&x.shape)
    }
}
