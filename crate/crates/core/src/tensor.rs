//! Dense complex third-order tensors.
//!
//! Storage is first-index-fastest: entry `(i, j, k)` of an `n1 x n2 x n3`
//! tensor lives at `i + n1 * (j + n2 * k)`. With this layout `vec` is a plain
//! copy of the storage and
//!
//! ```text
//! vec(t x1 A x2 B x3 C) = (C kron B kron A) vec(t)
//! ```
//!
//! holds exactly, which is what ties the Tucker form to its Kronecker form.
//! Mode-n unfoldings put mode-n fibres in columns, remaining indices ordered
//! lower-mode-fastest.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Mode index, 1-based as in the usual tensor notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Rx = 1,
    Tx = 2,
    Sc = 3,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Rx, Mode::Tx, Mode::Sc];

    pub fn index(self) -> usize {
        self as usize - 1
    }
}

impl TryFrom<usize> for Mode {
    type Error = Error;

    fn try_from(mode: usize) -> Result<Self> {
        match mode {
            1 => Ok(Mode::Rx),
            2 => Ok(Mode::Tx),
            3 => Ok(Mode::Sc),
            other => Err(Error::InvalidMode(other)),
        }
    }
}

/// Tensor dimensions `(N_rx, N_tx, N_sc)`.
pub type Dims = [usize; 3];

/// One complex CSI snapshot over (rx antenna, tx antenna, subcarrier).
///
/// Also used for Tucker cores, whose dims are the multilinear ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    dims: Dims,
    data: Vec<Complex64>,
}

/// A Tucker core shares the dense representation of a channel tensor.
pub type CoreTensor = ChannelTensor;

impl ChannelTensor {
    pub fn new(dims: Dims, data: Vec<Complex64>) -> Result<Self> {
        check_dims(dims)?;
        let len = dims.iter().product::<usize>();
        if data.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for dims {:?} (expected {})",
                data.len(),
                dims,
                len
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("tensor contains non-finite entries".into()));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        check_dims(dims)?;
        Ok(Self {
            dims,
            data: vec![Complex64::new(0.0, 0.0); dims.iter().product()],
        })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> Complex64) -> Result<Self> {
        check_dims(dims)?;
        let mut data = Vec::with_capacity(dims.iter().product());
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    data.push(f(i, j, k));
                }
            }
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: Complex64) {
        let at = self.offset(i, j, k);
        self.data[at] = value;
    }

    /// Vectorization in storage order (mode-1 fastest).
    pub fn vec(&self) -> ComplexVector {
        ComplexVector::from_column_slice(&self.data)
    }

    /// Inverse of [`ChannelTensor::vec`].
    pub fn unvec(v: &ComplexVector, dims: Dims) -> Result<Self> {
        check_dims(dims)?;
        let len = dims.iter().product::<usize>();
        if v.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} cannot be reshaped to {:?}",
                v.len(),
                dims
            )));
        }
        Ok(Self {
            dims,
            data: v.as_slice().to_vec(),
        })
    }

    /// Mode-n unfolding: an `N_n x (product of the other dims)` matrix whose
    /// columns are the mode-n fibres.
    pub fn unfold(&self, mode: Mode) -> ComplexMatrix {
        let [n1, n2, n3] = self.dims;
        match mode {
            // The storage already is the column-major mode-1 unfolding.
            Mode::Rx => ComplexMatrix::from_column_slice(n1, n2 * n3, &self.data),
            Mode::Tx => ComplexMatrix::from_fn(n2, n1 * n3, |j, col| {
                let (i, k) = (col % n1, col / n1);
                self.get(i, j, k)
            }),
            Mode::Sc => ComplexMatrix::from_fn(n3, n1 * n2, |k, col| {
                let (i, j) = (col % n1, col / n1);
                self.get(i, j, k)
            }),
        }
    }

    /// Inverse of [`ChannelTensor::unfold`].
    pub fn fold(m: &ComplexMatrix, mode: Mode, dims: Dims) -> Result<Self> {
        check_dims(dims)?;
        let idx = mode.index();
        let rest: usize = dims.iter().enumerate().filter(|&(d, _)| d != idx).map(|(_, n)| n).product();
        if m.nrows() != dims[idx] || m.ncols() != rest {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix cannot fold along mode {} into {:?}",
                m.nrows(),
                m.ncols(),
                idx + 1,
                dims
            )));
        }
        let [n1, _, _] = dims;
        let t = match mode {
            Mode::Rx => Self {
                dims,
                data: m.as_slice().to_vec(),
            },
            Mode::Tx => Self::from_fn(dims, |i, j, k| m[(j, i + n1 * k)])?,
            Mode::Sc => Self::from_fn(dims, |i, j, k| m[(k, i + n1 * j)])?,
        };
        Ok(t)
    }

    /// Mode-n tensor-matrix product `t x_n m`.
    pub fn mode_product(&self, m: &ComplexMatrix, mode: Mode) -> Result<Self> {
        let idx = mode.index();
        if m.ncols() != self.dims[idx] {
            return Err(Error::DimensionMismatch(format!(
                "mode-{} product needs {} matrix columns, got {}",
                idx + 1,
                self.dims[idx],
                m.ncols()
            )));
        }
        let mut dims = self.dims;
        dims[idx] = m.nrows();
        let product = m * self.unfold(mode);
        Self::fold(&product, mode, dims)
    }

    /// `t x1 a x2 b x3 c`.
    pub fn multilinear(&self, a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Result<Self> {
        self.mode_product(a, Mode::Rx)?
            .mode_product(b, Mode::Tx)?
            .mode_product(c, Mode::Sc)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(Self {
            dims: self.dims,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

fn check_dims(dims: Dims) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::InvalidArgument(format!("zero-sized dimension in {dims:?}")));
    }
    Ok(())
}

/// Kronecker product; block `(i, j)` of the result is `a[(i, j)] * b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(a.nrows() * br, a.ncols() * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}
