//! Truncated higher-order SVD with threshold-based multilinear rank selection,
//! and projection / reconstruction against a fixed set of Tucker factors.

use crate::error::{Error, Result};
use crate::linalg::{left_singular, relative_rank};
use crate::tensor::{kron, ChannelTensor, ComplexMatrix, CoreTensor, Dims, Mode};

const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Three factor matrices with orthonormal columns spanning the rx, tx and
/// subcarrier subspaces. Their Kronecker product is an isometry from core
/// space into channel space.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerModel {
    factors: [ComplexMatrix; 3],
}

impl TuckerModel {
    /// Validates shapes and orthonormality of each factor.
    pub fn new(u_rx: ComplexMatrix, u_tx: ComplexMatrix, u_sc: ComplexMatrix) -> Result<Self> {
        let factors = [u_rx, u_tx, u_sc];
        for (mode, u) in factors.iter().enumerate() {
            let (n, r) = u.shape();
            if r == 0 || r > n {
                return Err(Error::InvalidArgument(format!(
                    "mode-{} factor is {n}x{r}, rank must be in 1..={n}",
                    mode + 1
                )));
            }
            let gram = u.adjoint() * u;
            let err = (gram - ComplexMatrix::identity(r, r)).camax();
            if err.is_nan() || err > ORTHONORMALITY_TOL {
                return Err(Error::InvalidArgument(format!(
                    "mode-{} factor is not orthonormal (max |U^H U - I| = {err:e})",
                    mode + 1
                )));
            }
        }
        Ok(Self { factors })
    }

    /// Identity factors: projection and reconstruction are both the identity.
    pub fn identity(dims: Dims) -> Result<Self> {
        Self::new(
            ComplexMatrix::identity(dims[0], dims[0]),
            ComplexMatrix::identity(dims[1], dims[1]),
            ComplexMatrix::identity(dims[2], dims[2]),
        )
    }

    pub fn factor(&self, mode: Mode) -> &ComplexMatrix {
        &self.factors[mode.index()]
    }

    pub fn u_rx(&self) -> &ComplexMatrix {
        &self.factors[0]
    }

    pub fn u_tx(&self) -> &ComplexMatrix {
        &self.factors[1]
    }

    pub fn u_sc(&self) -> &ComplexMatrix {
        &self.factors[2]
    }

    pub fn full_dims(&self) -> Dims {
        [self.factors[0].nrows(), self.factors[1].nrows(), self.factors[2].nrows()]
    }

    pub fn ranks(&self) -> Dims {
        [self.factors[0].ncols(), self.factors[1].ncols(), self.factors[2].ncols()]
    }

    pub fn compression_ratio(&self) -> f64 {
        compression_ratio(self.full_dims(), self.ranks())
    }

    /// `U_sc kron U_tx kron U_rx`, the matrix mapping `vec(core)` to `vec(tensor)`.
    pub fn kron_basis(&self) -> ComplexMatrix {
        kron(self.u_sc(), &kron(self.u_tx(), self.u_rx()))
    }

    /// Core of `t` in the fixed subspace: `t x1 U_rx^H x2 U_tx^H x3 U_sc^H`.
    pub fn project_core(&self, t: &ChannelTensor) -> Result<CoreTensor> {
        if t.dims() != self.full_dims() {
            return Err(Error::DimensionMismatch(format!(
                "tensor dims {:?} do not match factor rows {:?}",
                t.dims(),
                self.full_dims()
            )));
        }
        t.multilinear(&self.u_rx().adjoint(), &self.u_tx().adjoint(), &self.u_sc().adjoint())
    }

    /// `core x1 U_rx x2 U_tx x3 U_sc`.
    pub fn reconstruct(&self, core: &CoreTensor) -> Result<ChannelTensor> {
        if core.dims() != self.ranks() {
            return Err(Error::DimensionMismatch(format!(
                "core dims {:?} do not match ranks {:?}",
                core.dims(),
                self.ranks()
            )));
        }
        core.multilinear(self.u_rx(), self.u_tx(), self.u_sc())
    }

    /// Orthogonal projection of `t` onto the Tucker subspace.
    pub fn project(&self, t: &ChannelTensor) -> Result<ChannelTensor> {
        self.reconstruct(&self.project_core(t)?)
    }
}

/// Truncated HOSVD. For each mode the factor holds the leading left singular
/// vectors of the unfolding, keeping those with `s_i / s_1 >= threshold`
/// (at least one). Each vector's first non-negligible entry is real-positive.
pub fn hosvd(t: &ChannelTensor, threshold: f64) -> Result<(TuckerModel, CoreTensor)> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation threshold {threshold} outside (0, 1]"
        )));
    }
    if t.frobenius_norm() == 0.0 {
        return Err(Error::Degenerate("HOSVD of an all-zero tensor".into()));
    }
    let mut factors = Vec::with_capacity(3);
    for mode in Mode::ALL {
        let (u, s) = left_singular(&t.unfold(mode))?;
        let rank = relative_rank(&s, threshold);
        factors.push(u.columns(0, rank).into_owned());
    }
    let [u_rx, u_tx, u_sc]: [ComplexMatrix; 3] = factors.try_into().expect("three modes");
    let model = TuckerModel::new(u_rx, u_tx, u_sc)?;
    let core = model.project_core(t)?;
    Ok((model, core))
}

/// Singular values of the mode-n unfolding, descending.
pub fn mode_singular_values(t: &ChannelTensor, mode: Mode) -> Result<Vec<f64>> {
    left_singular(&t.unfold(mode)).map(|(_, s)| s)
}

/// `(N_rx N_tx N_sc) / (R_rx R_tx R_sc)`.
pub fn compression_ratio(full_dims: Dims, ranks: Dims) -> f64 {
    let full: usize = full_dims.iter().product();
    let core: usize = ranks.iter().product();
    full as f64 / core as f64
}
