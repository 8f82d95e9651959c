//! Exact (projected) dynamic mode decomposition.
//!
//! Given snapshots `h_1..h_T`, the pair `X = [h_1..h_{T-1}]`,
//! `Y = [h_2..h_T]` is reduced through a truncated SVD `X ~ U S V^H`:
//!
//! ```text
//! A~  = U^H Y V S^-1          reduced operator
//! A~ W = W diag(lambda)       eigenpairs
//! Phi = Y V S^-1 W            modes
//! b   = pinv(Phi) h_1         amplitudes
//! h(k) = Phi diag(lambda)^k b
//! ```
//!
//! Amplitudes are anchored at the first snapshot, so `h(k)` reproduces
//! `h_{k+1}`; forecasting `tau` steps past the last of `T` snapshots uses
//! exponent `T - 1 + tau`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, lstsq, relative_rank, PhaseAnchor};
use crate::tensor::{ComplexMatrix, ComplexVector};

/// Singular values below this fraction of the largest count as zero.
pub const NUMERICAL_RANK_TOL: f64 = 1e-13;

/// Relative singular-value threshold used when no rank is given.
pub const DEFAULT_AUTO_THRESHOLD: f64 = 1e-10;

/// One-step shifted snapshot matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotPair {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
}

impl SnapshotPair {
    pub fn state_dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn columns(&self) -> usize {
        self.x.ncols()
    }
}

/// Stacks `seq` into `X = [h_1..h_{T-1}]`, `Y = [h_2..h_T]`. Needs `T >= 3`.
pub fn build_snapshots(seq: &[ComplexVector]) -> Result<SnapshotPair> {
    if seq.len() < 3 {
        return Err(Error::TooFewSnapshots {
            needed: 3,
            got: seq.len(),
        });
    }
    let n = seq[0].len();
    if let Some(bad) = seq.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "snapshot lengths differ: {} vs {}",
            n,
            bad.len()
        )));
    }
    let cols = seq.len() - 1;
    let x = ComplexMatrix::from_fn(n, cols, |i, j| seq[j][i]);
    let y = ComplexMatrix::from_fn(n, cols, |i, j| seq[j + 1][i]);
    Ok(SnapshotPair { x, y })
}

/// Truncation rule for the SVD of `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DmdRank {
    Fixed(usize),
    /// Keep singular values with `s_i / s_1 >= threshold`.
    Auto(f64),
}

impl Default for DmdRank {
    fn default() -> Self {
        DmdRank::Auto(DEFAULT_AUTO_THRESHOLD)
    }
}

/// `auto`, `auto:<threshold>` or a positive integer.
impl std::str::FromStr for DmdRank {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("DMD rank must be auto, auto:<threshold> or a positive integer, got {s:?}"));
        if s == "auto" {
            return Ok(DmdRank::default());
        }
        if let Some(t) = s.strip_prefix("auto:") {
            let t: f64 = t.parse().map_err(|_| bad())?;
            return if t > 0.0 && t <= 1.0 { Ok(DmdRank::Auto(t)) } else { Err(bad()) };
        }
        match s.parse::<usize>() {
            Ok(r) if r > 0 => Ok(DmdRank::Fixed(r)),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for DmdRank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DmdRank::Fixed(r) => write!(f, "{r}"),
            DmdRank::Auto(t) => write!(f, "auto:{t:e}"),
        }
    }
}

/// Reduced operator together with the truncated SVD it was built from.
#[derive(Debug, Clone)]
pub struct ReducedOperator {
    pub a_tilde: ComplexMatrix,
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl ReducedOperator {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }
}

/// Truncated SVD of `X` and `A~ = U^H Y V S^-1`.
///
/// Right singular vectors carry the phase convention, so two data sets whose
/// `X^H X` agree produce the same `V` and hence the same `A~`.
pub fn reduce(pair: &SnapshotPair, rank: DmdRank) -> Result<ReducedOperator> {
    if pair.x.shape() != pair.y.shape() {
        return Err(Error::DimensionMismatch(format!(
            "X is {:?}, Y is {:?}",
            pair.x.shape(),
            pair.y.shape()
        )));
    }
    if pair.columns() < 2 {
        return Err(Error::TooFewSnapshots {
            needed: 3,
            got: pair.columns() + 1,
        });
    }
    let svd = linalg::svd(&pair.x, PhaseAnchor::RightLargest)?;
    let top = svd.s.first().copied().unwrap_or(0.0);
    if top.is_nan() || top <= 0.0 {
        return Err(Error::Degenerate("snapshot matrix X is zero".into()));
    }
    let numerical = svd.s.iter().filter(|&&s| s >= NUMERICAL_RANK_TOL * top).count();
    let r = match rank {
        DmdRank::Fixed(r) => {
            let max = pair.state_dim().min(pair.columns());
            if r == 0 || r > max {
                return Err(Error::InvalidArgument(format!("DMD rank {r} outside 1..={max}")));
            }
            if r > numerical {
                return Err(Error::RankDeficient {
                    requested: r,
                    numerical,
                });
            }
            r
        }
        DmdRank::Auto(threshold) => {
            if !(threshold > 0.0 && threshold < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "DMD auto threshold {threshold} outside (0, 1)"
                )));
            }
            relative_rank(&svd.s, threshold).min(numerical)
        }
    };
    let u = svd.u.columns(0, r).into_owned();
    let v = svd.v.columns(0, r).into_owned();
    let s = svd.s[..r].to_vec();
    let a_tilde = u.adjoint() * &pair.y * &v * inverse_diag(&s);
    Ok(ReducedOperator {
        a_tilde,
        u,
        singular_values: s,
        v,
    })
}

/// Only the reduced operator `A~`.
pub fn reduced_operator(pair: &SnapshotPair, rank: DmdRank) -> Result<ComplexMatrix> {
    reduce(pair, rank).map(|op| op.a_tilde)
}

fn inverse_diag(s: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        s.len(),
        s.iter().map(|&v| Complex64::new(1.0 / v, 0.0)),
    ))
}

/// A fitted linear extrapolator.
#[derive(Debug, Clone, PartialEq)]
pub struct DmdModel {
    /// `N x r` DMD modes.
    pub modes: ComplexMatrix,
    /// Eigenvalues, descending magnitude then descending real part.
    pub eigenvalues: Vec<Complex64>,
    /// Amplitudes anchored at the first snapshot.
    pub amplitudes: ComplexVector,
}

impl DmdModel {
    pub fn new(modes: ComplexMatrix, eigenvalues: Vec<Complex64>, amplitudes: ComplexVector) -> Result<Self> {
        let r = eigenvalues.len();
        if r == 0 || modes.ncols() != r || amplitudes.len() != r {
            return Err(Error::DimensionMismatch(format!(
                "inconsistent DMD model: modes {:?}, {} eigenvalues, {} amplitudes",
                modes.shape(),
                r,
                amplitudes.len()
            )));
        }
        Ok(Self {
            modes,
            eigenvalues,
            amplitudes,
        })
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn state_dim(&self) -> usize {
        self.modes.nrows()
    }

    /// `Phi diag(lambda)^exponent b`.
    pub fn predict(&self, exponent: usize) -> ComplexVector {
        let k = i32::try_from(exponent).expect("exponent fits in i32");
        let weights = ComplexVector::from_iterator(
            self.rank(),
            self.eigenvalues
                .iter()
                .zip(self.amplitudes.iter())
                .map(|(lambda, b)| lambda.powi(k) * b),
        );
        &self.modes * weights
    }
}

/// Fits a DMD model to `pair` at the requested truncation.
pub fn fit(pair: &SnapshotPair, rank: DmdRank) -> Result<DmdModel> {
    let op = reduce(pair, rank)?;
    let eig = linalg::eig(&op.a_tilde)?;
    let modes = &pair.y * &op.v * inverse_diag(&op.singular_values) * &eig.vectors;
    let first = pair.x.column(0).into_owned();
    let (amplitudes, _) = lstsq(&modes, &first, NUMERICAL_RANK_TOL)?;
    if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite DMD amplitudes".into()));
    }
    DmdModel::new(modes, eig.values, amplitudes)
}
