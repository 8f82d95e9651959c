//! Numerical check that DMD in the full vectorized space and DMD on Tucker
//! cores produce the same reduced operator.
//!
//! With `h_t = C g_t` and `C^H C = I`, the Gram matrices `X_H^H X_H` and
//! `X_G^H X_G` coincide, so both SVDs share singular values and right
//! singular vectors, `U_H = C U_G`, and therefore `A~_H = A~_G`. The
//! identity degrades as the Tucker residual grows.

use crate::dmd::{self, DmdRank};
use crate::error::Result;
use crate::linalg::{eig, matched_eig_distance};
use crate::tensor::{ChannelTensor, ComplexVector};
use crate::tucker::hosvd;

use super::PredictorConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// `|A~_H - A~_G|_F / |A~_G|_F`; `None` when the truncation ranks differ.
    pub opdiff: Option<f64>,
    /// Largest distance between greedily matched eigenvalues; `None` when the
    /// truncation ranks differ.
    pub eigdiff: Option<f64>,
    /// `|X_H - C X_G|_F / |X_H|_F` over the window.
    pub tucker_residual: f64,
    pub rank_full: usize,
    pub rank_core: usize,
    pub tucker_ranks: [usize; 3],
}

impl EquivalenceReport {
    pub fn comparable(&self) -> bool {
        self.opdiff.is_some()
    }
}

/// Fits the reduced operator both ways on the last `cfg.history` snapshots,
/// with Tucker factors from the first snapshot of that window.
pub fn verify_operator_equivalence(seq: &super::ChannelSequence, cfg: &PredictorConfig) -> Result<EquivalenceReport> {
    let window = seq.window(cfg.history)?;
    let (model, _) = hosvd(&window[0], cfg.tucker_threshold)?;

    let full: Vec<ComplexVector> = window.iter().map(ChannelTensor::vec).collect();
    let cores = window.iter().map(|t| model.project_core(t)).collect::<Result<Vec<_>>>()?;
    let core_vecs: Vec<ComplexVector> = cores.iter().map(ChannelTensor::vec).collect();

    let mut resid_sq = 0.0;
    let mut total_sq = 0.0;
    for (t, g) in window.iter().zip(&cores) {
        resid_sq += t.sub(&model.reconstruct(g)?)?.frobenius_norm().powi(2);
        total_sq += t.frobenius_norm().powi(2);
    }
    let tucker_residual = if total_sq > 0.0 { (resid_sq / total_sq).sqrt() } else { 0.0 };

    let core_op = dmd::reduce(&dmd::build_snapshots(&core_vecs)?, cfg.dmd_rank)?;
    let full_rank_rule = match cfg.dmd_rank {
        DmdRank::Fixed(_) => DmdRank::Fixed(core_op.rank()),
        auto => auto,
    };
    let full_op = dmd::reduce(&dmd::build_snapshots(&full)?, full_rank_rule)?;

    let (opdiff, eigdiff) = if full_op.rank() == core_op.rank() {
        let denom = core_op.a_tilde.norm().max(f64::MIN_POSITIVE);
        let opdiff = (&full_op.a_tilde - &core_op.a_tilde).norm() / denom;
        let eigdiff = matched_eig_distance(&eig(&full_op.a_tilde)?.values, &eig(&core_op.a_tilde)?.values);
        (Some(opdiff), Some(eigdiff))
    } else {
        (None, None)
    };

    Ok(EquivalenceReport {
        opdiff,
        eigdiff,
        tucker_residual,
        rank_full: full_op.rank(),
        rank_core: core_op.rank(),
        tucker_ranks: model.ranks(),
    })
}
