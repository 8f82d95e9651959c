//! Sequences with exactly known structure, for checking predictors against
//! closed-form answers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::predictors::ChannelSequence;
use crate::tensor::{ChannelTensor, ComplexMatrix, ComplexVector, Dims};
use crate::tucker::TuckerModel;

pub fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_tensor<R: Rng>(dims: Dims, rng: &mut R) -> ChannelTensor {
    ChannelTensor::from_fn(dims, |_, _, _| complex_normal(rng)).expect("valid dims")
}

/// `n x k` matrix with orthonormal columns (`k <= n`).
pub fn random_orthonormal<R: Rng>(n: usize, k: usize, rng: &mut R) -> ComplexMatrix {
    random_matrix(n, k, rng).qr().q().columns(0, k).into_owned()
}

pub fn random_tucker_model<R: Rng>(dims: Dims, ranks: Dims, rng: &mut R) -> TuckerModel {
    TuckerModel::new(
        random_orthonormal(dims[0], ranks[0], rng),
        random_orthonormal(dims[1], ranks[1], rng),
        random_orthonormal(dims[2], ranks[2], rng),
    )
    .expect("orthonormal by construction")
}

/// `count` eigenvalues with magnitudes in `[0.9, 1.0]` and well separated
/// phases.
pub fn stable_spectrum<R: Rng>(count: usize, rng: &mut R) -> Vec<Complex64> {
    let offset: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    (0..count)
        .map(|k| {
            let radius = rng.random_range(0.9..1.0);
            let phase = offset + std::f64::consts::TAU * k as f64 / count as f64 + rng.random_range(-0.2..0.2);
            Complex64::from_polar(radius, phase)
        })
        .collect()
}

/// Diagonalizable `n x n` operator `B diag(spectrum) B^-1`.
pub fn operator_with_spectrum<R: Rng>(spectrum: &[Complex64], rng: &mut R) -> ComplexMatrix {
    let n = spectrum.len();
    loop {
        let basis = random_matrix(n, n, rng);
        if let Some(inv) = basis.clone().try_inverse() {
            let d = ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(spectrum));
            return basis * d * inv;
        }
    }
}

/// Sequence lying exactly in a fixed Tucker subspace whose cores evolve as
/// `g_{t+1} = A g_t`.
#[derive(Debug, Clone)]
pub struct TuckerSystem {
    pub sequence: ChannelSequence,
    pub model: TuckerModel,
    pub core_operator: ComplexMatrix,
    pub spectrum: Vec<Complex64>,
}

impl TuckerSystem {
    /// The exact channel `steps` snapshots past the end of the sequence.
    pub fn future(&self, steps: usize) -> Result<ChannelTensor> {
        let last = self.model.project_core(self.sequence.last())?.vec();
        let mut g = last;
        for _ in 0..steps {
            g = &self.core_operator * g;
        }
        self.model.reconstruct(&ChannelTensor::unvec(&g, self.model.ranks())?)
    }
}

pub fn tucker_system(dims: Dims, ranks: Dims, len: usize, seed: u64) -> TuckerSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = random_tucker_model(dims, ranks, &mut rng);
    let core_len: usize = ranks.iter().product();
    let spectrum = stable_spectrum(core_len, &mut rng);
    let core_operator = operator_with_spectrum(&spectrum, &mut rng);
    let mut g = ComplexVector::from_fn(core_len, |_, _| complex_normal(&mut rng));
    let mut snapshots = Vec::with_capacity(len);
    for _ in 0..len {
        let core = ChannelTensor::unvec(&g, ranks).expect("core dims");
        snapshots.push(model.reconstruct(&core).expect("ranks match"));
        g = &core_operator * g;
    }
    TuckerSystem {
        sequence: ChannelSequence::new(snapshots, 5.0).expect("non-empty"),
        model,
        core_operator,
        spectrum,
    }
}

/// Sequence with `vec(H_{t+1}) = A vec(H_t)` for a rank-`rank` operator `A`,
/// started inside the range of `A`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub sequence: ChannelSequence,
    pub operator: ComplexMatrix,
    pub spectrum: Vec<Complex64>,
}

pub fn linear_system(dims: Dims, rank: usize, len: usize, seed: u64) -> LinearSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = dims.iter().product();
    let basis = random_matrix(n, rank, &mut rng);
    let spectrum = stable_spectrum(rank, &mut rng);
    let d = ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(&spectrum));
    let gram_inv = (basis.adjoint() * &basis).try_inverse().expect("full column rank");
    let pinv = gram_inv * basis.adjoint();
    let operator = &basis * d * pinv;
    let mut h = &basis * ComplexVector::from_fn(rank, |_, _| complex_normal(&mut rng));
    let mut snapshots = Vec::with_capacity(len);
    for _ in 0..len {
        snapshots.push(ChannelTensor::unvec(&h, dims).expect("dims"));
        h = &operator * h;
    }
    LinearSystem {
        sequence: ChannelSequence::new(snapshots, 5.0).expect("non-empty"),
        operator,
        spectrum,
    }
}

/// Independent complex Gaussian tensors.
pub fn random_sequence(dims: Dims, len: usize, seed: u64) -> ChannelSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let snapshots = (0..len).map(|_| random_tensor(dims, &mut rng)).collect();
    ChannelSequence::new(snapshots, 5.0).expect("non-empty")
}
