use super::*;
use crate::linalg::matched_eig_distance;
use crate::synthetic::{self, linear_system, random_sequence, tucker_system};
use crate::tensor::ComplexMatrix;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: &ChannelTensor, b: &ChannelTensor) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm()
}

fn constant_sequence(len: usize) -> ChannelSequence {
    let h = synthetic::random_sequence([2, 3, 4], 1, 99).last().clone();
    ChannelSequence::new(vec![h; len], 5.0).unwrap()
}

/// Entry `e` evolves as `lambda_e^t`.
fn geometric_sequence(len: usize) -> (ChannelSequence, Vec<Complex64>) {
    let dims = [2, 2, 3];
    let lambdas: Vec<Complex64> = (0..12).map(|e| Complex64::from_polar(0.9 + 0.008 * e as f64, 0.3 * e as f64)).collect();
    let snaps = (0..len)
        .map(|t| ChannelTensor::new(dims, lambdas.iter().map(|l| l.powi(t as i32)).collect()).unwrap())
        .collect();
    (ChannelSequence::new(snaps, 5.0).unwrap(), lambdas)
}

#[test]
fn sequence_validation() {
    assert!(ChannelSequence::new(vec![], 5.0).is_err());
    let a = ChannelTensor::zeros([1, 1, 2]).unwrap();
    let b = ChannelTensor::zeros([1, 2, 1]).unwrap();
    assert!(ChannelSequence::new(vec![a.clone(), b], 5.0).is_err());
    assert!(ChannelSequence::new(vec![a.clone()], 0.0).is_err());
    let seq = ChannelSequence::new(vec![a.clone(), a], 5.0).unwrap();
    assert!(seq.window(3).is_err());
    assert_eq!(seq.window(2).unwrap().len(), 2);
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert!("prony".parse::<Method>().is_err());
}

#[test]
fn config_validation() {
    assert!(PredictorConfig::new(Method::Ar).with_ar_order(10).validate().is_err());
    assert!(PredictorConfig::new(Method::FullDmd).with_history(2).validate().is_err());
    assert!(PredictorConfig::new(Method::TuckerDmd).with_threshold(0.0).validate().is_err());
    assert!(PredictorConfig::new(Method::Zoh).with_threshold(0.0).validate().is_ok());
}

#[test]
fn zero_horizon_rejected() {
    let seq = constant_sequence(10);
    for m in Method::ALL {
        assert!(predict(&seq, &PredictorConfig::new(m), 0).is_err());
    }
}

#[test]
fn zoh_returns_last_snapshot() {
    let seq = random_sequence([2, 3, 4], 6, 1);
    for tau in [1, 4, 17] {
        assert_eq!(&predict_zoh(&seq, tau).unwrap(), seq.last());
    }
    let single = seq.prefix(1).unwrap();
    assert_eq!(&predict_zoh(&single, 3).unwrap(), single.last());
}

#[test]
fn every_method_holds_a_constant_channel() {
    let seq = constant_sequence(10);
    for m in Method::ALL {
        let f = forecast(&seq, &PredictorConfig::new(m), &[1, 5, 10]).unwrap();
        for p in &f.predictions {
            assert!(rel(p, seq.last()) <= 1e-8, "{m}: {}", rel(p, seq.last()));
        }
    }
}

#[test]
fn ar_on_geometric_entries_is_exact() {
    let (seq, lambdas) = geometric_sequence(12);
    let cfg = PredictorConfig::new(Method::Ar).with_ar_order(1);
    for tau in [1, 3, 10] {
        let got = predict_ar(&seq, &cfg, tau).unwrap();
        let t = (seq.len() - 1 + tau) as i32;
        let expect = ChannelTensor::new(seq.dims(), lambdas.iter().map(|l| l.powi(t)).collect()).unwrap();
        assert!(rel(&got, &expect) <= 1e-8);
    }
}

#[test]
fn ar2_entries_match_scalar_recursion() {
    // each entry follows its own AR(2) law; oracle runs the recursion directly
    let dims = [1, 2, 2];
    let laws = [(c(1.5, 0.0), c(-0.7, 0.0)), (c(0.2, 0.9), c(0.3, -0.1)), (c(1.1, 0.1), c(-0.4, 0.0)), (c(0.0, 1.0), c(0.5, 0.2))];
    let mut series: Vec<Vec<Complex64>> = laws
        .iter()
        .enumerate()
        .map(|(e, _)| vec![c(1.0, e as f64 * 0.3), c(-0.2 * e as f64, 0.7)])
        .collect();
    for (s, &(a1, a2)) in series.iter_mut().zip(&laws) {
        while s.len() < 13 {
            let n = s.len();
            s.push(a1 * s[n - 1] + a2 * s[n - 2]);
        }
    }
    let history_len = 10;
    let snaps = (0..history_len)
        .map(|t| ChannelTensor::new(dims, series.iter().map(|s| s[t]).collect()).unwrap())
        .collect();
    let seq = ChannelSequence::new(snaps, 5.0).unwrap();
    let cfg = PredictorConfig::new(Method::Ar).with_ar_order(2);
    let got = predict_ar(&seq, &cfg, 3).unwrap();
    let expect = ChannelTensor::new(dims, series.iter().map(|s| s[history_len - 1 + 3]).collect()).unwrap();
    assert!(rel(&got, &expect) <= 1e-8, "{}", rel(&got, &expect));
}

#[test]
fn ar_uses_only_the_window() {
    let (seq, lambdas) = geometric_sequence(30);
    let mut snaps = seq.snapshots().to_vec();
    snaps[0] = ChannelTensor::zeros(seq.dims()).unwrap();
    let damaged = ChannelSequence::new(snaps, 5.0).unwrap();
    let cfg = PredictorConfig::new(Method::Ar).with_ar_order(1);
    let got = predict_ar(&damaged, &cfg, 2).unwrap();
    let expect = ChannelTensor::new(seq.dims(), lambdas.iter().map(|l| l.powi(31)).collect()).unwrap();
    assert!(rel(&got, &expect) <= 1e-8);
}

#[test]
fn tucker_ar_exact_for_core_ar1_dynamics() {
    // fixed Tucker subspace, each core entry geometric
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
    let model = synthetic::random_tucker_model([3, 4, 5], [2, 2, 2], &mut rng);
    let lambdas: Vec<Complex64> = (0..8).map(|e| Complex64::from_polar(0.95, 0.4 * e as f64 + 0.1)).collect();
    // generic initial core so the first snapshot has full multilinear rank
    let init: Vec<Complex64> = (0..8).map(|_| synthetic::complex_normal(&mut rng)).collect();
    let core_at = |t: i32| {
        let entries = lambdas.iter().zip(&init).map(|(l, c)| c * l.powi(t)).collect();
        ChannelTensor::new([2, 2, 2], entries).unwrap()
    };
    let snaps = (0..10).map(|t| model.reconstruct(&core_at(t)).unwrap()).collect();
    let seq = ChannelSequence::new(snaps, 5.0).unwrap();
    // per-entry AR is basis dependent, so forecast in the generating basis
    let horizons = [1, 4];
    let out = tucker_ar_with_model(seq.window(10).unwrap(), 1, &horizons, model.clone()).unwrap();
    for (tau, got) in horizons.iter().zip(&out.predictions) {
        let expect = model.reconstruct(&core_at(9 + *tau as i32)).unwrap();
        assert!(rel(got, &expect) <= 1e-8);
    }
    // hosvd recovers the same subspaces from the first snapshot
    let cfg = PredictorConfig::new(Method::TuckerAr).with_ar_order(1);
    let fc = forecast(&seq, &cfg, &[1]).unwrap();
    assert_eq!(fc.tucker.unwrap().ranks(), [2, 2, 2]);
}

#[test]
fn tucker_ar_with_identity_factors_equals_ar() {
    let seq = random_sequence([2, 3, 4], 10, 4);
    let horizons = [1, 2, 5];
    let window = seq.window(10).unwrap();
    let identity = TuckerModel::identity(seq.dims()).unwrap();
    let via_tucker = tucker_ar_with_model(window, 3, &horizons, identity).unwrap();
    let direct = forecast(&seq, &PredictorConfig::new(Method::Ar), &horizons).unwrap();
    for (a, b) in via_tucker.predictions.iter().zip(&direct.predictions) {
        assert!(rel(a, b) <= 1e-8);
    }
}

#[test]
fn full_dmd_scaled_channel_is_exact() {
    let lambda = Complex64::from_polar(0.97, 0.4);
    let h0 = random_sequence([2, 3, 4], 1, 5).last().clone();
    let snaps = (0..10).map(|t| h0.scale(lambda.powi(t))).collect();
    let seq = ChannelSequence::new(snaps, 5.0).unwrap();
    let cfg = PredictorConfig::new(Method::FullDmd);
    for tau in [1, 5, 10] {
        let got = predict_full_dmd(&seq, &cfg, tau).unwrap();
        let expect = h0.scale(lambda.powi(9 + tau as i32));
        assert!(rel(&got, &expect) <= 1e-8);
    }
}

#[test]
fn full_dmd_matches_explicit_operator_propagation() {
    let sys = linear_system([2, 4, 8], 5, 10, 6);
    let cfg = PredictorConfig::new(Method::FullDmd);
    let f = forecast(&sys.sequence, &cfg, &[1, 2, 3, 4, 5]).unwrap();
    let mut h = sys.sequence.last().vec();
    for p in &f.predictions {
        h = &sys.operator * h;
        let expect = ChannelTensor::unvec(&h, sys.sequence.dims()).unwrap();
        assert!(rel(p, &expect) <= 1e-6);
    }
    let model = f.dmd.unwrap();
    assert_eq!(model.rank(), 5);
    assert!(matched_eig_distance(&model.eigenvalues, &sys.spectrum) < 1e-8);
}

#[test]
fn tucker_dmd_exact_in_fixed_subspace() {
    let sys = tucker_system([3, 4, 6], [2, 2, 2], 10, 7);
    let cfg = PredictorConfig::new(Method::TuckerDmd);
    let f = forecast(&sys.sequence, &cfg, &[1, 2, 3, 4, 5]).unwrap();
    assert_eq!(f.tucker.as_ref().unwrap().ranks(), [2, 2, 2]);
    for (tau, p) in (1..=5).zip(&f.predictions) {
        let expect = sys.future(tau).unwrap();
        assert!(rel(p, &expect) <= 1e-6, "tau {tau}: {}", rel(p, &expect));
    }
}

#[test]
fn tucker_dmd_with_full_ranks_equals_full_dmd() {
    let seq = random_sequence([3, 4, 5], 10, 8);
    let horizons: Vec<usize> = (1..=10).collect();
    let t = forecast(&seq, &PredictorConfig::new(Method::TuckerDmd).with_threshold(1e-16), &horizons).unwrap();
    assert_eq!(t.tucker.as_ref().unwrap().ranks(), [3, 4, 5]);
    let full = forecast(&seq, &PredictorConfig::new(Method::FullDmd), &horizons).unwrap();
    for (a, b) in t.predictions.iter().zip(&full.predictions) {
        assert!(rel(a, b) <= 1e-8, "{}", rel(a, b));
    }
}

#[test]
fn predictors_are_bit_deterministic() {
    let seq = random_sequence([2, 3, 4], 12, 9);
    for m in Method::ALL {
        let cfg = PredictorConfig::new(m);
        assert_eq!(predict(&seq, &cfg, 3).unwrap(), predict(&seq, &cfg, 3).unwrap());
    }
}

#[test]
fn predictors_do_not_mutate_input() {
    let seq = random_sequence([2, 3, 4], 12, 10);
    let copy = seq.clone();
    for m in Method::ALL {
        predict(&seq, &PredictorConfig::new(m), 2).unwrap();
    }
    assert_eq!(seq, copy);
}

#[test]
fn equivalence_on_exact_tucker_data() {
    let sys = tucker_system([4, 8, 32], [2, 2, 4], 10, 11);
    let report = verify_operator_equivalence(&sys.sequence, &PredictorConfig::new(Method::TuckerDmd)).unwrap();
    assert_eq!(report.tucker_ranks, [2, 2, 4]);
    assert!(report.tucker_residual < 1e-12);
    assert_eq!(report.rank_full, report.rank_core);
    assert!(report.opdiff.unwrap() <= 1e-8, "{report:?}");
    assert!(report.eigdiff.unwrap() <= 1e-8, "{report:?}");
}

#[test]
fn equivalence_breaks_with_large_tucker_residual() {
    // factors fitted to a rank-one first snapshot, later snapshots unrelated
    let mut snaps = random_sequence([3, 4, 5], 10, 12).into_snapshots();
    let a = ComplexMatrix::from_fn(3, 1, |i, _| c(1.0 + i as f64, 0.5));
    let b = ComplexMatrix::from_fn(4, 1, |i, _| c(0.3, i as f64));
    let cc = ComplexMatrix::from_fn(5, 1, |i, _| c(-1.0, 0.2 * i as f64));
    snaps[0] = ChannelTensor::from_fn([3, 4, 5], |i, j, k| a[(i, 0)] * b[(j, 0)] * cc[(k, 0)]).unwrap();
    let seq = ChannelSequence::new(snaps, 5.0).unwrap();
    let cfg = PredictorConfig::new(Method::TuckerDmd).with_dmd_rank(DmdRank::Fixed(1));
    let report = verify_operator_equivalence(&seq, &cfg).unwrap();
    assert_eq!(report.tucker_ranks, [1, 1, 1]);
    assert!(report.tucker_residual > 0.5);
    assert!(report.opdiff.unwrap() > 1e-8);
}

#[test]
fn equivalence_reports_rank_mismatch_as_incomparable() {
    let mut snaps = random_sequence([3, 4, 5], 10, 13).into_snapshots();
    let first = snaps[0].clone();
    let (model, _) = hosvd(&first, 0.9).unwrap();
    // cores can only carry rank-one-per-mode content; the full data has rank 9
    for s in snaps.iter_mut().skip(1) {
        *s = s.add(&model.project(s).unwrap()).unwrap();
    }
    let seq = ChannelSequence::new(snaps, 5.0).unwrap();
    let cfg = PredictorConfig::new(Method::TuckerDmd).with_threshold(0.9);
    let report = verify_operator_equivalence(&seq, &cfg).unwrap();
    assert!(report.rank_core < report.rank_full);
    assert!(!report.comparable());
}
