use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use num_complex::Complex64;
use tdmd_core::evaluation::nmse;
use tdmd_core::synthetic::{random_matrix, random_tensor};
use tdmd_core::tensor::{kron, ChannelTensor, Mode};

fn dims() -> impl Strategy<Value = [usize; 3]> {
    (1usize..5, 1usize..5, 1usize..5).prop_map(|(a, b, c)| [a, b, c])
}

fn max_abs_diff(a: &ChannelTensor, b: &ChannelTensor) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn vec_and_unfold_round_trip(d in dims(), seed in any::<u64>()) {
        let t = random_tensor(d, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(&ChannelTensor::unvec(&t.vec(), d).unwrap(), &t);
        for mode in Mode::ALL {
            prop_assert_eq!(&ChannelTensor::fold(&t.unfold(mode), mode, d).unwrap(), &t);
        }
    }

    #[test]
    fn mode_products_on_distinct_modes_commute(d in dims(), rows in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tensor(d, &mut rng);
        let a = random_matrix(rows[0], d[0], &mut rng);
        let c = random_matrix(rows[2], d[2], &mut rng);
        let ac = t.mode_product(&a, Mode::Rx).unwrap().mode_product(&c, Mode::Sc).unwrap();
        let ca = t.mode_product(&c, Mode::Sc).unwrap().mode_product(&a, Mode::Rx).unwrap();
        prop_assert!(max_abs_diff(&ac, &ca) < 1e-10);
    }

    #[test]
    fn multilinear_product_is_kronecker_product(d in dims(), rows in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tensor(d, &mut rng);
        let a = random_matrix(rows[0], d[0], &mut rng);
        let b = random_matrix(rows[1], d[1], &mut rng);
        let c = random_matrix(rows[2], d[2], &mut rng);
        let lhs = t.multilinear(&a, &b, &c).unwrap();
        let rhs = ChannelTensor::unvec(&(kron(&c, &kron(&b, &a)) * t.vec()), rows).unwrap();
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn nmse_is_invariant_to_common_complex_scaling(
        d in dims(),
        seed in any::<u64>(),
        re in -10.0f64..10.0,
        im in -10.0f64..10.0,
    ) {
        prop_assume!(re.hypot(im) > 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_tensor(d, &mut rng);
        let g = random_tensor(d, &mut rng);
        let s = Complex64::new(re, im);
        let base = nmse(&h, &g).unwrap();
        let scaled = nmse(&h.scale(s), &g.scale(s)).unwrap();
        prop_assert!((scaled - base).abs() <= 1e-12 * base);
    }
}
