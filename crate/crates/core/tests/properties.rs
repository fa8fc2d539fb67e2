mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use qmc_compress::compression::{
    compress, weights_general_fft, weights_naive, weights_rectangle, weights_step_cross, Algorithm, Coefficients,
    Dataset,
};
use qmc_compress::index_sets::{contains, enumerate_cross, enumerate_step_cross, Family, IndexSet};
use qmc_compress::io;
use qmc_compress::lattice::{worst_case_error, LatticeRule, ProductWeights};
use qmc_compress::model::{compressed_loss, exact_loss, Regularizer, TrigModel};

const PRIMES: [u64; 12] = [5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43];

fn gamma_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..1.0, d).prop_map(|mut g| {
        g.sort_by(|a, b| b.total_cmp(a));
        g
    })
}

fn dataset_strategy(d: usize) -> impl Strategy<Value = Dataset> {
    (1usize..12).prop_flat_map(move |n| {
        (prop::collection::vec(0.0f64..1.0, n * d), prop::collection::vec(-2.0f64..2.0, n))
            .prop_map(move |(x, y)| Dataset::from_flat(d, x, y).unwrap())
    })
}

fn rule_strategy(d: usize) -> impl Strategy<Value = LatticeRule> {
    prop::sample::select(PRIMES.to_vec()).prop_flat_map(move |l| {
        prop::collection::vec(1..l, d).prop_map(move |g| LatticeRule::new(l, g).unwrap())
    })
}

fn max_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.norm()));
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn named_sets_are_symmetric_and_agree_with_membership(
        d in 1usize..4,
        alpha in 0.6f64..2.0,
        nu in 1.0f64..40.0,
        m in 0u32..6,
        seed in any::<u64>(),
    ) {
        let gamma = ProductWeights::geometric(0.3 + (seed % 7) as f64 / 10.0, d).unwrap();
        for family in [Family::ContinuousCross { nu }, Family::Rectangle { nu }, Family::StepCross { m }] {
            let Ok(k) = IndexSet::enumerate(family, alpha, &gamma, 20_000) else { continue };
            prop_assert!(k.is_symmetric());
            prop_assert!(k.contains(&vec![0; d]));
            for f in k.iter() {
                prop_assert!(contains(k.family(), alpha, &gamma, f));
                let neg: Vec<i64> = f.iter().map(|v| -v).collect();
                prop_assert!(k.contains(&neg));
            }
            let sorted = k.iter().collect::<Vec<_>>();
            prop_assert!(sorted.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn cross_matches_independent_enumeration(d in 1usize..4, alpha in 0.6f64..2.0, nu in 1.0f64..60.0, gamma in gamma_strategy(3)) {
        let gamma = gamma[..d].to_vec();
        let expect = common::cross_points(alpha, &gamma, nu);
        if expect.len() > 20_000 {
            return Ok(());
        }
        let k = enumerate_cross(alpha, &ProductWeights::new(gamma).unwrap(), d, nu).unwrap();
        prop_assert_eq!(k.iter().map(<[i64]>::to_vec).collect::<Vec<_>>(), expect);
    }

    #[test]
    fn step_cross_matches_oracle_and_nests(d in 1usize..4, alpha in 0.6f64..2.0, m in 0u32..6, gamma in gamma_strategy(3)) {
        let gamma = gamma[..d].to_vec();
        let pw = ProductWeights::new(gamma.clone()).unwrap();
        let Ok(q) = IndexSet::enumerate(Family::StepCross { m }, alpha, &pw, 20_000) else { return Ok(()) };
        let Ok(next) = IndexSet::enumerate(Family::StepCross { m: m + 1 }, alpha, &pw, 40_000) else { return Ok(()) };
        for k in q.iter() {
            prop_assert!(common::in_step_cross(alpha, &gamma, k, m));
            prop_assert!(next.contains(k));
            prop_assert!(common::r_alpha(alpha, &gamma, k) <= 2f64.powi(m as i32) * (1.0 + 1e-12));
        }
        if m + 1 >= d as u32 {
            let inner = enumerate_cross(alpha, &pw, d, 2f64.powi(m as i32 + 1 - d as i32)).unwrap();
            for k in inner.iter() {
                prop_assert!(q.contains(k), "{:?} in inner cross but not in Q_{}", k, m);
            }
        }
    }

    #[test]
    fn cross_grows_with_nu(d in 1usize..4, alpha in 0.6f64..2.0, nu in 1.0f64..30.0, extra in 0.0f64..30.0) {
        let gamma = ProductWeights::ones(d);
        let (Ok(small), Ok(large)) = (
            IndexSet::enumerate(Family::ContinuousCross { nu }, alpha, &gamma, 20_000),
            IndexSet::enumerate(Family::ContinuousCross { nu: nu + extra }, alpha, &gamma, 20_000),
        ) else { return Ok(()) };
        prop_assert!(small.iter().all(|k| large.contains(k)));
    }

    #[test]
    fn fast_weights_match_naive(
        (data, rule) in (1usize..4).prop_flat_map(|d| (dataset_strategy(d), rule_strategy(d))),
        alpha in 0.6f64..2.0,
        nu in 1.0f64..20.0,
        m in 0u32..5,
    ) {
        let d = data.dim();
        let gamma = ProductWeights::geometric(0.7, d).unwrap();
        for family in [Family::ContinuousCross { nu }, Family::Rectangle { nu }, Family::StepCross { m }] {
            let Ok(k) = IndexSet::enumerate(family.clone(), alpha, &gamma, 3000) else { continue };
            let naive = weights_naive(&data, Coefficients::Responses, &rule, &k).unwrap();
            let general = weights_general_fft(&data, Coefficients::Responses, &rule, &k).unwrap();
            prop_assert!(max_dev(&general, &naive) < 1e-10);
            let special = match family {
                Family::Rectangle { nu } => Some(weights_rectangle(&data, Coefficients::Responses, &rule, alpha, &gamma, nu).unwrap()),
                Family::StepCross { m } => Some(weights_step_cross(&data, Coefficients::Responses, &rule, alpha, &gamma, m).unwrap()),
                _ => None,
            };
            if let Some(w) = special {
                let w: Vec<Complex64> = w.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
                prop_assert!(max_dev(&w, &naive) < 1e-10);
            }
        }
    }

    #[test]
    fn weights_are_linear_in_coefficients(
        (data, rule) in (1usize..3).prop_flat_map(|d| (dataset_strategy(d), rule_strategy(d))),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let gamma = ProductWeights::ones(data.dim());
        let k = IndexSet::enumerate(Family::StepCross { m: 3 }, 1.0, &gamma, 10_000).unwrap();
        let mix: Vec<f64> = data.responses().iter().map(|y| a * y + b).collect();
        let w = weights_general_fft(&data, Coefficients::Custom(&mix), &rule, &k).unwrap();
        let wy = weights_general_fft(&data, Coefficients::Responses, &rule, &k).unwrap();
        let w1 = weights_general_fft(&data, Coefficients::Ones, &rule, &k).unwrap();
        let combined: Vec<Complex64> = wy.iter().zip(&w1).map(|(y, o)| a * y + b * o).collect();
        prop_assert!(max_dev(&w, &combined) < 1e-12);
    }

    #[test]
    fn lattice_evaluation_matches_pointwise(
        rule in (1usize..4).prop_flat_map(rule_strategy),
        terms in prop::collection::vec((prop::collection::vec(-60i64..60, 3), -1.0f64..1.0, -1.0f64..1.0), 1..12),
    ) {
        let d = rule.dim();
        let mut seen = std::collections::BTreeSet::new();
        let (freqs, theta): (Vec<Vec<i64>>, Vec<Complex64>) = terms
            .into_iter()
            .map(|(k, re, im)| (k[..d].to_vec(), Complex64::new(re, im)))
            .filter(|(k, _)| seen.insert(k.clone()))
            .unzip();
        let model = TrigModel::new(freqs.clone(), theta.clone()).unwrap();
        let values = model.eval_on_lattice(&rule).unwrap();
        for (l, v) in values.iter().enumerate() {
            let expect = common::trig_eval(&freqs, &theta, &rule.point(l as u64));
            prop_assert!((v - expect).norm() < 1e-11);
        }
    }

    #[test]
    fn worst_case_error_matches_bernoulli_form(rule in (1usize..4).prop_flat_map(rule_strategy), alpha in 1u32..3, gamma in gamma_strategy(3)) {
        let gamma = gamma[..rule.dim()].to_vec();
        let got = worst_case_error(&rule, alpha as f64, &ProductWeights::new(gamma.clone()).unwrap()).unwrap();
        let expect = common::squared_worst_case_error(rule.size(), rule.generator(), alpha, &gamma);
        prop_assert!((got - expect).abs() <= 1e-10 * expect.abs().max(1.0));
    }

    #[test]
    fn compressed_loss_is_exact_without_aliasing(data in dataset_strategy(1), c in -1.0f64..1.0, re in -1.0f64..1.0, im in -1.0f64..1.0, lambda in 0.0f64..1.0) {
        // f has frequencies in [−1, 1], f² in [−2, 2]; the lattice has more than 4 points.
        let f = TrigModel::real(
            vec![vec![-1], vec![0], vec![1]],
            vec![Complex64::new(re, -im), Complex64::new(c, 0.0), Complex64::new(re, im)],
        ).unwrap();
        let k = IndexSet::enumerate(Family::Rectangle { nu: 4.0 }, 1.0, &ProductWeights::ones(1), 10).unwrap();
        let rule = LatticeRule::new(7, vec![1]).unwrap();
        let w = compress(&data, &rule, &k, Algorithm::Rectangle).unwrap();
        let exact = exact_loss(&f, &data, &Regularizer::Ridge(None), lambda).unwrap();
        let comp = compressed_loss(&f, &w, &rule, &Regularizer::Ridge(None), lambda).unwrap();
        prop_assert!((exact.value - comp.value).abs() < 1e-11);
        prop_assert!((exact.cross - comp.cross).abs() < 1e-11);
    }

    #[test]
    fn weight_and_dataset_serialisation_round_trip(
        (data, rule) in (1usize..3).prop_flat_map(|d| (dataset_strategy(d), rule_strategy(d))),
        m in 0u32..4,
    ) {
        let k = enumerate_step_cross(1.0, &ProductWeights::ones(data.dim()), data.dim(), m).unwrap();
        let w = compress(&data, &rule, &k, Algorithm::StepCross).unwrap();
        let back = io::weights_from_json(&io::weights_to_json(&w).unwrap()).unwrap();
        prop_assert_eq!(&back, &w);
        let (xz, xyz) = io::decode_w64(&io::encode_w64(&w.w_xz, &w.w_xyz).unwrap()).unwrap();
        prop_assert_eq!(xz.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), w.w_xz.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(xyz.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), w.w_xyz.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(io::decode_matrix(&io::encode_matrix(&data)).unwrap(), data);
    }

    #[test]
    fn base64_round_trip_is_bitwise(values in prop::collection::vec(any::<f64>(), 0..40)) {
        let back = io::decode_f64s(&io::encode_f64s(&values)).unwrap();
        prop_assert_eq!(back.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}
