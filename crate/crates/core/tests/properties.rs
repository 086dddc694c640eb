use proptest::prelude::*;

use iqchain::multi_type::joint_matrices;
use iqchain::{
    analyze, arrival_matrix_1d, consumption_matrix_1d, state_space_size, ArrivalDist, InstructionType, ModelConfig,
    Readiness, StateSpace,
};

fn type_strategy() -> impl Strategy<Value = (f64, f64, usize)> {
    (0.0..=4.0f64, 0.0..=1.0f64, 1usize..=4)
}

fn model_strategy() -> impl Strategy<Value = ModelConfig> {
    (1usize..=10, prop::collection::vec(type_strategy(), 1..=3))
        .prop_filter("needs some arrivals", |(_, types)| types.iter().map(|t| t.0).sum::<f64>() > 0.0)
        .prop_map(|(n, types)| {
            let types = types
                .into_iter()
                .enumerate()
                .map(|(t, (mu, rho, fu))| InstructionType::poisson(format!("t{t}"), mu, rho, fu).unwrap())
                .collect();
            ModelConfig::new(n, types).unwrap()
        })
}

/// Issue outcome distribution from `i` residents by listing every readiness pattern.
fn enumerate_issue(i: usize, fu: usize, rho: f64) -> Vec<f64> {
    let mut row = vec![0.0; i + 1];
    for mask in 0u32..(1 << i) {
        let ready = mask.count_ones() as usize;
        let p = rho.powi(ready as i32) * (1.0 - rho).powi((i - ready) as i32);
        row[i - ready.min(fu)] += p;
    }
    row
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn every_matrix_is_row_stochastic(model in model_strategy()) {
        let space = model.state_space().unwrap();
        let (c, a) = joint_matrices(&model, &space).unwrap();
        prop_assert!(c.max_row_deviation() <= 1e-9);
        prop_assert!(a.max_row_deviation() <= 1e-9);
        for t in &model.types {
            let c1 = consumption_matrix_1d(model.capacity, t.fu, t.rho);
            let a1 = arrival_matrix_1d(model.capacity, &t.arrival);
            prop_assert!(c1.max_row_deviation() <= 1e-9);
            prop_assert!(a1.max_row_deviation() <= 1e-9);
        }
        let p = iqchain::complete_matrix(&c, &a).unwrap();
        prop_assert!(p.max_row_deviation() <= 1e-9);
        for row in p.rows() {
            prop_assert!(row.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn accepted_solves_are_stationary(model in model_strategy()) {
        if let Ok(analysis) = analyze(&model) {
            let r = &analysis.report;
            prop_assert!(r.residual <= 1e-10);
            let recomputed = analysis.complete.left_multiply(&r.pi);
            for (a, b) in recomputed.iter().zip(&r.pi) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
            prop_assert!((r.pi.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!((r.l_total - r.l_per_type.iter().sum::<f64>()).abs() <= 1e-9);
            prop_assert!(r.l_total >= 0.0 && r.l_total <= model.capacity as f64 + 1e-9);
        }
    }

    #[test]
    fn one_type_joint_equals_single((n, (mu, rho, fu)) in (1usize..=10, type_strategy())) {
        prop_assume!(mu > 0.0);
        let model = ModelConfig::new(n, vec![InstructionType::poisson("x", mu, rho, fu).unwrap()]).unwrap();
        let space = model.state_space().unwrap();
        let (c, a) = joint_matrices(&model, &space).unwrap();
        let rho = Readiness::new(rho).unwrap();
        let c1 = consumption_matrix_1d(n, fu, rho);
        let a1 = arrival_matrix_1d(n, &ArrivalDist::poisson(mu).unwrap());
        for i in 0..=n {
            for j in 0..=n {
                prop_assert!((c.get(i, j) - c1.get(i, j)).abs() <= 1e-12);
                prop_assert!((a.get(i, j) - a1.get(i, j)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn consumption_rows_match_enumeration(fu in 1usize..=4, rho in 0.0..=1.0f64) {
        let c = consumption_matrix_1d(10, fu, Readiness::new(rho).unwrap());
        for i in 0..=10 {
            let expected = enumerate_issue(i, fu, rho);
            for (j, e) in expected.iter().enumerate() {
                prop_assert!((c.get(i, j) - e).abs() <= 1e-12, "i={} j={}", i, j);
            }
            for j in i + 1..=10 {
                prop_assert_eq!(c.get(i, j), 0.0);
            }
        }
    }
}

/// Every tuple with entries summing to at most `n`, by nested counting.
fn brute_force_states(types: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut counts = vec![0usize; types];
    loop {
        if counts.iter().sum::<usize>() <= n {
            out.push(counts.clone());
        }
        let mut k = types;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if counts[k] < n {
                counts[k] += 1;
                break;
            }
            counts[k] = 0;
        }
    }
}

#[test]
fn state_space_is_a_bijection() {
    for types in 1..=4 {
        for n in 1..=8 {
            let expected = brute_force_states(types, n);
            let size = state_space_size(types, n).unwrap();
            assert_eq!(size as usize, expected.len(), "T={types} N={n}");
            let space = StateSpace::new(types, n).unwrap();
            assert_eq!(space.len(), expected.len());
            for (k, counts) in expected.iter().enumerate() {
                assert_eq!(space.state(k).counts(), counts.as_slice());
                assert_eq!(space.index_of_counts(counts), Some(k));
                assert_eq!(space.is_boundary(k), counts.iter().sum::<usize>() == n);
            }
        }
    }
}
