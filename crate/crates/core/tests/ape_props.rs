mod common;

use common::*;
use proptest::prelude::*;
use psi_core::ape::adaptive_hardness;
use psi_core::envs::SeededSampler;
use psi_core::{
    ape_fb_adapt_run, ape_fb_run, complexity_profile, empirical_pareto_set, opt_set, ApeConfig, BanditInstance,
    EmpiricalState, MeanMatrix, NoiseSpec, PsiError, Sampler,
};

/// Keeps every draw so the final empirical state can be rebuilt.
struct Recording {
    inner: SeededSampler,
    draws: Vec<(usize, Vec<f64>)>,
}

impl Sampler<f64> for Recording {
    fn arms(&self) -> usize {
        Sampler::<f64>::arms(&self.inner)
    }

    fn dims(&self) -> usize {
        Sampler::<f64>::dims(&self.inner)
    }

    fn sample_into(&mut self, arm: usize, out: &mut [f64]) -> Result<(), PsiError> {
        self.inner.sample_into(arm, out)?;
        self.draws.push((arm, out.to_vec()));
        Ok(())
    }
}

fn noisy(rows: &[Vec<f64>], sigma: f64) -> BanditInstance {
    BanditInstance::new(
        MeanMatrix::new(rows.to_vec()).unwrap(),
        NoiseSpec::isotropic(sigma, rows[0].len()).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_budget_and_final_classification(
        rows in instance_strategy(6, 3),
        seed in any::<u64>(),
        a in prop_oneof![Just(0.0), 0.0..50.0f64],
        extra in 0u64..300,
    ) {
        let arms = rows.len();
        let budget = arms as u64 + extra;
        let inst = noisy(&rows, 0.4);
        let mut s = Recording { inner: SeededSampler::new(&inst, seed, 3), draws: Vec::new() };
        let rec = ape_fb_run::<f64, _>(&mut s, &ApeConfig::fixed(a, budget).unwrap()).unwrap();
        prop_assert_eq!(s.draws.len() as u64, budget);
        prop_assert_eq!(rec.samples_used, budget);

        let mut state = EmpiricalState::<f64>::new(arms, rows[0].len());
        for (arm, x) in &s.draws {
            state.record(*arm, x);
        }
        prop_assert!(state.pull_counts().iter().all(|&n| n >= 1));
        let all: Vec<usize> = (0..arms).collect();
        prop_assert_eq!(rec.recommended, empirical_pareto_set(&state, &all).unwrap());
    }

    #[test]
    fn adaptive_run_uses_exact_budget(rows in instance_strategy(5, 2), seed in any::<u64>(), extra in 1u64..200) {
        let arms = rows.len();
        let budget = arms as u64 + extra;
        let mut s = SeededSampler::new(&noisy(&rows, 0.3), seed, 0);
        let rec = ape_fb_adapt_run::<f64, _>(&mut s, budget, 1e-3).unwrap();
        prop_assert_eq!(rec.samples_used, budget);
    }

    #[test]
    fn zero_bonus_opt_set_is_empirical_pareto_set(rows in instance_strategy(8, 4), pulls in 1u64..20) {
        let theta = MeanMatrix::new(rows.clone()).unwrap();
        let state = EmpiricalState::from_means(&theta, pulls);
        let all: Vec<usize> = (0..rows.len()).collect();
        let zeros = vec![0.0; rows.len()];
        prop_assert_eq!(opt_set(&state, &zeros).unwrap(), empirical_pareto_set(&state, &all).unwrap());
        prop_assert_eq!(opt_set(&state, &zeros).unwrap(), brute_pareto(&rows));
    }

    #[test]
    fn plug_in_hardness_is_h(rows in instance_strategy(8, 4)) {
        let theta = MeanMatrix::new(rows).unwrap();
        let h = complexity_profile(&theta).unwrap().h1;
        let state = EmpiricalState::from_means(&theta, 1);
        // the floor sits far below every gap of a continuous draw
        let got = adaptive_hardness(&state, 1e-300).unwrap();
        prop_assert!(rel_close(got, h, 1e-12), "{} vs {}", got, h);
    }

    #[test]
    fn noiseless_runs_are_exact(rows in instance_strategy(6, 3), a in 0.0..10.0f64) {
        let arms = rows.len();
        let mut s = ExactSampler::new(rows.clone());
        let rec = ape_fb_run::<f64, _>(&mut s, &ApeConfig::fixed(a, 20 * arms as u64).unwrap()).unwrap();
        prop_assert_eq!(rec.recommended, brute_pareto(&rows));
    }
}
