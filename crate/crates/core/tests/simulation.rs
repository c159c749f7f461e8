mod common;

use common::*;
use nonprob_extend::rng::stream;
use nonprob_extend::simulation::*;
use nonprob_extend::*;
use rand::Rng;

#[test]
fn mse_matches_loop_oracle() {
    let mut rng = stream(70, 0);
    for len in 1..10 {
        let a: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mut total = 0.0;
        for i in 0..len {
            total += (a[i] - b[i]) * (a[i] - b[i]);
        }
        assert!((mse(&a, &b).unwrap() - total).abs() < 1e-12);
    }
    assert_eq!(mse(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 5.0);
    assert_eq!(mse(&[1.0], &[1.0, 2.0]).unwrap_err().code(), "E_DIMENSION");
    let truth = [1.0, 1.0];
    assert_eq!(relative_mse(&[3.0, -1.0], &[2.0, 0.0], &truth).unwrap(), RelativeMse::Ratio(4.0));
    assert_eq!(relative_mse(&[3.0, -1.0], &truth, &truth).unwrap(), RelativeMse::ExactRecovery);
}

#[test]
fn polluted_part_of_setting_a_has_shifted_slope() {
    let data = gen_scenario(&ScenarioSpec::setting_a().with_seed(71)).unwrap();
    let polluted: Vec<usize> = (0..data.target_flags.len()).filter(|&i| !data.target_flags[i]).collect();
    assert_eq!(polluted.len(), 200);
    let beta = ols(&data.nonprob_sample.select(&polluted));
    assert!((beta[1] + 1.0).abs() < 0.3, "slope {}", beta[1]);
    let x_mean = data.nonprob_sample.select(&polluted).predictors().column(0).mean();
    assert!((x_mean - 2.0).abs() < 0.3);
}

#[test]
fn empty_nonprob_sample_when_sizes_are_zero() {
    let data = gen_scenario(&ScenarioSpec::setting_1().with_sizes(40, 0, 0)).unwrap();
    assert_eq!(data.nonprob_sample.n(), 0);
    assert!(data.target_flags.is_empty());
}

#[test]
fn unshifted_pollution_is_indistinguishable() {
    let mut spec = ScenarioSpec::setting_1().with_seed(72);
    spec.pollution_mode = PollutionMode::Random { sigma_loc: 0.0, sigma_par: 0.0 };
    spec.noise_var_polluted = spec.noise_var_target_np;
    let report = run_study(&spec, &ExtensionConfig::default(), 100, false).unwrap();
    let (hits, fp) = (report.mean_of("hits"), report.mean_of("false_positives"));
    assert!((hits - fp).abs() < 0.15, "hits {hits} fp {fp}");

    let slopes: Vec<f64> = (0..100)
        .map(|i| {
            let data = gen_replication(&spec, i).unwrap();
            let ids: Vec<usize> = (0..data.target_flags.len()).filter(|&k| !data.target_flags[k]).collect();
            ols(&data.nonprob_sample.select(&ids))[2]
        })
        .collect();
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    assert!((mean - spec.beta0[2]).abs() < 0.02, "{mean}");
}

#[test]
fn aggregates_recompute_from_records() {
    let report = run_study(&ScenarioSpec::setting_a().with_seed(73), &ExtensionConfig::default(), 30, false).unwrap();
    assert_eq!(report.per_replication.len(), 30);
    for name in METRICS {
        let values: Vec<f64> = report.per_replication.iter().filter_map(|r| r.metric(name)).collect();
        let m = values.iter().sum::<f64>() / values.len() as f64;
        let agg = report.aggregate(name).unwrap();
        assert!((agg.mean - m).abs() <= 1e-12 * m.abs().max(1.0), "{name}");
        assert_eq!(agg.count, values.len());
    }
    for r in &report.per_replication {
        assert!((0.0..=1.0).contains(&r.hits) && (0.0..=1.0).contains(&r.false_positives));
        assert!(r.mse_pse >= 0.0 && r.mse_exte >= 0.0);
        assert!((40..=440).contains(&r.extended_size));
    }
}

#[test]
fn studies_are_reproducible() {
    let spec = ScenarioSpec::setting_1().with_seed(74);
    let config = ExtensionConfig::default();
    assert_eq!(run_study(&spec, &config, 1, false).unwrap(), run_study(&spec, &config, 1, false).unwrap());
    let a = gen_replication(&spec, 3).unwrap();
    assert_eq!(a, gen_replication(&spec, 3).unwrap());
    assert_ne!(a.prob_sample, gen_replication(&spec, 4).unwrap().prob_sample);
}

#[test]
fn cv_study_records_grid_levels() {
    let spec = ScenarioSpec::setting_1_inverted_noise().with_seed(75);
    let report = run_study(&spec, &ExtensionConfig::default(), 5, true).unwrap();
    for r in &report.per_replication {
        assert!(tuning::DEFAULT_GRID.contains(&r.alpha_st));
        assert_eq!(r.alpha_st, r.alpha_ch);
    }
}

#[test]
fn extension_is_monotone_in_levels() {
    let data = gen_scenario(&ScenarioSpec::setting_1().with_seed(76)).unwrap();
    let loose = extend_sample(&data.prob_sample, &data.nonprob_sample, &ExtensionConfig::symmetric(0.05).unwrap()).unwrap();
    let strict = extend_sample(&data.prob_sample, &data.nonprob_sample, &ExtensionConfig::symmetric(0.3).unwrap()).unwrap();
    assert!(strict.t_s < loose.t_s && strict.t_c < loose.t_c);
    assert!(strict.included_set().is_subset(&loose.included_set()));
    let both: Vec<usize> = loose
        .decisions
        .iter()
        .filter(|d| d.residual_pass && d.change_pass)
        .map(|d| d.id)
        .collect();
    assert_eq!(loose.included_ids, both);
}
