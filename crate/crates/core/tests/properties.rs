mod common;

use common::*;
use nalgebra::DMatrix;
use ordchoice::data::{build_dataset, RawTable, SchemaConfig};
use ordchoice::distributions::{trunc_norm_sample, Link};
use ordchoice::estimation::{fit_ml, predict_prob, FitOptions};
use ordchoice::likelihood::{
    cell_logprob, cutpoints_from_delta, loglik, Family, ModelSpec, ParamVector,
};
use proptest::prelude::*;

fn link() -> impl Strategy<Value = Link> {
    prop_oneof![Just(Link::Probit), Just(Link::Logit)]
}

fn deltas(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..1.5f64, 0..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cdf_is_symmetric(link in link(), w in -30.0..30.0f64) {
        prop_assert!((link.cdf(-w) - (1.0 - link.cdf(w))).abs() <= 1e-14);
    }

    #[test]
    fn cdf_is_increasing_and_pdf_nonnegative(link in link(), w in -20.0..20.0f64, d in 1e-3..1.0f64) {
        prop_assert!(link.cdf(w) < link.cdf(w + d) || link.cdf(w) == 1.0);
        prop_assert!(link.pdf(w) >= 0.0);
    }

    #[test]
    fn cell_probabilities_sum_to_one(link in link(), xb in -8.0..8.0f64, delta in deltas(5)) {
        let j = delta.len() + 2;
        let spec = ModelSpec::new(Family::Ordinal, link, j, 1, true).unwrap();
        let gamma = cutpoints_from_delta(&delta);
        let total: f64 = (1..=j).map(|c| cell_logprob(&spec, xb, c, &gamma).unwrap().exp()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12, "{}", total);
    }

    #[test]
    fn cutpoints_increase(delta in deltas(6)) {
        let g = cutpoints_from_delta(&delta);
        prop_assert_eq!(g.len(), delta.len() + 3);
        prop_assert_eq!(g[1], 0.0);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn location_shift_leaves_cells_unchanged(link in link(), xb in -5.0..5.0f64, c in -3.0..3.0f64, delta in deltas(3)) {
        let j = delta.len() + 2;
        let spec = ModelSpec::new(Family::Ordinal, link, j, 1, true).unwrap();
        let gamma = cutpoints_from_delta(&delta);
        let shifted: Vec<f64> = gamma.iter().map(|g| g + c).collect();
        for cell in 1..=j {
            let a = cell_logprob(&spec, xb, cell, &gamma).unwrap().exp();
            let b = cell_logprob(&spec, xb + c, cell, &shifted).unwrap().exp();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn two_category_ordinal_loglik_is_binary(link in link(), seed in 0u64..1000, b0 in -1.0..1.0f64, b1 in -2.0..2.0f64) {
        let binary = ModelSpec::binary(link, 2, true).unwrap();
        let ordinal = ModelSpec::ordinal(link, 2, 2, true).unwrap();
        let p = ParamVector::new(vec![b0, b1], vec![]);
        let data = random_instance(&binary, &p, 30, seed);
        prop_assert_eq!(loglik(&binary, &p, &data).unwrap(), loglik(&ordinal, &p, &data).unwrap());
    }

    #[test]
    fn proportional_odds(
        beta in prop::collection::vec(-1.5..1.5f64, 3),
        delta in prop::collection::vec(-1.0..1.0f64, 1..4),
        x1 in prop::collection::vec(-2.0..2.0f64, 2),
        x2 in prop::collection::vec(-2.0..2.0f64, 2),
    ) {
        let j = delta.len() + 2;
        let spec = ModelSpec::ordinal(Link::Logit, j, 3, true).unwrap();
        let p = ParamVector::new(beta.clone(), delta);
        let x = DMatrix::from_row_slice(2, 3, &[1.0, x1[0], x1[1], 1.0, x2[0], x2[1]]);
        let probs = predict_prob(&spec, &p, &x).unwrap();
        let odds = |r: usize, c: usize| {
            let below: f64 = (0..c).map(|h| probs[(r, h)]).sum();
            let above: f64 = (c..j).map(|h| probs[(r, h)]).sum();
            below / above
        };
        let expected = (-((x1[0] - x2[0]) * beta[1] + (x1[1] - x2[1]) * beta[2])).exp();
        for c in 1..j {
            let ratio = odds(0, c) / odds(1, c);
            prop_assert!((ratio - expected).abs() <= 1e-10 * expected, "{} vs {}", ratio, expected);
        }
    }

    #[test]
    fn loglik_ignores_row_order(link in link(), seed in 0u64..1000, shift in 1usize..29) {
        let spec = ModelSpec::ordinal(link, 3, 2, true).unwrap();
        let p = ParamVector::from_cutpoints(vec![0.2, -0.5], &[0.9]).unwrap();
        let data = random_instance(&spec, &p, 30, seed);
        let order: Vec<usize> = (0..30).map(|i| (i * 7 + shift) % 30).collect();
        let permuted = data.select_rows(&order);
        let a = loglik(&spec, &p, &data).unwrap();
        let b = loglik(&spec, &p, &permuted).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs());
    }

    #[test]
    fn truncated_draws_repeat_under_a_seed(seed in any::<u64>(), mean in -3.0..3.0f64, lo in -2.0..2.0f64, width in 0.01..4.0f64) {
        let draw = |s| {
            let mut r = rng(s);
            (0..20).map(|_| trunc_norm_sample(mean, lo, lo + width, &mut r).unwrap()).collect::<Vec<_>>()
        };
        let a = draw(seed);
        prop_assert_eq!(&a, &draw(seed));
        prop_assert!(a.iter().all(|&z| lo < z && z <= lo + width));
    }
}

fn survey_table(rows: &[(&str, &str, &str)]) -> RawTable {
    RawTable::new(
        vec!["view".into(), "party".into(), "age".into()],
        rows.iter()
            .map(|(a, b, c)| vec![a.to_string(), b.to_string(), c.to_string()])
            .collect(),
    )
    .unwrap()
}

const SCHEMA: &str = "\
response = view
labels = oppose | medical | legal
missing = refused | dk
covariate.party = categorical:dem
covariate.age = continuous
intercept = true
";

fn row_strategy() -> impl Strategy<Value = (&'static str, &'static str, &'static str)> {
    (
        prop::sample::select(vec!["oppose", "medical", "legal", "dk"]),
        prop::sample::select(vec!["dem", "rep", "ind", "refused"]),
        prop::sample::select(vec!["23", "41", "67", ""]),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dummies_sum_to_zero_or_one(mut rows in prop::collection::vec(row_strategy(), 1..40)) {
        rows.push(("oppose", "dem", "30"));
        let schema = SchemaConfig::parse(SCHEMA).unwrap();
        let (data, _) = build_dataset(&survey_table(&rows), &schema).unwrap();
        let dummies: Vec<usize> = (0..data.k()).filter(|&c| data.names()[c].starts_with("party=")).collect();
        for i in 0..data.n() {
            let s: f64 = dummies.iter().map(|&c| data.x()[(i, c)]).sum();
            prop_assert!(s == 0.0 || s == 1.0);
        }
    }

    #[test]
    fn encoding_clean_data_is_idempotent(mut rows in prop::collection::vec(row_strategy(), 1..40)) {
        rows.push(("oppose", "dem", "30"));
        let schema = SchemaConfig::parse(SCHEMA).unwrap();
        let raw = survey_table(&rows);
        let (first, report) = build_dataset(&raw, &schema).unwrap();
        let (second, again) = build_dataset(&raw.select_rows(&report.kept_rows), &schema).unwrap();
        prop_assert_eq!(again.dropped, 0);
        prop_assert_eq!(first, second);
    }
}

#[test]
fn iterates_never_lose_likelihood() {
    let spec = ModelSpec::ordinal(Link::Logit, 4, 3, true).unwrap();
    let p = ParamVector::from_cutpoints(vec![0.4, 1.2, -0.8], &[0.5, 1.6]).unwrap();
    let data = random_instance(&spec, &p, 500, 3);
    let mut previous = f64::NEG_INFINITY;
    for m in 1..12 {
        let opts = FitOptions {
            max_iter: m,
            ..FitOptions::default()
        };
        let fit = fit_ml(&spec, &data, &opts).unwrap();
        assert!(fit.loglik_fit >= previous - 1e-12 * previous.abs().max(1.0));
        previous = fit.loglik_fit;
    }
}

#[test]
fn vcov_eigenvalues_nonnegative() {
    for (family, link, j) in all_models() {
        let spec = spec(family, link, j, 3);
        let mut r = rng(91);
        let p = random_params(&spec, 0.7, &mut r);
        let data = random_instance(&spec, &p, 600, 92);
        let fit = fit_ml(&spec, &data, &FitOptions::default()).unwrap();
        let eig = fit.vcov.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-10));
        assert!(fit.lr_stat >= 0.0 && (0.0..1.0).contains(&fit.mcfadden_r2));
        assert!((0.0..=100.0).contains(&fit.hit_rate));
    }
}

#[test]
fn logit_slopes_are_a_rescaled_probit() {
    let logit = ModelSpec::binary(Link::Logit, 2, true).unwrap();
    let probit = ModelSpec::binary(Link::Probit, 2, true).unwrap();
    let data = random_instance(&logit, &ParamVector::new(vec![0.3, 1.0], vec![]), 20_000, 4);
    let bl = fit_ml(&logit, &data, &FitOptions::default())
        .unwrap()
        .params
        .beta[1];
    let bp = fit_ml(&probit, &data, &FitOptions::default())
        .unwrap()
        .params
        .beta[1];
    let ratio = bl / bp;
    assert!((1.5..1.9).contains(&ratio), "{ratio}");
}
