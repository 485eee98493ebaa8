mod common;

use common::*;
use nalgebra::DMatrix;
use ordchoice::bayes::{
    gibbs_binary_probit, gibbs_ordinal_probit, posterior_summary, ChainDraws, PriorSpec,
};
use ordchoice::data::{simulate_dataset, ColumnKind, Dataset};
use ordchoice::distributions::{trunc_norm_sample, Link};
use ordchoice::likelihood::{cell_logprob, cutpoints_from_delta, Family, ModelSpec};
use rand_distr::{Distribution, StandardNormal};

/// Kolmogorov–Smirnov distance between sorted draws and a cdf.
fn ks(mut draws: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn truncated_normal_passes_ks() {
    let cases = [
        (0.0, f64::NEG_INFINITY, f64::INFINITY),
        (0.0, 0.0, f64::INFINITY),
        (1.5, f64::NEG_INFINITY, -0.5),
        (-0.3, -0.2, 0.4),
        (0.0, 3.0, 3.5),
        (2.0, 10.0, f64::INFINITY),
        (-1.0, -9.0, -6.0),
    ];
    for (seed, &(mean, lo, hi)) in cases.iter().enumerate() {
        let mut r = rng(seed as u64);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| trunc_norm_sample(mean, lo, hi, &mut r).unwrap())
            .collect();
        assert!(draws.iter().all(|&z| z.is_finite() && lo < z && z <= hi));
        // upper-tail form keeps precision when the interval lies above the mean
        let upper = lo - mean > 0.0;
        let cdf = |x: f64| {
            if upper {
                let s = |w: f64| Link::Probit.cdf(-(w - mean));
                (s(lo) - s(x)) / (s(lo) - s(hi))
            } else {
                let c = |w: f64| Link::Probit.cdf(w - mean);
                (c(x) - c(lo)) / (c(hi) - c(lo))
            }
        };
        let d = ks(draws, cdf);
        assert!(d < 0.01, "({mean}, {lo}, {hi}): KS {d}");
    }
}

#[test]
fn half_normal_mean() {
    let mut r = rng(5);
    let m = (0..100_000)
        .map(|_| trunc_norm_sample(0.0, 0.0, f64::INFINITY, &mut r).unwrap())
        .sum::<f64>()
        / 1e5;
    assert!((m - (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.01);
}

#[test]
fn simulated_shares_match_cell_probabilities() {
    let spec = ModelSpec::ordinal(Link::Probit, 3, 1, true).unwrap();
    let mut r = rng(17);
    let n = 100_000;
    let data = simulate_dataset(&spec, &[0.0], &[1.0], n, &mut r).unwrap();
    let counts = data.category_counts();
    for (share, expected) in
        counts
            .iter()
            .map(|&c| c as f64 / n as f64)
            .zip([0.5, 0.341_344_7, 0.158_655_3])
    {
        assert!((share - expected).abs() < 0.005);
    }

    for link in [Link::Probit, Link::Logit] {
        let spec = ModelSpec::ordinal(link, 4, 2, true).unwrap();
        let data = simulate_dataset(&spec, &[0.3, 0.0], &[0.6, 1.5], n, &mut r).unwrap();
        let gamma = cutpoints_from_delta(&[0.6f64.ln(), 0.9f64.ln()]);
        for (j, &c) in data.category_counts().iter().enumerate() {
            let p = cell_logprob(&spec, 0.3, j + 1, &gamma).unwrap().exp();
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (c as f64 / n as f64 - p).abs() < 3.0 * se,
                "{link} category {}",
                j + 1
            );
        }
    }
}

fn empty_data(k: usize, j: usize) -> Dataset {
    let mut names = vec!["intercept".to_string()];
    let mut kinds = vec![ColumnKind::Intercept];
    for c in 1..k {
        names.push(format!("x{c}"));
        kinds.push(ColumnKind::Continuous);
    }
    Dataset::with_categories(vec![], DMatrix::zeros(0, k), names, kinds, j).unwrap()
}

#[test]
fn empty_binary_chain_draws_from_the_prior() {
    let prior = PriorSpec::diffuse(2);
    let chain = gibbs_binary_probit(&empty_data(2, 2), &prior, 10_000, 0, &mut rng(3)).unwrap();
    for c in 0..2 {
        let col = chain.beta.column(c);
        let mean = col.mean();
        let sd = col.variance().sqrt();
        assert!(mean.abs() < 0.4, "{mean}");
        assert!((sd - 10.0).abs() < 0.3, "{sd}");
    }
}

#[test]
fn summary_of_iid_normals() {
    let mut r = rng(6);
    let s = 100_000;
    let beta = DMatrix::from_fn(s, 1, |_, _| StandardNormal.sample(&mut r));
    let chain = ChainDraws {
        names: vec!["z".into()],
        n_categories: 2,
        beta,
        delta: DMatrix::zeros(s, 0),
        acceptance_rate: 1.0,
        burn: 0,
        seed: None,
        latent_z: None,
    };
    let summary = posterior_summary(&chain).unwrap();
    let p = &summary.params[0];
    assert!(p.mean.abs() < 0.01 && (p.sd - 1.0).abs() < 0.01);
    assert!((p.q975 - 1.96).abs() < 0.03 && (p.q025 + 1.96).abs() < 0.03);
}

#[test]
fn ordinal_chain_keeps_cutpoints_ordered_and_mixes() {
    let spec = ModelSpec::new(Family::Ordinal, Link::Probit, 4, 2, true).unwrap();
    let data = simulate_dataset(&spec, &[0.2, 0.8], &[0.7, 1.6], 2000, &mut rng(8)).unwrap();
    let chain =
        gibbs_ordinal_probit(&data, &PriorSpec::diffuse(2), 3000, 500, 0.05, &mut rng(9)).unwrap();
    let cuts = chain.cutpoint_draws();
    for row in cuts.row_iter() {
        assert!(0.0 < row[0] && row[0] < row[1]);
    }
    assert!(
        (0.1..=0.7).contains(&chain.acceptance_rate),
        "{}",
        chain.acceptance_rate
    );
    let summary = posterior_summary(&chain).unwrap();
    assert!((summary.params[2].mean - 0.7).abs() < 0.15);
    assert!((summary.params[3].mean - 1.6).abs() < 0.2);
}

#[test]
fn sampler_rejects_wrong_shapes() {
    let spec = ModelSpec::ordinal(Link::Probit, 3, 1, true).unwrap();
    let data = simulate_dataset(&spec, &[0.0], &[1.0], 50, &mut rng(1)).unwrap();
    assert!(gibbs_binary_probit(&data, &PriorSpec::diffuse(1), 200, 10, &mut rng(1)).is_err());
    assert!(
        gibbs_ordinal_probit(&data, &PriorSpec::diffuse(2), 200, 10, 0.1, &mut rng(1)).is_err()
    );
    assert!(
        gibbs_ordinal_probit(&data, &PriorSpec::diffuse(1), 200, 200, 0.1, &mut rng(1)).is_err()
    );
}
