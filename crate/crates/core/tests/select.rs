use std::path::PathBuf;

use paradetect::learn::Parameters;
use paradetect::select::{lasso_path, lda_fit, pca_fit, pca_fit_components, rf_importance, SelectError};
use paradetect::synthetic::standard_normal;
use paradetect::{FeatureMatrix, Label, TrainedModel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

fn alternating(n: usize) -> Vec<Label> {
    (0..n).map(|i| if i % 2 == 0 { Label::Human } else { Label::Chatbot }).collect()
}

#[test]
fn points_on_a_line_need_one_component() {
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            let t = i as f64 * 0.7 - 3.0;
            vec![1.0 + 2.0 * t, -t, 0.5 * t + 4.0]
        })
        .collect();
    let m = FeatureMatrix::from_rows(names(3), rows, alternating(20));
    let p = pca_fit(&m, 0.999).unwrap();
    assert_eq!(p.n_components(), 1);
    let ev = p.explained_variance.unwrap();
    assert!((ev[0] / p.total_variance.unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn isotropic_sample_spreads_variance_evenly() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let d = 32;
    let rows: Vec<Vec<f64>> = (0..20_000)
        .map(|_| (0..d).map(|_| standard_normal(&mut rng)).collect())
        .collect();
    let m = FeatureMatrix::from_rows(names(d), rows, alternating(20_000));
    let p = pca_fit_components(&m, d).unwrap();
    let total = p.total_variance.unwrap();
    for v in p.explained_variance.unwrap() {
        let share = v / total;
        assert!((0.8 / 32.0..=1.2 / 32.0).contains(&share), "share {share}");
    }
}

#[test]
fn lda_separates_two_gaussians() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let labels = alternating(200);
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|l| {
            let c = if *l == Label::Human { -3.0 } else { 3.0 };
            vec![c + 0.5 * standard_normal(&mut rng), 0.5 * c + 0.5 * standard_normal(&mut rng)]
        })
        .collect();
    let m = FeatureMatrix::from_rows(names(2), rows, labels.clone());
    let p = lda_fit(&m).unwrap();
    assert_eq!(p.n_components(), 1);
    assert!(!p.degenerate);
    let proj: Vec<f64> = m.rows.iter().map(|r| p.transform_row(r)[0]).collect();
    let max_human = proj.iter().zip(&labels).filter(|(_, l)| **l == Label::Human).map(|(x, _)| *x).fold(f64::MIN, f64::max);
    let min_bot = proj.iter().zip(&labels).filter(|(_, l)| **l == Label::Chatbot).map(|(x, _)| *x).fold(f64::MAX, f64::min);
    assert!(max_human < min_bot, "{max_human} vs {min_bot}");
}

fn linear_fixture() -> TrainedModel {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/linear_model.json");
    TrainedModel::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn ignored_feature_has_no_importance() {
    let mut model = linear_fixture();
    let Parameters::Linear(lin) = &mut model.parameters else { panic!("linear") };
    lin.weights[1] = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let rows: Vec<Vec<f64>> = (0..100)
        .map(|_| vec![1.0 + 2.0 * standard_normal(&mut rng), 4.0 * standard_normal(&mut rng)])
        .collect();
    let labels = rows
        .iter()
        .map(|r| if r[0] + 0.3 * standard_normal(&mut rng) > 1.0 { Label::Chatbot } else { Label::Human })
        .collect();
    let m = FeatureMatrix::from_rows(vec!["x".into(), "y".into()], rows, labels);
    let report = rf_importance(&model, &m, 20, 1).unwrap();
    let y = report.scores.iter().find(|s| s.feature == "y").unwrap();
    assert!(y.score.abs() <= 0.01);
    assert!(matches!(rf_importance(&model, &m, 0, 1), Err(SelectError::Trials)));
}

fn signal_and_noise(n: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = alternating(n);
    let rows = labels
        .iter()
        .map(|l| {
            let s = if *l == Label::Human { -1.0 } else { 1.0 };
            vec![s + standard_normal(&mut rng), standard_normal(&mut rng)]
        })
        .collect();
    FeatureMatrix::from_rows(vec!["signal".into(), "noise".into()], rows, labels)
}

#[test]
fn huge_lambda_zeroes_everything() {
    let path = lasso_path(&signal_and_noise(100, 1), &[1e6]).unwrap();
    assert_eq!(path.coefficients[0], vec![0.0, 0.0]);
}

#[test]
fn informative_feature_enters_first() {
    let grid: Vec<f64> = (0..40).map(|i| 0.6 * 0.85f64.powi(i)).collect();
    let path = lasso_path(&signal_and_noise(400, 2), &grid).unwrap();
    let first = |j: usize| path.coefficients.iter().position(|c| c[j] != 0.0).unwrap_or(usize::MAX);
    assert!(first(0) < first(1), "signal {} noise {}", first(0), first(1));
}

fn random_matrix() -> impl Strategy<Value = FeatureMatrix> {
    (any::<u64>(), 20usize..60, 2usize..6).prop_map(|(seed, n, d)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = alternating(n);
        let rows = labels
            .iter()
            .map(|l| {
                let shift = if *l == Label::Human { 0.0 } else { 0.7 };
                (0..d).map(|j| standard_normal(&mut rng) + if j == 0 { shift } else { 0.0 }).collect()
            })
            .collect();
        FeatureMatrix::from_rows(names(d), rows, labels)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pca_invariants(m in random_matrix()) {
        let d = m.n_cols();
        let p = pca_fit_components(&m, d).unwrap();
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = p.components[i].iter().zip(&p.components[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() <= 1e-8);
            }
        }
        let ev = p.explained_variance.clone().unwrap();
        prop_assert!(ev.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((ev.iter().sum::<f64>() - p.total_variance.unwrap()).abs() <= 1e-6);
        let s = p.standardizer();
        for r in &m.rows {
            let z = s.transform_row(r);
            let y = p.transform_row(r);
            prop_assert_eq!(&y, &p.transform_row(r));
            for j in 0..d {
                let back: f64 = (0..d).map(|k| y[k] * p.components[k][j]).sum();
                prop_assert!((back - z[j]).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn lda_has_one_deterministic_component(m in random_matrix()) {
        let p = lda_fit(&m).unwrap();
        prop_assert_eq!(p.n_components(), 1);
        prop_assert_eq!(lda_fit(&m).unwrap(), p);
    }

    #[test]
    fn lasso_path_satisfies_optimality(m in random_matrix()) {
        let grid: Vec<f64> = (0..15).map(|i| 0.5 * 0.7f64.powi(i)).collect();
        let path = lasso_path(&m, &grid).unwrap();
        let z = path.standardizer.transform(&m.rows);
        let t: Vec<f64> = m.labels.iter().map(|l| if *l == Label::Chatbot { 1.0 } else { -1.0 }).collect();
        let n = z.len() as f64;
        for ((lam, w), b) in path.lambdas.iter().zip(&path.coefficients).zip(&path.intercepts) {
            // subgradient of mean logistic loss plus λ‖w‖₁
            let s: Vec<f64> = z
                .iter()
                .zip(&t)
                .map(|(x, ti)| {
                    let margin = ti * (x.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b);
                    -ti / (1.0 + margin.exp())
                })
                .collect();
            prop_assert!((s.iter().sum::<f64>() / n).abs() <= 1e-6);
            for j in 0..w.len() {
                let g: f64 = z.iter().zip(&s).map(|(x, si)| x[j] * si).sum::<f64>() / n;
                let residual = if w[j] == 0.0 { (g.abs() - lam).max(0.0) } else { (g + lam * w[j].signum()).abs() };
                prop_assert!(residual <= 1e-6, "λ {} feature {}: residual {}", lam, j, residual);
            }
        }
        let counts = path.nonzero_counts();
        prop_assert_eq!(counts[0], 0);
    }
}
