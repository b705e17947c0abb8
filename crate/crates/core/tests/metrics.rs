use netload_core::metrics::{
    build_report, crps, crps_mean, empirical_quantile, energy_score, mae_rmse, mean_quantile_score, mse_per_time,
    quantile_score, variogram_score, Ensemble, QUANTILE_LEVELS,
};
use netload_core::numerics::{RngStream, Tensor};
use proptest::prelude::*;

fn ens(rows: &[Vec<f64>], actual: &[f64]) -> Ensemble {
    Ensemble::new(Tensor::from_rows(rows).unwrap(), actual.to_vec()).unwrap()
}

fn random_ens(seed: u64, m: usize, t: usize) -> Ensemble {
    let mut rng = RngStream::new(seed, 0);
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..t).map(|_| 2.0 * rng.normal()).collect()).collect();
    let actual: Vec<f64> = (0..t).map(|_| 2.0 * rng.normal()).collect();
    ens(&rows, &actual)
}

mod oracle {
    use super::*;

    pub fn member(e: &Ensemble, i: usize, t: usize) -> f64 {
        e.samples().data()[i * e.steps() + t]
    }

    pub fn mse(e: &Ensemble) -> Vec<f64> {
        let mut out = Vec::new();
        for t in 0..e.steps() {
            let mut s = 0.0;
            for i in 0..e.members() {
                s += (member(e, i, t) - e.actual()[t]).powi(2);
            }
            out.push(s / e.members() as f64);
        }
        out
    }

    /// Selection-sort the column, then interpolate between order statistics.
    pub fn quantile(e: &Ensemble, t: usize, q: f64) -> f64 {
        let m = e.members();
        let mut v: Vec<f64> = (0..m).map(|i| member(e, i, t)).collect();
        for i in 0..m {
            for j in i + 1..m {
                if v[j] < v[i] {
                    v.swap(i, j);
                }
            }
        }
        let pos = q * (m as f64 - 1.0);
        let k = pos as usize;
        if k + 1 >= m {
            v[m - 1]
        } else {
            v[k] * (1.0 - (pos - k as f64)) + v[k + 1] * (pos - k as f64)
        }
    }

    pub fn qs(e: &Ensemble, q: f64) -> f64 {
        let mut s = 0.0;
        for t in 0..e.steps() {
            let u = e.actual()[t] - quantile(e, t, q);
            s += if u >= 0.0 { q * u } else { (q - 1.0) * u };
        }
        s / e.steps() as f64
    }

    pub fn crps(e: &Ensemble) -> Vec<f64> {
        let m = e.members() as f64;
        (0..e.steps())
            .map(|t| {
                let mut a = 0.0;
                let mut b = 0.0;
                for i in 0..e.members() {
                    a += (member(e, i, t) - e.actual()[t]).abs();
                    for j in 0..e.members() {
                        b += (member(e, i, t) - member(e, j, t)).abs();
                    }
                }
                a / m - b / (2.0 * m * m)
            })
            .collect()
    }

    pub fn es(e: &Ensemble) -> f64 {
        let m = e.members() as f64;
        let norm = |f: &dyn Fn(usize) -> f64| (0..e.steps()).map(|t| f(t).powi(2)).sum::<f64>().sqrt();
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..e.members() {
            a += norm(&|t| member(e, i, t) - e.actual()[t]);
            for j in 0..e.members() {
                b += norm(&|t| member(e, i, t) - member(e, j, t));
            }
        }
        a / m - b / (2.0 * m * m)
    }

    pub fn vs(e: &Ensemble, gamma: f64) -> f64 {
        let mut s = 0.0;
        for t in 0..e.steps() {
            for u in 0..e.steps() {
                if u <= t {
                    continue;
                }
                let mut mean = 0.0;
                for i in 0..e.members() {
                    mean += (member(e, i, t) - member(e, i, u)).abs().powf(gamma);
                }
                mean /= e.members() as f64;
                let obs = (e.actual()[t] - e.actual()[u]).abs().powf(gamma);
                s += (obs - mean) * (obs - mean);
            }
        }
        s
    }
}

#[test]
fn worked_examples() {
    let x = [1.0, -2.0, 0.5];
    let e = ens(&[x.iter().map(|v| v + 1.0).collect(), x.iter().map(|v| v - 1.0).collect()], &x);
    assert_eq!(mse_per_time(&e), vec![1.0; 3]);

    let e = ens(&[vec![0.0]], &[2.0]);
    assert_eq!(quantile_score(&e, 0.5).unwrap(), 1.0);

    let e = ens(&[vec![0.0], vec![2.0]], &[1.0]);
    assert_eq!(crps(&e), vec![0.5]);

    let v = [0.3, -0.4, 1.2];
    let shifted: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
    let e = ens(&[shifted.clone(), shifted], &x);
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    assert!((energy_score(&e).unwrap() - norm).abs() < 1e-15);

    let e = ens(&[vec![3.0; 5], vec![-1.0; 5]], &[7.0; 5]);
    assert_eq!(variogram_score(&e, 0.5).unwrap(), 0.0);

    let alt: Vec<f64> = (0..6).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let e = ens(&[alt], &[0.0; 6]);
    assert_eq!(mae_rmse(&[e]).unwrap(), (1.0, 1.0));
}

#[test]
fn single_member_crps_is_absolute_error() {
    let e = random_ens(3, 1, 10);
    for (t, c) in crps(&e).iter().enumerate() {
        assert!((c - (e.samples().row(0)[t] - e.actual()[t]).abs()).abs() < 1e-12);
    }
    assert!(energy_score(&e).is_err());
}

#[test]
fn perfect_ensembles_score_zero() {
    let actual: Vec<f64> = (0..12).map(|t| (t as f64 * 0.7).sin() * 3.0).collect();
    let e = ens(&vec![actual.clone(); 6], &actual);
    assert!(mse_per_time(&e).iter().all(|&v| v == 0.0));
    assert!(QUANTILE_LEVELS.iter().all(|&q| quantile_score(&e, q).unwrap() == 0.0));
    assert!(crps(&e).iter().all(|&v| v == 0.0));
    assert_eq!(energy_score(&e).unwrap(), 0.0);
    assert_eq!(variogram_score(&e, 0.5).unwrap(), 0.0);
    assert_eq!(mae_rmse(&[e.clone()]).unwrap(), (0.0, 0.0));
    let report = build_report(&[("perfect".into(), vec![e])]).unwrap();
    let r = &report.rows[0];
    assert_eq!([r.mae, r.rmse, r.qs, r.crps, r.es, r.vs], [0.0; 6]);
}

#[test]
fn out_of_range_arguments() {
    let e = random_ens(1, 3, 4);
    assert!(quantile_score(&e, 0.0).is_err());
    assert!(quantile_score(&e, 1.0).is_err());
    assert!(variogram_score(&e, 0.0).is_err());
    assert!(mae_rmse(&[]).is_err());
    assert!(Ensemble::new(Tensor::zeros(&[2, 3]), vec![0.0; 4]).is_err());
    assert!(Ensemble::new(Tensor::full(&[2, 3], f64::NAN), vec![0.0; 3]).is_err());
}

#[test]
fn report_rows_text_and_mismatch() {
    let a: Vec<Ensemble> = (0..4).map(|s| random_ens(s, 5, 8)).collect();
    let report = build_report(&[("pdm".into(), a.clone()), ("pdm-again".into(), a.clone())]).unwrap();
    let (r0, r1) = (&report.rows[0], &report.rows[1]);
    assert_eq!([r0.mae, r0.rmse, r0.qs, r0.crps, r0.es, r0.vs], [r1.mae, r1.rmse, r1.qs, r1.crps, r1.es, r1.vs]);
    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv.clone()).unwrap();
    assert!(text.starts_with("model,mae,rmse,qs,crps,es,vs\n"));
    let back = netload_core::metrics::MetricReport::read_csv(csv.as_slice()).unwrap();
    assert_eq!(back.rows[0].vs, r0.vs);
    let mut q = Vec::new();
    report.write_quantile_csv(&mut q).unwrap();
    assert_eq!(String::from_utf8(q).unwrap().lines().count(), 1 + 2 * 9);
    let mut c = Vec::new();
    report.write_crps_csv(&mut c).unwrap();
    assert_eq!(String::from_utf8(c).unwrap().lines().count(), 1 + 2 * 8);

    let other: Vec<Ensemble> = (10..14).map(|s| random_ens(s, 5, 8)).collect();
    assert!(build_report(&[("a".into(), a), ("b".into(), other)]).is_err());
}

#[test]
fn text_rendering_of_a_reference_row() {
    let mut report = build_report(&[("PDM".into(), vec![random_ens(0, 3, 4)])]).unwrap();
    let r = &mut report.rows[0];
    (r.mae, r.rmse, r.qs, r.crps, r.es, r.vs) = (0.73, 1.05, 0.24, 0.45, 5.72, 803.24);
    let text = report.to_text();
    let line = text.lines().nth(1).unwrap();
    let cols: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(cols, ["PDM", "0.73", "1.05", "0.24", "0.45", "5.72", "803.24"]);
}

fn ensemble_strategy() -> impl Strategy<Value = Ensemble> {
    (1usize..7, 1usize..7).prop_flat_map(|(m, t)| {
        (
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, t), m),
            prop::collection::vec(-10.0f64..10.0, t),
        )
            .prop_map(|(rows, actual)| ens(&rows, &actual))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scores_match_brute_force(e in ensemble_strategy(), q in 0.01f64..0.99) {
        for (a, b) in mse_per_time(&e).iter().zip(oracle::mse(&e)) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        prop_assert!((quantile_score(&e, q).unwrap() - oracle::qs(&e, q)).abs() < 1e-10);
        for (a, b) in crps(&e).iter().zip(oracle::crps(&e)) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        if e.members() >= 2 {
            prop_assert!((energy_score(&e).unwrap() - oracle::es(&e)).abs() < 1e-10);
        }
        prop_assert!((variogram_score(&e, 0.5).unwrap() - oracle::vs(&e, 0.5)).abs() < 1e-10);
    }

    #[test]
    fn scores_are_nonnegative_and_translation_invariant(e in ensemble_strategy(), c in -5.0f64..5.0) {
        let shifted = Ensemble::new(e.samples().map(|v| v + c), e.actual().iter().map(|v| v + c).collect()).unwrap();
        let (mae, rmse) = mae_rmse(&[e.clone()]).unwrap();
        let (mae2, rmse2) = mae_rmse(&[shifted.clone()]).unwrap();
        prop_assert!(rmse >= mae - 1e-12);
        prop_assert!((mae - mae2).abs() < 1e-9 && (rmse - rmse2).abs() < 1e-9);
        prop_assert!((mean_quantile_score(&e) - mean_quantile_score(&shifted)).abs() < 1e-9);
        prop_assert!((crps_mean(&e) - crps_mean(&shifted)).abs() < 1e-9);
        prop_assert!((variogram_score(&e, 0.5).unwrap() - variogram_score(&shifted, 0.5).unwrap()).abs() < 1e-7);
        prop_assert!(mean_quantile_score(&e) >= 0.0 && crps_mean(&e) >= 0.0);
        if e.members() >= 2 {
            let (a, b) = (energy_score(&e).unwrap(), energy_score(&shifted).unwrap());
            prop_assert!(a >= -1e-12 && (a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn quantile_interpolates_between_order_statistics(mut v in prop::collection::vec(-5.0f64..5.0, 1..10), q in 0.0f64..=1.0) {
        v.sort_by(|a, b| a.total_cmp(b));
        let x = empirical_quantile(&v, q);
        prop_assert!(x >= v[0] && x <= v[v.len() - 1]);
        prop_assert_eq!(empirical_quantile(&v, 0.0), v[0]);
        prop_assert_eq!(empirical_quantile(&v, 1.0), v[v.len() - 1]);
    }
}
