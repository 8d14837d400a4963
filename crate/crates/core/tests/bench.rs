use dcdp::bench::*;
use dcdp::cdp::{value_iteration, Algorithm, ValueIterationResult};
use dcdp::problem::{preset, DiscretizationPlan};

fn small_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ProblemSource::Preset("synthetic_separable".into()));
    c.algorithms = vec![Algorithm::Ddp, Algorithm::Cdp1, Algorithm::Cdp2];
    c.ns = vec![5, 7];
    c.horizon = Some(3);
    c.reference_n = 11;
    c.x0_count = 4;
    c.seed = 9;
    c
}

fn shifted(r: &ValueIterationResult, c: f64) -> ValueIterationResult {
    let mut s = r.clone();
    s.costs = r.costs.iter().map(|j| j.map(|v| v + c).unwrap()).collect();
    s
}

#[test]
fn error_curve_zero_and_constant_shift() {
    let p = preset("synthetic_separable").unwrap().with_horizon(3).unwrap();
    let plan = DiscretizationPlan::uniform(&p, 7, 7).unwrap();
    let r = value_iteration(&p, &plan, Algorithm::Cdp2).unwrap();
    assert_eq!(error_curve(&r, &r).unwrap(), vec![0.0; 4]);
    let e = error_curve(&shifted(&r, 0.75), &r).unwrap();
    assert!(e.iter().all(|v| (v - 0.75).abs() < 1e-12));

    let short = value_iteration(&p.clone().with_horizon(2).unwrap(), &plan, Algorithm::Cdp2).unwrap();
    assert!(error_curve(&short, &r).is_err());
}

#[test]
fn error_curve_treats_matching_infinities_as_equal() {
    let p = preset("pendulum").unwrap().with_horizon(3).unwrap();
    let plan = DiscretizationPlan::uniform(&p, 11, 11).unwrap();
    let r = value_iteration(&p, &plan, Algorithm::Ddp).unwrap();
    assert!(r.costs[0].values().iter().any(|v| v.is_infinite()));
    assert!(error_curve(&r, &r).unwrap().iter().all(|&v| v == 0.0));
}

#[test]
fn report_has_one_row_per_cell_and_is_deterministic() {
    let c = small_config();
    let a = run(&c).unwrap();
    assert_eq!(a.rows.len(), 6);
    for alg in [Algorithm::Ddp, Algorithm::Cdp1, Algorithm::Cdp2] {
        for n in [5, 7] {
            let r = a.row(alg, n).unwrap();
            assert_eq!(r.error_curve.len(), 4);
            assert!(r.rel_cost.is_finite() && r.rel_cost > 0.0);
            assert_eq!(r.rel_cost_policy.is_some(), alg == Algorithm::Ddp);
        }
    }
    assert_eq!(a.x0.len(), 4);
    assert_eq!(a.horizon, 3);
    let b = run(&c).unwrap();
    assert_eq!(a.x0, b.x0);
    assert_eq!(a.reference_costs, b.reference_costs);
    for (u, v) in a.rows.iter().zip(&b.rows) {
        assert_eq!(u.rel_cost, v.rel_cost);
        assert_eq!(u.error_curve, v.error_curve);
    }
}

#[test]
fn report_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.algorithms = vec![Algorithm::Cdp2];
    c.out_dir = Some(dir.path().to_path_buf());
    let rep = run(&c).unwrap();
    let table = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert_eq!(table.lines().count(), rep.rows.len() + 1);
    let curves = std::fs::read_to_string(dir.path().join("error_curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 2 * 4);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn reference_cache_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = preset("pendulum").unwrap().with_horizon(3).unwrap();
    let a = make_reference(&p, 9, Some(dir.path())).unwrap();
    let file = dir.path().join(format!("ref-{}.json", reference_key(&p, 9)));
    assert!(file.exists());
    let b = make_reference(&p, 9, Some(dir.path())).unwrap();
    assert_eq!(a.costs, b.costs);
    assert_eq!(a.policies, b.policies);
    assert_ne!(reference_key(&p, 9), reference_key(&p, 11));

    std::fs::write(&file, "not json").unwrap();
    let c = make_reference(&p, 9, Some(dir.path())).unwrap();
    assert_eq!(a.costs, c.costs);
}

#[test]
fn config_validation() {
    let ok = small_config();
    assert!(ok.validate().is_ok());
    let mut c = small_config();
    c.ns = vec![];
    assert!(c.validate().is_err());
    let mut c = small_config();
    c.ns = vec![1];
    assert!(c.validate().is_err());
    let mut c = small_config();
    c.x0_count = 0;
    assert!(c.validate().is_err());
    let mut c = small_config();
    c.alpha = Some(-1.0);
    assert!(c.validate().is_err());
    let mut c = small_config();
    c.problem = ProblemSource::Preset("sir".into());
    assert!(matches!(run(&c), Err(dcdp::Error::Config(_))));
    let mut c = small_config();
    c.problem = ProblemSource::Preset("nope".into());
    assert!(run(&c).is_err());
}

#[test]
fn initial_states_are_seeded_and_inside_the_box() {
    let p = preset("sir").unwrap();
    let a = sample_initial_states(&p, 20, 3);
    assert_eq!(a, sample_initial_states(&p, 20, 3));
    assert_ne!(a, sample_initial_states(&p, 20, 4));
    assert!(a.iter().all(|x| p.state_box().contains(x)));
}

#[test]
fn slope_fit_and_scaling_preconditions() {
    let xs = [0.0, 1.0, 2.0, 3.0];
    let ys: Vec<f64> = xs.iter().map(|x| 1.5 * x - 2.0).collect();
    assert!((fit_slope(&xs, &ys) - 1.5).abs() < 1e-12);
    let p = preset("synthetic_separable").unwrap();
    assert!(scaling_study(&p, Algorithm::Cdp2, &[5, 7, 9], 1).is_err());
    let s = scaling_study(&p.with_horizon(2).unwrap(), Algorithm::Cdp2, &[5, 7, 9, 11], 1).unwrap();
    assert_eq!(s.sizes, vec![25, 49, 81, 121]);
    assert!(s.times.iter().all(|t| *t > 0.0));
}
