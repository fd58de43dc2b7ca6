//! Acceptance gate: one test per acceptance criterion, each running the
//! relevant catalog experiments in-process at full size and printing a
//! PASS/FAIL line (visible with `--nocapture`; the assert carries the gate).

use std::path::PathBuf;
use std::process::Command;

use levylab_cli::config::{HorizonsConfig, ValidatedConfig};
use levylab_cli::report::{ExperimentReport, TestOutcome};
use levylab_cli::run_experiment;
use levylab_core::{Dynamics, JumpSpec, LevyModel};

fn bm_unit() -> Dynamics {
    Dynamics { drift: -1.0, sigma: 1.0, jumps: vec![] }
}

fn jd1() -> Dynamics {
    Dynamics { drift: -2.0, sigma: 1.0, jumps: vec![JumpSpec { rate: 1.0, beta: 3.0, sign: 1 }] }
}

fn bm(drift: f64) -> Dynamics {
    Dynamics { drift, sigma: 1.0, jumps: vec![] }
}

struct Setup {
    experiment: &'static str,
    model: Dynamics,
    replicates: usize,
    step: f64,
    x_ladder: Option<Vec<f64>>,
    levels: Option<Vec<f64>>,
    horizons: Option<HorizonsConfig>,
}

impl Setup {
    fn new(experiment: &'static str, model: Dynamics, replicates: usize, step: f64) -> Setup {
        Setup { experiment, model, replicates, step, x_ladder: None, levels: None, horizons: None }
    }

    fn run(self) -> ExperimentReport {
        let cfg = ValidatedConfig {
            experiment: self.experiment.to_string(),
            model: LevyModel::validate(self.model).expect("acceptance models are valid"),
            seed: 20260815,
            replicates: self.replicates,
            step: self.step,
            x_ladder: self.x_ladder,
            levels: self.levels,
            horizons: self.horizons,
            output: PathBuf::from("unused"),
        };
        run_experiment(&cfg).expect("experiment runs to completion")
    }
}

fn report_line(criterion: &str, tests: &[&TestOutcome]) -> bool {
    let ok = tests.iter().all(|t| t.pass);
    let verdict = if ok { "PASS" } else { "FAIL" };
    let detail: Vec<String> = tests
        .iter()
        .map(|t| format!("{}={:.4}<=({:.4})", t.test_id, t.statistic, t.threshold))
        .collect();
    println!("acceptance {criterion}: {verdict} {}", detail.join(" "));
    ok
}

fn gate(criterion: &str, report: &ExperimentReport) {
    let rows: Vec<&TestOutcome> = report.tests.iter().collect();
    assert!(report_line(criterion, &rows), "{criterion} failed");
}

fn find<'a>(report: &'a ExperimentReport, id: &str) -> &'a TestOutcome {
    report
        .tests
        .iter()
        .find(|t| t.test_id == id)
        .unwrap_or_else(|| panic!("missing test row {id}"))
}

#[test]
fn c01_supremum_is_exponential() {
    let r = Setup::new("sup_exponential", bm_unit(), 100_000, 0.05).run();
    assert!(find(&r, "sup_exponential_ks").statistic <= 0.01);
    gate("c01 sup_exponential bm", &r);
}

#[test]
fn c02_level_crossing_constant() {
    let r = Setup::new("cramer_constancy", bm_unit(), 20_000, 0.02).run();
    gate("c02 cramer_constancy bm", &r);
    let r = Setup::new("cramer_constancy", jd1(), 20_000, 0.02).run();
    gate("c02 cramer_constancy jd1", &r);
}

#[test]
fn c03_spatial_quasi_stationarity() {
    let r = Setup::new("quasi_stationarity", bm_unit(), 100_000, 0.05).run();
    gate("c03 quasi_stationarity bm", &r);
    let r = Setup::new("quasi_stationarity", jd1(), 100_000, 0.05).run();
    gate("c03 quasi_stationarity jd1", &r);
}

#[test]
fn c04_entrance_law_limit() {
    let mut s = Setup::new("theorem1_shift_at_entry", jd1(), 10_000, 0.02);
    s.x_ladder = Some(vec![-2.0, -4.0, -6.0]);
    let r = s.run();
    let lim = find(&r, "overshoot_limit");
    assert!(lim.statistic <= 0.03 && lim.ess >= 5_000.0, "effective size too small");
    gate("c04 theorem1_shift_at_entry jd1", &r);
}

#[test]
fn c05_shift_at_maximum_limit() {
    let mut s = Setup::new("theorem2_shift_at_max", bm_unit(), 10_000, 0.02);
    s.x_ladder = Some(vec![-2.0, -4.0, -6.0]);
    let r = s.run();
    assert!(find(&r, "post_max_w1").statistic <= 0.05);
    assert!(find(&r, "max_exponential_ks").statistic <= 0.03);
    gate("c05 theorem2_shift_at_max bm", &r);

    let mut s = Setup::new("theorem2_shift_at_max", jd1(), 10_000, 0.02);
    s.x_ladder = Some(vec![-2.0, -4.0, -6.0]);
    let r = s.run();
    assert!(find(&r, "post_max_w1").statistic <= 0.05);
    assert!(find(&r, "max_exponential_ks").statistic <= 0.03);
    gate("c05 theorem2_shift_at_max jd1", &r);
}

#[test]
fn c06_time_of_max_vs_last_passage() {
    let r = Setup::new("reversal_at_max", bm_unit(), 10_000, 0.005).run();
    assert!(find(&r, "time_of_max_ks").statistic <= 0.03);
    gate("c06 reversal_at_max bm", &r);
}

#[test]
fn c07_supremum_divisor_sum() {
    let r = Setup::new("exp_divisor", jd1(), 100_000, 0.05).run();
    assert!(find(&r, "sum_exponential_ks").statistic <= 0.015);
    gate("c07 exp_divisor jd1", &r);
}

#[test]
fn c08_reversal_at_last_passage() {
    let mut s = Setup::new("reversal_at_last_passage", bm_unit(), 10_000, 0.02);
    s.horizons = Some(HorizonsConfig { backward: 20.0, forward: 20.0 });
    let r = s.run();
    assert!(find(&r, "reversed_marginal_ks").statistic <= 0.03);
    gate("c08 reversal_at_last_passage bm", &r);
}

#[test]
fn c09_exchange_identity() {
    let r = Setup::new("sparre_andersen", bm_unit(), 100_000, 0.005).run();
    assert!(find(&r, "exchange_ks").statistic <= 0.02);
    let target = 3.0f64.sqrt() - 1.0;
    assert!(find(&r, "laplace_at_one").statistic <= 0.01 * target);
    gate("c09 sparre_andersen bm", &r);
}

#[test]
fn c10_debt_time_density() {
    let model = LevyModel::validate(bm_unit()).unwrap();
    let mut rng = levylab_core::substream(7, 0);
    let f1 = levylab_core::debt_time_density(&model, 1.0, &mut rng).unwrap();
    let f4 = levylab_core::debt_time_density(&model, 4.0, &mut rng).unwrap();
    assert!((f1 - 0.166631).abs() < 5e-6, "density at 1: {f1}");
    assert!((f4 - 0.008491).abs() < 5e-6, "density at 4: {f4}");

    let mut s = Setup::new("debt_time", bm_unit(), 10_000, 0.01);
    s.x_ladder = Some(vec![-6.0]);
    let r = s.run();
    let ks = find(&r, "debt_ks");
    assert!(ks.statistic <= 0.05 && ks.ess >= 5_000.0, "effective size too small");
    assert!(find(&r, "density_total_mass").statistic <= 1e-3);
    gate("c10 debt_time bm", &r);
}

#[test]
fn c11_excursion_height_tail() {
    let r = Setup::new("height_tail", bm(-0.25), 100_000, 0.1).run();
    assert!(find(&r, "tail_slope").statistic <= 0.05);
    gate("c11 height_tail bm theta=0.5", &r);
    let r = Setup::new("height_tail", bm(-0.4), 100_000, 0.1).run();
    assert!(find(&r, "tail_slope").statistic <= 0.05);
    gate("c11 height_tail bm theta=0.8", &r);
}

#[test]
fn c12_williams_glue_matches_excursions() {
    let r = Setup::new("williams_decomposition", bm(-0.25), 10_000, 0.05).run();
    assert!(find(&r, "duration_ks").statistic <= 0.03);
    gate("c12 williams_decomposition bm theta=0.5", &r);
}

#[test]
fn c13_infrastructure() {
    // Worker-count determinism through the real binary.
    let dir = std::env::temp_dir().join(format!("levylab-acc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = serde_json::json!({
        "experiment": "lamperti_roundtrip",
        "model": {"drift": -2.0, "sigma": 1.0, "jumps": [{"rate": 1.0, "beta": 3.0, "sign": 1}]},
        "seed": 99,
        "replicates": 200,
        "step": 0.02,
        "output": dir.join("w1").to_string_lossy(),
    });
    let cfg_path = dir.join("det.json");
    std::fs::write(&cfg_path, serde_json::to_vec(&config).unwrap()).unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "4"] {
        let out_dir = dir.join(format!("w{workers}"));
        let mut cfg: serde_json::Value = config.clone();
        cfg["output"] = serde_json::Value::String(out_dir.to_string_lossy().into_owned());
        std::fs::write(&cfg_path, serde_json::to_vec(&cfg).unwrap()).unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_levylab"))
            .args(["run", "--config"])
            .arg(&cfg_path)
            .env("LEVYLAB_WORKERS", workers)
            .status()
            .unwrap();
        assert!(status.success(), "deterministic run failed with {workers} workers");
        let results = std::fs::read(out_dir.join("results.csv")).unwrap();
        let ensembles = std::fs::read(out_dir.join("ensembles.csv")).unwrap();
        let mut summary: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
        summary.as_object_mut().unwrap().remove("wall_time_s");
        outputs.push((results, ensembles, summary));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "results.csv differs across worker counts");
    assert_eq!(outputs[0].1, outputs[1].1, "ensembles.csv differs across worker counts");
    assert_eq!(outputs[0].2, outputs[1].2, "summary.json differs across worker counts");
    println!("acceptance c13 determinism: PASS byte-identical across worker counts");
    std::fs::remove_dir_all(&dir).ok();

    // Rejection-vs-reweighted oracle pairs under calibrated nulls.
    let r = Setup::new("sampler_oracles", bm_unit(), 100_000, 0.02).run();
    gate("c13 sampler_oracles bm", &r);
    let r = Setup::new("sampler_oracles", jd1(), 100_000, 0.02).run();
    gate("c13 sampler_oracles jd1", &r);

    // Clock round-trip and refinement invariants on 1e3 paths per model.
    let r = Setup::new("lamperti_roundtrip", bm_unit(), 1_000, 0.02).run();
    gate("c13 lamperti_roundtrip bm", &r);
    let r = Setup::new("lamperti_roundtrip", jd1(), 1_000, 0.02).run();
    gate("c13 lamperti_roundtrip jd1", &r);
}
