//! Deterministic result files: results.csv with one row per statistical
//! test, summary.json with the run metadata, and optional ensemble CSVs
//! with raw functional values.
//!
//! Everything except the wall-clock field in summary.json is a pure
//! function of the config, so reruns with different worker counts must
//! produce byte-identical CSV output.

use std::io::Write;
use std::path::Path;

use levylab_core::Dynamics;
use serde::Serialize;

/// One pass/fail test: a statistic compared against a pinned threshold.
#[derive(Debug, Clone, Serialize)]
pub struct TestOutcome {
    pub test_id: String,
    pub statistic: f64,
    pub threshold: f64,
    /// Effective sample size behind the statistic.
    pub ess: f64,
    pub pass: bool,
}

impl TestOutcome {
    /// Passes when the statistic is finite and within the threshold.
    pub fn within(test_id: impl Into<String>, statistic: f64, threshold: f64, ess: f64) -> Self {
        TestOutcome {
            test_id: test_id.into(),
            statistic,
            threshold,
            ess,
            pass: statistic.is_finite() && statistic <= threshold,
        }
    }

    /// A test that already failed upstream (e.g. a sampler error); the
    /// statistic is NaN and the row never passes.
    pub fn failed(test_id: impl Into<String>, threshold: f64) -> Self {
        TestOutcome {
            test_id: test_id.into(),
            statistic: f64::NAN,
            threshold,
            ess: 0.0,
            pass: false,
        }
    }
}

/// One raw functional value for the optional ensemble dump.
#[derive(Debug, Clone)]
pub struct EnsembleRow {
    pub replicate: usize,
    pub functional_name: &'static str,
    pub value: f64,
    pub weight: f64,
}

/// Everything an experiment produces.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub tests: Vec<TestOutcome>,
    pub ensembles: Vec<EnsembleRow>,
}

impl ExperimentReport {
    pub fn push(&mut self, outcome: TestOutcome) {
        self.tests.push(outcome);
    }

    /// Record up to `cap` values of a functional for the ensemble CSV.
    pub fn dump<'a, I>(&mut self, name: &'static str, values: I, cap: usize)
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        for (i, (value, weight)) in values.into_iter().take(cap).enumerate() {
            self.ensembles.push(EnsembleRow { replicate: i, functional_name: name, value, weight });
        }
    }

    pub fn all_pass(&self) -> bool {
        !self.tests.is_empty() && self.tests.iter().all(|t| t.pass)
    }
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub experiment: &'a str,
    pub model: &'a Dynamics,
    pub seed: u64,
    pub tests: &'a [TestOutcome],
    pub wall_time_s: f64,
}

pub fn results_csv(tests: &[TestOutcome]) -> String {
    let mut out = String::from("test_id,statistic,threshold,ess,pass\n");
    for t in tests {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            t.test_id, t.statistic, t.threshold, t.ess, t.pass
        ));
    }
    out
}

pub fn ensembles_csv(rows: &[EnsembleRow]) -> String {
    let mut out = String::from("replicate,functional_name,value,weight\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.replicate, r.functional_name, r.value, r.weight));
    }
    out
}

/// Write results.csv, summary.json and (when non-empty) ensembles.csv.
pub fn write_report(
    dir: &Path,
    summary: &Summary,
    ensembles: &[EnsembleRow],
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join("results.csv"))?;
    f.write_all(results_csv(summary.tests).as_bytes())?;
    let mut f = std::fs::File::create(dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut f, summary)?;
    f.write_all(b"\n")?;
    if !ensembles.is_empty() {
        let mut f = std::fs::File::create(dir.join("ensembles.csv"))?;
        f.write_all(ensembles_csv(ensembles).as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_is_stable() {
        let tests = vec![
            TestOutcome::within("a", 0.5, 1.0, 100.0),
            TestOutcome::failed("b", 0.25),
        ];
        let csv = results_csv(&tests);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("test_id,statistic,threshold,ess,pass"));
        assert_eq!(lines.next(), Some("a,0.5,1,100,true"));
        assert_eq!(lines.next(), Some("b,NaN,0.25,0,false"));
    }

    #[test]
    fn within_requires_finite_statistic() {
        assert!(!TestOutcome::within("x", f64::NAN, 1.0, 10.0).pass);
        assert!(TestOutcome::within("x", 1.0, 1.0, 10.0).pass);
        assert!(!TestOutcome::within("x", 1.0 + 1e-12, 1.0, 10.0).pass);
    }

    #[test]
    fn dump_caps_the_row_count() {
        let mut rep = ExperimentReport::default();
        rep.dump("sup", (0..10).map(|i| (i as f64, 1.0)), 3);
        assert_eq!(rep.ensembles.len(), 3);
        assert_eq!(rep.ensembles[2].replicate, 2);
    }

    #[test]
    fn all_pass_requires_at_least_one_test() {
        let rep = ExperimentReport::default();
        assert!(!rep.all_pass());
    }
}
