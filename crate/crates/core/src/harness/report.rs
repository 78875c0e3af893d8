use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use super::config::{ExperimentKind, CONFIG_VERSION};
use crate::protocols::{DeskConfig, Resources};

/// Two-sided 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959963984540054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The exact interval contains p; clamping removes rounding at k = 0 and k = n.
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// One named assertion evaluated on the finished run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Outcome of one experiment. Every trial is counted exactly once as a
/// success, a failure or an abort; what a success means depends on the kind.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub version: u32,
    pub kind: ExperimentKind,
    pub protocol: Option<String>,
    pub adversary: Option<String>,
    pub seed: u64,
    pub params: DeskConfig,
    pub trials: u64,
    pub successes: u64,
    pub failures: u64,
    /// Aborts keyed by the step that aborted.
    pub aborts: BTreeMap<String, u64>,
    /// `successes / trials`.
    pub estimate: f64,
    pub interval: (f64, f64),
    pub resources: Resources,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentReport {
    pub fn new(kind: ExperimentKind, seed: u64, params: DeskConfig) -> Self {
        Self {
            version: CONFIG_VERSION,
            kind,
            protocol: None,
            adversary: None,
            seed,
            params,
            trials: 0,
            successes: 0,
            failures: 0,
            aborts: BTreeMap::new(),
            estimate: 0.0,
            interval: (0.0, 1.0),
            resources: Resources::default(),
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            wall_time: Duration::ZERO,
        }
    }

    pub fn record(&mut self, outcome: &Outcome) {
        self.trials += 1;
        match outcome {
            Outcome::Success => self.successes += 1,
            Outcome::Failure => self.failures += 1,
            Outcome::Abort(step) => *self.aborts.entry(step.clone()).or_default() += 1,
        }
    }

    pub fn abort_count(&self) -> u64 {
        self.aborts.values().sum()
    }

    /// Recomputes the estimate and interval from the counters.
    pub fn finish(&mut self) {
        self.estimate = if self.trials == 0 { 0.0 } else { self.successes as f64 / self.trials as f64 };
        self.interval = wilson_interval(self.successes, self.trials);
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    /// Human-readable summary. Includes the wall time, so it is not byte-stable.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment   {}", self.kind);
        if let Some(p) = &self.protocol {
            let _ = writeln!(s, "protocol     {p}");
        }
        if let Some(a) = &self.adversary {
            let _ = writeln!(s, "adversary    {a}");
        }
        let _ = writeln!(s, "params       n={} k={} d_noise={} margin={}", self.params.n, self.params.k, self.params.d_noise, self.params.margin);
        let _ = writeln!(s, "seed         {}", self.seed);
        let _ = writeln!(s, "trials       {}", self.trials);
        let _ = writeln!(s, "successes    {}", self.successes);
        let _ = writeln!(s, "failures     {}", self.failures);
        let _ = writeln!(s, "aborts       {}", self.abort_count());
        for (step, c) in &self.aborts {
            let _ = writeln!(s, "  {step:<22} {c}");
        }
        let _ = writeln!(s, "estimate     {:.6}  [{:.6}, {:.6}]", self.estimate, self.interval.0, self.interval.1);
        let r = &self.resources;
        let _ = writeln!(
            s,
            "resources    pufs={} exchange_phases={} queries={} comm_bits={}",
            r.pufs_created, r.exchange_phases, r.queries, r.comm_bits
        );
        if !self.metrics.is_empty() {
            let _ = writeln!(s, "metrics");
            for (k, v) in &self.metrics {
                let _ = writeln!(s, "  {k:<34} {v}");
            }
        }
        let _ = writeln!(s, "checks");
        for c in &self.checks {
            let _ = writeln!(s, "  [{}] {:<32} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let _ = writeln!(s, "wall time    {:.3}s", self.wall_time.as_secs_f64());
        s
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        write_file(path, &self.to_json())
    }

    pub fn write_table(&self, path: &Path) -> std::io::Result<()> {
        write_file(path, &self.table())
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
    Abort(String),
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Success
        } else {
            Outcome::Failure
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_matches_reference_values() {
        // Closed form evaluated independently for these points.
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403_831).abs() < 1e-5 && (hi - 0.596_169).abs() < 1e-5, "{lo} {hi}");
        let (lo, hi) = wilson_interval(0, 1000);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.003_826).abs() < 1e-5, "{hi}");
        let (lo, hi) = wilson_interval(1000, 1000);
        assert!((lo - 0.996_174).abs() < 1e-5 && hi == 1.0, "{lo} {hi}");
    }

    #[test]
    fn counters_add_up() {
        let mut r = ExperimentReport::new(ExperimentKind::Fe, 1, DeskConfig::default());
        for o in [Outcome::Success, Outcome::Failure, Outcome::Abort("x".into()), Outcome::Success] {
            r.record(&o);
        }
        r.finish();
        assert_eq!(r.successes + r.failures + r.abort_count(), r.trials);
        assert_eq!(r.estimate, 0.5);
    }
}
