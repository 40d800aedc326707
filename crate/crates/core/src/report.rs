//! Run reports and the benchmark corpus runner.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{GraphError, IsoError};
use crate::generate::{generate, random_permutation, Family};
use crate::iso::{isomorphisms_with_stats, IsoOutcome, IsoParams, IsoStats, Side};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportParams {
    pub h: Option<usize>,
    pub t: Option<u64>,
    pub a_deg: Option<u64>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub budget: Option<u64>,
}

impl ReportParams {
    pub fn of_iso(params: &IsoParams, seed: Option<u64>) -> Self {
        ReportParams {
            h: Some(params.closure.h),
            t: Some(params.closure.t()),
            a_deg: Some(params.closure.a_deg),
            seed,
            k: None,
            budget: Some(params.budget),
        }
    }
}

/// Phase timings in microseconds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub refinement_us: u64,
    pub closure_us: u64,
    pub group_us: u64,
    pub search_us: u64,
    pub total_us: u64,
}

fn micros(d: Duration) -> u64 {
    d.as_micros().min(u64::MAX as u128) as u64
}

impl Timings {
    pub fn from_stats(stats: &IsoStats, total: Duration) -> Self {
        Timings {
            refinement_us: micros(stats.refinement),
            closure_us: micros(stats.closure),
            group_us: micros(stats.group_ops),
            search_us: micros(stats.search),
            total_us: micros(total),
        }
    }

    pub fn total(total: Duration) -> Self {
        Timings { total_us: micros(total), ..Timings::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<String>,
    pub params: ReportParams,
    pub outcome: String,
    /// Command-specific key/value results.
    pub details: Vec<(String, String)>,
    pub timings: Timings,
    pub nodes: u64,
    pub peak_classes: usize,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport { command: command.to_string(), ..RunReport::default() }
    }

    pub fn detail(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.details.push((key.to_string(), value.to_string()));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// The report with all timings zeroed, for determinism comparisons.
    pub fn without_timings(&self) -> Self {
        RunReport { timings: Timings::default(), ..self.clone() }
    }
}

pub fn outcome_name(o: &IsoOutcome) -> String {
    match o {
        IsoOutcome::NonIsomorphic => "non-isomorphic".into(),
        IsoOutcome::Isomorphic(_) => "isomorphic".into(),
        IsoOutcome::Detected(Side::First) => "detected:first".into(),
        IsoOutcome::Detected(Side::Second) => "detected:second".into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchSpec {
    pub families: Vec<Family>,
    /// Instances per family.
    pub count: usize,
    pub seed: u64,
}

/// Runs `isomorphisms(g, g^p)` on a seeded corpus. Reports come back in
/// instance order.
pub fn bench(spec: &BenchSpec, params: &IsoParams) -> Result<Vec<RunReport>, GraphError> {
    let mut out = Vec::new();
    for family in &spec.families {
        for i in 0..spec.count {
            let seed = spec.seed.wrapping_add(i as u64);
            let g = generate(family, seed)?;
            let p = random_permutation(g.n(), seed ^ 0x9e37_79b9);
            let h = g.apply_permutation(&p)?;
            let mut report = RunReport::new("bench");
            report.inputs = vec![format!("{family}#{seed}")];
            report.params = ReportParams::of_iso(params, Some(seed));
            let start = Instant::now();
            match isomorphisms_with_stats(&g, &h, params) {
                Ok((outcome, stats)) => {
                    report.outcome = outcome_name(&outcome);
                    if let IsoOutcome::Isomorphic(c) = &outcome {
                        report.detail("aut_order", c.group().order());
                        report.detail("contains_p", c.contains(&p).unwrap_or(false));
                    }
                    report.detail("max_depth", stats.max_depth);
                    report.nodes = stats.nodes;
                    report.peak_classes = stats.peak_classes;
                    report.timings = Timings::from_stats(&stats, start.elapsed());
                }
                Err(IsoError::Budget(b)) => {
                    report.outcome = "budget".into();
                    report.detail("budget", b);
                    report.timings = Timings::total(start.elapsed());
                }
                Err(e) => {
                    report.outcome = "error".into();
                    report.detail("error", e);
                    report.timings = Timings::total(start.elapsed());
                }
            }
            report.detail("n", g.n());
            out.push(report);
        }
    }
    Ok(out)
}

/// Aggregate table: one row per family with outcome counts and time.
pub fn bench_table(reports: &[RunReport]) -> String {
    use std::collections::BTreeMap;
    let mut rows: BTreeMap<String, (usize, usize, usize, usize, u64)> = BTreeMap::new();
    for r in reports {
        let family = r.inputs.first().map(|s| s.split('#').next().unwrap_or("").to_string()).unwrap_or_default();
        let row = rows.entry(family).or_default();
        row.0 += 1;
        match r.outcome.as_str() {
            "isomorphic" => row.1 += 1,
            o if o.starts_with("detected") => row.2 += 1,
            _ => row.3 += 1,
        }
        row.4 += r.timings.total_us;
    }
    let mut out = format!("{:<32} {:>5} {:>5} {:>8} {:>6} {:>10}\n", "family", "runs", "iso", "detected", "other", "ms");
    for (family, (runs, iso, det, other, us)) in rows {
        out.push_str(&format!("{family:<32} {runs:>5} {iso:>5} {det:>8} {other:>6} {:>10.1}\n", us as f64 / 1000.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut r = RunReport::new("iso");
        r.inputs = vec!["a.grf".into()];
        r.outcome = "isomorphic".into();
        r.detail("aut_order", 12);
        let back = RunReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn bench_is_deterministic() {
        let spec = BenchSpec { families: vec![Family::RandomMaxDegree { n: 10, d: 3 }], count: 2, seed: 3 };
        let params = IsoParams::new(5);
        let a = bench(&spec, &params).unwrap();
        let b = bench(&spec, &params).unwrap();
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|r| r.outcome == "isomorphic"));
        let strip = |v: &[RunReport]| v.iter().map(RunReport::without_timings).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
        let empty = BenchSpec { families: vec![], count: 3, seed: 0 };
        assert!(bench(&empty, &params).unwrap().is_empty());
        assert!(bench_table(&a).contains("random_max_degree(10,3)"));
    }
}
