//! Experiment drivers. Each one builds a construction, evaluates it exactly
//! (or by seeded simulation) and returns a [`Report`] whose verdict compares
//! the measured quantities against a declared inequality.

mod bounds;
pub mod fuzz;
mod gadget;
mod sampling;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use bounds::{check_approx_monotone, check_single_bidder_bound, lipschitz_closed_form, run_lipschitz_lb, Closeness};
pub use gadget::{embed_counterexample, embedded_priors, gadget_priors, run_copies, run_nonmonotone};
pub use sampling::{
    lb_family_member, run_dominated_empirical, run_lb_family, run_sample_complexity, LB_LEARNER_DELTA,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// Outcome of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub seed: Option<u64>,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Report {
            experiment: experiment.to_string(),
            params: BTreeMap::new(),
            metrics: BTreeMap::new(),
            verdict: Verdict::Fail,
            seed: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn verdict(mut self, ok: bool) -> Self {
        self.verdict = Verdict::from_bool(ok);
        self
    }

    /// Metric lookup; panics on a missing key.
    pub fn get(&self, key: &str) -> f64 {
        match self.metrics.get(key) {
            Some(v) => *v,
            None => panic!("report {} has no metric {key}", self.experiment),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per metric: `experiment,k1=v1;k2=v2,metric,value,verdict`.
    pub fn to_csv(&self) -> String {
        let params = self
            .params
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect::<Vec<_>>()
            .join(";");
        let mut out = String::from("experiment,params,metric,value,verdict\n");
        for (metric, value) in &self.metrics {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.experiment,
                csv_field(&params),
                metric,
                value,
                self.verdict.as_str()
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
