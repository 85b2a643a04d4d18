//! Verification harness: goodness-of-fit statistics, an exact Galton-Watson oracle, and
//! convergence reports for the scaling limits.

mod oracle;
mod reports;
mod stats;

use serde::Serialize;

pub use oracle::{gw_conditioned_oracle, gw_offspring, GwOracle, GW_MAX_N};
pub use reports::{
    empirical_split_distribution, reduced_tree_convergence, scaling_report, spinal_proportion_check, sub_seed,
    CrossKs, ReducedReport, ScalingReport, ScalingRow, ShapeEstimate, SpinalReport, SplitReport, SplitSampler,
};
pub use stats::{
    chi_square, kolmogorov_tail, ks_one_sample, ks_two_sample, ChiSquare, EmpiricalSummary, KsResult, TabulatedCdf,
};

/// Outcome of one gate, serialised as `{"check", "statistic", "p", "pass", "seed"}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub statistic: f64,
    pub p: Option<f64>,
    pub pass: bool,
    pub seed: u64,
}

impl Verdict {
    pub fn new(check: impl Into<String>, statistic: f64, p: Option<f64>, pass: bool, seed: u64) -> Self {
        Verdict { check: check.into(), statistic, p, pass, seed }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdicts serialise")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_json() {
        let v = Verdict::new("residual", 1e-12, None, true, 7);
        let j: serde_json::Value = serde_json::from_str(&v.to_json()).unwrap();
        assert_eq!(j["check"], "residual");
        assert_eq!(j["pass"], true);
        assert_eq!(j["seed"], 7);
        assert!(j["p"].is_null());
    }
}
