//! Splitting rules `q_n` on integer partitions: the beta, Ford and stable families and finite
//! dislocation measures with erosion, together with normalizers, consistency residuals, holding
//! rates and recovery of the dislocation measure.

mod binary;
mod consistency;
mod dislocation;
mod stable;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::partitions::{integer_partitions, IntegerPartition};

pub use binary::{
    beta_constant, desymmetrize, dislocation_density, ford_density, normalizer_beta, normalizer_ford, qtilde_beta,
    qtilde_beta_vec, qtilde_ford, qtilde_ford_vec, recover_dislocation_mass, stable_levy_density, symmetrize,
    BinaryFamily,
};
pub use consistency::{consistency_residual, holding_rates, residuals_from_tables};
pub use dislocation::Dislocation;
pub use stable::{normalizer_stable, q_stable};

/// Largest `n` for which tables over all integer partitions are built.
pub const MAX_GENERAL_N: usize = 40;

/// One atom `w · δ_s` of a finite dislocation measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub w: f64,
    pub s: Vec<f64>,
}

/// A splitting-rule family with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum RuleSpec {
    BetaSplit { beta: f64 },
    FordAlpha { alpha: f64 },
    StableAlpha { alpha: f64 },
    FiniteDislocation { c: f64, atoms: Vec<Atom> },
}

#[derive(Serialize, Deserialize)]
struct RuleJson {
    model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<Atom>>,
}

impl RuleSpec {
    pub fn beta(beta: f64) -> Result<Self> {
        let r = RuleSpec::BetaSplit { beta };
        r.validate()?;
        Ok(r)
    }

    pub fn ford(alpha: f64) -> Result<Self> {
        let r = RuleSpec::FordAlpha { alpha };
        r.validate()?;
        Ok(r)
    }

    pub fn stable(alpha: f64) -> Result<Self> {
        let r = RuleSpec::StableAlpha { alpha };
        r.validate()?;
        Ok(r)
    }

    pub fn finite(c: f64, atoms: Vec<Atom>) -> Result<Self> {
        let r = RuleSpec::FiniteDislocation { c, atoms };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RuleSpec::BetaSplit { beta } => {
                if !(*beta > -2.0 && beta.is_finite()) {
                    return domain(format!("beta must exceed -2, got {beta}"));
                }
            }
            RuleSpec::FordAlpha { alpha } => {
                if !(0.0..1.0).contains(alpha) {
                    return domain(format!("Ford alpha must lie in [0,1), got {alpha}"));
                }
            }
            RuleSpec::StableAlpha { alpha } => {
                if !(*alpha > 1.0 && *alpha < 2.0) {
                    return domain(format!("stable alpha must lie in (1,2), got {alpha}"));
                }
            }
            RuleSpec::FiniteDislocation { .. } => {
                self.dislocation().unwrap().validate()?;
            }
        }
        Ok(())
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, RuleSpec::BetaSplit { .. } | RuleSpec::FordAlpha { .. })
    }

    /// Self-similarity index of the scaling limit, when the family has one.
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            RuleSpec::BetaSplit { beta } if beta > -2.0 && beta < -1.0 => Some(-beta - 1.0),
            RuleSpec::FordAlpha { alpha } if alpha > 0.0 => Some(alpha),
            RuleSpec::StableAlpha { alpha } => Some(1.0 - 1.0 / alpha),
            _ => None,
        }
    }

    pub fn dislocation(&self) -> Option<Dislocation<f64>> {
        match self {
            RuleSpec::FiniteDislocation { c, atoms } => Some(Dislocation {
                c: *c,
                atoms: atoms.iter().map(|a| (a.w, a.s.clone())).collect(),
            }),
            _ => None,
        }
    }

    /// `q̃_n(k)`, k = 1..n-1, for the binary families.
    pub fn qtilde(&self, n: usize) -> Result<Vec<f64>> {
        match *self {
            RuleSpec::BetaSplit { beta } => qtilde_beta_vec(beta, n),
            RuleSpec::FordAlpha { alpha } => qtilde_ford_vec(alpha, n),
            _ => domain("q-tilde is only defined for binary families"),
        }
    }

    pub fn normalizer(&self, n: usize) -> Result<f64> {
        if n < 2 {
            return domain("normalizer needs n >= 2");
        }
        match *self {
            RuleSpec::BetaSplit { beta } => normalizer_beta(beta, n),
            RuleSpec::FordAlpha { alpha } => normalizer_ford(alpha, n),
            RuleSpec::StableAlpha { alpha } => normalizer_stable(alpha, n),
            RuleSpec::FiniteDislocation { .. } => Ok(self.dislocation().unwrap().normalizer(n)),
        }
    }

    pub fn to_json(&self) -> String {
        let j = match self {
            RuleSpec::BetaSplit { beta } => RuleJson { model: "beta".into(), param: Some(*beta), c: None, atoms: None },
            RuleSpec::FordAlpha { alpha } => RuleJson { model: "ford".into(), param: Some(*alpha), c: None, atoms: None },
            RuleSpec::StableAlpha { alpha } => {
                RuleJson { model: "stable".into(), param: Some(*alpha), c: None, atoms: None }
            }
            RuleSpec::FiniteDislocation { c, atoms } => {
                RuleJson { model: "paintbox".into(), param: None, c: Some(*c), atoms: Some(atoms.clone()) }
            }
        };
        serde_json::to_string(&j).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: RuleJson = serde_json::from_str(text).map_err(|e| Error::Parse {
            pos: e.column(),
            msg: format!("rule JSON: {e}"),
        })?;
        let need = |p: Option<f64>| p.ok_or_else(|| Error::Domain(format!("model '{}' needs \"param\"", j.model)));
        match j.model.as_str() {
            "beta" => RuleSpec::beta(need(j.param)?),
            "ford" => RuleSpec::ford(need(j.param)?),
            "stable" => RuleSpec::stable(need(j.param)?),
            "paintbox" => RuleSpec::finite(j.c.unwrap_or(0.0), j.atoms.unwrap_or_default()),
            other => domain(format!("unknown model '{other}'")),
        }
    }

    /// `name:param`, `paintbox:@file.json`, or an inline JSON object.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            return Self::from_json(text);
        }
        let (name, arg) = text
            .split_once(':')
            .ok_or_else(|| Error::Parse { pos: 0, msg: format!("expected name:param, got '{text}'") })?;
        if let Some(path) = arg.strip_prefix('@') {
            let body = std::fs::read_to_string(Path::new(path))
                .map_err(|e| Error::Domain(format!("cannot read {path}: {e}")))?;
            let rule = Self::from_json(&body)?;
            if name != "paintbox" && rule.model_name() != name {
                return domain(format!("file {path} holds a '{}' rule", rule.model_name()));
            }
            return Ok(rule);
        }
        let param: f64 = arg
            .parse()
            .map_err(|_| Error::Parse { pos: name.len() + 1, msg: format!("bad parameter '{arg}'") })?;
        match name {
            "beta" => RuleSpec::beta(param),
            "ford" => RuleSpec::ford(param),
            "stable" => RuleSpec::stable(param),
            "erosion" => RuleSpec::finite(param, vec![]),
            other => domain(format!("unknown model '{other}'")),
        }
    }

    pub fn model_name(&self) -> &'static str {
        match self {
            RuleSpec::BetaSplit { .. } => "beta",
            RuleSpec::FordAlpha { .. } => "ford",
            RuleSpec::StableAlpha { .. } => "stable",
            RuleSpec::FiniteDislocation { .. } => "paintbox",
        }
    }
}

/// A distribution on integer partitions of `n` with at least two parts.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    pub n: usize,
    entries: Vec<(IntegerPartition, f64)>,
}

impl QTable {
    pub fn new(n: usize, mut entries: Vec<(IntegerPartition, f64)>) -> Result<Self> {
        for (p, v) in &entries {
            if p.n() != n || p.r() < 2 {
                return domain(format!("partition {p} is not a split of {n}"));
            }
            if !(*v >= 0.0) {
                return domain(format!("negative probability {v} at {p}"));
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(QTable { n, entries })
    }

    pub fn entries(&self) -> &[(IntegerPartition, f64)] {
        &self.entries
    }

    pub fn get(&self, p: &IntegerPartition) -> f64 {
        self.entries.iter().find(|(q, _)| q == p).map(|e| e.1).unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn to_map(&self) -> HashMap<IntegerPartition, f64> {
        self.entries.iter().cloned().collect()
    }

    /// CSV rows `n,partition,probability`; `header` adds the column names.
    pub fn to_csv(&self, header: bool) -> String {
        let mut s = String::new();
        if header {
            s.push_str("n,partition,probability\n");
        }
        for (p, v) in &self.entries {
            writeln!(s, "{},{},{}", self.n, p, v).unwrap();
        }
        s
    }
}

/// Anything that assigns probabilities `q_n(shape)` to splits.
pub trait SplittingRule: Send + Sync {
    fn q(&self, shape: &IntegerPartition) -> Result<f64>;

    fn qtable(&self, n: usize) -> Result<QTable> {
        if n < 2 {
            return domain("splitting rules start at n = 2");
        }
        if n > MAX_GENERAL_N {
            return Err(Error::Capacity(format!("tables over all partitions stop at n = {MAX_GENERAL_N}")));
        }
        let mut entries = Vec::new();
        for p in integer_partitions(n, 2) {
            let v = self.q(&p)?;
            entries.push((p, v));
        }
        QTable::new(n, entries)
    }

    fn is_binary(&self) -> bool {
        false
    }
}

impl SplittingRule for RuleSpec {
    fn q(&self, shape: &IntegerPartition) -> Result<f64> {
        let n = shape.n();
        if n < 2 || shape.r() < 2 {
            return domain(format!("{shape} is not a split"));
        }
        match *self {
            RuleSpec::BetaSplit { .. } | RuleSpec::FordAlpha { .. } => {
                if shape.r() != 2 {
                    return Ok(0.0);
                }
                let qt = self.qtilde(n)?;
                let k = shape.parts()[1];
                Ok(if 2 * k == n { qt[k - 1] } else { qt[k - 1] + qt[n - k - 1] })
            }
            RuleSpec::StableAlpha { alpha } => q_stable(alpha, shape),
            RuleSpec::FiniteDislocation { .. } => self.dislocation().unwrap().q(shape),
        }
    }

    fn qtable(&self, n: usize) -> Result<QTable> {
        if self.is_binary() {
            if n < 2 {
                return domain("splitting rules start at n = 2");
            }
            return Ok(symmetrize(&self.qtilde(n)?, n));
        }
        if n < 2 {
            return domain("splitting rules start at n = 2");
        }
        if n > MAX_GENERAL_N {
            return Err(Error::Capacity(format!("tables over all partitions stop at n = {MAX_GENERAL_N}")));
        }
        let entries = match self {
            RuleSpec::FiniteDislocation { .. } => {
                let d = self.dislocation().unwrap();
                let z = d.normalizer(n);
                integer_partitions(n, 2).into_iter().map(|p| {
                    let v = d.q_with_normalizer(&p, z);
                    (p, v)
                }).collect()
            }
            _ => {
                let mut e = Vec::new();
                for p in integer_partitions(n, 2) {
                    let v = self.q(&p)?;
                    e.push((p, v));
                }
                e
            }
        };
        QTable::new(n, entries)
    }

    fn is_binary(&self) -> bool {
        RuleSpec::is_binary(self)
    }
}

/// A rule given by explicit tables, for hand-built examples.
#[derive(Clone, Debug, Default)]
pub struct TabulatedRule {
    tables: HashMap<usize, QTable>,
}

impl TabulatedRule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_table(mut self, table: QTable) -> Self {
        self.tables.insert(table.n, table);
        self
    }

    /// Copy tables of another rule for `ns`.
    pub fn from_rule<R: SplittingRule + ?Sized>(rule: &R, ns: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut t = Self::new();
        for n in ns {
            t = t.with_table(rule.qtable(n)?);
        }
        Ok(t)
    }
}

impl SplittingRule for TabulatedRule {
    fn q(&self, shape: &IntegerPartition) -> Result<f64> {
        match self.tables.get(&shape.n()) {
            Some(t) => Ok(t.get(shape)),
            None => domain(format!("no table for n = {}", shape.n())),
        }
    }

    fn qtable(&self, n: usize) -> Result<QTable> {
        self.tables.get(&n).cloned().ok_or_else(|| Error::Domain(format!("no table for n = {n}")))
    }
}
