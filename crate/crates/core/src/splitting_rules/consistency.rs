use std::collections::HashMap;

use super::SplittingRule;
use crate::error::{domain, Error, Result};
use crate::numeric::Scalar;
use crate::partitions::IntegerPartition;

/// Left minus right side of the sampling-consistency recursion for every split of `n`,
/// given the `q_n` and `q_{n+1}` tables (missing shapes count as 0).
pub fn residuals_from_tables<S: Scalar>(
    n: usize,
    qn: &HashMap<IntegerPartition, S>,
    qn1: &HashMap<IntegerPartition, S>,
) -> Vec<(IntegerPartition, S)> {
    let get = |p: &IntegerPartition| qn1.get(p).cloned().unwrap_or_else(S::zero);
    let n1 = S::from_u64(n as u64 + 1);
    let top = get(&IntegerPartition::new(vec![n, 1]).unwrap());
    let mut shapes: Vec<&IntegerPartition> = qn.keys().collect();
    shapes.sort();
    let mut out = Vec::new();
    for p in shapes {
        let lhs = qn[p].clone();
        let mut rhs = S::zero();
        // one term per part, duplicates included, divided by the multiplicity of its value
        for &k in p.parts() {
            let bumped = p.bump(k).unwrap();
            let coef = S::from_u64(((k + 1) * (p.multiplicity(k + 1) + 1)) as u64)
                / (n1.clone() * S::from_u64(p.multiplicity(k) as u64));
            rhs = rhs + coef * get(&bumped);
        }
        let m1 = S::from_u64(p.multiplicity(1) as u64 + 1);
        rhs = rhs + m1 / n1.clone() * get(&p.with_part(1));
        rhs = rhs + top.clone() * lhs.clone() / n1.clone();
        out.push((p.clone(), lhs - rhs));
    }
    out
}

/// Largest absolute residual of the consistency recursion at `n`.
pub fn consistency_residual<R: SplittingRule + ?Sized>(rule: &R, n: usize) -> Result<f64> {
    if n < 2 {
        return domain("consistency starts at n = 2");
    }
    let qn = rule.qtable(n)?.to_map();
    let qn1 = rule.qtable(n + 1)?.to_map();
    Ok(residuals_from_tables(n, &qn, &qn1).into_iter().map(|(_, v)| v.abs()).fold(0.0, f64::max))
}

/// Holding rates `λ_2 = 1, ..., λ_nmax` from `λ_{n+1} = λ_n / (1 - q_{n+1}(n,1)/(n+1))`.
pub fn holding_rates<R: SplittingRule + ?Sized>(rule: &R, n_max: usize) -> Result<Vec<f64>> {
    if n_max < 2 {
        return domain("holding rates start at n = 2");
    }
    let mut out = vec![1.0];
    for m in 3..=n_max {
        let p = rule.q(&IntegerPartition::new(vec![m - 1, 1]).unwrap())? / m as f64;
        if p >= 1.0 {
            return Err(Error::Singular(format!("q_{m}({},1) = {m} makes the rate blow up", m - 1)));
        }
        let last = *out.last().unwrap();
        out.push(last / (1.0 - p));
    }
    Ok(out)
}
