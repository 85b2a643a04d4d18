use crate::error::{domain, Result};
use crate::numeric::Scalar;
use crate::partitions::{integer_partitions, IntegerPartition};

/// Erosion `c` plus a finite sum of weighted point masses on mass partitions. Generic so the
/// same code gives floats and exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct Dislocation<S> {
    pub c: S,
    pub atoms: Vec<(S, Vec<S>)>,
}

impl<S: Scalar> Dislocation<S> {
    pub fn validate(&self) -> Result<()> {
        if self.c.is_negative() {
            return domain("erosion coefficient must be nonnegative");
        }
        if self.c.is_zero_value() && self.atoms.is_empty() {
            return domain("dislocation measure is zero");
        }
        for (w, s) in &self.atoms {
            if w.is_negative() || w.is_zero_value() {
                return domain("atom weights must be positive");
            }
            let mut sum = S::zero();
            for (i, x) in s.iter().enumerate() {
                if x.is_negative() {
                    return domain("mass partition has a negative entry");
                }
                if i > 0 && (s[i - 1].clone() - x.clone()).is_negative() {
                    return domain("mass partition must be nonincreasing");
                }
                sum = sum + x.clone();
            }
            if sum.to_f64() > 1.0 + 1e-12 {
                return domain("mass partition sums past 1");
            }
            if s.first().map_or(false, |x| x.to_f64() >= 1.0 - 1e-12) {
                return domain("atom at the trivial partition (1,0,...) carries no splits");
            }
        }
        Ok(())
    }

    /// `Z_n = n c + sum_a w_a (1 - sum_i s_i^n)`.
    pub fn normalizer(&self, n: usize) -> S {
        let mut z = S::from_u64(n as u64) * self.c.clone();
        for (w, s) in &self.atoms {
            let mut keep = S::one();
            for x in s {
                keep = keep - x.powu(n as u32);
            }
            z = z + w.clone() * keep;
        }
        z
    }

    /// Unnormalized weight of one set partition of shape `shape`.
    pub fn weight(&self, shape: &IntegerPartition) -> S {
        let mut out = S::zero();
        if shape.r() == 2 && shape.parts()[1] == 1 {
            out = S::from_u64(shape.multiplicity(1) as u64) * self.c.clone();
        }
        for (w, s) in &self.atoms {
            out = out + w.clone() * paintbox_prob(s, shape);
        }
        out
    }

    pub fn q(&self, shape: &IntegerPartition) -> Result<S> {
        if shape.n() < 2 || shape.r() < 2 {
            return domain(format!("{shape} is not a split"));
        }
        Ok(self.q_with_normalizer(shape, self.normalizer(shape.n())))
    }

    pub(crate) fn q_with_normalizer(&self, shape: &IntegerPartition, z: S) -> S {
        S::from_bigint(&shape.compatible_count()) * self.weight(shape) / z
    }

    /// All `q_n` values for partitions with at least two parts.
    pub fn table(&self, n: usize) -> Vec<(IntegerPartition, S)> {
        let z = self.normalizer(n);
        integer_partitions(n, 2)
            .into_iter()
            .map(|p| {
                let v = self.q_with_normalizer(&p, z.clone());
                (p, v)
            })
            .collect()
    }
}

/// Probability that a paintbox on `s` gives one fixed set partition of shape `shape`:
/// a sum over distinct coordinates, where singleton blocks may also fall into the dust.
fn paintbox_prob<S: Scalar>(s: &[S], shape: &IntegerPartition) -> S {
    let mult = shape.multiplicities();
    let mut stride = vec![1usize; mult.len()];
    for d in 1..mult.len() {
        stride[d] = stride[d - 1] * (mult[d - 1].1 + 1);
    }
    let size = stride.last().unwrap() * (mult.last().unwrap().1 + 1);
    let full: usize = mult.iter().zip(&stride).map(|(&(_, m), &st)| m * st).sum();
    let mut dp = vec![S::zero(); size];
    dp[full] = S::one();
    for x in s.iter().filter(|x| !x.is_zero_value()) {
        let pows: Vec<S> = mult.iter().map(|&(v, _)| x.powu(v as u32)).collect();
        let mut next = dp.clone();
        for (state, val) in dp.iter().enumerate() {
            if val.is_zero_value() {
                continue;
            }
            for d in 0..mult.len() {
                let cnt = (state / stride[d]) % (mult[d].1 + 1);
                if cnt > 0 {
                    let t = val.clone() * S::from_u64(cnt as u64) * pows[d].clone();
                    next[state - stride[d]] = next[state - stride[d]].clone() + t;
                }
            }
        }
        dp = next;
    }
    let mut sum = S::zero();
    for x in s {
        sum = sum + x.clone();
    }
    let mut dust = S::one() - sum;
    if dust.is_negative() {
        dust = S::zero();
    }
    match mult.iter().position(|&(v, _)| v == 1) {
        None => dp[0].clone(),
        Some(d) => {
            let mut out = S::zero();
            for l in 0..=mult[d].1 {
                out = out + dust.powu(l as u32) * dp[l * stride[d]].clone();
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;
    use num::rational::BigRational;

    fn ip(p: &[usize]) -> IntegerPartition {
        IntegerPartition::new(p.to_vec()).unwrap()
    }

    fn half_half() -> Dislocation<BigRational> {
        Dislocation { c: ratio(0, 1), atoms: vec![(ratio(1, 1), vec![ratio(1, 2), ratio(1, 2)])] }
    }

    #[test]
    fn two_halves_at_four() {
        let d = half_half();
        assert_eq!(d.normalizer(4), ratio(7, 8));
        assert_eq!(d.q(&ip(&[3, 1])).unwrap(), ratio(4, 7));
        assert_eq!(d.q(&ip(&[2, 2])).unwrap(), ratio(3, 7));
        assert_eq!(d.q(&ip(&[2, 1, 1])).unwrap(), ratio(0, 1));
    }

    #[test]
    fn thirds_at_three() {
        let t = ratio(1, 3);
        let d = Dislocation { c: ratio(0, 1), atoms: vec![(ratio(1, 1), vec![t.clone(), t.clone(), t])] };
        assert_eq!(d.normalizer(3), ratio(8, 9));
        assert_eq!(d.q(&ip(&[2, 1])).unwrap(), ratio(3, 4));
        assert_eq!(d.q(&ip(&[1, 1, 1])).unwrap(), ratio(1, 4));
    }

    #[test]
    fn pure_erosion_is_a_comb() {
        let d = Dislocation { c: 2.0, atoms: vec![] };
        for n in 2..8 {
            assert_eq!(d.normalizer(n), 2.0 * n as f64);
            let t = d.table(n);
            for (p, v) in t {
                let expect = if p.parts()[1] == 1 && p.r() == 2 { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-15, "{p} {v}");
            }
        }
    }

    // Monte Carlo free oracle: brute-force over set partitions of [n] with per-label colours.
    fn brute(s: &[f64], n: usize) -> std::collections::HashMap<IntegerPartition, f64> {
        let dust = 1.0 - s.iter().sum::<f64>();
        let k = s.len() + 1;
        let mut out = std::collections::HashMap::new();
        let total = k.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut p = 1.0;
            let mut blocks = vec![0usize; s.len()];
            let mut singles = 0;
            for _ in 0..n {
                let col = c % k;
                c /= k;
                if col == s.len() {
                    p *= dust;
                    singles += 1;
                } else {
                    p *= s[col];
                    blocks[col] += 1;
                }
            }
            let mut parts: Vec<usize> = blocks.into_iter().filter(|&b| b > 0).collect();
            parts.extend(std::iter::repeat(1).take(singles));
            *out.entry(IntegerPartition::new(parts).unwrap()).or_insert(0.0) += p;
        }
        out
    }

    #[test]
    fn matches_colouring_enumeration() {
        let s = vec![0.4, 0.25, 0.1];
        let d = Dislocation { c: 0.0, atoms: vec![(1.0, s.clone())] };
        for n in 2..=6 {
            let b = brute(&s, n);
            let z = d.normalizer(n);
            let trivial = b.get(&ip(&[n])).cloned().unwrap_or(0.0);
            assert!((z - (1.0 - trivial)).abs() < 1e-13);
            for (p, v) in d.table(n) {
                let expect = b.get(&p).cloned().unwrap_or(0.0) / z;
                assert!((v - expect).abs() < 1e-12, "n={n} {p}: {v} vs {expect}");
            }
        }
    }

    #[test]
    fn float_and_exact_agree() {
        let e = Dislocation {
            c: ratio(1, 3),
            atoms: vec![(ratio(2, 1), vec![ratio(1, 2), ratio(1, 4)]), (ratio(1, 1), vec![ratio(1, 3); 3])],
        };
        let f = Dislocation {
            c: 1.0 / 3.0,
            atoms: vec![(2.0, vec![0.5, 0.25]), (1.0, vec![1.0 / 3.0; 3])],
        };
        for n in 2..=7 {
            let te = e.table(n);
            let tf = f.table(n);
            let mut total = ratio(0, 1);
            for ((pe, ve), (pf, vf)) in te.iter().zip(&tf) {
                assert_eq!(pe, pf);
                assert!((ve.to_f64() - vf).abs() < 1e-13);
                total = total + ve.clone();
            }
            assert_eq!(total, ratio(1, 1));
        }
    }
}
