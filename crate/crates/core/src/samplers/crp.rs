use rand::Rng;

use crate::error::{domain, Result};
use crate::partitions::SetPartition;
use crate::trees::Label;

/// Two-parameter Chinese restaurant seating of customers `1..=customers`.
pub fn sample_crp<R: Rng + ?Sized>(alpha: f64, theta: f64, customers: usize, rng: &mut R) -> Result<SetPartition> {
    if !(0.0..1.0).contains(&alpha) || !(theta > -alpha) {
        return domain(format!("need 0 <= alpha < 1 and theta > -alpha, got ({alpha}, {theta})"));
    }
    if customers == 0 {
        return domain("at least one customer is required");
    }
    let mut tables: Vec<Vec<Label>> = Vec::new();
    for i in 0..customers {
        let seated = i as f64;
        let t = tables.len() as f64;
        let u = rng.gen::<f64>() * (seated + theta);
        let mut acc = theta + t * alpha;
        if tables.is_empty() || u < acc {
            tables.push(vec![i as Label + 1]);
            continue;
        }
        let mut chosen = tables.len() - 1;
        for (j, tab) in tables.iter().enumerate() {
            acc += tab.len() as f64 - alpha;
            if u < acc {
                chosen = j;
                break;
            }
        }
        tables[chosen].push(i as Label + 1);
    }
    SetPartition::new(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RngState;

    #[test]
    fn two_customers() {
        let mut rng = RngState::new(6).rng();
        let reps = 30_000;
        let mut same = 0;
        for _ in 0..reps {
            let p = sample_crp(0.5, 0.5, 2, &mut rng).unwrap();
            assert_eq!(p.blocks()[0][0], 1);
            if p.n_blocks() == 1 {
                same += 1;
            }
        }
        let f = same as f64 / reps as f64;
        assert!((f - 1.0 / 3.0).abs() < 4.0 * (2.0 / 9.0 / reps as f64).sqrt(), "{f}");
    }

    #[test]
    fn table_count_scaling() {
        // tables after m customers grow like m^alpha
        let (alpha, theta) = (0.5, 0.5);
        let mut rng = RngState::new(7).rng();
        let mean = |m: usize, rng: &mut rand_chacha::ChaCha8Rng| {
            let reps = 2000;
            (0..reps).map(|_| sample_crp(alpha, theta, m, rng).unwrap().n_blocks() as f64).sum::<f64>()
                / reps as f64
                / (m as f64).powf(alpha)
        };
        let a = mean(400, &mut rng);
        let b = mean(1600, &mut rng);
        assert!((a / b - 1.0).abs() < 0.08, "{a} {b}");
    }

    #[test]
    fn bad_parameters() {
        let mut rng = RngState::new(1).rng();
        assert!(sample_crp(1.0, 0.0, 3, &mut rng).is_err());
        assert!(sample_crp(0.5, -0.5, 3, &mut rng).is_err());
    }
}
