use fragtree::diagnostics::{ks_two_sample, EmpiricalSummary};
use fragtree::linebreak::{assemble_tree, run_chain};
use fragtree::partitions::{integer_partitions, paintbox_sample, IntegerPartition};
use fragtree::samplers::{grow_ford, MarkovBranching, RngState};
use fragtree::splitting_rules::{consistency_residual, RuleSpec, SplittingRule};
use fragtree::trees::{distortion, parse_newick, reduce, Cladogram, EdgeWeightedTree, Label};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn sample_tree(beta: f64, n: usize, seed: u64) -> Cladogram {
    let rule = RuleSpec::beta(beta).unwrap();
    let mb = MarkovBranching::new(&rule, n).unwrap();
    mb.sample(n, &mut RngState::new(seed).rng()).unwrap()
}

fn jittered(tree: &Cladogram, seed: u64) -> EdgeWeightedTree {
    use rand::Rng;
    let mut rng = RngState::new(seed).with_stream(9).rng();
    let topo = tree.topology();
    let lengths: Vec<f64> = (0..topo.len()).map(|v| if v == 0 { 0.0 } else { rng.gen_range(0.1..2.0) }).collect();
    EdgeWeightedTree::new(topo, &lengths).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summary_merge_is_associative(
        a in prop::collection::vec(-1e3f64..1e3, 1..40),
        b in prop::collection::vec(-1e3f64..1e3, 1..40),
        c in prop::collection::vec(-1e3f64..1e3, 1..40),
    ) {
        let (sa, sb, sc) = (
            EmpiricalSummary::new(&a).unwrap(),
            EmpiricalSummary::new(&b).unwrap(),
            EmpiricalSummary::new(&c).unwrap(),
        );
        let left = sa.merge(&sb).merge(&sc);
        let right = sa.merge(&sb.merge(&sc));
        let all: Vec<f64> = a.iter().chain(&b).chain(&c).cloned().collect();
        let direct = EmpiricalSummary::new(&all).unwrap();
        prop_assert_eq!(left.count(), direct.count());
        prop_assert_eq!(left.sorted(), direct.sorted());
        prop_assert_eq!(right.sorted(), direct.sorted());
        prop_assert!(close(left.mean(), right.mean(), 1e-12));
        prop_assert!(close(left.mean(), direct.mean(), 1e-12));
        prop_assert!(close(left.variance(), direct.variance(), 1e-9));
        prop_assert!(close(right.variance(), direct.variance(), 1e-9));
    }

    #[test]
    fn summary_ignores_order(mut xs in prop::collection::vec(0f64..10.0, 2..60), split in 1usize..59) {
        let split = split.min(xs.len() - 1);
        let whole = EmpiricalSummary::new(&xs).unwrap();
        let (l, r) = xs.split_at(split);
        let merged = EmpiricalSummary::new(r).unwrap().merge(&EmpiricalSummary::new(l).unwrap());
        xs.reverse();
        let rev = EmpiricalSummary::new(&xs).unwrap();
        prop_assert_eq!(merged.sorted(), whole.sorted());
        prop_assert_eq!(rev.sorted(), whole.sorted());
        prop_assert!(close(merged.median(), whole.median(), 0.0));
        prop_assert!(close(merged.variance(), whole.variance(), 1e-9));
    }

    #[test]
    fn ks_is_symmetric_and_bounded(
        a in prop::collection::vec(0f64..1.0, 1..50),
        b in prop::collection::vec(0f64..1.0, 1..50),
    ) {
        let ab = ks_two_sample(&a, &b).unwrap();
        let ba = ks_two_sample(&b, &a).unwrap();
        prop_assert!((ab.statistic - ba.statistic).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&ab.statistic));
        prop_assert!((0.0..=1.0).contains(&ab.p));
    }

    #[test]
    fn integer_partitions_are_sorted_and_sum(n in 2usize..14) {
        for p in integer_partitions(n, 2) {
            prop_assert_eq!(p.n(), n);
            prop_assert!(p.r() >= 2);
            prop_assert!(p.parts().windows(2).all(|w| w[0] >= w[1]));
            let back: IntegerPartition = p.to_string().parse().unwrap();
            prop_assert_eq!(back, p);
        }
    }

    #[test]
    fn paintbox_covers_labels(x in 0.0f64..0.5, y in 0.0f64..0.5, n in 1usize..30, seed in any::<u64>()) {
        let s = [x.max(y), x.min(y)];
        let pi = paintbox_sample(&s, n, &mut RngState::new(seed).rng()).unwrap();
        prop_assert_eq!(pi.size(), n);
        prop_assert_eq!(pi.labels(), (1..=n as Label).collect::<Vec<_>>());
        prop_assert_eq!(pi.shape().n(), n);
    }

    #[test]
    fn qtables_sum_to_one(beta in -1.95f64..3.0, alpha in 0.0f64..1.0, n in 2usize..25) {
        for rule in [RuleSpec::beta(beta).unwrap(), RuleSpec::ford(alpha).unwrap()] {
            let q = rule.qtable(n).unwrap();
            prop_assert!((q.total() - 1.0).abs() < 1e-10, "{:?} n={} total={}", rule, n, q.total());
            prop_assert!(q.entries().iter().all(|(_, v)| *v >= 0.0));
        }
    }

    #[test]
    fn binary_families_are_consistent(beta in -1.95f64..2.0, alpha in 0.0f64..1.0, n in 3usize..12) {
        prop_assert!(consistency_residual(&RuleSpec::beta(beta).unwrap(), n).unwrap() < 1e-9);
        prop_assert!(consistency_residual(&RuleSpec::ford(alpha).unwrap(), n).unwrap() < 1e-9);
    }

    #[test]
    fn newick_round_trip(beta in -1.9f64..1.0, n in 1usize..30, seed in any::<u64>()) {
        let t = sample_tree(beta, n, seed);
        prop_assert!(t.is_binary());
        prop_assert_eq!(t.n_leaves(), n);
        let w = jittered(&t, seed);
        let back = parse_newick(&w.newick()).unwrap();
        prop_assert!(back.approx_eq(&w, 1e-12));
        prop_assert_eq!(back.shape(), t);
    }

    #[test]
    fn distortion_is_a_semimetric(n in 2usize..12, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = jittered(&sample_tree(-1.5, n, s1), s1);
        let b = jittered(&sample_tree(-1.5, n, s2), s2);
        prop_assert!(distortion(&a, &a).unwrap().abs() < 1e-12);
        let ab = distortion(&a, &b).unwrap();
        prop_assert!((ab - distortion(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn reduction_keeps_distances(n in 3usize..20, m in 1usize..20, seed in any::<u64>()) {
        let m = m.min(n);
        let w = jittered(&sample_tree(0.0, n, seed), seed);
        let keep: Vec<Label> = (1..=m as Label).collect();
        let r = reduce(&w, &keep).unwrap();
        prop_assert_eq!(r.leaf_labels(), keep.clone());
        // reducing twice changes nothing
        prop_assert!(reduce(&r, &keep).unwrap().approx_eq(&r, 1e-12));
        prop_assert!(r.total_length() <= w.total_length() + 1e-9);
        prop_assert!(reduce(&w, &w.leaf_labels()).unwrap().approx_eq(&w.canonical(), 1e-12));
    }

    #[test]
    fn ford_growth_is_binary(alpha in 0.0f64..1.0, n in 1usize..40, seed in any::<u64>()) {
        let t = grow_ford(alpha, n, &mut RngState::new(seed).rng()).unwrap();
        prop_assert_eq!(t.n_leaves(), n);
        prop_assert!(t.unordered().is_binary());
        let mut order = t.leaf_order();
        order.sort();
        prop_assert_eq!(order, (1..=n as Label).collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chain_proportions_sum_to_one(a in 0usize..2, k in 1usize..8, seed in any::<u64>()) {
        let alpha = [0.5, 0.7][a];
        let (state, trace) = run_chain(alpha, k, &mut RngState::new(seed).rng()).unwrap();
        state.check().unwrap();
        prop_assert_eq!(state.k(), k);
        prop_assert_eq!(trace.len(), k);
        let p = state.proportions();
        prop_assert_eq!(p.len(), 2 * k - 1);
        prop_assert!(p.iter().all(|&x| x > 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(trace.windows(2).all(|w| w[1].s_k > w[0].s_k));
        let tree = assemble_tree(&state).unwrap();
        prop_assert!((tree.total_length() - state.total()).abs() < 1e-9 * state.total());
    }
}
