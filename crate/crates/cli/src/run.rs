use std::error::Error as StdError;
use std::fmt::Write as _;
use std::io::Write as _;

use fragtree::diagnostics::{gw_conditioned_oracle, scaling_report, spinal_proportion_check, Verdict};
use fragtree::linebreak::{assemble_tree, run_chain, TraceRow};
use fragtree::samplers::{par_reps, FordGrowth, MarchalGrowth, MarkovBranching};
use fragtree::splitting_rules::{consistency_residual, RuleSpec, SplittingRule};
use fragtree::trees::EdgeWeightedTree;
use serde_json::json;

use crate::{Command, Format, RunConfig};

type Fail = Box<dyn StdError>;

pub enum Status {
    Ok,
    GateFailed,
}

const RESIDUAL_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-12;

fn usage(msg: impl Into<String>) -> Fail {
    msg.into().into()
}

fn model(cfg: &RunConfig) -> Result<RuleSpec, Fail> {
    let text = cfg.model.as_deref().ok_or_else(|| usage("--model is required"))?;
    Ok(RuleSpec::parse(text)?)
}

fn need_n(cfg: &RunConfig) -> Result<usize, Fail> {
    cfg.n.ok_or_else(|| usage("--n is required"))
}

fn format(cfg: &RunConfig, default: Format, allowed: &[Format]) -> Result<Format, Fail> {
    let f = cfg.format.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(usage(format!("--format {f:?} is not available here").to_lowercase()));
    }
    Ok(f)
}

fn emit(cfg: &RunConfig, body: &str) -> Result<(), Fail> {
    match &cfg.out {
        Some(path) => std::fs::write(path, body).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn ford_alpha(rule: &RuleSpec) -> Result<f64, Fail> {
    match rule {
        RuleSpec::FordAlpha { alpha } if *alpha > 0.0 && *alpha < 1.0 => Ok(*alpha),
        _ => Err(usage("this subcommand needs --model ford:α with α in (0,1)")),
    }
}

fn verdicts(cfg: &RunConfig, vs: &[Verdict]) -> Result<Status, Fail> {
    let f = format(cfg, Format::Json, &[Format::Json, Format::Csv])?;
    let mut s = String::new();
    if f == Format::Csv {
        s.push_str("check,statistic,p,pass,seed\n");
    }
    for v in vs {
        if f == Format::Json {
            s.push_str(&v.to_json());
        } else {
            let p = v.p.map(|p| p.to_string()).unwrap_or_default();
            write!(s, "{},{},{},{},{}", v.check, v.statistic, p, v.pass, v.seed)?;
        }
        s.push('\n');
    }
    emit(cfg, &s)?;
    Ok(if vs.iter().all(|v| v.pass) { Status::Ok } else { Status::GateFailed })
}

pub fn execute(cmd: &Command) -> Result<Status, Fail> {
    match cmd {
        Command::Qtable(c) => qtable(c),
        Command::Simulate(c) => simulate(c),
        Command::Growth(c) => growth(c),
        Command::Linebreak(c) => linebreak(c),
        Command::Verify(c) => verify(c),
        Command::Scaling(c) => scaling(c),
        Command::Spine(c) => spine(c),
    }
}

fn qtable(cfg: &RunConfig) -> Result<Status, Fail> {
    let rule = model(cfg)?;
    let q = rule.qtable(need_n(cfg)?)?;
    let body = match format(cfg, Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Csv => q.to_csv(true),
        _ => {
            let rows: Vec<_> =
                q.entries().iter().map(|(p, v)| json!({"partition": p.to_string(), "probability": v})).collect();
            format!("{}\n", json!({"model": rule.model_name(), "n": q.n, "rows": rows}))
        }
    };
    emit(cfg, &body)?;
    Ok(Status::Ok)
}

fn tree_lines(trees: &[(usize, usize, EdgeWeightedTree)], f: Format) -> String {
    let mut s = String::new();
    match f {
        Format::Newick => {
            for (_, _, t) in trees {
                s.push_str(&t.newick());
                s.push('\n');
            }
        }
        Format::Csv => {
            s.push_str("rep,n,newick\n");
            for (rep, n, t) in trees {
                writeln!(s, "{rep},{n},\"{}\"", t.newick()).unwrap();
            }
        }
        Format::Json => {
            let rows: Vec<_> =
                trees.iter().map(|(rep, n, t)| json!({"rep": rep, "n": n, "newick": t.newick()})).collect();
            s = format!("{}\n", serde_json::Value::Array(rows));
        }
    }
    s
}

fn simulate(cfg: &RunConfig) -> Result<Status, Fail> {
    let rule = model(cfg)?;
    let n = need_n(cfg)?;
    let f = format(cfg, Format::Newick, &[Format::Newick, Format::Csv, Format::Json])?;
    if n == 0 {
        return Err(usage("--n must be positive"));
    }
    let sampler = MarkovBranching::new(&rule, n)?;
    let trees = par_reps(cfg.seed, cfg.reps, |rng, rep| {
        (rep, n, sampler.sample(n, rng).expect("n checked").with_unit_lengths())
    });
    emit(cfg, &tree_lines(&trees, f))?;
    Ok(Status::Ok)
}

fn sizes(cfg: &RunConfig) -> Result<Vec<usize>, Fail> {
    let ns = match (&cfg.n_list, cfg.n) {
        (Some(l), _) => l.clone(),
        (None, Some(n)) => vec![n],
        _ => return Err(usage("--n or --n-list is required")),
    };
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage("--n-list must be positive and increasing"));
    }
    Ok(ns)
}

fn growth(cfg: &RunConfig) -> Result<Status, Fail> {
    let rule = model(cfg)?;
    let ns = sizes(cfg)?;
    let f = format(cfg, Format::Newick, &[Format::Newick, Format::Csv, Format::Json])?;
    let paths: Vec<Vec<(usize, usize, EdgeWeightedTree)>> = match rule {
        RuleSpec::FordAlpha { alpha } => {
            FordGrowth::new(alpha)?;
            par_reps(cfg.seed, cfg.reps, |rng, rep| {
                let mut g = FordGrowth::new(alpha).expect("alpha checked");
                ns.iter()
                    .map(|&n| {
                        g.grow_to(n, rng);
                        (rep, n, EdgeWeightedTree::unit(g.topology()))
                    })
                    .collect()
            })
        }
        RuleSpec::StableAlpha { alpha } => {
            MarchalGrowth::new(alpha)?;
            par_reps(cfg.seed, cfg.reps, |rng, rep| {
                let mut g = MarchalGrowth::new(alpha).expect("alpha checked");
                ns.iter()
                    .map(|&n| {
                        g.grow_to(n, rng);
                        (rep, n, g.tree().with_unit_lengths())
                    })
                    .collect()
            })
        }
        _ => return Err(usage("growth needs --model ford:α or stable:α")),
    };
    let flat: Vec<_> = paths.into_iter().flatten().collect();
    emit(cfg, &tree_lines(&flat, f))?;
    Ok(Status::Ok)
}

fn linebreak(cfg: &RunConfig) -> Result<Status, Fail> {
    let alpha = ford_alpha(&model(cfg)?)?;
    if cfg.k == 0 {
        return Err(usage("--k must be positive"));
    }
    let f = format(cfg, Format::Csv, &[Format::Csv, Format::Newick, Format::Json])?;
    let runs = par_reps(cfg.seed, cfg.reps, |rng, _| run_chain(alpha, cfg.k, rng));
    let mut s = String::new();
    let mut rows = Vec::new();
    if f == Format::Csv {
        writeln!(s, "rep,{}", TraceRow::CSV_HEADER)?;
    }
    for (rep, r) in runs.into_iter().enumerate() {
        let (state, trace) = r?;
        let tree = assemble_tree(&state)?;
        match f {
            Format::Csv => {
                for row in &trace {
                    writeln!(s, "{rep},{}", row.to_csv())?;
                }
            }
            Format::Newick => writeln!(s, "{}", tree.newick())?,
            Format::Json => rows.push(json!({
                "rep": rep,
                "total": state.total(),
                "proportions": state.proportions(),
                "newick": tree.newick(),
            })),
        }
    }
    if f == Format::Json {
        s = format!("{}\n", serde_json::Value::Array(rows));
    }
    emit(cfg, &s)?;
    Ok(Status::Ok)
}

fn verify(cfg: &RunConfig) -> Result<Status, Fail> {
    let rule = model(cfg)?;
    if cfg.n_max < 2 {
        return Err(usage("--n-max must be at least 2"));
    }
    let mut vs = Vec::new();
    for n in 2..=cfg.n_max {
        let r = consistency_residual(&rule, n)?;
        vs.push(Verdict::new(format!("consistency_n{n}"), r, None, r < RESIDUAL_TOL, cfg.seed));
    }
    for n in 2..=cfg.n_max {
        let d = (rule.qtable(n)?.total() - 1.0).abs();
        vs.push(Verdict::new(format!("total_n{n}"), d, None, d < ORACLE_TOL, cfg.seed));
    }
    if let RuleSpec::StableAlpha { alpha } = rule {
        for n in 2..=cfg.n_max.min(fragtree::diagnostics::GW_MAX_N) {
            let o = gw_conditioned_oracle(alpha, n)?;
            let q = rule.qtable(n)?;
            let d = q
                .entries()
                .iter()
                .map(|(p, v)| (o.first_split.get(p).cloned().unwrap_or(0.0) - v).abs())
                .fold(0.0, f64::max);
            vs.push(Verdict::new(format!("gw_oracle_n{n}"), d, None, d < ORACLE_TOL, cfg.seed));
        }
    }
    let uniform = matches!(rule, RuleSpec::FordAlpha { alpha } if alpha == 0.5)
        || matches!(rule, RuleSpec::BetaSplit { beta } if beta == -1.5);
    if uniform {
        let (a, b) = (RuleSpec::ford(0.5)?, RuleSpec::beta(-1.5)?);
        let mut d = 0.0f64;
        for n in 2..=cfg.n_max {
            for (x, y) in a.qtilde(n)?.iter().zip(b.qtilde(n)?) {
                d = d.max((x - y).abs());
            }
        }
        vs.push(Verdict::new("ford_half_is_beta", d, None, d < 1e-10, cfg.seed));
    }
    verdicts(cfg, &vs)
}

fn scaling(cfg: &RunConfig) -> Result<Status, Fail> {
    let rule = model(cfg)?;
    let ns = sizes(cfg)?;
    let gamma = match cfg.gamma.or(rule.gamma()) {
        Some(g) => g,
        None => return Err(usage("this model has no scaling index; pass --gamma")),
    };
    let rep = scaling_report(&rule, gamma, &ns, cfg.reps.max(2), cfg.seed)?;
    let body = match format(cfg, Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Csv => rep.to_csv(),
        _ => format!("{}\n", json!({"gamma": rep.gamma, "reps": rep.reps, "rows": rep.rows, "cross": rep.cross})),
    };
    emit(cfg, &body)?;
    Ok(Status::Ok)
}

fn spine(cfg: &RunConfig) -> Result<Status, Fail> {
    let alpha = ford_alpha(&model(cfg)?)?;
    let n = cfg.n.unwrap_or(1024);
    let reps = cfg.reps.max(2);
    let r = spinal_proportion_check(alpha, reps, n, reps, cfg.seed)?;
    let mut vs = Vec::new();
    for e in &r.three_leaf {
        let z = e.z_score();
        vs.push(Verdict::new(format!("v1_zero_given_{}", e.shape), z, None, z.abs() <= 3.0, cfg.seed));
    }
    // leaf 1 is never to the left of its own spine, so the mean at finite n is (n-1)/2n
    let z = (r.growth.mean() - (n as f64 - 1.0) / (2.0 * n as f64)) / r.growth.std_error();
    vs.push(Verdict::new("mean_v1", z, None, z.abs() <= 3.0, cfg.seed));
    vs.push(Verdict::new("ks_stick_breaking", r.ks_stick.statistic, Some(r.ks_stick.p), r.ks_stick.p > 0.001, cfg.seed));
    verdicts(cfg, &vs)
}
