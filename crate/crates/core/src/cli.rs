//! Batch front end behind the `dyadic-bellman` binary.
//!
//! Every command produces a [`Report`]: JSON lines of records and named
//! checks. The process exit status is nonzero iff some check failed.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::Rng;
use serde_json::{json, Value};

use crate::dyadic::{ConvexTree, DyadicSquare, Grid2D};
use crate::error::{Error, Result};
use crate::estimates::{
    chain_diagnostic, global_ratio, hoelder_check, sharpness_closed_form, sharpness_probe, sharpness_probe_one_sided,
    single_tree_ratio, stopping_decomposition, Check, ExponentTuple, SpikeSide,
};
use crate::gen::{self, GenKind};
use crate::graph::BipartiteSpec;
use crate::partition::{enumerate_omega, integer_partition_count, reduction_graph, PartitionTypes};
use crate::term::{box_difference, box_difference_raw, close, evaluate, even_subset_sum, numeric_box, parse_expression, parse_term, telescope_sum, Axis};

/// Largest accepted resolution.
pub const MAX_RES: u32 = 8;

#[derive(Parser, Debug)]
#[command(name = "dyadic-bellman", version, about = "Verification engine for dyadic multilinear forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Graph spec file (JSON); the twisted paraproduct when absent.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Data generator: random, tensor, indicator, spike:K.
    #[arg(long, global = true, default_value = "random")]
    pub gen: String,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid resolution N (cells per side 2^N).
    #[arg(long, global = true)]
    pub res: Option<u32>,
    /// Number of ancestors of the root to include.
    #[arg(long, global = true, default_value_t = 0)]
    pub cap: u32,
    /// Comma-separated exponents, one per edge in sorted edge order.
    #[arg(long, global = true)]
    pub exponents: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Print the first-order difference of an averaging term.
    Expand { term: String },
    /// Box identity, term counts, table goldens, even-subset identity, telescoping.
    VerifyIdentities {
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Enumerate partition types, ranks and the reduction graph.
    Partitions { m: usize, n: usize },
    /// Single-tree ratios on random convex trees, plus the Hölder bound.
    TreeCheck {
        #[arg(long, default_value_t = 20)]
        trees: usize,
    },
    /// Stopping-time decomposition, chain diagnostic and the global ratio.
    GlobalCheck,
    /// Spike probes of the tensor inequality.
    Sharpness {
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
    },
    /// The three-component worked example, every step checked.
    ExampleS5,
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub spec: Option<PathBuf>,
    pub gen: GenKind,
    pub seed: Option<u64>,
    pub res: Option<u32>,
    pub cap: u32,
    pub exponents: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        if let Some(r) = cli.res {
            if r > MAX_RES {
                return Err(Error::Config(format!("--res {r} exceeds the limit {MAX_RES}")));
            }
        }
        let exponents = match cli.exponents {
            None => None,
            Some(s) => Some(
                s.split(',')
                    .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad exponent {p:?}"))))
                    .collect::<Result<Vec<f64>>>()?,
            ),
        };
        Ok(Self {
            command: cli.command,
            spec: cli.spec,
            gen: cli.gen.parse()?,
            seed: cli.seed,
            res: cli.res,
            cap: cli.cap,
            exponents,
            out: cli.out,
        })
    }

    fn res_or(&self, default: u32) -> u32 {
        self.res.unwrap_or(default)
    }

    /// The seed; required unless the generator is deterministic.
    fn data_seed(&self) -> Result<u64> {
        match (self.seed, self.gen) {
            (Some(s), _) => Ok(s),
            (None, GenKind::Spike(_)) => Ok(0),
            (None, _) => Err(Error::Config("--seed is required for random generators".into())),
        }
    }

    fn load_spec(&self) -> Result<BipartiteSpec> {
        match &self.spec {
            None => Ok(BipartiteSpec::twisted_paraproduct()),
            Some(p) => BipartiteSpec::from_json(&std::fs::read_to_string(p)?),
        }
    }

    fn exponent_tuple(&self, spec: &BipartiteSpec) -> Result<ExponentTuple> {
        match &self.exponents {
            None => ExponentTuple::uniform(spec),
            Some(v) => ExponentTuple::new(spec, v),
        }
    }
}

/// JSON-lines output of one command.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<String>,
    failures: Vec<String>,
}

impl Report {
    pub fn record(&mut self, v: Value) {
        self.lines.push(v.to_string());
    }

    pub fn text(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn check(&mut self, c: Check) {
        if !c.passed {
            self.failures.push(c.name.clone());
        }
        self.lines.push(json!({"check": c.name, "passed": c.passed, "detail": c.detail}).to_string());
    }

    pub fn checks(&mut self, cs: impl IntoIterator<Item = Check>) {
        for c in cs {
            self.check(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Names of failed checks, in order.
    pub fn failures(&self) -> &[String] {
        &self.failures
    }

    pub fn render(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

pub fn run(config: &RunConfig) -> Result<Report> {
    let mut r = Report::default();
    match &config.command {
        Command::Expand { term } => {
            let t = parse_term(term)?;
            r.text(box_difference(&t)?.pretty());
        }
        Command::VerifyIdentities { trials } => {
            r.checks(verify_identities(config.gen, config.res_or(4), config.data_seed()?, *trials)?);
        }
        Command::Partitions { m, n } => partitions(&mut r, *m, *n)?,
        Command::TreeCheck { trees } => {
            let spec = config.load_spec()?;
            tree_check(&mut r, &spec, config.gen, config.res_or(4), config.data_seed()?, *trees)?;
        }
        Command::GlobalCheck => {
            let spec = config.load_spec()?;
            let exps = config.exponent_tuple(&spec)?;
            global_check(&mut r, &spec, &exps, config.gen, config.res_or(4), config.cap, config.data_seed()?)?;
        }
        Command::Sharpness { m, n, d, k_max } => sharpness(&mut r, *m, *n, *d, *k_max)?,
        Command::ExampleS5 => {
            r.checks(crate::walkthrough::run(config.res_or(3), config.data_seed()?)?);
        }
    }
    Ok(r)
}

fn random_square(root: DyadicSquare, max_depth: u32, rng: &mut impl Rng) -> DyadicSquare {
    let depth = rng.gen_range(0..=max_depth);
    let all = root.descendants_at(depth);
    all[rng.gen_range(0..all.len())]
}

/// The three rows of the sample table of first-order differences.
pub const TABLE_ROWS: [(&str, &str); 3] = [
    ("avg[y](avg[x](F(x,y))^3)", "3*avg[y](avg[x](F(x,y))*dif[x](F(x,y))^2)"),
    (
        "avg[x,y](F(x,y))^2",
        "avg[y](dif[x](F(x,y)))^2 + dif[y](avg[x](F(x,y)))^2 + dif[x,y](F(x,y))^2",
    ),
    (
        "avg[x,x'](avg[y](F(x,y)*G(x',y))^2)",
        "avg[x,x'](dif[y](F(x,y)*G(x',y))^2) + dif[x,x'](avg[y](F(x,y)*G(x',y))^2) + dif[x,x'](dif[y](F(x,y)*G(x',y))^2)",
    ),
];

/// Table goldens: symbolic differences equal the tabulated expansions exactly.
pub fn table_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (i, (b, want)) in TABLE_ROWS.iter().enumerate() {
        let got = box_difference(&parse_term(b)?)?;
        let want = parse_expression(want)?;
        out.push(Check::new(format!("table_row_{}", i + 1), got == want, got.pretty()));
    }
    Ok(out)
}

/// Pre-merge summand count `2^{m+n−2} − 1` for all `m + n ≤ max_total`.
pub fn term_count_check(max_total: usize) -> Result<Check> {
    let mut bad = Vec::new();
    let mut cases = 0;
    for m in 1..max_total {
        for n in 1..=max_total - m {
            let t = gen::random_term(m, n, true, (m * 10 + n) as u64);
            let got = box_difference_raw(&t)?.len();
            let want = (1usize << (m + n - 2)) - 1;
            cases += 1;
            if got != want {
                bad.push(format!("({m},{n}): {got} != {want}"));
            }
        }
    }
    Ok(Check::new(
        "box_term_count",
        bad.is_empty(),
        if bad.is_empty() { format!("{cases} shapes") } else { bad.join("; ") },
    ))
}

/// `max(|B(Q)|, ¼ Σ |B(child)|)`: the size of the operands of a numeric box.
/// A box that vanishes exactly is only computed to this scale times a few ulps.
pub fn operand_scale(b: &crate::term::PPTerm, q: &DyadicSquare, fns: &crate::term::Bundle) -> Result<f64> {
    let here = evaluate(b, q, fns)?.abs();
    let mut kids = 0.0;
    for c in q.children() {
        kids += 0.25 * evaluate(b, &c, fns)?.abs();
    }
    Ok(here.max(kids))
}

/// `trials` random instances of the box identity with `m + n ≤ 5`.
pub fn box_identity_check(kind: GenKind, res: u32, seed: u64, trials: usize) -> Result<Check> {
    let root = DyadicSquare::unit();
    let mut rng = gen::rng(seed);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for t in 0..trials {
        let m = rng.gen_range(1..=4usize);
        let n = rng.gen_range(1..=5 - m);
        let term = gen::random_term(m, n, true, rng.gen());
        let fns = gen::function_bundle(kind, root, res, gen::edge_seed(seed, t))?;
        let q = random_square(root, res.saturating_sub(1), &mut rng);
        let sym = box_difference(&term)?.evaluate(&q, &fns)?;
        let num = numeric_box(&term, &q, &fns)?;
        let floor = operand_scale(&term, &q, &fns)?;
        let scale = sym.abs().max(num.abs()).max(floor);
        if scale > 0.0 {
            worst = worst.max((sym - num).abs() / scale);
        }
        if !close(sym, num, 1e-10, floor) {
            bad += 1;
        }
    }
    Ok(Check::new(
        "box_identity",
        bad == 0,
        format!("{trials} instances, {bad} failures, worst relative error {worst:.2e}"),
    ))
}

/// Even-subset identity: both sides agree and the sum is nonnegative.
pub fn even_subset_checks(kind: GenKind, res: u32, seed: u64, trials: usize) -> Result<Vec<Check>> {
    let root = DyadicSquare::unit();
    let mut rng = gen::rng(seed ^ 0x5eed);
    let (mut agree, mut nonneg) = (0, 0);
    for t in 0..trials {
        let m = rng.gen_range(1..=3usize);
        let n = rng.gen_range(1..=2usize);
        let psi = gen::random_term(m, n, true, rng.gen());
        let axis = if rng.gen_bool(0.5) { Axis::X } else { Axis::Y };
        let fns = gen::function_bundle(kind, root, res, gen::edge_seed(seed, 1000 + t))?;
        let q = random_square(root, res.saturating_sub(1), &mut rng);
        let (lhs, rhs) = even_subset_sum(&psi, axis, &q, &fns)?;
        if close(lhs, rhs, 1e-10, 1e-300) {
            agree += 1;
        }
        if lhs >= -1e-12 {
            nonneg += 1;
        }
    }
    Ok(vec![
        Check::new("even_subset_identity", agree == trials, format!("{agree}/{trials} agree")),
        Check::new("even_subset_nonnegative", nonneg == trials, format!("{nonneg}/{trials} nonnegative")),
    ])
}

/// Telescoping over random convex trees of depth at most `min(4, res − 1)`.
pub fn telescope_check(kind: GenKind, res: u32, seed: u64, trials: usize) -> Result<Check> {
    let root = DyadicSquare::unit();
    let mut rng = gen::rng(seed ^ 0x7e1e);
    let mut ok = 0;
    let depth = res.saturating_sub(1).min(4);
    for t in 0..trials {
        let m = rng.gen_range(1..=2usize);
        let n = rng.gen_range(1..=2usize);
        let b = gen::random_term(m, n, true, rng.gen());
        let tree = gen::random_convex_tree(root, depth, rng.gen());
        let fns = gen::function_bundle(kind, root, res, gen::edge_seed(seed, 2000 + t))?;
        let (boxes, ends) = telescope_sum(&b, &tree, &fns)?;
        let mut floor = tree.root().area() * evaluate(&b, &tree.root(), &fns)?.abs();
        for q in tree.leaves() {
            floor = floor.max(q.area() * evaluate(&b, &q, &fns)?.abs());
        }
        if close(boxes, ends, 1e-10, floor) {
            ok += 1;
        }
    }
    Ok(Check::new("telescoping", ok == trials, format!("{ok}/{trials} trees agree")))
}

pub fn verify_identities(kind: GenKind, res: u32, seed: u64, trials: usize) -> Result<Vec<Check>> {
    let mut out = vec![box_identity_check(kind, res, seed, trials)?, term_count_check(6)?];
    out.extend(table_checks()?);
    out.extend(even_subset_checks(kind, res, seed, trials)?);
    out.push(telescope_check(kind, res, seed, trials)?);
    Ok(out)
}

fn partitions(r: &mut Report, m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 || m + n > 8 {
        return Err(Error::Config(format!("need 1 ≤ m, n and m + n ≤ 8, got {m}, {n}")));
    }
    let types = PartitionTypes::new(m, n);
    for t in types.types() {
        r.record(json!({"rank": t.rank, "type": t.to_string()}));
    }
    let omega = enumerate_omega(m, n);
    r.record(json!({"omega_size": omega.len()}));
    let want = integer_partition_count(m) * integer_partition_count(n);
    r.check(Check::new(
        "type_count",
        types.len() as u64 == want,
        format!("{} types, p#({m})·p#({n}) = {want}", types.len()),
    ));
    let ranks: Vec<usize> = types.types().iter().map(|t| t.rank).collect();
    r.check(Check::new(
        "ranks_are_positions",
        ranks == (1..=types.len()).collect::<Vec<_>>(),
        format!("{ranks:?}"),
    ));
    let g = reduction_graph(m, n);
    for e in g.edge_list() {
        r.record(json!({"edge": e}));
    }
    let terminal: Vec<String> = g.terminal().iter().map(|&i| types.by_rank(i).to_string()).collect();
    r.record(json!({"terminal": terminal}));
    r.check(Check::new("every_node_descends", g.every_node_descends(), "each non-terminal type has an inv_delta edge to a smaller rank"));
    r.check(Check::new("inv_delta_decreases_rank", g.inv_delta_decreases(), "inv_delta edges point to smaller ranks"));
    r.check(Check::new("inv_delta_acyclic", g.inv_delta_acyclic(), "no inv_delta cycles"));
    Ok(())
}

fn tree_check(r: &mut Report, spec: &BipartiteSpec, kind: GenKind, res: u32, seed: u64, trees: usize) -> Result<()> {
    spec.validate()?;
    let root = DyadicSquare::unit();
    let bundle = gen::bundle_of(spec, kind, root, res, seed)?;
    let mut worst: f64 = 0.0;
    let mut finite = true;
    for t in 0..trees {
        let tree = gen::random_convex_tree(root, res.saturating_sub(1), gen::edge_seed(seed, 3000 + t));
        let ratio = single_tree_ratio(spec, &bundle, &tree)?;
        r.record(json!({"tree": t, "members": tree.len(), "ratio": ratio}));
        finite &= ratio.is_finite() && ratio >= 0.0;
        worst = worst.max(ratio);
    }
    r.check(Check::new("tree_ratios_finite", finite, format!("max ratio {worst:.6}")));
    let full = ConvexTree::full(root, res.saturating_sub(1));
    let ratio = single_tree_ratio(spec, &bundle, &full)?;
    r.record(json!({"tree": "full", "members": full.len(), "ratio": ratio}));

    let mut rng = gen::rng(seed ^ 0x401d);
    let mut ok = true;
    let mut cases = 0;
    for (m, n) in [(1, 1), (2, 2), (2, 3), (3, 2)] {
        for t in 0..5 {
            let grids: Vec<Vec<Grid2D>> = (0..m)
                .map(|i| {
                    (0..n)
                        .map(|j| gen::generate(kind, root, res, gen::edge_seed(seed, 4000 + 100 * t + 10 * i + j)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let q = random_square(root, res.saturating_sub(1), &mut rng);
            let (lhs, rhs) = hoelder_check(&grids, &q)?;
            ok &= lhs <= rhs + 1e-12;
            cases += 1;
        }
    }
    r.check(Check::new("hoelder_on_square", ok, format!("{cases} instances")));
    Ok(())
}

fn global_check(
    r: &mut Report,
    spec: &BipartiteSpec,
    exps: &ExponentTuple,
    kind: GenKind,
    res: u32,
    cap: u32,
    seed: u64,
) -> Result<()> {
    let root = DyadicSquare::unit();
    let bundle = gen::bundle_of(spec, kind, root, res, seed)?;
    let dec = stopping_decomposition(spec, &bundle, exps, cap)?;
    for s in &dec.strata {
        r.record(json!({
            "k": s.k,
            "maximal_squares": s.trees.len(),
            "tree_sizes": s.trees.iter().map(|t| t.len()).collect::<Vec<_>>(),
            "local_sums": s.tree_sums,
        }));
    }
    r.record(json!({
        "direct_sum": dec.direct_sum,
        "stratum_sum": dec.stratum_sum,
        "ancestor_tail": dec.ancestor_tail,
        "unassigned": dec.unassigned.len(),
        "trees": dec.tree_count(),
    }));
    r.checks(dec.checks.clone());
    let chain = chain_diagnostic(spec, &bundle, exps, &dec)?;
    r.record(json!({
        "tree_constant": chain.tree_constant,
        "weighted_measure": chain.weighted_measure,
        "geometric_bound": chain.geometric_bound,
        "level_sums": chain.level_sums,
        "level_bounds": chain.level_bounds,
    }));
    r.checks(chain.checks.clone());
    let ratio = global_ratio(spec, &bundle, exps, cap)?;
    let exps_json: Vec<Value> = exps.iter().map(|(e, p)| json!({"edge": [e.0, e.1], "p": p})).collect();
    r.record(json!({"spec": spec, "exponents": exps_json, "N": res, "coarse_cap": cap, "ratio": ratio}));
    r.check(Check::new("ratio_finite", ratio.is_finite(), format!("{ratio:.6}")));
    let doubled = global_ratio(spec, &bundle.map_grids(|_, g| g.scaled(2.0)), exps, cap)?;
    r.check(Check::new(
        "ratio_homogeneous",
        close(ratio, doubled, 1e-12, 1e-300),
        format!("{ratio:.15} vs {doubled:.15}"),
    ));
    let dilated = global_ratio(spec, &bundle.dilate(1), exps, cap)?;
    r.check(Check::new(
        "ratio_dilation_invariant",
        close(ratio, dilated, 1e-10, 1e-300),
        format!("{ratio:.15} vs {dilated:.15}"),
    ));
    Ok(())
}

/// Growth threshold of the two-spike probe: `2mn/(m+n)`.
pub fn two_spike_threshold(m: u32, n: u32) -> f64 {
    2.0 * (m * n) as f64 / (m + n) as f64
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn bounded(v: &[f64]) -> bool {
    v.iter().all(|&x| x <= v[0] * 1.01)
}

fn sharpness(r: &mut Report, m: u32, n: u32, d: f64, k_max: u32) -> Result<()> {
    if k_max == 0 || k_max > 16 {
        return Err(Error::Config(format!("--k-max must be in 1..=16, got {k_max}")));
    }
    let both = sharpness_probe(m, n, d, k_max)?;
    let first = sharpness_probe_one_sided(m, n, d, k_max, SpikeSide::First)?;
    let second = sharpness_probe_one_sided(m, n, d, k_max, SpikeSide::Second)?;
    for k in 1..=k_max {
        let i = (k - 1) as usize;
        r.record(json!({
            "k": k,
            "both": both[i],
            "closed_form": sharpness_closed_form(m, n, d, k),
            "first_only": first[i],
            "second_only": second[i],
        }));
    }
    let matches = (1..=k_max).all(|k| close(both[(k - 1) as usize], sharpness_closed_form(m, n, d, k), 1e-10, 1e-300));
    r.check(Check::new("matches_closed_form", matches, "2^{k(2mn/d - m - n)}"));
    let thr = two_spike_threshold(m, n);
    let grows = d < thr;
    r.check(Check::new(
        "two_spike_growth",
        if grows { strictly_increasing(&both) } else { bounded(&both) },
        format!("threshold 2mn/(m+n) = {thr}; expect {}", if grows { "growth" } else { "bounded" }),
    ));
    let max = m.max(n) as f64;
    let one_sided_grows = strictly_increasing(&first) || strictly_increasing(&second);
    let one_sided_bounded = bounded(&first) && bounded(&second);
    r.check(Check::new(
        "one_spike_growth_iff_below_max",
        if d < max { one_sided_grows } else { one_sided_bounded },
        format!("max(m,n) = {max}; expect {}", if d < max { "growth" } else { "bounded" }),
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> Result<RunConfig> {
        let mut full = vec!["dyadic-bellman"];
        full.extend_from_slice(args);
        RunConfig::from_cli(Cli::try_parse_from(full).map_err(|e| Error::Config(e.to_string()))?)
    }

    #[test]
    fn flags_parse() {
        let c = config(&["global-check", "--seed", "4", "--res", "3", "--cap", "1", "--exponents", "3,3,3", "--gen", "tensor"]).unwrap();
        assert_eq!(c.seed, Some(4));
        assert_eq!(c.res, Some(3));
        assert_eq!(c.cap, 1);
        assert_eq!(c.exponents, Some(vec![3.0, 3.0, 3.0]));
        assert_eq!(c.gen, GenKind::Tensor);
    }

    #[test]
    fn guards() {
        assert!(config(&["tree-check", "--res", "9", "--seed", "1"]).is_err());
        assert!(config(&["tree-check", "--gen", "gauss"]).is_err());
        let c = config(&["tree-check"]).unwrap();
        assert!(matches!(run(&c), Err(Error::Config(_))));
        let c = config(&["tree-check", "--gen", "spike:2", "--res", "3"]).unwrap();
        assert!(run(&c).unwrap().passed());
    }

    #[test]
    fn expand_prints_the_table_row() {
        let c = config(&["expand", "avg[y](avg[x](F(x,y))^3)"]).unwrap();
        assert_eq!(run(&c).unwrap().render(), "3·⟨⟨F⟩_x[F]_x²⟩_y\n");
    }

    #[test]
    fn reports_name_failures() {
        let mut r = Report::default();
        r.check(Check::new("fine", true, ""));
        r.check(Check::new("broken", false, "x"));
        assert!(!r.passed());
        assert_eq!(r.failures(), ["broken".to_string()]);
    }

    #[test]
    fn sharpness_thresholds() {
        assert_eq!(two_spike_threshold(2, 2), 2.0);
        assert_eq!(two_spike_threshold(2, 3), 2.4);
        for d in [1.0, 2.0, 2.4, 3.0] {
            let c = config(&["sharpness", "--m", "2", "--n", "3", "--d", &d.to_string()]).unwrap();
            assert!(run(&c).unwrap().passed(), "d = {d}");
        }
    }
}
