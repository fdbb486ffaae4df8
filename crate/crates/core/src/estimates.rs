//! Analytic estimates as numeric checks: Hölder on a square, the single-tree
//! bound, the stopping-time decomposition behind the global bound, and the
//! spike and cycle experiments on the range of exponents.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{pow2, ConvexTree, DyadicInterval, DyadicSquare, Grid2D};
use crate::error::{Error, Result};
use crate::gen;
use crate::graph::BipartiteSpec;
use crate::term::{evaluate, Bracket, Bundle, Factor, FnId, PPTerm};

/// Exponents `p_{i,j}` per edge with `Σ 1/p = 1` and `d_{i,j} < p_{i,j}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentTuple {
    map: BTreeMap<(usize, usize), f64>,
}

impl ExponentTuple {
    /// Exponents listed in sorted edge order.
    pub fn new(spec: &BipartiteSpec, exps: &[f64]) -> Result<Self> {
        let info = spec.validate()?;
        let mut edges = spec.edges.clone();
        edges.sort();
        if exps.len() != edges.len() {
            return Err(Error::Config(format!("{} exponents for {} edges", exps.len(), edges.len())));
        }
        let mut map = BTreeMap::new();
        let mut recip = 0.0;
        for (&e, &p) in edges.iter().zip(exps) {
            let d = info.d[&e] as f64;
            if !(p.is_finite() && p > d) {
                return Err(Error::Config(format!("p{:?} = {p} must be finite and exceed d = {d}", e)));
            }
            recip += 1.0 / p;
            map.insert(e, p);
        }
        if (recip - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("Σ 1/p = {recip}, expected 1")));
        }
        Ok(Self { map })
    }

    /// `p = |E|` on every edge.
    pub fn uniform(spec: &BipartiteSpec) -> Result<Self> {
        let k = spec.edges.len();
        Self::new(spec, &vec![k as f64; k])
    }

    pub fn get(&self, e: (usize, usize)) -> f64 {
        self.map[&e]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &f64)> {
        self.map.iter()
    }
}

/// `(⟨∏ G_{i,j}(x_i, y_j)⟩, ∏ ⟨G_{i,j}^r⟩^{1/r})` with `r = max(m, n)`;
/// `grids[i][j]` is `G_{i+1,j+1}`.
pub fn hoelder_check(grids: &[Vec<Grid2D>], q: &DyadicSquare) -> Result<(f64, f64)> {
    let m = grids.len();
    let n = grids.first().map_or(0, |r| r.len());
    if m == 0 || n == 0 || grids.iter().any(|r| r.len() != n) {
        return Err(Error::Precondition("need a full m×n array of grids".into()));
    }
    let r = m.max(n) as f64;
    let mut b = Bundle::new();
    let mut factors = Vec::new();
    let mut rhs = 1.0;
    for (i, row) in grids.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            let id = FnId::edge(i + 1, j + 1);
            b.insert(id.clone(), g.clone())?;
            factors.push(Factor::new(id, i, j));
            rhs *= g.power_avg(q, r);
        }
    }
    let t = PPTerm::new(vec![Bracket::Avg; m], vec![Bracket::Avg; n], factors)?;
    Ok((evaluate(&t, q, &b)?, rhs))
}

fn floor_log2(v: f64) -> i32 {
    let mut k = v.log2().floor() as i32;
    while pow2(k) > v {
        k -= 1;
    }
    while pow2(k + 1) <= v {
        k += 1;
    }
    k
}

/// `⟨F^d⟩^{1/d}` for every square of the root, coarsest level first;
/// `levels[l]` has `4^l` entries in row-major order.
fn pyramid(g: &Grid2D, d: f64) -> Vec<Vec<f64>> {
    let res = g.resolution() as usize;
    let mut levels = vec![Vec::new(); res + 1];
    levels[res] = g.values().iter().map(|v| v.powf(d)).collect();
    for l in (0..res).rev() {
        let side = 1usize << l;
        let fine = &levels[l + 1];
        let mut cur = vec![0.0; side * side];
        for y in 0..side {
            for x in 0..side {
                let s = fine[(2 * y) * 2 * side + 2 * x]
                    + fine[(2 * y) * 2 * side + 2 * x + 1]
                    + fine[(2 * y + 1) * 2 * side + 2 * x]
                    + fine[(2 * y + 1) * 2 * side + 2 * x + 1];
                cur[y * side + x] = 0.25 * s;
            }
        }
        levels[l] = cur;
    }
    levels
}

/// Dyadic maximal function `sup_{Q ∋ cell} ⟨F^d⟩_Q^{1/d}` over the squares of
/// the root down to single cells. Ancestors of the root never exceed the
/// root's own value, so they do not change the result.
pub fn maximal_function(g: &Grid2D, d: f64) -> Result<Grid2D> {
    if d < 1.0 {
        return Err(Error::Config(format!("d must be at least 1, got {d}")));
    }
    let levels = pyramid(g, d);
    let res = g.resolution() as usize;
    let mut best = levels[0].clone();
    for l in 1..=res {
        let side = 1usize << l;
        let mut cur = levels[l].clone();
        for y in 0..side {
            for x in 0..side {
                let parent = best[(y / 2) * (side / 2) + x / 2];
                let v = &mut cur[y * side + x];
                *v = v.max(parent);
            }
        }
        best = cur;
    }
    Grid2D::new(g.root(), g.resolution(), best.iter().map(|v| v.powf(1.0 / d)).collect())
}

/// Both sides of `Σ_k 2^{pk} |{M_d F ≥ 2^k}| ≤ (1 − 2^{−p})^{−1} (p/(p−d))^{p/d} ‖F‖_p^p`.
///
/// The maximal function runs over the squares of the root and `cap` ancestors;
/// outside the root it equals the average over the smallest ancestor containing
/// the point.
#[derive(Clone, Debug, Serialize)]
pub struct LevelSetCheck {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn level_set_check(g: &Grid2D, d: f64, p: f64, cap: u32) -> Result<LevelSetCheck> {
    if !(d >= 1.0 && p > d) {
        return Err(Error::Config(format!("need 1 ≤ d < p, got d = {d}, p = {p}")));
    }
    let geo = 1.0 / (1.0 - 2f64.powf(-p));
    let per_point = |v: f64| if v > 0.0 { 2f64.powf(p * floor_log2(v) as f64) * geo } else { 0.0 };
    let mf = maximal_function(g, d)?;
    let mut lhs: f64 = mf.values().iter().map(|&v| per_point(v)).sum::<f64>() * g.cell_area();
    let root = g.root();
    let mut anc = root;
    for _ in 0..cap {
        let inner_area = anc.area();
        anc = anc.parent();
        lhs += per_point(g.power_avg(&anc, d)) * (anc.area() - inner_area);
    }
    let norm_p = g.lp_norm(p).powf(p);
    let rhs = geo * (p / (p - d)).powf(p / d) * norm_p;
    Ok(LevelSetCheck { lhs, rhs })
}

fn max_power_avg(g: &Grid2D, squares: &[DyadicSquare], d: f64) -> f64 {
    squares.iter().map(|q| g.power_avg(q, d)).fold(0.0, f64::max)
}

/// `Σ_{Q∈T} |Q| |A_Q|` over `|Q_T| ∏ max_{Q∈T∪L(T)} ⟨F^d⟩_Q^{1/d}`.
pub fn single_tree_ratio(spec: &BipartiteSpec, bundle: &Bundle, tree: &ConvexTree) -> Result<f64> {
    let info = spec.validate()?;
    spec.check_bundle(bundle)?;
    let t = spec.term();
    let members: Vec<DyadicSquare> = tree.members().iter().copied().collect();
    let vals = members
        .par_iter()
        .map(|q| evaluate(&t, q, bundle).map(|a| q.area() * a.abs()))
        .collect::<Result<Vec<f64>>>()?;
    let lhs: f64 = vals.iter().sum();
    let mut all = members;
    all.extend(tree.leaves());
    let mut denom = tree.root().area();
    for &(i, j) in &spec.edges {
        let g = bundle.get(&BipartiteSpec::fn_id(i, j))?;
        denom *= max_power_avg(g, &all, info.d[&(i, j)] as f64);
    }
    if denom == 0.0 {
        if lhs == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Precondition(format!("tree sum {lhs} is nonzero while the control vanishes")));
    }
    Ok(lhs / denom)
}

/// Squares of the decomposition universe: `cap` ancestors of the root
/// (coarsest first), then the root's sub-squares down to single cells.
pub fn decomposition_universe(root: DyadicSquare, res: u32, cap: u32) -> Vec<DyadicSquare> {
    let mut out = Vec::new();
    let mut anc = root;
    let mut chain = Vec::new();
    for _ in 0..cap {
        anc = anc.parent();
        chain.push(anc);
    }
    out.extend(chain.into_iter().rev());
    for depth in 0..=res {
        out.extend(root.descendants_at(depth));
    }
    out
}

/// One stratum `P_k` with its maximal squares and their trees.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub k: Vec<i32>,
    pub trees: Vec<ConvexTree>,
    /// `Σ_{Q∈T} |Q| |A_Q|` per tree.
    pub tree_sums: Vec<f64>,
}

/// A named check with a short explanation.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Squares grouped by the dyadic sizes of the normalized suprema of every edge.
#[derive(Clone, Debug)]
pub struct StoppingDecomposition {
    pub resolution: u32,
    pub cap: u32,
    pub edges: Vec<(usize, usize)>,
    pub strata: Vec<Stratum>,
    /// Squares where some function vanishes on every coarser square of the universe.
    pub unassigned: Vec<DyadicSquare>,
    /// `k` per assigned square.
    pub assignment: BTreeMap<DyadicSquare, Vec<i32>>,
    /// `Σ |Q| |A_Q|` over the universe, evaluated directly.
    pub direct_sum: f64,
    /// The same sum collected stratum by stratum.
    pub stratum_sum: f64,
    /// Part of `direct_sum` coming from ancestors of the root.
    pub ancestor_tail: f64,
    pub checks: Vec<Check>,
}

impl StoppingDecomposition {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn tree_count(&self) -> usize {
        self.strata.iter().map(|s| s.trees.len()).sum()
    }
}

fn normalized(spec: &BipartiteSpec, bundle: &Bundle, exps: &ExponentTuple) -> Result<Vec<((usize, usize), Grid2D)>> {
    let mut edges = spec.edges.clone();
    edges.sort();
    edges
        .iter()
        .map(|&e| {
            let id = BipartiteSpec::fn_id(e.0, e.1);
            let g = bundle.get(&id)?;
            let norm = g.lp_norm(exps.get(e));
            if norm == 0.0 {
                return Err(Error::ZeroNorm(id.to_string()));
            }
            Ok((e, g.scaled(1.0 / norm)))
        })
        .collect()
}

/// Build the decomposition and run its structural checks.
pub fn stopping_decomposition(
    spec: &BipartiteSpec,
    bundle: &Bundle,
    exps: &ExponentTuple,
    cap: u32,
) -> Result<StoppingDecomposition> {
    let info = spec.validate()?;
    spec.check_bundle(bundle)?;
    let root = bundle.root().ok_or(Error::GeometryMismatch)?;
    let res = bundle.resolution().ok_or(Error::GeometryMismatch)?;
    let norm = normalized(spec, bundle, exps)?;
    let edges: Vec<(usize, usize)> = norm.iter().map(|(e, _)| *e).collect();
    let universe = decomposition_universe(root, res, cap);
    let members: BTreeSet<DyadicSquare> = universe.iter().copied().collect();

    // running suprema, top-down (the universe lists parents before children)
    let mut sup: BTreeMap<DyadicSquare, Vec<f64>> = BTreeMap::new();
    for q in &universe {
        let here: Vec<f64> = norm.iter().map(|(e, g)| g.power_avg(q, info.d[e] as f64)).collect();
        let parent = q.parent();
        let s = match sup.get(&parent).filter(|_| members.contains(&parent)) {
            Some(ps) => here.iter().zip(ps).map(|(a, b)| a.max(*b)).collect(),
            None => here,
        };
        sup.insert(*q, s);
    }

    let mut assignment = BTreeMap::new();
    let mut unassigned = Vec::new();
    let mut groups: BTreeMap<Vec<i32>, BTreeSet<DyadicSquare>> = BTreeMap::new();
    for q in &universe {
        let s = &sup[q];
        if s.iter().any(|&v| v == 0.0) {
            unassigned.push(*q);
            continue;
        }
        let k: Vec<i32> = s.iter().map(|&v| floor_log2(v)).collect();
        groups.entry(k.clone()).or_default().insert(*q);
        assignment.insert(*q, k);
    }

    let t = spec.term();
    let a_vals: BTreeMap<DyadicSquare, f64> = universe
        .par_iter()
        .map(|q| evaluate(&t, q, bundle).map(|a| (*q, a)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    let direct_sum: f64 = universe.iter().map(|q| q.area() * a_vals[q].abs()).sum();
    let ancestor_tail: f64 = universe
        .iter()
        .filter(|q| q.contains(&root) && **q != root)
        .map(|q| q.area() * a_vals[q].abs())
        .sum();

    let mut checks = Vec::new();
    let mut convex_ok = true;
    let mut strata = Vec::new();
    for (k, set) in &groups {
        let maximal: Vec<DyadicSquare> = set
            .iter()
            .filter(|q| !set.contains(&q.parent()))
            .copied()
            .collect();
        let mut trees = Vec::new();
        for m in &maximal {
            match ConvexTree::new(*m, set.iter().filter(|q| m.contains(q)).copied()) {
                Ok(tree) => trees.push(tree),
                Err(_) => convex_ok = false,
            }
        }
        // per-tree sums are evaluated afresh, independently of the direct pass
        let tree_sums = trees
            .par_iter()
            .map(|tr| {
                tr.members()
                    .iter()
                    .map(|q| evaluate(&t, q, bundle).map(|a| q.area() * a.abs()))
                    .sum::<Result<f64>>()
            })
            .collect::<Result<Vec<f64>>>()?;
        strata.push(Stratum {
            k: k.clone(),
            trees,
            tree_sums,
        });
    }
    let stratum_sum: f64 = strata.iter().flat_map(|s| s.tree_sums.iter()).sum();

    let uncovered: Vec<_> = unassigned.iter().filter(|q| a_vals[q] != 0.0).collect();
    checks.push(Check::new(
        "covers_nonzero_terms",
        uncovered.is_empty(),
        format!("{} unassigned squares, {} with nonzero term", unassigned.len(), uncovered.len()),
    ));
    checks.push(Check::new("trees_convex", convex_ok, format!("{} strata", strata.len())));

    let mut overlap = 0usize;
    for s in &strata {
        for (a, ta) in s.trees.iter().enumerate() {
            for tb in &s.trees[a + 1..] {
                if !ta.root().is_disjoint(&tb.root()) {
                    overlap += 1;
                }
            }
        }
    }
    checks.push(Check::new("maximal_squares_disjoint", overlap == 0, format!("{overlap} overlapping pairs")));

    let mut count: BTreeMap<DyadicSquare, usize> = BTreeMap::new();
    for s in &strata {
        for tr in &s.trees {
            for q in tr.members() {
                *count.entry(*q).or_default() += 1;
            }
        }
    }
    let once = assignment.keys().all(|q| count.get(q) == Some(&1)) && count.len() == assignment.len();
    checks.push(Check::new(
        "each_square_in_one_tree",
        once,
        format!("{} assigned, {} placed", assignment.len(), count.len()),
    ));

    let mut size_breach = 0usize;
    for (q, k) in &assignment {
        for (e, &ke) in edges.iter().zip(k) {
            let p = exps.get(*e);
            if q.area() > 2f64.powf(-p * (ke as f64 - 1.0)) * (1.0 + 1e-12) {
                size_breach += 1;
            }
        }
    }
    checks.push(Check::new("size_bound", size_breach == 0, format!("{size_breach} breaches")));

    let mut leaf_breach = 0usize;
    for s in &strata {
        for tr in &s.trees {
            for leaf in tr.leaves() {
                for ((e, g), &ke) in norm.iter().zip(&s.k) {
                    if g.power_avg(&leaf, info.d[e] as f64) >= pow2(ke + 3) {
                        leaf_breach += 1;
                    }
                }
            }
        }
    }
    checks.push(Check::new("leaf_bound", leaf_breach == 0, format!("{leaf_breach} breaches")));

    let agree = (direct_sum - stratum_sum).abs() <= 1e-10 * direct_sum.abs().max(1e-300);
    checks.push(Check::new(
        "stratum_sum_matches",
        agree,
        format!("direct {direct_sum:.12e}, strata {stratum_sum:.12e}"),
    ));

    Ok(StoppingDecomposition {
        resolution: res,
        cap,
        edges,
        strata,
        unassigned,
        assignment,
        direct_sum,
        stratum_sum,
        ancestor_tail,
        checks,
    })
}

/// Intermediate sums of the chain from the stratified sum to the norms, on
/// normalized data (every `‖F_e‖_{p_e} = 1`).
#[derive(Clone, Debug, Serialize)]
pub struct ChainDiagnostic {
    /// `Σ |Q| |A_Q|` on normalized data.
    pub direct: f64,
    /// `Σ_k 2^{Σ k_e} Σ_{Q ∈ M_k} |Q|`.
    pub weighted_measure: f64,
    /// `direct / weighted_measure`: the measured single-tree constant.
    pub tree_constant: f64,
    /// Per edge: `Σ_k 2^{p k} |{M_d F ≥ 2^k}|`.
    pub level_sums: Vec<f64>,
    /// Per edge: `(1 − 2^{−p})^{−1} (p/(p−d))^{p/d}`.
    pub level_bounds: Vec<f64>,
    /// `2^{|E|−1} Σ_e level_sums[e]`, which bounds `weighted_measure`.
    pub geometric_bound: f64,
    pub checks: Vec<Check>,
}

pub fn chain_diagnostic(
    spec: &BipartiteSpec,
    bundle: &Bundle,
    exps: &ExponentTuple,
    decomposition: &StoppingDecomposition,
) -> Result<ChainDiagnostic> {
    let info = spec.validate()?;
    let norm = normalized(spec, bundle, exps)?;
    let mut nb = Bundle::new();
    for (e, g) in &norm {
        nb.insert(BipartiteSpec::fn_id(e.0, e.1), g.clone())?;
    }
    let t = spec.term();
    let universe: Vec<DyadicSquare> = decomposition.assignment.keys().copied().collect();
    let direct: f64 = universe
        .par_iter()
        .map(|q| evaluate(&t, q, &nb).map(|a| q.area() * a.abs()))
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    let weighted_measure: f64 = decomposition
        .strata
        .iter()
        .map(|s| {
            let ksum: i32 = s.k.iter().sum();
            pow2(ksum) * s.trees.iter().map(|tr| tr.root().area()).sum::<f64>()
        })
        .sum();
    let mut level_sums = Vec::new();
    let mut level_bounds = Vec::new();
    for (e, g) in &norm {
        let p = exps.get(*e);
        let d = info.d[e] as f64;
        let c = level_set_check(g, d, p, decomposition.cap)?;
        level_sums.push(c.lhs);
        level_bounds.push(c.rhs / g.lp_norm(p).powf(p));
    }
    let geometric_bound = pow2(norm.len() as i32 - 1) * level_sums.iter().sum::<f64>();
    let slack = 1e-12;
    let checks = vec![
        Check::new(
            "geometric_split",
            weighted_measure <= geometric_bound * (1.0 + slack),
            format!("{weighted_measure:.6e} <= {geometric_bound:.6e}"),
        ),
        Check::new(
            "level_set_bounds",
            level_sums.iter().zip(&level_bounds).all(|(s, b)| *s <= b * (1.0 + slack)),
            format!("{level_sums:?} vs {level_bounds:?}"),
        ),
    ];
    Ok(ChainDiagnostic {
        direct,
        weighted_measure,
        tree_constant: if weighted_measure > 0.0 { direct / weighted_measure } else { 0.0 },
        level_sums,
        level_bounds,
        geometric_bound,
        checks,
    })
}

/// `Σ_{active} |Q| |A_Q|` over `∏ ‖F_e‖_{p_e}`; active squares are the root's
/// sub-squares of side at least two cells and `cap` ancestors.
pub fn global_ratio(spec: &BipartiteSpec, bundle: &Bundle, exps: &ExponentTuple, cap: u32) -> Result<f64> {
    spec.validate()?;
    spec.check_bundle(bundle)?;
    let root = bundle.root().ok_or(Error::GeometryMismatch)?;
    let res = bundle.resolution().ok_or(Error::GeometryMismatch)?;
    let mut denom = 1.0;
    for &(i, j) in &spec.edges {
        let id = BipartiteSpec::fn_id(i, j);
        let norm = bundle.get(&id)?.lp_norm(exps.get((i, j)));
        if norm == 0.0 {
            return Err(Error::ZeroNorm(id.to_string()));
        }
        denom *= norm;
    }
    let squares = crate::dyadic::active_squares_for(root, res, cap);
    Ok(crate::graph::lambda_sum(spec, bundle, &squares, true)? / denom)
}

/// `⟨f^n⟩^m ⟨g^m⟩^n / (⟨f^d⟩^{1/d} ⟨g^d⟩^{1/d})^{mn}` for `f = g = 1_{[0,2^{-k})}`, `k = 1..=k_max`.
pub fn sharpness_probe(m: u32, n: u32, d: f64, k_max: u32) -> Result<Vec<f64>> {
    probe(m, n, d, k_max, true, true)
}

/// Which of the two functions is the spike; the other is `≡ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpikeSide {
    First,
    Second,
}

/// The same ratio with only one of `f`, `g` a spike.
pub fn sharpness_probe_one_sided(m: u32, n: u32, d: f64, k_max: u32, side: SpikeSide) -> Result<Vec<f64>> {
    probe(m, n, d, k_max, side == SpikeSide::First, side == SpikeSide::Second)
}

fn probe(m: u32, n: u32, d: f64, k_max: u32, f_spike: bool, g_spike: bool) -> Result<Vec<f64>> {
    if m == 0 || n == 0 || d < 1.0 {
        return Err(Error::Config(format!("need m, n ≥ 1 and d ≥ 1, got {m}, {n}, {d}")));
    }
    let unit = DyadicInterval::new(0, 0);
    let avg = |spike: bool, k: u32, e: f64| -> Result<f64> {
        let prof = if spike {
            gen::spike_profile(unit, k_max, k)?
        } else {
            gen::spike_profile(unit, k_max, 0)?
        };
        prof.map(|v| v.powf(e)).avg(unit)
    };
    (1..=k_max)
        .map(|k| {
            let lhs = avg(f_spike, k, n as f64)?.powi(m as i32) * avg(g_spike, k, m as f64)?.powi(n as i32);
            let rhs = (avg(f_spike, k, d)?.powf(1.0 / d) * avg(g_spike, k, d)?.powf(1.0 / d)).powi((m * n) as i32);
            Ok(lhs / rhs)
        })
        .collect()
}

/// Closed form of [`sharpness_probe`]: `2^{k (2mn/d − m − n)}`.
pub fn sharpness_closed_form(m: u32, n: u32, d: f64, k: u32) -> f64 {
    2f64.powf(k as f64 * (2.0 * (m * n) as f64 / d - (m + n) as f64))
}

/// `(|A|, RHS)` for a cycle of length `4k`: splitting the product of the
/// per-vertex brackets into odd and even vertices and applying AM-GM gives
/// `|A| ≤ ½ ∏_{i odd} ⟨(b_i P_i)²⟩ + ½ ∏_{i even} ⟨(b_i P_i)²⟩` with
/// `P_i = F_{i,i}(x_i, y_i) F_{i,i+1}(x_i, y_{i+1})`.
pub fn cycle_improvement_check(spec: &BipartiteSpec, bundle: &Bundle, q: &DyadicSquare) -> Result<(f64, f64)> {
    spec.validate()?;
    let v = spec.m;
    if v % 2 != 0 || spec.n != v || v < 2 {
        return Err(Error::Precondition("a cycle needs 2k vertices on each side".into()));
    }
    let want: BTreeSet<_> = BipartiteSpec::cycle(v / 2).edges.into_iter().collect();
    let have: BTreeSet<_> = spec.edges.iter().copied().collect();
    if want != have || !spec.selected_x.contains(&1) || !spec.selected_x.contains(&2) {
        return Err(Error::Precondition("expected the edges (i,i), (i,i+1) with x_1, x_2 selected".into()));
    }
    let a = evaluate(&spec.term(), q, bundle)?.abs();
    let half = |parity: usize| -> Result<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut factors = Vec::new();
        for i in (1..=v).filter(|i| i % 2 == parity) {
            let next = i % v + 1;
            let b = if spec.selected_x.contains(&i) { Bracket::Diff } else { Bracket::Avg };
            let (y0, y1) = (ys.len(), ys.len() + 1);
            ys.extend([Bracket::Avg, Bracket::Avg]);
            for _copy in 0..2 {
                let x = xs.len();
                xs.push(b);
                factors.push(Factor::new(FnId::edge(i, i), x, y0));
                factors.push(Factor::new(FnId::edge(i, next), x, y1));
            }
        }
        evaluate(&PPTerm::new(xs, ys, factors)?, q, bundle)
    };
    Ok((a, 0.5 * half(1)? + 0.5 * half(0)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::active_squares_for;
    use crate::gen::GenKind;
    use proptest::prelude::*;

    fn unit() -> DyadicSquare {
        DyadicSquare::unit()
    }

    #[test]
    fn exponent_rules() {
        let s = BipartiteSpec::twisted_paraproduct();
        assert!(ExponentTuple::uniform(&s).is_ok());
        assert!(ExponentTuple::new(&s, &[2.5, 10.0 / 3.0, 10.0 / 3.0]).is_ok());
        assert!(ExponentTuple::new(&s, &[3.0, 3.0, 3.1]).is_err());
        // d = 2 on the twisted paraproduct, so p = 2 is out of range
        assert!(ExponentTuple::new(&s, &[2.0, 3.0, 6.0]).is_err());
    }

    #[test]
    fn hoelder_constants_are_equality() {
        let g = Grid2D::constant(unit(), 2, 1.5).unwrap();
        let grids = vec![vec![g.clone(); 3]; 2];
        let (l, r) = hoelder_check(&grids, &unit()).unwrap();
        assert!((l - 1.5f64.powi(6)).abs() < 1e-12 && (r - l).abs() < 1e-12);
    }

    #[test]
    fn maximal_function_basics() {
        let c = Grid2D::constant(unit(), 3, 0.7).unwrap();
        for d in [1.0, 2.0, 3.0] {
            let m = maximal_function(&c, d).unwrap();
            assert!(m.values().iter().all(|v| (v - 0.7).abs() < 1e-12));
        }
        let g = gen::random_uniform(unit(), 4, 2).unwrap();
        let m = maximal_function(&g, 2.0).unwrap();
        assert!(g.values().iter().zip(m.values()).all(|(a, b)| b >= a));
        // brute force at one cell
        let (cx, cy) = (5usize, 9usize);
        let mut best = 0.0f64;
        for depth in 0..=4u32 {
            let s = 4 - depth;
            let q = DyadicSquare::new(-(depth as i32), (cx >> s) as i64, (cy >> s) as i64);
            best = best.max(g.power_avg(&q, 2.0));
        }
        assert!((m.value(cx, cy) - best).abs() < 1e-12);
    }

    #[test]
    fn level_sets_controlled() {
        for seed in 0..5 {
            let g = gen::random_uniform(unit(), 5, seed).unwrap();
            let c = level_set_check(&g, 2.0, 3.0, 3).unwrap();
            assert!(c.lhs <= c.rhs, "{c:?}");
            let s = gen::spike(unit(), 5, 4).unwrap();
            let c = level_set_check(&s, 1.0, 3.0, 4).unwrap();
            assert!(c.lhs <= c.rhs, "{c:?}");
        }
    }

    #[test]
    fn constant_tree_ratio_is_zero() {
        let s = BipartiteSpec::twisted_paraproduct();
        let one = Grid2D::constant(unit(), 3, 1.0).unwrap();
        let b = gen::bundle_for(&s, unit(), 3, 0).unwrap().map_grids(|_, _| one.clone());
        let tree = ConvexTree::full(unit(), 2);
        assert_eq!(single_tree_ratio(&s, &b, &tree).unwrap(), 0.0);
    }

    #[test]
    fn tree_ratio_is_scale_free() {
        let s = BipartiteSpec::twisted_paraproduct();
        let b = gen::bundle_for(&s, unit(), 3, 4).unwrap();
        let tree = gen::random_convex_tree(unit(), 2, 4);
        let r1 = single_tree_ratio(&s, &b, &tree).unwrap();
        let b2 = b.map_grids(|_, g| g.scaled(3.0));
        let r2 = single_tree_ratio(&s, &b2, &tree).unwrap();
        assert!((r1 - r2).abs() <= 1e-12 * r1);
    }

    #[test]
    fn decomposition_invariants() {
        let s = BipartiteSpec::twisted_paraproduct();
        let b = gen::bundle_for(&s, unit(), 3, 1).unwrap();
        let e = ExponentTuple::uniform(&s).unwrap();
        let dec = stopping_decomposition(&s, &b, &e, 2).unwrap();
        for c in &dec.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(dec.tree_count() >= 1);
        let chain = chain_diagnostic(&s, &b, &e, &dec).unwrap();
        for c in &chain.checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn decomposition_skips_vanishing_regions() {
        let s = BipartiteSpec::twisted_paraproduct();
        let b = gen::bundle_of(&s, GenKind::Indicator, unit(), 3, 5).unwrap();
        let e = ExponentTuple::uniform(&s).unwrap();
        let dec = stopping_decomposition(&s, &b, &e, 1).unwrap();
        assert!(dec.passed(), "{:?}", dec.checks);
    }

    #[test]
    fn global_ratio_homogeneous() {
        let s = BipartiteSpec::twisted_paraproduct();
        let b = gen::bundle_for(&s, unit(), 3, 8).unwrap();
        let e = ExponentTuple::uniform(&s).unwrap();
        let r = global_ratio(&s, &b, &e, 2).unwrap();
        let r2 = global_ratio(&s, &b.map_grids(|_, g| g.scaled(2.0)), &e, 2).unwrap();
        assert!((r - r2).abs() <= 1e-12 * r);
        let r3 = global_ratio(&s, &b.dilate(1), &e, 2).unwrap();
        assert!((r - r3).abs() <= 1e-12 * r);
        let zero = b.map_grids(|_, g| g.scaled(0.0));
        assert!(matches!(global_ratio(&s, &zero, &e, 2), Err(Error::ZeroNorm(_))));
    }

    #[test]
    fn sharpness_matches_closed_form() {
        for (m, n, d) in [(2, 2, 1.0), (2, 2, 2.0), (2, 3, 2.0), (3, 2, 3.0), (1, 1, 1.0)] {
            let v = sharpness_probe(m, n, d, 6).unwrap();
            for (k, r) in v.iter().enumerate() {
                let c = sharpness_closed_form(m, n, d, k as u32 + 1);
                assert!((r - c).abs() <= 1e-12 * c, "{m} {n} {d} {k}: {r} vs {c}");
            }
        }
        let flat = probe(2, 2, 1.0, 4, false, false).unwrap();
        assert!(flat.iter().all(|&r| (r - 1.0).abs() < 1e-15));
    }

    #[test]
    fn one_sided_growth_tracks_the_larger_degree() {
        // growth iff d < n for a spiking f, iff d < m for a spiking g
        let grows = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        let f = sharpness_probe_one_sided(2, 3, 2.5, 6, SpikeSide::First).unwrap();
        let g = sharpness_probe_one_sided(2, 3, 2.5, 6, SpikeSide::Second).unwrap();
        assert!(grows(&f) && !grows(&g));
        let f = sharpness_probe_one_sided(2, 3, 3.0, 6, SpikeSide::First).unwrap();
        assert!(!grows(&f));
    }

    #[test]
    fn cycle_constants() {
        let s = BipartiteSpec::cycle(1);
        let one = Grid2D::constant(unit(), 3, 1.0).unwrap();
        let b = gen::bundle_for(&s, unit(), 3, 0).unwrap().map_grids(|_, _| one.clone());
        let (a, r) = cycle_improvement_check(&s, &b, &unit()).unwrap();
        assert_eq!((a, r), (0.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn hoelder_holds(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
            let grids: Vec<Vec<Grid2D>> = (0..m)
                .map(|i| (0..n).map(|j| gen::random_uniform(unit(), 3, gen::edge_seed(seed, i * n + j)).unwrap()).collect())
                .collect();
            for q in active_squares_for(unit(), 3, 1) {
                let (l, r) = hoelder_check(&grids, &q).unwrap();
                prop_assert!(l <= r + 1e-12, "{} {}", l, r);
            }
        }

        #[test]
        fn cycle_bound(seed in any::<u64>(), k in 1usize..3) {
            let s = BipartiteSpec::cycle(k);
            let b = gen::bundle_for(&s, unit(), 2, seed).unwrap();
            for q in active_squares_for(unit(), 2, 1) {
                let (a, r) = cycle_improvement_check(&s, &b, &q).unwrap();
                prop_assert!(a <= r + 1e-12, "{} {}", a, r);
            }
        }
    }
}
