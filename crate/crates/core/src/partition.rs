//! Selective `(m,n)`-partitions, their terms, and the reductions that
//! dominate every term by a first-order difference plus lower-rank terms.
//!
//! A partition `(a; b; α; β)` picks `a_i` copies of `x_i` and `b_j` copies of
//! `y_j` for a complete bipartite component; the first `α_i` copies of `x_i`
//! and the first `β_j` copies of `y_j` carry difference brackets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::dyadic::DyadicSquare;
use crate::error::{Error, Result};
use crate::graph::BipartiteSpec;
use crate::term::{evaluate, numeric_box, to_f64, Axis, Bracket, Bundle, Factor, FnId, PPExpression, PPTerm};

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidPartition(msg.into())
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// `(a; b; α; β)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SelectivePartition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
}

/// The composition type `(a; b)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl SelectivePartition {
    pub fn new(a: Vec<usize>, b: Vec<usize>, alpha: Vec<usize>, beta: Vec<usize>) -> Result<Self> {
        let p = Self { a, b, alpha, beta };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        let (m, n) = (self.a.len(), self.b.len());
        if m == 0 || n == 0 {
            return Err(bad("m and n must be positive"));
        }
        if self.alpha.len() != m || self.beta.len() != n {
            return Err(bad("α must have length m and β length n"));
        }
        if self.alpha.iter().zip(&self.a).any(|(al, a)| al > a) || self.beta.iter().zip(&self.b).any(|(be, b)| be > b) {
            return Err(bad(format!("{self}: need α_i ≤ a_i and β_j ≤ b_j")));
        }
        if self.a.iter().sum::<usize>() != m || self.b.iter().sum::<usize>() != n {
            return Err(bad(format!("{self}: need Σa = m and Σb = n")));
        }
        let (sa, sb) = (self.alpha.iter().sum::<usize>(), self.beta.iter().sum::<usize>());
        if sa % 2 != 0 || sb % 2 != 0 {
            return Err(bad(format!("{self}: Σα and Σβ must be even")));
        }
        if sa == 0 && sb == 0 {
            return Err(bad(format!("{self}: some bracket must be a difference")));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn composition(&self) -> Composition {
        Composition {
            a: self.a.clone(),
            b: self.b.clone(),
        }
    }

    /// Decreasing rearrangements of `a` and `b`.
    pub fn partition_type(&self) -> (Vec<usize>, Vec<usize>) {
        self.composition().partition_type()
    }

    /// Swap the roles of x and y.
    pub fn transposed(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            alpha: self.beta.clone(),
            beta: self.alpha.clone(),
        }
    }

    fn selected_x(&self) -> usize {
        self.alpha.iter().filter(|&&v| v != 0).count()
    }

    fn selected_y(&self) -> usize {
        self.beta.iter().filter(|&&v| v != 0).count()
    }

    /// Differences on at least two distinct x indices or two distinct y indices.
    pub fn is_case1(&self) -> bool {
        self.selected_x() >= 2 || self.selected_y() >= 2
    }

    /// `∏ C(a_i, α_i) ∏ C(b_j, β_j)`: how often this term appears in the
    /// difference of its composition's averaging term.
    pub fn multiplicity(&self) -> u64 {
        let c: u64 = self.a.iter().zip(&self.alpha).map(|(&a, &al)| binomial(a, al)).product();
        c * self.b.iter().zip(&self.beta).map(|(&b, &be)| binomial(b, be)).product::<u64>()
    }
}

impl fmt::Display for SelectivePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; {}; {}; {})", join(&self.a), join(&self.b), join(&self.alpha), join(&self.beta))
    }
}

fn parse_groups(s: &str, count: usize) -> Result<Vec<Vec<usize>>> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| bad(format!("expected parentheses in {s:?}")))?;
    let groups: Vec<&str> = inner.split(';').collect();
    if groups.len() != count {
        return Err(bad(format!("expected {count} groups in {s:?}")));
    }
    groups
        .iter()
        .map(|g| {
            g.split(',')
                .map(|v| v.trim().parse::<usize>().map_err(|_| bad(format!("bad entry {v:?} in {s:?}"))))
                .collect()
        })
        .collect()
}

impl FromStr for SelectivePartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut g = parse_groups(s, 4)?.into_iter();
        let (a, b, al, be) = (g.next().unwrap(), g.next().unwrap(), g.next().unwrap(), g.next().unwrap());
        Self::new(a, b, al, be)
    }
}

impl Composition {
    pub fn new(a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(bad("m and n must be positive"));
        }
        if a.iter().sum::<usize>() != a.len() || b.iter().sum::<usize>() != b.len() {
            return Err(bad(format!("({}; {}): need Σa = m and Σb = n", join(&a), join(&b))));
        }
        Ok(Self { a, b })
    }

    pub fn partition_type(&self) -> (Vec<usize>, Vec<usize>) {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        a.sort_unstable_by(|x, y| y.cmp(x));
        b.sort_unstable_by(|x, y| y.cmp(x));
        (a, b)
    }

    pub fn transposed(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; {})", join(&self.a), join(&self.b))
    }
}

impl FromStr for Composition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut g = parse_groups(s, 2)?.into_iter();
        Self::new(g.next().unwrap(), g.next().unwrap())
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Number of partitions of `n` into positive parts.
pub fn integer_partition_count(n: usize) -> u64 {
    let mut ways = vec![0u64; n + 1];
    ways[0] = 1;
    for part in 1..=n {
        for total in part..=n {
            ways[total] += ways[total - part];
        }
    }
    ways[n]
}

/// All `len`-tuples of nonnegative integers summing to `total`, in lexicographic order.
fn weak_compositions(total: usize, len: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 1 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=rest {
            cur.push(v);
            go(rest - v, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(total, len, &mut Vec::new(), &mut out);
    out
}

/// Tuples `v` with `0 ≤ v_i ≤ bound_i`, in lexicographic order.
fn boxed_tuples(bound: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &b in bound {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=b).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// All compositions `(a; b)` of `(m, n)`.
pub fn compositions(m: usize, n: usize) -> Vec<Composition> {
    let bs = weak_compositions(n, n);
    weak_compositions(m, m)
        .into_iter()
        .flat_map(|a| bs.iter().map(move |b| Composition { a: a.clone(), b: b.clone() }))
        .collect()
}

/// Every selective partition with composition `q`.
pub fn omega_q(q: &Composition) -> Vec<SelectivePartition> {
    let alphas: Vec<_> = boxed_tuples(&q.a).into_iter().filter(|v| v.iter().sum::<usize>() % 2 == 0).collect();
    let betas: Vec<_> = boxed_tuples(&q.b).into_iter().filter(|v| v.iter().sum::<usize>() % 2 == 0).collect();
    let mut out = Vec::new();
    for al in &alphas {
        for be in &betas {
            if al.iter().all(|&v| v == 0) && be.iter().all(|&v| v == 0) {
                continue;
            }
            out.push(SelectivePartition {
                a: q.a.clone(),
                b: q.b.clone(),
                alpha: al.clone(),
                beta: be.clone(),
            });
        }
    }
    out
}

/// The full set `Ω_{m,n}` in a fixed order: by composition, then by `(α, β)`.
pub fn enumerate_omega(m: usize, n: usize) -> Vec<SelectivePartition> {
    compositions(m, n).iter().flat_map(omega_q).collect()
}

/// A partition type with its rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionType {
    pub a_star: Vec<usize>,
    pub b_star: Vec<usize>,
    pub rank: usize,
}

impl fmt::Display for PartitionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; {})", join(&self.a_star), join(&self.b_star))
    }
}

/// `Ω*_{m,n}` ordered by rank: lexicographically larger `(a*; b*)` comes first.
#[derive(Clone, Debug)]
pub struct PartitionTypes {
    m: usize,
    n: usize,
    types: Vec<PartitionType>,
    index: BTreeMap<(Vec<usize>, Vec<usize>), usize>,
}

fn decreasing_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = weak_compositions(n, n)
        .into_iter()
        .filter(|v| v.windows(2).all(|w| w[0] >= w[1]))
        .collect();
    out.sort();
    out
}

impl PartitionTypes {
    pub fn new(m: usize, n: usize) -> Self {
        let mut keys = Vec::new();
        for a in decreasing_partitions(m) {
            for b in decreasing_partitions(n) {
                keys.push((a.clone(), b));
            }
        }
        keys.sort_by(|x, y| y.cmp(x));
        let types: Vec<_> = keys
            .iter()
            .enumerate()
            .map(|(k, (a, b))| PartitionType {
                a_star: a.clone(),
                b_star: b.clone(),
                rank: k + 1,
            })
            .collect();
        let index = keys.into_iter().enumerate().map(|(k, key)| (key, k + 1)).collect();
        Self { m, n, types, index }
    }

    pub fn types(&self) -> &[PartitionType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn rank_of_composition(&self, q: &Composition) -> usize {
        assert_eq!((q.a.len(), q.b.len()), (self.m, self.n), "composition shape");
        self.index[&q.partition_type()]
    }

    pub fn rank(&self, p: &SelectivePartition) -> usize {
        self.rank_of_composition(&p.composition())
    }

    pub fn by_rank(&self, rank: usize) -> &PartitionType {
        &self.types[rank - 1]
    }
}

/// `A^(p)` on a complete component whose x vertices carry labels `x_labels`
/// and y vertices `y_labels`; factors use functions `F{x_label}_{y_label}`.
pub fn term_of_partition_on(p: &SelectivePartition, x_labels: &[usize], y_labels: &[usize]) -> PPTerm {
    assert_eq!(x_labels.len(), p.m());
    assert_eq!(y_labels.len(), p.n());
    let mut xs = Vec::new();
    let mut xl = Vec::new();
    for (i, &a) in p.a.iter().enumerate() {
        for mu in 0..a {
            xs.push(if mu < p.alpha[i] { Bracket::Diff } else { Bracket::Avg });
            xl.push(x_labels[i]);
        }
    }
    let mut ys = Vec::new();
    let mut yl = Vec::new();
    for (j, &b) in p.b.iter().enumerate() {
        for nu in 0..b {
            ys.push(if nu < p.beta[j] { Bracket::Diff } else { Bracket::Avg });
            yl.push(y_labels[j]);
        }
    }
    let mut factors = Vec::new();
    for (u, &i) in xl.iter().enumerate() {
        for (v, &j) in yl.iter().enumerate() {
            factors.push(Factor::new(FnId::edge(i, j), u, v));
        }
    }
    PPTerm::new(xs, ys, factors).expect("indices in range")
}

/// `A^(p)` with vertex labels `1..m` and `1..n`.
pub fn term_of_partition(p: &SelectivePartition) -> PPTerm {
    let xl: Vec<usize> = (1..=p.m()).collect();
    let yl: Vec<usize> = (1..=p.n()).collect();
    term_of_partition_on(p, &xl, &yl)
}

/// The averaging term with the copies of `q`.
pub fn composition_term_on(q: &Composition, x_labels: &[usize], y_labels: &[usize]) -> PPTerm {
    let p = SelectivePartition {
        a: q.a.clone(),
        b: q.b.clone(),
        alpha: vec![0; q.a.len()],
        beta: vec![0; q.b.len()],
    };
    term_of_partition_on(&p, x_labels, y_labels)
}

pub fn composition_term(q: &Composition) -> PPTerm {
    let xl: Vec<usize> = (1..=q.a.len()).collect();
    let yl: Vec<usize> = (1..=q.b.len()).collect();
    composition_term_on(q, &xl, &yl)
}

/// `B^(p)`: the averaging term of `p`'s composition.
pub fn bellman_candidate(p: &SelectivePartition) -> PPTerm {
    composition_term(&p.composition())
}

/// `Σ_{p' ∈ Ω_q} mult(p') A^(p')` as a merged expression.
pub fn box_expansion(q: &Composition) -> PPExpression {
    PPExpression::from_terms(
        omega_q(q)
            .into_iter()
            .map(|p| (BigRational::from_integer(BigInt::from(p.multiplicity())), term_of_partition(&p))),
    )
}

/// `(numeric Box B_q(Q), Σ mult(p') A^(p')(Q))`.
pub fn box_expansion_check(q: &Composition, square: &DyadicSquare, fns: &Bundle) -> Result<(f64, f64)> {
    let lhs = numeric_box(&composition_term(q), square, fns)?;
    let mut rhs = 0.0;
    for p in omega_q(q) {
        rhs += p.multiplicity() as f64 * evaluate(&term_of_partition(&p), square, fns)?;
    }
    Ok((lhs, rhs))
}

/// The three-way split of `Ω_q` used for the averaging case, oriented so
/// that `axis` plays the role of the selected-once side: with `Axis::X`,
/// part 1 has one selected x index and no y differences, part 2 has exactly
/// one selected y index, and part 3 is the rest.
#[derive(Clone, Debug, Default)]
pub struct OmegaSplit {
    pub one: Vec<SelectivePartition>,
    pub two: Vec<SelectivePartition>,
    pub three: Vec<SelectivePartition>,
}

pub fn split_omega_q(q: &Composition, axis: Axis) -> OmegaSplit {
    let mut out = OmegaSplit::default();
    for p in omega_q(q) {
        let o = match axis {
            Axis::X => p.clone(),
            Axis::Y => p.transposed(),
        };
        let (sx, sy) = (o.selected_x(), o.selected_y());
        if sx == 1 && sy == 0 {
            out.one.push(p);
        } else if sy == 1 {
            out.two.push(p);
        } else {
            out.three.push(p);
        }
    }
    out
}

/// Targets of the pairwise reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    /// Weighted by `δ^{-1}`; always of strictly smaller rank.
    pub tilde: SelectivePartition,
    /// Weighted by `δ`.
    pub bar: SelectivePartition,
}

/// `|A^(p)| ≤ ½ (δ^{-1} A^(p̃) + δ A^(p̄))` for two selected indices `i1 ≠ i2`
/// (0-based) on `axis` with `a_{i1} ≥ a_{i2}`.
pub fn case1_reduction(p: &SelectivePartition, axis: Axis, i1: usize, i2: usize) -> Result<Reduction> {
    if axis == Axis::Y {
        let r = case1_reduction(&p.transposed(), Axis::X, i1, i2)?;
        return Ok(Reduction {
            tilde: r.tilde.transposed(),
            bar: r.bar.transposed(),
        });
    }
    let m = p.m();
    if i1 >= m || i2 >= m || i1 == i2 {
        return Err(Error::Precondition(format!("need distinct indices below {m}, got {i1}, {i2}")));
    }
    if p.alpha[i1] == 0 || p.alpha[i2] == 0 {
        return Err(Error::Precondition(format!("{p}: indices {i1}, {i2} must both be selected")));
    }
    if p.a[i1] < p.a[i2] {
        return Err(Error::Precondition(format!("{p}: need a_{i1} ≥ a_{i2}")));
    }
    let make = |up: usize, down: usize| {
        let mut a = p.a.clone();
        a[up] += 1;
        a[down] -= 1;
        let mut alpha = vec![0; m];
        alpha[up] = 2;
        SelectivePartition::new(a, p.b.clone(), alpha, vec![0; p.n()])
    };
    Ok(Reduction {
        tilde: make(i1, i2)?,
        bar: make(i2, i1)?,
    })
}

/// Every admissible `(axis, i1, i2)` for [`case1_reduction`].
pub fn case1_choices(p: &SelectivePartition) -> Vec<(Axis, usize, usize)> {
    let mut out = Vec::new();
    for (axis, a, al) in [(Axis::X, &p.a, &p.alpha), (Axis::Y, &p.b, &p.beta)] {
        for i1 in 0..a.len() {
            for i2 in 0..a.len() {
                if i1 != i2 && al[i1] > 0 && al[i2] > 0 && a[i1] >= a[i2] {
                    out.push((axis, i1, i2));
                }
            }
        }
    }
    out
}

/// Edge label of the reduction graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeLabel {
    InvDelta,
    Delta,
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeLabel::InvDelta => "inv_delta",
            EdgeLabel::Delta => "delta",
        })
    }
}

/// Partition types with an edge for every pairwise reduction of every representative.
#[derive(Clone, Debug)]
pub struct ReductionGraph {
    pub types: PartitionTypes,
    /// `(from rank, to rank, label)`.
    pub edges: BTreeSet<(usize, usize, EdgeLabel)>,
}

pub fn reduction_graph(m: usize, n: usize) -> ReductionGraph {
    let types = PartitionTypes::new(m, n);
    let mut edges = BTreeSet::new();
    for p in enumerate_omega(m, n) {
        let from = types.rank(&p);
        for (axis, i1, i2) in case1_choices(&p) {
            let r = case1_reduction(&p, axis, i1, i2).expect("admissible choice");
            edges.insert((from, types.rank(&r.tilde), EdgeLabel::InvDelta));
            edges.insert((from, types.rank(&r.bar), EdgeLabel::Delta));
        }
    }
    ReductionGraph { types, edges }
}

impl ReductionGraph {
    /// Ranks with no outgoing edge.
    pub fn terminal(&self) -> Vec<usize> {
        let from: BTreeSet<usize> = self.edges.iter().map(|e| e.0).collect();
        (1..=self.types.len()).filter(|r| !from.contains(r)).collect()
    }

    /// Every non-terminal node has a `δ^{-1}` edge to a smaller rank.
    pub fn every_node_descends(&self) -> bool {
        let terminal: BTreeSet<usize> = self.terminal().into_iter().collect();
        (1..=self.types.len())
            .filter(|r| !terminal.contains(r))
            .all(|r| self.edges.iter().any(|&(f, t, l)| f == r && l == EdgeLabel::InvDelta && t < r))
    }

    pub fn inv_delta_decreases(&self) -> bool {
        self.edges.iter().filter(|e| e.2 == EdgeLabel::InvDelta).all(|&(f, t, _)| t < f)
    }

    /// Cycle search restricted to `δ^{-1}` edges.
    pub fn inv_delta_acyclic(&self) -> bool {
        let k = self.types.len();
        let mut adj = vec![Vec::new(); k + 1];
        for &(f, t, l) in &self.edges {
            if l == EdgeLabel::InvDelta {
                adj[f].push(t);
            }
        }
        // 0 unvisited, 1 on stack, 2 done
        let mut state = vec![0u8; k + 1];
        fn dfs(v: usize, adj: &[Vec<usize>], state: &mut [u8]) -> bool {
            state[v] = 1;
            for &w in &adj[v] {
                if state[w] == 1 || (state[w] == 0 && !dfs(w, adj, state)) {
                    return false;
                }
            }
            state[v] = 2;
            true
        }
        (1..=k).all(|v| state[v] != 0 || dfs(v, &adj, &mut state))
    }

    /// One line per edge: `(1,1; 2,1,1,0) -> (1,1; 3,1,0,0) inv_delta`.
    pub fn edge_list(&self) -> Vec<String> {
        self.edges
            .iter()
            .map(|&(f, t, l)| format!("{} -> {} {l}", self.types.by_rank(f), self.types.by_rank(t)))
            .collect()
    }
}

/// The two partitions dominating the single-copy term of a complete spec
/// with selected vertices `i1 ≠ i2` (1-based) on `axis`:
/// `|A| ≤ ½ A^(p̃) + ½ A^(p̄)`.
pub fn dominate_general_term(spec: &BipartiteSpec, axis: Axis, i1: usize, i2: usize) -> Result<Reduction> {
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    let have: BTreeSet<_> = spec.edges.iter().copied().collect();
    if have.len() != m * n {
        return Err(Error::Precondition("the graph must be complete bipartite on all vertices".into()));
    }
    let (size, selected) = match axis {
        Axis::X => (m, &spec.selected_x),
        Axis::Y => (n, &spec.selected_y),
    };
    if i1 == i2 || !selected.contains(&i1) || !selected.contains(&i2) {
        return Err(Error::Precondition(format!("need two distinct selected vertices, got {i1}, {i2}")));
    }
    let make = |two: usize, zero: usize| {
        let mut a = vec![1; size];
        a[two - 1] = 2;
        a[zero - 1] = 0;
        let mut alpha = vec![0; size];
        alpha[two - 1] = 2;
        let other = match axis {
            Axis::X => n,
            Axis::Y => m,
        };
        let p = SelectivePartition::new(a, vec![1; other], alpha, vec![0; other])?;
        Ok::<_, Error>(match axis {
            Axis::X => p,
            Axis::Y => p.transposed(),
        })
    };
    Ok(Reduction {
        tilde: make(i1, i2)?,
        bar: make(i2, i1)?,
    })
}

/// Constants of the domination argument.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionConfig {
    pub delta: f64,
    pub c: BigRational,
    pub epsilon: BigRational,
}

impl ReductionConfig {
    pub fn new(delta: f64, c: BigRational, epsilon: BigRational) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("δ must lie in (0,1), got {delta}")));
        }
        if c < BigRational::one() {
            return Err(Error::Config(format!("C must be at least 1, got {c}")));
        }
        if !(epsilon > BigRational::zero() && epsilon < BigRational::one()) {
            return Err(Error::Config(format!("ε must lie in (0,1), got {epsilon}")));
        }
        Ok(Self { delta, c, epsilon })
    }

    /// `δ = ½`, `ε = ½` and [`default_constant`].
    pub fn default_for(m: usize, n: usize) -> Self {
        Self::new(0.5, default_constant(m, n), BigRational::new(1.into(), 2.into())).expect("valid defaults")
    }
}

/// `max(2 · max mult, ½ · max_q Σ_{part 3 of Ω_q} mult)` over both orientations.
///
/// The first entry covers the binomial multiplicities; the second is what the
/// averaging case needs when every part-3 term is reduced pairwise.
pub fn default_constant(m: usize, n: usize) -> BigRational {
    let mut max_mult = 0u64;
    let mut max_three = 0u64;
    for q in compositions(m, n) {
        for p in omega_q(&q) {
            max_mult = max_mult.max(p.multiplicity());
        }
        for axis in [Axis::X, Axis::Y] {
            let s: u64 = split_omega_q(&q, axis).three.iter().map(|p| p.multiplicity()).sum();
            max_three = max_three.max(s);
        }
    }
    let a = BigRational::from_integer(BigInt::from(2 * max_mult));
    let b = BigRational::new(BigInt::from(max_three), BigInt::from(2));
    a.max(b).max(BigRational::one())
}

/// `B^(κ,ε)`: zero for `κ = 0`, otherwise
/// `2 Σ_{rank ≤ κ} B^(p) + (8 C² |Ω|² / ε) B^(κ-1, ε')` with `ε' = (ε / (4 C |Ω|))²`.
/// Only averaging-case partitions contribute `B^(p)`.
pub fn assemble_bellman(m: usize, n: usize, kappa: usize, c: &BigRational, epsilon: &BigRational) -> PPExpression {
    let types = PartitionTypes::new(m, n);
    let omega = enumerate_omega(m, n);
    assemble_inner(&types, &omega, kappa, c, epsilon)
}

fn assemble_inner(
    types: &PartitionTypes,
    omega: &[SelectivePartition],
    kappa: usize,
    c: &BigRational,
    epsilon: &BigRational,
) -> PPExpression {
    if kappa == 0 {
        return PPExpression::zero();
    }
    let size = BigRational::from_integer(BigInt::from(omega.len()));
    let two = BigRational::from_integer(2.into());
    let own = PPExpression::from_terms(
        omega
            .iter()
            .filter(|p| !p.is_case1() && types.rank(p) <= kappa)
            .map(|p| (two.clone(), bellman_candidate(p))),
    );
    let inner_eps = {
        let r = epsilon / (BigRational::from_integer(4.into()) * c * &size);
        &r * &r
    };
    let weight = BigRational::from_integer(8.into()) * c * c * &size * &size / epsilon;
    own.add(&assemble_inner(types, omega, kappa - 1, c, &inner_eps).scaled(&weight))
}

/// Outcome of comparing both sides of a domination inequality.
#[derive(Clone, Debug)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// Allowed floating-point excess of `lhs` over `rhs`.
    pub allowance: f64,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + self.allowance
    }
}

/// `Σ_{rank ≤ κ} |A^(p)| ≤ Box B^(κ,ε) + ε Σ_{rank > κ} |A^(p)|` at `square`.
///
/// The assembled coefficients are huge, so the allowance scales with
/// `Σ |c| (|B(Q)| + ¼ Σ |B(child)|)` times a few ulps.
pub fn assembly_check(
    m: usize,
    n: usize,
    kappa: usize,
    config: &ReductionConfig,
    square: &DyadicSquare,
    fns: &Bundle,
) -> Result<InequalityCheck> {
    let types = PartitionTypes::new(m, n);
    let omega = enumerate_omega(m, n);
    let b = assemble_inner(&types, &omega, kappa, &config.c, &config.epsilon);
    let mut lhs = 0.0;
    let mut tail = 0.0;
    for p in &omega {
        let v = evaluate(&term_of_partition(p), square, fns)?.abs();
        if types.rank(p) <= kappa {
            lhs += v;
        } else {
            tail += v;
        }
    }
    let mut boxed = 0.0;
    let mut scale = 0.0;
    for (c, t) in b.terms() {
        let c = to_f64(c);
        let here = evaluate(t, square, fns)?;
        let mut kids = 0.0;
        let mut kids_abs = 0.0;
        for ch in square.children() {
            let v = evaluate(t, &ch, fns)?;
            kids += v;
            kids_abs += v.abs();
        }
        boxed += c * (0.25 * kids - here);
        scale += c.abs() * (here.abs() + 0.25 * kids_abs);
    }
    let rhs = boxed + to_f64(&config.epsilon) * tail;
    Ok(InequalityCheck {
        lhs,
        rhs,
        allowance: 1e-12 * scale + 1e-12,
    })
}

/// The single-partition domination at `square`:
/// `|A^(p)| ≤ Box B^(p) + C δ^{-1} Σ_{rank < rank p} |A| + C δ Σ_{rank ≥ rank p} |A|`,
/// where `B^(p)` is zero when two indices on one side are selected.
pub fn reduction_check(p: &SelectivePartition, config: &ReductionConfig, square: &DyadicSquare, fns: &Bundle) -> Result<InequalityCheck> {
    let types = PartitionTypes::new(p.m(), p.n());
    let r = types.rank(p);
    let lhs = evaluate(&term_of_partition(p), square, fns)?.abs();
    let mut below = 0.0;
    let mut above = 0.0;
    for other in enumerate_omega(p.m(), p.n()) {
        let v = evaluate(&term_of_partition(&other), square, fns)?.abs();
        if types.rank(&other) < r {
            below += v;
        } else {
            above += v;
        }
    }
    let boxed = if p.is_case1() {
        0.0
    } else {
        numeric_box(&bellman_candidate(p), square, fns)?
    };
    let c = to_f64(&config.c);
    let rhs = boxed + c / config.delta * below + c * config.delta * above;
    Ok(InequalityCheck {
        lhs,
        rhs,
        allowance: 1e-12 * (lhs + rhs.abs()) + 1e-12,
    })
}

/// `|A^(p)| ≤ ½ (δ^{-1} A^(p̃) + δ A^(p̄))` for one admissible choice.
pub fn case1_check(p: &SelectivePartition, axis: Axis, i1: usize, i2: usize, delta: f64, square: &DyadicSquare, fns: &Bundle) -> Result<InequalityCheck> {
    let r = case1_reduction(p, axis, i1, i2)?;
    let lhs = evaluate(&term_of_partition(p), square, fns)?.abs();
    let t = evaluate(&term_of_partition(&r.tilde), square, fns)?;
    let b = evaluate(&term_of_partition(&r.bar), square, fns)?;
    Ok(InequalityCheck {
        lhs,
        rhs: 0.5 * (t / delta + delta * b),
        allowance: 1e-12,
    })
}

/// Largest coefficient of an expression, for reporting growth.
pub fn coefficient_magnitude(e: &PPExpression) -> BigRational {
    e.terms().iter().map(|(c, _)| c.abs()).max().unwrap_or_else(BigRational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::active_squares_for;
    use crate::gen::{self, GenKind};
    use crate::term::box_difference;
    use proptest::prelude::*;

    fn sp(s: &str) -> SelectivePartition {
        s.parse().unwrap()
    }

    #[test]
    fn membership_and_text() {
        let p = sp("(2,0; 2,0,1; 0,0; 1,0,1)");
        assert_eq!(p.to_string(), "(2,0; 2,0,1; 0,0; 1,0,1)");
        assert!(enumerate_omega(2, 3).contains(&p));
        assert!("(2,0; 2,0,1; 1,0; 1,0,1)".parse::<SelectivePartition>().is_err());
        assert!("(2,0; 2,0,1; 0,0; 0,0,0)".parse::<SelectivePartition>().is_err());
        assert!("(2,1; 2,0,1; 0,0; 1,0,1)".parse::<SelectivePartition>().is_err());
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for (m, n) in [(1, 1), (2, 1), (2, 2), (2, 3)] {
            let mut brute = BTreeSet::new();
            let bound: Vec<usize> = [vec![m; m], vec![n; n], vec![m; m], vec![n; n]].concat();
            let tuples = boxed_tuples(&bound);
            for t in tuples {
                let p = SelectivePartition {
                    a: t[..m].to_vec(),
                    b: t[m..m + n].to_vec(),
                    alpha: t[m + n..2 * m + n].to_vec(),
                    beta: t[2 * m + n..].to_vec(),
                };
                if p.check().is_ok() {
                    brute.insert(p);
                }
            }
            let listed = enumerate_omega(m, n);
            let set: BTreeSet<_> = listed.iter().cloned().collect();
            assert_eq!(set.len(), listed.len());
            assert_eq!(set, brute, "({m},{n})");
        }
        // one composition (1;1) and both brackets flipped: impossible, so Ω_{1,1} is empty
        assert!(enumerate_omega(1, 1).is_empty());
    }

    #[test]
    fn partition_counts() {
        let p: Vec<u64> = (1..=6).map(integer_partition_count).collect();
        assert_eq!(p, vec![1, 2, 3, 5, 7, 11]);
        assert_eq!(PartitionTypes::new(2, 4).len(), 10);
        assert_eq!(PartitionTypes::new(1, 1).len(), 1);
    }

    #[test]
    fn type_chain_two_three() {
        let t = PartitionTypes::new(2, 3);
        let listed: Vec<String> = t.types().iter().map(|x| format!("{} {}", x, x.rank)).collect();
        assert_eq!(
            listed,
            vec![
                "(2,0; 3,0,0) 1",
                "(2,0; 2,1,0) 2",
                "(2,0; 1,1,1) 3",
                "(1,1; 3,0,0) 4",
                "(1,1; 2,1,0) 5",
                "(1,1; 1,1,1) 6"
            ]
        );
        assert_eq!(t.rank(&sp("(0,2; 0,1,2; 0,2; 0,0,0)")), 2);
    }

    #[test]
    fn displayed_term() {
        let p = sp("(2,0; 2,0,1; 0,0; 1,0,1)");
        let t = term_of_partition(&p);
        let expect = crate::term::parse_term(
            "F1_1(x1,y1)*F1_1(x1,y2)*F1_3(x1,y3)*F1_1(x2,y1)*F1_1(x2,y2)*F1_3(x2,y3) | avg(x1,x2,y2) dif(y1,y3)",
        )
        .unwrap();
        assert_eq!(t.canonical(), expect.canonical());
        assert!(!t.factors().iter().any(|f| f.func.as_str().starts_with("F2")));
    }

    #[test]
    fn constants_give_zero() {
        let u = DyadicSquare::unit();
        let two = crate::dyadic::Grid2D::constant(u, 3, 2.0).unwrap();
        let b = gen::complete_bundle(2, 3, GenKind::Random, u, 3, 0).unwrap().map_grids(|_, _| two.clone());
        for p in enumerate_omega(2, 3) {
            for q in active_squares_for(u, 3, 0) {
                assert_eq!(evaluate(&term_of_partition(&p), &q, &b).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn expansion_is_symbolic_identity() {
        for (m, n) in [(1, 1), (2, 1), (2, 2), (2, 3)] {
            for q in compositions(m, n) {
                let lhs = box_difference(&composition_term(&q)).unwrap();
                assert_eq!(lhs, box_expansion(&q), "{q}");
            }
        }
    }

    #[test]
    fn expansion_contains_own_term() {
        for p in enumerate_omega(2, 3) {
            let e = box_difference(&bellman_candidate(&p)).unwrap();
            let c = e.coefficient_of(&term_of_partition(&p));
            assert!(c >= BigRational::one(), "{p}");
        }
    }

    #[test]
    fn splits_partition_omega_q() {
        for q in compositions(2, 3) {
            for axis in [Axis::X, Axis::Y] {
                let s = split_omega_q(&q, axis);
                let mut all: Vec<_> = s.one.iter().chain(&s.two).chain(&s.three).cloned().collect();
                all.sort();
                let mut want = omega_q(&q);
                want.sort();
                assert_eq!(all, want);
            }
        }
    }

    #[test]
    fn tilde_rank_drops() {
        let t = PartitionTypes::new(2, 4);
        for p in enumerate_omega(2, 4) {
            for (axis, i1, i2) in case1_choices(&p) {
                let r = case1_reduction(&p, axis, i1, i2).unwrap();
                assert!(t.rank(&r.tilde) < t.rank(&p), "{p}");
            }
        }
        assert!(case1_reduction(&sp("(1,1; 2,1,0; 1,1; 0,0,0)"), Axis::X, 0, 0).is_err());
        assert!(case1_reduction(&sp("(1,1; 2,1,0; 0,0; 2,0,0)"), Axis::X, 0, 1).is_err());
    }

    #[test]
    fn figure_graph() {
        let g = reduction_graph(2, 4);
        assert_eq!(g.types.len(), 10);
        assert!(g.every_node_descends());
        assert!(g.inv_delta_decreases());
        assert!(g.inv_delta_acyclic());
        let terminal: Vec<String> = g.terminal().iter().map(|&r| g.types.by_rank(r).to_string()).collect();
        assert_eq!(terminal, vec!["(2,0; 4,0,0,0)"]);
        let lines = g.edge_list();
        for want in [
            "(1,1; 2,1,1,0) -> (1,1; 3,1,0,0) inv_delta",
            "(1,1; 2,1,1,0) -> (1,1; 2,1,1,0) delta",
            "(1,1; 1,1,1,1) -> (2,0; 1,1,1,1) inv_delta",
            "(1,1; 1,1,1,1) -> (2,0; 1,1,1,1) delta",
            "(2,0; 3,1,0,0) -> (2,0; 4,0,0,0) inv_delta",
            "(2,0; 3,1,0,0) -> (2,0; 2,2,0,0) delta",
        ] {
            assert!(lines.iter().any(|l| l == want), "missing {want}");
        }
    }

    #[test]
    fn general_term_targets() {
        let spec = BipartiteSpec::new(2, 2, &[(1, 1), (1, 2), (2, 1), (2, 2)], &[1, 2], &[]);
        let r = dominate_general_term(&spec, Axis::X, 1, 2).unwrap();
        assert_eq!(r.tilde, sp("(2,0; 1,1; 2,0; 0,0)"));
        assert_eq!(r.bar, sp("(0,2; 1,1; 0,2; 0,0)"));
        let partial = BipartiteSpec::twisted_paraproduct();
        assert!(dominate_general_term(&partial, Axis::X, 1, 2).is_err());
    }

    #[test]
    fn first_assembly_step() {
        let c = default_constant(2, 3);
        let eps = BigRational::new(1.into(), 2.into());
        assert!(assemble_bellman(2, 3, 0, &c, &eps).is_empty());
        let b1 = assemble_bellman(2, 3, 1, &c, &eps);
        // six compositions of type (2,0; 3,0,0), each reached by three averaging-case partitions
        assert_eq!(b1.len(), 6);
        for (coef, t) in b1.terms() {
            assert_eq!(*coef, BigRational::from_integer(6.into()));
            assert!(t.is_averaging());
        }
    }

    #[test]
    fn default_constant_covers_multiplicities() {
        let c = default_constant(2, 2);
        assert!(c >= BigRational::from_integer(2.into()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn pairwise_reduction_holds(seed in any::<u64>(), quarter in any::<bool>()) {
            let delta = if quarter { 0.25 } else { 0.5 };
            let u = DyadicSquare::unit();
            let b = gen::complete_bundle(2, 3, GenKind::Random, u, 2, seed).unwrap();
            for p in enumerate_omega(2, 3) {
                for (axis, i1, i2) in case1_choices(&p) {
                    let c = case1_check(&p, axis, i1, i2, delta, &u, &b).unwrap();
                    prop_assert!(c.holds(), "{} {:?}", p, c);
                }
            }
        }

        #[test]
        fn averaging_parts_have_signs(seed in any::<u64>()) {
            let u = DyadicSquare::unit();
            let b = gen::complete_bundle(2, 3, GenKind::Random, u, 2, seed).unwrap();
            for q in compositions(2, 3) {
                for axis in [Axis::X, Axis::Y] {
                    let s = split_omega_q(&q, axis);
                    for p in &s.one {
                        prop_assert!(evaluate(&term_of_partition(p), &u, &b).unwrap() >= -1e-12);
                    }
                    let two: f64 = s.two.iter()
                        .map(|p| p.multiplicity() as f64 * evaluate(&term_of_partition(p), &u, &b).unwrap())
                        .sum();
                    prop_assert!(two >= -1e-12);
                }
            }
        }

        #[test]
        fn single_partition_domination(seed in any::<u64>()) {
            let u = DyadicSquare::unit();
            let b = gen::complete_bundle(2, 2, GenKind::Random, u, 2, seed).unwrap();
            let cfg = ReductionConfig::default_for(2, 2);
            for p in enumerate_omega(2, 2) {
                let c = reduction_check(&p, &cfg, &u, &b).unwrap();
                prop_assert!(c.holds(), "{} {:?}", p, c);
            }
        }
    }
}
