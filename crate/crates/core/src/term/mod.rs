//! Paraproduct-type terms: products of two-variable functions under one
//! bracket per variable, kept flat (brackets over distinct variables commute).

mod canon;
mod eval;
mod parse;
mod pretty;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dyadic::{ConvexTree, DyadicSquare, Grid2D};
use crate::error::{Error, Result};

pub use eval::{evaluate, evaluate_rect};
pub use parse::{parse_expression, parse_term};

/// `⟨·⟩` (average) or `[·]` (half difference of left and right averages).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bracket {
    Avg,
    Diff,
}

impl Bracket {
    pub fn flip(self) -> Self {
        match self {
            Bracket::Avg => Bracket::Diff,
            Bracket::Diff => Bracket::Avg,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
}

/// Name of a function symbol; keys into a [`Bundle`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FnId(pub String);

impl FnId {
    pub fn new(s: impl Into<String>) -> Self {
        FnId(s.into())
    }

    /// Conventional name of the function on edge `(i, j)` of a graph.
    pub fn edge(i: usize, j: usize) -> Self {
        FnId(format!("F{i}_{j}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `func(x_x, y_y)`, with variables given by their index on each axis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub func: FnId,
    pub x: usize,
    pub y: usize,
}

impl Factor {
    pub fn new(func: FnId, x: usize, y: usize) -> Self {
        Self { func, x, y }
    }
}

/// A paraproduct-type term in standard form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PPTerm {
    xs: Vec<Bracket>,
    ys: Vec<Bracket>,
    factors: Vec<Factor>,
}

impl PPTerm {
    pub fn new(xs: Vec<Bracket>, ys: Vec<Bracket>, factors: Vec<Factor>) -> Result<Self> {
        for f in &factors {
            if f.x >= xs.len() || f.y >= ys.len() {
                return Err(Error::Parse(format!(
                    "factor {}(x{},y{}) refers to an undeclared variable",
                    f.func,
                    f.x + 1,
                    f.y + 1
                )));
            }
        }
        Ok(Self { xs, ys, factors })
    }

    /// The term `⟨1⟩`, with no variables.
    pub fn one() -> Self {
        Self {
            xs: Vec::new(),
            ys: Vec::new(),
            factors: Vec::new(),
        }
    }

    pub fn xs(&self) -> &[Bracket] {
        &self.xs
    }

    pub fn ys(&self) -> &[Bracket] {
        &self.ys
    }

    pub fn brackets(&self, axis: Axis) -> &[Bracket] {
        match axis {
            Axis::X => &self.xs,
            Axis::Y => &self.ys,
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn is_averaging(&self) -> bool {
        self.xs.iter().chain(&self.ys).all(|b| *b == Bracket::Avg)
    }

    pub fn diff_count(&self) -> usize {
        self.xs.iter().chain(&self.ys).filter(|b| **b == Bracket::Diff).count()
    }

    pub fn functions(&self) -> Vec<FnId> {
        let mut v: Vec<FnId> = self.factors.iter().map(|f| f.func.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Same factors with every bracket replaced by `⟨·⟩`.
    pub fn averaged(&self) -> PPTerm {
        PPTerm {
            xs: vec![Bracket::Avg; self.xs.len()],
            ys: vec![Bracket::Avg; self.ys.len()],
            factors: self.factors.clone(),
        }
    }

    pub fn with_bracket(&self, axis: Axis, var: usize, b: Bracket) -> PPTerm {
        let mut t = self.clone();
        match axis {
            Axis::X => t.xs[var] = b,
            Axis::Y => t.ys[var] = b,
        }
        t
    }

    /// Product of two terms over disjoint variable sets.
    pub fn product(&self, other: &PPTerm) -> PPTerm {
        let (mx, my) = (self.xs.len(), self.ys.len());
        let mut t = self.clone();
        t.xs.extend_from_slice(&other.xs);
        t.ys.extend_from_slice(&other.ys);
        t.factors
            .extend(other.factors.iter().map(|f| Factor::new(f.func.clone(), f.x + mx, f.y + my)));
        t
    }

    pub fn power(&self, k: usize) -> PPTerm {
        (0..k).fold(PPTerm::one(), |acc, _| acc.product(self))
    }

    /// Exchange the roles of the two axes. Function symbols are kept, so the
    /// result evaluates on transposed grids.
    pub fn transposed(&self) -> PPTerm {
        PPTerm {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
            factors: self.factors.iter().map(|f| Factor::new(f.func.clone(), f.y, f.x)).collect(),
        }
    }

    pub fn rename_functions(&self, map: impl Fn(&FnId) -> FnId) -> PPTerm {
        let mut t = self.clone();
        for f in &mut t.factors {
            f.func = map(&f.func);
        }
        t
    }

    /// Connected components of the variable graph, as sorted lists of x and y
    /// indices. Unused variables are singleton components.
    pub fn components(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let m = self.xs.len();
        let mut uf = UnionFind::new(m + self.ys.len());
        for f in &self.factors {
            uf.union(f.x, m + f.y);
        }
        let mut groups: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for v in 0..m + self.ys.len() {
            let g = groups.entry(uf.find(v)).or_default();
            if v < m {
                g.0.push(v);
            } else {
                g.1.push(v - m);
            }
        }
        let mut out: Vec<_> = groups.into_values().collect();
        out.sort_by_key(|(x, y)| (x.first().copied().unwrap_or(usize::MAX), y.first().copied().unwrap_or(usize::MAX)));
        out
    }

    /// Restriction to the given variables, renumbered in the given order.
    pub fn sub_term(&self, xs: &[usize], ys: &[usize]) -> PPTerm {
        let xmap: BTreeMap<usize, usize> = xs.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let ymap: BTreeMap<usize, usize> = ys.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        PPTerm {
            xs: xs.iter().map(|&v| self.xs[v]).collect(),
            ys: ys.iter().map(|&v| self.ys[v]).collect(),
            factors: self
                .factors
                .iter()
                .filter_map(|f| Some(Factor::new(f.func.clone(), *xmap.get(&f.x)?, *ymap.get(&f.y)?)))
                .collect(),
        }
    }

    /// Standard form up to variable renaming; two terms that differ only by a
    /// renaming of variables have identical canonical forms.
    pub fn canonical(&self) -> PPTerm {
        canon::canonical(self)
    }

    /// Paper-style rendering, e.g. `⟨⟨F⟩_x[F]_x²⟩_y`.
    pub fn pretty(&self) -> String {
        pretty::pretty_term(self)
    }
}

impl fmt::Display for PPTerm {
    /// Flat text form: `F(x1,y1)*G(x2,y1) | avg(x1,y1) dif(x2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            f.write_str("1")?;
        } else {
            let parts: Vec<String> = self
                .factors
                .iter()
                .map(|fc| format!("{}(x{},y{})", fc.func, fc.x + 1, fc.y + 1))
                .collect();
            f.write_str(&parts.join("*"))?;
        }
        let mut avg = Vec::new();
        let mut dif = Vec::new();
        for (i, b) in self.xs.iter().enumerate() {
            match b {
                Bracket::Avg => avg.push(format!("x{}", i + 1)),
                Bracket::Diff => dif.push(format!("x{}", i + 1)),
            }
        }
        for (j, b) in self.ys.iter().enumerate() {
            match b {
                Bracket::Avg => avg.push(format!("y{}", j + 1)),
                Bracket::Diff => dif.push(format!("y{}", j + 1)),
            }
        }
        if avg.is_empty() && dif.is_empty() {
            return Ok(());
        }
        f.write_str(" |")?;
        if !avg.is_empty() {
            write!(f, " avg({})", avg.join(","))?;
        }
        if !dif.is_empty() {
            write!(f, " dif({})", dif.join(","))?;
        }
        Ok(())
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut v = v;
        while self.parent[v] != r {
            let next = self.parent[v];
            self.parent[v] = r;
            v = next;
        }
        r
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// A linear combination of terms with exact rational coefficients, kept in
/// canonical order with equal terms merged.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PPExpression {
    terms: Vec<(BigRational, PPTerm)>,
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl PPExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (BigRational, PPTerm)>) -> Self {
        let mut acc: BTreeMap<PPTerm, BigRational> = BTreeMap::new();
        for (c, t) in terms {
            *acc.entry(t.canonical()).or_insert_with(BigRational::zero) += c;
        }
        Self {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|(t, c)| (c, t)).collect(),
        }
    }

    pub fn single(t: PPTerm) -> Self {
        Self::from_terms([(BigRational::one(), t)])
    }

    pub fn terms(&self) -> &[(BigRational, PPTerm)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient_of(&self, t: &PPTerm) -> BigRational {
        let key = t.canonical();
        self.terms
            .iter()
            .find(|(_, u)| *u == key)
            .map(|(c, _)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &PPExpression) -> PPExpression {
        Self::from_terms(self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn scaled(&self, c: &BigRational) -> PPExpression {
        Self::from_terms(self.terms.iter().map(|(k, t)| (k * c, t.clone())))
    }

    pub fn is_averaging(&self) -> bool {
        self.terms.iter().all(|(_, t)| t.is_averaging())
    }

    pub fn max_abs_coefficient(&self) -> BigRational {
        self.terms.iter().map(|(c, _)| c.abs()).max().unwrap_or_else(BigRational::zero)
    }

    pub fn evaluate(&self, q: &DyadicSquare, fns: &Bundle) -> Result<f64> {
        let mut s = 0.0;
        for (c, t) in &self.terms {
            s += to_f64(c) * evaluate(t, q, fns)?;
        }
        Ok(s)
    }

    pub fn numeric_box(&self, q: &DyadicSquare, fns: &Bundle) -> Result<f64> {
        let mut s = 0.0;
        for (c, t) in &self.terms {
            s += to_f64(c) * numeric_box(t, q, fns)?;
        }
        Ok(s)
    }

    pub fn pretty(&self) -> String {
        pretty::pretty_expression(self)
    }
}

impl fmt::Display for PPExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(c, t)| format!("{c} * {t}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

pub(crate) fn to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

/// Functions keyed by symbol, all on one common grid geometry.
#[derive(Clone, Debug, Default)]
pub struct Bundle {
    map: BTreeMap<FnId, Grid2D>,
}

impl Bundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: FnId, g: Grid2D) -> Result<()> {
        if let Some(first) = self.map.values().next() {
            if !first.same_geometry(&g) {
                return Err(Error::GeometryMismatch);
            }
        }
        self.map.insert(id, g);
        Ok(())
    }

    pub fn with(mut self, id: impl Into<String>, g: Grid2D) -> Result<Self> {
        self.insert(FnId::new(id), g)?;
        Ok(self)
    }

    pub fn get(&self, id: &FnId) -> Result<&Grid2D> {
        self.map.get(id).ok_or_else(|| Error::UnboundFunction(id.0.clone()))
    }

    pub fn contains(&self, id: &FnId) -> bool {
        self.map.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FnId, &Grid2D)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn root(&self) -> Option<DyadicSquare> {
        self.map.values().next().map(|g| g.root())
    }

    pub fn resolution(&self) -> Option<u32> {
        self.map.values().next().map(|g| g.resolution())
    }

    pub fn map_grids(&self, f: impl Fn(&FnId, &Grid2D) -> Grid2D) -> Bundle {
        Bundle {
            map: self.map.iter().map(|(k, g)| (k.clone(), f(k, g))).collect(),
        }
    }

    pub fn dilate(&self, l: i32) -> Bundle {
        self.map_grids(|_, g| g.dilate(l))
    }
}

/// All terms of the first-order difference of an averaging term, before
/// merging: every choice of an even number of x brackets and an even number
/// of y brackets to flip, not both empty.
pub fn box_difference_raw(b: &PPTerm) -> Result<Vec<PPTerm>> {
    if !b.is_averaging() {
        return Err(Error::Precondition("box difference needs an averaging term".into()));
    }
    let (m, n) = (b.xs.len(), b.ys.len());
    if m > 24 || n > 24 {
        return Err(Error::Precondition("too many variables".into()));
    }
    let mut out = Vec::new();
    for s in 0u32..(1 << m) {
        if s.count_ones() % 2 != 0 {
            continue;
        }
        for t in 0u32..(1 << n) {
            if t.count_ones() % 2 != 0 || (s == 0 && t == 0) {
                continue;
            }
            let mut term = b.clone();
            for i in 0..m {
                if s >> i & 1 == 1 {
                    term.xs[i] = Bracket::Diff;
                }
            }
            for j in 0..n {
                if t >> j & 1 == 1 {
                    term.ys[j] = Bracket::Diff;
                }
            }
            out.push(term);
        }
    }
    Ok(out)
}

/// First-order difference of an averaging term as a merged expression.
pub fn box_difference(b: &PPTerm) -> Result<PPExpression> {
    Ok(PPExpression::from_terms(
        box_difference_raw(b)?.into_iter().map(|t| (BigRational::one(), t)),
    ))
}

/// `¼ Σ_children B(child) − B(q)`.
pub fn numeric_box(b: &PPTerm, q: &DyadicSquare, fns: &Bundle) -> Result<f64> {
    let mut s = 0.0;
    for c in q.children() {
        s += evaluate(b, &c, fns)?;
    }
    Ok(0.25 * s - evaluate(b, q, fns)?)
}

/// Both sides of the even-subset identity on `axis`: the sum over even sets of
/// flipped brackets, and the mean of the term restricted to the two halves.
pub fn even_subset_sum(psi: &PPTerm, axis: Axis, q: &DyadicSquare, fns: &Bundle) -> Result<(f64, f64)> {
    let brackets = psi.brackets(axis);
    if brackets.iter().any(|b| *b != Bracket::Avg) {
        return Err(Error::Precondition("even subset sum flips averaging brackets only".into()));
    }
    let m = brackets.len();
    if m > 24 {
        return Err(Error::Precondition("too many variables".into()));
    }
    let mut lhs = 0.0;
    for s in 0u32..(1 << m) {
        if s.count_ones() % 2 != 0 {
            continue;
        }
        let mut t = psi.clone();
        for i in 0..m {
            if s >> i & 1 == 1 {
                t = t.with_bracket(axis, i, Bracket::Diff);
            }
        }
        lhs += evaluate_rect(&t, q.ix, q.iy, fns)?;
    }
    let (l, r) = match axis {
        Axis::X => (
            evaluate_rect(psi, q.ix.left(), q.iy, fns)?,
            evaluate_rect(psi, q.ix.right(), q.iy, fns)?,
        ),
        Axis::Y => (
            evaluate_rect(psi, q.ix, q.iy.left(), fns)?,
            evaluate_rect(psi, q.ix, q.iy.right(), fns)?,
        ),
    };
    Ok((lhs, 0.5 * l + 0.5 * r))
}

/// `(Σ_{Q∈T} |Q| ΔB(Q), Σ_{leaves} |Q| B(Q) − |root| B(root))`.
pub fn telescope_sum(b: &PPTerm, tree: &ConvexTree, fns: &Bundle) -> Result<(f64, f64)> {
    let mut boxes = 0.0;
    for q in tree.members() {
        boxes += q.area() * numeric_box(b, q, fns)?;
    }
    let mut leaves = 0.0;
    for q in tree.leaves() {
        leaves += q.area() * evaluate(b, &q, fns)?;
    }
    let root = tree.root();
    Ok((boxes, leaves - root.area() * evaluate(b, &root, fns)?))
}

/// `|a − b| ≤ rel · max(|a|, |b|, floor)`.
pub fn close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(floor)
}
