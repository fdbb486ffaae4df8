//! Bipartite graph specifications `(E, S, T)` and the forms they index.
//!
//! Vertices are 1-based: `x_1..x_m` and `y_1..y_n`. Edge `(i, j)` carries the
//! function `F{i}_{j}` and the factor `F{i}_{j}(x_i, y_j)`; variables in `S`
//! and `T` carry difference brackets.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicSquare, Grid2D};
use crate::error::{Error, Result};
use crate::term::{evaluate, Bracket, Bundle, Factor, FnId, PPTerm, UnionFind};

/// The triple `(E, S, T)` on `m + n` vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteSpec {
    pub m: usize,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub selected_x: Vec<usize>,
    pub selected_y: Vec<usize>,
}

/// Connected components and the exponents `d_{i,j}` of a validated spec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentInfo {
    /// `(X_l, Y_l)`, 1-based and sorted, ordered by smallest vertex.
    pub components: Vec<(Vec<usize>, Vec<usize>)>,
    pub d: BTreeMap<(usize, usize), usize>,
    pub isolated_x: Vec<usize>,
    pub isolated_y: Vec<usize>,
}

fn invalid(invariant: &'static str, detail: String) -> Error {
    Error::InvalidSpec { invariant, detail }
}

impl BipartiteSpec {
    pub fn new(m: usize, n: usize, edges: &[(usize, usize)], selected_x: &[usize], selected_y: &[usize]) -> Self {
        Self {
            m,
            n,
            edges: edges.to_vec(),
            selected_x: selected_x.to_vec(),
            selected_y: selected_y.to_vec(),
        }
    }

    /// `m = n = 2`, `E = {(1,1),(1,2),(2,1)}`, `S = {1,2}`, `T = ∅`.
    pub fn twisted_paraproduct() -> Self {
        Self::new(2, 2, &[(1, 1), (1, 2), (2, 1)], &[1, 2], &[])
    }

    /// `E = {(i,i)}` on `n ≥ 2` vertices per side with every x selected.
    pub fn classical_paraproduct(n: usize) -> Self {
        let edges: Vec<_> = (1..=n).map(|i| (i, i)).collect();
        let sel: Vec<_> = (1..=n).collect();
        Self::new(n, n, &edges, &sel, &[])
    }

    /// The cycle of length `4k`: `E = {(i,i), (i,i+1 mod 2k)}` with `S = {1,2}`.
    pub fn cycle(k: usize) -> Self {
        let v = 2 * k;
        let mut edges = Vec::new();
        for i in 1..=v {
            edges.push((i, i));
            edges.push((i, i % v + 1));
        }
        Self::new(v, v, &edges, &[1, 2], &[])
    }

    /// Seven x and six y vertices in three components of sizes 2×3, 2×2, 1×1,
    /// with two selected y vertices.
    pub fn three_component_example() -> Self {
        Self::new(
            7,
            6,
            &[(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 4), (4, 4), (4, 5), (5, 6)],
            &[],
            &[1, 4],
        )
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn fn_id(i: usize, j: usize) -> FnId {
        FnId::edge(i, j)
    }

    /// Check the invariants and derive components and `d`.
    pub fn validate(&self) -> Result<ComponentInfo> {
        if self.edges.is_empty() {
            return Err(invalid("nonempty_edges", "E must not be empty".into()));
        }
        let mut seen = BTreeSet::new();
        for &(i, j) in &self.edges {
            if i == 0 || i > self.m || j == 0 || j > self.n {
                return Err(invalid(
                    "edge_out_of_range",
                    format!("edge ({i},{j}) outside [1,{}]x[1,{}]", self.m, self.n),
                ));
            }
            if !seen.insert((i, j)) {
                return Err(invalid("duplicate_edge", format!("edge ({i},{j}) listed twice")));
            }
        }
        for &i in &self.selected_x {
            if i == 0 || i > self.m {
                return Err(invalid("selected_out_of_range", format!("selected x_{i} outside [1,{}]", self.m)));
            }
        }
        for &j in &self.selected_y {
            if j == 0 || j > self.n {
                return Err(invalid("selected_out_of_range", format!("selected y_{j} outside [1,{}]", self.n)));
            }
        }
        let s: BTreeSet<_> = self.selected_x.iter().collect();
        let t: BTreeSet<_> = self.selected_y.iter().collect();
        if s.len() < 2 && t.len() < 2 {
            return Err(invalid(
                "cancellation",
                format!("need |S| >= 2 or |T| >= 2, got |S| = {}, |T| = {}", s.len(), t.len()),
            ));
        }

        let m = self.m;
        let mut uf = UnionFind::new(m + self.n);
        let mut touched = vec![false; m + self.n];
        for &(i, j) in &self.edges {
            uf.union(i - 1, m + j - 1);
            touched[i - 1] = true;
            touched[m + j - 1] = true;
        }
        let mut groups: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for v in 0..m + self.n {
            if !touched[v] {
                continue;
            }
            let g = groups.entry(uf.find(v)).or_default();
            if v < m {
                g.0.push(v + 1);
            } else {
                g.1.push(v - m + 1);
            }
        }
        let mut components: Vec<_> = groups.into_values().collect();
        components.sort();
        let mut d = BTreeMap::new();
        for &(i, j) in &self.edges {
            let c = components.iter().find(|(xs, _)| xs.contains(&i)).expect("edge in a component");
            d.insert((i, j), c.0.len().max(c.1.len()));
        }
        Ok(ComponentInfo {
            components,
            d,
            isolated_x: (1..=m).filter(|&i| !touched[i - 1]).collect(),
            isolated_y: (1..=self.n).filter(|&j| !touched[m + j - 1]).collect(),
        })
    }

    /// The single-scale term `A_Q` as a symbolic term.
    pub fn term(&self) -> PPTerm {
        let xs = (1..=self.m)
            .map(|i| if self.selected_x.contains(&i) { Bracket::Diff } else { Bracket::Avg })
            .collect();
        let ys = (1..=self.n)
            .map(|j| if self.selected_y.contains(&j) { Bracket::Diff } else { Bracket::Avg })
            .collect();
        let mut edges = self.edges.clone();
        edges.sort();
        let factors = edges.iter().map(|&(i, j)| Factor::new(Self::fn_id(i, j), i - 1, j - 1)).collect();
        PPTerm::new(xs, ys, factors).expect("validated indices")
    }

    /// Make every component complete bipartite; new edges carry the constant 1.
    pub fn complete(&self, bundle: &Bundle) -> Result<(BipartiteSpec, Bundle)> {
        let info = self.validate()?;
        let root = bundle.root().ok_or(Error::GeometryMismatch)?;
        let res = bundle.resolution().ok_or(Error::GeometryMismatch)?;
        let one = Grid2D::constant(root, res, 1.0)?;
        let have: BTreeSet<_> = self.edges.iter().copied().collect();
        let mut spec = self.clone();
        let mut out = bundle.clone();
        for (xs, ys) in &info.components {
            for &i in xs {
                for &j in ys {
                    if !have.contains(&(i, j)) {
                        spec.edges.push((i, j));
                        out.insert(Self::fn_id(i, j), one.clone())?;
                    }
                }
            }
        }
        spec.edges.sort();
        Ok((spec, out))
    }

    /// Edges added by [`complete`](Self::complete).
    pub fn completion_edges(&self) -> Result<Vec<(usize, usize)>> {
        let info = self.validate()?;
        let have: BTreeSet<_> = self.edges.iter().copied().collect();
        let mut out = Vec::new();
        for (xs, ys) in &info.components {
            for &i in xs {
                for &j in ys {
                    if !have.contains(&(i, j)) {
                        out.push((i, j));
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// One term per connected component of the variable graph (isolated
    /// vertices included); their values multiply to the value of [`term`](Self::term).
    pub fn component_terms(&self) -> Vec<PPTerm> {
        let t = self.term();
        t.components().into_iter().map(|(xs, ys)| t.sub_term(&xs, &ys)).collect()
    }

    pub fn check_bundle(&self, bundle: &Bundle) -> Result<()> {
        for &(i, j) in &self.edges {
            bundle.get(&Self::fn_id(i, j))?;
        }
        Ok(())
    }
}

/// `Σ_Q |Q| A_Q` (or `Σ_Q |Q| |A_Q|` with `absolute`), evaluated in parallel
/// and summed in the order of `squares`.
pub fn lambda_sum(spec: &BipartiteSpec, bundle: &Bundle, squares: &[DyadicSquare], absolute: bool) -> Result<f64> {
    spec.validate()?;
    spec.check_bundle(bundle)?;
    let t = spec.term();
    let vals = squares
        .par_iter()
        .map(|q| evaluate(&t, q, bundle).map(|a| q.area() * if absolute { a.abs() } else { a }))
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.iter().sum())
}

/// `A_Q` at every square, in order.
pub fn local_terms(spec: &BipartiteSpec, bundle: &Bundle, squares: &[DyadicSquare]) -> Result<Vec<f64>> {
    spec.check_bundle(bundle)?;
    let t = spec.term();
    squares.par_iter().map(|q| evaluate(&t, q, bundle)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::active_squares_for;
    use crate::gen;

    #[test]
    fn d_values() {
        let info = BipartiteSpec::twisted_paraproduct().validate().unwrap();
        assert_eq!(info.components.len(), 1);
        assert!(info.d.values().all(|&d| d == 2));

        let info = BipartiteSpec::classical_paraproduct(3).validate().unwrap();
        assert_eq!(info.components.len(), 3);
        assert!(info.d.values().all(|&d| d == 1));

        let info = BipartiteSpec::three_component_example().validate().unwrap();
        assert_eq!(info.d.values().copied().collect::<Vec<_>>(), vec![3, 3, 3, 3, 3, 2, 2, 2, 1]);
        assert_eq!(
            info.components,
            vec![(vec![1, 2], vec![1, 2, 3]), (vec![3, 4], vec![4, 5]), (vec![5], vec![6])]
        );
        assert_eq!(info.isolated_x, vec![6, 7]);
    }

    #[test]
    fn invariants_are_named() {
        let name = |s: BipartiteSpec| match s.validate() {
            Err(Error::InvalidSpec { invariant, .. }) => invariant,
            other => panic!("{other:?}"),
        };
        assert_eq!(name(BipartiteSpec::new(2, 2, &[(1, 1)], &[1], &[1])), "cancellation");
        assert_eq!(name(BipartiteSpec::new(2, 2, &[], &[1, 2], &[])), "nonempty_edges");
        assert_eq!(name(BipartiteSpec::new(2, 2, &[(3, 1)], &[1, 2], &[])), "edge_out_of_range");
        assert_eq!(name(BipartiteSpec::new(2, 2, &[(1, 1)], &[1, 5], &[])), "selected_out_of_range");
        assert_eq!(name(BipartiteSpec::new(2, 2, &[(1, 1), (1, 1)], &[1, 2], &[])), "duplicate_edge");
    }

    #[test]
    fn json_shape() {
        let s = BipartiteSpec::twisted_paraproduct();
        let j = s.to_json().unwrap();
        assert_eq!(j, r#"{"m":2,"n":2,"edges":[[1,1],[1,2],[2,1]],"selected_x":[1,2],"selected_y":[]}"#);
        assert_eq!(BipartiteSpec::from_json(&j).unwrap(), s);
    }

    #[test]
    fn completion_adds_constant_ones() {
        let s = BipartiteSpec::three_component_example();
        assert_eq!(s.completion_edges().unwrap(), vec![(2, 3), (3, 5)]);
        let b = gen::bundle_for(&s, DyadicSquare::unit(), 3, 7).unwrap();
        let (c, cb) = s.complete(&b).unwrap();
        assert_eq!(c.validate().unwrap().d, {
            let mut d = s.validate().unwrap().d;
            d.insert((2, 3), 3);
            d.insert((3, 5), 2);
            d
        });
        let sq = active_squares_for(DyadicSquare::unit(), 3, 1);
        for q in &sq {
            let a = evaluate(&s.term(), q, &b).unwrap();
            let a2 = evaluate(&c.term(), q, &cb).unwrap();
            assert!((a - a2).abs() <= 1e-12 * a.abs().max(1e-300), "{a} {a2}");
        }
    }

    /// Twisted paraproduct by direct Haar sums over all cell tuples.
    fn twisted_direct(b: &Bundle, q: &DyadicSquare) -> f64 {
        let g = |n: &str| b.get(&FnId::new(n)).unwrap();
        let (f11, f12, f21) = (g("F1_1"), g("F1_2"), g("F2_1"));
        let res = f11.resolution();
        let c = 1usize << (q.scale() + res as i32);
        let x0 = q.ix.index as usize * c;
        let y0 = q.iy.index as usize * c;
        let h = |k: usize| if k < c / 2 { 1.0 } else { -1.0 };
        let mut s = 0.0;
        for a1 in 0..c {
            for a2 in 0..c {
                for b1 in 0..c {
                    for b2 in 0..c {
                        s += h(a1)
                            * h(a2)
                            * f11.value(x0 + a1, y0 + b1)
                            * f12.value(x0 + a1, y0 + b2)
                            * f21.value(x0 + a2, y0 + b1);
                    }
                }
            }
        }
        s / (c as f64).powi(4)
    }

    #[test]
    fn twisted_lambda_matches_direct_sum() {
        let s = BipartiteSpec::twisted_paraproduct();
        let b = gen::bundle_for(&s, DyadicSquare::unit(), 3, 11).unwrap();
        let sq = active_squares_for(DyadicSquare::unit(), 3, 0);
        let direct: f64 = sq.iter().map(|q| q.area() * twisted_direct(&b, q)).sum();
        let fast = lambda_sum(&s, &b, &sq, false).unwrap();
        assert!((direct - fast).abs() <= 1e-12 * direct.abs().max(1e-3));
    }

    #[test]
    fn constants_vanish() {
        let s = BipartiteSpec::twisted_paraproduct();
        let one = Grid2D::constant(DyadicSquare::unit(), 3, 1.0).unwrap();
        let mut b = Bundle::new();
        for &(i, j) in &s.edges {
            b.insert(BipartiteSpec::fn_id(i, j), one.clone()).unwrap();
        }
        // inside the root the data are constant; above it they are not
        let inside = active_squares_for(DyadicSquare::unit(), 3, 0);
        assert_eq!(lambda_sum(&s, &b, &inside, true).unwrap(), 0.0);
        let above = [DyadicSquare::unit().parent()];
        assert!(lambda_sum(&s, &b, &above, true).unwrap() > 0.0);
    }

    #[test]
    fn component_product() {
        let s = BipartiteSpec::three_component_example();
        let b = gen::bundle_for(&s, DyadicSquare::unit(), 3, 3).unwrap();
        let parts = s.component_terms();
        // three graph components plus the isolated x_6, x_7
        assert_eq!(parts.len(), 5);
        for q in active_squares_for(DyadicSquare::unit(), 3, 0) {
            let whole = evaluate(&s.term(), &q, &b).unwrap();
            let prod: f64 = parts.iter().map(|t| evaluate(t, &q, &b).unwrap()).product();
            assert!((whole - prod).abs() <= 1e-12 * whole.abs().max(1e-300));
        }
    }
}
