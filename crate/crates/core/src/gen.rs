//! Seeded data generators. The same seed always gives the same grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{ConvexTree, DyadicInterval, DyadicSquare, Grid2D, Profile};
use crate::error::{Error, Result};
use crate::graph::BipartiteSpec;
use crate::term::{Bracket, Bundle, Factor, FnId, PPTerm};

/// Generator families for test data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    /// IID uniform values on `[0, 1)`.
    Random,
    /// `f(x) g(y)` with seeded uniform profiles.
    Tensor,
    /// Indicator of a seeded dyadic sub-square of the root.
    Indicator,
    /// Indicator of the lower-left corner square of side `2^{-k}` times the root side.
    Spike(u32),
}

impl std::str::FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" | "random_uniform" => Ok(Self::Random),
            "tensor" => Ok(Self::Tensor),
            "indicator" | "dyadic_indicator" => Ok(Self::Indicator),
            _ => match s.strip_prefix("spike") {
                Some(k) => k
                    .trim_matches([':', '=', '(', ')'])
                    .parse()
                    .map(Self::Spike)
                    .map_err(|_| Error::Config(format!("bad spike level in {s:?}"))),
                None => Err(Error::Config(format!(
                    "unknown generator {s:?} (random, tensor, indicator, spike:K)"
                ))),
            },
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_uniform(root: DyadicSquare, res: u32, seed: u64) -> Result<Grid2D> {
    let mut r = rng(seed);
    let n = 1usize << res;
    Grid2D::new(root, res, (0..n * n).map(|_| r.gen::<f64>()).collect())
}

pub fn tensor(root: DyadicSquare, res: u32, seed: u64) -> Result<Grid2D> {
    let mut r = rng(seed);
    let n = 1usize << res;
    let f = Profile::new(root.ix, res, (0..n).map(|_| r.gen::<f64>()).collect())?;
    let g = Profile::new(root.iy, res, (0..n).map(|_| r.gen::<f64>()).collect())?;
    Grid2D::tensor(root, &f, &g)
}

pub fn dyadic_indicator(root: DyadicSquare, res: u32, seed: u64) -> Result<Grid2D> {
    let mut r = rng(seed);
    let depth = r.gen_range(0..=res);
    let k = 1usize << depth;
    let (lx, ly) = (r.gen_range(0..k), r.gen_range(0..k));
    let c = 1usize << (res - depth);
    Grid2D::from_fn(root, res, |cx, cy| if cx / c == lx && cy / c == ly { 1.0 } else { 0.0 })
}

pub fn spike(root: DyadicSquare, res: u32, k: u32) -> Result<Grid2D> {
    if k > res {
        return Err(Error::TooFine {
            scale: root.scale() - k as i32,
            cell_scale: root.scale() - res as i32,
        });
    }
    let c = 1usize << (res - k);
    Grid2D::from_fn(root, res, |cx, cy| if cx < c && cy < c { 1.0 } else { 0.0 })
}

/// One-dimensional spike `1_{[0, 2^{-k})}` relative to `root`.
pub fn spike_profile(root: DyadicInterval, res: u32, k: u32) -> Result<Profile> {
    let n = 1usize << res;
    let c = n >> k.min(res);
    Profile::new(root, res, (0..n).map(|i| if i < c { 1.0 } else { 0.0 }).collect())
}

pub fn generate(kind: GenKind, root: DyadicSquare, res: u32, seed: u64) -> Result<Grid2D> {
    match kind {
        GenKind::Random => random_uniform(root, res, seed),
        GenKind::Tensor => tensor(root, res, seed),
        GenKind::Indicator => dyadic_indicator(root, res, seed),
        GenKind::Spike(k) => spike(root, res, k),
    }
}

/// Per-edge seed: a fixed mix of the run seed and the edge position.
pub fn edge_seed(seed: u64, position: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (position as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// One grid per edge of `spec`, all on the same root and resolution.
pub fn bundle_of(spec: &BipartiteSpec, kind: GenKind, root: DyadicSquare, res: u32, seed: u64) -> Result<Bundle> {
    let mut b = Bundle::new();
    let mut edges = spec.edges.clone();
    edges.sort();
    for (pos, &(i, j)) in edges.iter().enumerate() {
        b.insert(BipartiteSpec::fn_id(i, j), generate(kind, root, res, edge_seed(seed, pos))?)?;
    }
    Ok(b)
}

/// Data `F{i}_{j}` for every pair of the complete bipartite graph on `m + n` vertices.
pub fn complete_bundle(m: usize, n: usize, kind: GenKind, root: DyadicSquare, res: u32, seed: u64) -> Result<Bundle> {
    let mut b = Bundle::new();
    for i in 1..=m {
        for j in 1..=n {
            let pos = (i - 1) * n + (j - 1);
            b.insert(BipartiteSpec::fn_id(i, j), generate(kind, root, res, edge_seed(seed, pos))?)?;
        }
    }
    Ok(b)
}

/// Uniform random data for every edge of `spec`.
pub fn bundle_for(spec: &BipartiteSpec, root: DyadicSquare, res: u32, seed: u64) -> Result<Bundle> {
    bundle_of(spec, GenKind::Random, root, res, seed)
}

/// A random convex tree: each child of a member above `max_depth` joins with probability 1/2.
pub fn random_convex_tree(root: DyadicSquare, max_depth: u32, seed: u64) -> ConvexTree {
    let mut r = rng(seed);
    let mut members = vec![root];
    let mut frontier = vec![root];
    for _ in 0..max_depth {
        let mut next = Vec::new();
        for q in frontier {
            for c in q.children() {
                if r.gen_bool(0.5) {
                    next.push(c);
                }
            }
        }
        members.extend(next.iter().copied());
        frontier = next;
    }
    ConvexTree::new(root, members).expect("children of members are convex")
}

/// Names used by [`random_term`] and [`function_bundle`].
pub const TERM_FUNCTIONS: [&str; 3] = ["F", "G", "H"];

/// A random term with `m` x and `n` y variables. Every variable appears in
/// at least one factor; each factor uses one of [`TERM_FUNCTIONS`].
/// With `averaging` all brackets are averages, otherwise each is a fair coin.
pub fn random_term(m: usize, n: usize, averaging: bool, seed: u64) -> PPTerm {
    let mut r = rng(seed);
    let mut factors = Vec::new();
    let pick = |r: &mut ChaCha8Rng| FnId::new(TERM_FUNCTIONS[r.gen_range(0..TERM_FUNCTIONS.len())]);
    for x in 0..m {
        let y = r.gen_range(0..n);
        factors.push(Factor::new(pick(&mut r), x, y));
    }
    for y in 0..n {
        let x = r.gen_range(0..m);
        factors.push(Factor::new(pick(&mut r), x, y));
    }
    for _ in 0..r.gen_range(0..=2usize) {
        let (x, y) = (r.gen_range(0..m), r.gen_range(0..n));
        factors.push(Factor::new(pick(&mut r), x, y));
    }
    let br = |r: &mut ChaCha8Rng| if !averaging && r.gen_bool(0.5) { Bracket::Diff } else { Bracket::Avg };
    let xs = (0..m).map(|_| br(&mut r)).collect();
    let ys = (0..n).map(|_| br(&mut r)).collect();
    PPTerm::new(xs, ys, factors).expect("indices in range")
}

/// Grids for every name in [`TERM_FUNCTIONS`].
pub fn function_bundle(kind: GenKind, root: DyadicSquare, res: u32, seed: u64) -> Result<Bundle> {
    let mut b = Bundle::new();
    for (pos, name) in TERM_FUNCTIONS.iter().enumerate() {
        b.insert(FnId::new(*name), generate(kind, root, res, edge_seed(seed, pos))?)?;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let u = DyadicSquare::unit();
        assert_eq!(random_uniform(u, 3, 5).unwrap(), random_uniform(u, 3, 5).unwrap());
        assert_ne!(random_uniform(u, 3, 5).unwrap(), random_uniform(u, 3, 6).unwrap());
        assert_eq!(random_convex_tree(u, 3, 9), random_convex_tree(u, 3, 9));
    }

    #[test]
    fn spike_mass() {
        let g = spike(DyadicSquare::unit(), 4, 2).unwrap();
        assert!((g.integral() - 1.0 / 16.0).abs() < 1e-15);
        assert!(spike(DyadicSquare::unit(), 2, 3).is_err());
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("spike:3".parse::<GenKind>().unwrap(), GenKind::Spike(3));
        assert_eq!("spike(4)".parse::<GenKind>().unwrap(), GenKind::Spike(4));
        assert_eq!("tensor".parse::<GenKind>().unwrap(), GenKind::Tensor);
        assert!("gauss".parse::<GenKind>().is_err());
    }

    #[test]
    fn random_terms_use_every_variable() {
        for seed in 0..20 {
            let t = random_term(3, 2, true, seed);
            assert!(t.is_averaging());
            for x in 0..3 {
                assert!(t.factors().iter().any(|f| f.x == x));
            }
            for y in 0..2 {
                assert!(t.factors().iter().any(|f| f.y == y));
            }
        }
    }

    #[test]
    fn indicator_is_binary() {
        let g = dyadic_indicator(DyadicSquare::unit(), 3, 1).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0 || v == 1.0));
        assert!(g.integral() > 0.0);
    }
}
