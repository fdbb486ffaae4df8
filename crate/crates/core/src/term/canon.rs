//! Canonical labelling of terms by colour refinement with individualization.
//!
//! Vertices are the variables; factors are labelled edges. The canonical form
//! is the smallest encoding over all discrete colourings reachable from the
//! refined initial colouring, so it is a true isomorphism invariant.

use super::{Bracket, Factor, FnId, PPTerm};

struct Graph {
    m: usize,
    /// Per vertex: (function rank, neighbour vertex).
    adj: Vec<Vec<(u32, usize)>>,
    init: Vec<(u8, Bracket)>,
}

type Encoding = (Vec<Bracket>, Vec<Bracket>, Vec<Factor>);

pub(super) fn canonical(t: &PPTerm) -> PPTerm {
    let m = t.xs.len();
    let n = t.ys.len();
    let fns = t.functions();
    let rank = |f: &FnId| fns.binary_search(f).expect("function listed") as u32;
    let mut adj = vec![Vec::new(); m + n];
    for f in &t.factors {
        let r = rank(&f.func);
        adj[f.x].push((r, m + f.y));
        adj[m + f.y].push((r, f.x));
    }
    let init = t
        .xs
        .iter()
        .map(|b| (0u8, *b))
        .chain(t.ys.iter().map(|b| (1u8, *b)))
        .collect();
    let g = Graph { m, adj, init };
    let colors = rerank(&g.init);
    let mut best: Option<Encoding> = None;
    search(&g, t, colors, &mut best);
    let (xs, ys, factors) = best.unwrap_or_default();
    PPTerm { xs, ys, factors }
}

fn rerank<K: Ord + Clone>(keys: &[K]) -> Vec<u32> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).unwrap() as u32).collect()
}

fn distinct(c: &[u32]) -> usize {
    c.iter().copied().max().map_or(0, |x| x as usize + 1)
}

fn refine(g: &Graph, mut colors: Vec<u32>) -> Vec<u32> {
    loop {
        let before = distinct(&colors);
        let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..colors.len())
            .map(|v| {
                let mut s: Vec<(u32, u32)> = g.adj[v].iter().map(|&(r, u)| (r, colors[u])).collect();
                s.sort_unstable();
                (colors[v], s)
            })
            .collect();
        let next = rerank(&sigs);
        if distinct(&next) == before {
            return next;
        }
        colors = next;
    }
}

fn search(g: &Graph, t: &PPTerm, colors: Vec<u32>, best: &mut Option<Encoding>) {
    let colors = refine(g, colors);
    let count = distinct(&colors);
    if count == colors.len() {
        let enc = encode(g, t, &colors);
        if best.as_ref().map_or(true, |b| enc < *b) {
            *best = Some(enc);
        }
        return;
    }
    let mut sizes = vec![0usize; count];
    for &c in &colors {
        sizes[c as usize] += 1;
    }
    let target = sizes.iter().position(|&s| s > 1).expect("non-discrete colouring") as u32;
    for v in 0..colors.len() {
        if colors[v] != target {
            continue;
        }
        let keys: Vec<u32> = colors
            .iter()
            .enumerate()
            .map(|(u, &c)| 2 * c + u32::from(c == target && u != v))
            .collect();
        search(g, t, rerank(&keys), best);
    }
}

fn encode(g: &Graph, t: &PPTerm, colors: &[u32]) -> Encoding {
    // x vertices carry smaller colours than y vertices (axis is the leading key)
    let m = g.m;
    let xpos: Vec<usize> = colors[..m].iter().map(|&c| c as usize).collect();
    let ypos: Vec<usize> = colors[m..].iter().map(|&c| c as usize - m).collect();
    let mut xs = vec![Bracket::Avg; m];
    let mut ys = vec![Bracket::Avg; colors.len() - m];
    for (v, &p) in xpos.iter().enumerate() {
        xs[p] = t.xs[v];
    }
    for (v, &p) in ypos.iter().enumerate() {
        ys[p] = t.ys[v];
    }
    let mut factors: Vec<Factor> = t
        .factors
        .iter()
        .map(|f| Factor::new(f.func.clone(), xpos[f.x], ypos[f.y]))
        .collect();
    factors.sort();
    (xs, ys, factors)
}

#[cfg(test)]
mod tests {
    use super::super::{parse_term, Factor, FnId, PPTerm};
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renamings_collide() {
        let a = parse_term("F(x1,y1)*G(x1,y2)*H(x2,y1) | avg(x1,y2) dif(x2,y1)").unwrap();
        let b = parse_term("H(x1,y2)*F(x2,y2)*G(x2,y1) | avg(x2,y1) dif(x1,y2)").unwrap();
        assert_eq!(a.canonical(), b.canonical());
        assert_eq!(a.canonical().canonical(), a.canonical());
    }

    #[test]
    fn different_brackets_stay_apart() {
        let a = parse_term("F(x1,y1)*F(x2,y1) | avg(x1,y1) dif(x2)").unwrap();
        let b = parse_term("F(x1,y1)*F(x2,y1) | avg(x1,x2) dif(y1)").unwrap();
        assert_ne!(a.canonical(), b.canonical());
    }

    #[test]
    fn regular_graphs_need_individualization() {
        // C8 and two copies of C4 are both 2-regular: refinement alone cannot tell them apart
        let cycle = |pairs: &[(usize, usize)]| {
            PPTerm::new(
                vec![Bracket::Avg; 4],
                vec![Bracket::Avg; 4],
                pairs.iter().map(|&(x, y)| Factor::new(FnId::new("F"), x, y)).collect(),
            )
            .unwrap()
        };
        let c8 = cycle(&[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 3), (3, 3), (3, 0)]);
        let two_c4 = cycle(&[(0, 0), (0, 1), (1, 0), (1, 1), (2, 2), (2, 3), (3, 2), (3, 3)]);
        assert_ne!(c8.canonical(), two_c4.canonical());
        let c8b = cycle(&[(2, 1), (2, 3), (0, 3), (0, 0), (3, 0), (3, 2), (1, 2), (1, 1)]);
        assert_eq!(c8.canonical(), c8b.canonical());
    }

    fn arb_term() -> impl Strategy<Value = PPTerm> {
        (1usize..4, 1usize..4).prop_flat_map(|(m, n)| {
            (
                proptest::collection::vec(any::<bool>(), m),
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec((0..m, 0..n, 0u8..2), 1..6),
            )
                .prop_map(|(xs, ys, fs)| {
                    let br = |b: bool| if b { Bracket::Diff } else { Bracket::Avg };
                    PPTerm::new(
                        xs.into_iter().map(br).collect(),
                        ys.into_iter().map(br).collect(),
                        fs.into_iter()
                            .map(|(x, y, f)| Factor::new(FnId::new(if f == 0 { "F" } else { "G" }), x, y))
                            .collect(),
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn canonical_is_renaming_invariant(t in arb_term(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut px: Vec<usize> = (0..t.xs().len()).collect();
            let mut py: Vec<usize> = (0..t.ys().len()).collect();
            px.shuffle(&mut rng);
            py.shuffle(&mut rng);
            let mut xs = vec![Bracket::Avg; px.len()];
            let mut ys = vec![Bracket::Avg; py.len()];
            for (v, &p) in px.iter().enumerate() { xs[p] = t.xs()[v]; }
            for (v, &p) in py.iter().enumerate() { ys[p] = t.ys()[v]; }
            let mut fs: Vec<Factor> = t.factors().iter().map(|f| Factor::new(f.func.clone(), px[f.x], py[f.y])).collect();
            fs.shuffle(&mut rng);
            let u = PPTerm::new(xs, ys, fs).unwrap();
            prop_assert_eq!(t.canonical(), u.canonical());
        }
    }
}
