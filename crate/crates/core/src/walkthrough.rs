//! Worked example: the seven-by-six graph with three components, taken through
//! completion, the Cauchy-Schwarz split and the first rounds of reductions.
//!
//! Every inequality is checked at each square of a full tree `T` (depth
//! `res - 1`) after normalizing the data so that `max ⟨F^d⟩^{1/d} = 1` over
//! `T ∪ L(T)` for each edge.

use std::collections::BTreeMap;

use crate::dyadic::{ConvexTree, DyadicSquare};
use crate::error::Result;
use crate::estimates::Check;
use crate::gen::bundle_for;
use crate::graph::BipartiteSpec;
use crate::partition::{
    box_expansion, box_expansion_check, case1_check, case1_reduction, composition_term, composition_term_on, omega_q, term_of_partition,
    term_of_partition_on, Composition, SelectivePartition,
};
use crate::term::{box_difference, close, evaluate, parse_term, Axis, Bracket, Bundle, PPTerm};

const A4: &str = "avg[x1,x2](dif[y1](F1_1(x1,y1)*F2_1(x2,y1))^2 * avg[y3](F1_3(x1,y3)*F2_3(x2,y3)))";
const Y1: &str = "avg[x1,x2](avg[y2](F1_2(x1,y2)*F2_2(x2,y2))^2 * avg[y3](F1_3(x1,y3)*F2_3(x2,y3)))";
const A5: &str = "avg[x3,x4](dif[y4](F3_4(x3,y4)*F4_4(x4,y4))^2)";
const Y2: &str = "avg[x3,x4](avg[y5](F3_5(x3,y5)*F4_5(x4,y5))^2)";
const A1_SPLIT: &str = "avg[x1,x2](dif[y1](F1_1(x1,y1)*F2_1(x2,y1)) * avg[y2](F1_2(x1,y2)*F2_2(x2,y2)) * avg[y3](F1_3(x1,y3)*F2_3(x2,y3)))";
const A6: &str = "avg[x1,x2](dif[y1](F1_1(x1,y1)*F2_1(x2,y1)) * avg[y1'](F1_1(x1,y1')*F2_1(x2,y1')) * dif[y3](F1_3(x1,y3)*F2_3(x2,y3)))";
const A8: &str = "avg[x1,x2](dif[y1](F1_1(x1,y1)*F2_1(x2,y1))^2 * avg[y1'](F1_1(x1,y1')*F2_1(x2,y1')))";
const A9: &str = "avg[x1,x2](dif[y3](F1_3(x1,y3)*F2_3(x2,y3))^2 * avg[y1](F1_1(x1,y1)*F2_1(x2,y1)))";
const A10: &str = "avg[y1,y1',y3](dif[x1](F1_1(x1,y1)*F1_1(x1,y1')*F1_3(x1,y3))^2)";
const A13: &str = "avg[y1,y1',y1''](dif[x1](F1_1(x1,y1)*F1_1(x1,y1')*F1_1(x1,y1''))^2)";
const B4: [&str; 2] = [
    "avg[x1,x2](avg[y1](F1_1(x1,y1)*F2_1(x2,y1))^2 * avg[y3](F1_3(x1,y3)*F2_3(x2,y3)))",
    "avg[y1,y1',y3](avg[x1](F1_1(x1,y1)*F1_1(x1,y1')*F1_3(x1,y3)) * avg[x2](F2_1(x2,y1)*F2_1(x2,y1')*F2_3(x2,y3)))",
];
const B8: [&str; 2] = [
    "avg[x1,x2](avg[y1](F1_1(x1,y1)*F2_1(x2,y1))^3)",
    "avg[y1,y1',y1''](avg[x1](F1_1(x1,y1)*F1_1(x1,y1')*F1_1(x1,y1'')) * avg[x2](F2_1(x2,y1)*F2_1(x2,y1')*F2_1(x2,y1'')))",
];
const B10: [&str; 2] = [
    "avg[y1,y1',y3](avg[x1](F1_1(x1,y1)*F1_1(x1,y1')*F1_3(x1,y3))^2)",
    "avg[x1,x1'](avg[y1](F1_1(x1,y1)*F1_1(x1',y1))^2 * avg[y3](F1_3(x1,y3)*F1_3(x1',y3)))",
];
const B13: [&str; 2] = [
    "avg[y1,y1',y1''](avg[x1](F1_1(x1,y1)*F1_1(x1,y1')*F1_1(x1,y1''))^2)",
    "avg[x1,x1'](avg[y1](F1_1(x1,y1)*F1_1(x1',y1))^3)",
];

fn sp(s: &str) -> SelectivePartition {
    s.parse().expect("fixed partition")
}

fn comp(s: &str) -> Composition {
    s.parse().expect("fixed composition")
}

/// Data for the example: the completed graph, normalized random data, and the tree.
pub struct Example {
    pub spec: BipartiteSpec,
    pub completed: BipartiteSpec,
    pub original: Bundle,
    pub bundle: Bundle,
    pub tree: ConvexTree,
}

impl Example {
    pub fn new(res: u32, seed: u64) -> Result<Self> {
        let spec = BipartiteSpec::three_component_example();
        let info = spec.validate()?;
        let root = DyadicSquare::unit();
        let tree = ConvexTree::full(root, res.saturating_sub(1));
        let mut probe: Vec<DyadicSquare> = tree.members().iter().copied().collect();
        probe.extend(tree.leaves());
        let raw = bundle_for(&spec, root, res, seed)?;
        let original = raw.map_grids(|id, g| {
            let d = info
                .d
                .iter()
                .find(|(&(i, j), _)| BipartiteSpec::fn_id(i, j) == *id)
                .map(|(_, &d)| d as f64)
                .unwrap_or(1.0);
            let top = probe.iter().map(|q| g.power_avg(q, d)).fold(0.0, f64::max);
            if top > 0.0 {
                g.scaled(1.0 / top)
            } else {
                g.clone()
            }
        });
        let (completed, bundle) = spec.complete(&original)?;
        Ok(Self { spec, completed, original, bundle, tree })
    }

    /// Members of `T` followed by `L(T)`.
    pub fn tree_and_leaves(&self) -> Vec<DyadicSquare> {
        let mut v: Vec<DyadicSquare> = self.tree.members().iter().copied().collect();
        v.extend(self.tree.leaves());
        v
    }
}

/// Worst-case tracker for an inequality `lhs ≤ rhs` over many squares.
struct Tally {
    ok: bool,
    worst: f64,
    count: usize,
}

impl Tally {
    fn new() -> Self {
        Self { ok: true, worst: f64::NEG_INFINITY, count: 0 }
    }

    fn le(&mut self, lhs: f64, rhs: f64, allowance: f64) {
        self.ok &= lhs <= rhs + allowance;
        self.worst = self.worst.max(lhs - rhs);
        self.count += 1;
    }

    fn eq(&mut self, a: f64, b: f64) {
        self.ok &= close(a, b, 1e-10, 1e-300);
        self.worst = self.worst.max((a - b).abs());
        self.count += 1;
    }

    fn check(&self, name: &str) -> Check {
        Check::new(name, self.ok, format!("{} comparisons, worst excess {:.3e}", self.count, self.worst))
    }
}

fn same(display: &str, t: &PPTerm) -> bool {
    parse_term(display).map(|d| d.canonical() == t.canonical()).unwrap_or(false)
}

fn check_setup(ex: &Example) -> Result<Vec<Check>> {
    let info = ex.spec.validate()?;
    let want: Vec<(Vec<usize>, Vec<usize>)> = vec![
        (vec![1, 2], vec![1, 2, 3]),
        (vec![3, 4], vec![4, 5]),
        (vec![5], vec![6]),
    ];
    let mut want_d = BTreeMap::new();
    for e in [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2)] {
        want_d.insert(e, 3);
    }
    for e in [(3, 4), (4, 4), (4, 5)] {
        want_d.insert(e, 2);
    }
    want_d.insert((5, 6), 1);
    let completion = ex.spec.completion_edges()?;
    Ok(vec![
        Check::new(
            "components",
            info.components == want && info.isolated_x == [6, 7] && info.isolated_y.is_empty(),
            format!("{:?}", info.components),
        ),
        Check::new("exponents_d", info.d == want_d, format!("{:?}", info.d)),
        Check::new("completion_edges", completion == [(2, 3), (3, 5)], format!("{completion:?}")),
    ])
}

fn check_displays() -> Vec<Check> {
    let c1 = |s: &str| term_of_partition(&sp(s));
    let c2 = |s: &str| term_of_partition_on(&sp(s), &[3, 4], &[4, 5]);
    let b = |s: &str| composition_term(&comp(s));
    let a1 = composition_term(&comp("(1,1; 1,1,1)")).with_bracket(Axis::Y, 0, Bracket::Diff);
    let pairs: Vec<(&str, bool)> = vec![
        ("A1", same(A1_SPLIT, &a1)),
        ("A4", same(A4, &c1("(1,1; 2,0,1; 0,0; 2,0,0)"))),
        ("A5", same(A5, &c2("(1,1; 2,0; 0,0; 2,0)"))),
        ("A6", same(A6, &c1("(1,1; 2,0,1; 0,0; 1,0,1)"))),
        ("A8", same(A8, &c1("(1,1; 3,0,0; 0,0; 2,0,0)"))),
        ("A9", same(A9, &c1("(1,1; 1,0,2; 0,0; 0,0,2)"))),
        ("A10", same(A10, &c1("(2,0; 2,0,1; 2,0; 0,0,0)"))),
        ("A13", same(A13, &c1("(2,0; 3,0,0; 2,0; 0,0,0)"))),
        ("B4", B4.iter().all(|s| same(s, &b("(1,1; 2,0,1)")))),
        ("B8", B8.iter().all(|s| same(s, &b("(1,1; 3,0,0)")))),
        ("B10", B10.iter().all(|s| same(s, &b("(2,0; 2,0,1)")))),
        ("B13", B13.iter().all(|s| same(s, &b("(2,0; 3,0,0)")))),
    ];
    let bad: Vec<&str> = pairs.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    let reduces_to = |p: &SelectivePartition, axis: Axis, i1: usize, i2: usize, t: &str, b: &str| {
        case1_reduction(p, axis, i1, i2).map(|r| r.tilde == sp(t) && r.bar == sp(b)).unwrap_or(false)
    };
    let mut targets = reduces_to(
        &sp("(1,1; 2,0,1; 0,0; 1,0,1)"),
        Axis::Y,
        0,
        2,
        "(1,1; 3,0,0; 0,0; 2,0,0)",
        "(1,1; 1,0,2; 0,0; 0,0,2)",
    );
    for p in omega_q(&comp("(1,1; 2,0,1)")).iter().filter(|p| p.alpha == [1, 1]) {
        targets &= reduces_to(p, Axis::X, 0, 1, "(2,0; 2,0,1; 2,0; 0,0,0)", "(0,2; 2,0,1; 0,2; 0,0,0)");
    }
    for p in omega_q(&comp("(1,1; 3,0,0)")).iter().filter(|p| p.alpha == [1, 1]) {
        targets &= reduces_to(p, Axis::X, 0, 1, "(2,0; 3,0,0; 2,0; 0,0,0)", "(0,2; 3,0,0; 0,2; 0,0,0)");
    }
    vec![
        Check::new(
            "displays_match_partitions",
            bad.is_empty(),
            if bad.is_empty() { "all displayed terms match".to_string() } else { format!("mismatch: {bad:?}") },
        ),
        Check::new(
            "reductions_hit_displayed_terms",
            targets,
            "A6 -> (A8, A9), A7 -> (A10, A11), A12 -> (A13, mirror)",
        ),
    ]
}

/// Which terms appear in each box expansion, symbolically.
fn check_box_shapes() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let shapes: [(&str, &str, fn(&SelectivePartition) -> bool); 4] = [
        ("(1,1; 2,0,1)", "box_b4_terms", |p| {
            *p == sp("(1,1; 2,0,1; 0,0; 2,0,0)") || *p == sp("(1,1; 2,0,1; 0,0; 1,0,1)") || p.alpha == [1, 1]
        }),
        ("(1,1; 3,0,0)", "box_b8_terms", |p| *p == sp("(1,1; 3,0,0; 0,0; 2,0,0)") || p.alpha == [1, 1]),
        ("(2,0; 2,0,1)", "box_b10_terms", |p| {
            *p == sp("(2,0; 2,0,1; 2,0; 0,0,0)") || p.beta == [2, 0, 0] || p.beta == [1, 0, 1]
        }),
        ("(2,0; 3,0,0)", "box_b13_terms", |p| *p == sp("(2,0; 3,0,0; 2,0; 0,0,0)") || p.beta == [2, 0, 0]),
    ];
    for (q, name, shape) in shapes {
        let q = comp(q);
        let symbolic = box_difference(&composition_term(&q))? == box_expansion(&q);
        let omega = omega_q(&q);
        let all = omega.iter().all(shape);
        out.push(Check::new(
            name,
            symbolic && all,
            format!("{} partitions, expansion identity {symbolic}", omega.len()),
        ));
    }
    Ok(out)
}

fn numeric_checks(ex: &Example) -> Result<Vec<Check>> {
    let f = &ex.bundle;
    let parse = |s: &str| parse_term(s).expect("fixed display");
    let comps = ex.spec.component_terms();
    let full = ex.spec.term();
    let a1 = parse(A1_SPLIT);
    let a2 = composition_term_on(&comp("(1,1; 1,1)"), &[3, 4], &[4, 5]).with_bracket(Axis::Y, 0, Bracket::Diff);
    let a3 = parse("avg[x5,y6](F5_6(x5,y6))");
    let (a4, y1, a5, y2) = (parse(A4), parse(Y1), parse(A5), parse(Y2));

    let mut factor = Tally::new();
    let mut completion = Tally::new();
    let mut a3_bound = Tally::new();
    let mut split = Tally::new();
    let mut cs1 = Tally::new();
    let mut cs2 = Tally::new();
    let mut y_bound = Tally::new();
    let mut a5_pos = Tally::new();
    for q in ex.tree.members() {
        let a = evaluate(&full, q, &ex.original)?;
        let prod: f64 = comps.iter().map(|t| evaluate(t, q, &ex.original)).product::<Result<f64>>()?;
        factor.eq(a, prod);
        let a1v = evaluate(&a1, q, f)?;
        let a2v = evaluate(&a2, q, f)?;
        let a3v = evaluate(&a3, q, f)?;
        completion.eq(evaluate(&full, q, &ex.original)?, a1v * a2v * a3v);
        a3_bound.le(a3v.abs(), 1.0, 1e-12);
        split.le(a.abs(), 0.5 * a1v * a1v + 0.5 * a2v * a2v, 1e-12);
        let (a4v, y1v, a5v, y2v) = (evaluate(&a4, q, f)?, evaluate(&y1, q, f)?, evaluate(&a5, q, f)?, evaluate(&y2, q, f)?);
        cs1.le(a1v * a1v, a4v * y1v, 1e-12);
        cs2.le(a2v * a2v, a5v * y2v, 1e-12);
        y_bound.le(y1v, 1.0, 1e-12);
        y_bound.le(y2v, 1.0, 1e-12);
        a5_pos.le(0.0, a5v, 1e-15);
    }
    let mut out = vec![
        factor.check("component_factorization"),
        completion.check("completion_preserves_form"),
        a3_bound.check("third_component_bounded"),
        split.check("am_gm_split"),
        cs1.check("cauchy_schwarz_first_component"),
        cs2.check("cauchy_schwarz_second_component"),
        y_bound.check("discarded_factors_bounded"),
        a5_pos.check("second_component_square_nonnegative"),
    ];

    let mut boxes = Tally::new();
    for q in ["(1,1; 2,0,1)", "(1,1; 3,0,0)", "(2,0; 2,0,1)", "(2,0; 3,0,0)"] {
        let q = comp(q);
        for sq in ex.tree.members() {
            let (l, r) = box_expansion_check(&q, sq, f)?;
            boxes.eq(l, r);
        }
    }
    out.push(boxes.check("box_expansions_numeric"));

    let mut c6 = Tally::new();
    let mut c7 = Tally::new();
    let mut c12 = Tally::new();
    let mut c10 = Tally::new();
    let a6 = sp("(1,1; 2,0,1; 0,0; 1,0,1)");
    let a7s: Vec<SelectivePartition> = omega_q(&comp("(1,1; 2,0,1)")).into_iter().filter(|p| p.alpha == [1, 1]).collect();
    let a12s: Vec<SelectivePartition> = omega_q(&comp("(1,1; 3,0,0)")).into_iter().filter(|p| p.alpha == [1, 1]).collect();
    let latter: Vec<SelectivePartition> =
        omega_q(&comp("(2,0; 2,0,1)")).into_iter().filter(|p| p.beta == [1, 0, 1]).collect();
    for sq in ex.tree.members() {
        for delta in [0.25, 0.5] {
            let r = case1_check(&a6, Axis::Y, 0, 2, delta, sq, f)?;
            c6.le(r.lhs, r.rhs, r.allowance);
        }
        for p in &a7s {
            let r = case1_check(p, Axis::X, 0, 1, 1.0, sq, f)?;
            c7.le(r.lhs, r.rhs, r.allowance);
        }
        for p in &a12s {
            let r = case1_check(p, Axis::X, 0, 1, 1.0, sq, f)?;
            c12.le(r.lhs, r.rhs, r.allowance);
        }
        for p in &latter {
            let r = case1_check(p, Axis::Y, 0, 2, 1.0, sq, f)?;
            c10.le(r.lhs, r.rhs, r.allowance);
        }
    }
    out.push(c6.check("reduce_a6"));
    out.push(c7.check("reduce_a7"));
    out.push(c12.check("reduce_a12"));
    out.push(c10.check("reduce_b10_mixed_terms"));

    let mut nn13 = Tally::new();
    let mut nn10 = Tally::new();
    let rest13: Vec<SelectivePartition> =
        omega_q(&comp("(2,0; 3,0,0)")).into_iter().filter(|p| p.beta == [2, 0, 0]).collect();
    let former10: Vec<SelectivePartition> =
        omega_q(&comp("(2,0; 2,0,1)")).into_iter().filter(|p| p.beta == [2, 0, 0]).collect();
    for sq in ex.tree.members() {
        for (set, tally) in [(&rest13, &mut nn13), (&former10, &mut nn10)] {
            let mut s = 0.0;
            let mut scale = 0.0;
            for p in set.iter() {
                let v = p.multiplicity() as f64 * evaluate(&term_of_partition(p), sq, f)?;
                s += v;
                scale += v.abs();
            }
            tally.le(0.0, s, 1e-12 * scale + 1e-15);
        }
    }
    out.push(nn13.check("b13_remaining_terms_nonnegative"));
    out.push(nn10.check("b10_square_terms_nonnegative"));

    let mut bounded = Tally::new();
    for q in ["(1,1; 2,0,1)", "(1,1; 3,0,0)", "(2,0; 2,0,1)", "(2,0; 3,0,0)"] {
        let t = composition_term(&comp(q));
        for sq in ex.tree_and_leaves() {
            let v = evaluate(&t, &sq, f)?;
            bounded.le(v, 1.0, 1e-12);
            bounded.le(0.0, v, 1e-15);
        }
    }
    out.push(bounded.check("bellman_terms_in_unit_range"));
    Ok(out)
}

/// All checks for the worked example.
pub fn run(res: u32, seed: u64) -> Result<Vec<Check>> {
    let ex = Example::new(res, seed)?;
    let mut out = check_setup(&ex)?;
    out.extend(check_displays());
    out.extend(check_box_shapes()?);
    out.extend(numeric_checks(&ex)?);
    Ok(out)
}
