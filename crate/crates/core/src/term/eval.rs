//! Numeric evaluation of terms on gridded functions.
//!
//! The term factorizes over connected components of its variable graph.
//! Inside a component the axis with fewer variables is enumerated cell by
//! cell; for each such assignment every variable of the other axis is an
//! independent one-dimensional bracket of the product of its factors.

use crate::dyadic::{axis_layout, DyadicInterval, DyadicSquare, LayoutCell};
use crate::error::Result;

use super::{Bracket, Bundle, PPTerm};

pub fn evaluate(t: &PPTerm, q: &DyadicSquare, fns: &Bundle) -> Result<f64> {
    evaluate_rect(t, q.ix, q.iy, fns)
}

/// Value of `t` with x variables ranging over `ix` and y variables over `iy`.
pub fn evaluate_rect(t: &PPTerm, ix: DyadicInterval, iy: DyadicInterval, fns: &Bundle) -> Result<f64> {
    let grids = t
        .factors
        .iter()
        .map(|f| fns.get(&f.func))
        .collect::<Result<Vec<_>>>()?;
    let (m, n) = (t.xs.len(), t.ys.len());
    let mut used_x = vec![false; m];
    let mut used_y = vec![false; n];
    for f in &t.factors {
        used_x[f.x] = true;
        used_y[f.y] = true;
    }
    // an unused variable integrates the constant 1
    let unused_diff = (0..m).any(|i| !used_x[i] && t.xs[i] == Bracket::Diff)
        || (0..n).any(|j| !used_y[j] && t.ys[j] == Bracket::Diff);
    let Some(g0) = grids.first() else {
        return Ok(if unused_diff { 0.0 } else { 1.0 });
    };
    let root = g0.root();
    let res = g0.resolution();
    let lx = axis_layout(root.ix, res, ix)?;
    let ly = axis_layout(root.iy, res, iy)?;
    if unused_diff || lx.is_empty() || ly.is_empty() {
        return Ok(0.0);
    }
    let wx = weights(&lx);
    let wy = weights(&ly);

    let mut total = 1.0;
    for (cx, cy) in t.components() {
        if cx.is_empty() || cy.is_empty() {
            continue;
        }
        let v = if cy.len() <= cx.len() {
            component_value(t, &grids, &cx, &cy, &lx, &ly, &wx, &wy, false)
        } else {
            component_value(t, &grids, &cy, &cx, &ly, &lx, &wy, &wx, true)
        };
        total *= v;
        if total == 0.0 {
            break;
        }
    }
    Ok(total)
}

/// Per-cell weights for the two bracket kinds.
struct Weights {
    avg: Vec<f64>,
    diff: Vec<f64>,
}

impl Weights {
    fn of(&self, b: Bracket) -> &[f64] {
        match b {
            Bracket::Avg => &self.avg,
            Bracket::Diff => &self.diff,
        }
    }
}

fn weights(layout: &[LayoutCell]) -> Weights {
    Weights {
        avg: layout.iter().map(|c| c.weight).collect(),
        diff: layout.iter().map(|c| c.weight * c.sign).collect(),
    }
}

/// `inner` variables are summed independently for each assignment of the
/// `outer` ones. With `transposed`, inner variables are y variables.
#[allow(clippy::too_many_arguments)]
fn component_value(
    t: &PPTerm,
    grids: &[&crate::dyadic::Grid2D],
    inner: &[usize],
    outer: &[usize],
    l_in: &[LayoutCell],
    l_out: &[LayoutCell],
    w_in: &Weights,
    w_out: &Weights,
    transposed: bool,
) -> f64 {
    let (in_br, out_br) = if transposed { (&t.ys, &t.xs) } else { (&t.xs, &t.ys) };
    let mut outer_slot = vec![usize::MAX; out_br.len()];
    for (k, &v) in outer.iter().enumerate() {
        outer_slot[v] = k;
    }
    // dense local tables, one per factor: table[a * |l_out| + b]
    let c_in = l_in.len();
    let c_out = l_out.len();
    struct Local {
        outer: usize,
        table: Vec<f64>,
    }
    let mut per_inner: Vec<Vec<Local>> = Vec::with_capacity(inner.len());
    for &v in inner {
        let mut locals = Vec::new();
        for (fi, f) in t.factors.iter().enumerate() {
            let (vi, vo) = if transposed { (f.y, f.x) } else { (f.x, f.y) };
            if vi != v {
                continue;
            }
            let g = grids[fi];
            let mut table = Vec::with_capacity(c_in * c_out);
            for a in l_in {
                for b in l_out {
                    table.push(if transposed { g.value(b.cell, a.cell) } else { g.value(a.cell, b.cell) });
                }
            }
            locals.push(Local {
                outer: outer_slot[vo],
                table,
            });
        }
        per_inner.push(locals);
    }
    let w_inner: Vec<&[f64]> = inner.iter().map(|&v| w_in.of(in_br[v])).collect();
    let w_outer: Vec<&[f64]> = outer.iter().map(|&v| w_out.of(out_br[v])).collect();

    let k = outer.len();
    let mut assign = vec![0usize; k];
    let mut sum = 0.0;
    'outer: loop {
        let mut w = 1.0;
        for (s, &b) in assign.iter().enumerate() {
            w *= w_outer[s][b];
        }
        if w != 0.0 {
            let mut prod = w;
            for (vi, locals) in per_inner.iter().enumerate() {
                let wi = w_inner[vi];
                let mut s = 0.0;
                for a in 0..c_in {
                    if wi[a] == 0.0 {
                        continue;
                    }
                    let mut p = wi[a];
                    for l in locals {
                        p *= l.table[a * c_out + assign[l.outer]];
                    }
                    s += p;
                }
                prod *= s;
                if prod == 0.0 {
                    break;
                }
            }
            sum += prod;
        }
        // odometer
        for s in 0..k {
            assign[s] += 1;
            if assign[s] < c_out {
                continue 'outer;
            }
            assign[s] = 0;
        }
        break;
    }
    sum
}
