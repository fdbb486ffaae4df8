//! Bracket-notation rendering, e.g. `3·⟨⟨F⟩_x[F]_x²⟩_y`.
//!
//! Each connected component is drawn with one bracket per variable of an
//! outer axis around a product of single-variable pieces on the other axis.
//! Identical pieces and identical components collapse into powers.

use std::collections::BTreeMap;

use num_traits::One;

use super::{Axis, Bracket, PPExpression, PPTerm};

const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

fn sup(k: usize) -> String {
    if k == 1 {
        return String::new();
    }
    k.to_string().chars().map(|c| SUP[c.to_digit(10).unwrap() as usize]).collect()
}

fn wrap(b: Bracket, body: &str, sub: &str) -> String {
    match b {
        Bracket::Avg => format!("⟨{body}⟩_{sub}"),
        Bracket::Diff => format!("[{body}]_{sub}"),
    }
}

fn subscript(names: &[String]) -> String {
    if names.len() == 1 {
        names[0].clone()
    } else {
        format!("{{{}}}", names.join(","))
    }
}

fn primed(base: char, k: usize) -> String {
    format!("{base}{}", "'".repeat(k))
}

fn collapse(mut pieces: Vec<(Bracket, String)>) -> String {
    pieces.sort();
    let mut out = String::new();
    let mut i = 0;
    while i < pieces.len() {
        let mut j = i;
        while j < pieces.len() && pieces[j] == pieces[i] {
            j += 1;
        }
        out.push_str(&pieces[i].1);
        out.push_str(&sup(j - i));
        i = j;
    }
    out
}

/// Render one component with the given outer axis; returns the text and the
/// number of distinct inner pieces.
fn render_component(t: &PPTerm, xs: &[usize], ys: &[usize], outer_axis: Axis) -> (String, usize) {
    let (outer, inner) = match outer_axis {
        Axis::X => (xs, ys),
        Axis::Y => (ys, xs),
    };
    let (ob, ib, oc, ic) = match outer_axis {
        Axis::X => (t.xs(), t.ys(), 'x', 'y'),
        Axis::Y => (t.ys(), t.xs(), 'y', 'x'),
    };
    let inner_name = ic.to_string();
    let outer_names: BTreeMap<usize, String> = outer.iter().enumerate().map(|(k, &v)| (v, primed(oc, k))).collect();
    let show_args = outer.len() > 1;

    if outer.len() == 1 && inner.len() == 1 && ob[outer[0]] == ib[inner[0]] {
        let mut fs: Vec<String> = t
            .factors()
            .iter()
            .filter(|f| f.x == xs[0])
            .map(|f| f.func.to_string())
            .collect();
        fs.sort();
        return (wrap(ob[outer[0]], &fs.concat(), "{x,y}"), 1);
    }

    let mut pieces = Vec::new();
    for &v in inner {
        let mut fs: Vec<(String, String)> = t
            .factors()
            .iter()
            .filter_map(|f| {
                let (vi, vo) = match outer_axis {
                    Axis::X => (f.y, f.x),
                    Axis::Y => (f.x, f.y),
                };
                (vi == v).then(|| (f.func.to_string(), outer_names[&vo].clone()))
            })
            .collect();
        fs.sort();
        let body: String = fs
            .iter()
            .map(|(f, o)| {
                if !show_args {
                    f.clone()
                } else if outer_axis == Axis::X {
                    format!("{f}({o},{inner_name})")
                } else {
                    format!("{f}({inner_name},{o})")
                }
            })
            .collect();
        pieces.push((ib[v], wrap(ib[v], &body, &inner_name)));
    }
    let distinct = {
        let mut p = pieces.clone();
        p.sort();
        p.dedup();
        p.len()
    };
    let mut body = collapse(pieces);
    // outer brackets: differences innermost
    for kind in [Bracket::Diff, Bracket::Avg] {
        let names: Vec<String> = outer
            .iter()
            .filter(|&&v| ob[v] == kind)
            .map(|v| outer_names[v].clone())
            .collect();
        if !names.is_empty() {
            body = wrap(kind, &body, &subscript(&names));
        }
    }
    (body, distinct)
}

pub(super) fn pretty_term(t: &PPTerm) -> String {
    let mut comps = Vec::new();
    for (xs, ys) in t.components() {
        let s = match (xs.is_empty(), ys.is_empty()) {
            (false, true) => wrap(t.xs()[xs[0]], "1", "x"),
            (true, false) => wrap(t.ys()[ys[0]], "1", "y"),
            _ => {
                let (sy, dy) = render_component(t, &xs, &ys, Axis::Y);
                let (sx, dx) = render_component(t, &xs, &ys, Axis::X);
                let y_first = (ys.len(), dy) <= (xs.len(), dx);
                if y_first {
                    sy
                } else {
                    sx
                }
            }
        };
        comps.push((Bracket::Avg, s));
    }
    if comps.is_empty() {
        return "1".into();
    }
    collapse(comps)
}

pub(super) fn pretty_expression(e: &PPExpression) -> String {
    if e.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = e
        .terms()
        .iter()
        .map(|(c, t)| {
            if c.is_one() {
                pretty_term(t)
            } else {
                format!("{c}·{}", pretty_term(t))
            }
        })
        .collect();
    parts.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::super::parse_term;

    #[test]
    fn table_shapes() {
        let t = parse_term("F(x1,y1)*F(x2,y1)*F(x3,y1) | avg(x1,y1) dif(x2,x3)").unwrap();
        assert_eq!(t.pretty(), "⟨⟨F⟩_x[F]_x²⟩_y");
        let t = parse_term("F(x1,y1)*F(x2,y2) | avg(y1,y2) dif(x1,x2)").unwrap();
        assert_eq!(t.pretty(), "⟨[F]_x⟩_y²");
        let t = parse_term("F(x1,y1)*F(x2,y2) | dif(x1,x2,y1,y2)").unwrap();
        assert_eq!(t.pretty(), "[F]_{x,y}²");
        let t = parse_term("F(x1,y1)*G(x2,y1)*F(x1,y2)*G(x2,y2) | avg(x1,x2) dif(y1,y2)").unwrap();
        assert_eq!(t.pretty(), "⟨[F(x,y)G(x',y)]_y²⟩_{x,x'}");
    }
}
