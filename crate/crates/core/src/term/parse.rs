//! Text input for terms and expressions.
//!
//! Two term syntaxes are accepted:
//!
//! * flat: `F(x1,y1)*F(x2,y1) | avg(x1,y1) dif(x2)`
//! * nested: `avg[y](avg[x](F(x,y))^3)`, where every bracket binds its
//!   variables and a power repeats its base with fresh copies of the
//!   variables bound inside it.
//!
//! An expression is a `+`/`-` separated list of terms, each optionally
//! preceded by a rational coefficient and `*`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::{Axis, Bracket, Factor, FnId, PPExpression, PPTerm};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(u64),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_' || cs[i] == '\'') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let txt: String = cs[st..i].iter().collect();
            out.push(Tok::Num(txt.parse().map_err(|_| Error::Parse(format!("bad number {txt}")))?));
        } else if "()[],*^|+-/·".contains(c) {
            out.push(Tok::Sym(if c == '·' { '*' } else { c }));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {c:?} at token {}, found {:?}", self.pos, self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            t => Err(Error::Parse(format!("expected a name, found {t:?}"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn axis_of(name: &str) -> Result<Axis> {
    match name.chars().next() {
        Some('x') => Ok(Axis::X),
        Some('y') => Ok(Axis::Y),
        _ => Err(Error::Parse(format!("variable {name} must start with x or y"))),
    }
}

fn bracket_kind(name: &str) -> Option<Bracket> {
    match name {
        "avg" => Some(Bracket::Avg),
        "dif" => Some(Bracket::Diff),
        _ => None,
    }
}

/// Parse one term in either syntax.
pub fn parse_term(s: &str) -> Result<PPTerm> {
    let mut p = Parser { toks: lex(s)?, pos: 0 };
    let t = term(&mut p)?;
    if !p.at_end() {
        return Err(Error::Parse(format!("trailing input after term: {:?}", p.peek())));
    }
    Ok(t)
}

/// Parse a linear combination such as `3*avg[y](...) + 1/2*F(x1,y1) | avg(x1,y1)`.
pub fn parse_expression(s: &str) -> Result<PPExpression> {
    let mut p = Parser { toks: lex(s)?, pos: 0 };
    let mut out = Vec::new();
    let mut sign = BigRational::one();
    if p.eat('-') {
        sign = -sign;
    }
    loop {
        let mut coef = sign.clone();
        if let Some(Tok::Num(a)) = p.peek().cloned() {
            let is_coef = matches!(p.peek_at(1), Some(Tok::Sym('*')) | Some(Tok::Sym('/')));
            if is_coef {
                p.next();
                let mut c = BigRational::from_integer(BigInt::from(a));
                if p.eat('/') {
                    match p.next() {
                        Some(Tok::Num(d)) if d != 0 => c /= BigRational::from_integer(BigInt::from(d)),
                        t => return Err(Error::Parse(format!("bad denominator {t:?}"))),
                    }
                }
                p.expect('*')?;
                coef *= c;
            }
        }
        out.push((coef, term(&mut p)?));
        if p.eat('+') {
            sign = BigRational::one();
        } else if p.eat('-') {
            sign = -BigRational::one();
        } else {
            break;
        }
    }
    if !p.at_end() {
        return Err(Error::Parse(format!("trailing input after expression: {:?}", p.peek())));
    }
    Ok(PPExpression::from_terms(out))
}

fn term(p: &mut Parser) -> Result<PPTerm> {
    let nested = matches!(
        (p.peek(), p.peek_at(1)),
        (Some(Tok::Ident(b)), Some(Tok::Sym('['))) if bracket_kind(b).is_some()
    );
    if nested {
        nested_term(p)
    } else {
        flat_term(p)
    }
}

// ---- flat syntax ----

fn flat_term(p: &mut Parser) -> Result<PPTerm> {
    let mut raw: Vec<(String, String, String)> = Vec::new();
    if matches!(p.peek(), Some(Tok::Num(1))) {
        p.next();
    } else {
        loop {
            let f = p.ident()?;
            p.expect('(')?;
            let a = p.ident()?;
            p.expect(',')?;
            let b = p.ident()?;
            p.expect(')')?;
            raw.push((f, a, b));
            if !p.eat('*') {
                break;
            }
        }
    }
    let mut declared: Vec<(String, Bracket)> = Vec::new();
    if p.eat('|') {
        while let Some(Tok::Ident(k)) = p.peek().cloned() {
            let Some(kind) = bracket_kind(&k) else { break };
            if p.peek_at(1) != Some(&Tok::Sym('(')) {
                break;
            }
            p.next();
            p.expect('(')?;
            loop {
                let v = p.ident()?;
                if declared.iter().any(|(d, _)| *d == v) {
                    return Err(Error::Parse(format!("variable {v} has two brackets")));
                }
                declared.push((v, kind));
                if !p.eat(',') {
                    break;
                }
            }
            p.expect(')')?;
        }
    }
    let order = |axis: Axis| -> Result<Vec<(String, Bracket)>> {
        let mut vs = Vec::new();
        for (v, b) in &declared {
            if axis_of(v)? == axis {
                vs.push((v.clone(), *b));
            }
        }
        let nums: Option<Vec<usize>> = vs.iter().map(|(v, _)| v[1..].parse::<usize>().ok()).collect();
        if let Some(nums) = nums {
            let mut sorted = nums.clone();
            sorted.sort_unstable();
            if sorted.iter().enumerate().all(|(k, &n)| n == k + 1) {
                let mut paired: Vec<_> = nums.into_iter().zip(vs).collect();
                paired.sort_by_key(|(n, _)| *n);
                return Ok(paired.into_iter().map(|(_, v)| v).collect());
            }
        }
        Ok(vs)
    };
    let xs = order(Axis::X)?;
    let ys = order(Axis::Y)?;
    let find = |vs: &[(String, Bracket)], name: &str| -> Result<usize> {
        vs.iter()
            .position(|(v, _)| v == name)
            .ok_or_else(|| Error::Parse(format!("variable {name} has no bracket")))
    };
    let mut factors = Vec::new();
    for (f, a, b) in raw {
        if axis_of(&a)? != Axis::X || axis_of(&b)? != Axis::Y {
            return Err(Error::Parse(format!("{f}({a},{b}) must take an x then a y variable")));
        }
        factors.push(Factor::new(FnId(f), find(&xs, &a)?, find(&ys, &b)?));
    }
    PPTerm::new(
        xs.into_iter().map(|(_, b)| b).collect(),
        ys.into_iter().map(|(_, b)| b).collect(),
        factors,
    )
}

// ---- nested syntax ----

#[derive(Clone, Debug)]
enum Node {
    One,
    Factor(String, String, String),
    Bracket(Bracket, Vec<String>, Box<Node>),
    Product(Vec<Node>),
    Power(Box<Node>, u64),
}

fn nested_term(p: &mut Parser) -> Result<PPTerm> {
    let node = product(p)?;
    let mut b = Builder::default();
    b.emit(&node, &BTreeMap::new())?;
    PPTerm::new(b.xs, b.ys, b.factors)
}

fn product(p: &mut Parser) -> Result<Node> {
    let mut items = vec![power(p)?];
    while p.eat('*') {
        items.push(power(p)?);
    }
    Ok(if items.len() == 1 { items.pop().unwrap() } else { Node::Product(items) })
}

fn power(p: &mut Parser) -> Result<Node> {
    let base = atom(p)?;
    if p.eat('^') {
        match p.next() {
            Some(Tok::Num(k)) if k >= 1 => Ok(Node::Power(Box::new(base), k)),
            t => Err(Error::Parse(format!("bad exponent {t:?}"))),
        }
    } else {
        Ok(base)
    }
}

fn atom(p: &mut Parser) -> Result<Node> {
    if p.eat('(') {
        let n = product(p)?;
        p.expect(')')?;
        return Ok(n);
    }
    if matches!(p.peek(), Some(Tok::Num(1))) {
        p.next();
        return Ok(Node::One);
    }
    let name = p.ident()?;
    if let Some(kind) = bracket_kind(&name) {
        if p.eat('[') {
            let mut vars = vec![p.ident()?];
            while p.eat(',') {
                vars.push(p.ident()?);
            }
            p.expect(']')?;
            p.expect('(')?;
            let body = product(p)?;
            p.expect(')')?;
            return Ok(Node::Bracket(kind, vars, Box::new(body)));
        }
    }
    p.expect('(')?;
    let a = p.ident()?;
    p.expect(',')?;
    let b = p.ident()?;
    p.expect(')')?;
    Ok(Node::Factor(name, a, b))
}

#[derive(Default)]
struct Builder {
    xs: Vec<Bracket>,
    ys: Vec<Bracket>,
    factors: Vec<Factor>,
}

impl Builder {
    fn emit(&mut self, node: &Node, env: &BTreeMap<String, (Axis, usize)>) -> Result<()> {
        match node {
            Node::One => Ok(()),
            Node::Factor(f, a, b) => {
                let lookup = |v: &str, axis: Axis| -> Result<usize> {
                    match env.get(v) {
                        Some((ax, k)) if *ax == axis => Ok(*k),
                        Some(_) => Err(Error::Parse(format!("{f}({a},{b}) must take an x then a y variable"))),
                        None => Err(Error::Parse(format!("variable {v} is not bound by any bracket"))),
                    }
                };
                let x = lookup(a, Axis::X)?;
                let y = lookup(b, Axis::Y)?;
                self.factors.push(Factor::new(FnId(f.clone()), x, y));
                Ok(())
            }
            Node::Bracket(kind, vars, body) => {
                let mut inner = env.clone();
                for v in vars {
                    let axis = axis_of(v)?;
                    let k = match axis {
                        Axis::X => {
                            self.xs.push(*kind);
                            self.xs.len() - 1
                        }
                        Axis::Y => {
                            self.ys.push(*kind);
                            self.ys.len() - 1
                        }
                    };
                    inner.insert(v.clone(), (axis, k));
                }
                self.emit(body, &inner)
            }
            Node::Product(items) => items.iter().try_for_each(|n| self.emit(n, env)),
            Node::Power(base, k) => (0..*k).try_for_each(|_| self.emit(base, env)),
        }
    }
}
