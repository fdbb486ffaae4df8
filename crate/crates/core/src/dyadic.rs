//! Dyadic geometry and piecewise-constant functions on dyadic grids.
//!
//! A [`Grid2D`] is a nonnegative function that is constant on the cells of a
//! `2^N x 2^N` subdivision of its root square and vanishes outside it. All
//! averages are exact finite sums over cells, so the dyadic identities hold
//! up to floating rounding only.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

/// The dyadic interval `[2^scale * index, 2^scale * (index + 1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub scale: i32,
    pub index: i64,
}

impl DyadicInterval {
    pub fn new(scale: i32, index: i64) -> Self {
        Self { scale, index }
    }

    pub fn len(&self) -> f64 {
        pow2(self.scale)
    }

    pub fn start(&self) -> f64 {
        self.index as f64 * self.len()
    }

    pub fn left(&self) -> Self {
        Self::new(self.scale - 1, 2 * self.index)
    }

    pub fn right(&self) -> Self {
        Self::new(self.scale - 1, 2 * self.index + 1)
    }

    pub fn parent(&self) -> Self {
        // `>>` on i64 is a floor division, which is what negative indices need.
        Self::new(self.scale + 1, self.index >> 1)
    }

    /// Whether `other` is contained in `self` (non-strictly).
    pub fn contains(&self, other: &DyadicInterval) -> bool {
        if other.scale > self.scale {
            return false;
        }
        let shift = (self.scale - other.scale) as u32;
        if shift >= 63 {
            return other.index.signum() == self.index.signum() && self.index == (other.index >> 62 >> 1);
        }
        (other.index >> shift) == self.index
    }

    pub fn dilate(&self, l: i32) -> Self {
        Self::new(self.scale + l, self.index)
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start(), self.start() + self.len())
    }
}

/// A dyadic square `ix x iy`; both sides share one scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicSquare {
    pub ix: DyadicInterval,
    pub iy: DyadicInterval,
}

impl DyadicSquare {
    pub fn new(scale: i32, lx: i64, ly: i64) -> Self {
        Self {
            ix: DyadicInterval::new(scale, lx),
            iy: DyadicInterval::new(scale, ly),
        }
    }

    /// The square `[0,1)^2`.
    pub fn unit() -> Self {
        Self::new(0, 0, 0)
    }

    pub fn scale(&self) -> i32 {
        self.ix.scale
    }

    pub fn side(&self) -> f64 {
        self.ix.len()
    }

    pub fn area(&self) -> f64 {
        pow2(2 * self.scale())
    }

    /// The four children, ordered (left,left), (right,left), (left,right), (right,right)
    /// where the first entry refers to the x side.
    pub fn children(&self) -> [DyadicSquare; 4] {
        let (xl, xr) = (self.ix.left(), self.ix.right());
        let (yl, yr) = (self.iy.left(), self.iy.right());
        [
            DyadicSquare { ix: xl, iy: yl },
            DyadicSquare { ix: xr, iy: yl },
            DyadicSquare { ix: xl, iy: yr },
            DyadicSquare { ix: xr, iy: yr },
        ]
    }

    pub fn parent(&self) -> Self {
        Self {
            ix: self.ix.parent(),
            iy: self.iy.parent(),
        }
    }

    pub fn contains(&self, other: &DyadicSquare) -> bool {
        self.ix.contains(&other.ix) && self.iy.contains(&other.iy)
    }

    pub fn is_disjoint(&self, other: &DyadicSquare) -> bool {
        !self.contains(other) && !other.contains(self)
    }

    pub fn dilate(&self, l: i32) -> Self {
        Self {
            ix: self.ix.dilate(l),
            iy: self.iy.dilate(l),
        }
    }

    /// All dyadic sub-squares exactly `depth` levels below `self`.
    pub fn descendants_at(&self, depth: u32) -> Vec<DyadicSquare> {
        let k = 1i64 << depth;
        let scale = self.scale() - depth as i32;
        let mut out = Vec::with_capacity((k * k) as usize);
        for ly in 0..k {
            for lx in 0..k {
                out.push(DyadicSquare::new(scale, self.ix.index * k + lx, self.iy.index * k + ly));
            }
        }
        out
    }
}

impl fmt::Display for DyadicSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.ix, self.iy)
    }
}

/// One cell of an axis layout: grid cell index, its weight `|cell ∩ I| / |I|`
/// and its signed position (+1 inside the left half of `I`, -1 inside the right
/// half, 0 when the cell covers both halves).
#[derive(Clone, Copy, Debug)]
pub(crate) struct LayoutCell {
    pub cell: usize,
    pub weight: f64,
    pub sign: f64,
}

/// How a dyadic interval `I` sees the cells of a grid axis.
///
/// Cells outside the grid root are dropped since every function vanishes there.
pub(crate) fn axis_layout(root: DyadicInterval, resolution: u32, interval: DyadicInterval) -> Result<Vec<LayoutCell>> {
    let cell_scale = root.scale - resolution as i32;
    if interval.scale < cell_scale {
        return Err(Error::TooFine {
            scale: interval.scale,
            cell_scale,
        });
    }
    if root.contains(&interval) {
        let c = 1usize << (interval.scale - cell_scale);
        let offset = (interval.index - (root.index << (root.scale - interval.scale))) as usize;
        let start = offset * c;
        let weight = 1.0 / c as f64;
        let half = c / 2;
        Ok((0..c)
            .map(|t| LayoutCell {
                cell: start + t,
                weight,
                sign: if c == 1 {
                    0.0
                } else if t < half {
                    1.0
                } else {
                    -1.0
                },
            })
            .collect())
    } else if interval.contains(&root) {
        let n = 1usize << resolution;
        let weight = pow2(cell_scale - interval.scale);
        let sign = if interval.left().contains(&root) { 1.0 } else { -1.0 };
        Ok((0..n).map(|cell| LayoutCell { cell, weight, sign }).collect())
    } else {
        Ok(Vec::new())
    }
}

/// A one-dimensional dyadic step function: a slice of a [`Grid2D`] or a profile
/// used to build tensor-product grids.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub root: DyadicInterval,
    pub resolution: u32,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(root: DyadicInterval, resolution: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1usize << resolution {
            return Err(Error::InvalidGrid(format!(
                "profile needs {} values, got {}",
                1usize << resolution,
                values.len()
            )));
        }
        Ok(Self { root, resolution, values })
    }

    /// Mean of the profile over `interval`.
    pub fn avg(&self, interval: DyadicInterval) -> Result<f64> {
        let layout = axis_layout(self.root, self.resolution, interval)?;
        Ok(layout.iter().map(|c| c.weight * self.values[c.cell]).sum())
    }

    /// `(1/|I|)(∫_{I_left} f - ∫_{I_right} f)`.
    pub fn diff_avg(&self, interval: DyadicInterval) -> Result<f64> {
        let layout = axis_layout(self.root, self.resolution, interval)?;
        Ok(layout.iter().map(|c| c.weight * c.sign * self.values[c.cell]).sum())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Profile {
        Profile {
            root: self.root,
            resolution: self.resolution,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Nonnegative function on the plane, constant on the cells of a
/// `2^resolution x 2^resolution` grid over `root` and zero outside `root`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2D {
    root: DyadicSquare,
    resolution: u32,
    /// Row-major, `y` is the outer index.
    values: Vec<f64>,
}

impl Grid2D {
    pub fn new(root: DyadicSquare, resolution: u32, values: Vec<f64>) -> Result<Self> {
        let side = 1usize << resolution;
        if values.len() != side * side {
            return Err(Error::InvalidGrid(format!(
                "resolution {resolution} needs {} values, got {}",
                side * side,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidGrid(format!("values must be finite and nonnegative, found {v}")));
        }
        Ok(Self { root, resolution, values })
    }

    pub fn constant(root: DyadicSquare, resolution: u32, c: f64) -> Result<Self> {
        let side = 1usize << resolution;
        Self::new(root, resolution, vec![c; side * side])
    }

    pub fn from_fn(root: DyadicSquare, resolution: u32, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let side = 1usize << resolution;
        let mut values = Vec::with_capacity(side * side);
        for cy in 0..side {
            for cx in 0..side {
                values.push(f(cx, cy));
            }
        }
        Self::new(root, resolution, values)
    }

    /// `f(x) g(y)` from two profiles over the sides of `root`.
    pub fn tensor(root: DyadicSquare, f: &Profile, g: &Profile) -> Result<Self> {
        if f.resolution != g.resolution || f.root != root.ix || g.root != root.iy {
            return Err(Error::GeometryMismatch);
        }
        Self::from_fn(root, f.resolution, |cx, cy| f.values[cx] * g.values[cy])
    }

    pub fn root(&self) -> DyadicSquare {
        self.root
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn side_cells(&self) -> usize {
        1usize << self.resolution
    }

    pub fn cell_scale(&self) -> i32 {
        self.root.scale() - self.resolution as i32
    }

    pub fn cell_area(&self) -> f64 {
        pow2(2 * self.cell_scale())
    }

    pub fn value(&self, cx: usize, cy: usize) -> f64 {
        self.values[cy * self.side_cells() + cx]
    }

    pub fn same_geometry(&self, other: &Grid2D) -> bool {
        self.root == other.root && self.resolution == other.resolution
    }

    /// The function `x -> F(x, y)` for `y` in cell row `cy`.
    pub fn row(&self, cy: usize) -> Profile {
        let side = self.side_cells();
        Profile {
            root: self.root.ix,
            resolution: self.resolution,
            values: self.values[cy * side..(cy + 1) * side].to_vec(),
        }
    }

    /// The function `y -> F(x, y)` for `x` in cell column `cx`.
    pub fn column(&self, cx: usize) -> Profile {
        Profile {
            root: self.root.iy,
            resolution: self.resolution,
            values: (0..self.side_cells()).map(|cy| self.value(cx, cy)).collect(),
        }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// `‖F‖_p` over the plane.
    pub fn lp_norm(&self, p: f64) -> f64 {
        (self.values.iter().map(|v| v.powf(p)).sum::<f64>() * self.cell_area()).powf(1.0 / p)
    }

    /// `⟨F^d⟩_Q^{1/d}` for any dyadic square, including squares finer than a cell
    /// and squares containing the root.
    pub fn power_avg(&self, q: &DyadicSquare, d: f64) -> f64 {
        let root = self.root;
        if root.contains(q) {
            let cell_scale = self.cell_scale();
            if q.scale() <= cell_scale {
                let shift = (cell_scale - q.scale()) as u32;
                let cx = ((q.ix.index >> shift) - (root.ix.index << self.resolution)) as usize;
                let cy = ((q.iy.index >> shift) - (root.iy.index << self.resolution)) as usize;
                return self.value(cx, cy);
            }
            let depth = (q.scale() - cell_scale) as u32;
            let c = 1usize << depth;
            let x0 = (q.ix.index - (root.ix.index << (root.scale() - q.scale()))) as usize * c;
            let y0 = (q.iy.index - (root.iy.index << (root.scale() - q.scale()))) as usize * c;
            let mut s = 0.0;
            for cy in y0..y0 + c {
                for cx in x0..x0 + c {
                    s += self.value(cx, cy).powf(d);
                }
            }
            (s / (c * c) as f64).powf(1.0 / d)
        } else if q.contains(&root) {
            let s: f64 = self.values.iter().map(|v| v.powf(d)).sum();
            (s * self.cell_area() / q.area()).powf(1.0 / d)
        } else {
            0.0
        }
    }

    /// Dyadic dilation `F(2^{-l} x, 2^{-l} y)`: the root scales by `2^l`, cell values are kept.
    pub fn dilate(&self, l: i32) -> Grid2D {
        Grid2D {
            root: self.root.dilate(l),
            resolution: self.resolution,
            values: self.values.clone(),
        }
    }

    pub fn scaled(&self, c: f64) -> Grid2D {
        Grid2D {
            root: self.root,
            resolution: self.resolution,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Restrict to the sub-square `q` of the root at the same cell size.
    pub fn restrict(&self, q: &DyadicSquare) -> Result<Grid2D> {
        if !self.root.contains(q) || q.scale() < self.cell_scale() {
            return Err(Error::Precondition(format!("{q} is not a resolvable sub-square of {}", self.root)));
        }
        let depth = (q.scale() - self.cell_scale()) as u32;
        let c = 1usize << depth;
        let x0 = (q.ix.index - (self.root.ix.index << (self.root.scale() - q.scale()))) as usize * c;
        let y0 = (q.iy.index - (self.root.iy.index << (self.root.scale() - q.scale()))) as usize * c;
        Grid2D::from_fn(*q, depth, |cx, cy| self.value(x0 + cx, y0 + cy))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GridRecord::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Grid2D> {
        let rec: GridRecord = serde_json::from_str(s)?;
        rec.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct RootRecord {
    scale: i32,
    ix_index: i64,
    iy_index: i64,
}

/// Flat wire form of a [`Grid2D`].
#[derive(Serialize, Deserialize)]
pub struct GridRecord {
    root: RootRecord,
    resolution: u32,
    values: Vec<f64>,
}

impl From<&Grid2D> for GridRecord {
    fn from(g: &Grid2D) -> Self {
        GridRecord {
            root: RootRecord {
                scale: g.root.scale(),
                ix_index: g.root.ix.index,
                iy_index: g.root.iy.index,
            },
            resolution: g.resolution,
            values: g.values.clone(),
        }
    }
}

impl TryFrom<GridRecord> for Grid2D {
    type Error = Error;

    fn try_from(rec: GridRecord) -> Result<Grid2D> {
        let root = DyadicSquare::new(rec.root.scale, rec.root.ix_index, rec.root.iy_index);
        Grid2D::new(root, rec.resolution, rec.values)
    }
}

impl Serialize for Grid2D {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Grid2D {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = GridRecord::deserialize(d)?;
        Grid2D::try_from(rec).map_err(serde::de::Error::custom)
    }
}

/// A finite convex tree of dyadic squares.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexTree {
    root: DyadicSquare,
    members: BTreeSet<DyadicSquare>,
}

impl ConvexTree {
    pub fn new(root: DyadicSquare, members: impl IntoIterator<Item = DyadicSquare>) -> Result<Self> {
        let members: BTreeSet<_> = members.into_iter().collect();
        if !members.contains(&root) {
            return Err(Error::InvalidTree(format!("root {root} is not a member")));
        }
        for q in &members {
            if !root.contains(q) {
                return Err(Error::InvalidTree(format!("{q} is not inside the root")));
            }
            // with every member inside the root, closure under parents is convexity
            if *q != root && !members.contains(&q.parent()) {
                return Err(Error::InvalidTree(format!("{q} skips a scale below the root")));
            }
        }
        Ok(Self { root, members })
    }

    pub fn singleton(root: DyadicSquare) -> Self {
        Self {
            root,
            members: BTreeSet::from([root]),
        }
    }

    /// All sub-squares of `root` down to `depth` levels below it.
    pub fn full(root: DyadicSquare, depth: u32) -> Self {
        let members = (0..=depth).flat_map(|d| root.descendants_at(d)).collect();
        Self { root, members }
    }

    pub fn root(&self) -> DyadicSquare {
        self.root
    }

    pub fn members(&self) -> &BTreeSet<DyadicSquare> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, q: &DyadicSquare) -> bool {
        self.members.contains(q)
    }

    /// Squares outside the tree whose parent is in it. They partition the root.
    pub fn leaves(&self) -> Vec<DyadicSquare> {
        self.members
            .iter()
            .flat_map(|q| q.children())
            .filter(|c| !self.members.contains(c))
            .collect()
    }

    /// Smallest member scale.
    pub fn finest_scale(&self) -> i32 {
        self.members.iter().map(|q| q.scale()).min().unwrap_or(self.root.scale())
    }
}

/// Squares on which a single-scale term of grids sharing `root` and `resolution`
/// can be nonzero: every sub-square of the root with side at least two cells,
/// plus the first `coarse_cap` ancestors of the root.
pub fn active_squares(grids: &[&Grid2D], coarse_cap: i64) -> Result<Vec<DyadicSquare>> {
    if coarse_cap < 0 {
        return Err(Error::Config(format!("coarse cap must be nonnegative, got {coarse_cap}")));
    }
    let first = grids.first().ok_or(Error::GeometryMismatch)?;
    if grids.iter().any(|g| !g.same_geometry(first)) {
        return Err(Error::GeometryMismatch);
    }
    Ok(active_squares_for(first.root(), first.resolution(), coarse_cap as u32))
}

pub(crate) fn active_squares_for(root: DyadicSquare, resolution: u32, coarse_cap: u32) -> Vec<DyadicSquare> {
    let mut out = Vec::new();
    let mut anc = root;
    let mut ancestors = Vec::new();
    for _ in 0..coarse_cap {
        anc = anc.parent();
        ancestors.push(anc);
    }
    out.extend(ancestors.into_iter().rev());
    for depth in 0..resolution {
        out.extend(root.descendants_at(depth));
    }
    out
}
