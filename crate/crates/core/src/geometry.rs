//! Grid points, permutation point sets, input families and the two
//! elementary predicates (empty rectangles, manhattan paths).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A point on the `(n+2) x (n+2)` grid. Ordered by `x`, then `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x: u32,
    pub y: u32,
}

impl Point {
    pub const fn new(x: u32, y: u32) -> Self {
        Point { x, y }
    }

    /// Reflect across the vertical axis of an `n`-grid.
    pub fn mirror_x(self, n: usize) -> Self {
        Point::new(n as u32 + 1 - self.x, self.y)
    }

    pub fn mirror_y(self, n: usize) -> Self {
        Point::new(self.x, n as u32 + 1 - self.y)
    }

    pub fn collinear(self, other: Point) -> bool {
        self.x == other.x || self.y == other.y
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (x, y) = s
            .trim()
            .split_once(',')
            .ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
        let x = x
            .trim()
            .parse()
            .map_err(|e| format!("bad x in `{s}`: {e}"))?;
        let y = y
            .trim()
            .parse()
            .map_err(|e| format!("bad y in `{s}`: {e}"))?;
        Ok(Point::new(x, y))
    }
}

/// An access sequence that is a permutation of `1..=n`, viewed at the same
/// time as the point set `{(x_i, i)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermutationPointSet {
    seq: Vec<u32>,
    // row_of[x] = i such that x_i = x (index 0 unused)
    row_of: Vec<u32>,
}

impl PermutationPointSet {
    pub fn new(seq: Vec<u32>) -> Result<Self> {
        let n = seq.len();
        if n == 0 {
            return Err(Error::EmptyPermutation);
        }
        let mut row_of = vec![0u32; n + 1];
        for (i, &v) in seq.iter().enumerate() {
            if v == 0 || v as usize > n {
                return Err(Error::ValueOutOfRange { value: v, n });
            }
            if row_of[v as usize] != 0 {
                return Err(Error::DuplicateValue(v));
            }
            row_of[v as usize] = i as u32 + 1;
        }
        Ok(PermutationPointSet { seq, row_of })
    }

    pub fn n(&self) -> usize {
        self.seq.len()
    }

    pub fn seq(&self) -> &[u32] {
        &self.seq
    }

    /// `x_i` for `1 <= i <= n`.
    pub fn x_at(&self, row: u32) -> u32 {
        self.seq[row as usize - 1]
    }

    /// The row `i` with `x_i = x`.
    pub fn row_of(&self, x: u32) -> u32 {
        self.row_of[x as usize]
    }

    pub fn point_at(&self, row: u32) -> Point {
        Point::new(self.x_at(row), row)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.y >= 1 && p.y as usize <= self.n() && self.x_at(p.y) == p.x
    }

    /// Points in row order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.seq
            .iter()
            .enumerate()
            .map(|(i, &x)| Point::new(x, i as u32 + 1))
    }

    pub fn point_set(&self) -> BTreeSet<Point> {
        self.points().collect()
    }

    pub fn mirror_x(&self) -> Self {
        let n = self.n() as u32;
        Self::new(self.seq.iter().map(|&x| n + 1 - x).collect()).expect("mirror of a permutation")
    }

    pub fn mirror_y(&self) -> Self {
        Self::new(self.seq.iter().rev().copied().collect()).expect("reversal of a permutation")
    }

    pub fn rotate_half(&self) -> Self {
        self.mirror_x().mirror_y()
    }
}

impl fmt::Display for PermutationPointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.seq.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for PermutationPointSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_permutation(s)
    }
}

pub fn make_permutation_point_set(seq: &[u32]) -> Result<PermutationPointSet> {
    PermutationPointSet::new(seq.to_vec())
}

/// Parse the one-line `2,6,4,3,1,5` format.
pub fn parse_permutation(s: &str) -> Result<PermutationPointSet> {
    let mut seq = Vec::new();
    for tok in s.trim().split(',') {
        let v = tok.trim().parse::<u32>().map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad value `{tok}`: {e}"),
        })?;
        seq.push(v);
    }
    PermutationPointSet::new(seq)
}

/// Parse one `x,y` pair per line. Blank lines and `#` comments are skipped.
pub fn parse_point_set(text: &str) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = line.parse::<Point>().map_err(|message| Error::Parse {
            line: idx + 1,
            message,
        })?;
        out.push(p);
    }
    Ok(out)
}

pub fn format_point_set<'a>(points: impl IntoIterator<Item = &'a Point>) -> String {
    let mut s = String::new();
    for p in points {
        s.push_str(&p.to_string());
        s.push('\n');
    }
    s
}

/// Margin and corner bookkeeping for the `(n+2) x (n+2)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridFrame {
    pub n: usize,
}

impl GridFrame {
    pub fn new(n: usize) -> Self {
        GridFrame { n }
    }

    fn top(&self) -> u32 {
        self.n as u32 + 1
    }

    pub fn in_grid(&self, p: Point) -> bool {
        p.x <= self.top() && p.y <= self.top()
    }

    pub fn is_corner(&self, p: Point) -> bool {
        (p.x == 0 || p.x == self.top()) && (p.y == 0 || p.y == self.top())
    }

    pub fn is_margin(&self, p: Point) -> bool {
        self.in_grid(p)
            && !self.is_corner(p)
            && (p.x == 0 || p.y == 0 || p.x == self.top() || p.y == self.top())
    }

    pub fn is_non_margin(&self, p: Point) -> bool {
        p.x >= 1 && p.y >= 1 && p.x <= self.n as u32 && p.y <= self.n as u32
    }

    pub fn margin_points(&self) -> Vec<Point> {
        let t = self.top();
        let mut out = Vec::with_capacity(4 * self.n);
        for i in 1..t {
            out.push(Point::new(i, 0));
            out.push(Point::new(i, t));
            out.push(Point::new(0, i));
            out.push(Point::new(t, i));
        }
        out.sort();
        out
    }

    pub fn corner_points(&self) -> [Point; 4] {
        let t = self.top();
        [
            Point::new(0, 0),
            Point::new(0, t),
            Point::new(t, 0),
            Point::new(t, t),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    BitReversal,
    Sequential,
    Random,
    Separable,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::BitReversal => "bit_reversal",
            Family::Sequential => "sequential",
            Family::Random => "random",
            Family::Separable => "separable",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Family::Random | Family::Separable)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "bit_reversal" => Ok(Family::BitReversal),
            "sequential" => Ok(Family::Sequential),
            "random" => Ok(Family::Random),
            "separable" => Ok(Family::Separable),
            other => Err(format!("unknown family `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilySpec {
    pub family: Family,
    pub n: usize,
    pub seed: Option<u64>,
}

impl FamilySpec {
    pub fn new(family: Family, n: usize, seed: Option<u64>) -> Self {
        FamilySpec { family, n, seed }
    }
}

pub fn generate(spec: FamilySpec) -> Result<PermutationPointSet> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::EmptyPermutation);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or(0));
    let seq = match spec.family {
        Family::Sequential => (1..=n as u32).collect(),
        Family::BitReversal => {
            if !n.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(n));
            }
            let bits = n.trailing_zeros();
            (0..n as u32)
                .map(|i| {
                    if bits == 0 {
                        1
                    } else {
                        (i.reverse_bits() >> (32 - bits)) + 1
                    }
                })
                .collect()
        }
        Family::Random => {
            let mut v: Vec<u32> = (1..=n as u32).collect();
            v.shuffle(&mut rng);
            v
        }
        Family::Separable => {
            let mut v = Vec::with_capacity(n);
            separable_into(&mut rng, 1, n as u32, &mut v);
            v
        }
    };
    PermutationPointSet::new(seq)
}

// Writes a random separable permutation of the values lo..lo+len into `out`
// by a random direct or skew sum of two smaller separable blocks.
fn separable_into(rng: &mut ChaCha8Rng, lo: u32, len: u32, out: &mut Vec<u32>) {
    if len == 1 {
        out.push(lo);
        return;
    }
    let left = rng.gen_range(1..len);
    let right = len - left;
    if rng.gen_bool(0.5) {
        // direct sum: left block takes the small values
        separable_into(rng, lo, left, out);
        separable_into(rng, lo + left, right, out);
    } else {
        separable_into(rng, lo + right, left, out);
        separable_into(rng, lo, right, out);
    }
}

/// Closed axis-parallel rectangle spanned by two points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x_lo: u32,
    pub x_hi: u32,
    pub y_lo: u32,
    pub y_hi: u32,
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{},{}]x[{},{}]",
            self.x_lo, self.x_hi, self.y_lo, self.y_hi
        )
    }
}

impl Rect {
    pub fn spanned(a: Point, b: Point) -> Self {
        Rect {
            x_lo: a.x.min(b.x),
            x_hi: a.x.max(b.x),
            y_lo: a.y.min(b.y),
            y_hi: a.y.max(b.y),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.x_lo..=self.x_hi).contains(&p.x) && (self.y_lo..=self.y_hi).contains(&p.y)
    }

    pub fn contains_strictly(&self, p: Point) -> bool {
        self.x_lo < p.x && p.x < self.x_hi && self.y_lo < p.y && p.y < self.y_hi
    }

    pub fn width(&self) -> u32 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> u32 {
        self.y_hi - self.y_lo
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x_lo, self.y_lo),
            Point::new(self.x_lo, self.y_hi),
            Point::new(self.x_hi, self.y_lo),
            Point::new(self.x_hi, self.y_hi),
        ]
    }
}

/// True iff the closed rectangle with corners `a`, `b` holds no point of
/// `points` other than `a` and `b`. Boundary points count as contained.
pub fn rect_is_empty<'a>(points: impl IntoIterator<Item = &'a Point>, a: Point, b: Point) -> bool {
    let r = Rect::spanned(a, b);
    points
        .into_iter()
        .all(|&p| p == a || p == b || !r.contains(p))
}

/// Whether a manhattan path from `a` to `b` exists using points of `ys`.
pub fn manhattan_path_exists(ys: &BTreeSet<Point>, a: Point, b: Point) -> Result<bool> {
    Ok(manhattan_path(ys, a, b)?.is_some())
}

/// A witness manhattan path from `a` to `b`, if one exists.
///
/// Search is reachability over axis-aligned hops that move toward `b` in
/// both coordinates, restricted to the bounding box of `a` and `b`.
pub fn manhattan_path(ys: &BTreeSet<Point>, a: Point, b: Point) -> Result<Option<Vec<Point>>> {
    for p in [a, b] {
        if !ys.contains(&p) {
            return Err(Error::PointNotInSet(p));
        }
    }
    if a == b {
        return Ok(Some(vec![a]));
    }
    let bx = Rect::spanned(a, b);
    let inside: Vec<Point> = ys.iter().copied().filter(|p| bx.contains(*p)).collect();
    let toward = |from: Point, to: Point| -> bool {
        // `to` must not move away from `b` relative to `from`
        let dx_ok = if a.x <= b.x {
            to.x >= from.x
        } else {
            to.x <= from.x
        };
        let dy_ok = if a.y <= b.y {
            to.y >= from.y
        } else {
            to.y <= from.y
        };
        dx_ok && dy_ok && from.collinear(to) && from != to
    };
    let mut prev: HashMap<Point, Point> = HashMap::new();
    let mut queue = VecDeque::from([a]);
    prev.insert(a, a);
    while let Some(p) = queue.pop_front() {
        if p == b {
            let mut path = vec![b];
            let mut cur = b;
            while cur != a {
                cur = prev[&cur];
                path.push(cur);
            }
            path.reverse();
            return Ok(Some(path));
        }
        for &q in &inside {
            if !prev.contains_key(&q) && toward(p, q) {
                prev.insert(q, p);
                queue.push_back(q);
            }
        }
    }
    Ok(None)
}

/// All points of `ys` reachable from `source` by manhattan paths, computed by
/// one sweep per quadrant. Used when many pairs share a source.
pub fn manhattan_reachable_from(ys: &BTreeSet<Point>, source: Point) -> BTreeSet<Point> {
    let mut out = BTreeSet::new();
    for (sx, sy) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
        // order points in the quadrant by distance from the source along both axes
        let mut quad: Vec<Point> = ys
            .iter()
            .copied()
            .filter(|p| {
                (p.x as i64 - source.x as i64) * sx >= 0 && (p.y as i64 - source.y as i64) * sy >= 0
            })
            .collect();
        quad.sort_by_key(|p| ((p.x as i64) * sx, (p.y as i64) * sy));
        let mut row_hit: HashMap<u32, bool> = HashMap::new();
        let mut col_hit: HashMap<u32, bool> = HashMap::new();
        for p in quad {
            let reach = p == source
                || row_hit.get(&p.y).copied().unwrap_or(false)
                || col_hit.get(&p.x).copied().unwrap_or(false);
            if reach {
                out.insert(p);
                row_hit.insert(p.y, true);
                col_hit.insert(p.x, true);
            }
        }
    }
    out
}
