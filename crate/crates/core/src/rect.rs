//! Rectangulation states: points plus non-crossing axis-parallel segments on
//! the `(n+2) x (n+2)` grid, with validity parametrized by the set of
//! allowed elbows.
//!
//! The point set `P` is not stored. It is always the input points, the
//! margin points and the endpoints of the current segments: a non-input
//! point whose last segment is removed leaves `P`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{parse_permutation, GridFrame, PermutationPointSet, Point};

/// An axis-parallel segment with endpoints in canonical order (left to
/// right, or bottom to top).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    p: Point,
    q: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidOperation(format!(
                "degenerate segment at {a}"
            )));
        }
        if !a.collinear(b) {
            return Err(Error::InvalidOperation(format!(
                "segment {a} {b} is not axis-parallel"
            )));
        }
        Ok(if a < b {
            Segment { p: a, q: b }
        } else {
            Segment { p: b, q: a }
        })
    }

    pub fn p(&self) -> Point {
        self.p
    }

    pub fn q(&self) -> Point {
        self.q
    }

    pub fn is_horizontal(&self) -> bool {
        self.p.y == self.q.y
    }

    pub fn is_vertical(&self) -> bool {
        self.p.x == self.q.x
    }

    pub fn length(&self) -> u32 {
        (self.q.x - self.p.x) + (self.q.y - self.p.y)
    }

    pub fn has_endpoint(&self, a: Point) -> bool {
        self.p == a || self.q == a
    }

    pub fn other_end(&self, a: Point) -> Point {
        if self.p == a {
            self.q
        } else {
            self.p
        }
    }

    pub fn contains(&self, a: Point) -> bool {
        if self.is_horizontal() {
            a.y == self.p.y && self.p.x <= a.x && a.x <= self.q.x
        } else {
            a.x == self.p.x && self.p.y <= a.y && a.y <= self.q.y
        }
    }

    pub fn contains_in_interior(&self, a: Point) -> bool {
        self.contains(a) && !self.has_endpoint(a)
    }

    fn mirror_x(self, n: usize) -> Self {
        Segment::new(self.p.mirror_x(n), self.q.mirror_x(n)).expect("mirror of a segment")
    }

    fn mirror_y(self, n: usize) -> Self {
        Segment::new(self.p.mirror_y(n), self.q.mirror_y(n)).expect("mirror of a segment")
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.p, self.q)
    }
}

/// A degree-two corner, named by its vertical arm then its horizontal arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElbowOrientation {
    UR,
    UL,
    DR,
    DL,
}

impl ElbowOrientation {
    pub const ALL: [ElbowOrientation; 4] = [Self::UR, Self::UL, Self::DR, Self::DL];

    fn bit(self) -> u8 {
        match self {
            Self::UR => 1,
            Self::UL => 2,
            Self::DR => 4,
            Self::DL => 8,
        }
    }

    pub fn from_arms(up: bool, right: bool) -> Self {
        match (up, right) {
            (true, true) => Self::UR,
            (true, false) => Self::UL,
            (false, true) => Self::DR,
            (false, false) => Self::DL,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::UR => "ur",
            Self::UL => "ul",
            Self::DR => "dr",
            Self::DL => "dl",
        }
    }

    pub fn mirror_x(self) -> Self {
        match self {
            Self::UR => Self::UL,
            Self::UL => Self::UR,
            Self::DR => Self::DL,
            Self::DL => Self::DR,
        }
    }

    pub fn mirror_y(self) -> Self {
        match self {
            Self::UR => Self::DR,
            Self::DR => Self::UR,
            Self::UL => Self::DL,
            Self::DL => Self::UL,
        }
    }
}

/// The set of elbow orientations a state may contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AllowedElbows(u8);

impl AllowedElbows {
    pub const NONE: Self = AllowedElbows(0);
    pub const ALL: Self = AllowedElbows(15);
    pub const CLASS_P: Self = AllowedElbows(1 | 8);
    pub const CLASS_M: Self = AllowedElbows(2 | 4);
    pub const ONLY_UR: Self = AllowedElbows(1);
    pub const ONLY_UL: Self = AllowedElbows(2);
    pub const ONLY_DR: Self = AllowedElbows(4);
    pub const ONLY_DL: Self = AllowedElbows(8);
    /// Clockwise-neighbor pairs, named by their shared arm.
    pub const UP_PAIR: Self = AllowedElbows(1 | 2);
    pub const RIGHT_PAIR: Self = AllowedElbows(1 | 4);
    pub const DOWN_PAIR: Self = AllowedElbows(4 | 8);
    pub const LEFT_PAIR: Self = AllowedElbows(2 | 8);

    pub fn from_orientations(set: impl IntoIterator<Item = ElbowOrientation>) -> Self {
        AllowedElbows(set.into_iter().fold(0, |acc, o| acc | o.bit()))
    }

    pub fn allows(self, o: ElbowOrientation) -> bool {
        self.0 & o.bit() != 0
    }

    pub fn is_superset_of(self, other: Self) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn orientations(self) -> impl Iterator<Item = ElbowOrientation> {
        ElbowOrientation::ALL
            .into_iter()
            .filter(move |o| self.allows(*o))
    }

    pub fn mirror_x(self) -> Self {
        Self::from_orientations(self.orientations().map(ElbowOrientation::mirror_x))
    }

    pub fn mirror_y(self) -> Self {
        Self::from_orientations(self.orientations().map(ElbowOrientation::mirror_y))
    }

    /// The satisfaction sign that flip sequences under these elbows are
    /// guaranteed to produce, if any: no elbows give full satisfaction,
    /// subsets of {UL, DR} give plus, subsets of {UR, DL} give minus.
    pub fn guaranteed_sign(self) -> Option<crate::satisfied::Sign> {
        use crate::satisfied::Sign;
        if self == Self::NONE {
            Some(Sign::Both)
        } else if Self::CLASS_M.is_superset_of(self) {
            Some(Sign::Plus)
        } else if Self::CLASS_P.is_superset_of(self) {
            Some(Sign::Minus)
        } else {
            None
        }
    }

    pub fn all_subsets() -> impl Iterator<Item = Self> {
        (0u8..16).map(AllowedElbows)
    }
}

impl fmt::Display for AllowedElbows {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::NONE {
            return f.write_str("none");
        }
        let names: Vec<&str> = self.orientations().map(|o| o.name()).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for AllowedElbows {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let preset = match s.trim() {
            "none" | "" => Some(Self::NONE),
            "all" => Some(Self::ALL),
            "class-p" => Some(Self::CLASS_P),
            "class-m" => Some(Self::CLASS_M),
            "up" => Some(Self::UP_PAIR),
            "down" => Some(Self::DOWN_PAIR),
            "left" => Some(Self::LEFT_PAIR),
            "right" => Some(Self::RIGHT_PAIR),
            _ => None,
        };
        if let Some(p) = preset {
            return Ok(p);
        }
        let mut set = Vec::new();
        for tok in s.split(',') {
            set.push(match tok.trim() {
                "ur" => ElbowOrientation::UR,
                "ul" => ElbowOrientation::UL,
                "dr" => ElbowOrientation::DR,
                "dl" => ElbowOrientation::DL,
                other => return Err(format!("unknown elbow `{other}`")),
            });
        }
        Ok(Self::from_orientations(set))
    }
}

/// One reason a state is invalid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    OutsideGrid(Point),
    CornerEndpoint(Point),
    OnMargin(Segment),
    /// A point of `P` in the open interior of a segment.
    PointInInterior {
        segment: Segment,
        point: Point,
    },
    Crossing(Segment, Segment),
    Overlap(Segment, Segment),
    Degree {
        point: Point,
        degree: usize,
    },
    Elbow {
        point: Point,
        orientation: ElbowOrientation,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutsideGrid(p) => write!(f, "point {p} outside the grid"),
            Violation::CornerEndpoint(p) => write!(f, "corner point {p} used as an endpoint"),
            Violation::OnMargin(s) => write!(f, "segment [{s}] lies on a margin line"),
            Violation::PointInInterior { segment, point } => {
                write!(f, "point {point} lies inside segment [{segment}]")
            }
            Violation::Crossing(a, b) => write!(f, "segments [{a}] and [{b}] cross"),
            Violation::Overlap(a, b) => write!(f, "segments [{a}] and [{b}] overlap"),
            Violation::Degree { point, degree } => {
                write!(f, "point {point} lies on {degree} segment(s)")
            }
            Violation::Elbow { point, orientation } => {
                write!(f, "disallowed {} elbow at {point}", orientation.name())
            }
        }
    }
}

/// Which of the four directions have a segment leaving a point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Arms {
    pub up: bool,
    pub down: bool,
    pub left: bool,
    pub right: bool,
}

impl Arms {
    pub fn count(&self) -> usize {
        [self.up, self.down, self.left, self.right]
            .iter()
            .filter(|b| **b)
            .count()
    }

    fn with_towards(mut self, from: Point, to: Point) -> Self {
        if to.x > from.x {
            self.right = true;
        } else if to.x < from.x {
            self.left = true;
        } else if to.y > from.y {
            self.up = true;
        } else {
            self.down = true;
        }
        self
    }

    fn without_towards(mut self, from: Point, to: Point) -> Self {
        if to.x > from.x {
            self.right = false;
        } else if to.x < from.x {
            self.left = false;
        } else if to.y > from.y {
            self.up = false;
        } else {
            self.down = false;
        }
        self
    }

    /// Elbow rule for a non-margin point.
    fn violation(&self, point: Point, elbows: AllowedElbows) -> Option<Violation> {
        let degree = self.count();
        if degree < 2 {
            return Some(Violation::Degree { point, degree });
        }
        if degree == 2 && (self.up || self.down) && (self.left || self.right) {
            let orientation = ElbowOrientation::from_arms(self.up, self.right);
            if !elbows.allows(orientation) {
                return Some(Violation::Elbow { point, orientation });
            }
        }
        None
    }
}

/// A state `(P, L)`.
#[derive(Debug, Clone)]
pub struct RectState {
    x: PermutationPointSet,
    segments: BTreeSet<Segment>,
    // rows[y]: lo x -> hi x of horizontal segments at height y
    rows: Vec<BTreeMap<u32, u32>>,
    // cols[x]: lo y -> hi y of vertical segments at column x
    cols: Vec<BTreeMap<u32, u32>>,
}

impl PartialEq for RectState {
    fn eq(&self, other: &Self) -> bool {
        self.x == other.x && self.segments == other.segments
    }
}

impl Eq for RectState {}

pub fn initial_state(x: &PermutationPointSet) -> RectState {
    let n = x.n();
    let top = n as u32 + 1;
    let mut s = RectState::empty(x.clone());
    for p in x.points() {
        s.insert_raw(Segment::new(Point::new(p.x, 0), p).expect("below"));
        s.insert_raw(Segment::new(p, Point::new(p.x, top)).expect("above"));
    }
    s
}

impl RectState {
    fn empty(x: PermutationPointSet) -> Self {
        let n = x.n();
        RectState {
            x,
            segments: BTreeSet::new(),
            rows: vec![BTreeMap::new(); n + 2],
            cols: vec![BTreeMap::new(); n + 2],
        }
    }

    /// Build a state from an explicit segment list. No validity check.
    pub fn from_segments(
        x: PermutationPointSet,
        segs: impl IntoIterator<Item = Segment>,
    ) -> Result<Self> {
        let mut s = Self::empty(x);
        let frame = s.frame();
        for seg in segs {
            for e in [seg.p, seg.q] {
                if !frame.in_grid(e) {
                    return Err(Error::InvalidState(vec![Violation::OutsideGrid(e)]));
                }
            }
            if !s.segments.insert(seg) {
                continue;
            }
            s.segments.remove(&seg);
            s.insert_raw(seg);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn input(&self) -> &PermutationPointSet {
        &self.x
    }

    pub fn frame(&self) -> GridFrame {
        GridFrame::new(self.n())
    }

    pub fn segments(&self) -> &BTreeSet<Segment> {
        &self.segments
    }

    pub fn contains_segment(&self, seg: &Segment) -> bool {
        self.segments.contains(seg)
    }

    /// Canonical form: the sorted segment list.
    pub fn canonical(&self) -> Vec<Segment> {
        self.segments.iter().copied().collect()
    }

    /// Horizontal segments at height `y` as `(lo, hi)` x-intervals.
    pub fn row(&self, y: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.rows[y as usize].iter().map(|(&a, &b)| (a, b))
    }

    /// Vertical segments in column `x` as `(lo, hi)` y-intervals.
    pub fn column(&self, x: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.cols[x as usize].iter().map(|(&a, &b)| (a, b))
    }

    pub fn vertical_segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.segments.iter().copied().filter(Segment::is_vertical)
    }

    pub fn points(&self) -> BTreeSet<Point> {
        let mut out: BTreeSet<Point> = self.x.points().collect();
        out.extend(self.frame().margin_points());
        for s in &self.segments {
            out.insert(s.p);
            out.insert(s.q);
        }
        out
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.x.contains(p) || self.frame().is_margin(p) || self.arms(p).count() > 0
    }

    fn insert_raw(&mut self, seg: Segment) {
        if seg.is_horizontal() {
            self.rows[seg.p.y as usize].insert(seg.p.x, seg.q.x);
        } else {
            self.cols[seg.p.x as usize].insert(seg.p.y, seg.q.y);
        }
        self.segments.insert(seg);
    }

    fn remove_raw(&mut self, seg: Segment) {
        if seg.is_horizontal() {
            self.rows[seg.p.y as usize].remove(&seg.p.x);
        } else {
            self.cols[seg.p.x as usize].remove(&seg.p.y);
        }
        self.segments.remove(&seg);
    }

    pub fn arms(&self, p: Point) -> Arms {
        if p.x as usize >= self.cols.len() || p.y as usize >= self.rows.len() {
            return Arms::default();
        }
        let col = &self.cols[p.x as usize];
        let row = &self.rows[p.y as usize];
        Arms {
            up: col.contains_key(&p.y),
            down: col
                .range(..p.y)
                .next_back()
                .is_some_and(|(_, &hi)| hi == p.y),
            left: row
                .range(..p.x)
                .next_back()
                .is_some_and(|(_, &hi)| hi == p.x),
            right: row.contains_key(&p.x),
        }
    }

    /// Vertical segments with an endpoint at `p`.
    pub fn verticals_at(&self, p: Point) -> Vec<Segment> {
        let arms = self.arms(p);
        let col = &self.cols[p.x as usize];
        let mut out = Vec::new();
        if arms.up {
            out.push(Segment::new(p, Point::new(p.x, col[&p.y])).expect("up arm"));
        }
        if arms.down {
            let (&lo, _) = col.range(..p.y).next_back().expect("down arm");
            out.push(Segment::new(Point::new(p.x, lo), p).expect("down arm"));
        }
        out
    }

    pub fn degree(&self, p: Point) -> usize {
        self.arms(p).count()
    }

    /// The segment containing `p` in its open interior, if any.
    pub fn host(&self, p: Point) -> Option<Segment> {
        if let Some((&lo, &hi)) = self.rows[p.y as usize].range(..p.x).next_back() {
            if hi > p.x {
                return Some(
                    Segment::new(Point::new(lo, p.y), Point::new(hi, p.y)).expect("row segment"),
                );
            }
        }
        if let Some((&lo, &hi)) = self.cols[p.x as usize].range(..p.y).next_back() {
            if hi > p.y {
                return Some(
                    Segment::new(Point::new(p.x, lo), Point::new(p.x, hi)).expect("column segment"),
                );
            }
        }
        None
    }

    /// Whether some segment contains `p` (interior or endpoint).
    pub fn on_segment(&self, p: Point) -> bool {
        self.arms(p).count() > 0 || self.host(p).is_some()
    }

    fn segment_problems(&self, seg: Segment, out: &mut Vec<Violation>) {
        let frame = self.frame();
        let top = self.n() as u32 + 1;
        for e in [seg.p, seg.q] {
            if !frame.in_grid(e) {
                out.push(Violation::OutsideGrid(e));
                return;
            }
            if frame.is_corner(e) {
                out.push(Violation::CornerEndpoint(e));
            }
        }
        let on_margin_line = if seg.is_horizontal() {
            seg.p.y == 0 || seg.p.y == top
        } else {
            seg.p.x == 0 || seg.p.x == top
        };
        if on_margin_line {
            out.push(Violation::OnMargin(seg));
            return;
        }
        if seg.is_horizontal() {
            let y = seg.p.y;
            if (1..=self.n() as u32).contains(&y) {
                let xv = self.x.x_at(y);
                if seg.p.x < xv && xv < seg.q.x {
                    out.push(Violation::PointInInterior {
                        segment: seg,
                        point: Point::new(xv, y),
                    });
                }
            }
            for c in seg.p.x + 1..seg.q.x {
                if let Some((&lo, &hi)) = self.cols[c as usize].range(..=y).next_back() {
                    if hi >= y {
                        let other =
                            Segment::new(Point::new(c, lo), Point::new(c, hi)).expect("column");
                        if lo < y && y < hi {
                            out.push(Violation::Crossing(seg, other));
                        } else {
                            out.push(Violation::PointInInterior {
                                segment: seg,
                                point: Point::new(c, y),
                            });
                        }
                    }
                }
            }
            for (&lo, &hi) in self.rows[y as usize].range(..seg.q.x) {
                if hi > seg.p.x {
                    let other = Segment::new(Point::new(lo, y), Point::new(hi, y)).expect("row");
                    if other != seg {
                        out.push(Violation::Overlap(seg, other));
                    }
                }
            }
        } else {
            let x = seg.p.x;
            if (1..=self.n() as u32).contains(&x) {
                let yv = self.x.row_of(x);
                if seg.p.y < yv && yv < seg.q.y {
                    out.push(Violation::PointInInterior {
                        segment: seg,
                        point: Point::new(x, yv),
                    });
                }
            }
            for r in seg.p.y + 1..seg.q.y {
                if let Some((&lo, &hi)) = self.rows[r as usize].range(..=x).next_back() {
                    if hi >= x {
                        let other =
                            Segment::new(Point::new(lo, r), Point::new(hi, r)).expect("row");
                        if lo < x && x < hi {
                            out.push(Violation::Crossing(seg, other));
                        } else {
                            out.push(Violation::PointInInterior {
                                segment: seg,
                                point: Point::new(x, r),
                            });
                        }
                    }
                }
            }
            for (&lo, &hi) in self.cols[x as usize].range(..seg.q.y) {
                if hi > seg.p.y {
                    let other = Segment::new(Point::new(x, lo), Point::new(x, hi)).expect("column");
                    if other != seg {
                        out.push(Violation::Overlap(seg, other));
                    }
                }
            }
        }
    }

    /// Problems a flip `<a, b>` would cause, empty when it is valid.
    pub fn flip_violations(
        &self,
        a: Point,
        b: Point,
        elbows: AllowedElbows,
    ) -> Result<Vec<Violation>> {
        let seg = Segment::new(a, b)?;
        let mut out = Vec::new();
        if self.segments.contains(&seg) {
            out.push(Violation::Overlap(seg, seg));
            return Ok(out);
        }
        self.segment_problems(seg, &mut out);
        if !out.is_empty() {
            return Ok(out);
        }
        let frame = self.frame();
        for (end, other) in [(seg.p, seg.q), (seg.q, seg.p)] {
            if frame.is_margin(end) {
                continue;
            }
            let mut arms = self.arms(end);
            if let Some(h) = self.host(end) {
                arms = arms.with_towards(end, h.p).with_towards(end, h.q);
            }
            arms = arms.with_towards(end, other);
            if let Some(v) = arms.violation(end, elbows) {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// Apply a flip in place. On error the state is unchanged.
    pub fn flip(&mut self, a: Point, b: Point, elbows: AllowedElbows) -> Result<()> {
        let v = self.flip_violations(a, b, elbows)?;
        if !v.is_empty() {
            return Err(Error::InvalidState(v));
        }
        let seg = Segment::new(a, b)?;
        for end in [seg.p, seg.q] {
            if let Some(h) = self.host(end) {
                self.remove_raw(h);
                self.insert_raw(Segment::new(h.p, end)?);
                self.insert_raw(Segment::new(end, h.q)?);
            }
        }
        self.insert_raw(seg);
        Ok(())
    }

    /// Problems removing `seg` would cause.
    pub fn removal_violations(
        &self,
        seg: Segment,
        elbows: AllowedElbows,
    ) -> Result<Vec<Violation>> {
        if !self.segments.contains(&seg) {
            return Err(Error::InvalidOperation(format!(
                "segment [{seg}] is not in the state"
            )));
        }
        let frame = self.frame();
        let mut out = Vec::new();
        for (end, other) in [(seg.p, seg.q), (seg.q, seg.p)] {
            if frame.is_margin(end) {
                continue;
            }
            let arms = self.arms(end).without_towards(end, other);
            if arms.count() == 0 && !self.x.contains(end) {
                continue;
            }
            if let Some(v) = arms.violation(end, elbows) {
                out.push(v);
            }
        }
        Ok(out)
    }

    pub fn can_remove(&self, seg: Segment, elbows: AllowedElbows) -> bool {
        self.removal_violations(seg, elbows)
            .is_ok_and(|v| v.is_empty())
    }

    /// Remove a segment in place. On error the state is unchanged.
    pub fn remove(&mut self, seg: Segment, elbows: AllowedElbows) -> Result<()> {
        let v = self.removal_violations(seg, elbows)?;
        if !v.is_empty() {
            return Err(Error::InvalidState(v));
        }
        self.remove_raw(seg);
        Ok(())
    }

    /// Every violated validity condition.
    pub fn violations(&self, elbows: AllowedElbows) -> Vec<Violation> {
        let mut out = Vec::new();
        for &seg in &self.segments {
            let mut tmp = Vec::new();
            self.segment_problems(seg, &mut tmp);
            for v in tmp {
                // each crossing or overlap is reported once
                let dup = match &v {
                    Violation::Crossing(a, b) | Violation::Overlap(a, b) => {
                        a > b && !a.is_horizontal()
                    }
                    _ => false,
                };
                if !dup && !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        let frame = self.frame();
        for p in self.points() {
            if frame.is_margin(p) {
                continue;
            }
            if let Some(v) = self.arms(p).violation(p, elbows) {
                out.push(v);
            }
        }
        out
    }

    pub fn is_end_state(&self) -> bool {
        let top = self.n() as u32 + 1;
        if self.segments.iter().any(Segment::is_vertical) {
            return false;
        }
        for y in 1..top {
            let mut reach = 0;
            for (lo, hi) in self.row(y) {
                if lo != reach {
                    return false;
                }
                reach = hi;
            }
            if reach != top {
                return false;
            }
        }
        self.violations(AllowedElbows::NONE).is_empty()
    }

    /// Candidate flip endpoints: grid points that are in `P` or on a segment.
    fn flip_candidates(&self) -> Vec<Point> {
        let frame = self.frame();
        let top = self.n() as u32 + 1;
        let mut out = Vec::new();
        for x in 0..=top {
            for y in 0..=top {
                let p = Point::new(x, y);
                if frame.is_corner(p) {
                    continue;
                }
                if frame.is_margin(p) || self.x.contains(p) || self.on_segment(p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// All flips `<a, b>` (with `a < b`) that are currently valid.
    pub fn valid_flips(&self, elbows: AllowedElbows) -> Vec<(Point, Point)> {
        let cands = self.flip_candidates();
        let set: BTreeSet<Point> = cands.iter().copied().collect();
        let top = self.n() as u32 + 1;
        let mut out = Vec::new();
        for &a in &cands {
            for x in a.x + 1..=top {
                let b = Point::new(x, a.y);
                if set.contains(&b)
                    && self
                        .flip_violations(a, b, elbows)
                        .is_ok_and(|v| v.is_empty())
                {
                    out.push((a, b));
                }
            }
            for y in a.y + 1..=top {
                let b = Point::new(a.x, y);
                if set.contains(&b)
                    && self
                        .flip_violations(a, b, elbows)
                        .is_ok_and(|v| v.is_empty())
                {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn removable_segments(&self, elbows: AllowedElbows) -> Vec<Segment> {
        self.segments
            .iter()
            .copied()
            .filter(|s| self.can_remove(*s, elbows))
            .collect()
    }

    pub fn mirror_x(&self) -> RectState {
        let n = self.n();
        RectState::from_segments(
            self.x.mirror_x(),
            self.segments.iter().map(|s| s.mirror_x(n)),
        )
        .expect("mirror stays in the grid")
    }

    pub fn mirror_y(&self) -> RectState {
        let n = self.n();
        RectState::from_segments(
            self.x.mirror_y(),
            self.segments.iter().map(|s| s.mirror_y(n)),
        )
        .expect("mirror stays in the grid")
    }
}

pub fn is_valid_state(s: &RectState, elbows: AllowedElbows) -> Vec<Violation> {
    s.violations(elbows)
}

pub fn apply_flip(s: &RectState, a: Point, b: Point, elbows: AllowedElbows) -> Result<RectState> {
    let mut t = s.clone();
    t.flip(a, b, elbows)?;
    Ok(t)
}

pub fn remove_segment(s: &RectState, seg: Segment, elbows: AllowedElbows) -> Result<RectState> {
    let mut t = s.clone();
    t.remove(seg, elbows)?;
    Ok(t)
}

pub fn is_end_state(s: &RectState) -> bool {
    s.is_end_state()
}

pub fn enumerate_valid_flips(s: &RectState, elbows: AllowedElbows) -> Vec<(Point, Point)> {
    s.valid_flips(elbows)
}

/// Replace `seg = [pivot, y]` by the perpendicular `[pivot, new_far_end]`.
pub fn apply_a_rotate(
    s: &RectState,
    seg: Segment,
    pivot: Point,
    new_far_end: Point,
) -> Result<RectState> {
    if !s.contains_segment(&seg) || !seg.has_endpoint(pivot) {
        return Err(Error::InvalidOperation(format!(
            "[{seg}] with pivot {pivot} is not a segment end"
        )));
    }
    let new = Segment::new(pivot, new_far_end)?;
    if new.is_horizontal() == seg.is_horizontal() {
        return Err(Error::InvalidOperation(
            "rotated segment must change orientation".into(),
        ));
    }
    let mut t = s.clone();
    t.remove_raw(seg);
    t.add_splitting(new)?;
    check_valid(t)
}

/// Replace the collinear pair `[x, y]`, `[y, z]` by the perpendicular pair
/// `[v, y]`, `[y, w]`.
pub fn apply_a_flip(
    s: &RectState,
    seg1: Segment,
    seg2: Segment,
    v: Point,
    w: Point,
) -> Result<RectState> {
    let (y, v, w) = a_flip_shape(s, seg1, seg2, v, w)?;
    let mut t = s.clone();
    t.remove_raw(seg1);
    t.remove_raw(seg2);
    t.add_splitting(Segment::new(v, y)?)?;
    t.add_splitting(Segment::new(y, w)?)?;
    check_valid(t)
}

// Validates the A-flip argument shape and returns (shared point, v, w).
fn a_flip_shape(
    s: &RectState,
    seg1: Segment,
    seg2: Segment,
    v: Point,
    w: Point,
) -> Result<(Point, Point, Point)> {
    for seg in [seg1, seg2] {
        if !s.contains_segment(&seg) {
            return Err(Error::InvalidOperation(format!(
                "segment [{seg}] is not in the state"
            )));
        }
    }
    let y = [seg1.p, seg1.q]
        .into_iter()
        .find(|p| seg2.has_endpoint(*p))
        .ok_or_else(|| Error::InvalidOperation("segments do not share an endpoint".into()))?;
    if seg1.is_horizontal() != seg2.is_horizontal() || seg1 == seg2 {
        return Err(Error::InvalidOperation(
            "removed segments must share one orientation".into(),
        ));
    }
    let n1 = Segment::new(v, y)?;
    let n2 = Segment::new(y, w)?;
    if n1.is_horizontal() != n2.is_horizontal()
        || n1.is_horizontal() == seg1.is_horizontal()
        || n1 == n2
    {
        return Err(Error::InvalidOperation(
            "added segments must share the other orientation".into(),
        ));
    }
    Ok((y, v, w))
}

fn check_valid(t: RectState) -> Result<RectState> {
    let v = t.violations(AllowedElbows::NONE);
    if v.is_empty() {
        Ok(t)
    } else {
        Err(Error::InvalidState(v))
    }
}

impl RectState {
    // Adds a segment, splitting a host at either end, without validity checks.
    fn add_splitting(&mut self, seg: Segment) -> Result<()> {
        if self.segments.contains(&seg) {
            return Err(Error::InvalidOperation(format!(
                "segment [{seg}] already present"
            )));
        }
        for end in [seg.p, seg.q] {
            if !self.frame().in_grid(end) {
                return Err(Error::InvalidState(vec![Violation::OutsideGrid(end)]));
            }
            if let Some(h) = self.host(end) {
                if h.is_horizontal() == seg.is_horizontal() {
                    return Err(Error::InvalidState(vec![Violation::Overlap(seg, h)]));
                }
                self.remove_raw(h);
                self.insert_raw(Segment::new(h.p, end)?);
                self.insert_raw(Segment::new(end, h.q)?);
            }
        }
        self.insert_raw(seg);
        Ok(())
    }
}

/// A-rotate or A-flip arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AOp {
    Rotate {
        seg: Segment,
        pivot: Point,
        new_far_end: Point,
    },
    Flip {
        seg1: Segment,
        seg2: Segment,
        v: Point,
        w: Point,
    },
}

impl AOp {
    pub fn apply(&self, s: &RectState) -> Result<RectState> {
        match *self {
            AOp::Rotate {
                seg,
                pivot,
                new_far_end,
            } => apply_a_rotate(s, seg, pivot, new_far_end),
            AOp::Flip { seg1, seg2, v, w } => apply_a_flip(s, seg1, seg2, v, w),
        }
    }
}

/// All valid A-rotates and A-flips on `s`.
pub fn enumerate_a_ops(s: &RectState) -> Vec<(AOp, RectState)> {
    let top = s.n() as u32 + 1;
    let mut out = Vec::new();
    let line_points = |from: Point, horizontal: bool| -> Vec<Point> {
        if horizontal {
            (0..=top)
                .filter(|&x| x != from.x)
                .map(|x| Point::new(x, from.y))
                .collect()
        } else {
            (0..=top)
                .filter(|&y| y != from.y)
                .map(|y| Point::new(from.x, y))
                .collect()
        }
    };
    for &seg in s.segments() {
        for pivot in [seg.p, seg.q] {
            for z in line_points(pivot, seg.is_vertical()) {
                let op = AOp::Rotate {
                    seg,
                    pivot,
                    new_far_end: z,
                };
                if let Ok(t) = op.apply(s) {
                    out.push((op, t));
                }
            }
        }
    }
    let segs: Vec<Segment> = s.segments().iter().copied().collect();
    for (i, &s1) in segs.iter().enumerate() {
        for &s2 in &segs[i + 1..] {
            if s1.is_horizontal() != s2.is_horizontal() {
                continue;
            }
            let Some(y) = [s1.p, s1.q].into_iter().find(|p| s2.has_endpoint(*p)) else {
                continue;
            };
            let perp = line_points(y, s1.is_vertical());
            for &v in perp.iter().filter(|p| *p < &y) {
                for &w in perp.iter().filter(|p| *p > &y) {
                    let op = AOp::Flip {
                        seg1: s1,
                        seg2: s2,
                        v,
                        w,
                    };
                    if let Ok(t) = op.apply(s) {
                        out.push((op, t));
                    }
                }
            }
        }
    }
    out
}

/// A single step of a flip sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Flip(Point, Point),
    Remove(Segment),
}

impl Step {
    pub fn apply(&self, s: &mut RectState, elbows: AllowedElbows) -> Result<()> {
        match *self {
            Step::Flip(a, b) => s.flip(a, b, elbows),
            Step::Remove(seg) => s.remove(seg, elbows),
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Flip(a, b) => write!(f, "flip {a} {b}"),
            Step::Remove(s) => write!(f, "remove {s}"),
        }
    }
}

/// A sequence of flips and removals starting from the initial state of its
/// input. Only flips count towards the cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipSequence {
    pub x: PermutationPointSet,
    pub steps: Vec<Step>,
    /// Elbow set the sequence is meant to be replayed under.
    pub elbows: AllowedElbows,
}

impl FlipSequence {
    pub fn new(x: PermutationPointSet, elbows: AllowedElbows) -> Self {
        FlipSequence {
            x,
            steps: Vec::new(),
            elbows,
        }
    }

    pub fn cost(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, Step::Flip(..)))
            .count()
    }

    /// Replay from the initial state, checking every step.
    pub fn replay(&self) -> Result<RectState> {
        self.replay_under(self.elbows)
    }

    pub fn replay_under(&self, elbows: AllowedElbows) -> Result<RectState> {
        self.replay_with(elbows, |_, _| Ok(()))
    }

    /// Replay and call `visit` with every step and the state after it.
    pub fn replay_with(
        &self,
        elbows: AllowedElbows,
        mut visit: impl FnMut(&Step, &RectState) -> Result<()>,
    ) -> Result<RectState> {
        let mut s = initial_state(&self.x);
        for (index, step) in self.steps.iter().enumerate() {
            step.apply(&mut s, elbows)
                .and_then(|_| visit(step, &s))
                .map_err(|e| Error::Replay {
                    index: index + 1,
                    source: Box::new(e),
                })?;
        }
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("X: {}\n", self.x);
        if self.elbows != AllowedElbows::NONE {
            out.push_str(&format!("# elbows={}\n", self.elbows));
        }
        for step in &self.steps {
            out.push_str(&step.to_string());
            out.push('\n');
        }
        out
    }

    /// Parse the `X:` header plus `flip` / `remove` lines. A `# elbows=`
    /// comment sets the replay elbow set.
    pub fn parse(text: &str) -> Result<Self> {
        let mut x = None;
        let mut elbows = AllowedElbows::NONE;
        let mut steps = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let perr = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# elbows=") {
                elbows = rest.parse().map_err(perr)?;
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("X:") {
                x = Some(parse_permutation(rest).map_err(|e| perr(e.to_string()))?);
                continue;
            }
            if x.is_none() {
                return Err(perr("expected `X: <perm>` before the first step".into()));
            }
            let mut toks = line.split_whitespace();
            let kind = toks.next().unwrap_or_default();
            let a: Point = toks
                .next()
                .ok_or_else(|| perr("missing first point".into()))?
                .parse()
                .map_err(perr)?;
            let b: Point = toks
                .next()
                .ok_or_else(|| perr("missing second point".into()))?
                .parse()
                .map_err(perr)?;
            if toks.next().is_some() {
                return Err(perr("trailing tokens".into()));
            }
            steps.push(match kind {
                "flip" => Step::Flip(a, b),
                "remove" => Step::Remove(Segment::new(a, b).map_err(|e| perr(e.to_string()))?),
                other => return Err(perr(format!("unknown step `{other}`"))),
            });
        }
        let x = x.ok_or(Error::Parse {
            line: 1,
            message: "missing `X: <perm>` header".into(),
        })?;
        Ok(FlipSequence { x, steps, elbows })
    }
}

/// Flip sequence with linear cost for a clockwise-neighbor elbow pair.
///
/// For the down pair: after the initial phase, rows are completed from the
/// top. At step `k`, every vertical segment whose top endpoint is at height
/// `k` is removed, then row `k - 1` is closed between consecutive points.
/// The up pair runs on the vertically mirrored input. The left and right
/// pairs are not supported.
pub fn linear_flip_sequence_neighbor_elbows(
    x: &PermutationPointSet,
    pair: AllowedElbows,
) -> Result<FlipSequence> {
    if pair == AllowedElbows::DOWN_PAIR {
        return linear_down(x);
    }
    if pair == AllowedElbows::UP_PAIR {
        let mirrored = linear_down(&x.mirror_y())?;
        let n = x.n();
        let steps = mirrored
            .steps
            .iter()
            .map(|st| match *st {
                Step::Flip(a, b) => Step::Flip(a.mirror_y(n), b.mirror_y(n)),
                Step::Remove(s) => Step::Remove(s.mirror_y(n)),
            })
            .collect();
        return Ok(FlipSequence {
            x: x.clone(),
            steps,
            elbows: pair,
        });
    }
    Err(Error::Unsupported(format!(
        "linear flip sequence for elbow set {pair}"
    )))
}

fn linear_down(x: &PermutationPointSet) -> Result<FlipSequence> {
    let elbows = AllowedElbows::DOWN_PAIR;
    let n = x.n() as u32;
    let mut rec = Recorder::new(x, elbows);
    initial_phase(&mut rec)?;
    for k in (1..=n + 1).rev() {
        let tops: Vec<Segment> = rec
            .state
            .vertical_segments()
            .filter(|s| s.q.y == k)
            .collect();
        for seg in tops {
            rec.remove(seg)?;
        }
        let row = k - 1;
        if row == 0 {
            break;
        }
        close_row(&mut rec, row)?;
    }
    let rest: Vec<Segment> = rec.state.vertical_segments().collect();
    for seg in rest {
        rec.remove(seg)?;
    }
    Ok(rec.finish())
}

// Flips every gap of row `y` between consecutive points that lie on a
// segment or are margin points.
fn close_row(rec: &mut Recorder, y: u32) -> Result<()> {
    let top = rec.state.n() as u32 + 1;
    let stops: Vec<u32> = (0..=top)
        .filter(|&c| {
            let p = Point::new(c, y);
            c == 0
                || c == top
                || rec.state.degree(p) > 0
                || rec.state.host(p).is_some_and(|h| h.is_vertical())
        })
        .collect();
    for w in stops.windows(2) {
        let (a, b) = (Point::new(w[0], y), Point::new(w[1], y));
        if !rec.state.row(y).any(|(lo, hi)| lo <= w[0] && w[1] <= hi) {
            rec.flip(a, b)?;
        }
    }
    Ok(())
}

/// Builds a flip sequence while keeping the current state.
pub(crate) struct Recorder {
    pub state: RectState,
    pub seq: FlipSequence,
}

impl Recorder {
    pub fn new(x: &PermutationPointSet, elbows: AllowedElbows) -> Self {
        Recorder {
            state: initial_state(x),
            seq: FlipSequence::new(x.clone(), elbows),
        }
    }

    pub fn flip(&mut self, a: Point, b: Point) -> Result<()> {
        self.state.flip(a, b, self.seq.elbows)?;
        self.seq.steps.push(Step::Flip(a, b));
        Ok(())
    }

    pub fn remove(&mut self, seg: Segment) -> Result<()> {
        self.state.remove(seg, self.seq.elbows)?;
        self.seq.steps.push(Step::Remove(seg));
        Ok(())
    }

    pub fn try_remove(&mut self, seg: Segment) -> bool {
        if self.state.can_remove(seg, self.seq.elbows) {
            self.remove(seg).expect("checked removal");
            true
        } else {
            false
        }
    }

    /// Remove vertical segments until none is removable, always taking the
    /// lowest, then leftmost, candidate.
    pub fn remove_verticals_to_fixpoint(&mut self) {
        let seeds: Vec<Segment> = self.state.vertical_segments().collect();
        self.remove_verticals_from(seeds);
    }

    /// Like [`Self::remove_verticals_to_fixpoint`], but only segments in
    /// `seeds` and verticals touching a removed segment are considered.
    pub fn remove_verticals_from(&mut self, seeds: impl IntoIterator<Item = Segment>) {
        let key = |s: Segment| (s.p.y, s.p.x, s);
        let mut work: BTreeSet<(u32, u32, Segment)> = seeds
            .into_iter()
            .filter(Segment::is_vertical)
            .map(key)
            .collect();
        while let Some((_, _, seg)) = work.pop_first() {
            if !self.state.contains_segment(&seg) || !self.try_remove(seg) {
                continue;
            }
            for end in [seg.p, seg.q] {
                for v in self.state.verticals_at(end) {
                    work.insert(key(v));
                }
            }
        }
    }

    /// Remove removable verticals touching any of `points`.
    pub fn remove_verticals_near(&mut self, points: &[Point]) {
        let seeds: Vec<Segment> = points
            .iter()
            .flat_map(|&p| self.state.verticals_at(p))
            .collect();
        self.remove_verticals_from(seeds);
    }

    pub fn finish(self) -> FlipSequence {
        self.seq
    }
}

/// Rows `n..1`: extend each input point left and right as far as a flip is
/// valid, then clear removable vertical segments.
pub(crate) fn initial_phase(rec: &mut Recorder) -> Result<()> {
    let n = rec.state.n() as u32;
    for i in (1..=n).rev() {
        let p = rec.state.input().point_at(i);
        let left = (0..p.x)
            .rev()
            .map(|c| Point::new(c, i))
            .find(|q| q.x == 0 || rec.state.on_segment(*q))
            .expect("margin point");
        rec.flip(left, p)?;
        let right = (p.x + 1..=n + 1)
            .map(|c| Point::new(c, i))
            .find(|q| q.x == n + 1 || rec.state.on_segment(*q))
            .expect("margin point");
        rec.flip(p, right)?;
        if i == n {
            rec.remove_verticals_to_fixpoint();
        } else {
            rec.remove_verticals_near(&[left, p, right]);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiameterMode {
    /// Flips cost one, removals are free.
    Flips,
    /// A-rotates and A-flips cost one, removals are free.
    AOps,
}

impl FromStr for DiameterMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "flips" => Ok(DiameterMode::Flips),
            "a_ops" | "a-ops" => Ok(DiameterMode::AOps),
            other => Err(format!("unknown mode `{other}` (flips|a_ops)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiameterReport {
    pub diam: u32,
    pub state_count: usize,
    /// Ordered pairs with no path in the chosen mode.
    pub unreachable_pairs: usize,
    /// Distance from the initial state to the nearest end state.
    pub initial_to_end: Option<u32>,
}

pub const DEFAULT_DIAMETER_LIMIT: usize = 3;
pub const DEFAULT_STATE_LIMIT: usize = 20_000;

/// The reachable state graph: every valid state reachable from the initial
/// state by flips and removals, keyed by segment set.
pub struct StateGraph {
    pub states: Vec<RectState>,
    pub index: std::collections::HashMap<Vec<Segment>, usize>,
    pub flips: Vec<Vec<usize>>,
    pub removals: Vec<Vec<usize>>,
}

impl StateGraph {
    pub fn explore(x: &PermutationPointSet, state_limit: usize) -> Result<Self> {
        let mut g = StateGraph {
            states: Vec::new(),
            index: Default::default(),
            flips: Vec::new(),
            removals: Vec::new(),
        };
        g.intern(initial_state(x));
        let mut next = 0;
        while next < g.states.len() {
            let s = g.states[next].clone();
            let mut fl = Vec::new();
            for (a, b) in s.valid_flips(AllowedElbows::NONE) {
                let t = apply_flip(&s, a, b, AllowedElbows::NONE)?;
                fl.push(g.intern(t));
            }
            let mut rm = Vec::new();
            for seg in s.removable_segments(AllowedElbows::NONE) {
                let t = remove_segment(&s, seg, AllowedElbows::NONE)?;
                rm.push(g.intern(t));
            }
            g.flips.push(fl);
            g.removals.push(rm);
            if g.states.len() > state_limit {
                return Err(Error::LimitExceeded {
                    what: "reachable states",
                    actual: g.states.len(),
                    limit: state_limit,
                    flag: "--state-limit",
                });
            }
            next += 1;
        }
        Ok(g)
    }

    fn intern(&mut self, s: RectState) -> usize {
        let key = s.canonical();
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.states.len();
        self.index.insert(key, i);
        self.states.push(s);
        i
    }

    pub fn id_of(&self, s: &RectState) -> Option<usize> {
        self.index.get(&s.canonical()).copied()
    }

    /// Weighted adjacency (target, cost) for a mode.
    pub fn edges(&self, mode: DiameterMode) -> Result<Vec<Vec<(usize, u32)>>> {
        let mut adj = Vec::with_capacity(self.states.len());
        for (i, s) in self.states.iter().enumerate() {
            let mut e: Vec<(usize, u32)> = self.removals[i].iter().map(|&t| (t, 0)).collect();
            match mode {
                DiameterMode::Flips => e.extend(self.flips[i].iter().map(|&t| (t, 1))),
                DiameterMode::AOps => {
                    for (op, t) in enumerate_a_ops(s) {
                        let j = self.id_of(&t).ok_or_else(|| {
                            Error::Assertion(format!("{op:?} leaves the reachable state set"))
                        })?;
                        e.push((j, 1));
                    }
                }
            }
            adj.push(e);
        }
        Ok(adj)
    }
}

/// 0-1 BFS distances from `src`.
pub fn zero_one_bfs(adj: &[Vec<(usize, u32)>], src: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    let mut dq = std::collections::VecDeque::new();
    dist[src] = Some(0);
    dq.push_back(src);
    while let Some(u) = dq.pop_front() {
        let du = dist[u].expect("queued nodes have a distance");
        for &(v, w) in &adj[u] {
            let nd = du + w;
            if dist[v].is_none_or(|d| nd < d) {
                dist[v] = Some(nd);
                if w == 0 {
                    dq.push_front(v);
                } else {
                    dq.push_back(v);
                }
            }
        }
    }
    dist
}

/// Largest finite distance between two states reachable from the initial
/// state of `x`.
pub fn flip_diameter_bfs(
    x: &PermutationPointSet,
    mode: DiameterMode,
    n_limit: usize,
    state_limit: usize,
) -> Result<DiameterReport> {
    if x.n() > n_limit {
        return Err(Error::LimitExceeded {
            what: "n",
            actual: x.n(),
            limit: n_limit,
            flag: "--diameter-limit",
        });
    }
    let g = StateGraph::explore(x, state_limit)?;
    let adj = g.edges(mode)?;
    let mut diam = 0;
    let mut unreachable = 0;
    let mut initial_to_end = None;
    for src in 0..g.states.len() {
        let dist = zero_one_bfs(&adj, src);
        for d in &dist {
            match d {
                Some(d) => diam = diam.max(*d),
                None => unreachable += 1,
            }
        }
        if src == 0 {
            initial_to_end = g
                .states
                .iter()
                .zip(&dist)
                .filter(|(s, _)| s.is_end_state())
                .filter_map(|(_, d)| *d)
                .min();
        }
    }
    Ok(DiameterReport {
        diam,
        state_count: g.states.len(),
        unreachable_pairs: unreachable,
        initial_to_end,
    })
}

/// Minimum number of flips from the initial state to an end state, by
/// iterative deepening over flips with removals applied freely between them.
pub fn opt_rect_search(
    x: &PermutationPointSet,
    elbows: AllowedElbows,
    max_depth: usize,
) -> Result<Option<usize>> {
    fn removal_closure(s: &RectState, elbows: AllowedElbows) -> Vec<RectState> {
        let mut seen: BTreeSet<Vec<Segment>> = BTreeSet::new();
        let mut stack = vec![s.clone()];
        let mut out = Vec::new();
        while let Some(t) = stack.pop() {
            if !seen.insert(t.canonical()) {
                continue;
            }
            for seg in t.removable_segments(elbows) {
                let mut u = t.clone();
                u.remove(seg, elbows).expect("removable");
                stack.push(u);
            }
            out.push(t);
        }
        out
    }

    fn search(
        s: &RectState,
        elbows: AllowedElbows,
        budget: usize,
        memo: &mut std::collections::HashMap<Vec<Segment>, usize>,
    ) -> bool {
        // memo holds the largest budget already known to fail
        if memo.get(&s.canonical()).is_some_and(|&b| b >= budget) {
            return false;
        }
        for t in removal_closure(s, elbows) {
            if t.is_end_state() {
                return true;
            }
            if budget > 0 {
                for (a, b) in t.valid_flips(elbows) {
                    let mut u = t.clone();
                    u.flip(a, b, elbows).expect("valid flip");
                    if search(&u, elbows, budget - 1, memo) {
                        return true;
                    }
                }
            }
        }
        memo.insert(s.canonical(), budget);
        false
    }

    let start = initial_state(x);
    let mut memo = std::collections::HashMap::new();
    for depth in 0..=max_depth {
        if search(&start, elbows, depth, &mut memo) {
            return Ok(Some(depth));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_permutation_point_set;

    fn perm(v: &[u32]) -> PermutationPointSet {
        make_permutation_point_set(v).unwrap()
    }

    fn pt(x: u32, y: u32) -> Point {
        Point::new(x, y)
    }

    fn seg(a: (u32, u32), b: (u32, u32)) -> Segment {
        Segment::new(pt(a.0, a.1), pt(b.0, b.1)).unwrap()
    }

    #[test]
    fn initial_states() {
        let s = initial_state(&perm(&[1]));
        assert_eq!(
            s.canonical(),
            vec![seg((1, 0), (1, 1)), seg((1, 1), (1, 2))]
        );
        let s = initial_state(&perm(&[2, 6, 4, 3, 1, 5]));
        assert_eq!(s.segments().len(), 12);
        assert_eq!(s.points().len(), 6 + 24);
        assert!(s.violations(AllowedElbows::NONE).is_empty());
        assert!(!s.is_end_state());
    }

    #[test]
    fn single_point_flips() {
        let e = AllowedElbows::NONE;
        let s0 = initial_state(&perm(&[1]));
        let s1 = apply_flip(&s0, pt(0, 1), pt(1, 1), e).unwrap();
        assert_eq!(s1.degree(pt(1, 1)), 3);
        assert!(s1.violations(e).is_empty());
        let s2 = apply_flip(&s1, pt(1, 1), pt(2, 1), e).unwrap();
        let s3 = remove_segment(&s2, seg((1, 0), (1, 1)), e).unwrap();
        let s4 = remove_segment(&s3, seg((1, 1), (1, 2)), e).unwrap();
        assert!(s4.is_end_state());
        // the input is untouched
        assert_eq!(s0, initial_state(&perm(&[1])));
        let flips = enumerate_valid_flips(&s0, e);
        assert!(flips.contains(&(pt(0, 1), pt(1, 1))));
        assert!(flips.contains(&(pt(1, 1), pt(2, 1))));
    }

    #[test]
    fn crossing_flip_rejected() {
        let s = initial_state(&perm(&[1, 2]));
        let err = apply_flip(&s, pt(0, 2), pt(3, 2), AllowedElbows::NONE).unwrap_err();
        match err {
            Error::InvalidState(v) => {
                assert!(v.iter().any(|v| matches!(v, Violation::Crossing(..))
                    || matches!(v, Violation::PointInInterior { .. })))
            }
            other => panic!("{other}"),
        }
        // (1,0)-(1,1) stub crosses row 1? no: flip row 1 across column 2 which spans 0..3
        let err = apply_flip(&s, pt(1, 1), pt(3, 1), AllowedElbows::NONE).unwrap_err();
        assert!(
            matches!(err, Error::InvalidState(ref v) if v.iter().any(|v| matches!(v, Violation::Crossing(..))))
        );
        assert!(apply_flip(&s, pt(1, 1), pt(2, 2), AllowedElbows::NONE).is_err());
    }

    #[test]
    fn removal_needs_extensions() {
        let e = AllowedElbows::NONE;
        let s0 = initial_state(&perm(&[1]));
        let s1 = apply_flip(&s0, pt(0, 1), pt(1, 1), e).unwrap();
        // (1,1) keeps left and up: an elbow
        let err = remove_segment(&s1, seg((1, 0), (1, 1)), e).unwrap_err();
        assert!(
            matches!(err, Error::InvalidState(ref v) if matches!(v[0], Violation::Elbow { orientation: ElbowOrientation::UL, .. }))
        );
        // allowed once UL elbows are allowed
        assert!(remove_segment(&s1, seg((1, 0), (1, 1)), AllowedElbows::CLASS_M).is_ok());
        assert!(remove_segment(&s1, seg((1, 0), (1, 1)), AllowedElbows::CLASS_P).is_err());
    }

    #[test]
    fn elbow_shape_reported() {
        // (1,1) with only down and right arms
        let s = RectState::from_segments(perm(&[1]), [seg((1, 0), (1, 1)), seg((1, 1), (2, 1))])
            .unwrap();
        let v = s.violations(AllowedElbows::NONE);
        assert_eq!(
            v,
            vec![Violation::Elbow {
                point: pt(1, 1),
                orientation: ElbowOrientation::DR
            }]
        );
        assert!(s.violations(AllowedElbows::ONLY_DR).is_empty());
        // crossing segments
        let s = RectState::from_segments(perm(&[1, 2]), [seg((0, 1), (3, 1)), seg((2, 0), (2, 2))])
            .unwrap();
        assert!(s
            .violations(AllowedElbows::NONE)
            .iter()
            .any(|v| matches!(v, Violation::Crossing(..))));
    }

    #[test]
    fn end_state_needs_full_rows() {
        let x = perm(&[1, 2]);
        let full = RectState::from_segments(
            x.clone(),
            [
                seg((0, 1), (1, 1)),
                seg((1, 1), (3, 1)),
                seg((0, 2), (2, 2)),
                seg((2, 2), (3, 2)),
            ],
        )
        .unwrap();
        assert!(full.is_end_state());
        let gap = RectState::from_segments(
            x,
            [
                seg((0, 1), (1, 1)),
                seg((1, 1), (3, 1)),
                seg((0, 2), (2, 2)),
            ],
        )
        .unwrap();
        assert!(!gap.is_end_state());
    }

    #[test]
    fn a_rotate_and_a_flip() {
        let e = AllowedElbows::NONE;
        let s = initial_state(&perm(&[1]));
        // both verticals to both horizontals in one A-flip
        let t = apply_a_flip(
            &s,
            seg((1, 0), (1, 1)),
            seg((1, 1), (1, 2)),
            pt(0, 1),
            pt(2, 1),
        )
        .unwrap();
        assert!(t.is_end_state());
        // rotating onto a parallel line is rejected
        assert!(apply_a_rotate(&s, seg((1, 1), (1, 2)), pt(1, 1), pt(1, 0)).is_err());
        // a T-junction stub rotates
        let s3 = apply_flip(&s, pt(0, 1), pt(1, 1), e).unwrap();
        let r = apply_a_rotate(&s3, seg((1, 1), (1, 2)), pt(1, 1), pt(2, 1)).unwrap();
        assert_eq!(
            r.canonical(),
            vec![
                seg((0, 1), (1, 1)),
                seg((1, 0), (1, 1)),
                seg((1, 1), (2, 1))
            ]
        );
    }

    #[test]
    fn flip_sequence_text() {
        let x = perm(&[2, 1]);
        let seq = linear_flip_sequence_neighbor_elbows(&x, AllowedElbows::DOWN_PAIR).unwrap();
        let parsed = FlipSequence::parse(&seq.to_text()).unwrap();
        assert_eq!(parsed, seq);
        assert!(seq.replay().unwrap().is_end_state());
        assert!(matches!(
            FlipSequence::parse("X: 1\nflip 0,1 x,1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn linear_sequences_reach_end() {
        for v in [&[1u32][..], &[2, 1], &[2, 6, 4, 3, 1, 5], &[3, 1, 4, 2]] {
            let x = perm(v);
            for pair in [AllowedElbows::DOWN_PAIR, AllowedElbows::UP_PAIR] {
                let seq = linear_flip_sequence_neighbor_elbows(&x, pair).unwrap();
                let end = seq.replay().unwrap();
                assert!(end.is_end_state(), "{v:?} {pair}");
                assert!(seq.cost() <= 6 * x.n(), "{v:?} cost {}", seq.cost());
            }
        }
        assert!(matches!(
            linear_flip_sequence_neighbor_elbows(&perm(&[1]), AllowedElbows::LEFT_PAIR),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn tiny_diameter() {
        let x = perm(&[1]);
        let r = flip_diameter_bfs(&x, DiameterMode::Flips, 3, 1000).unwrap();
        assert_eq!(r.state_count, 7);
        assert_eq!(r.diam, 2);
        assert_eq!(r.initial_to_end, Some(2));
        let a = flip_diameter_bfs(&x, DiameterMode::AOps, 3, 1000).unwrap();
        assert_eq!(a.initial_to_end, Some(1));
        assert!(r.diam <= 2 * a.diam);
        assert_eq!(
            opt_rect_search(&x, AllowedElbows::NONE, 4).unwrap(),
            Some(2)
        );
    }

    #[test]
    fn elbow_parsing() {
        assert_eq!(
            "none".parse::<AllowedElbows>().unwrap(),
            AllowedElbows::NONE
        );
        assert_eq!(
            "ur,dl".parse::<AllowedElbows>().unwrap(),
            AllowedElbows::CLASS_P
        );
        assert_eq!(
            "down".parse::<AllowedElbows>().unwrap(),
            AllowedElbows::DOWN_PAIR
        );
        assert_eq!(AllowedElbows::CLASS_M.to_string(), "ul,dr");
        assert_eq!(AllowedElbows::ONLY_DR.mirror_x(), AllowedElbows::ONLY_DL);
    }
}
