//! Monotone trees on a permutation point set and the edge-flip relaxation
//! from the treap to the path.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{parse_permutation, PermutationPointSet, Point};

/// A tree on the input points rooted at the lowest point, with every edge
/// going upward. Nodes are identified by their row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneTree {
    base: PermutationPointSet,
    // parent[row], 0 for the root; index 0 unused
    parent: Vec<u32>,
}

impl MonotoneTree {
    /// Build from a parent map given on rows. Validates monotonicity.
    pub fn from_parents(base: PermutationPointSet, parent: Vec<u32>) -> Result<Self> {
        let n = base.n();
        if parent.len() != n + 1 {
            return Err(Error::InvalidOperation(format!(
                "expected {} parent entries",
                n + 1
            )));
        }
        for (row, &p) in parent.iter().enumerate().skip(2) {
            if p == 0 || p as usize >= row {
                return Err(Error::InvalidOperation(format!(
                    "node {} has parent row {p}, not a lower point",
                    base.point_at(row as u32)
                )));
            }
        }
        if parent[1] != 0 {
            return Err(Error::InvalidOperation(
                "the lowest point must be the root".into(),
            ));
        }
        Ok(MonotoneTree { base, parent })
    }

    pub fn base(&self) -> &PermutationPointSet {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn point(&self, row: u32) -> Point {
        self.base.point_at(row)
    }

    /// Parent row of `row`, `None` for the root.
    pub fn parent(&self, row: u32) -> Option<u32> {
        match self.parent[row as usize] {
            0 => None,
            p => Some(p),
        }
    }

    pub fn parent_point(&self, p: Point) -> Option<Point> {
        self.parent(p.y).map(|r| self.point(r))
    }

    /// Children of `row` sorted by x.
    pub fn children(&self, row: u32) -> Vec<u32> {
        let mut out: Vec<u32> = (1..=self.n() as u32)
            .filter(|&c| self.parent[c as usize] == row)
            .collect();
        out.sort_by_key(|&c| self.base.x_at(c));
        out
    }

    fn all_children(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.n() + 1];
        for c in 2..=self.n() as u32 {
            out[self.parent[c as usize] as usize].push(c);
        }
        for list in &mut out {
            list.sort_by_key(|&c| self.base.x_at(c));
        }
        out
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (2..=self.n() as u32).map(|c| (self.point(self.parent[c as usize]), self.point(c)))
    }

    pub fn depth(&self, row: u32) -> u32 {
        let mut d = 0;
        let mut r = row;
        while let Some(p) = self.parent(r) {
            d += 1;
            r = p;
        }
        d
    }

    pub fn subtree_sizes(&self) -> Vec<u64> {
        let mut size = vec![1u64; self.n() + 1];
        size[0] = 0;
        // parents have smaller rows
        for c in (2..=self.n()).rev() {
            let p = self.parent[c] as usize;
            size[p] += size[c];
        }
        size
    }

    pub fn is_path(&self) -> bool {
        (2..=self.n()).all(|c| self.parent[c] as usize == c - 1)
    }

    /// In-order keys respect the tree and every node has at most one child
    /// on each side.
    pub fn is_search_tree(&self) -> bool {
        let kids = self.all_children();
        fn check(t: &MonotoneTree, kids: &[Vec<u32>], row: u32, lo: u32, hi: u32) -> bool {
            let x = t.base.x_at(row);
            if x <= lo || x >= hi {
                return false;
            }
            let list = &kids[row as usize];
            let left: Vec<u32> = list
                .iter()
                .copied()
                .filter(|&c| t.base.x_at(c) < x)
                .collect();
            let right: Vec<u32> = list
                .iter()
                .copied()
                .filter(|&c| t.base.x_at(c) > x)
                .collect();
            left.len() <= 1
                && right.len() <= 1
                && left.iter().all(|&c| check(t, kids, c, lo, x))
                && right.iter().all(|&c| check(t, kids, c, x, hi))
        }
        check(self, &kids, 1, 0, self.n() as u32 + 1)
    }
}

/// `(a -> b)`: `b` leaves its parent `r` and becomes a child of `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeFlip {
    pub a: Point,
    pub b: Point,
    pub r: Point,
}

impl fmt::Display for EdgeFlip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "eflip {} {}", self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialReport {
    pub h_total: u64,
    pub w_total: u64,
    pub depth_sum: u64,
    pub h_log: f64,
    pub w_log: f64,
}

pub fn build_treap(x: &PermutationPointSet) -> MonotoneTree {
    let n = x.n();
    let mut parent = vec![0u32; n + 1];
    // Cartesian tree over x-order with minimum row on top
    let mut stack: Vec<u32> = Vec::new();
    for key in 1..=n as u32 {
        let row = x.row_of(key);
        let mut last = 0;
        while let Some(&top) = stack.last() {
            if top > row {
                last = top;
                stack.pop();
            } else {
                break;
            }
        }
        if last != 0 {
            parent[last as usize] = row;
        }
        if let Some(&top) = stack.last() {
            parent[row as usize] = top;
        }
        stack.push(row);
    }
    parent[1] = 0;
    MonotoneTree {
        base: x.clone(),
        parent,
    }
}

pub fn build_path(x: &PermutationPointSet) -> MonotoneTree {
    let n = x.n();
    let parent = (0..=n as u32).map(|r| r.saturating_sub(1)).collect();
    MonotoneTree {
        base: x.clone(),
        parent,
    }
}

/// Every valid edge-flip, ordered by `(r.x, a.x, b.x)`.
pub fn valid_edge_flips(t: &MonotoneTree) -> Vec<EdgeFlip> {
    let kids = t.all_children();
    let mut out = Vec::new();
    for (r, list) in kids.iter().enumerate().skip(1) {
        for w in list.windows(2) {
            let (a, b) = if w[0] < w[1] {
                (w[0], w[1])
            } else {
                (w[1], w[0])
            };
            out.push(EdgeFlip {
                a: t.point(a),
                b: t.point(b),
                r: t.point(r as u32),
            });
        }
    }
    out.sort_by_key(|f| (f.r.x, f.a.x, f.b.x));
    out
}

pub fn check_edge_flip(t: &MonotoneTree, f: &EdgeFlip) -> Result<()> {
    let bad = |why: &str| Err(Error::InvalidEdgeFlip(format!("{f}: {why}")));
    if !t.base.contains(f.a) || !t.base.contains(f.b) {
        return bad("endpoint is not an input point");
    }
    let Some(r) = t.parent(f.b.y) else {
        return bad("b is the root");
    };
    if t.parent(f.a.y) != Some(r) {
        return bad("a and b are not siblings");
    }
    if f.r != t.point(r) {
        return bad("recorded parent does not match");
    }
    if f.a.y >= f.b.y {
        return bad("a is not below b");
    }
    let kids = t.children(r);
    let ia = kids.iter().position(|&c| c == f.a.y).expect("child");
    let ib = kids.iter().position(|&c| c == f.b.y).expect("child");
    if ia.abs_diff(ib) != 1 {
        return bad("a and b are not x-neighbors");
    }
    Ok(())
}

pub fn apply_edge_flip(t: &MonotoneTree, f: &EdgeFlip) -> Result<MonotoneTree> {
    check_edge_flip(t, f)?;
    let mut out = t.clone();
    out.parent[f.b.y as usize] = f.a.y;
    Ok(out)
}

pub fn potentials(t: &MonotoneTree) -> PotentialReport {
    let mut r = PotentialReport {
        h_total: 0,
        w_total: 0,
        depth_sum: 0,
        h_log: 0.0,
        w_log: 0.0,
    };
    for (u, v) in t.edges() {
        let h = u.y.abs_diff(v.y) as u64;
        let w = u.x.abs_diff(v.x) as u64;
        r.h_total += h;
        r.w_total += w;
        r.h_log += (h as f64).log2();
        r.w_log += (w as f64).log2();
    }
    let mut depth = vec![0u64; t.n() + 1];
    for c in 2..=t.n() {
        depth[c] = depth[t.parent[c] as usize] + 1;
        r.depth_sum += depth[c];
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicPolicy {
    MaxHeightDrop,
    MaxWidthGain,
    MaxDepthGain,
    Random(u64),
}

impl HeuristicPolicy {
    pub fn deterministic() -> [HeuristicPolicy; 3] {
        [Self::MaxHeightDrop, Self::MaxWidthGain, Self::MaxDepthGain]
    }
}

impl fmt::Display for HeuristicPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MaxHeightDrop => f.write_str("max_height_drop"),
            Self::MaxWidthGain => f.write_str("max_width_gain"),
            Self::MaxDepthGain => f.write_str("max_depth_gain"),
            Self::Random(s) => write!(f, "random:{s}"),
        }
    }
}

impl FromStr for HeuristicPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.replace('-', "_");
        match s.as_str() {
            "max_height_drop" => Ok(Self::MaxHeightDrop),
            "max_width_gain" => Ok(Self::MaxWidthGain),
            "max_depth_gain" => Ok(Self::MaxDepthGain),
            "random" => Ok(Self::Random(0)),
            other => match other.strip_prefix("random:") {
                Some(seed) => seed.parse().map(Self::Random).map_err(|e| format!("bad seed: {e}")),
                None => Err(format!(
                    "unknown policy `{other}` (max_height_drop|max_width_gain|max_depth_gain|random[:seed])"
                )),
            },
        }
    }
}

/// A relaxation sequence for an input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeFlipSequence {
    pub x: PermutationPointSet,
    pub flips: Vec<EdgeFlip>,
}

impl EdgeFlipSequence {
    pub fn len(&self) -> usize {
        self.flips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flips.is_empty()
    }

    /// Apply every flip starting from the treap; returns the final tree.
    pub fn replay(&self) -> Result<MonotoneTree> {
        let mut t = build_treap(&self.x);
        for (index, f) in self.flips.iter().enumerate() {
            t = apply_edge_flip(&t, f).map_err(|e| Error::Replay {
                index: index + 1,
                source: Box::new(e),
            })?;
        }
        Ok(t)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("X: {}\n", self.x);
        for f in &self.flips {
            out.push_str(&format!("{f}\n"));
        }
        out
    }

    /// Parse `X:` plus `eflip` lines. The old parent of each flip is
    /// recovered by replaying from the treap.
    pub fn parse(text: &str) -> Result<Self> {
        let mut x = None;
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let perr = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("X:") {
                x = Some(parse_permutation(rest).map_err(|e| perr(e.to_string()))?);
                continue;
            }
            let mut toks = line.split_whitespace();
            if toks.next() != Some("eflip") {
                return Err(perr("expected `eflip a.x,a.y b.x,b.y`".into()));
            }
            let a: Point = toks
                .next()
                .ok_or_else(|| perr("missing a".into()))?
                .parse()
                .map_err(perr)?;
            let b: Point = toks
                .next()
                .ok_or_else(|| perr("missing b".into()))?
                .parse()
                .map_err(perr)?;
            if toks.next().is_some() {
                return Err(perr("trailing tokens".into()));
            }
            pairs.push((idx + 1, a, b));
        }
        let x = x.ok_or(Error::Parse {
            line: 1,
            message: "missing `X: <perm>` header".into(),
        })?;
        let mut t = build_treap(&x);
        let mut flips = Vec::new();
        for (line, a, b) in pairs {
            if !x.contains(b) {
                return Err(Error::Parse {
                    line,
                    message: format!("{b} is not an input point"),
                });
            }
            let r = t.parent_point(b).ok_or(Error::Parse {
                line,
                message: format!("{b} is the root"),
            })?;
            let f = EdgeFlip { a, b, r };
            t = apply_edge_flip(&t, &f).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            flips.push(f);
        }
        Ok(EdgeFlipSequence { x, flips })
    }
}

/// Greedy relaxation from the treap to the path.
pub fn run_heuristic(x: &PermutationPointSet, policy: HeuristicPolicy) -> Result<EdgeFlipSequence> {
    let mut t = build_treap(x);
    let mut rng = match policy {
        HeuristicPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut flips = Vec::new();
    loop {
        let cands = valid_edge_flips(&t);
        if cands.is_empty() {
            break;
        }
        let chosen = match policy {
            HeuristicPolicy::Random(_) => {
                let rng = rng.as_mut().expect("seeded");
                cands[rng.gen_range(0..cands.len())]
            }
            _ => {
                let sizes = if policy == HeuristicPolicy::MaxDepthGain {
                    t.subtree_sizes()
                } else {
                    Vec::new()
                };
                let score = |f: &EdgeFlip| -> i64 {
                    match policy {
                        HeuristicPolicy::MaxHeightDrop => f.a.y as i64 - f.r.y as i64,
                        HeuristicPolicy::MaxWidthGain => {
                            f.a.x.abs_diff(f.b.x) as i64 - f.r.x.abs_diff(f.b.x) as i64
                        }
                        _ => sizes[f.b.y as usize] as i64,
                    }
                };
                // candidates are already in tie-break order; keep the first maximum
                let mut best = cands[0];
                let mut best_score = score(&best);
                for f in &cands[1..] {
                    let s = score(f);
                    if s > best_score {
                        best = *f;
                        best_score = s;
                    }
                }
                best
            }
        };
        t = apply_edge_flip(&t, &chosen)?;
        flips.push(chosen);
    }
    if !t.is_path() {
        return Err(Error::Assertion(
            "relaxation stopped before reaching the path".into(),
        ));
    }
    Ok(EdgeFlipSequence {
        x: x.clone(),
        flips,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_permutation_point_set;

    fn perm(v: &[u32]) -> PermutationPointSet {
        make_permutation_point_set(v).unwrap()
    }

    fn edges_by_x(t: &MonotoneTree) -> Vec<(u32, u32)> {
        let mut e: Vec<(u32, u32)> = t.edges().map(|(u, v)| (u.x, v.x)).collect();
        e.sort();
        e
    }

    #[test]
    fn treap_of_six_points() {
        let x = perm(&[2, 6, 4, 3, 1, 5]);
        let t = build_treap(&x);
        assert_eq!(edges_by_x(&t), vec![(2, 1), (2, 6), (4, 3), (4, 5), (6, 4)]);
        assert!(t.is_search_tree());
        assert_eq!(potentials(&t).h_total, 10);
        assert!(build_treap(&perm(&[1, 2, 3])).is_path());
        assert!(build_treap(&perm(&[2, 1])).is_path());
    }

    #[test]
    fn valid_flips_of_treap() {
        let x = perm(&[2, 6, 4, 3, 1, 5]);
        let t = build_treap(&x);
        let f = valid_edge_flips(&t);
        assert_eq!(f.len(), 2);
        assert_eq!(
            (f[0].a, f[0].b, f[0].r),
            (Point::new(6, 2), Point::new(1, 5), Point::new(2, 1))
        );
        assert_eq!((f[1].a, f[1].b), (Point::new(3, 4), Point::new(5, 6)));
        let before = potentials(&t);
        let t2 = apply_edge_flip(&t, &f[0]).unwrap();
        let after = potentials(&t2);
        assert_eq!(after.h_total, 9);
        assert_eq!(after.w_total, before.w_total + 4);
        assert_eq!(after.depth_sum, before.depth_sum + 1);
        assert!(valid_edge_flips(&build_path(&x)).is_empty());
        assert!(apply_edge_flip(&build_path(&x), &f[0]).is_err());
    }

    #[test]
    fn path_potentials() {
        let x = perm(&[2, 6, 4, 3, 1, 5]);
        let p = potentials(&build_path(&x));
        assert_eq!(p.h_total, 5);
        assert_eq!(p.depth_sum, 15);
        assert_eq!(potentials(&build_path(&perm(&[1, 2, 3, 4]))).w_log, 0.0);
    }

    #[test]
    fn heuristics_reach_path() {
        let x = perm(&[2, 6, 4, 3, 1, 5]);
        let h = potentials(&build_treap(&x)).h_total - 5;
        for p in [
            HeuristicPolicy::MaxHeightDrop,
            HeuristicPolicy::MaxWidthGain,
            HeuristicPolicy::MaxDepthGain,
            HeuristicPolicy::Random(7),
        ] {
            let seq = run_heuristic(&x, p).unwrap();
            assert!(seq.len() as u64 <= h);
            assert!(seq.replay().unwrap().is_path());
            assert_eq!(EdgeFlipSequence::parse(&seq.to_text()).unwrap(), seq);
        }
        assert!(
            run_heuristic(&perm(&[1, 2, 3]), HeuristicPolicy::MaxHeightDrop)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn policy_names() {
        assert_eq!(
            "max-depth-gain".parse::<HeuristicPolicy>().unwrap(),
            HeuristicPolicy::MaxDepthGain
        );
        assert_eq!(
            "random:5".parse::<HeuristicPolicy>().unwrap(),
            HeuristicPolicy::Random(5)
        );
        assert!("fastest".parse::<HeuristicPolicy>().is_err());
    }
}
