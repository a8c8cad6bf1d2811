//! Independent-rectangle lower bounds and small Manhattan networks.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::geometry::{rect_is_empty, PermutationPointSet, Point, Rect};
use crate::satisfied::{brute_force_opt, connects_input_pairs, OptPredicate, PointSuperset, Sign};

/// A pair of input points spanning a rectangle with no other input point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnsatisfiedRectangle {
    pub a: Point,
    pub b: Point,
}

impl UnsatisfiedRectangle {
    pub fn rect(&self) -> Rect {
        Rect::spanned(self.a, self.b)
    }

    pub fn sign(&self) -> Sign {
        if Sign::Plus.covers(self.a, self.b) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// No corner of either rectangle lies strictly inside the other.
    pub fn independent_of(&self, other: &UnsatisfiedRectangle) -> bool {
        let (r, s) = (self.rect(), other.rect());
        !r.corners().iter().any(|c| s.contains_strictly(*c))
            && !s.corners().iter().any(|c| r.contains_strictly(*c))
    }
}

impl fmt::Display for UnsatisfiedRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) ({})", self.a, self.b)
    }
}

pub fn unsatisfied_rectangles(x: &PermutationPointSet, sign: Sign) -> Vec<UnsatisfiedRectangle> {
    let pts: Vec<Point> = x.points().collect();
    let set = x.point_set();
    let mut out = Vec::new();
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            if sign.covers(a, b) && rect_is_empty(&set, a, b) {
                out.push(UnsatisfiedRectangle { a, b });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MisMode {
    Exact,
    /// Widest-first maximal set; a lower bound on the maximum.
    Greedy,
}

#[derive(Debug, Clone)]
pub struct IndependentSet {
    pub rects: Vec<UnsatisfiedRectangle>,
    pub sign: Sign,
    pub exact: bool,
}

impl IndependentSet {
    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn is_independent(&self) -> bool {
        self.rects
            .iter()
            .enumerate()
            .all(|(i, r)| self.rects[i + 1..].iter().all(|s| r.independent_of(s)))
    }
}

pub const DEFAULT_MIS_LIMIT: usize = 24;

pub fn max_independent_rectangles(
    x: &PermutationPointSet,
    sign: Sign,
    mode: MisMode,
    limit: usize,
) -> Result<IndependentSet> {
    let rects = unsatisfied_rectangles(x, sign);
    match mode {
        MisMode::Greedy => {
            let mut order = rects.clone();
            order.sort_by_key(|r| {
                let rc = r.rect();
                (
                    std::cmp::Reverse(rc.width()),
                    std::cmp::Reverse(rc.height()),
                    *r,
                )
            });
            let mut chosen: Vec<UnsatisfiedRectangle> = Vec::new();
            for r in order {
                if chosen.iter().all(|c| c.independent_of(&r)) {
                    chosen.push(r);
                }
            }
            Ok(IndependentSet {
                rects: chosen,
                sign,
                exact: false,
            })
        }
        MisMode::Exact => {
            let cap = limit.min(64);
            if rects.len() > cap {
                return Err(Error::LimitExceeded {
                    what: "unsatisfied rectangles",
                    actual: rects.len(),
                    limit: cap,
                    flag: "--mis-limit",
                });
            }
            let m = rects.len();
            let mut conflict = vec![0u64; m];
            for i in 0..m {
                for j in i + 1..m {
                    if !rects[i].independent_of(&rects[j]) {
                        conflict[i] |= 1 << j;
                        conflict[j] |= 1 << i;
                    }
                }
            }
            let all = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
            let mut best = 0u64;
            mis(&conflict, all, 0, &mut best);
            let chosen = (0..m)
                .filter(|&i| best >> i & 1 == 1)
                .map(|i| rects[i])
                .collect();
            Ok(IndependentSet {
                rects: chosen,
                sign,
                exact: true,
            })
        }
    }
}

// Branch and bound over the conflict graph; `best` keeps the largest set.
fn mis(conflict: &[u64], cand: u64, current: u64, best: &mut u64) {
    if current.count_ones() + cand.count_ones() <= best.count_ones() {
        return;
    }
    if cand == 0 {
        *best = current;
        return;
    }
    let v = cand.trailing_zeros() as usize;
    let bit = 1u64 << v;
    mis(conflict, cand & !bit & !conflict[v], current | bit, best);
    if conflict[v] & cand != 0 {
        mis(conflict, cand & !bit, current, best);
    }
}

#[derive(Debug, Clone)]
pub struct MirReport {
    pub i_size: usize,
    pub mir: Ratio<i64>,
    pub set: IndependentSet,
}

/// `|I|/2 + n` with `I` a maximum independent set of unsatisfied rectangles.
pub fn mir(x: &PermutationPointSet, limit: usize) -> Result<MirReport> {
    let set = max_independent_rectangles(x, Sign::Both, MisMode::Exact, limit)?;
    let i_size = set.len();
    Ok(MirReport {
        i_size,
        mir: Ratio::new(i_size as i64, 2) + Ratio::from_integer(x.n() as i64),
        set,
    })
}

/// Whether every pair of input points is joined by a manhattan path in `Y`.
pub fn is_manhattan_network(x: &PermutationPointSet, ys: &BTreeSet<Point>) -> Result<bool> {
    if x.points().any(|p| !ys.contains(&p)) {
        return Err(Error::NotSuperset);
    }
    Ok(connects_input_pairs(x, ys, Sign::Both))
}

#[derive(Debug, Clone)]
pub struct GkksNetwork {
    pub network: PointSuperset,
    /// Splitting column of every recursion node, in preorder.
    pub columns: Vec<u32>,
}

/// Recursive median split: each subproblem projects its points onto its
/// splitting column, then recurses on the points strictly left and right.
pub fn gkks_network(x: &PermutationPointSet) -> GkksNetwork {
    fn rec(pts: &[Point], out: &mut BTreeSet<Point>, columns: &mut Vec<u32>) {
        let m = pts.len();
        if m < 2 {
            return;
        }
        let col = if m % 2 == 1 {
            pts[m / 2].x
        } else {
            (pts[m / 2 - 1].x + pts[m / 2].x) / 2
        };
        columns.push(col);
        out.extend(pts.iter().map(|p| Point::new(col, p.y)));
        let split = pts.partition_point(|p| p.x < col);
        let right = pts.partition_point(|p| p.x <= col);
        rec(&pts[..split], out, columns);
        rec(&pts[right..], out, columns);
    }
    let mut pts: Vec<Point> = x.points().collect();
    pts.sort();
    let mut out = x.point_set();
    let mut columns = Vec::new();
    rec(&pts, &mut out, &mut columns);
    GkksNetwork {
        network: PointSuperset::new(x.clone(), out).expect("projections stay in the grid"),
        columns,
    }
}

#[derive(Debug, Clone)]
pub struct SignedBoundReport {
    pub opt_m_plus: usize,
    pub opt_m_minus: usize,
    pub opt_m: usize,
    pub i_plus: usize,
    pub i_minus: usize,
    pub mir: Ratio<i64>,
}

/// Checks `OPT^M_s >= n + |I_s|` for both signs and `OPT^M >= MIR` by
/// exhaustive search.
pub fn verify_signed_mn_lower_bound(
    x: &PermutationPointSet,
    opt_limit: usize,
    mis_limit: usize,
) -> Result<SignedBoundReport> {
    let n = x.n();
    let opt = |sign| {
        brute_force_opt(x, sign, OptPredicate::ManhattanNetwork, opt_limit).map(|r| r.optimum)
    };
    let i = |sign| max_independent_rectangles(x, sign, MisMode::Exact, mis_limit).map(|s| s.len());
    let report = SignedBoundReport {
        opt_m_plus: opt(Sign::Plus)?,
        opt_m_minus: opt(Sign::Minus)?,
        opt_m: opt(Sign::Both)?,
        i_plus: i(Sign::Plus)?,
        i_minus: i(Sign::Minus)?,
        mir: mir(x, mis_limit)?.mir,
    };
    if report.opt_m_plus < n + report.i_plus {
        return Err(Error::Assertion(format!(
            "plus network optimum {} below n + |I_plus| = {}",
            report.opt_m_plus,
            n + report.i_plus
        )));
    }
    if report.opt_m_minus < n + report.i_minus {
        return Err(Error::Assertion(format!(
            "minus network optimum {} below n + |I_minus| = {}",
            report.opt_m_minus,
            n + report.i_minus
        )));
    }
    if Ratio::from_integer(report.opt_m as i64) < report.mir {
        return Err(Error::Assertion(format!(
            "network optimum {} below MIR {}",
            report.opt_m, report.mir
        )));
    }
    Ok(report)
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

    #[test]
    fn rectangles_of_small_inputs() {
        let r = unsatisfied_rectangles(&perm(&[1, 2, 3]), Sign::Both);
        assert_eq!(
            r,
            vec![
                UnsatisfiedRectangle {
                    a: pt(1, 1),
                    b: pt(2, 2)
                },
                UnsatisfiedRectangle {
                    a: pt(2, 2),
                    b: pt(3, 3)
                }
            ]
        );
        assert!(unsatisfied_rectangles(&perm(&[1]), Sign::Both).is_empty());
        assert!(unsatisfied_rectangles(&perm(&[2, 1]), Sign::Plus).is_empty());
        assert_eq!(unsatisfied_rectangles(&perm(&[2, 1]), Sign::Minus).len(), 1);
    }

    #[test]
    fn mir_values() {
        assert_eq!(
            mir(&perm(&[1, 2, 3]), 24).unwrap().mir,
            Ratio::from_integer(4)
        );
        assert_eq!(mir(&perm(&[1]), 24).unwrap().mir, Ratio::from_integer(1));
        assert_eq!(mir(&perm(&[2, 1]), 24).unwrap().mir, Ratio::new(5, 2));
    }

    #[test]
    fn corner_contact_is_independent() {
        let a = UnsatisfiedRectangle {
            a: pt(1, 1),
            b: pt(2, 2),
        };
        let b = UnsatisfiedRectangle {
            a: pt(2, 2),
            b: pt(3, 3),
        };
        assert!(a.independent_of(&b));
        let big = UnsatisfiedRectangle {
            a: pt(1, 1),
            b: pt(4, 4),
        };
        let inner = UnsatisfiedRectangle {
            a: pt(2, 2),
            b: pt(3, 3),
        };
        assert!(!big.independent_of(&inner));
    }

    #[test]
    fn greedy_never_beats_exact() {
        for v in [&[2u32, 6, 4, 3, 1, 5][..], &[3, 1, 4, 2], &[4, 3, 2, 1]] {
            let x = perm(v);
            let e = max_independent_rectangles(&x, Sign::Both, MisMode::Exact, 24).unwrap();
            let g = max_independent_rectangles(&x, Sign::Both, MisMode::Greedy, 24).unwrap();
            assert!(e.is_independent() && g.is_independent());
            assert!(g.len() <= e.len());
        }
    }

    #[test]
    fn gkks_small() {
        let g = gkks_network(&perm(&[1]));
        assert_eq!(g.network.points().len(), 1);
        let x = perm(&[2, 1]);
        let g = gkks_network(&x);
        assert!(g.network.points().len() <= 4);
        assert!(is_manhattan_network(&x, g.network.points()).unwrap());
        let lone: BTreeSet<Point> = x.point_set();
        assert!(!is_manhattan_network(&x, &lone).unwrap());
    }

    #[test]
    fn signed_bound_small() {
        let r = verify_signed_mn_lower_bound(&perm(&[2, 1]), 5, 24).unwrap();
        assert_eq!(r.opt_m, 3);
        let r = verify_signed_mn_lower_bound(&perm(&[1]), 5, 24).unwrap();
        assert_eq!((r.opt_m, r.opt_m_plus, r.opt_m_minus), (1, 1, 1));
    }
}
