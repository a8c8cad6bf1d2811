//! Constructive translations between the models: flip sequences to
//! satisfied supersets and back, tree relaxations to flip sequences, and
//! A-operations to flips.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::{GridFrame, PermutationPointSet, Point, Rect};
use crate::rect::{
    initial_phase, AOp, AllowedElbows, FlipSequence, Recorder, RectState, Segment, Step,
};
use crate::satisfied::{is_satisfied, PointSuperset, Sign};
use crate::tree::{apply_edge_flip, build_treap, EdgeFlip, EdgeFlipSequence, MonotoneTree};

/// The input points plus every non-margin endpoint of every flip.
pub fn rect_to_satisfied(fs: &FlipSequence) -> Result<PointSuperset> {
    let frame = GridFrame::new(fs.x.n());
    let mut extra = BTreeSet::new();
    for step in &fs.steps {
        if let Step::Flip(a, b) = step {
            extra.extend([*a, *b].into_iter().filter(|p| !frame.is_margin(*p)));
        }
    }
    let end = fs.replay()?;
    if !end.is_end_state() {
        return Err(Error::InvalidOperation(
            "flip sequence does not reach an end state".into(),
        ));
    }
    let y = PointSuperset::from_extra(fs.x.clone(), extra)?;
    if let Some(sign) = fs.elbows.guaranteed_sign() {
        if let Some((a, b)) = crate::satisfied::unsatisfied_pair(y.points(), sign) {
            return Err(Error::Assertion(format!(
                "extracted superset is not {}-satisfied: {a} and {b}",
                sign.name()
            )));
        }
    }
    Ok(y)
}

fn satisfies_precondition(y: &PointSuperset, elbows: AllowedElbows) -> bool {
    use crate::rect::ElbowOrientation as E;
    let plus_ok = elbows.orientations().any(|o| matches!(o, E::DR | E::UL));
    let minus_ok = elbows.orientations().any(|o| matches!(o, E::DL | E::UR));
    is_satisfied(y.points(), Sign::Both)
        || (plus_ok && is_satisfied(y.points(), Sign::Plus))
        || (minus_ok && is_satisfied(y.points(), Sign::Minus))
}

/// Flip sequence whose non-margin points are exactly `y`.
///
/// Repeatedly applies the first valid flip between consecutive points of
/// `Y ∪ M` on a row (by height, then left end), and otherwise the first
/// removable vertical segment with no point of `Y` inside.
pub fn satisfied_to_rect(
    x: &PermutationPointSet,
    y: &PointSuperset,
    elbows: AllowedElbows,
) -> Result<FlipSequence> {
    if y.base() != x {
        return Err(Error::NotSuperset);
    }
    if !satisfies_precondition(y, elbows) {
        return Err(Error::InvalidOperation(format!(
            "point set is not satisfied in the sense required by elbows {elbows}"
        )));
    }
    let n = x.n() as u32;
    let top = n + 1;
    let ys = y.points();
    // stops[row]: x-coordinates of Y ∪ M on that row
    let mut stops: Vec<Vec<u32>> = vec![Vec::new(); top as usize + 1];
    for row in 1..=n {
        let mut v: Vec<u32> = ys.iter().filter(|p| p.y == row).map(|p| p.x).collect();
        v.insert(0, 0);
        v.push(top);
        stops[row as usize] = v;
    }
    let has_y_inside = |seg: &Segment| {
        let lo = seg.p().y;
        let hi = seg.q().y;
        ys.range(Point::new(seg.p().x, lo + 1)..Point::new(seg.p().x, hi))
            .next()
            .is_some()
    };

    let mut rec = Recorder::new(x, elbows);
    loop {
        let mut flipped = false;
        'rows: for row in 1..=n {
            for w in stops[row as usize].windows(2) {
                let (a, b) = (Point::new(w[0], row), Point::new(w[1], row));
                if rec.state.row(row).any(|(lo, hi)| lo == w[0] && hi == w[1]) {
                    continue;
                }
                if rec.state.flip_violations(a, b, elbows)?.is_empty() {
                    rec.flip(a, b)?;
                    flipped = true;
                    break 'rows;
                }
            }
        }
        if flipped {
            continue;
        }
        let removable = rec
            .state
            .vertical_segments()
            .find(|s| !has_y_inside(s) && rec.state.can_remove(*s, elbows));
        if let Some(seg) = removable {
            rec.remove(seg)?;
            continue;
        }
        if rec.state.is_end_state() {
            return Ok(rec.finish());
        }
        // stuck: report the missing pair with the rightmost left end
        let mut witness: Option<(Point, Point)> = None;
        for row in 1..=n {
            for w in stops[row as usize].windows(2) {
                if rec.state.row(row).any(|(lo, hi)| lo == w[0] && hi == w[1]) {
                    continue;
                }
                let cand = (Point::new(w[0], row), Point::new(w[1], row));
                let better = match witness {
                    None => true,
                    Some((q, qp)) => cand.0.x > q.x || (cand.0.x == q.x && cand.1.x < qp.x),
                };
                if better {
                    witness = Some(cand);
                }
            }
        }
        return match witness {
            Some((q, q_prime)) => Err(Error::Stuck { q, q_prime }),
            None => Err(Error::Assertion(
                "rows complete but vertical segments remain".into(),
            )),
        };
    }
}

/// Left and right ends of the row lines `h_i` while a relaxation is
/// translated, together with the current tree.
#[derive(Debug, Clone)]
pub struct InvariantState {
    pub tree: MonotoneTree,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
}

impl InvariantState {
    fn from_state(tree: MonotoneTree, s: &RectState) -> Self {
        let n = s.n();
        let mut left = vec![0; n + 1];
        let mut right = vec![0; n + 1];
        for row in 1..=n as u32 {
            let segs: Vec<(u32, u32)> = s.row(row).collect();
            left[row as usize] = segs.first().map_or(0, |s| s.0);
            right[row as usize] = segs.last().map_or(0, |s| s.1);
        }
        InvariantState { tree, left, right }
    }

    /// The empty rectangles required by I3, one per gap above each node.
    pub fn rectangles(&self) -> Vec<Rect> {
        let n = self.tree.n() as u32;
        let mut out = Vec::new();
        for t in 1..=n {
            let (lt, rt) = (self.left[t as usize], self.right[t as usize]);
            let kids = self.tree.children(t);
            let span = |x0: u32, y0: u32, x1: u32, y1: u32| {
                Rect::spanned(Point::new(x0, y0), Point::new(x1, y1))
            };
            if kids.is_empty() {
                out.push(span(lt, t, rt, n + 1));
                continue;
            }
            out.push(span(lt, t, self.left[kids[0] as usize], n + 1));
            for &c in &kids {
                out.push(span(self.left[c as usize], t, self.right[c as usize], c));
            }
            out.push(span(
                self.right[*kids.last().expect("nonempty") as usize],
                t,
                rt,
                n + 1,
            ));
        }
        out
    }

    pub fn check(&self, s: &RectState) -> Result<()> {
        self.check_i1(s)?;
        self.check_i2()?;
        self.check_i3(s)
    }

    fn check_i1(&self, s: &RectState) -> Result<()> {
        for row in 1..=s.n() as u32 {
            let mut reach = self.left[row as usize];
            for (lo, hi) in s.row(row) {
                if lo != reach {
                    return Err(Error::Invariant {
                        which: "I1",
                        detail: format!("row {row} is not one contiguous line"),
                    });
                }
                reach = hi;
            }
            if reach != self.right[row as usize] || reach == self.left[row as usize] {
                return Err(Error::Invariant {
                    which: "I1",
                    detail: format!("row {row} does not span its recorded ends"),
                });
            }
        }
        Ok(())
    }

    fn check_i2(&self) -> Result<()> {
        for t in 1..=self.tree.n() as u32 {
            let kids = self.tree.children(t);
            let Some(&first) = kids.first() else { continue };
            let last = *kids.last().expect("nonempty");
            let bad = |detail: String| {
                Err(Error::Invariant {
                    which: "I2",
                    detail,
                })
            };
            if self.left[t as usize] > self.left[first as usize] {
                return bad(format!("first child of row {t} overhangs on the left"));
            }
            if self.right[last as usize] > self.right[t as usize] {
                return bad(format!("last child of row {t} overhangs on the right"));
            }
            for w in kids.windows(2) {
                if self.right[w[0] as usize] != self.left[w[1] as usize] {
                    return bad(format!(
                        "children {} and {} of row {t} are not aligned",
                        w[0], w[1]
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_i3(&self, s: &RectState) -> Result<()> {
        let top = s.n() as u32 + 1;
        for r in self.rectangles() {
            let (x0, y0, x1, y1) = (r.x_lo, r.y_lo, r.x_hi, r.y_hi);
            if x0 == x1 || y0 == y1 {
                continue;
            }
            for seg in s.segments() {
                let (p, q) = (seg.p(), seg.q());
                let hits = if seg.is_horizontal() {
                    y0 < p.y && p.y < y1 && p.x < x1 && q.x > x0
                } else {
                    x0 < p.x && p.x < x1 && p.y < y1 && q.y > y0
                };
                if hits {
                    return Err(Error::Invariant {
                        which: "I3",
                        detail: format!("segment [{seg}] enters rectangle {r}"),
                    });
                }
            }
            for side in [x0, x1] {
                if side == 0 || side == top {
                    continue;
                }
                let mut reach = y0;
                for (lo, hi) in s.column(side) {
                    if lo <= reach && hi > reach {
                        reach = hi;
                    }
                }
                if reach < y1 {
                    return Err(Error::Invariant {
                        which: "I3",
                        detail: format!("side x={side} of rectangle {r} is not covered"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TreeRelaxOptions {
    /// Skip the realignment flip of this edge-flip (0-based), to exercise the
    /// invariant checker.
    pub skip_realignment_at: Option<usize>,
}

/// Flip sequence that follows a relaxation from the treap to the path.
pub fn treerelax_to_rect(x: &PermutationPointSet, ef: &EdgeFlipSequence) -> Result<FlipSequence> {
    treerelax_to_rect_with(x, ef, TreeRelaxOptions::default())
}

pub fn treerelax_to_rect_with(
    x: &PermutationPointSet,
    ef: &EdgeFlipSequence,
    opts: TreeRelaxOptions,
) -> Result<FlipSequence> {
    if &ef.x != x {
        return Err(Error::InvalidOperation(
            "edge-flip sequence belongs to another input".into(),
        ));
    }
    let n = x.n() as u32;
    let mut rec = Recorder::new(x, AllowedElbows::NONE);
    initial_phase(&mut rec)?;
    let mut inv = InvariantState::from_state(build_treap(x), &rec.state);
    inv.check(&rec.state)?;

    for (index, f) in ef.flips.iter().enumerate() {
        let step = |e: Error| Error::Replay {
            index: index + 1,
            source: Box::new(e),
        };
        relax_step(
            &mut rec,
            &mut inv,
            f,
            opts.skip_realignment_at == Some(index),
        )
        .map_err(step)?;
        inv.check(&rec.state).map_err(step)?;
    }
    if !inv.tree.is_path() {
        return Err(Error::InvalidOperation(
            "edge-flip sequence does not end at the path".into(),
        ));
    }

    rec.remove_verticals_to_fixpoint();
    for i in 1..=n {
        let l = inv.left[i as usize];
        if l > 0 {
            let (a, b) = (Point::new(0, i), Point::new(l, i));
            rec.flip(a, b)?;
            rec.remove_verticals_near(&[a, b]);
        }
    }
    for i in 1..=n {
        let r = inv.right[i as usize];
        if r < n + 1 {
            let (a, b) = (Point::new(r, i), Point::new(n + 1, i));
            rec.flip(a, b)?;
            rec.remove_verticals_near(&[a, b]);
        }
    }
    rec.remove_verticals_to_fixpoint();
    if !rec.state.is_end_state() {
        return Err(Error::Assertion(
            "cleanup did not reach an end state".into(),
        ));
    }
    Ok(rec.finish())
}

fn relax_step(
    rec: &mut Recorder,
    inv: &mut InvariantState,
    f: &EdgeFlip,
    skip_realign: bool,
) -> Result<()> {
    let old_tree = inv.tree.clone();
    inv.tree = apply_edge_flip(&old_tree, f)?;
    let (i, j) = (f.a.y, f.b.y);
    let t = f.r.y;
    let kids = old_tree.children(i);
    if f.a.x < f.b.x {
        let old = inv.right[i as usize];
        let rj = inv.right[j as usize];
        rec.flip(Point::new(old, i), Point::new(rj, i))?;
        inv.right[i as usize] = rj;
        clear_column(rec, inv, old, t)?;
        let Some(&k) = kids.last() else { return Ok(()) };
        let (rk, lj) = (inv.right[k as usize], inv.left[j as usize]);
        if rk < lj && !skip_realign {
            if k < j {
                rec.flip(Point::new(rk, j), Point::new(lj, j))?;
                inv.left[j as usize] = rk;
                clear_column(rec, inv, lj, i)?;
            } else {
                rec.flip(Point::new(rk, k), Point::new(lj, k))?;
                inv.right[k as usize] = lj;
                clear_column(rec, inv, rk, i)?;
            }
        }
    } else {
        let old = inv.left[i as usize];
        let lj = inv.left[j as usize];
        rec.flip(Point::new(lj, i), Point::new(old, i))?;
        inv.left[i as usize] = lj;
        clear_column(rec, inv, old, t)?;
        let Some(&k) = kids.first() else {
            return Ok(());
        };
        let (lk, rj) = (inv.left[k as usize], inv.right[j as usize]);
        if rj < lk && !skip_realign {
            if k < j {
                rec.flip(Point::new(rj, j), Point::new(lk, j))?;
                inv.right[j as usize] = lk;
                clear_column(rec, inv, rj, i)?;
            } else {
                rec.flip(Point::new(rj, k), Point::new(lk, k))?;
                inv.left[k as usize] = rj;
                clear_column(rec, inv, lk, i)?;
            }
        }
    }
    Ok(())
}

// Removes, bottom to top, every vertical segment in column `c` above row
// `from` that now lies inside one of the I3 rectangles.
fn clear_column(rec: &mut Recorder, inv: &InvariantState, c: u32, from: u32) -> Result<()> {
    let rects: Vec<Rect> = inv
        .rectangles()
        .into_iter()
        .filter(|r| r.x_lo < c && c < r.x_hi && r.y_lo < r.y_hi)
        .collect();
    let segs: Vec<(u32, u32)> = rec.state.column(c).filter(|&(_, hi)| hi > from).collect();
    for (lo, hi) in segs {
        if rects.iter().any(|r| lo < r.y_hi && hi > r.y_lo) {
            rec.remove(Segment::new(Point::new(c, lo), Point::new(c, hi))?)
                .map_err(|e| Error::Invariant {
                    which: "I3",
                    detail: format!("cannot clear column {c}: {e}"),
                })?;
        }
    }
    Ok(())
}

/// One or two flips plus removals that reproduce an A-operation on `s`.
pub fn a_op_to_flips(s: &RectState, op: &AOp) -> Result<Vec<Step>> {
    let direct = op.apply(s)?;
    let steps = match *op {
        AOp::Rotate {
            seg,
            pivot,
            new_far_end,
        } => vec![Step::Flip(pivot, new_far_end), Step::Remove(seg)],
        AOp::Flip { seg1, seg2, v, w } => {
            let y = [seg1.p(), seg1.q()]
                .into_iter()
                .find(|p| seg2.has_endpoint(*p))
                .expect("validated shared endpoint");
            vec![
                Step::Flip(v, y),
                Step::Flip(y, w),
                Step::Remove(seg1),
                Step::Remove(seg2),
            ]
        }
    };
    let mut replay = s.clone();
    for step in &steps {
        step.apply(&mut replay, AllowedElbows::NONE)?;
    }
    if replay.segments() != direct.segments() {
        return Err(Error::Assertion(format!(
            "flip simulation of {op:?} differs from the direct result"
        )));
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_permutation_point_set;
    use crate::rect::linear_flip_sequence_neighbor_elbows;
    use crate::satisfied::greedy_sweep;
    use crate::tree::{run_heuristic, HeuristicPolicy};

    fn perm(v: &[u32]) -> PermutationPointSet {
        make_permutation_point_set(v).unwrap()
    }

    #[test]
    fn singleton_round_trip() {
        let x = perm(&[1]);
        let y = PointSuperset::from_extra(x.clone(), []).unwrap();
        let fs = satisfied_to_rect(&x, &y, AllowedElbows::NONE).unwrap();
        assert_eq!(fs.cost(), 2);
        assert_eq!(rect_to_satisfied(&fs).unwrap(), y);
    }

    #[test]
    fn two_point_round_trip() {
        let x = perm(&[2, 1]);
        let y = PointSuperset::from_extra(x.clone(), [Point::new(2, 2)]).unwrap();
        let fs = satisfied_to_rect(&x, &y, AllowedElbows::NONE).unwrap();
        assert!(fs.cost() <= 6);
        assert_eq!(rect_to_satisfied(&fs).unwrap(), y);
    }

    #[test]
    fn unsatisfied_input_rejected() {
        let x = perm(&[2, 1]);
        let y = PointSuperset::from_extra(x.clone(), []).unwrap();
        assert!(satisfied_to_rect(&x, &y, AllowedElbows::NONE).is_err());
        // minus-satisfied but not plus-satisfied pairs are fine with a DL elbow
        let x = perm(&[1, 2]);
        let y = PointSuperset::from_extra(x.clone(), []).unwrap();
        let fs = satisfied_to_rect(&x, &y, AllowedElbows::ONLY_DL).unwrap();
        assert!(fs.replay().unwrap().is_end_state());
        assert!(satisfied_to_rect(&x, &y, AllowedElbows::ONLY_DR).is_err());
    }

    #[test]
    fn greedy_round_trip_six_points() {
        let x = perm(&[2, 6, 4, 3, 1, 5]);
        let y = greedy_sweep(&x, Sign::Both);
        let fs = satisfied_to_rect(&x, &y, AllowedElbows::NONE).unwrap();
        assert!(fs.cost() <= 2 * y.points().len());
        assert_eq!(rect_to_satisfied(&fs).unwrap(), y);
    }

    #[test]
    fn relaxation_translates() {
        let x = perm(&[2, 6, 4, 3, 1, 5]);
        for p in HeuristicPolicy::deterministic() {
            let ef = run_heuristic(&x, p).unwrap();
            let fs = treerelax_to_rect(&x, &ef).unwrap();
            assert!(fs.replay().unwrap().is_end_state());
            rect_to_satisfied(&fs).unwrap();
        }
        let seq = perm(&[1, 2, 3, 4]);
        let ef = run_heuristic(&seq, HeuristicPolicy::MaxHeightDrop).unwrap();
        assert!(ef.is_empty());
        let fs = treerelax_to_rect(&seq, &ef).unwrap();
        assert!(fs.cost() <= 4 * 4);
    }

    #[test]
    fn linear_output_is_not_signed() {
        let x = perm(&[3, 1, 4, 2]);
        let fs = linear_flip_sequence_neighbor_elbows(&x, AllowedElbows::DOWN_PAIR).unwrap();
        assert!(rect_to_satisfied(&fs).is_ok());
    }
}
