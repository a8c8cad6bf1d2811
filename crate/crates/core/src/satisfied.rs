//! Satisfaction predicates, the row-by-row Greedy sweep with its signed
//! variants, and exhaustive optimum search.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{manhattan_reachable_from, parse_permutation, PermutationPointSet, Point};

/// Which diagonal orientation of a point pair is constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    /// Pairs where one point is above and to the right of the other.
    Plus,
    /// Pairs where one point is above and to the left of the other.
    Minus,
    Both,
}

impl Sign {
    /// Whether the pair `(a, b)` is constrained under this sign. Collinear
    /// pairs are never constrained.
    pub fn covers(self, a: Point, b: Point) -> bool {
        if a.collinear(b) {
            return false;
        }
        let plus = (a.x < b.x) == (a.y < b.y);
        match self {
            Sign::Plus => plus,
            Sign::Minus => !plus,
            Sign::Both => true,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
            Sign::Both => "both",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "plus" => Ok(Sign::Plus),
            "minus" => Ok(Sign::Minus),
            "both" => Ok(Sign::Both),
            other => Err(format!("unknown sign `{other}` (plus|minus|both)")),
        }
    }
}

/// A superset `Y` of the input points inside `[n] x [n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSuperset {
    base: PermutationPointSet,
    points: BTreeSet<Point>,
}

impl PointSuperset {
    pub fn new(base: PermutationPointSet, points: BTreeSet<Point>) -> Result<Self> {
        let n = base.n() as u32;
        if base.points().any(|p| !points.contains(&p)) {
            return Err(Error::NotSuperset);
        }
        if let Some(&p) = points
            .iter()
            .find(|p| p.x < 1 || p.y < 1 || p.x > n || p.y > n)
        {
            return Err(Error::InvalidOperation(format!(
                "point {p} outside [1,{n}]^2"
            )));
        }
        Ok(PointSuperset { base, points })
    }

    pub fn from_extra(
        base: PermutationPointSet,
        extra: impl IntoIterator<Item = Point>,
    ) -> Result<Self> {
        let mut points = base.point_set();
        points.extend(extra);
        Self::new(base, points)
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn base(&self) -> &PermutationPointSet {
        &self.base
    }

    pub fn points(&self) -> &BTreeSet<Point> {
        &self.points
    }

    pub fn extra(&self) -> impl Iterator<Item = &Point> + '_ {
        self.points.iter().filter(|p| !self.base.contains(**p))
    }

    pub fn cost(&self) -> usize {
        self.points.len()
    }

    pub fn to_text(&self, kind: &str) -> String {
        let mut s = format!(
            "# cost={}\n# X: {}\n# kind={kind}\n",
            self.cost(),
            self.base
        );
        s.push_str(&crate::geometry::format_point_set(&self.points));
        s
    }

    /// Parse the superset file format. The `# X:` comment names the input;
    /// without it the input is taken to be the whole point list, which must
    /// then be a permutation point set.
    pub fn parse(text: &str) -> Result<Self> {
        let mut base = None;
        for (idx, line) in text.lines().enumerate() {
            if let Some(rest) = line.trim().strip_prefix("# X:") {
                base = Some(parse_permutation(rest).map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })?);
            }
        }
        let points: BTreeSet<Point> = crate::geometry::parse_point_set(text)?
            .into_iter()
            .collect();
        let base = match base {
            Some(b) => b,
            None => {
                let mut by_row: Vec<&Point> = points.iter().collect();
                by_row.sort_by_key(|p| p.y);
                PermutationPointSet::new(by_row.iter().map(|p| p.x).collect())?
            }
        };
        Self::new(base, points)
    }
}

/// A constrained pair whose closed rectangle holds no third point, if any.
pub fn unsatisfied_pair(ys: &BTreeSet<Point>, sign: Sign) -> Option<(Point, Point)> {
    let pts: Vec<Point> = ys.iter().copied().collect();
    let check_plus = matches!(sign, Sign::Plus | Sign::Both);
    let check_minus = matches!(sign, Sign::Minus | Sign::Both);
    for &a in &pts {
        if check_plus {
            if let Some(b) = first_exposed(&pts, a, false) {
                return Some((a, b));
            }
        }
        if check_minus {
            if let Some(b) = first_exposed(&pts, a, true) {
                return Some((a, b));
            }
        }
    }
    None
}

// Scans the closed upper quadrant of `a` (upper-right, or upper-left when
// `mirrored`) in order of distance along x. A strictly diagonal point `b` is
// exposed when no earlier point of the quadrant is dominated by it.
fn first_exposed(pts: &[Point], a: Point, mirrored: bool) -> Option<Point> {
    let dx = |p: &Point| -> Option<u32> {
        if mirrored {
            a.x.checked_sub(p.x)
        } else {
            p.x.checked_sub(a.x)
        }
    };
    let mut quad: Vec<(u32, u32, Point)> = pts
        .iter()
        .filter(|p| **p != a && p.y >= a.y)
        .filter_map(|p| dx(p).map(|d| (d, p.y, *p)))
        .collect();
    quad.sort_unstable();
    let mut min_y = u32::MAX;
    for (d, y, p) in quad {
        if d > 0 && y > a.y && y < min_y {
            return Some(p);
        }
        min_y = min_y.min(y);
    }
    None
}

pub fn is_satisfied(ys: &BTreeSet<Point>, sign: Sign) -> bool {
    unsatisfied_pair(ys, sign).is_none()
}

/// Greedy sweep: at row `i`, every earlier point whose rectangle with
/// `(x_i, i)` is empty (and whose pair orientation matches `sign`) gets a
/// copy at height `i`. All repairs of a row are added together.
pub fn greedy_sweep(x: &PermutationPointSet, sign: Sign) -> PointSuperset {
    let n = x.n();
    // top[c] = highest row touched in column c so far, 0 if none
    let mut top = vec![0u32; n + 2];
    let mut points = BTreeSet::new();
    let mut repairs = Vec::new();
    for i in 1..=n as u32 {
        let q = x.x_at(i);
        repairs.clear();
        if matches!(sign, Sign::Plus | Sign::Both) {
            let mut run = top[q as usize];
            for c in (1..q).rev() {
                let t = top[c as usize];
                if t > run {
                    repairs.push(c);
                    run = t;
                }
            }
        }
        if matches!(sign, Sign::Minus | Sign::Both) {
            let mut run = top[q as usize];
            for c in q + 1..=n as u32 {
                let t = top[c as usize];
                if t > run {
                    repairs.push(c);
                    run = t;
                }
            }
        }
        for &c in &repairs {
            top[c as usize] = i;
            points.insert(Point::new(c, i));
        }
        top[q as usize] = i;
        points.insert(Point::new(q, i));
    }
    PointSuperset::new(x.clone(), points).expect("sweep output contains the input")
}

/// Union of the plus and minus sweeps.
pub fn signed_greedy(x: &PermutationPointSet) -> PointSuperset {
    let mut points = greedy_sweep(x, Sign::Plus).points;
    points.extend(greedy_sweep(x, Sign::Minus).points);
    PointSuperset::new(x.clone(), points).expect("union contains the input")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptPredicate {
    Satisfaction,
    /// Manhattan paths only between input points of the constrained sign.
    ManhattanNetwork,
}

#[derive(Debug, Clone)]
pub struct OptimumReport {
    pub optimum: usize,
    pub witness: PointSuperset,
    pub enumerated: u64,
}

pub const DEFAULT_OPT_LIMIT: usize = 5;

/// Whether `ys` connects every `sign`-constrained pair of input points by a
/// manhattan path.
pub fn connects_input_pairs(x: &PermutationPointSet, ys: &BTreeSet<Point>, sign: Sign) -> bool {
    let xs: Vec<Point> = x.points().collect();
    for (i, &a) in xs.iter().enumerate() {
        let needs: Vec<Point> = xs[i + 1..]
            .iter()
            .copied()
            .filter(|&b| sign.covers(a, b))
            .collect();
        if needs.is_empty() {
            continue;
        }
        let reach = manhattan_reachable_from(ys, a);
        if needs.iter().any(|b| !reach.contains(b)) {
            return false;
        }
    }
    true
}

/// Exact minimum `|Y|` by trying extra-point sets in increasing size,
/// lexicographically within a size.
pub fn brute_force_opt(
    x: &PermutationPointSet,
    sign: Sign,
    predicate: OptPredicate,
    limit: usize,
) -> Result<OptimumReport> {
    let n = x.n();
    if n > limit {
        return Err(Error::LimitExceeded {
            what: "n",
            actual: n,
            limit,
            flag: "--opt-limit",
        });
    }
    let base = x.point_set();
    let passes = |ys: &BTreeSet<Point>| match predicate {
        OptPredicate::Satisfaction => is_satisfied(ys, sign),
        OptPredicate::ManhattanNetwork => connects_input_pairs(x, ys, sign),
    };
    let cells: Vec<Point> = (1..=n as u32)
        .flat_map(|y| (1..=n as u32).map(move |xx| Point::new(xx, y)))
        .filter(|p| !base.contains(p))
        .collect();
    let mut enumerated = 0u64;
    for k in 0..=cells.len() {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            enumerated += 1;
            let mut ys = base.clone();
            ys.extend(idx.iter().map(|&i| cells[i]));
            if passes(&ys) {
                let witness = PointSuperset::new(x.clone(), ys)?;
                return Ok(OptimumReport {
                    optimum: witness.cost(),
                    witness,
                    enumerated,
                });
            }
            if !next_combination(&mut idx, cells.len()) {
                break;
            }
        }
    }
    // the full grid is always satisfied
    unreachable!("no superset passed, including the full grid")
}

// Advances `idx` to the next k-combination of 0..m in lexicographic order.
pub(crate) fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate, make_permutation_point_set, Family, FamilySpec};

    fn pts(v: &[(u32, u32)]) -> BTreeSet<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    fn perm(v: &[u32]) -> PermutationPointSet {
        make_permutation_point_set(v).unwrap()
    }

    // Direct pairwise definition.
    fn satisfied_oracle(ys: &BTreeSet<Point>, sign: Sign) -> bool {
        ys.iter().all(|&a| {
            ys.iter()
                .all(|&b| !sign.covers(a, b) || !crate::geometry::rect_is_empty(ys.iter(), a, b))
        })
    }

    #[test]
    fn satisfaction_examples() {
        assert!(!is_satisfied(&pts(&[(1, 1), (2, 2)]), Sign::Both));
        assert!(is_satisfied(&pts(&[(1, 1), (2, 2)]), Sign::Minus));
        assert!(is_satisfied(&pts(&[(2, 1), (1, 2), (2, 2)]), Sign::Both));
    }

    #[test]
    fn satisfaction_matches_pairwise_definition() {
        for mask in 0u32..(1 << 9) {
            let ys: BTreeSet<Point> = (0..9)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| Point::new(b % 3 + 1, b / 3 + 1))
                .collect();
            for sign in [Sign::Plus, Sign::Minus, Sign::Both] {
                assert_eq!(
                    is_satisfied(&ys, sign),
                    satisfied_oracle(&ys, sign),
                    "{ys:?} {sign}"
                );
            }
        }
    }

    #[test]
    fn greedy_examples() {
        for n in 1..=8u32 {
            let x = generate(FamilySpec::new(Family::Sequential, n as usize, None)).unwrap();
            let y = greedy_sweep(&x, Sign::Both);
            assert_eq!(y.cost(), 2 * n as usize - 1);
            let expect: BTreeSet<Point> = (2..=n).map(|i| Point::new(i - 1, i)).collect();
            assert_eq!(y.extra().copied().collect::<BTreeSet<_>>(), expect);
        }
        let x = perm(&[2, 1]);
        assert_eq!(
            greedy_sweep(&x, Sign::Both).points(),
            &pts(&[(2, 1), (1, 2), (2, 2)])
        );
        assert_eq!(
            greedy_sweep(&x, Sign::Plus).points(),
            &pts(&[(2, 1), (1, 2)])
        );
        assert_eq!(signed_greedy(&x).cost(), 3);
        assert_eq!(signed_greedy(&perm(&[1])).cost(), 1);
    }

    #[test]
    fn greedy_output_is_satisfied() {
        for seed in 0..10 {
            let x = generate(FamilySpec::new(Family::Random, 12, Some(seed))).unwrap();
            for sign in [Sign::Plus, Sign::Minus, Sign::Both] {
                let y = greedy_sweep(&x, sign);
                assert!(satisfied_oracle(y.points(), sign));
                assert_eq!(greedy_sweep(&x, sign), y);
            }
        }
    }

    #[test]
    fn optimum_examples() {
        let opt =
            |v: &[u32], s| brute_force_opt(&perm(v), s, OptPredicate::Satisfaction, 5).unwrap();
        assert_eq!(opt(&[1, 2], Sign::Both).optimum, 3);
        assert_eq!(opt(&[1], Sign::Both).optimum, 1);
        assert_eq!(opt(&[2, 1], Sign::Plus).optimum, 2);
        let r = opt(&[2, 3, 1], Sign::Both);
        assert!(is_satisfied(r.witness.points(), Sign::Both));
        assert!(matches!(
            brute_force_opt(
                &perm(&[1, 2, 3, 4, 5, 6]),
                Sign::Both,
                OptPredicate::Satisfaction,
                5
            ),
            Err(Error::LimitExceeded { .. })
        ));
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn superset_text_round_trip() {
        let y = greedy_sweep(&perm(&[3, 1, 2]), Sign::Both);
        let text = y.to_text("greedy");
        assert!(text.starts_with(&format!("# cost={}\n", y.cost())));
        assert_eq!(PointSuperset::parse(&text).unwrap(), y);
    }
}
