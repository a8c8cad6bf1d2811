//! Pointer-machine BST model: trace validation and a static balanced
//! baseline.
//!
//! A trace is an initial tree plus one episode of pointer operations per
//! access. At the start of every episode the pointer sits at the root, and
//! the episode must finish with the accessed key at the root and the pointer
//! on it. `Rotate` lifts the pointed node over its parent and the pointer
//! stays on that node.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::PermutationPointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BstOp {
    MoveLeft,
    MoveRight,
    MoveUp,
    Rotate,
}

impl BstOp {
    pub fn token(self) -> &'static str {
        match self {
            BstOp::MoveLeft => "L",
            BstOp::MoveRight => "R",
            BstOp::MoveUp => "U",
            BstOp::Rotate => "rot",
        }
    }

    pub fn from_token(tok: &str) -> Option<Self> {
        match tok {
            "L" => Some(BstOp::MoveLeft),
            "R" => Some(BstOp::MoveRight),
            "U" => Some(BstOp::MoveUp),
            "rot" => Some(BstOp::Rotate),
            _ => None,
        }
    }
}

const NIL: u32 = 0;

/// A binary tree over keys `1..=n`, stored as parent/child arrays indexed by
/// key (slot 0 is the null sentinel).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BstShape {
    root: u32,
    left: Vec<u32>,
    right: Vec<u32>,
    parent: Vec<u32>,
}

impl BstShape {
    fn empty(n: usize) -> Self {
        BstShape {
            root: NIL,
            left: vec![NIL; n + 1],
            right: vec![NIL; n + 1],
            parent: vec![NIL; n + 1],
        }
    }

    /// Perfectly balanced tree on `1..=n` (upper median at every node).
    pub fn balanced(n: usize) -> Self {
        fn build(t: &mut BstShape, lo: u32, hi: u32, parent: u32) -> u32 {
            if lo > hi {
                return NIL;
            }
            let mid = lo + (hi - lo).div_ceil(2);
            t.parent[mid as usize] = parent;
            t.left[mid as usize] = build(t, lo, mid - 1, mid);
            t.right[mid as usize] = build(t, mid + 1, hi, mid);
            mid
        }
        let mut t = BstShape::empty(n);
        t.root = build(&mut t, 1, n as u32, NIL);
        t
    }

    pub fn n(&self) -> usize {
        self.left.len() - 1
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn left(&self, k: u32) -> Option<u32> {
        Some(self.left[k as usize]).filter(|&c| c != NIL)
    }

    pub fn right(&self, k: u32) -> Option<u32> {
        Some(self.right[k as usize]).filter(|&c| c != NIL)
    }

    pub fn parent(&self, k: u32) -> Option<u32> {
        Some(self.parent[k as usize]).filter(|&c| c != NIL)
    }

    pub fn depth(&self, mut k: u32) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent(k) {
            k = p;
            d += 1;
        }
        d
    }

    fn inorder(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.n());
        let mut stack = Vec::new();
        let mut cur = self.root;
        while cur != NIL || !stack.is_empty() {
            while cur != NIL {
                stack.push(cur);
                cur = self.left[cur as usize];
            }
            let k = stack.pop().expect("non-empty stack");
            out.push(k);
            cur = self.right[k as usize];
        }
        out
    }

    /// Checks the symmetric-order property and that every key appears once
    /// with consistent parent links.
    pub fn check_search_tree(&self) -> Result<()> {
        let order = self.inorder();
        if order.len() != self.n() || order.iter().enumerate().any(|(i, &k)| k != i as u32 + 1) {
            return Err(Error::InvalidTrace(
                "tree violates the search-tree property".into(),
            ));
        }
        for k in 1..=self.n() as u32 {
            for c in [self.left[k as usize], self.right[k as usize]] {
                if c != NIL && self.parent[c as usize] != k {
                    return Err(Error::InvalidTrace(format!(
                        "inconsistent parent link at {c}"
                    )));
                }
            }
        }
        if self.parent[self.root as usize] != NIL {
            return Err(Error::InvalidTrace("root has a parent".into()));
        }
        Ok(())
    }

    /// Rotate `x` above its parent.
    fn rotate_up(&mut self, x: u32) -> Result<()> {
        let p = self.parent[x as usize];
        if p == NIL {
            return Err(Error::InvalidTrace(format!("rotate at root {x}")));
        }
        let g = self.parent[p as usize];
        if self.left[p as usize] == x {
            let b = self.right[x as usize];
            self.left[p as usize] = b;
            if b != NIL {
                self.parent[b as usize] = p;
            }
            self.right[x as usize] = p;
        } else {
            let b = self.left[x as usize];
            self.right[p as usize] = b;
            if b != NIL {
                self.parent[b as usize] = p;
            }
            self.left[x as usize] = p;
        }
        self.parent[p as usize] = x;
        self.parent[x as usize] = g;
        if g == NIL {
            self.root = x;
        } else if self.left[g as usize] == p {
            self.left[g as usize] = x;
        } else {
            self.right[g as usize] = x;
        }
        Ok(())
    }

    fn fmt_node(&self, k: u32, out: &mut String) {
        if k == NIL {
            out.push('.');
            return;
        }
        out.push('(');
        self.fmt_node(self.left[k as usize], out);
        out.push_str(&format!(" {k} "));
        self.fmt_node(self.right[k as usize], out);
        out.push(')');
    }

    /// Parse the `((. 1 .) 2 (. 3 .))` shape format.
    pub fn parse(s: &str) -> Result<Self> {
        let toks = tokenize_shape(s);
        let mut pos = 0;
        let mut nodes: Vec<(u32, u32, u32)> = Vec::new();
        let root = parse_node(&toks, &mut pos, &mut nodes)?;
        if pos != toks.len() {
            return Err(Error::InvalidTrace("trailing tokens after tree".into()));
        }
        let n = nodes.len();
        let mut t = BstShape::empty(n);
        for &(k, l, r) in &nodes {
            if k == 0 || k as usize > n {
                return Err(Error::InvalidTrace(format!("key {k} out of range 1..={n}")));
            }
            t.left[k as usize] = l;
            t.right[k as usize] = r;
            for c in [l, r] {
                if c != NIL {
                    t.parent[c as usize] = k;
                }
            }
        }
        t.root = root;
        t.check_search_tree()?;
        Ok(t)
    }
}

fn tokenize_shape(s: &str) -> Vec<String> {
    let mut toks = Vec::new();
    let mut num = String::new();
    for ch in s.chars() {
        if ch.is_ascii_digit() {
            num.push(ch);
            continue;
        }
        if !num.is_empty() {
            toks.push(std::mem::take(&mut num));
        }
        if matches!(ch, '(' | ')' | '.') {
            toks.push(ch.to_string());
        }
    }
    if !num.is_empty() {
        toks.push(num);
    }
    toks
}

fn parse_node(toks: &[String], pos: &mut usize, nodes: &mut Vec<(u32, u32, u32)>) -> Result<u32> {
    let bad = |m: &str| Error::InvalidTrace(format!("malformed tree: {m}"));
    match toks.get(*pos).map(String::as_str) {
        Some(".") => {
            *pos += 1;
            Ok(NIL)
        }
        Some("(") => {
            *pos += 1;
            let l = parse_node(toks, pos, nodes)?;
            let k: u32 = toks
                .get(*pos)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("expected key"))?;
            *pos += 1;
            let r = parse_node(toks, pos, nodes)?;
            if toks.get(*pos).map(String::as_str) != Some(")") {
                return Err(bad("expected `)`"));
            }
            *pos += 1;
            nodes.push((k, l, r));
            Ok(k)
        }
        _ => Err(bad("expected `(` or `.`")),
    }
}

impl fmt::Display for BstShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.fmt_node(self.root, &mut s);
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BstTrace {
    pub initial_tree: BstShape,
    pub episodes: Vec<Vec<BstOp>>,
}

impl BstTrace {
    pub fn cost(&self) -> u64 {
        self.episodes.iter().map(|e| e.len() as u64).sum()
    }

    /// Text form: `X:` header, `tree:` line, then one line per episode
    /// (`-` for an empty episode).
    pub fn to_text(&self, x: &PermutationPointSet) -> String {
        let mut s = format!("X: {x}\ntree: {}\n", self.initial_tree);
        for ep in &self.episodes {
            if ep.is_empty() {
                s.push('-');
            } else {
                let toks: Vec<&str> = ep.iter().map(|op| op.token()).collect();
                s.push_str(&toks.join(" "));
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<(PermutationPointSet, BstTrace)> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let perr = |line: usize, message: String| Error::Parse {
            line: line + 1,
            message,
        };
        let (ln, first) = lines
            .next()
            .ok_or_else(|| perr(0, "missing `X:` line".into()))?;
        let x = first
            .trim()
            .strip_prefix("X:")
            .ok_or_else(|| perr(ln, "expected `X: <perm>`".into()))
            .and_then(|p| {
                crate::geometry::parse_permutation(p).map_err(|e| perr(ln, e.to_string()))
            })?;
        let (ln, second) = lines
            .next()
            .ok_or_else(|| perr(ln, "missing `tree:` line".into()))?;
        let tree = second
            .trim()
            .strip_prefix("tree:")
            .ok_or_else(|| perr(ln, "expected `tree: <shape>`".into()))
            .and_then(|t| BstShape::parse(t).map_err(|e| perr(ln, e.to_string())))?;
        let mut episodes = Vec::new();
        for (ln, line) in lines {
            let line = line.trim();
            let mut ep = Vec::new();
            if line != "-" {
                for tok in line.split_whitespace() {
                    let op = BstOp::from_token(tok)
                        .ok_or_else(|| perr(ln, format!("unknown op `{tok}`")))?;
                    ep.push(op);
                }
            }
            episodes.push(ep);
        }
        Ok((
            x,
            BstTrace {
                initial_tree: tree,
                episodes,
            },
        ))
    }
}

/// Simulates `trace` against `x` and returns its cost.
pub fn validate_trace(trace: &BstTrace, x: &PermutationPointSet) -> Result<u64> {
    let n = x.n();
    if trace.initial_tree.n() != n {
        return Err(Error::InvalidTrace(format!(
            "tree has {} keys, access sequence has {n}",
            trace.initial_tree.n()
        )));
    }
    if trace.episodes.len() != n {
        return Err(Error::InvalidTrace(format!(
            "{} episodes for {n} accesses",
            trace.episodes.len()
        )));
    }
    let mut t = trace.initial_tree.clone();
    t.check_search_tree()?;
    for (i, ep) in trace.episodes.iter().enumerate() {
        let mut ptr = t.root;
        for (j, &op) in ep.iter().enumerate() {
            let illegal = || {
                Error::InvalidTrace(format!(
                    "episode {}: op {} ({}) is illegal at {ptr}",
                    i + 1,
                    j + 1,
                    op.token()
                ))
            };
            ptr = match op {
                BstOp::MoveLeft => t.left(ptr).ok_or_else(illegal)?,
                BstOp::MoveRight => t.right(ptr).ok_or_else(illegal)?,
                BstOp::MoveUp => t.parent(ptr).ok_or_else(illegal)?,
                BstOp::Rotate => {
                    t.rotate_up(ptr).map_err(|_| illegal())?;
                    ptr
                }
            };
        }
        let want = x.x_at(i as u32 + 1);
        if t.root != want || ptr != t.root {
            return Err(Error::InvalidTrace(format!(
                "episode {} ends with root {} and pointer {ptr}, expected {want} at the root",
                i + 1,
                t.root
            )));
        }
        t.check_search_tree()?;
    }
    Ok(trace.cost())
}

// Records pointer operations while driving a tree.
struct Machine {
    tree: BstShape,
    ptr: u32,
    ops: Vec<BstOp>,
}

impl Machine {
    fn is_ancestor_or_self(&self, anc: u32, mut k: u32) -> bool {
        loop {
            if k == anc {
                return true;
            }
            match self.tree.parent(k) {
                Some(p) => k = p,
                None => return false,
            }
        }
    }

    // Walks up to the lowest common ancestor, then down by key comparison.
    fn move_to(&mut self, target: u32) {
        while !self.is_ancestor_or_self(self.ptr, target) {
            self.ptr = self.tree.parent(self.ptr).expect("walk up from a non-root");
            self.ops.push(BstOp::MoveUp);
        }
        while self.ptr != target {
            if target < self.ptr {
                self.ptr = self.tree.left[self.ptr as usize];
                self.ops.push(BstOp::MoveLeft);
            } else {
                self.ptr = self.tree.right[self.ptr as usize];
                self.ops.push(BstOp::MoveRight);
            }
        }
    }

    fn rotate(&mut self) {
        self.tree
            .rotate_up(self.ptr)
            .expect("rotate below the root");
        self.ops.push(BstOp::Rotate);
    }
}

/// Serve `x` from a static balanced tree: each access walks to the key and
/// rotates it to the root, and the next episode first rotates the displaced
/// ancestors back, restoring the balanced shape.
pub fn static_balanced_trace(x: &PermutationPointSet) -> BstTrace {
    let initial = BstShape::balanced(x.n());
    let mut m = Machine {
        ptr: initial.root,
        tree: initial.clone(),
        ops: Vec::new(),
    };
    let mut episodes = Vec::with_capacity(x.n());
    let mut displaced: Vec<u32> = Vec::new();
    for i in 1..=x.n() as u32 {
        let key = x.x_at(i);
        // undo the previous access, shallowest ancestor first
        for &a in displaced.iter().rev() {
            m.move_to(a);
            m.rotate();
        }
        displaced.clear();
        m.move_to(key);
        while let Some(p) = m.tree.parent(key) {
            displaced.push(p);
            m.rotate();
        }
        episodes.push(std::mem::take(&mut m.ops));
    }
    BstTrace {
        initial_tree: initial,
        episodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate, make_permutation_point_set, Family, FamilySpec};
    use BstOp::*;

    fn perm(v: &[u32]) -> PermutationPointSet {
        make_permutation_point_set(v).unwrap()
    }

    #[test]
    fn single_node_trace() {
        let t = BstTrace {
            initial_tree: BstShape::balanced(1),
            episodes: vec![vec![]],
        };
        assert_eq!(validate_trace(&t, &perm(&[1])).unwrap(), 0);
    }

    #[test]
    fn rotation_brings_key_up() {
        let tree = BstShape::parse("((. 1 .) 2 .)").unwrap();
        let t = BstTrace {
            initial_tree: tree.clone(),
            episodes: vec![vec![], vec![MoveLeft, Rotate]],
        };
        assert_eq!(validate_trace(&t, &perm(&[2, 1])).unwrap(), 2);

        let bad = BstTrace {
            initial_tree: tree,
            episodes: vec![vec![MoveLeft], vec![]],
        };
        assert!(validate_trace(&bad, &perm(&[1, 2])).is_err());
    }

    #[test]
    fn illegal_moves_rejected() {
        let t = BstTrace {
            initial_tree: BstShape::balanced(1),
            episodes: vec![vec![MoveLeft]],
        };
        assert!(validate_trace(&t, &perm(&[1])).is_err());
        let t = BstTrace {
            initial_tree: BstShape::balanced(1),
            episodes: vec![vec![Rotate]],
        };
        assert!(validate_trace(&t, &perm(&[1])).is_err());
    }

    #[test]
    fn shape_round_trip() {
        let t = BstShape::balanced(7);
        assert_eq!(t.to_string(), "(((. 1 .) 2 (. 3 .)) 4 ((. 5 .) 6 (. 7 .)))");
        assert_eq!(BstShape::parse(&t.to_string()).unwrap(), t);
        assert!(BstShape::parse("((. 2 .) 1 .)").is_err());
    }

    #[test]
    fn static_traces_validate() {
        assert_eq!(static_balanced_trace(&perm(&[1])).cost(), 0);
        let x = perm(&[1, 2, 3]);
        let t = static_balanced_trace(&x);
        assert_eq!(validate_trace(&t, &x).unwrap(), t.cost());
        assert!(t.cost() <= 4 * 3 * 3);
        for n in [5usize, 16, 64] {
            for seed in 0..3 {
                let x = generate(FamilySpec::new(Family::Random, n, Some(seed))).unwrap();
                let t = static_balanced_trace(&x);
                assert_eq!(validate_trace(&t, &x).unwrap(), t.cost());
            }
        }
    }

    #[test]
    fn trace_text_round_trip() {
        let x = perm(&[3, 1, 4, 2, 5]);
        let t = static_balanced_trace(&x);
        let (x2, t2) = BstTrace::parse(&t.to_text(&x)).unwrap();
        assert_eq!(x2, x);
        assert_eq!(t2, t);
    }
}
