//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Every criterion is evaluated in full and reported. The target exits
//! nonzero if the set of failing criteria differs from `KNOWN_FAILURES`, so
//! a regression and an unexpected fix both show up.

use std::collections::BTreeSet;
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flipview::bounds::{mir, DEFAULT_MIS_LIMIT};
use flipview::experiment::{run_experiment, ExperimentSpec, Quantity};
use flipview::geometry::{make_permutation_point_set, manhattan_path_exists};
use flipview::rect::{
    enumerate_a_ops, flip_diameter_bfs, opt_rect_search, AOp, DiameterMode, StateGraph,
};
use flipview::satisfied::{brute_force_opt, greedy_sweep, is_satisfied, OptPredicate};
use flipview::transforms::{rect_to_satisfied, satisfied_to_rect, treerelax_to_rect};
use flipview::tree::{apply_edge_flip, build_path, build_treap, potentials, run_heuristic};
use flipview::{AllowedElbows, Family, HeuristicPolicy, PermutationPointSet, Point, Sign, Step};

/// Criteria expected to fail, with the reason recorded in the README.
const KNOWN_FAILURES: &[&str] = &["6", "7"];

struct Outcome {
    id: &'static str,
    ok: bool,
    detail: String,
}

fn permutations(n: u32) -> Vec<PermutationPointSet> {
    fn rec(prefix: &mut Vec<u32>, rest: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (1..=n).collect(), &mut out);
    out.into_iter()
        .map(|s| make_permutation_point_set(&s).unwrap())
        .collect()
}

fn all_up_to(n: u32) -> Vec<PermutationPointSet> {
    (1..=n).flat_map(permutations).collect()
}

fn policies() -> Vec<HeuristicPolicy> {
    let mut p = HeuristicPolicy::deterministic().to_vec();
    p.push(HeuristicPolicy::Random(7));
    p
}

fn criterion_1() -> Outcome {
    let inputs = all_up_to(4);
    let mut bad = Vec::new();
    for x in &inputs {
        let y = greedy_sweep(x, Sign::Both);
        match satisfied_to_rect(x, &y, AllowedElbows::NONE) {
            Ok(fs) => {
                let end = fs.replay().map(|s| s.is_end_state()).unwrap_or(false);
                if !end || fs.cost() > 2 * y.cost() {
                    bad.push(format!(
                        "{x}: end={end} cost={} |Y|={}",
                        fs.cost(),
                        y.cost()
                    ));
                }
                match rect_to_satisfied(&fs) {
                    Ok(back) if back == y && is_satisfied(back.points(), Sign::Both) => {}
                    Ok(_) => bad.push(format!("{x}: round trip changed Y")),
                    Err(e) => bad.push(format!("{x}: {e}")),
                }
            }
            Err(e) => bad.push(format!("{x}: {e}")),
        }
        for p in policies() {
            let ok = run_heuristic(x, p)
                .and_then(|ef| treerelax_to_rect(x, &ef))
                .and_then(|fs| fs.replay())
                .map(|s| s.is_end_state());
            if !matches!(ok, Ok(true)) {
                bad.push(format!("{x} {p}: {ok:?}"));
            }
        }
    }
    Outcome {
        id: "1",
        ok: bad.is_empty(),
        detail: format!(
            "{} permutations, {} violations {:?}",
            inputs.len(),
            bad.len(),
            bad.first()
        ),
    }
}

fn criterion_2() -> Outcome {
    let inputs = all_up_to(4);
    let mut bad = Vec::new();
    for x in &inputs {
        for sign in [Sign::Plus, Sign::Minus] {
            let g = greedy_sweep(x, sign).cost();
            let opt = brute_force_opt(x, sign, OptPredicate::Satisfaction, 4)
                .unwrap()
                .optimum;
            if g != opt {
                bad.push(format!("{x} {}: greedy {g} opt {opt}", sign.name()));
            }
        }
    }
    Outcome {
        id: "2",
        ok: bad.is_empty(),
        detail: format!(
            "{} permutations, {} mismatches {:?}",
            inputs.len(),
            bad.len(),
            bad.first()
        ),
    }
}

fn criterion_3() -> Outcome {
    let inputs = all_up_to(4);
    let mut bad = Vec::new();
    for x in &inputs {
        let opt = |sign, pred| brute_force_opt(x, sign, pred, 4).unwrap().optimum;
        let opt_s = opt(Sign::Both, OptPredicate::Satisfaction);
        let opt_m = opt(Sign::Both, OptPredicate::ManhattanNetwork);
        let plus = opt(Sign::Plus, OptPredicate::Satisfaction);
        let minus = opt(Sign::Minus, OptPredicate::Satisfaction);
        let m = mir(x, DEFAULT_MIS_LIMIT).unwrap().mir;
        if m > Ratio::from_integer(opt_m as i64) || opt_m > opt_s || plus.max(minus) > opt_s {
            bad.push(format!(
                "{x}: mir={m} M={opt_m} S={opt_s} +={plus} -={minus}"
            ));
        }
    }
    Outcome {
        id: "3",
        ok: bad.is_empty(),
        detail: format!(
            "{} permutations, {} violations {:?}",
            inputs.len(),
            bad.len(),
            bad.first()
        ),
    }
}

fn all_pairs_connected(ys: &BTreeSet<Point>) -> bool {
    let v: Vec<Point> = ys.iter().copied().collect();
    v.iter().enumerate().all(|(i, &a)| {
        v[i + 1..]
            .iter()
            .all(|&b| manhattan_path_exists(ys, a, b).unwrap())
    })
}

fn criterion_4() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut check = |ys: BTreeSet<Point>| {
        checked += 1;
        if is_satisfied(&ys, Sign::Both) != all_pairs_connected(&ys) {
            bad.push(format!("{ys:?}"));
        }
    };
    let cells: Vec<Point> = (1..=3)
        .flat_map(|x| (1..=3).map(move |y| Point::new(x, y)))
        .collect();
    for mask in 0u32..1 << 9 {
        check(
            (0..9)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| cells[i])
                .collect(),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..1000 {
        let n = 4 + (k % 3) as u32;
        let density = rng.gen_range(0.1..0.7);
        let ys = (1..=n)
            .flat_map(|x| (1..=n).map(move |y| Point::new(x, y)))
            .filter(|_| rng.gen_bool(density))
            .collect();
        check(ys);
    }
    Outcome {
        id: "4",
        ok: bad.is_empty(),
        detail: format!(
            "{checked} point sets, {} discrepancies {:?}",
            bad.len(),
            bad.first()
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut ops = 0;
    let mut states = 0;
    let mut bad = Vec::new();
    for x in all_up_to(2) {
        let g = StateGraph::explore(&x, 10_000).unwrap();
        states += g.states.len();
        for s in &g.states {
            for (op, direct) in enumerate_a_ops(s) {
                ops += 1;
                let want_flips = match op {
                    AOp::Rotate { .. } => 1,
                    AOp::Flip { .. } => 2,
                };
                let sim = flipview::transforms::a_op_to_flips(s, &op).and_then(|steps| {
                    let flips = steps
                        .iter()
                        .filter(|st| matches!(st, Step::Flip(..)))
                        .count();
                    let mut t = s.clone();
                    for st in &steps {
                        st.apply(&mut t, AllowedElbows::NONE)?;
                    }
                    Ok((flips, t))
                });
                match sim {
                    Ok((f, t)) if f == want_flips && t.segments() == direct.segments() => {}
                    Ok((f, _)) => bad.push(format!("{x} {op:?}: {f} flips or different segments")),
                    Err(e) => bad.push(format!("{x} {op:?}: {e}")),
                }
            }
        }
    }
    Outcome {
        id: "5",
        ok: bad.is_empty() && ops > 0,
        detail: format!(
            "{states} states, {ops} A-operations, {} discrepancies {:?}",
            bad.len(),
            bad.first()
        ),
    }
}

fn sizes(lo: usize, hi: usize) -> Vec<usize> {
    std::iter::successors(Some(lo), |n| Some(n * 2))
        .take_while(|&n| n <= hi)
        .collect()
}

fn sweep(q: Quantity, family: Family, lo: usize, hi: usize, seeds: u64) -> Vec<(usize, f64, f64)> {
    let rows = run_experiment(&ExperimentSpec {
        quantity: q,
        families: vec![family],
        sizes: sizes(lo, hi),
        seeds,
    })
    .unwrap();
    rows.iter()
        .map(|r| (r.n, r.per_n(), r.per_nlog2n().unwrap()))
        .collect()
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |label: &str,
                     rows: Vec<(usize, f64, f64)>,
                     pick: fn(&(usize, f64, f64)) -> f64,
                     hold: &dyn Fn(f64) -> bool| {
        let worst = rows
            .iter()
            .filter(|r| !hold(pick(r)))
            .map(|r| format!("n={} {:.3}", r.0, pick(r)))
            .collect::<Vec<_>>();
        let range = rows
            .iter()
            .map(pick)
            .fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if worst.is_empty() {
            notes.push(format!("{label} ok [{:.3}, {:.3}]", range.0, range.1));
        } else {
            ok = false;
            notes.push(format!("{label} violated at {}", worst.join(", ")));
        }
    };
    let le4 = |v: f64| v <= 4.0;
    check(
        "static_bst/(n lg n)<=4",
        sweep(Quantity::StaticBstCost, Family::Random, 16, 512, 5),
        |r| r.2,
        &le4,
    );
    check(
        "gkks/(n lg n)<=4",
        sweep(Quantity::GkksSize, Family::Random, 16, 512, 5),
        |r| r.2,
        &le4,
    );
    check(
        "signed_greedy/(n lg n)>=0.05",
        sweep(Quantity::SignedGreedyCost, Family::BitReversal, 8, 256, 1),
        |r| r.2,
        &|v| v >= 0.05,
    );
    let le8 = |v: f64| v <= 8.0;
    check(
        "linear_elbow/n<=8",
        sweep(Quantity::LinearElbowCost, Family::Sequential, 16, 1024, 1),
        |r| r.1,
        &le8,
    );
    check(
        "greedy/n<=8",
        sweep(Quantity::GreedyCost, Family::Sequential, 16, 1024, 1),
        |r| r.1,
        &le8,
    );
    Outcome {
        id: "6",
        ok,
        detail: notes.join("; "),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut flips = 0usize;
    let (mut h_bad, mut w_bad, mut d_bad, mut len_bad) = (0, 0, 0, 0);
    let mut first = None;
    for k in 0..200u64 {
        let n = rng.gen_range(1..=64);
        let x = flipview::generate(flipview::FamilySpec::new(Family::Random, n, Some(1000 + k)))
            .unwrap();
        let treap = build_treap(&x);
        let p0 = potentials(&treap);
        let h_bound = p0.h_total as i64 - (n as i64 - 1);
        let w_bound = potentials(&build_path(&x)).w_total as i64 - p0.w_total as i64;
        for policy in policies() {
            let ef = run_heuristic(&x, policy).unwrap();
            let mut t = treap.clone();
            let mut before = p0;
            for f in &ef.flips {
                t = apply_edge_flip(&t, f).unwrap();
                let after = potentials(&t);
                flips += 1;
                h_bad += usize::from(after.h_total >= before.h_total);
                d_bad += usize::from(after.depth_sum <= before.depth_sum);
                if after.w_total <= before.w_total {
                    w_bad += 1;
                    first.get_or_insert_with(|| {
                        format!(
                            "{x} {policy} {f}: w {} -> {}",
                            before.w_total, after.w_total
                        )
                    });
                }
                before = after;
            }
            if ef.len() as i64 > h_bound.min(w_bound) {
                len_bad += 1;
            }
        }
    }
    Outcome {
        id: "7",
        ok: h_bad + w_bad + d_bad + len_bad == 0,
        detail: format!(
            "{flips} edge-flips: h not decreasing {h_bad}, w not increasing {w_bad}, depth not increasing {d_bad}, \
             runs over min(H,W) {len_bad}; first w violation {first:?}"
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for x in all_up_to(2) {
        let flips = flip_diameter_bfs(&x, DiameterMode::Flips, 2, 10_000).unwrap();
        let aops = flip_diameter_bfs(&x, DiameterMode::AOps, 2, 10_000).unwrap();
        let opt = opt_rect_search(&x, AllowedElbows::NONE, 12).unwrap();
        notes.push(format!(
            "{x}: d'={:?} OPT^R={opt:?} diam_flips={} diam_aops={}",
            flips.initial_to_end, flips.diam, aops.diam
        ));
        let Some(opt) = opt else {
            bad.push(format!("{x}: no end state within depth 12"));
            continue;
        };
        if flips.initial_to_end != Some(opt as u32) || opt as u32 > 2 * aops.diam {
            bad.push(x.to_string());
        }
    }
    Outcome {
        id: "8",
        ok: bad.is_empty(),
        detail: format!("{} (violations: {bad:?})", notes.join("; ")),
    }
}

fn main() {
    let criteria: [fn() -> Outcome; 8] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
    ];
    let mut failed = Vec::new();
    for c in criteria {
        let t = Instant::now();
        let o = c();
        let verdict = if o.ok { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {} ({:.1?}): {}",
            o.id,
            t.elapsed(),
            o.detail
        );
        if !o.ok {
            failed.push(o.id);
        }
    }
    if failed != KNOWN_FAILURES {
        eprintln!("failing criteria {failed:?}, expected {KNOWN_FAILURES:?}");
        std::process::exit(1);
    }
}
