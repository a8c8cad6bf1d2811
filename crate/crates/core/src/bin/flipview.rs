use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flipview::bounds::{self, MisMode, DEFAULT_MIS_LIMIT};
use flipview::bst::{static_balanced_trace, validate_trace, BstTrace};
use flipview::error::Error;
use flipview::experiment::{rows_to_tsv, run_experiment, ExperimentSpec, Quantity};
use flipview::geometry::{
    generate, parse_permutation, Family, FamilySpec, PermutationPointSet, Point,
};
use flipview::rect::{
    self, linear_flip_sequence_neighbor_elbows, AOp, AllowedElbows, DiameterMode, FlipSequence,
    Segment, DEFAULT_DIAMETER_LIMIT, DEFAULT_STATE_LIMIT,
};
use flipview::satisfied::{
    brute_force_opt, greedy_sweep, signed_greedy, OptPredicate, PointSuperset, Sign,
    DEFAULT_OPT_LIMIT,
};
use flipview::transforms::{
    a_op_to_flips, rect_to_satisfied, satisfied_to_rect, treerelax_to_rect,
};
use flipview::tree::{run_heuristic, EdgeFlipSequence, HeuristicPolicy};

#[derive(Parser)]
#[command(
    name = "flipview",
    version,
    about = "Geometric BST models, rectangulation flips and tree relaxation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a permutation from a family.
    Gen(GenArgs),
    /// Run a model on a permutation and print its output file.
    Trace(TraceArgs),
    /// Convert between flip sequences, supersets and relaxations.
    Transform(TransformArgs),
    /// Check a flip sequence, edge-flip sequence or BST trace file.
    Replay(ReplayArgs),
    /// Lower bounds and exhaustive optima.
    Bounds(BoundsArgs),
    /// Flip distances over all reachable states.
    Diameter(DiameterArgs),
    /// Sweep a quantity over families and sizes, printing TSV.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Permutation such as `2,6,4,3,1,5`.
    #[arg(long, conflicts_with_all = ["input", "family"])]
    perm: Option<String>,
    /// File holding a permutation.
    #[arg(long, conflicts_with = "family")]
    input: Option<PathBuf>,
    #[arg(long, requires = "n")]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl InputArgs {
    fn load(&self) -> Result<PermutationPointSet, Error> {
        if let Some(p) = &self.perm {
            return parse_permutation(p);
        }
        if let Some(path) = &self.input {
            let text = read(path)?;
            let line = text
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty() && !l.starts_with('#'))
                .ok_or(Error::Parse {
                    line: 1,
                    message: "empty permutation file".into(),
                })?;
            return parse_permutation(line.trim_start_matches("X:"));
        }
        if let (Some(family), Some(n)) = (self.family, self.n) {
            return generate(FamilySpec::new(family, n, self.seed));
        }
        Err(Error::InvalidOperation(
            "give --perm, --input or --family with --n".into(),
        ))
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Greedy,
    SignedGreedy,
    Heuristic,
    Gkks,
    StaticBst,
    LinearElbow,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[command(flatten)]
    input: InputArgs,
    /// Sign for the greedy sweep.
    #[arg(long, default_value = "both")]
    sign: Sign,
    #[arg(long, default_value = "max_height_drop")]
    policy: HeuristicPolicy,
    /// Elbow pair for the linear algorithm (`down` or `up`).
    #[arg(long, default_value = "down")]
    elbows: AllowedElbows,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformKind {
    RectToSat,
    SatToRect,
    TreeToRect,
    AopToFlips,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(value_enum)]
    kind: TransformKind,
    /// Input file: flip sequence, superset or edge-flip sequence.
    #[arg(long)]
    input: PathBuf,
    /// Elbows allowed by `sat-to-rect`.
    #[arg(long, default_value = "none")]
    elbows: AllowedElbows,
    /// A-operation for `aop-to-flips`, applied to the state the input flip
    /// sequence ends in: `rotate P Q PIVOT FAR` or `aflip P1 Q1 P2 Q2 V W`.
    #[arg(long)]
    op: Option<String>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    input: PathBuf,
    /// Elbow set; defaults to the one recorded in the file.
    #[arg(long)]
    elbows: Option<AllowedElbows>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = DEFAULT_OPT_LIMIT)]
    opt_limit: usize,
    #[arg(long, default_value_t = DEFAULT_MIS_LIMIT)]
    mis_limit: usize,
    /// Skip the exhaustive optima.
    #[arg(long)]
    no_opt: bool,
}

#[derive(Args)]
struct DiameterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "flips")]
    mode: DiameterMode,
    #[arg(long, default_value_t = DEFAULT_DIAMETER_LIMIT)]
    diameter_limit: usize,
    #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
    state_limit: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    quantity: Quantity,
    /// Comma-separated families.
    #[arg(long, value_delimiter = ',', required = true)]
    family: Vec<Family>,
    /// Comma-separated sizes, or `LO..HI` for the powers of two in between.
    #[arg(long)]
    sizes: String,
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidOperation(format!("cannot read {}: {e}", path.display())))
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, Error> {
    let bad = |m: String| Error::Parse {
        line: 1,
        message: m,
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|e| bad(format!("bad size `{lo}`: {e}")))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|e| bad(format!("bad size `{hi}`: {e}")))?;
        if lo == 0 {
            return Err(bad("sizes start at 1".into()));
        }
        let mut out = Vec::new();
        let mut n = lo.next_power_of_two();
        while n <= hi {
            out.push(n);
            n *= 2;
        }
        return Ok(out);
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e| bad(format!("bad size `{t}`: {e}")))
        })
        .collect()
}

fn parse_op(s: &str) -> Result<AOp, Error> {
    let bad = |m: &str| Error::Parse {
        line: 1,
        message: format!("--op: {m}"),
    };
    let mut toks = s.split_whitespace();
    let kind = toks.next().ok_or_else(|| bad("empty"))?;
    let pts: Vec<Point> = toks
        .map(|t| t.parse::<Point>().map_err(|e| bad(&e)))
        .collect::<Result<_, _>>()?;
    match (kind, pts.as_slice()) {
        ("rotate", [p, q, pivot, far]) => Ok(AOp::Rotate {
            seg: Segment::new(*p, *q)?,
            pivot: *pivot,
            new_far_end: *far,
        }),
        ("aflip", [p1, q1, p2, q2, v, w]) => Ok(AOp::Flip {
            seg1: Segment::new(*p1, *q1)?,
            seg2: Segment::new(*p2, *q2)?,
            v: *v,
            w: *w,
        }),
        _ => Err(bad(
            "expected `rotate P Q PIVOT FAR` or `aflip P1 Q1 P2 Q2 V W`",
        )),
    }
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.cmd {
        Cmd::Gen(a) => Ok(format!(
            "{}\n",
            generate(FamilySpec::new(a.family, a.n, a.seed))?
        )),
        Cmd::Trace(a) => {
            let x = a.input.load()?;
            Ok(match a.model {
                Model::Greedy => greedy_sweep(&x, a.sign).to_text(&format!("greedy-{}", a.sign)),
                Model::SignedGreedy => signed_greedy(&x).to_text("signed-greedy"),
                Model::Gkks => bounds::gkks_network(&x).network.to_text("gkks"),
                Model::Heuristic => run_heuristic(&x, a.policy)?.to_text(),
                Model::StaticBst => static_balanced_trace(&x).to_text(&x),
                Model::LinearElbow => linear_flip_sequence_neighbor_elbows(&x, a.elbows)?.to_text(),
            })
        }
        Cmd::Transform(a) => {
            let text = read(&a.input)?;
            match a.kind {
                TransformKind::RectToSat => {
                    Ok(rect_to_satisfied(&FlipSequence::parse(&text)?)?.to_text("rect-to-sat"))
                }
                TransformKind::SatToRect => {
                    let y = PointSuperset::parse(&text)?;
                    Ok(satisfied_to_rect(y.base(), &y, a.elbows)?.to_text())
                }
                TransformKind::TreeToRect => {
                    let ef = EdgeFlipSequence::parse(&text)?;
                    Ok(treerelax_to_rect(&ef.x, &ef)?.to_text())
                }
                TransformKind::AopToFlips => {
                    let op = parse_op(
                        a.op.as_deref()
                            .ok_or(Error::InvalidOperation("--op is required".into()))?,
                    )?;
                    let fs = FlipSequence::parse(&text)?;
                    let state = fs.replay()?;
                    let steps = a_op_to_flips(&state, &op)?;
                    let mut out = fs.clone();
                    out.steps.extend(steps);
                    Ok(out.to_text())
                }
            }
        }
        Cmd::Replay(a) => {
            let text = read(&a.input)?;
            let has = |prefix: &str| text.lines().any(|l| l.trim_start().starts_with(prefix));
            if has("eflip") {
                let ef = EdgeFlipSequence::parse(&text)?;
                let t = ef.replay()?;
                Ok(format!("flips={} path={}\n", ef.len(), t.is_path()))
            } else if has("tree:") {
                let (x, trace): (PermutationPointSet, BstTrace) = BstTrace::parse(&text)?;
                Ok(format!("cost={}\n", validate_trace(&trace, &x)?))
            } else if has("X:") {
                let fs = FlipSequence::parse(&text)?;
                let end = fs.replay_under(a.elbows.unwrap_or(fs.elbows))?;
                Ok(format!(
                    "cost={} end_state={}\n",
                    fs.cost(),
                    end.is_end_state()
                ))
            } else {
                let y = PointSuperset::parse(&text)?;
                let sat = |sign| flipview::satisfied::is_satisfied(y.points(), sign);
                let net = bounds::is_manhattan_network(y.base(), y.points())?;
                Ok(format!(
                    "cost={} satisfied={} plus={} minus={} network={net}\n",
                    y.cost(),
                    sat(Sign::Both),
                    sat(Sign::Plus),
                    sat(Sign::Minus)
                ))
            }
        }
        Cmd::Bounds(a) => {
            let x = a.input.load()?;
            let m = bounds::mir(&x, a.mis_limit)?;
            let greedy =
                bounds::max_independent_rectangles(&x, Sign::Both, MisMode::Greedy, a.mis_limit)?;
            let mut out = format!(
                "n={}\nindependent_rectangles={}\nindependent_rectangles_greedy={}\nmir={}\n",
                x.n(),
                m.i_size,
                greedy.len(),
                m.mir
            );
            if !a.no_opt {
                let opt =
                    |sign, pred| brute_force_opt(&x, sign, pred, a.opt_limit).map(|r| r.optimum);
                out.push_str(&format!(
                    "opt_s={}\n",
                    opt(Sign::Both, OptPredicate::Satisfaction)?
                ));
                out.push_str(&format!(
                    "opt_s_plus={}\n",
                    opt(Sign::Plus, OptPredicate::Satisfaction)?
                ));
                out.push_str(&format!(
                    "opt_s_minus={}\n",
                    opt(Sign::Minus, OptPredicate::Satisfaction)?
                ));
                let r = bounds::verify_signed_mn_lower_bound(&x, a.opt_limit, a.mis_limit)?;
                out.push_str(&format!(
                    "opt_m={}\nopt_m_plus={}\nopt_m_minus={}\nindependent_plus={}\nindependent_minus={}\n",
                    r.opt_m, r.opt_m_plus, r.opt_m_minus, r.i_plus, r.i_minus
                ));
            }
            Ok(out)
        }
        Cmd::Diameter(a) => {
            let x = a.input.load()?;
            let r = rect::flip_diameter_bfs(&x, a.mode, a.diameter_limit, a.state_limit)?;
            let d0 = r.initial_to_end.map_or("-".to_string(), |d| d.to_string());
            Ok(format!(
                "diam={}\nstates={}\nunreachable_pairs={}\ninitial_to_end={d0}\n",
                r.diam, r.state_count, r.unreachable_pairs
            ))
        }
        Cmd::Experiment(a) => {
            let spec = ExperimentSpec {
                quantity: a.quantity,
                families: a.family,
                sizes: parse_sizes(&a.sizes)?,
                seeds: a.seeds,
            };
            let tsv = rows_to_tsv(&run_experiment(&spec)?);
            match a.out {
                Some(path) => {
                    fs::write(&path, &tsv).map_err(|e| {
                        Error::InvalidOperation(format!("cannot write {}: {e}", path.display()))
                    })?;
                    Ok(String::new())
                }
                None => Ok(tsv),
            }
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::LimitExceeded { .. }
        | Error::Unsupported(_)
        | Error::EmptyPermutation
        | Error::DuplicateValue(_)
        | Error::ValueOutOfRange { .. }
        | Error::NotPowerOfTwo(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
