//! Growth-curve sweeps over input families, emitted as TSV.

use std::fmt;
use std::str::FromStr;

use crate::bounds::gkks_network;
use crate::bst::{static_balanced_trace, validate_trace};
use crate::error::{Error, Result};
use crate::geometry::{generate, Family, FamilySpec, PermutationPointSet};
use crate::rect::{linear_flip_sequence_neighbor_elbows, AllowedElbows};
use crate::satisfied::{greedy_sweep, signed_greedy, Sign};
use crate::tree::{run_heuristic, HeuristicPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    GreedyCost,
    SignedGreedyCost,
    GkksSize,
    HeuristicFlips(HeuristicPolicy),
    StaticBstCost,
    LinearElbowCost,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::GreedyCost => f.write_str("greedy_cost"),
            Quantity::SignedGreedyCost => f.write_str("signed_greedy_cost"),
            Quantity::GkksSize => f.write_str("gkks_size"),
            Quantity::HeuristicFlips(p) => write!(f, "heuristic_flips({p})"),
            Quantity::StaticBstCost => f.write_str("static_bst_cost"),
            Quantity::LinearElbowCost => f.write_str("linear_elbow_cost"),
        }
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("heuristic_flips") {
            let policy = rest.trim_start_matches([':', '(']).trim_end_matches(')');
            let policy = if policy.is_empty() {
                "max_height_drop"
            } else {
                policy
            };
            return policy.parse().map(Quantity::HeuristicFlips);
        }
        match s {
            "greedy_cost" => Ok(Quantity::GreedyCost),
            "signed_greedy_cost" => Ok(Quantity::SignedGreedyCost),
            "gkks_size" => Ok(Quantity::GkksSize),
            "static_bst_cost" => Ok(Quantity::StaticBstCost),
            "linear_elbow_cost" => Ok(Quantity::LinearElbowCost),
            other => Err(format!(
                "unknown quantity `{other}` (greedy_cost|signed_greedy_cost|gkks_size|heuristic_flips[:policy]|static_bst_cost|linear_elbow_cost)"
            )),
        }
    }
}

/// Evaluate one quantity on one input.
pub fn measure(q: Quantity, x: &PermutationPointSet) -> Result<u64> {
    Ok(match q {
        Quantity::GreedyCost => greedy_sweep(x, Sign::Both).cost() as u64,
        Quantity::SignedGreedyCost => signed_greedy(x).cost() as u64,
        Quantity::GkksSize => gkks_network(x).network.cost() as u64,
        Quantity::HeuristicFlips(p) => run_heuristic(x, p)?.len() as u64,
        Quantity::StaticBstCost => validate_trace(&static_balanced_trace(x), x)?,
        Quantity::LinearElbowCost => {
            linear_flip_sequence_neighbor_elbows(x, AllowedElbows::DOWN_PAIR)?.cost() as u64
        }
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub quantity: Quantity,
    pub families: Vec<Family>,
    pub sizes: Vec<usize>,
    /// Seeds `0..seeds` for randomized families.
    pub seeds: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub family: Family,
    pub seed: Option<u64>,
    pub quantity: Quantity,
    pub value: u64,
}

impl ExperimentRow {
    pub fn per_n(&self) -> f64 {
        self.value as f64 / self.n as f64
    }

    /// `value / (n log2 n)`, undefined for `n = 1`.
    pub fn per_nlog2n(&self) -> Option<f64> {
        (self.n >= 2).then(|| self.value as f64 / (self.n as f64 * (self.n as f64).log2()))
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    if spec.sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidOperation(
            "sizes must be sorted ascending".into(),
        ));
    }
    let mut rows = Vec::new();
    for &family in &spec.families {
        if family.is_randomized() && spec.seeds == 0 {
            return Err(Error::InvalidOperation(format!(
                "family {} needs at least one seed",
                family.name()
            )));
        }
        for &n in &spec.sizes {
            let seeds: Vec<Option<u64>> = if family.is_randomized() {
                (0..spec.seeds).map(Some).collect()
            } else {
                vec![None]
            };
            for seed in seeds {
                let x = generate(FamilySpec::new(family, n, seed))?;
                rows.push(ExperimentRow {
                    n,
                    family,
                    seed,
                    quantity: spec.quantity,
                    value: measure(spec.quantity, &x)?,
                });
            }
        }
    }
    rows.sort_by(|a, b| (a.family.name(), a.n, a.seed).cmp(&(b.family.name(), b.n, b.seed)));
    Ok(rows)
}

pub const TSV_HEADER: &str = "n\tfamily\tseed\tquantity\tvalue\tper_n\tper_nlog2n";

pub fn rows_to_tsv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for r in rows {
        let seed = r.seed.map_or("-".to_string(), |s| s.to_string());
        let nlog = r
            .per_nlog2n()
            .map_or("-".to_string(), |v| format!("{v:.6}"));
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{}\n",
            r.n,
            r.family.name(),
            seed,
            r.quantity,
            r.value,
            r.per_n(),
            nlog
        ));
    }
    out
}
