use serde::Serialize;

use super::cost::CostParams;
use super::grid::{ActionGrid, EnvAction};
use super::system::{Evaluation, SystemModel};
use super::workload::WorkloadSpec;
use crate::{Error, Result};

/// Largest grid the exhaustive search accepts.
pub const MAX_ENUMERATION: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub index: usize,
    pub action: EnvAction,
    pub evaluation: Evaluation,
}

/// Exhaustive minimum of the cost over every action of `grid`.
///
/// Ties on cost go to the lower energy, then to the lower action index.
pub fn brute_force_optimum(
    grid: &ActionGrid,
    sys: &SystemModel,
    w: &WorkloadSpec,
    bandwidth: f64,
    cp: &CostParams,
) -> Result<Optimum> {
    if grid.len() > MAX_ENUMERATION {
        return Err(Error::domain(format!(
            "grid of {} actions exceeds the enumeration limit {MAX_ENUMERATION}",
            grid.len()
        )));
    }
    let mut best: Option<Optimum> = None;
    for (index, action) in grid.iter().enumerate() {
        let evaluation = sys.evaluate(w, &action, bandwidth, cp)?;
        let better = match &best {
            None => true,
            Some(b) => {
                let (c, bc) = (evaluation.cost, b.evaluation.cost);
                c < bc || (c == bc && evaluation.energy.total < b.evaluation.energy.total)
            }
        };
        if better {
            best = Some(Optimum { index, action, evaluation });
        }
    }
    best.ok_or_else(|| Error::domain("empty action grid"))
}
