use crate::error::{Error, Result};

use super::pipeline::{run_pipeline, Workspace};
use super::{MethodSpec, Params};

/// A held-out donor still needs donors of its own.
pub const LOSO_MIN_SUBJECTS: usize = 3;

/// Picks the grid point with the best mean test accuracy when each
/// non-target subject in turn plays the target and the remaining
/// non-target subjects are its donors. The target's data is never read.
/// Ties go to the earliest grid point.
pub fn loso_select_params(ws: &Workspace<'_>, spec: &MethodSpec, target: usize) -> Result<Params> {
    if ws.len() < LOSO_MIN_SUBJECTS {
        return Err(Error::TooFewSubjects {
            required: LOSO_MIN_SUBJECTS,
            found: ws.len(),
        });
    }
    if target >= ws.len() {
        return Err(Error::InvalidParameter(format!("target index {target} out of range")));
    }
    let pool: Vec<usize> = (0..ws.len()).filter(|&i| i != target).collect();
    let grid = spec.grid(pool.len() - 1)?;
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let mut best: Option<(f64, Params)> = None;
    for params in grid {
        let mut total = 0.0;
        for &pseudo in &pool {
            let donors: Vec<usize> = pool.iter().copied().filter(|&d| d != pseudo).collect();
            debug_assert!(pseudo != target && !donors.contains(&target));
            total += run_pipeline(ws, spec.method, pseudo, &donors, params)?.test_accuracy;
        }
        let score = total / pool.len() as f64;
        if best.is_none_or(|(b, _)| score > b) {
            best = Some((score, params));
        }
    }
    Ok(best.expect("grid is nonempty").1)
}
