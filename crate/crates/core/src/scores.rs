//! Leave-one-out L and O scores.
//!
//! For each of the n subsets obtained by deleting one observation, the LAD
//! model is refitted. Every basis point of a subset fit earns one L point;
//! the non-basis point with the largest absolute residual earns one O point.
//! High L marks leverage points, high O marks outliers.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lad::{fit_lad, max_abs_residual_index};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreTable {
    /// L(k) per row position of the scored dataset.
    pub l_scores: Vec<u32>,
    /// O(k) per row position.
    pub o_scores: Vec<u32>,
    /// Observation labels, parallel to the score vectors.
    pub labels: Vec<usize>,
    pub n: usize,
    pub p: usize,
    /// Deleted-row positions whose subset fit reported degeneracy.
    pub degenerate_subsets: Vec<usize>,
}

/// One subset fit's contribution: positions (in the full dataset) of the
/// basis points, the O-scored point, and the degeneracy flag.
struct SubsetOutcome {
    deleted: usize,
    l_positions: Vec<usize>,
    o_position: usize,
    degenerate: bool,
}

fn score_subset(data: &Dataset, deleted: usize) -> Result<SubsetOutcome> {
    let sub = data.delete_one(deleted)?;
    let fit = fit_lad(&sub)?;
    let back = |s: usize| if s < deleted { s } else { s + 1 };
    let o_sub = max_abs_residual_index(&fit, &sub)?;
    Ok(SubsetOutcome {
        deleted,
        l_positions: fit.basis.iter().map(|&s| back(s)).collect(),
        o_position: back(o_sub),
        degenerate: fit.degenerate,
    })
}

/// Fit all n leave-one-out subsets (in parallel) and accumulate the scores.
/// The reduction is pure integer addition, so the table is identical for
/// any thread count or evaluation order.
pub fn compute_scores(data: &Dataset) -> Result<ScoreTable> {
    let n = data.n();
    let p = data.p();
    if n < p + 3 {
        return Err(Error::TooFewObservations { n, min: p + 3 });
    }

    let outcomes: Vec<SubsetOutcome> = (0..n)
        .into_par_iter()
        .map(|d| score_subset(data, d))
        .collect::<Result<_>>()?;

    let mut l_scores = vec![0u32; n];
    let mut o_scores = vec![0u32; n];
    let mut degenerate_subsets = Vec::new();
    for out in &outcomes {
        for &pos in &out.l_positions {
            l_scores[pos] += 1;
        }
        o_scores[out.o_position] += 1;
        if out.degenerate {
            degenerate_subsets.push(out.deleted);
        }
    }
    degenerate_subsets.sort_unstable();

    Ok(ScoreTable {
        l_scores,
        o_scores,
        labels: data.labels().to_vec(),
        n,
        p,
        degenerate_subsets,
    })
}

/// One row of the sorted score listing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreRow {
    pub label: usize,
    pub l: u32,
    pub o: u32,
}

/// Observations ordered by descending L and, separately, by descending O.
/// Equal scores fall back to ascending label order.
pub struct ScoreSummary {
    pub by_l: Vec<ScoreRow>,
    pub by_o: Vec<ScoreRow>,
}

pub fn score_summary(table: &ScoreTable) -> ScoreSummary {
    let rows: Vec<ScoreRow> = (0..table.n)
        .map(|i| ScoreRow {
            label: table.labels[i],
            l: table.l_scores[i],
            o: table.o_scores[i],
        })
        .collect();
    let mut by_l = rows.clone();
    by_l.sort_by(|a, b| b.l.cmp(&a.l).then(a.label.cmp(&b.label)));
    let mut by_o = rows;
    by_o.sort_by(|a, b| b.o.cmp(&a.o).then(a.label.cmp(&b.label)));
    ScoreSummary { by_l, by_o }
}

/// Position of the row maximizing L; ties to the smallest label.
pub fn argmax_l(table: &ScoreTable) -> usize {
    argmax(&table.l_scores)
}

/// Position of the row maximizing O; ties to the smallest label.
pub fn argmax_o(table: &ScoreTable) -> usize {
    argmax(&table.o_scores)
}

fn argmax(scores: &[u32]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
