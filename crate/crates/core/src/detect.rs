//! Iterative leverage-point and outlier detection.
//!
//! Both detectors repeatedly score the working set S with leave-one-out
//! refits, pull out the top-scoring observation, and either flag it or
//! park it in a quarantine set. Quarantined points return to S whenever a
//! flag is raised, so a flagged point cannot keep masking its peers.
//!
//! The working set is never allowed to shrink past the size floor
//! (9/10·n for leverage, 4/5·n for outliers): a round only runs if
//! removing one more point keeps S above the floor. This caps the flag
//! count at n/10 leverage points and n/5 outliers.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scores::{argmax_l, argmax_o, compute_scores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Flag,
    Quarantine,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    SizeFloorReached,
    ScoreSequenceBroken,
}

/// One round of a detector run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    /// Size of the working set at round start.
    pub m: usize,
    /// Label of the top-scoring observation.
    pub k1: usize,
    /// Its L or O score.
    pub score: u32,
    pub decision: Decision,
    /// Labels restored from quarantine this round.
    pub restored: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionReport {
    /// Flagged observation labels, in detection order.
    pub flagged: Vec<usize>,
    pub rounds: Vec<RoundTrace>,
    pub stop_reason: StopReason,
}

impl DetectionReport {
    pub fn flagged_sorted(&self) -> Vec<usize> {
        let mut f = self.flagged.clone();
        f.sort_unstable();
        f
    }
}

// Threshold fractions as exact integer ratios (numerator, denominator).
const LEVERAGE_SUBSET_FRAC: (usize, usize) = (8, 9); // L(k1) >= 8/9 (m-1)
const LEVERAGE_GLOBAL_FRAC: (usize, usize) = (3, 4); // L(k1) >= 3/4 (n-1)
const LEVERAGE_FLOOR_FRAC: (usize, usize) = (9, 10); // stop at |S| <= 9/10 n
const OUTLIER_FLOOR_FRAC: (usize, usize) = (4, 5); // stop at |S| <= 4/5 n

/// score >= (num/den) * bound, evaluated without floating point.
#[inline]
fn at_least_fraction(score: u32, (num, den): (usize, usize), bound: usize) -> bool {
    score as usize * den >= num * bound
}

/// Would removing one more point drop |S| to or below (num/den)·n?
#[inline]
fn at_size_floor(m: usize, (num, den): (usize, usize), n: usize) -> bool {
    (m - 1) * den <= num * n
}

/// Algorithm state shared by both detectors: working set S (row positions,
/// ascending), quarantine, and flagged list.
struct Working {
    s: Vec<usize>,
    quarantine: Vec<usize>,
    flagged: Vec<usize>,
}

impl Working {
    fn new(n: usize) -> Self {
        Working {
            s: (0..n).collect(),
            quarantine: Vec::new(),
            flagged: Vec::new(),
        }
    }

    fn remove(&mut self, pos: usize) {
        self.s.retain(|&q| q != pos);
    }

    /// Return every quarantined point to S, keeping S sorted.
    fn restore(&mut self) -> Vec<usize> {
        let restored = std::mem::take(&mut self.quarantine);
        self.s.extend(restored.iter().copied());
        self.s.sort_unstable();
        restored
    }
}

/// Detect leverage points: flag the top-L observation whenever its score
/// clears both the per-subset and the global threshold.
pub fn detect_leverage(data: &Dataset) -> Result<DetectionReport> {
    let n = data.n();
    let p = data.p();
    if n < p + 3 {
        return Err(Error::TooFewObservations { n, min: p + 3 });
    }

    let mut w = Working::new(n);
    let mut rounds = Vec::new();

    loop {
        let m = w.s.len();
        if at_size_floor(m, LEVERAGE_FLOOR_FRAC, n) || m - 1 < p + 3 {
            return Ok(DetectionReport {
                flagged: w.flagged.iter().map(|&i| data.label(i)).collect(),
                rounds,
                stop_reason: StopReason::SizeFloorReached,
            });
        }

        let sub = data.subset(&w.s)?;
        let table = compute_scores(&sub)?;
        let top = argmax_l(&table);
        let pos = w.s[top];
        let score = table.l_scores[top];

        let hits = at_least_fraction(score, LEVERAGE_SUBSET_FRAC, m - 1)
            && at_least_fraction(score, LEVERAGE_GLOBAL_FRAC, n - 1);

        w.remove(pos);
        let (decision, restored) = if hits {
            w.flagged.push(pos);
            (Decision::Flag, w.restore())
        } else {
            w.quarantine.push(pos);
            (Decision::Quarantine, Vec::new())
        };
        rounds.push(RoundTrace {
            m,
            k1: data.label(pos),
            score,
            decision,
            restored: restored.iter().map(|&i| data.label(i)).collect(),
        });
    }
}

/// Detect outliers: flag the top-O observation when it is the maximum of
/// every subset it appears in (score m-1) and continues the strictly
/// decreasing run tracked by the last maximum score.
pub fn detect_outliers(data: &Dataset) -> Result<DetectionReport> {
    let n = data.n();
    let p = data.p();
    if n < p + 3 {
        return Err(Error::TooFewObservations { n, min: p + 3 });
    }

    let mut w = Working::new(n);
    let mut rounds = Vec::new();
    let mut lms: u32 = 0;

    loop {
        let m = w.s.len();
        if at_size_floor(m, OUTLIER_FLOOR_FRAC, n) || m - 1 < p + 3 {
            return Ok(DetectionReport {
                flagged: w.flagged.iter().map(|&i| data.label(i)).collect(),
                rounds,
                stop_reason: StopReason::SizeFloorReached,
            });
        }

        let sub = data.subset(&w.s)?;
        let table = compute_scores(&sub)?;
        let top = argmax_o(&table);
        let pos = w.s[top];
        let score = table.o_scores[top];

        if score as usize == m - 1 {
            if lms == 0 || score == lms - 1 {
                lms = score;
                w.remove(pos);
                w.flagged.push(pos);
                let restored = w.restore();
                rounds.push(RoundTrace {
                    m,
                    k1: data.label(pos),
                    score,
                    decision: Decision::Flag,
                    restored: restored.iter().map(|&i| data.label(i)).collect(),
                });
            } else {
                rounds.push(RoundTrace {
                    m,
                    k1: data.label(pos),
                    score,
                    decision: Decision::Stop,
                    restored: Vec::new(),
                });
                return Ok(DetectionReport {
                    flagged: w.flagged.iter().map(|&i| data.label(i)).collect(),
                    rounds,
                    stop_reason: StopReason::ScoreSequenceBroken,
                });
            }
        } else {
            w.remove(pos);
            w.quarantine.push(pos);
            rounds.push(RoundTrace {
                m,
                k1: data.label(pos),
                score,
                decision: Decision::Quarantine,
                restored: Vec::new(),
            });
        }
    }
}
