//! Least absolute deviations fitting via the primal simplex method.
//!
//! The L1 problem min Σ|y - Xb| is solved as the LP
//!   min Σ(u_i + v_i)  s.t.  Xb + u - v = y,  u, v >= 0,  b free,
//! with b split into positive and negative parts. Bland's smallest-index
//! pivot rule keeps the solver deterministic and cycle-free. The final
//! vertex interpolates p+1 observations; those are the fit's basis points.

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Scale-relative tolerance below which a residual counts as zero.
pub fn eps_zero(data: &Dataset) -> f64 {
    1e-8 * (1.0 + data.y().amax())
}

/// A fitted LAD hyperplane.
#[derive(Debug, Clone)]
pub struct LadFit {
    /// Coefficients, intercept first (length p+1).
    pub beta: DVector<f64>,
    /// Signed residuals y_i - b0 - Σ b_j x_ij.
    pub residuals: DVector<f64>,
    /// Row positions (0-based, ascending) interpolated by the hyperplane.
    pub basis: Vec<usize>,
    /// Sum of absolute residuals at the optimum.
    pub objective: f64,
    /// True when the optimum is non-unique or more than p+1 residuals vanish.
    pub degenerate: bool,
}

const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const ALT_OPT_TOL: f64 = 1e-7;

struct Tableau {
    n: usize,
    ncols: usize,
    /// (n+1) x (ncols+1) dense tableau; last row is the reduced-cost row,
    /// last column the right-hand side.
    t: Vec<f64>,
    /// Basic variable (column index) of each constraint row.
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.ncols + 1) + c]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.t[r * (self.ncols + 1) + c]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.ncols + 1;
        let piv = self.at(row, col);
        for c in 0..w {
            self.t[row * w + c] /= piv;
        }
        for r in 0..=self.n {
            if r == row {
                continue;
            }
            let factor = self.at(r, col);
            if factor == 0.0 {
                continue;
            }
            for c in 0..w {
                self.t[r * w + c] -= factor * self.t[row * w + c];
            }
            // pin the eliminated entry, drift here breaks Bland's invariants
            self.t[r * w + col] = 0.0;
        }
        self.basis[row] = col;
    }
}

/// Fit the LAD regression model. Deterministic: identical input bytes give
/// an identical fit.
pub fn fit_lad(data: &Dataset) -> Result<LadFit> {
    let n = data.n();
    let p = data.p();

    // Column scaling keeps tableau entries O(1) so absolute pivot
    // tolerances are meaningful on data like miles-vs-feet designs.
    let mut xscale = vec![1.0f64; p];
    for j in 0..p {
        let m = data.x().column(j).amax();
        if m > 0.0 {
            xscale[j] = m;
        }
    }
    let yscale = if data.y().amax() > 0.0 {
        data.y().amax()
    } else {
        1.0
    };

    let nbeta = p + 1;
    let ncols = 2 * nbeta + 2 * n;
    let u0 = 2 * nbeta; // first u column
    let v0 = u0 + n; // first v column

    let mut tab = Tableau {
        n,
        ncols,
        t: vec![0.0; (n + 1) * (ncols + 1)],
        basis: vec![0; n],
    };

    for i in 0..n {
        let ys = data.y()[i] / yscale;
        let sign = if ys < 0.0 { -1.0 } else { 1.0 };
        *tab.at_mut(i, 0) = sign;
        *tab.at_mut(i, nbeta) = -sign;
        for j in 0..p {
            let a = sign * data.x()[(i, j)] / xscale[j];
            *tab.at_mut(i, 1 + j) = a;
            *tab.at_mut(i, nbeta + 1 + j) = -a;
        }
        *tab.at_mut(i, u0 + i) = sign;
        *tab.at_mut(i, v0 + i) = -sign;
        *tab.at_mut(i, ncols) = sign * ys;
        tab.basis[i] = if ys < 0.0 { v0 + i } else { u0 + i };
    }

    // Reduced costs c_j - z_j for the all-ones basic cost vector.
    for c in 0..=ncols {
        let mut z = 0.0;
        for r in 0..n {
            z += tab.at(r, c);
        }
        let cost = if c >= u0 && c < ncols { 1.0 } else { 0.0 };
        *tab.at_mut(n, c) = cost - z;
    }

    let max_iters = 200 * (n + ncols) + 1000;
    let mut iters = 0;
    loop {
        // Bland: entering column is the smallest index with negative
        // reduced cost.
        let mut entering = None;
        for c in 0..ncols {
            if tab.at(n, c) < -COST_TOL {
                entering = Some(c);
                break;
            }
        }
        let Some(e) = entering else { break };

        // Ratio test; ties broken by smallest basic variable index.
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..n {
            let a = tab.at(r, e);
            if a > PIVOT_TOL {
                let ratio = tab.at(r, ncols) / a;
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - PIVOT_TOL
                            || ((ratio - lratio).abs() <= PIVOT_TOL
                                && tab.basis[r] < tab.basis[lr])
                        {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::SolverFailure(
                "unbounded pivot in LAD LP (cannot happen for feasible data)".into(),
            ));
        };
        tab.pivot(row, e);

        iters += 1;
        if iters > max_iters {
            return Err(Error::SolverFailure(format!(
                "simplex exceeded {max_iters} pivots"
            )));
        }
    }

    // Recover coefficients on the original scale.
    let mut value = vec![0.0f64; ncols];
    for r in 0..n {
        value[tab.basis[r]] = tab.at(r, ncols);
    }
    let mut beta = DVector::zeros(nbeta);
    beta[0] = (value[0] - value[nbeta]) * yscale;
    for j in 0..p {
        beta[1 + j] = (value[1 + j] - value[nbeta + 1 + j]) * yscale / xscale[j];
    }

    let residuals = data.y() - data.design() * &beta;
    let objective = residuals.iter().map(|r| r.abs()).sum();
    let eps = eps_zero(data);

    let is_basic = {
        let mut b = vec![false; ncols];
        for r in 0..n {
            b[tab.basis[r]] = true;
        }
        b
    };

    // Rows whose u and v are both nonbasic are interpolated by the vertex.
    let interpolated: Vec<usize> = (0..n)
        .filter(|&i| !is_basic[u0 + i] && !is_basic[v0 + i])
        .collect();
    let zero_rows: Vec<usize> = (0..n).filter(|&i| residuals[i].abs() <= eps).collect();

    let mut degenerate = zero_rows.len() != nbeta || interpolated.len() != nbeta;

    // A nonbasic u/v column with zero reduced cost, or a fully nonbasic
    // coefficient pair at zero reduced cost, signals a non-unique optimum.
    if !degenerate {
        for i in 0..n {
            for c in [u0 + i, v0 + i] {
                if !is_basic[c] && tab.at(n, c).abs() <= ALT_OPT_TOL {
                    degenerate = true;
                }
            }
        }
        for j in 0..nbeta {
            if !is_basic[j]
                && !is_basic[nbeta + j]
                && tab.at(n, j).abs() <= ALT_OPT_TOL
                && tab.at(n, nbeta + j).abs() <= ALT_OPT_TOL
            {
                degenerate = true;
            }
        }
    }

    // Basis points: the interpolated rows; under degeneracy, pad or trim
    // deterministically by (|residual|, index) to exactly p+1 entries.
    let basis = if zero_rows.len() == nbeta {
        zero_rows
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        let in_interp = {
            let mut b = vec![false; n];
            for &i in &interpolated {
                b[i] = true;
            }
            b
        };
        order.sort_by(|&a, &b| {
            (!in_interp[a], residuals[a].abs(), a)
                .partial_cmp(&(!in_interp[b], residuals[b].abs(), b))
                .unwrap()
        });
        let mut sel: Vec<usize> = order.into_iter().take(nbeta).collect();
        sel.sort_unstable();
        sel
    };

    Ok(LadFit {
        beta,
        residuals,
        basis,
        objective,
        degenerate,
    })
}

/// Advance to the next lexicographic k-combination of 0..n; false when done.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] != i + n - k {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive LAD oracle: enumerate every hyperplane through p+1
/// observations and return the one minimizing the absolute-deviation sum.
/// Ties go to the lexicographically smallest index set.
pub fn brute_force_lad(data: &Dataset) -> Result<LadFit> {
    let n = data.n();
    let p = data.p();
    if n > 15 || p > 3 {
        return Err(Error::BruteForceGuard { n, p });
    }
    let design = data.design();
    let eps = eps_zero(data);

    let mut candidates: Vec<(f64, Vec<usize>, DVector<f64>, DVector<f64>)> = Vec::new();
    let mut combo: Vec<usize> = (0..=p).collect();
    loop {
        // Solve the (p+1)x(p+1) interpolation system for this combination.
        let mut a = DMatrix::zeros(p + 1, p + 1);
        let mut rhs = DVector::zeros(p + 1);
        for (r, &i) in combo.iter().enumerate() {
            a.row_mut(r).copy_from(&design.row(i));
            rhs[r] = data.y()[i];
        }
        if let Some(beta) = a.full_piv_lu().solve(&rhs) {
            if beta.iter().all(|b| b.is_finite()) {
                let residuals = data.y() - &design * &beta;
                let objective: f64 = residuals.iter().map(|r| r.abs()).sum();
                candidates.push((objective, combo.clone(), beta, residuals));
            }
        }
        if !next_combination(&mut combo, n) {
            break;
        }
    }

    // Lexicographic enumeration order means the first minimizer found has
    // the lexicographically smallest index set.
    let best_idx = candidates
        .iter()
        .enumerate()
        .min_by(|(ai, a), (bi, b)| a.0.partial_cmp(&b.0).unwrap().then(ai.cmp(bi)))
        .map(|(i, _)| i)
        .ok_or(Error::AllSystemsSingular)?;
    let best_obj = candidates[best_idx].0;

    // A different hyperplane attaining the same optimum means the LAD
    // solution is non-unique.
    let mut tie = false;
    for (i, (obj, _, beta, _)) in candidates.iter().enumerate() {
        if i != best_idx
            && (obj - best_obj).abs() <= 1e-9 * (1.0 + best_obj)
            && (beta - &candidates[best_idx].2).amax()
                > 1e-7 * (1.0 + candidates[best_idx].2.amax())
        {
            tie = true;
        }
    }

    let (objective, basis, beta, residuals) = candidates.swap_remove(best_idx);
    let zero_count = residuals.iter().filter(|r| r.abs() <= eps).count();
    Ok(LadFit {
        beta,
        residuals,
        degenerate: tie || zero_count != p + 1,
        basis,
        objective,
    })
}

/// Position (0-based) of the non-basis observation with the largest
/// absolute residual; ties go to the smallest position.
pub fn max_abs_residual_index(fit: &LadFit, data: &Dataset) -> Result<usize> {
    let eps = eps_zero(data);
    let mut in_basis = vec![false; data.n()];
    for &b in &fit.basis {
        in_basis[b] = true;
    }
    let mut best: Option<(usize, f64)> = None;
    for i in 0..data.n() {
        if in_basis[i] {
            continue;
        }
        let r = fit.residuals[i].abs();
        if best.map_or(true, |(_, br)| r > br) {
            best = Some((i, r));
        }
    }
    match best {
        Some((i, r)) if r > eps => Ok(i),
        _ => Err(Error::AllResidualsZero),
    }
}
