//! Classical least-squares diagnostics: hat-matrix diagonal and
//! studentized residuals with the usual cut-offs h_ii > 2(p+1)/n and
//! studentized residual > 2.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutlierRule {
    /// Flag studentized residual > 2, exactly as printed in the usual
    /// cut-off formula.
    OneSided,
    /// Flag |studentized residual| > 2. Default: negative outliers are
    /// invisible to the one-sided rule.
    TwoSided,
}

#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Coefficients, intercept first.
    pub beta: DVector<f64>,
    pub residuals: DVector<f64>,
    /// sqrt(RSS / (n - p - 1)).
    pub sigma_hat: f64,
}

#[derive(Debug, Clone)]
pub struct ClassicalReport {
    pub h_diag: Vec<f64>,
    pub student_res: Vec<f64>,
    pub sigma_hat: f64,
    /// Labels where h_ii > 2(p+1)/n, ascending.
    pub leverage_flags: Vec<usize>,
    /// Labels flagged by the studentized-residual rule, ascending.
    pub outlier_flags: Vec<usize>,
    /// Labels with h_ii so close to 1 the studentized residual is
    /// undefined; excluded from outlier_flags.
    pub undefined_student: Vec<usize>,
    pub rule: OutlierRule,
}

/// Ordinary least squares via QR on the intercept-augmented design.
pub fn fit_ols(data: &Dataset) -> Result<OlsFit> {
    let design = data.design();
    let n = data.n();
    let p = data.p();

    let qr = design.clone().qr();
    let r = qr.r();
    let rank_tol = 1e-10 * r.diagonal().amax().max(1.0);
    if r.diagonal().iter().any(|d| d.abs() <= rank_tol) {
        return Err(Error::RankDeficient);
    }
    let qty = qr.q().transpose() * data.y();
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient)?;
    let residuals = data.y() - design * &beta;
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let sigma_hat = (rss / (n - p - 1) as f64).sqrt();
    Ok(OlsFit {
        beta,
        residuals,
        sigma_hat,
    })
}

/// Hat-matrix diagonal h_ii = ||row_i(Q1)||^2 from the thin QR of the
/// design; no explicit inverse is formed.
pub fn hat_diagonal(data: &Dataset) -> Result<Vec<f64>> {
    let design = data.design();
    let qr = design.qr();
    let r = qr.r();
    let rank_tol = 1e-10 * r.diagonal().amax().max(1.0);
    if r.diagonal().iter().any(|d| d.abs() <= rank_tol) {
        return Err(Error::RankDeficient);
    }
    let q = qr.q();
    Ok((0..data.n()).map(|i| q.row(i).norm_squared()).collect())
}

pub fn classical_flags(data: &Dataset, rule: OutlierRule) -> Result<ClassicalReport> {
    let n = data.n();
    let p = data.p();
    let ols = fit_ols(data)?;
    let h_diag = hat_diagonal(data)?;

    let h_cut = 2.0 * (p + 1) as f64 / n as f64;
    let leverage_flags: Vec<usize> = (0..n)
        .filter(|&i| h_diag[i] > h_cut)
        .map(|i| data.label(i))
        .collect();

    let mut student_res = vec![0.0; n];
    let mut undefined_student = Vec::new();
    let mut outlier_flags = Vec::new();
    for i in 0..n {
        let denom = 1.0 - h_diag[i];
        if denom <= 1e-12 {
            student_res[i] = f64::NAN;
            undefined_student.push(data.label(i));
            continue;
        }
        let t = ols.residuals[i] / (ols.sigma_hat * denom.sqrt());
        student_res[i] = t;
        let hit = match rule {
            OutlierRule::OneSided => t > 2.0,
            OutlierRule::TwoSided => t.abs() > 2.0,
        };
        if hit {
            outlier_flags.push(data.label(i));
        }
    }

    Ok(ClassicalReport {
        h_diag,
        student_res,
        sigma_hat: ols.sigma_hat,
        leverage_flags,
        outlier_flags,
        undefined_student,
        rule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_fit_has_zero_sigma() {
        let x = DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        let y = DVector::from_column_slice(&[1.0, 3.0, 5.0, 7.0]);
        let data = Dataset::new(x, y).unwrap();
        let ols = fit_ols(&data).unwrap();
        assert_abs_diff_eq!(ols.sigma_hat, 0.0, epsilon = 1e-10);
        assert!(ols.residuals.amax() < 1e-10);
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let x = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 2.0]);
        let y = DVector::from_column_slice(&[0.0, 1.0, 2.5]);
        let data = Dataset::new(x, y).unwrap();
        let ols = fit_ols(&data).unwrap();
        let d = data.design();
        let g = d.transpose() * &ols.residuals;
        assert!(g.amax() < 1e-10);
    }

    #[test]
    fn coefficients_match_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let x = DMatrix::from_fn(20, 2, |_, _| rng.gen_range(-3.0..3.0));
        let y = DVector::from_fn(20, |_, _| rng.gen_range(-3.0..3.0));
        let data = Dataset::new(x, y).unwrap();
        let ols = fit_ols(&data).unwrap();
        let d = data.design();
        let beta_ne = (d.transpose() * &d)
            .try_inverse()
            .unwrap()
            * d.transpose()
            * data.y();
        assert!((ols.beta - beta_ne).amax() < 1e-9);
    }

    #[test]
    fn hat_trace_and_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DMatrix::from_fn(15, 2, |_, _| rng.gen_range(-2.0..2.0));
        let y = DVector::from_fn(15, |_, _| rng.gen_range(-2.0..2.0));
        let data = Dataset::new(x, y).unwrap();
        let h = hat_diagonal(&data).unwrap();
        let trace: f64 = h.iter().sum();
        assert_abs_diff_eq!(trace, 3.0, epsilon = 1e-9);
        for &hi in &h {
            assert!(hi >= -1e-12 && hi <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn hat_projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = DMatrix::from_fn(10, 2, |_, _| rng.gen_range(-2.0..2.0));
        let y = DVector::from_fn(10, |_, _| rng.gen_range(-2.0..2.0));
        let data = Dataset::new(x, y).unwrap();
        let d = data.design();
        let h = &d * (d.transpose() * &d).try_inverse().unwrap() * d.transpose();
        let hh = &h * &h;
        assert!((hh - &h).amax() < 1e-9);
        let diag = hat_diagonal(&data).unwrap();
        for i in 0..10 {
            assert_abs_diff_eq!(diag[i], h[(i, i)], epsilon = 1e-9);
        }
    }

    #[test]
    fn balanced_design_flags_nothing() {
        // Four equally spaced symmetric x values repeated give uniform-ish
        // leverage below the 2(p+1)/n cut.
        let xs = [-3.0, -1.0, 1.0, 3.0, -3.0, -1.0, 1.0, 3.0];
        let x = DMatrix::from_column_slice(8, 1, &xs);
        let y = DVector::from_fn(8, |i, _| xs[i] * 0.5 + if i % 2 == 0 { 0.1 } else { -0.1 });
        let data = Dataset::new(x, y).unwrap();
        let report = classical_flags(&data, OutlierRule::TwoSided).unwrap();
        assert!(report.leverage_flags.is_empty());
    }

    #[test]
    fn rank_deficiency_detected() {
        let x = DMatrix::from_fn(6, 2, |i, j| if j == 0 { i as f64 } else { 2.0 * i as f64 });
        let y = DVector::from_fn(6, |i, _| i as f64);
        let data = Dataset::new(x, y).unwrap();
        assert!(matches!(fit_ols(&data), Err(Error::RankDeficient)));
    }
}
