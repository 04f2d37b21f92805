//! The three variance-reduction estimators as pure computations over
//! replication series: paired-difference variance for common random
//! numbers, pair averaging for antithetic variates, and the linear control
//! variate adjustment.
//!
//! Sample variances and covariances use the n-1 divisor throughout, which
//! makes the decomposition identities exact at any sample size.

use serde::{Deserialize, Serialize};

use crate::stats::{self, StatsError};

/// Paired observations: (X_a, X_b) for a two-alternative comparison, or
/// (X, X') for an antithetic pair of replications.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    pairs: Vec<(f64, f64)>,
}

impl PairedSeries {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self, StatsError> {
        if pairs.len() < 2 {
            return Err(StatsError::InsufficientData {
                need: 2,
                got: pairs.len(),
            });
        }
        Ok(PairedSeries { pairs })
    }

    pub fn from_slices(a: &[f64], b: &[f64]) -> Result<Self, StatsError> {
        if a.len() != b.len() {
            return Err(StatsError::LengthMismatch(a.len(), b.len()));
        }
        Self::new(a.iter().copied().zip(b.iter().copied()).collect())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn firsts(&self) -> Vec<f64> {
        self.pairs.iter().map(|&(x, _)| x).collect()
    }

    fn seconds(&self) -> Vec<f64> {
        self.pairs.iter().map(|&(_, y)| y).collect()
    }
}

/// Output of the CRN paired-difference analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrnDifference {
    pub d_series: Vec<f64>,
    pub var_d: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub cov_ab: f64,
}

/// Variance decomposition of the difference D = X_a - X_b:
/// Var(D) = Var(X_a) + Var(X_b) - 2 Cov(X_a, X_b).
///
/// Synchronized streams drive Cov positive, shrinking Var(D) relative to
/// independent runs.
pub fn crn_difference_variance(pairs: &PairedSeries) -> Result<CrnDifference, StatsError> {
    let a = pairs.firsts();
    let b = pairs.seconds();
    let d_series: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let var_d = stats::sample_variance(&d_series)?;
    let var_a = stats::sample_variance(&a)?;
    let var_b = stats::sample_variance(&b)?;
    let cov_ab = stats::sample_cov(&a, &b)?;
    debug_assert!({
        let identity = var_a + var_b - 2.0 * cov_ab;
        (var_d - identity).abs() <= 1e-9 * var_d.abs().max(1.0)
    });
    Ok(CrnDifference {
        d_series,
        var_d,
        var_a,
        var_b,
        cov_ab,
    })
}

/// Output of the antithetic pair analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AvPairs {
    pub y_series: Vec<f64>,
    pub var_y: f64,
    pub var_x: f64,
    pub var_xp: f64,
    pub cov: f64,
}

/// Pair averages Y_i = (X_i + X'_i) / 2 and their variance decomposition:
/// Var(Y) = [Var(X) + Var(X') + 2 Cov(X, X')] / 4.
///
/// Negative covariance from complemented uniforms pushes Var(Y) below the
/// variance of the same number of independent observations.
pub fn av_pair_series(pairs: &PairedSeries) -> Result<AvPairs, StatsError> {
    let x = pairs.firsts();
    let xp = pairs.seconds();
    let y_series: Vec<f64> = x.iter().zip(&xp).map(|(a, b)| (a + b) / 2.0).collect();
    let var_y = stats::sample_variance(&y_series)?;
    let var_x = stats::sample_variance(&x)?;
    let var_xp = stats::sample_variance(&xp)?;
    let cov = stats::sample_cov(&x, &xp)?;
    debug_assert!({
        let identity = (var_x + var_xp + 2.0 * cov) / 4.0;
        (var_y - identity).abs() <= 1e-9 * var_y.abs().max(1.0)
    });
    Ok(AvPairs {
        y_series,
        var_y,
        var_x,
        var_xp,
        cov,
    })
}

/// Input to the control-variate adjustment: the variable of interest, the
/// concomitant control series recorded in the same replications, and an
/// optional known expectation of the control.
#[derive(Debug, Clone)]
pub struct CvInput {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    /// E(X); defaults to the sample mean of `x`, in which case the adjusted
    /// series keeps the mean of `y` exactly.
    pub expected_x: Option<f64>,
}

impl CvInput {
    pub fn new(y: Vec<f64>, x: Vec<f64>, expected_x: Option<f64>) -> Result<Self, StatsError> {
        if y.len() != x.len() {
            return Err(StatsError::LengthMismatch(y.len(), x.len()));
        }
        if y.len() < 2 {
            return Err(StatsError::InsufficientData { need: 2, got: y.len() });
        }
        Ok(CvInput { y, x, expected_x })
    }
}

/// Output of the control-variate adjustment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvAdjusted {
    pub a_hat: f64,
    pub adjusted_series: Vec<f64>,
    pub var_raw: f64,
    pub var_adjusted: f64,
    pub correlation: f64,
    /// Set when Var(X) = 0 and the coefficient was forced to zero.
    pub degenerate_control: bool,
}

/// Adjusts each observation by the fitted linear relationship with the
/// control: a_hat = Cov(Y, X) / Var(X), adjusted_i = y_i - a_hat (x_i - E(X)).
pub fn cv_adjust(input: &CvInput) -> Result<CvAdjusted, StatsError> {
    let var_raw = stats::sample_variance(&input.y)?;
    let var_x = stats::sample_variance(&input.x)?;
    let cov = stats::sample_cov(&input.y, &input.x)?;
    let degenerate_control = var_x <= 0.0;
    let a_hat = if degenerate_control { 0.0 } else { cov / var_x };
    let expected_x = input.expected_x.unwrap_or_else(|| stats::mean(&input.x));
    let adjusted_series: Vec<f64> = input
        .y
        .iter()
        .zip(&input.x)
        .map(|(y, x)| y - a_hat * (x - expected_x))
        .collect();
    let var_adjusted = stats::sample_variance(&adjusted_series)?;
    let correlation = if degenerate_control || var_raw <= 0.0 {
        0.0
    } else {
        cov / (var_raw.sqrt() * var_x.sqrt())
    };
    Ok(CvAdjusted {
        a_hat,
        adjusted_series,
        var_raw,
        var_adjusted,
        correlation,
        degenerate_control,
    })
}
