//! Error metrics and the two-sample test battery used to compare
//! reconstruction methods.
//!
//! [`select_and_compare`] picks the comparison test from the data: both
//! samples are screened with Lilliefors; if either looks non-normal the
//! Mann-Whitney U test is used, otherwise Levene decides between the
//! equal-variance t-test and Welch's t-test.

mod errors;
pub mod lilliefors;
mod mann_whitney;
mod parametric;

use serde::{Deserialize, Serialize};

pub use errors::{pose_errors, ErrorSummary, ScopeStats};
pub use lilliefors::lilliefors_normality;
pub use mann_whitney::mann_whitney_u;
pub use parametric::{levene_variance_test, levene_variance_test_with, t_test_equal_var, t_test_welch, LeveneCenter};

use crate::error::{Error, Result};

/// Significance level for every decision in the battery.
pub const ALPHA: f64 = 0.05;

/// p-values below this are reported as zero.
pub const REPORT_FLOOR: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestKind {
    /// Two-tailed t-test with pooled variance.
    Teq,
    /// Two-tailed Welch t-test, Satterthwaite degrees of freedom.
    Tneq,
    /// Mann-Whitney U test.
    U,
    Lilliefors,
    Levene,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub p_value: f64,
    pub statistic: f64,
    /// Degrees of freedom, for t and F statistics (denominator df for F).
    pub df: Option<f64>,
    pub test_kind: TestKind,
    pub significant_at_5pct: bool,
    pub reported_p: f64,
}

impl TestResult {
    pub(crate) fn new(test_kind: TestKind, statistic: f64, df: Option<f64>, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        // JSON has no infinities
        let statistic = statistic.clamp(f64::MIN, f64::MAX);
        TestResult {
            p_value,
            statistic,
            df,
            test_kind,
            significant_at_5pct: p_value < ALPHA,
            reported_p: reported_p(p_value),
        }
    }
}

/// `0` below 1e-4, otherwise rounded to four decimals.
pub fn reported_p(p: f64) -> f64 {
    if p < REPORT_FLOOR {
        0.0
    } else {
        (p * 1e4).round() / 1e4
    }
}

pub(crate) fn require(sample: &[f64], needed: usize) -> Result<()> {
    if sample.len() < needed {
        return Err(Error::TooFewSamples { needed, got: sample.len() });
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("test sample".into()));
    }
    Ok(())
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub(crate) fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn looks_normal(x: &[f64]) -> Result<bool> {
    match lilliefors_normality(x) {
        Ok(r) => Ok(!r.significant_at_5pct),
        Err(Error::TooFewDistinct) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Chooses and runs the comparison test for two unpaired samples.
///
/// A constant sample cannot be screened for normality and is routed to the
/// Mann-Whitney test.
pub fn select_and_compare(a: &[f64], b: &[f64]) -> Result<TestResult> {
    require(a, 4)?;
    require(b, 4)?;
    if !(looks_normal(a)? && looks_normal(b)?) {
        return mann_whitney_u(a, b);
    }
    if levene_variance_test(a, b)?.significant_at_5pct {
        t_test_welch(a, b)
    } else {
        t_test_equal_var(a, b)
    }
}
