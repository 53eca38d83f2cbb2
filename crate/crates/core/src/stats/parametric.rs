use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::{mean, require, variance, TestKind, TestResult};
use crate::error::{Error, Result};

fn two_tailed_t(t: f64, df: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(1.0);
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Config(e.to_string()))?;
    Ok(2.0 * dist.sf(t.abs()))
}

/// `diff / se`, with `0/0` read as no difference.
fn t_statistic(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if se == 0.0 {
        diff.signum() * f64::INFINITY
    } else {
        diff / se
    }
}

/// Two-tailed t-test assuming equal variances, `df = n₁ + n₂ − 2`.
pub fn t_test_equal_var(a: &[f64], b: &[f64]) -> Result<TestResult> {
    require(a, 2)?;
    require(b, 2)?;
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let df = n1 + n2 - 2.0;
    let pooled = ((n1 - 1.0) * variance(a) + (n2 - 1.0) * variance(b)) / df;
    let se = (pooled * (1.0 / n1 + 1.0 / n2)).sqrt();
    let t = t_statistic(mean(a) - mean(b), se);
    Ok(TestResult::new(TestKind::Teq, t, Some(df), two_tailed_t(t, df)?))
}

/// Welch's two-tailed t-test with Satterthwaite degrees of freedom.
pub fn t_test_welch(a: &[f64], b: &[f64]) -> Result<TestResult> {
    require(a, 2)?;
    require(b, 2)?;
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let va = variance(a) / n1;
    let vb = variance(b) / n2;
    let se = (va + vb).sqrt();
    let t = t_statistic(mean(a) - mean(b), se);
    let df = if va + vb == 0.0 {
        n1 + n2 - 2.0
    } else {
        (va + vb).powi(2) / (va * va / (n1 - 1.0) + vb * vb / (n2 - 1.0))
    };
    Ok(TestResult::new(TestKind::Tneq, t, Some(df), two_tailed_t(t, df)?))
}

/// Group centre for Levene's absolute deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LeveneCenter {
    /// Classic Levene.
    #[default]
    Mean,
    /// Brown-Forsythe variant.
    Median,
}

fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Levene's test for equal variances (mean-centred).
pub fn levene_variance_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    levene_variance_test_with(a, b, LeveneCenter::Mean)
}

/// One-way ANOVA on absolute deviations from each group's centre.
pub fn levene_variance_test_with(a: &[f64], b: &[f64], center: LeveneCenter) -> Result<TestResult> {
    require(a, 2)?;
    require(b, 2)?;
    let deviations = |x: &[f64]| {
        let c = match center {
            LeveneCenter::Mean => mean(x),
            LeveneCenter::Median => median(x),
        };
        x.iter().map(|v| (v - c).abs()).collect::<Vec<_>>()
    };
    let za = deviations(a);
    let zb = deviations(b);
    let (n1, n2) = (za.len() as f64, zb.len() as f64);
    let total = n1 + n2;
    let (ma, mb) = (mean(&za), mean(&zb));
    let grand = (ma * n1 + mb * n2) / total;
    let between = n1 * (ma - grand).powi(2) + n2 * (mb - grand).powi(2);
    let within: f64 =
        za.iter().map(|z| (z - ma).powi(2)).sum::<f64>() + zb.iter().map(|z| (z - mb).powi(2)).sum::<f64>();
    let df2 = total - 2.0;
    let (f, p) = if between == 0.0 {
        (0.0, 1.0)
    } else if within == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = df2 * between / within;
        let dist = FisherSnedecor::new(1.0, df2).map_err(|e| Error::Config(e.to_string()))?;
        (f, dist.sf(f))
    };
    Ok(TestResult::new(TestKind::Levene, f, Some(df2), p))
}
