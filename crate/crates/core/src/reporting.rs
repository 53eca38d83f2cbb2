//! Evaluation reports: per-method error summaries plus pairwise per-DoF and
//! pose-level comparisons, rendered as JSON or markdown.
//!
//! Markdown tables annotate the p-value of every comparison with the test
//! that produced it: `⋄` equal-variance t-test, `‡` Welch t-test, no mark
//! for Mann-Whitney U. Non-significant p-values (5% level) are bold.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{select_and_compare, ErrorSummary, ScopeStats, TestKind, TestResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Markdown,
}

/// Settings that produced the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub rng: String,
    pub seed: Option<u64>,
    pub h_spec: String,
    pub sigma_deg: Option<f64>,
    /// Trace of the injected noise covariance (deg²).
    pub noise_trace: f64,
    pub trials_per_pose: usize,
    pub train_size: Option<usize>,
    pub test_size: usize,
    pub prior_ridge: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub errors: ErrorSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// DoF name, or `pose` for the pose-level row.
    pub label: String,
    pub a: ScopeStats,
    pub b: ScopeStats,
    pub test: TestResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub method_a: String,
    pub method_b: String,
    pub dof_rows: Vec<ComparisonRow>,
    pub pose_row: ComparisonRow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: ConfigEcho,
    pub dof_names: Vec<String>,
    pub methods: Vec<MethodSummary>,
    pub comparisons: Vec<Comparison>,
}

impl EvaluationReport {
    /// Assembles a report and runs every pairwise comparison, in the order
    /// the methods are given.
    pub fn from_summaries(config: ConfigEcho, summaries: Vec<(String, ErrorSummary)>) -> Result<Self> {
        let dof_names = summaries.first().map(|(_, s)| s.dof_names.clone()).unwrap_or_default();
        if summaries.iter().any(|(_, s)| s.dof_names != dof_names) {
            return Err(Error::DimensionMismatch("error summaries over different DoFs".into()));
        }
        let mut comparisons = Vec::new();
        for i in 0..summaries.len() {
            for j in (i + 1)..summaries.len() {
                comparisons.push(compare(&summaries[i], &summaries[j])?);
            }
        }
        let methods = summaries.into_iter().map(|(method, errors)| MethodSummary { method, errors }).collect();
        Ok(EvaluationReport { config, dof_names, methods, comparisons })
    }

    pub fn method(&self, name: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == name)
    }

    pub fn comparison(&self, a: &str, b: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.method_a == a && c.method_b == b)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::IncompleteReport("no methods".into()));
        }
        let k = self.methods.len();
        if self.comparisons.len() != k * (k - 1) / 2 {
            return Err(Error::IncompleteReport(format!(
                "{} methods need {} comparisons, found {}",
                k,
                k * (k - 1) / 2,
                self.comparisons.len()
            )));
        }
        if self.comparisons.iter().any(|c| c.dof_rows.len() != self.dof_names.len()) {
            return Err(Error::IncompleteReport("comparison without a row per DoF".into()));
        }
        Ok(())
    }
}

fn compare(a: &(String, ErrorSummary), b: &(String, ErrorSummary)) -> Result<Comparison> {
    let (name_a, sa) = a;
    let (name_b, sb) = b;
    let dof_rows = sa
        .dof_names
        .iter()
        .enumerate()
        .map(|(j, label)| {
            Ok(ComparisonRow {
                label: label.clone(),
                a: sa.per_dof[j],
                b: sb.per_dof[j],
                test: select_and_compare(&sa.per_dof_errors[j], &sb.per_dof_errors[j])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pose_row = ComparisonRow {
        label: "pose".into(),
        a: sa.pose,
        b: sb.pose,
        test: select_and_compare(&sa.per_pose_errors, &sb.per_pose_errors)?,
    };
    Ok(Comparison { method_a: name_a.clone(), method_b: name_b.clone(), dof_rows, pose_row })
}

pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> Result<String> {
    report.validate()?;
    match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Markdown => Ok(render_markdown(report)),
    }
}

fn symbol(kind: TestKind) -> &'static str {
    match kind {
        TestKind::Teq => " ⋄",
        TestKind::Tneq => " ‡",
        _ => "",
    }
}

fn p_cell(test: &TestResult) -> String {
    let p = format!("{:.4}", test.reported_p);
    let p = if test.significant_at_5pct { p } else { format!("**{p}**") };
    format!("{p}{}", symbol(test.test_kind))
}

fn mean_std(s: &ScopeStats) -> String {
    format!("{:.2} ± {:.2}", s.mean, s.std)
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn render_markdown(report: &EvaluationReport) -> String {
    let c = &report.config;
    let mut out = String::new();
    let _ = writeln!(out, "# Reconstruction report\n");
    let _ = writeln!(out, "- measurement: {}", c.h_spec);
    let _ = writeln!(out, "- noise sigma [°]: {}", opt(&c.sigma_deg));
    let _ = writeln!(out, "- seed: {}", opt(&c.seed));
    let _ = writeln!(out, "- rng: {}", c.rng);
    let _ = writeln!(out, "- trials per pose: {}", c.trials_per_pose);
    let _ = writeln!(out, "- training poses: {}", opt(&c.train_size));
    let _ = writeln!(out, "- test poses: {}", c.test_size);
    let _ = writeln!(out, "\n## Pose errors [°]\n");
    let _ = writeln!(out, "| Method | Mean ± std | Max |");
    let _ = writeln!(out, "|---|---|---|");
    for m in &report.methods {
        let p = &m.errors.pose;
        let _ = writeln!(out, "| {} | {} | {:.2} |", m.method, mean_std(p), p.max);
    }
    for cmp in &report.comparisons {
        let (a, b) = (&cmp.method_a, &cmp.method_b);
        let _ = writeln!(out, "\n## {a} vs {b} [°]\n");
        let _ = writeln!(out, "| DoF | {a} mean ± std | {b} mean ± std | {a} max | {b} max | p-value |");
        let _ = writeln!(out, "|---|---|---|---|---|---|");
        for row in cmp.dof_rows.iter().chain(std::iter::once(&cmp.pose_row)) {
            let label = if row.label == "pose" { "Pose".to_string() } else { row.label.clone() };
            let _ = writeln!(
                out,
                "| {label} | {} | {} | {:.2} | {:.2} | {} |",
                mean_std(&row.a),
                mean_std(&row.b),
                row.a.max,
                row.b.max,
                p_cell(&row.test)
            );
        }
    }
    let _ = writeln!(
        out,
        "\n⋄: equal-variance t-test. ‡: Welch t-test. Unmarked: Mann-Whitney U test. \
         Bold: no significant difference at the 5% level. p-values below 1e-4 are shown as 0."
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn echo() -> ConfigEcho {
        ConfigEcho {
            rng: "test".into(),
            seed: Some(1),
            h_spec: "selection: A".into(),
            sigma_deg: Some(0.0),
            noise_trace: 0.0,
            trials_per_pose: 1,
            train_size: None,
            test_size: 6,
            prior_ridge: None,
        }
    }

    fn summary(offset: f64) -> ErrorSummary {
        let abs = DMatrix::from_fn(6, 3, |i, j| offset + (i * 3 + j) as f64 * 0.37 % 1.3);
        ErrorSummary::from_abs_errors(vec!["A".into(), "B".into(), "C".into()], &abs)
    }

    #[test]
    fn empty_report_is_incomplete() {
        let r = EvaluationReport::from_summaries(echo(), vec![]).unwrap();
        assert!(matches!(render_report(&r, ReportFormat::Markdown), Err(Error::IncompleteReport(_))));
        assert!(matches!(render_report(&r, ReportFormat::Json), Err(Error::IncompleteReport(_))));
    }

    #[test]
    fn two_methods_table_shape() {
        let r = EvaluationReport::from_summaries(echo(), vec![("X".into(), summary(0.0)), ("Y".into(), summary(5.0))])
            .unwrap();
        assert_eq!(r.comparisons.len(), 1);
        let md = render_report(&r, ReportFormat::Markdown).unwrap();
        let table: Vec<&str> = md.lines().skip_while(|l| !l.starts_with("## X vs Y")).filter(|l| l.starts_with("| ")).collect();
        // header + 3 DoF rows + pose row
        assert_eq!(table.len(), 5);
        assert!(table[4].starts_with("| Pose |"));
    }

    #[test]
    fn p_annotations() {
        let t = TestResult::new(TestKind::Teq, 1.0, Some(3.0), 0.2);
        assert_eq!(p_cell(&t), "**0.2000** ⋄");
        let t = TestResult::new(TestKind::Tneq, 1.0, Some(3.0), 0.01234);
        assert_eq!(p_cell(&t), "0.0123 ‡");
        let t = TestResult::new(TestKind::U, 1.0, None, 1e-7);
        assert_eq!(p_cell(&t), "0.0000");
    }

    #[test]
    fn json_roundtrip_is_lossless_and_rendering_deterministic() {
        let r = EvaluationReport::from_summaries(echo(), vec![("X".into(), summary(0.1)), ("Y".into(), summary(0.2))])
            .unwrap();
        let json = render_report(&r, ReportFormat::Json).unwrap();
        let back = EvaluationReport::from_json(&json).unwrap();
        assert_eq!(back, r);
        let md1 = render_report(&back, ReportFormat::Markdown).unwrap();
        let md2 = render_report(&EvaluationReport::from_json(&json).unwrap(), ReportFormat::Markdown).unwrap();
        assert_eq!(md1, md2);
    }
}
