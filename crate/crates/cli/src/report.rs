//! The `test` command's report and its text, CSV and JSON renderings.

use std::fmt::Write as _;

use concordance::{Direction, McEstimate, Method, PValueResult};
use serde::Serialize;

use crate::error::Result;

/// Exact ratio with a decimal rendering; integers are strings so that no
/// JSON reader rounds them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ratio {
    pub numerator: String,
    pub denominator: String,
    pub decimal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NullModel {
    /// Every distinct untied label sequence equally likely.
    TieFree,
    /// Labels permuted over the observed tie-block structure.
    TieConditioned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValue {
    pub method: Method,
    pub direction: Direction,
    pub null: NullModel,
    pub value: f64,
    pub ratio: Ratio,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence_interval: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl PValue {
    pub fn exact(p: &PValueResult) -> Self {
        PValue {
            method: Method::Exact,
            direction: p.direction,
            null: NullModel::TieFree,
            value: p.p_value,
            ratio: Ratio {
                numerator: p.numerator.to_string(),
                denominator: p.denominator.to_string(),
                decimal: p.p_value,
            },
            confidence_interval: None,
            samples: None,
            seed: None,
        }
    }

    pub fn monte_carlo(est: &McEstimate, direction: Direction, null: NullModel) -> Self {
        PValue {
            method: Method::MonteCarlo,
            direction,
            null,
            value: est.p_hat,
            ratio: Ratio {
                numerator: (est.exceed_count + 1).to_string(),
                denominator: (est.samples + 1).to_string(),
                decimal: est.p_hat,
            },
            confidence_interval: Some([est.ci_low, est.ci_high]),
            samples: Some(est.samples),
            seed: Some(est.seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputSummary {
    pub groups: Vec<String>,
    pub sizes: Vec<u32>,
    pub n: usize,
    /// Tie blocks holding more than one observation.
    pub tie_blocks: usize,
    pub tied_observations: usize,
    pub arrangement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceSection {
    pub disorder: f64,
    pub max_disorder: u64,
    pub tau: f64,
    /// τ as (2·max − 2·disorder) / (2·max); absent when degenerate.
    pub tau_ratio: Option<Ratio>,
    pub closest_order: Vec<String>,
    pub total_pairs: u64,
    pub lop_value: f64,
    pub degenerate: bool,
    pub p_values: Vec<PValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KwSection {
    pub kw: f64,
    pub kw_tie_corrected: Option<f64>,
    pub rank_sums: Vec<f64>,
    pub mean_ranks: Vec<f64>,
    pub p_values: Vec<PValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub input: InputSummary,
    pub concordance: ConcordanceSection,
    pub kruskal_wallis: KwSection,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

fn method_name(p: &PValue) -> &'static str {
    match (p.method, p.null) {
        (Method::Exact, _) => "exact",
        (Method::MonteCarlo, NullModel::TieFree) => "monte carlo",
        (Method::MonteCarlo, NullModel::TieConditioned) => "monte carlo, ties kept",
    }
}

fn p_line(p: &PValue, event: &str) -> String {
    let mut line = format!(
        "{:.7}  ({}, {} = {}/{}",
        p.value,
        method_name(p),
        event,
        p.ratio.numerator,
        p.ratio.denominator
    );
    if let (Some([lo, hi]), Some(seed)) = (p.confidence_interval, p.seed) {
        let _ = write!(line, ", 95% CI [{lo:.5}, {hi:.5}], seed {seed}");
    }
    line.push(')');
    line
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x}")
    }
}

impl TestReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let i = &self.input;
        let sizes: Vec<String> = i.sizes.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "groups         {}", i.groups.join(" "));
        let _ = writeln!(out, "sizes          ({})  n = {}", sizes.join(","), i.n);
        let _ = writeln!(out, "arrangement    {}", i.arrangement);
        if i.tie_blocks > 0 {
            let _ = writeln!(
                out,
                "ties           {} blocks, {} observations",
                i.tie_blocks, i.tied_observations
            );
        }
        let c = &self.concordance;
        let d = fmt_num(c.disorder);
        let _ = writeln!(out, "\nconcordance");
        let _ = writeln!(out, "  disorder       {d}");
        let _ = writeln!(out, "  max disorder   {}", c.max_disorder);
        let _ = writeln!(out, "  tau            {:.4}", c.tau);
        let _ = writeln!(out, "  closest order  {}", c.closest_order.join(" "));
        for p in &c.p_values {
            let _ = writeln!(out, "  p-value        {}", p_line(p, &format!("P(D <= {d})")));
        }
        let k = &self.kruskal_wallis;
        let _ = writeln!(out, "\nkruskal-wallis");
        let _ = writeln!(out, "  KW             {:.4}", k.kw);
        if let Some(t) = k.kw_tie_corrected {
            let _ = writeln!(out, "  tie-corrected  {t:.4}");
        }
        let sums: Vec<String> = i
            .groups
            .iter()
            .zip(&k.rank_sums)
            .map(|(g, r)| format!("{g} {}", fmt_num(*r)))
            .collect();
        let _ = writeln!(out, "  rank sums      {}", sums.join(", "));
        for p in &k.p_values {
            let _ = writeln!(out, "  p-value        {}", p_line(p, &format!("P(KW >= {:.4})", k.kw)));
        }
        if !self.warnings.is_empty() {
            let _ = writeln!(out, "\nwarnings");
            for w in &self.warnings {
                let _ = writeln!(out, "  - {w}");
            }
        }
        out
    }

    /// `field,value` rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["field", "value"])?;
        let mut row = |field: &str, value: String| w.write_record([field, value.as_str()]);
        let i = &self.input;
        row("groups", i.groups.join(" "))?;
        row("sizes", i.sizes.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))?;
        row("n", i.n.to_string())?;
        row("tie_blocks", i.tie_blocks.to_string())?;
        let c = &self.concordance;
        row("disorder", c.disorder.to_string())?;
        row("max_disorder", c.max_disorder.to_string())?;
        row("tau", c.tau.to_string())?;
        row("closest_order", c.closest_order.join(" "))?;
        row("degenerate", c.degenerate.to_string())?;
        for p in &c.p_values {
            let name = format!("disorder_p_{}", method_name(p).replace([' ', ','], "_").replace("__", "_"));
            row(&name, p.value.to_string())?;
            row(&format!("{name}_ratio"), format!("{}/{}", p.ratio.numerator, p.ratio.denominator))?;
        }
        let k = &self.kruskal_wallis;
        row("kw", k.kw.to_string())?;
        if let Some(t) = k.kw_tie_corrected {
            row("kw_tie_corrected", t.to_string())?;
        }
        for p in &k.p_values {
            let name = format!("kw_p_{}", method_name(p).replace([' ', ','], "_").replace("__", "_"));
            row(&name, p.value.to_string())?;
            row(&format!("{name}_ratio"), format!("{}/{}", p.ratio.numerator, p.ratio.denominator))?;
        }
        for warning in &self.warnings {
            row("warning", warning.clone())?;
        }
        let bytes = w.into_inner().map_err(|e| crate::error::CliError::Output(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
