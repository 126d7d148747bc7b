use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bounds::BoundReport;
use super::fit::DecayFit;
use crate::error::{Error, Result};

pub const TABLE1_SCHEMA_VERSION: u32 = 1;

/// Results gathered for one composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Input {
    pub operator: String,
    pub fit: Option<DecayFit>,
    pub bounds: Vec<BoundReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Cell {
    /// Row factor B of the composition T·B.
    pub row: String,
    /// Column factor T.
    pub column: String,
    pub operator: String,
    pub theory: String,
    pub status: String,
    pub fit: Option<DecayFit>,
    pub bounds: Vec<BoundReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub schema_version: u32,
    pub cells: Vec<Table1Cell>,
}

pub const OPEN_LABEL: &str = "bounds only, open";

/// (row, column, operator, theoretical statement, status)
const LAYOUT: [(&str, &str, &str, &str, &str); 4] = [
    ("J", "Ha", "HaJ", "e^{-ci} <~ sigma_i <~ i^{-3/2}", OPEN_LABEL),
    ("J", "C", "CJ", "sigma_i ~ i^-2", "rate known"),
    ("J", "M", "MJ", "sigma_i ~ i^-1", "rate known"),
    ("C*", "Ha", "DHa", "i^{-1}e^{-2i} <~ sigma_i <~ i^{-3/2}", OPEN_LABEL),
];

/// Arranges fits and bound reports in the layout of the overview table:
/// rows J and C*, columns Ha, C and M.
pub fn table1_summary(inputs: &[Table1Input]) -> Result<Table1> {
    let missing: Vec<String> = LAYOUT
        .iter()
        .filter(|(_, _, op, _, _)| !inputs.iter().any(|x| x.operator == *op))
        .map(|(_, _, op, _, _)| op.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingInputs(missing));
    }
    let cells = LAYOUT
        .iter()
        .map(|&(row, column, op, theory, status)| {
            let input = inputs.iter().find(|x| x.operator == op).expect("checked above");
            Table1Cell {
                row: row.into(),
                column: column.into(),
                operator: op.into(),
                theory: theory.into(),
                status: status.into(),
                fit: input.fit.clone(),
                bounds: input.bounds.clone(),
            }
        })
        .collect();
    Ok(Table1 { schema_version: TABLE1_SCHEMA_VERSION, cells })
}

fn fit_columns(f: &Option<DecayFit>) -> [String; 4] {
    match f {
        Some(f) => [
            format!("{:?}", f.model).to_lowercase(),
            format!("{:.4}", f.rate),
            format!("{}:{}", f.window.0, f.window.1),
            format!("{:.3e}", f.residual_log10),
        ],
        None => ["-".into(), "-".into(), "-".into(), "-".into()],
    }
}

fn bound_column(b: &[BoundReport]) -> String {
    if b.is_empty() {
        return "-".into();
    }
    b.iter()
        .map(|r| format!("{}: {}", r.label, if r.consistent { "consistent" } else { "violated" }))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Table1 {
    const HEADER: [&'static str; 10] =
        ["row", "column", "operator", "theory", "status", "model", "rate", "window", "residual_log10", "bounds"];

    fn rows(&self) -> Vec<[String; 10]> {
        self.cells
            .iter()
            .map(|c| {
                let [m, r, w, res] = fit_columns(&c.fit);
                [
                    c.row.clone(),
                    c.column.clone(),
                    c.operator.clone(),
                    c.theory.clone(),
                    c.status.clone(),
                    m,
                    r,
                    w,
                    res,
                    bound_column(&c.bounds),
                ]
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let quote = |s: &str| {
            if s.contains([',', '"']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        };
        let mut out = Self::HEADER.join(",");
        out.push('\n');
        for row in self.rows() {
            out.push_str(&row.iter().map(|s| quote(s)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let rows = self.rows();
        let mut widths: Vec<usize> = Self::HEADER.iter().map(|h| h.chars().count()).collect();
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[&str]| {
            let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &Self::HEADER);
        for row in &rows {
            let cells: Vec<&str> = row.iter().map(String::as_str).collect();
            line(&mut out, &cells);
        }
        out
    }
}
