//! Results tables: per-property rows plus a `spearman-r` summary row, as
//! TSV or markdown. Floats carry two decimals, missing cells are `-`.

use std::fmt::Write as _;
use std::io::BufRead;

use propprobe_core::evaluation::{spearman_summary, PropertyReport, VerdictRow};

use crate::error::{FormatError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    Markdown,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<ReportFormat> {
        match s.trim() {
            "tsv" => Some(ReportFormat::Tsv),
            "markdown" | "md" => Some(ReportFormat::Markdown),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReportFormat::Tsv => "tsv",
            ReportFormat::Markdown => "markdown",
        }
    }
}

pub const SPEARMAN_ROW: &str = "spearman-r";
const MISSING: &str = "-";

fn fixed(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_owned(), |v| format!("{v:.2}"))
}

fn net_columns(reports: &[PropertyReport]) -> usize {
    reports.iter().map(|r| r.f1_net.len()).max().unwrap_or(0)
}

fn header(net: usize) -> Vec<String> {
    let mut h: Vec<String> = ["property", "pos", "neg", "av-cos", "f1-neigh", "best-n", "f1-lr"]
        .map(String::from)
        .to_vec();
    h.extend((1..=net).map(|i| format!("f1-net{i}")));
    h.push("oov".into());
    h.push("pool".into());
    h
}

fn cells(reports: &[PropertyReport]) -> Vec<Vec<String>> {
    let net = net_columns(reports);
    let mut rows = vec![header(net)];
    for r in reports {
        let mut row = vec![
            r.property.clone(),
            r.pos_count.to_string(),
            r.neg_count.to_string(),
            fixed(Some(r.avg_cos)),
            fixed(r.f1_neigh),
            r.best_n.map_or_else(|| MISSING.to_owned(), |n| n.to_string()),
            fixed(r.f1_lr),
        ];
        row.extend((0..net).map(|i| fixed(r.f1_net.get(i).copied())));
        row.push(if r.oov.is_empty() { MISSING.to_owned() } else { r.oov.join(",") });
        row.push(r.pool.clone());
        rows.push(row);
    }
    if reports.len() >= 2 {
        let [neigh, lr, net1] = spearman_summary(reports);
        let mut row = vec![SPEARMAN_ROW.to_owned(), MISSING.into(), MISSING.into(), MISSING.into()];
        row.push(fixed(neigh));
        row.push(MISSING.into());
        row.push(fixed(lr));
        row.extend((0..net).map(|i| if i == 0 { fixed(net1) } else { MISSING.into() }));
        row.push(MISSING.into());
        row.push(MISSING.into());
        rows.push(row);
    }
    rows
}

/// Renders the results table. Fails on an empty report list.
pub fn emit_report(reports: &[PropertyReport], format: ReportFormat) -> Result<String> {
    if reports.is_empty() {
        return Err(propprobe_core::Error::EmptySet("no property reports").into());
    }
    let rows = cells(reports);
    let mut out = String::new();
    match format {
        ReportFormat::Tsv => {
            for row in &rows {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
        }
        ReportFormat::Markdown => {
            for (i, row) in rows.iter().enumerate() {
                let _ = writeln!(out, "| {} |", row.join(" | "));
                if i == 0 {
                    let _ = writeln!(out, "|{}", "---|".repeat(row.len()));
                }
            }
        }
    }
    Ok(out)
}

/// Spearman summary values read back from a report: neigh, lr, net1.
pub type SpearmanRow = [Option<f64>; 3];

/// Parses a TSV report produced by [`emit_report`].
pub fn parse_report<R: BufRead>(reader: R, name: &str) -> Result<(Vec<PropertyReport>, Option<SpearmanRow>)> {
    let mut lines = reader.lines().enumerate();
    let (_, head) = lines
        .next()
        .ok_or_else(|| FormatError::at_line(name, 1, "empty report"))?;
    let head = head.map_err(|e| crate::error::Error::io(name, e))?;
    let cols: Vec<&str> = head.split('\t').collect();
    let net = cols.len().checked_sub(9).unwrap_or(usize::MAX);
    if cols.len() < 9 || cols != header(net).iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(FormatError::at_line(name, 1, "unrecognized report header").into());
    }

    let mut reports = Vec::new();
    let mut summary = None;
    for (i, line) in lines {
        let no = i + 1;
        let line = line.map_err(|e| crate::error::Error::io(name, e))?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != cols.len() {
            return Err(FormatError::at_line(name, no, format!("expected {} cells, got {}", cols.len(), f.len())).into());
        }
        let bad = |col: usize| FormatError::at_line(name, no, format!("bad {} value {:?}", cols[col], f[col]));
        let real = |col: usize| -> Result<Option<f64>> {
            if f[col] == MISSING {
                return Ok(None);
            }
            f[col].parse::<f64>().map(Some).map_err(|_| bad(col).into())
        };
        let int = |col: usize| -> Result<Option<usize>> {
            if f[col] == MISSING {
                return Ok(None);
            }
            f[col].parse::<usize>().map(Some).map_err(|_| bad(col).into())
        };
        if f[0] == SPEARMAN_ROW {
            summary = Some([real(4)?, real(6)?, if net > 0 { real(7)? } else { None }]);
            continue;
        }
        let mut f1_net = Vec::new();
        for col in 7..7 + net {
            match real(col)? {
                Some(v) => f1_net.push(v),
                None => break,
            }
        }
        reports.push(PropertyReport {
            property: f[0].to_owned(),
            pos_count: int(1)?.ok_or_else(|| bad(1))?,
            neg_count: int(2)?.ok_or_else(|| bad(2))?,
            avg_cos: real(3)?.ok_or_else(|| bad(3))?,
            f1_neigh: real(4)?,
            best_n: int(5)?,
            f1_lr: real(6)?,
            f1_net,
            oov: match f[7 + net] {
                MISSING => Vec::new(),
                list => list.split(',').map(String::from).collect(),
            },
            pool: f[8 + net].to_owned(),
        });
    }
    Ok((reports, summary))
}

/// `property expected observed best-f1 verdict` per hypothesis.
pub fn emit_verdicts(rows: &[VerdictRow]) -> String {
    let mut out = String::from("property\texpected\tobserved\tbest-f1\tverdict\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.2}\t{}",
            r.property,
            r.expected.as_str(),
            r.observed.as_str(),
            r.best_f1,
            r.verdict.as_str()
        );
    }
    out
}
