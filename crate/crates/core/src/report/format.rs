use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::Error;

use super::{Evidence, Finding, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
    Table,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            "table" => Ok(OutputFormat::Table),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

pub fn render(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Text => text(report),
        OutputFormat::Table => table(report),
    }
}

fn header(r: &Report) -> String {
    let version = r.app.version_name.as_deref().map(|v| format!(" {v}")).unwrap_or_default();
    format!("{}{} ({})", r.app.package, version, r.app.name)
}

pub(crate) fn where_(f: &Finding) -> String {
    let l = &f.location;
    let mut s = if l.class.is_empty() { l.file.clone() } else { format!("{}->{}", l.class, l.method.as_deref().unwrap_or("")) };
    if !l.class.is_empty() {
        let _ = write!(s, " at {}", l.file);
    }
    if let Some(line) = l.line {
        let _ = write!(s, ":{line}");
    }
    s
}

fn text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", header(r));
    let cats: Vec<String> = r.summary.by_category.iter().map(|(c, n)| format!("{c} {n}")).collect();
    let _ = writeln!(out, "{} findings{}", r.summary.total, if cats.is_empty() { String::new() } else { format!(" ({})", cats.join(", ")) });
    if r.scan.truncated {
        let _ = writeln!(out, "warning: analysis budget exhausted, results may be incomplete");
    }
    for f in &r.findings {
        let _ = writeln!(out);
        let adversary = match f.adversary {
            crate::taxonomy::Adversary::AppAdversary => "app adversary",
            crate::taxonomy::Adversary::CommunicationAdversary => "communication adversary",
        };
        let _ = writeln!(out, "[{}] {} ({adversary})", f.category, f.weakness_type);
        let _ = writeln!(out, "  {}", where_(f));
        match &f.evidence {
            Evidence::Flow(e) => {
                let _ = writeln!(out, "  source: {} \"{}\" ({}) in {}", e.view_id, e.keyword, e.source_category, e.source.class);
                let _ = writeln!(out, "  sink: {}", e.sink_api);
                for s in &e.steps {
                    let _ = writeln!(out, "    {s}");
                }
            }
            Evidence::Pattern(e) => {
                let _ = writeln!(out, "  {}: {}", e.rule, e.detail);
                if !e.entry_path.is_empty() {
                    let _ = writeln!(out, "  reached via {}", e.entry_path.join(" -> "));
                }
            }
        }
        if f.occurrences > 1 {
            let _ = writeln!(out, "  ({} occurrences)", f.occurrences);
        }
    }
    if !r.suppressed.is_empty() {
        let _ = writeln!(out, "\n{} hits suppressed as unreachable", r.suppressed.len());
    }
    if !r.advisories.is_empty() {
        let _ = writeln!(out, "\nadvisories:");
        for a in &r.advisories {
            let _ = writeln!(out, "  {}: {} ({})", a.rule, a.message, a.location.file);
        }
    }
    out
}

/// Renders rows as an aligned plain-text table.
pub(crate) fn grid(head: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = head.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    // counts are right-aligned, everything else left-aligned
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (c, w) in cells.iter().zip(&widths) {
            if !c.is_empty() && c.bytes().all(|b| b.is_ascii_digit()) {
                let _ = write!(s, "{c:>w$}  ");
            } else {
                let _ = write!(s, "{c:<w$}  ");
            }
        }
        let mut s = s.trim_end().to_string();
        s.push('\n');
        s
    };
    let mut out = line(head.to_vec());
    out.push_str(&line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

fn table(r: &Report) -> String {
    let mut rows: Vec<(crate::taxonomy::Category, crate::taxonomy::WeaknessType, usize)> = Vec::new();
    for f in &r.findings {
        match rows.last_mut() {
            Some(last) if last.1 == f.weakness_type => last.2 += 1,
            _ => rows.push((f.category, f.weakness_type, 1)),
        }
    }
    let rows: Vec<Vec<String>> = rows.into_iter().map(|(c, w, n)| vec![c.to_string(), w.name().to_string(), n.to_string()]).collect();
    format!("{}\n{}", header(r), grid(&["Category", "Weakness type", "Findings"], &rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_format() {
        assert!(matches!("xml".parse::<OutputFormat>(), Err(Error::UnknownFormat(_))));
        assert_eq!("table".parse::<OutputFormat>().unwrap(), OutputFormat::Table);
    }

    #[test]
    fn grid_aligns() {
        let g = grid(&["a", "n"], &[vec!["long name".into(), "12".into()]]);
        let lines: Vec<&str> = g.lines().collect();
        assert_eq!(lines[0], "a          n");
        assert_eq!(lines[2], "long name  12");
        let g = grid(&["#Patched", "#New"], &[vec!["0".into(), "1".into()]]);
        assert_eq!(g.lines().nth(2), Some("       0     1"));
    }
}
