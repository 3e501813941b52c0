//! Emits a standalone matplotlib script for a CSV written by one of the
//! table subcommands. The script reads the CSV itself, so it can be rerun
//! after the data is regenerated.

use std::fmt::Write as _;
use std::path::Path;

use crate::table::{Row, Schema};

struct Layout {
    x: &'static str,
    y: &'static str,
    group: Option<&'static str>,
    abs: bool,
    log_y: bool,
    title: &'static str,
}

fn layout(schema: Schema) -> Layout {
    match schema {
        Schema::GapTable => Layout {
            x: "n",
            y: "gap",
            group: Some("variant"),
            abs: false,
            log_y: true,
            title: "Optimality gap of the prescription",
        },
        Schema::ApproxCheck => Layout {
            x: "n",
            y: "residual",
            group: Some("x"),
            abs: true,
            log_y: true,
            title: "Residual after the second-order term",
        },
        Schema::Constrained => Layout {
            x: "n",
            y: "server_gap",
            group: Some("alpha"),
            abs: false,
            log_y: false,
            title: "Square-root staffing minus exact minimum",
        },
        Schema::Evaluate => Layout {
            x: "n",
            y: "epsilon",
            group: Some("x"),
            abs: true,
            log_y: true,
            title: "Cost residual of the expansion",
        },
    }
}

fn py_str(s: &str) -> String {
    let mut out = String::from("'");
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

/// Data rows are those whose first column is numeric; summary rows are skipped.
pub fn data_rows(rows: &[Row]) -> usize {
    rows.iter().filter(|r| r.first().and_then(|v| crate::table::parse_num(v)).is_some()).count()
}

pub fn plot_script(csv_path: &Path, schema: Schema, rows: &[Row]) -> String {
    let l = layout(schema);
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    if data_rows(rows) == 0 {
        s.push_str("# warning: the table has no data rows; the figure will be empty\n");
    }
    s.push_str("import csv\nimport math\nimport sys\n\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n");
    let _ = writeln!(s, "CSV = {}", py_str(&csv_path.display().to_string()));
    let _ = writeln!(s, "OUT = sys.argv[1] if len(sys.argv) > 1 else CSV.rsplit('.', 1)[0] + '.png'");
    s.push_str("\nseries = {}\nwith open(CSV, newline='') as f:\n    for row in csv.DictReader(f):\n        try:\n");
    let _ = writeln!(s, "            x = float(row[{}])", py_str(l.x));
    let _ = writeln!(s, "            y = float(row[{}])", py_str(l.y));
    s.push_str("        except ValueError:\n            continue\n");
    if l.abs {
        s.push_str("        y = abs(y)\n");
    }
    if l.log_y {
        s.push_str("        if not y > 0 or math.isinf(y):\n            continue\n");
    }
    match l.group {
        Some(g) => {
            let _ = writeln!(s, "        series.setdefault({g} + '=' + row[{g}], []).append((x, y))", g = py_str(g));
        }
        None => s.push_str("        series.setdefault('', []).append((x, y))\n"),
    }
    s.push_str("\nfig, ax = plt.subplots(figsize=(6, 4))\nfor label, pts in sorted(series.items()):\n    pts.sort()\n");
    s.push_str("    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker='o', label=label)\n");
    s.push_str("ax.set_xscale('log')\n");
    if l.log_y {
        s.push_str("ax.set_yscale('log')\n");
    }
    let _ = writeln!(s, "ax.set_xlabel({})", py_str(l.x));
    let y_label = if l.abs { format!("|{}|", l.y) } else { l.y.to_string() };
    let _ = writeln!(s, "ax.set_ylabel({})", py_str(&y_label));
    let _ = writeln!(s, "ax.set_title({})", py_str(l.title));
    s.push_str("if series:\n    ax.legend()\nfig.tight_layout()\nfig.savefig(OUT, dpi=150)\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_gets_a_warning() {
        let script = plot_script(Path::new("gaps.csv"), Schema::GapTable, &[]);
        assert!(script.contains("# warning: the table has no data rows"));
        assert!(script.contains("CSV = 'gaps.csv'"));
    }

    #[test]
    fn summary_rows_are_not_data() {
        let rows = vec![vec!["summary".to_string()], vec!["100".to_string()]];
        assert_eq!(data_rows(&rows), 1);
        let script = plot_script(Path::new("a.csv"), Schema::ApproxCheck, &rows);
        assert!(!script.contains("warning"));
        assert!(script.contains("y = abs(y)"));
    }

    #[test]
    fn quotes_are_escaped() {
        assert_eq!(py_str("it's\\"), "'it\\'s\\\\'");
    }
}
