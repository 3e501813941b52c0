//! CSV emission with fixed schemas and quantized numbers.
//!
//! Every number is rounded to 12 significant digits and then printed in its
//! shortest exact form, so re-parsing a cell and formatting it again yields
//! the same text.

use std::io::{Read, Write};

use csv::{ReaderBuilder, Terminator, WriterBuilder};

use crate::error::{usage, CliResult};

pub const GAP_TABLE_HEADER: [&str; 11] = [
    "n",
    "model",
    "x_star",
    "variant",
    "staffing",
    "cost_prescribed",
    "staffing_optimal",
    "cost_optimal",
    "gap",
    "normalized_gap",
    "flags",
];
pub const APPROX_CHECK_HEADER: [&str; 7] = ["n", "x", "exact_EQ", "leading", "correction", "residual", "flags"];
pub const CONSTRAINED_HEADER: [&str; 6] = ["n", "alpha", "x_star", "staffing_sqrt", "staffing_exact", "server_gap"];
pub const EVALUATE_HEADER: [&str; 8] = ["n", "x", "staffing", "exact_EQ", "exact_cost", "approx_cost", "epsilon", "flags"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    GapTable,
    ApproxCheck,
    Constrained,
    Evaluate,
}

impl Schema {
    pub fn header(&self) -> &'static [&'static str] {
        match self {
            Schema::GapTable => &GAP_TABLE_HEADER,
            Schema::ApproxCheck => &APPROX_CHECK_HEADER,
            Schema::Constrained => &CONSTRAINED_HEADER,
            Schema::Evaluate => &EVALUATE_HEADER,
        }
    }

    pub fn detect(header: &[String]) -> Option<Schema> {
        [Schema::GapTable, Schema::ApproxCheck, Schema::Constrained, Schema::Evaluate]
            .into_iter()
            .find(|s| s.header().iter().copied().eq(header.iter().map(String::as_str)))
    }
}

/// Rounds to 12 significant digits.
pub fn quantize(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Text for one numeric cell: `nan`, `inf`, `-inf` or the shortest exact form
/// of the quantized value.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let q = quantize(v);
    if q == 0.0 {
        return "0".into();
    }
    let exp = q.abs().log10().floor();
    if (-5.0..15.0).contains(&exp) {
        format!("{q}")
    } else {
        format!("{q:e}")
    }
}

pub fn parse_num(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

pub type Row = Vec<String>;

/// Writes header and rows with LF line endings.
pub fn write_table<W: Write>(out: W, schema: Schema, rows: &[Row]) -> CliResult<()> {
    let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(out);
    w.write_record(schema.header())?;
    for row in rows {
        debug_assert_eq!(row.len(), schema.header().len());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table back, checking the header against the known schemas.
pub fn read_table<R: Read>(input: R) -> CliResult<(Schema, Vec<Row>)> {
    let mut r = ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = r.records();
    let header: Row = match records.next() {
        Some(rec) => rec?.iter().map(String::from).collect(),
        None => return Err(usage("empty CSV: header row missing")),
    };
    let schema = Schema::detect(&header).ok_or_else(|| usage(format!("unknown CSV schema: {}", header.join(","))))?;
    let mut rows = Vec::new();
    for rec in records {
        rows.push(rec?.iter().map(String::from).collect());
    }
    Ok((schema, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(105.0), "105");
        assert_eq!(fmt_num(112.06720586386101), "112.067205864");
        assert_eq!(fmt_num(4.4656e-4), "0.00044656");
        assert_eq!(fmt_num(8e-13), "8e-13");
        assert_eq!(fmt_num(1001190.7446276807), "1001190.74463");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_num(-0.0), "0");
        assert!(!fmt_num(1234567.0).contains(','));
    }

    #[test]
    fn table_round_trip_and_line_endings() {
        let rows = vec![
            vec!["100".into(), "0.5".into(), "1".into(), "2".into(), "3".into(), "4".into(), "".into()],
            vec!["summary".into(), "1".into(), "".into(), "".into(), "".into(), "".into(), "slope=-0.5; r2=1".into()],
        ];
        let mut buf = Vec::new();
        write_table(&mut buf, Schema::ApproxCheck, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(!text.contains('\r'));
        assert!(text.starts_with("n,x,exact_EQ,leading,correction,residual,flags\n"));
        let (schema, back) = read_table(buf.as_slice()).unwrap();
        assert_eq!(schema, Schema::ApproxCheck);
        assert_eq!(back, rows);
    }

    #[test]
    fn unknown_schema() {
        assert!(read_table("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_table("".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn cells_are_stable(v in proptest::num::f64::ANY) {
            let s = fmt_num(v);
            let back = parse_num(&s).unwrap();
            if v.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(fmt_num(back), s.clone());
                prop_assert_eq!(back, quantize(v) + 0.0);
                if v != 0.0 && v.is_finite() {
                    prop_assert!(((back - v) / v).abs() <= 5e-12);
                }
            }
        }
    }
}
