//! Sweep and report rows in CSV form.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading a
//! file back gives the same `f64` values. Undefined odds ratios, and every
//! column of a degenerate grid point, are written as `NA`.

use std::io::{Read, Write};

use collider_lab::EstimandReport;

pub const HEADER: [&str; 16] = [
    "param",
    "value",
    "delta_as",
    "delta_sp",
    "delta_ce",
    "delta_cde",
    "delta_cde_m1",
    "delta_cde_a1m1",
    "or_as",
    "or_sp",
    "or_ce",
    "or_cde",
    "or_cde_m1",
    "or_cde_a1m1",
    "p_m1",
    "p_y1",
];

pub const NA: &str = "NA";

/// Number of numeric columns after `param` and `value`.
pub const FIELDS: usize = 14;

/// Column index (into [`Row::fields`]) of the first odds ratio.
pub const FIRST_OR: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub param: String,
    pub value: Option<f64>,
    pub fields: [Option<f64>; FIELDS],
}

impl Row {
    /// `report` is `None` for a grid point whose model is degenerate.
    pub fn new(param: &str, value: Option<f64>, report: Option<&EstimandReport>) -> Self {
        let fields = match report {
            None => [None; FIELDS],
            Some(r) => [
                Some(r.delta_as),
                Some(r.delta_sp),
                Some(r.delta_ce),
                Some(r.delta_cde),
                Some(r.delta_cde_m1),
                Some(r.delta_cde_a1m1),
                r.or_as,
                r.or_sp,
                r.or_ce,
                r.or_cde,
                r.or_cde_m1,
                r.or_cde_a1m1,
                Some(r.p_m1),
                Some(r.p_y1),
            ],
        };
        Row {
            param: param.to_string(),
            value,
            fields,
        }
    }

    pub fn field(&self, column: &str) -> Option<f64> {
        let i = HEADER.iter().position(|h| *h == column)?;
        match i {
            0 => None,
            1 => self.value,
            _ => self.fields[i - 2],
        }
    }
}

/// Shortest representation that parses back to the same value; scientific
/// notation outside `[1e-5, 1e16)`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), format_f64)
}

fn parse_cell(s: &str) -> Result<Option<f64>, String> {
    if s == NA {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| format!("`{s}` is neither a number nor {NA}"))
}

pub fn write_rows<W: Write>(w: W, rows: &[Row]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for r in rows {
        let mut rec = Vec::with_capacity(HEADER.len());
        rec.push(r.param.clone());
        rec.push(cell(r.value));
        rec.extend(r.fields.iter().map(|&x| cell(x)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads rows written by [`write_rows`]; the header must match exactly.
pub fn read_rows<R: Read>(r: R) -> Result<Vec<Row>, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(HEADER) {
        return Err(format!(
            "unexpected header, expected `{}`",
            HEADER.join(",")
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = i + 2;
        let mut fields = [None; FIELDS];
        for (k, f) in fields.iter_mut().enumerate() {
            *f = parse_cell(&rec[k + 2]).map_err(|e| format!("line {line}: {e}"))?;
        }
        rows.push(Row {
            param: rec[0].to_string(),
            value: parse_cell(&rec[1]).map_err(|e| format!("line {line}: {e}"))?,
            fields,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_exact() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "param,value,delta_as,delta_sp,delta_ce,delta_cde,delta_cde_m1,delta_cde_a1m1,\
             or_as,or_sp,or_ce,or_cde,or_cde_m1,or_cde_a1m1,p_m1,p_y1\n"
        );
    }

    #[test]
    fn na_round_trips() {
        let rows = vec![Row::new("alpha_U", Some(0.0), None)];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",NA,NA"));
        assert_eq!(read_rows(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn float_text() {
        assert_eq!(
            format_f64(-1.1102230246251565e-16),
            "-1.1102230246251565e-16"
        );
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(-3.0), "-3");
        assert_eq!(format_f64(1e20), "1e20");
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(read_rows("param,value\nx,1\n".as_bytes()).is_err());
        let bad = format!("{}\nx,1,{}\n", HEADER.join(","), ["oops"; FIELDS].join(","));
        assert!(read_rows(bad.as_bytes()).is_err());
    }
}
