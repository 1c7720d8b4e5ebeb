//! The curve CSV: optional `#` comment lines, a header starting with `n`,
//! numeric value columns, and an optional trailing `flags` column.

use rdflb_core::curve::CurveRow;

use crate::error::{usage, CliError, Result};

pub const FLAGS: &str = "flags";

#[derive(Clone, Debug, PartialEq)]
pub struct CurveTable {
    /// The `# params:` comment, without the prefix.
    pub params: Option<String>,
    /// Value column names, excluding `n` and `flags`.
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub n: u32,
    pub values: Vec<f64>,
    pub flags: String,
}

/// Rounds to 10 significant digits and prints the shortest form.
pub fn format_value(v: f64) -> String {
    let rounded: f64 = format!("{v:.9e}").parse().unwrap_or(v);
    format!("{rounded}")
}

impl CurveTable {
    pub fn from_rows(params: Option<String>, columns: Vec<String>, rows: &[CurveRow]) -> Self {
        CurveTable {
            params,
            columns,
            rows: rows
                .iter()
                .map(|r| TableRow {
                    n: r.n,
                    values: r.values.clone(),
                    flags: r.flags.join(";"),
                })
                .collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(p) = &self.params {
            out.push_str(&format!("# params: {p}\n"));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec!["n".to_string()];
        header.extend(self.columns.iter().cloned());
        header.push(FLAGS.into());
        w.write_record(&header).expect("write to memory");
        for r in &self.rows {
            let mut rec = vec![r.n.to_string()];
            rec.extend(r.values.iter().map(|&v| format_value(v)));
            rec.push(r.flags.clone());
            w.write_record(&rec).expect("write to memory");
        }
        out.push_str(
            std::str::from_utf8(&w.into_inner().expect("flush to memory")).expect("utf-8"),
        );
        out
    }
}

pub fn parse_curve_csv(text: &str) -> Result<CurveTable> {
    let params = text
        .lines()
        .filter_map(|l| l.strip_prefix("# params:"))
        .map(|p| p.trim().to_string())
        .next();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let bad = |e: csv::Error| CliError::Usage(format!("malformed CSV: {e}"));
    let header: Vec<String> = rdr
        .headers()
        .map_err(bad)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.first().map(String::as_str) != Some("n") {
        return usage("malformed CSV: first column must be n");
    }
    let has_flags = header.last().map(String::as_str) == Some(FLAGS);
    let end = header.len() - has_flags as usize;
    let columns: Vec<String> = header[1..end].to_vec();
    if columns.is_empty() {
        return usage("malformed CSV: no value columns");
    }
    if columns
        .iter()
        .any(|c| c.is_empty() || c == "n" || c == FLAGS)
    {
        return usage("malformed CSV: empty or reserved column name");
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(bad)?;
        let line = rec.position().map_or(0, |p| p.line());
        let n = rec[0]
            .trim()
            .parse::<u32>()
            .map_err(|_| CliError::Usage(format!("line {line}: bad n {:?}", &rec[0])))?;
        let values = (1..end)
            .map(|i| match rec[i].trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => usage(format!(
                    "line {line}: bad value {:?} in {}",
                    &rec[i], header[i]
                )),
            })
            .collect::<Result<Vec<f64>>>()?;
        let flags = if has_flags {
            rec[end].trim().to_string()
        } else {
            String::new()
        };
        rows.push(TableRow { n, values, flags });
    }
    if rows.is_empty() {
        return usage("CSV has no data rows");
    }
    if rows.windows(2).any(|w| w[0].n >= w[1].n) {
        return usage("CSV rows must have strictly increasing n");
    }
    Ok(CurveTable {
        params,
        columns,
        rows,
    })
}
