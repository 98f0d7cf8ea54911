//! CSV and JSON result tables. Floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::sweep::Row;

pub const COLUMNS: [&str; 11] = [
    "axis_value",
    "mechanism",
    "coded",
    "seed",
    "l1_mean",
    "tau_star",
    "t_s_m",
    "M_m",
    "l_m",
    "W_m",
    "invalid_count",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Scientific notation with 17 significant digits.
fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // JSON has no NaN; CSV readers accept the plain spelling.
        x.to_string()
    }
}

fn fields(row: &Row) -> [String; 11] {
    [
        float(row.axis_value),
        row.mechanism.clone(),
        row.coded.clone(),
        row.seed.to_string(),
        float(row.l1_mean),
        row.tau_star.map(|t| t.to_string()).unwrap_or_default(),
        float(row.t_s_m),
        row.M_m.to_string(),
        row.l_m.to_string(),
        row.W_m.to_string(),
        row.invalid_count.to_string(),
    ]
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(fields(row))?;
    }
    w.flush()
}

pub fn write_json<W: Write>(rows: &[Row], mut out: W) -> io::Result<()> {
    let mut text = String::from("[");
    for (i, row) in rows.iter().enumerate() {
        text.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
        for (j, (name, value)) in COLUMNS.iter().zip(fields(row)).enumerate() {
            if j > 0 {
                text.push_str(", ");
            }
            let value = match *name {
                "mechanism" | "coded" => serde_json::to_string(&value).expect("strings serialize"),
                "tau_star" if value.is_empty() => "null".to_owned(),
                "axis_value" | "l1_mean" | "t_s_m" if !value.contains('e') => "null".to_owned(),
                _ => value,
            };
            let _ = write!(text, "\"{name}\": {value}");
        }
        text.push('}');
    }
    text.push_str(if rows.is_empty() { "]\n" } else { "\n]\n" });
    out.write_all(text.as_bytes())?;
    out.flush()
}

pub fn emit<W: Write>(rows: &[Row], format: Format, out: W) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}

/// Replaces `path` with the table in one rename, so readers never see a
/// partial file.
pub fn emit_to_path(rows: &[Row], format: Format, path: &Path) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let file = std::fs::File::create(&tmp)?;
        emit(rows, format, io::BufWriter::new(file))?;
    }
    std::fs::rename(&tmp, path)
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Row>, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().collect()
}

pub fn read_json<R: Read>(input: R) -> serde_json::Result<Vec<Row>> {
    serde_json::from_reader(input)
}
