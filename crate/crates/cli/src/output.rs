//! Row sinks. JSON-lines is the canonical format; CSV flattens vector
//! fields into `;`-separated strings. Column order is fixed by each row type.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use dunkl_liyau::{Relation, VerificationReport};
use serde::Serialize;

use crate::args::{Format, OutputArgs};

/// A record with a fixed CSV projection.
pub trait Record: Serialize {
    const COLUMNS: &'static [&'static str];
    fn csv_fields(&self) -> Vec<String>;
}

pub fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

/// Shortest round-tripping decimal.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// One verification row.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Row {
    pub claim_id: String,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub a: Option<f64>,
    pub kappa: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
    pub tolerance: f64,
    pub relation: String,
    pub pass: bool,
    #[serde(default)]
    pub detail: String,
}

fn relation_str(r: Relation) -> &'static str {
    match r {
        Relation::Le => "le",
        Relation::EqAbs => "eq_abs",
        Relation::EqRel => "eq_rel",
    }
}

impl Row {
    pub fn from_report(r: &VerificationReport, detail: impl Into<String>) -> Self {
        Row {
            claim_id: r.claim_id.as_str().to_string(),
            t: r.point.t,
            s: r.point.s,
            x: r.point.x.clone(),
            y: r.point.y.clone(),
            a: r.point.a,
            kappa: r.point.kappa.clone(),
            lhs: r.lhs,
            rhs: r.rhs,
            deficit: r.deficit,
            tolerance: r.tolerance,
            relation: relation_str(r.relation).to_string(),
            pass: r.pass,
            detail: detail.into(),
        }
    }
}

impl Record for Row {
    const COLUMNS: &'static [&'static str] = &[
        "claim_id", "t", "s", "x", "y", "a", "kappa", "lhs", "rhs", "deficit", "tolerance",
        "relation", "pass", "detail",
    ];
    fn csv_fields(&self) -> Vec<String> {
        vec![
            self.claim_id.clone(),
            opt(self.t),
            opt(self.s),
            join(&self.x),
            join(&self.y),
            opt(self.a),
            join(&self.kappa),
            fmt_f64(self.lhs),
            fmt_f64(self.rhs),
            fmt_f64(self.deficit),
            fmt_f64(self.tolerance),
            self.relation.clone(),
            self.pass.to_string(),
            self.detail.clone(),
        ]
    }
}

/// Output of `kernel-eval`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub kappa: Vec<f64>,
    pub p: f64,
    pub log_p: f64,
    pub grad_log_p: Vec<f64>,
    pub hess_diag_log_p: Vec<f64>,
    pub dt_log_p: f64,
}

impl Record for KernelRow {
    const COLUMNS: &'static [&'static str] = &[
        "t", "x", "y", "kappa", "p", "log_p", "grad_log_p", "hess_diag_log_p", "dt_log_p",
    ];
    fn csv_fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.t),
            join(&self.x),
            join(&self.y),
            join(&self.kappa),
            fmt_f64(self.p),
            fmt_f64(self.log_p),
            join(&self.grad_log_p),
            join(&self.hess_diag_log_p),
            fmt_f64(self.dt_log_p),
        ]
    }
}

/// Output of `report`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub claim_id: String,
    pub total: usize,
    pub failed: usize,
    pub worst_deficit: f64,
}

impl Record for SummaryRow {
    const COLUMNS: &'static [&'static str] = &["claim_id", "total", "failed", "worst_deficit"];
    fn csv_fields(&self) -> Vec<String> {
        vec![
            self.claim_id.clone(),
            self.total.to_string(),
            self.failed.to_string(),
            fmt_f64(self.worst_deficit),
        ]
    }
}

enum Inner {
    /// The raw writer until the comment header is out.
    CsvPending(Option<Box<dyn Write>>),
    Csv(Box<csv::Writer<Box<dyn Write>>>),
    Json(Box<dyn Write>),
}

/// Streams records of one type, tracking pass/fail for [`Row`] sinks.
pub struct Sink {
    inner: Inner,
    header_written: bool,
    reproducible: bool,
    pub rows: usize,
    pub failures: usize,
}

impl Sink {
    pub fn open(args: &OutputArgs) -> io::Result<Self> {
        let w: Box<dyn Write> = match &args.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self::new(w, args.format, args.reproducible))
    }

    pub fn new(w: Box<dyn Write>, format: Format, reproducible: bool) -> Self {
        let inner = match format {
            Format::Csv => Inner::CsvPending(Some(w)),
            Format::JsonLines => Inner::Json(w),
        };
        Sink {
            inner,
            header_written: false,
            reproducible,
            rows: 0,
            failures: 0,
        }
    }

    fn header_line(&self) -> String {
        let mut h = format!("generator=dunkl-liyau {}", env!("CARGO_PKG_VERSION"));
        if !self.reproducible {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            h.push_str(&format!("; generated_at={secs}"));
        }
        h
    }

    fn write_header<R: Record>(&mut self) -> io::Result<()> {
        if self.header_written {
            return Ok(());
        }
        self.header_written = true;
        let line = self.header_line();
        match &mut self.inner {
            Inner::CsvPending(raw) => {
                let mut raw = raw.take().expect("csv header written twice");
                writeln!(raw, "# {line}")?;
                let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(raw);
                w.write_record(R::COLUMNS)?;
                self.inner = Inner::Csv(Box::new(w));
            }
            Inner::Csv(_) => {}
            Inner::Json(w) => {
                let meta = serde_json::json!({ "meta": line, "columns": R::COLUMNS });
                writeln!(w, "{meta}")?;
            }
        }
        Ok(())
    }

    pub fn write<R: Record>(&mut self, record: &R) -> io::Result<()> {
        self.write_header::<R>()?;
        self.rows += 1;
        match &mut self.inner {
            Inner::Csv(w) => w.write_record(record.csv_fields())?,
            Inner::CsvPending(_) => unreachable!("header precedes rows"),
            Inner::Json(w) => {
                serde_json::to_writer(&mut *w, record)?;
                writeln!(w)?;
            }
        }
        Ok(())
    }

    pub fn write_row(&mut self, row: &Row) -> io::Result<()> {
        if !row.pass {
            self.failures += 1;
        }
        self.write(row)
    }

    pub fn finish<R: Record>(mut self) -> io::Result<(usize, usize)> {
        self.write_header::<R>()?;
        match &mut self.inner {
            Inner::Csv(w) => w.flush()?,
            Inner::CsvPending(_) => {}
            Inner::Json(w) => w.flush()?,
        }
        Ok((self.rows, self.failures))
    }
}
