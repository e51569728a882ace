//! JSON problem files, JSON result records and CSV tables.
//!
//! Floats are written with 17 significant digits. CSV output is RFC-4180
//! with a header row; a metadata block of `# key=value` lines precedes it.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::geometry::Belief;
use crate::model::{
    validate_information_structure, Atom, DecisionProblem, InformationStructure, Prior,
};

/// Formats a float with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Pretty JSON with 17-significant-digit floats.
struct PreciseFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` as pretty JSON with full-precision floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    posterior: Vec<f64>,
    weight: f64,
}

#[derive(Debug, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInformation {
    atoms: Vec<RawAtom>,
}

#[derive(Debug, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    states: Vec<String>,
    decisions: Vec<String>,
    payoffs: Vec<Vec<f64>>,
    prior: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    information: Option<RawInformation>,
}

/// Contents of a problem file.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub problem: DecisionProblem,
    pub prior: Prior,
    pub information: Option<InformationStructure>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawProblem = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawProblem) -> Result<Self> {
        let mut problems = Vec::new();
        let problem = DecisionProblem::new(raw.states, raw.decisions, raw.payoffs)
            .map_err(|e| match e {
                Error::Validation(v) => problems.extend(v),
                other => problems.push(other.to_string()),
            })
            .ok();
        let prior = Prior::from_probs(raw.prior)
            .map_err(|e| problems.push(format!("prior: {e}")))
            .ok();
        if let (Some(problem), Some(prior)) = (&problem, &prior) {
            if problem.num_states() != prior.dim() {
                problems.push(format!(
                    "prior has {} entries for {} states",
                    prior.dim(),
                    problem.num_states()
                ));
            }
        }
        let mut information = None;
        if let Some(info) = raw.information {
            let mut atoms = Vec::with_capacity(info.atoms.len());
            for (i, a) in info.atoms.into_iter().enumerate() {
                match Belief::new(a.posterior) {
                    Ok(posterior) => atoms.push(Atom {
                        posterior,
                        weight: a.weight,
                    }),
                    Err(e) => problems.push(format!("atom {i}: {e}")),
                }
            }
            match InformationStructure::new(atoms) {
                Ok(q) => {
                    if let Some(prior) = &prior {
                        problems.extend(validate_information_structure(&q, prior).violations);
                    }
                    information = Some(q);
                }
                Err(e) => problems.push(format!("information: {e}")),
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        Ok(Self {
            problem: problem.expect("validated"),
            prior: prior.expect("validated"),
            information,
        })
    }

    fn to_raw(&self) -> RawProblem {
        RawProblem {
            states: self.problem.states().to_vec(),
            decisions: self.problem.decisions().to_vec(),
            payoffs: self.problem.payoffs().to_vec(),
            prior: self.prior.probs().to_vec(),
            information: self.information.as_ref().map(|q| RawInformation {
                atoms: q
                    .atoms()
                    .iter()
                    .map(|a| RawAtom {
                        posterior: a.posterior.probs().to_vec(),
                        weight: a.weight,
                    })
                    .collect(),
            }),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(&self.to_raw())
    }
}

/// Reads and validates a JSON problem file.
pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemFile> {
    let text = fs::read_to_string(path)?;
    ProblemFile::parse(&text)
}

pub fn save_problem(path: impl AsRef<Path>, file: &ProblemFile) -> Result<()> {
    fs::write(path, file.to_json()?)?;
    Ok(())
}

/// Writes one JSON record.
pub fn save_results<T: Serialize + ?Sized>(path: impl AsRef<Path>, record: &T) -> Result<()> {
    fs::write(path, to_json_string(record)?)?;
    Ok(())
}

/// A table with a metadata block, written as CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|x| fmt_float(*x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = Vec::new();
        write_csv(&mut out, self)?;
        String::from_utf8(out).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Writes the metadata block and then the RFC-4180 body.
pub fn write_csv<W: Write>(mut w: W, table: &CsvTable) -> Result<()> {
    for (k, v) in &table.metadata {
        writeln!(w, "# {k}={}", v.replace(['\n', '\r'], " "))?;
    }
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(w);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    writer.write_record(&table.header).map_err(csv_err)?;
    for row in &table.rows {
        writer.write_record(row).map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}
