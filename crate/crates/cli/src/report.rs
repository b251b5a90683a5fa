//! Machine-readable results: one JSON document per run, or CSV tables with a
//! fixed column order.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use nlact_core::blocks::{BackendKind, RecMode};
use nlact_core::protocols::{Function, ProtocolParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Format;
use crate::error::Result;
use crate::party::PartyOutput;
use crate::rnn_cell::RnnSummary;

pub const REPORT_SCHEMA: &str = include_str!("../data/report.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub sprime: Option<SprimeTable>,
    pub comparisons: Vec<Comparison>,
    pub rnn_cell: Option<RnnSummary>,
    /// Output of a `party` process.
    pub party: Option<PartyOutput>,
    pub notes: Vec<String>,
}

/// Results of one protocol configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub function: Function,
    pub s: u32,
    pub s_prime: u32,
    pub l: u32,
    pub bw_o: u32,
    pub n_bits: u32,
    pub backend: BackendKind,
    pub rec: RecMode,
    pub config_hash: String,
    /// Instances evaluated.
    pub instances: u64,
    /// Size of the input domain the instances were drawn from.
    pub domain_size: u64,
    pub exhaustive: bool,
    pub max_ulp: Option<u64>,
    pub mean_ulp: Option<f64>,
    pub argmax_input: Option<u64>,
    /// ULP error -> number of inputs.
    pub histogram: BTreeMap<u64, u64>,
    pub invocations: BTreeMap<String, u64>,
    pub model_bits_per_instance: f64,
    pub model_kb_per_instance: f64,
    pub formula_bits_per_instance: u64,
    pub physical_bytes_per_instance: f64,
    pub rounds: u64,
    pub messages: u64,
    pub domain_clamped: bool,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprimeTable {
    pub s: u32,
    pub offsets: Vec<u32>,
    pub rows: Vec<SprimeRow>,
}

/// `None` marks an offset whose parameters are infeasible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprimeRow {
    pub function: Function,
    pub max_ulp: Vec<Option<u64>>,
    pub reference: Vec<Option<u64>>,
}

/// Model traffic of one instance next to the SIRNN composition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub function: Function,
    pub s: u32,
    pub ours_bits: u64,
    /// SIRNN's block list with our expn in place of its lookup-table one.
    pub sirnn_structural_bits: Option<u64>,
    /// SIRNN's block list including its lookup-table expn (estimate).
    pub sirnn_lookup_bits: Option<u64>,
    pub ours_kb: f64,
    pub reference_ours_kb: Option<f64>,
    pub reference_sirnn_kb: Option<f64>,
}

/// Kilobytes (1024 bytes) for a bit count.
pub fn kb(bits: f64) -> f64 {
    bits / 8.0 / 1024.0
}

/// Hex SHA-256 of a value's JSON form.
pub fn digest(value: &impl Serialize) -> String {
    let json = serde_json::to_vec(value).expect("serializable");
    hex::encode(Sha256::digest(&json))
}

impl Report {
    pub fn new(command: &str, config_hash: String, seed: u64) -> Report {
        Report {
            tool: "nlact".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash,
            seed,
            rows: Vec::new(),
            sprime: None,
            comparisons: Vec::new(),
            rnn_cell: None,
            party: None,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// CSV of the run's main table: the s' grid for `sweep-sprime`, the rnn
    /// summary for `rnn-cell`, the rows otherwise (comparisons follow the
    /// rows as a second table when present).
    pub fn to_csv(&self) -> Result<String> {
        let mut out = Vec::new();
        if let Some(t) = &self.sprime {
            let mut w = csv::Writer::from_writer(&mut out);
            let mut header = vec!["function".to_string()];
            header.extend(t.offsets.iter().map(|o| format!("s+{o}")));
            w.write_record(&header).map_err(csv_err)?;
            for r in &t.rows {
                let mut rec = vec![r.function.to_string()];
                rec.extend(r.max_ulp.iter().map(|v| v.map_or("-".into(), |u| u.to_string())));
                w.write_record(&rec).map_err(csv_err)?;
            }
            w.flush()?;
        } else if let Some(r) = &self.rnn_cell {
            let mut w = csv::Writer::from_writer(&mut out);
            w.serialize(r).map_err(csv_err)?;
            w.flush()?;
        } else {
            let mut w = csv::Writer::from_writer(&mut out);
            for r in &self.rows {
                w.serialize(CsvRow::from_row(r, self.seed))
                    .map_err(csv_err)?;
            }
            w.flush()?;
            drop(w);
            if !self.comparisons.is_empty() {
                out.push(b'\n');
                let mut w = csv::Writer::from_writer(&mut out);
                for c in &self.comparisons {
                    w.serialize(c).map_err(csv_err)?;
                }
                w.flush()?;
            }
        }
        Ok(String::from_utf8(out).expect("csv is utf-8"))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }

    /// Writes to `path`, or to stdout when no path is given.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<()> {
        let text = self.render(format)?;
        match path {
            Some(p) => std::fs::write(p, text)?,
            None => {
                let mut o = std::io::stdout().lock();
                o.write_all(text.as_bytes())?;
                if !text.ends_with('\n') {
                    o.write_all(b"\n")?;
                }
            }
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> crate::error::CliError {
    crate::error::CliError::Config(format!("csv: {e}"))
}

/// Flat CSV form of a [`Row`]; the field order is the column order.
#[derive(Serialize)]
pub struct CsvRow {
    pub function: Function,
    pub s: u32,
    pub s_prime: u32,
    pub l: u32,
    pub bw_o: u32,
    pub n_bits: u32,
    pub backend: BackendKind,
    pub rec: RecMode,
    pub instances: u64,
    pub exhaustive: bool,
    pub max_ulp: Option<u64>,
    pub mean_ulp: Option<f64>,
    pub model_bits_per_instance: f64,
    pub model_kb_per_instance: f64,
    pub physical_bytes_per_instance: f64,
    pub rounds: u64,
    pub wall_time_s: f64,
    pub config_hash: String,
    pub seed: u64,
}

pub const CSV_COLUMNS: [&str; 19] = [
    "function",
    "s",
    "s_prime",
    "l",
    "bw_o",
    "n_bits",
    "backend",
    "rec",
    "instances",
    "exhaustive",
    "max_ulp",
    "mean_ulp",
    "model_bits_per_instance",
    "model_kb_per_instance",
    "physical_bytes_per_instance",
    "rounds",
    "wall_time_s",
    "config_hash",
    "seed",
];

impl CsvRow {
    fn from_row(r: &Row, seed: u64) -> CsvRow {
        CsvRow {
            function: r.function,
            s: r.s,
            s_prime: r.s_prime,
            l: r.l,
            bw_o: r.bw_o,
            n_bits: r.n_bits,
            backend: r.backend,
            rec: r.rec,
            instances: r.instances,
            exhaustive: r.exhaustive,
            max_ulp: r.max_ulp,
            mean_ulp: r.mean_ulp,
            model_bits_per_instance: r.model_bits_per_instance,
            model_kb_per_instance: r.model_kb_per_instance,
            physical_bytes_per_instance: r.physical_bytes_per_instance,
            rounds: r.rounds,
            wall_time_s: r.wall_time_s,
            config_hash: r.config_hash.clone(),
            seed,
        }
    }
}

/// Parameter columns of a [`Row`] before any results are filled in.
pub fn blank_row(p: &ProtocolParams, backend: BackendKind, rec: RecMode, hash: String) -> Row {
    Row {
        function: p.func,
        s: p.s,
        s_prime: p.s_prime,
        l: p.l,
        bw_o: p.bw_o,
        n_bits: p.n_bits,
        backend,
        rec,
        config_hash: hash,
        instances: 0,
        domain_size: 0,
        exhaustive: false,
        max_ulp: None,
        mean_ulp: None,
        argmax_input: None,
        histogram: BTreeMap::new(),
        invocations: BTreeMap::new(),
        model_bits_per_instance: 0.0,
        model_kb_per_instance: 0.0,
        formula_bits_per_instance: 0,
        physical_bytes_per_instance: 0.0,
        rounds: 0,
        messages: 0,
        domain_clamped: false,
        wall_time_s: 0.0,
    }
}
