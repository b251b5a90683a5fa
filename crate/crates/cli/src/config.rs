//! Run configuration shared by all subcommands.

use std::path::{Path, PathBuf};

use nlact_core::blocks::{BackendKind, BlockConfig, RecMode};
use nlact_core::protocols::{Function, ProtocolParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Transport {
    #[default]
    Inproc,
    Tcp,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Everything that determines a run. Unset ring/scale fields take the
/// per-function defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub function: Function,
    pub s: u32,
    pub s_prime: Option<u32>,
    pub l: Option<u32>,
    pub bw_o: Option<u32>,
    pub n_bits: u32,
    pub backend: BackendKind,
    pub rec: RecMode,
    pub batch: usize,
    pub seed: u64,
    pub threads: usize,
    pub transport: Transport,
    pub host: String,
    pub port: u16,
    pub report: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            function: Function::Sigmoid,
            s: 12,
            s_prime: None,
            l: None,
            bw_o: None,
            n_bits: 64,
            backend: BackendKind::Ideal,
            rec: RecMode::Ideal,
            batch: 1,
            seed: 1,
            threads: 1,
            transport: Transport::Inproc,
            host: "127.0.0.1".into(),
            port: 7700,
            report: None,
            format: Format::Json,
        }
    }
}

/// Fields that must agree between processes and that fix the results.
#[derive(Serialize)]
struct Canonical<'a> {
    format_version: u32,
    params: &'a ProtocolParams,
    backend: BackendKind,
    rec: RecMode,
    batch: usize,
    seed: u64,
    threads: usize,
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn params(&self) -> Result<ProtocolParams> {
        self.params_for(self.function)
    }

    /// Parameters for `func` with this run's overrides applied.
    pub fn params_for(&self, func: Function) -> Result<ProtocolParams> {
        let mut p = ProtocolParams {
            func,
            s: self.s,
            s_prime: self.s + func.default_offset(),
            l: self.s + 4,
            bw_o: self.s + func.default_out_margin(),
            n_bits: self.n_bits,
        };
        if let Some(v) = self.s_prime {
            p.s_prime = v;
        }
        if let Some(v) = self.l {
            p.l = v;
        }
        if let Some(v) = self.bw_o {
            p.bw_o = v;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn blocks(&self) -> BlockConfig {
        BlockConfig {
            backend: self.backend,
            rec: self.rec,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 {
            return Err(CliError::Config("batch must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of the result-determining fields.
    pub fn hash_for(&self, params: &ProtocolParams) -> [u8; 32] {
        let c = Canonical {
            format_version: 1,
            params,
            backend: self.backend,
            rec: self.rec,
            batch: self.batch,
            seed: self.seed,
            threads: self.threads,
        };
        let json = serde_json::to_vec(&c).expect("serializable");
        Sha256::digest(&json).into()
    }

    pub fn hash_hex(&self, params: &ProtocolParams) -> String {
        hex::encode(self.hash_for(params))
    }
}
