//! Command-line surface and dispatch.

use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nlact_core::blocks::{BackendKind, RecMode};
use nlact_core::protocols::Function;

use crate::bench::{bench, compare};
use crate::config::{Format, RunConfig, Transport};
use crate::error::Result;
use crate::party::{self, PartyOptions, PartyRole};
use crate::report::{digest, Report};
use crate::rnn_cell::{self, CellShape};
use crate::sweep::{sweep, sweep_sprime, SWEEP_CAP};

#[derive(Debug, Parser)]
#[command(
    name = "nlact",
    version,
    about = "Secure two-party exp, sigmoid and tanh: precision sweeps, cost benchmarks and party processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Max ULP over the whole input domain (sampled above 2^16 inputs).
    Sweep(CommonArgs),
    /// Max ULP at each s' - s offset for one or all functions.
    SweepSprime {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0)]
        min_offset: u32,
        #[arg(long, default_value_t = 15)]
        max_offset: u32,
    },
    /// Model traffic and rounds of one packed batch, with the SIRNN comparison.
    Bench(CommonArgs),
    /// Runs P1, P2 or the dealer as its own process over TCP.
    Party {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        role: PartyRole,
        /// Open the outputs if the other party also agrees.
        #[arg(long)]
        reveal: bool,
        /// Seconds to keep retrying connections.
        #[arg(long, default_value_t = 30)]
        connect_timeout: u64,
        /// Seconds a read may block before the run is abandoned.
        #[arg(long, default_value_t = 300)]
        io_timeout: u64,
    },
    /// One gated recurrent step on shared state against a plaintext oracle.
    RnnCell {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 100)]
        hidden: usize,
        #[arg(long, default_value_t = 32)]
        input_dim: usize,
        /// Zero input, state and biases.
        #[arg(long)]
        zero: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BackendArg {
    Ideal,
    Beaver,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RecArg {
    Ideal,
    Iterative,
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "fn")]
    pub function: Option<Function>,
    #[arg(long = "s")]
    pub s: Option<u32>,
    #[arg(long)]
    pub sprime: Option<u32>,
    #[arg(long = "l")]
    pub l: Option<u32>,
    #[arg(long)]
    pub bwout: Option<u32>,
    #[arg(long)]
    pub nbits: Option<u32>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    #[arg(long, value_enum)]
    pub rec: Option<RecArg>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum)]
    pub transport: Option<Transport>,
    #[arg(long, env = "OPAF_HOST")]
    pub host: Option<String>,
    #[arg(long, env = "OPAF_PORT")]
    pub port: Option<u16>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl CommonArgs {
    /// The config file (or defaults) with the flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_toml_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident <- $flag:expr),* $(,)?) => {
                $(if let Some(v) = $flag.clone() { c.$field = v; })*
            };
        }
        set!(
            function <- self.function,
            s <- self.s,
            batch <- self.batch,
            seed <- self.seed,
            threads <- self.threads,
            transport <- self.transport,
            host <- self.host,
            port <- self.port,
            format <- self.format,
        );
        if let Some(n) = self.nbits {
            c.n_bits = n;
        }
        if self.sprime.is_some() {
            c.s_prime = self.sprime;
        }
        if self.l.is_some() {
            c.l = self.l;
        }
        if self.bwout.is_some() {
            c.bw_o = self.bwout;
        }
        if self.report.is_some() {
            c.report = self.report.clone();
        }
        if let Some(b) = self.backend {
            c.backend = match b {
                BackendArg::Ideal => BackendKind::Ideal,
                BackendArg::Beaver => BackendKind::Beaver,
            };
        }
        if let Some(r) = self.rec {
            c.rec = match r {
                RecArg::Ideal => RecMode::Ideal,
                RecArg::Iterative => RecMode::Iterative,
            };
        }
        c.validate()?;
        Ok(c)
    }
}

/// Runs a parsed command and writes its report.
pub fn run(cli: &Cli) -> Result<Report> {
    let (report, cfg) = match &cli.command {
        Command::Sweep(a) => {
            let cfg = a.resolve()?;
            let p = cfg.params()?;
            let mut r = Report::new("sweep", cfg.hash_hex(&p), cfg.seed);
            let row = sweep(&cfg, &p)?;
            if !row.exhaustive {
                r.notes.push(format!(
                    "domain of {} inputs sampled at {SWEEP_CAP} stratified points",
                    row.domain_size
                ));
            }
            if row.domain_clamped {
                r.notes.push("inputs passed through a domain clamp".into());
            }
            r.rows.push(row);
            (r, cfg)
        }
        Command::SweepSprime {
            common,
            min_offset,
            max_offset,
        } => {
            let cfg = common.resolve()?;
            let funcs = match common.function {
                Some(f) => vec![f],
                None => Function::ALL.to_vec(),
            };
            let offsets: Vec<u32> = (*min_offset..=*max_offset).collect();
            let table = sweep_sprime(&cfg, &funcs, &offsets)?;
            // every feasible grid point's own config hash, in table order
            let hashes: Vec<Option<String>> = funcs
                .iter()
                .flat_map(|&f| offsets.iter().map(move |&o| (f, o)))
                .map(|(f, o)| {
                    let c = RunConfig {
                        s_prime: Some(cfg.s + o),
                        ..cfg.clone()
                    };
                    c.params_for(f).ok().map(|p| c.hash_hex(&p))
                })
                .collect();
            let mut r = Report::new("sweep-sprime", digest(&hashes), cfg.seed);
            r.notes.push("'-' / null marks an infeasible s' offset".into());
            r.sprime = Some(table);
            (r, cfg)
        }
        Command::Bench(a) => {
            let cfg = a.resolve()?;
            let p = cfg.params()?;
            let mut r = Report::new("bench", cfg.hash_hex(&p), cfg.seed);
            r.rows.push(bench(&cfg, &p)?);
            r.comparisons.push(compare(&cfg, &p));
            (r, cfg)
        }
        Command::Party {
            common,
            role,
            reveal,
            connect_timeout,
            io_timeout,
        } => {
            let cfg = common.resolve()?;
            let p = cfg.params()?;
            let opts = PartyOptions {
                role: *role,
                reveal: *reveal,
                connect_timeout: Duration::from_secs(*connect_timeout),
                io_timeout: Duration::from_secs(*io_timeout),
            };
            let (row, out) = party::run(&cfg, &p, &opts)?;
            let mut r = Report::new("party", cfg.hash_hex(&p), cfg.seed);
            r.rows.extend(row);
            r.party = Some(out);
            (r, cfg)
        }
        Command::RnnCell {
            common,
            hidden,
            input_dim,
            zero,
        } => {
            let cfg = common.resolve()?;
            let shape = CellShape {
                hidden: *hidden,
                input_dim: *input_dim,
                zero: *zero,
            };
            let s = rnn_cell::run(&cfg, shape)?;
            let mut r = Report::new("rnn-cell", s.config_hash.clone(), cfg.seed);
            r.rnn_cell = Some(s);
            (r, cfg)
        }
    };
    report.emit(cfg.format, cfg.report.as_deref())?;
    Ok(report)
}
