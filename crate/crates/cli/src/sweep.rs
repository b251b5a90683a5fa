//! Precision sweeps and the shared batch runner.

use std::collections::BTreeMap;
use std::ops::Range;
use std::thread;
use std::time::Instant;

use nlact_core::blocks::CostLedger;
use nlact_core::protocols::{
    evaluate, model_bits, score, Function, ProtocolParams, SessionSpec,
};
use nlact_core::sharing::seeded_rng;
use nlact_core::transport::ChannelStats;
use rand::Rng;

use crate::config::{RunConfig, Transport};
use crate::error::Result;
use crate::expected::Expected;
use crate::report::{blank_row, kb, Row, SprimeRow, SprimeTable};

/// Largest domain swept exhaustively; larger ones are sampled.
pub const SWEEP_CAP: u64 = 1 << 16;

/// Salt separating the sampling stream from the protocol randomness.
const SAMPLE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// The raw `l`-bit inputs a function accepts, as ascending ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    ranges: Vec<Range<u64>>,
}

impl Domain {
    pub fn of(p: &ProtocolParams) -> Domain {
        let full = 1u64 << p.l;
        let half = full >> 1;
        let quarter = full >> 2;
        let ranges = match p.func {
            Function::Exp | Function::Sigmoid => std::iter::once(0..full).collect(),
            Function::Expn => std::iter::once(half..full).collect(),
            Function::Tanh => vec![0..quarter, full - quarter..full],
        };
        Domain { ranges }
    }

    pub fn len(&self) -> u64 {
        self.ranges.iter().map(|r| r.end - r.start).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `i`-th element in ascending raw order.
    pub fn nth(&self, mut i: u64) -> u64 {
        for r in &self.ranges {
            let n = r.end - r.start;
            if i < n {
                return r.start + i;
            }
            i -= n;
        }
        panic!("index past the end of the domain")
    }

    /// Every input when the domain holds at most `cap` values; otherwise one
    /// seeded draw from each of `cap` equal strata.
    pub fn sweep_points(&self, cap: u64, seed: u64) -> (Vec<u64>, bool) {
        let n = self.len();
        if n <= cap {
            return ((0..n).map(|i| self.nth(i)).collect(), true);
        }
        let mut rng = seeded_rng(seed ^ SAMPLE_SALT);
        let pts = (0..cap)
            .map(|k| {
                let lo = (k as u128 * n as u128 / cap as u128) as u64;
                let hi = ((k + 1) as u128 * n as u128 / cap as u128) as u64;
                self.nth(rng.gen_range(lo..hi))
            })
            .collect();
        (pts, false)
    }

    /// `count` uniform draws.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<u64> {
        let mut rng = seeded_rng(seed ^ SAMPLE_SALT);
        let n = self.len();
        (0..count).map(|_| self.nth(rng.gen_range(0..n))).collect()
    }
}

/// Outputs and counters of a batch split over parallel sessions.
#[derive(Clone, Debug)]
pub struct BatchRun {
    pub outputs: Vec<u64>,
    /// Ledgers of all sessions merged, except `rounds`, which is the
    /// largest single-session count.
    pub ledger: CostLedger,
    pub peer: ChannelStats,
    pub dealer_link: ChannelStats,
    pub wall_time_s: f64,
}

/// Runs `inputs` as `cfg.threads` independent in-process sessions (session
/// `i` uses seed `cfg.seed + i`), or as one loopback TCP session.
pub fn run_batch(cfg: &RunConfig, p: &ProtocolParams, inputs: &[u64]) -> Result<BatchRun> {
    if cfg.transport == Transport::Tcp {
        return crate::party::loopback(cfg, p, inputs);
    }
    let start = Instant::now();
    let parts = cfg.threads.clamp(1, inputs.len().max(1));
    let chunk = inputs.len().div_ceil(parts).max(1);
    let blocks = cfg.blocks();
    let results: Vec<_> = thread::scope(|sc| {
        let handles: Vec<_> = inputs
            .chunks(chunk)
            .enumerate()
            .map(|(i, part)| {
                let spec = SessionSpec {
                    blocks,
                    seed: cfg.seed.wrapping_add(i as u64),
                    session_id: i as u32,
                    capture: false,
                };
                sc.spawn(move || evaluate(p, &spec, part))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut run = BatchRun {
        outputs: Vec::with_capacity(inputs.len()),
        ledger: CostLedger::default(),
        peer: ChannelStats::default(),
        dealer_link: ChannelStats::default(),
        wall_time_s: 0.0,
    };
    let mut rounds = 0;
    for r in results {
        let e = r?;
        run.outputs.extend(e.outputs);
        rounds = rounds.max(e.ledger.rounds);
        run.ledger.merge(&e.ledger);
        run.peer.merge(&e.peer);
        run.dealer_link.merge(&e.dealer_link);
    }
    run.ledger.rounds = rounds;
    run.wall_time_s = start.elapsed().as_secs_f64();
    Ok(run)
}

/// Fills a report row from a finished batch.
pub fn make_row(
    cfg: &RunConfig,
    p: &ProtocolParams,
    inputs: &[u64],
    run: &BatchRun,
    domain_size: u64,
    exhaustive: bool,
) -> Row {
    let n = inputs.len() as u64;
    let mut row = blank_row(p, cfg.backend, cfg.rec, cfg.hash_hex(p));
    row.instances = n;
    row.domain_size = domain_size;
    row.exhaustive = exhaustive;
    let mut hist = BTreeMap::new();
    let mut total = 0u128;
    let mut max = (0u64, inputs.first().copied().unwrap_or(0));
    for (&x, &y) in inputs.iter().zip(&run.outputs) {
        let u = score(p, x, y);
        *hist.entry(u).or_insert(0u64) += 1;
        total += u as u128;
        if u > max.0 {
            max = (u, x);
        }
    }
    if n > 0 {
        row.max_ulp = Some(max.0);
        row.argmax_input = Some(max.1);
        row.mean_ulp = Some(total as f64 / n as f64);
    }
    row.histogram = hist;
    row.invocations = run.ledger.per_instance(n);
    let per = run.ledger.bits_sent as f64 / n.max(1) as f64;
    row.model_bits_per_instance = per;
    row.model_kb_per_instance = kb(per);
    row.formula_bits_per_instance = model_bits(&cfg.blocks().cost, p);
    row.physical_bytes_per_instance =
        (run.peer.bytes_sent + run.dealer_link.bytes_sent) as f64 / n.max(1) as f64;
    row.rounds = run.ledger.rounds;
    row.messages = run.ledger.messages;
    row.domain_clamped = run.ledger.domain_clamped;
    row.wall_time_s = run.wall_time_s;
    row
}

/// Every grid input of the function's domain (or a stratified sample above
/// [`SWEEP_CAP`]) scored against the exact value.
pub fn sweep(cfg: &RunConfig, p: &ProtocolParams) -> Result<Row> {
    let domain = Domain::of(p);
    let (inputs, exhaustive) = domain.sweep_points(SWEEP_CAP, cfg.seed);
    let run = run_batch(cfg, p, &inputs)?;
    Ok(make_row(cfg, p, &inputs, &run, domain.len(), exhaustive))
}

/// Max ULP of each function at each `s' - s` offset; infeasible offsets give
/// `None`.
pub fn sweep_sprime(cfg: &RunConfig, funcs: &[Function], offsets: &[u32]) -> Result<SprimeTable> {
    let expected = Expected::embedded();
    let mut rows = Vec::new();
    for &f in funcs {
        let mut max_ulp = Vec::new();
        let mut reference = Vec::new();
        for &off in offsets {
            let mut c = cfg.clone();
            c.function = f;
            c.s_prime = Some(cfg.s + off);
            max_ulp.push(match c.params() {
                Ok(p) => sweep(&c, &p)?.max_ulp,
                Err(_) => None,
            });
            reference.push(if cfg.s == expected.sprime_sweep.s {
                expected.sprime(f, off)
            } else {
                None
            });
        }
        rows.push(SprimeRow {
            function: f,
            max_ulp,
            reference,
        });
    }
    Ok(SprimeTable {
        s: cfg.s,
        offsets: offsets.to_vec(),
        rows,
    })
}
