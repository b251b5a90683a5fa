//! One gated recurrent step on secret-shared state:
//! `z = σ(Wx + Uh + b_z)`, `h~ = tanh(Wx + Uh + b_h)`, `h' = h~ + z (h - h~)`
//! (FastGRNN with ζ = 1, ν = 0), checked against a plaintext run of the same
//! integer pipeline that uses exact (floored) activations.
//!
//! Fixed-point layout: `x`, `h` at scale 9 in `Z_{2^25}`, public weights at
//! scale 6, pre-activations at scale 15. The sigmoid gate sees its input at
//! scale 8 lifted to scale 14 and returns 16 bits at scale 14; the tanh gate
//! works at scale 9 with 16 output bits.

use std::time::Instant;

use nlact_core::blocks::Party;
use nlact_core::fixedpoint::{mask, sfp};
use nlact_core::protocols::signed::{clamp, extend_signed, mult_unsigned_signed, truncate_signed};
use nlact_core::protocols::{
    run_in_process, sigmoid, sirnn_bits, tanh, Function, ProtocolParams, SessionSpec, SirnnExpn,
};
use nlact_core::sharing::{reconst_batch, seeded_rng, ArithShares};
use nlact_core::Result as CoreResult;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::digest;

/// Ring and scale of the shared state.
pub const STATE_RING: u32 = 25;
pub const STATE_SCALE: u32 = 9;
pub const WEIGHT_SCALE: u32 = 6;
const PRE_SCALE: u32 = STATE_SCALE + WEIGHT_SCALE;

/// Scale at which the sigmoid gate's input is clamped, and the protocol scale.
pub const SIGMOID_IN_SCALE: u32 = 8;
pub const SIGMOID_SCALE: u32 = 14;
pub const TANH_SCALE: u32 = 9;
pub const GATE_BITS: u32 = 16;

/// Clamp bounds: inputs of both gates stay inside (-4, 4) at their scale.
const SIG_LIMIT: i64 = 1 << 11;
const TANH_LIMIT: i64 = 1 << 11;

const WEIGHT_SALT: u64 = 0x5bd1_e995_0000_0001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellShape {
    pub hidden: usize,
    pub input_dim: usize,
    /// Zero input, state and biases.
    pub zero: bool,
}

impl Default for CellShape {
    fn default() -> Self {
        CellShape {
            hidden: 100,
            input_dim: 32,
            zero: false,
        }
    }
}

/// Flat summary of one cell step (one CSV row).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RnnSummary {
    pub hidden: usize,
    pub input_dim: usize,
    pub zero: bool,
    pub sigmoid_instances: u64,
    pub tanh_instances: u64,
    pub sigmoid_s_in: u32,
    pub sigmoid_s: u32,
    pub sigmoid_bw_o: u32,
    pub tanh_s: u32,
    pub tanh_bw_o: u32,
    /// Elementwise ULP (scale 9) of the new state against the oracle.
    pub max_ulp: u64,
    pub argmax_index: usize,
    pub z_max_ulp: u64,
    pub htilde_max_ulp: u64,
    pub z_min: i64,
    pub z_max: i64,
    pub htilde_min: i64,
    pub htilde_max: i64,
    /// Model bits charged inside the two activation calls.
    pub activation_bits: u64,
    /// Model bits of the whole step (clamps, truncations, gating product).
    pub cell_bits: u64,
    /// The same activation instances costed as SIRNN block lists.
    pub sirnn_activation_bits: u64,
    pub sirnn_lookup_activation_bits: u64,
    pub traffic_ratio: f64,
    pub rounds: u64,
    pub domain_clamped: bool,
    pub wall_time_s: f64,
    pub config_hash: String,
    pub seed: u64,
}

/// Gate parameters: sigmoid at scale 14, tanh at scale 9, 16 output bits each.
pub fn gate_params() -> Result<(ProtocolParams, ProtocolParams)> {
    let sig = ProtocolParams::defaults(Function::Sigmoid, SIGMOID_SCALE)?;
    let mut th = ProtocolParams::defaults(Function::Tanh, TANH_SCALE)?;
    th.bw_o = GATE_BITS;
    th.validate()?;
    debug_assert_eq!(sig.bw_o, GATE_BITS);
    Ok((sig, th))
}

/// Public weights and the plaintext inputs of one step.
#[derive(Clone, Debug)]
pub struct CellData {
    pub shape: CellShape,
    /// `H x (D + H)` row-major: `[W | U]`.
    pub weights: Vec<i64>,
    pub b_z: Vec<i64>,
    pub b_h: Vec<i64>,
    /// `x` then `h`, raw signed at scale 9.
    pub input: Vec<i64>,
}

impl CellData {
    pub fn generate(shape: CellShape, seed: u64) -> CellData {
        let mut rng = seeded_rng(seed ^ WEIGHT_SALT);
        let (hd, cols) = (shape.hidden, shape.input_dim + shape.hidden);
        let weights = (0..hd * cols).map(|_| rng.gen_range(-16..=16)).collect();
        let mut bias = |n: usize| -> Vec<i64> {
            (0..n)
                .map(|_| if shape.zero { 0 } else { rng.gen_range(-(1 << 14)..(1 << 14)) })
                .collect()
        };
        let b_z = bias(hd);
        let b_h = bias(hd);
        let input = (0..cols)
            .map(|_| if shape.zero { 0 } else { rng.gen_range(-(1 << STATE_SCALE)..(1 << STATE_SCALE)) })
            .collect();
        CellData {
            shape,
            weights,
            b_z,
            b_h,
            input,
        }
    }

    fn cols(&self) -> usize {
        self.shape.input_dim + self.shape.hidden
    }

    /// Hidden part of the input.
    pub fn state(&self) -> &[i64] {
        &self.input[self.shape.input_dim..]
    }
}

/// Outputs of the plaintext pipeline, raw signed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellValues {
    pub z: Vec<i64>,
    pub htilde: Vec<i64>,
    pub h_next: Vec<i64>,
}

fn floor_oracle(f: Function, v: i64, s: u32) -> i64 {
    f.oracle(v, s).ldexp(s as i32).floor() as i64
}

/// The step in plain integers with exact activations.
pub fn oracle(d: &CellData) -> CellValues {
    let cols = d.cols();
    let mut out = CellValues {
        z: Vec::new(),
        htilde: Vec::new(),
        h_next: Vec::new(),
    };
    for (i, row) in d.weights.chunks(cols).enumerate() {
        let a: i64 = row.iter().zip(&d.input).map(|(w, v)| w * v).sum();
        let zs = ((a + d.b_z[i]) >> (PRE_SCALE - SIGMOID_IN_SCALE)).clamp(-SIG_LIMIT, SIG_LIMIT - 1);
        let z = floor_oracle(Function::Sigmoid, zs << (SIGMOID_SCALE - SIGMOID_IN_SCALE), SIGMOID_SCALE);
        let hs = ((a + d.b_h[i]) >> (PRE_SCALE - TANH_SCALE)).clamp(-TANH_LIMIT, TANH_LIMIT - 1);
        let ht = floor_oracle(Function::Tanh, hs, TANH_SCALE);
        let h = d.state()[i];
        out.h_next.push(ht + ((z * (h - ht)) >> SIGMOID_SCALE));
        out.z.push(z);
        out.htilde.push(ht);
    }
    out
}

fn enc(v: i64, k: u32) -> u64 {
    (v as u64) & mask(k)
}

/// One party's shares of `(z, h~, h')` and the model bits spent inside the
/// activations.
struct PartySide {
    z: ArithShares,
    htilde: ArithShares,
    h_next: ArithShares,
    activation_bits: u64,
}

fn affine(d: &CellData, v: &ArithShares, bias: &[i64]) -> CoreResult<ArithShares> {
    let cols = d.cols();
    let m = mask(v.ring);
    let raw = d
        .weights
        .chunks(cols)
        .map(|row| {
            row.iter()
                .zip(&v.raw)
                .fold(0u64, |acc, (&w, &x)| acc.wrapping_add((w as u64).wrapping_mul(x)))
                & m
        })
        .collect();
    let lin = ArithShares::new(v.ring, v.owner, raw)?;
    let b: Vec<u64> = bias.iter().map(|&b| enc(b, v.ring)).collect();
    Ok(lin.add_public_vec(&b))
}

/// Signed clamp into `[-limit, limit)`, then narrowed to `ring` bits.
fn clamp_narrow(p: &mut Party, x: &ArithShares, limit: i64, ring: u32) -> CoreResult<ArithShares> {
    debug_assert!(limit.trailing_zeros() < ring);
    clamp(p, x, -limit, limit - 1)?.reduce(ring)
}

fn party_step(p: &mut Party, v: &ArithShares, d: &CellData, sig: &ProtocolParams, th: &ProtocolParams) -> CoreResult<PartySide> {
    let hd = d.shape.hidden;
    let h = ArithShares::new(v.ring, v.owner, v.raw[d.shape.input_dim..].to_vec())?;

    let az = affine(d, v, &d.b_z)?;
    let zs = truncate_signed(p, &az, PRE_SCALE - SIGMOID_IN_SCALE)?;
    let zs = clamp_narrow(p, &zs, SIG_LIMIT, sig.l - (SIGMOID_SCALE - SIGMOID_IN_SCALE))?.shl_widen(SIGMOID_SCALE - SIGMOID_IN_SCALE)?;
    debug_assert_eq!(zs.ring, sig.l);

    let ah = affine(d, v, &d.b_h)?;
    let hs = truncate_signed(p, &ah, PRE_SCALE - TANH_SCALE)?;
    let hs = clamp_narrow(p, &hs, TANH_LIMIT, th.l)?;

    let before = p.ledger().bits_sent;
    let z = sigmoid(p, &zs, sig)?;
    let ht = tanh(p, &hs, th)?;
    let activation_bits = p.ledger().bits_sent - before;

    let ht_ext = extend_signed(p, &ht, STATE_RING)?;
    let diff = h.sub(&ht_ext)?;
    let prod = mult_unsigned_signed(p, &z, &diff)?;
    let prod = truncate_signed(p, &prod, SIGMOID_SCALE)?.reduce(STATE_RING)?;
    let h_next = ht_ext.add(&prod)?;
    debug_assert_eq!(h_next.len(), hd);
    Ok(PartySide {
        z,
        htilde: ht,
        h_next,
        activation_bits,
    })
}

fn max_ulp(got: &[u64], want: &[i64], bits: u32) -> (u64, usize, i64, i64) {
    let mut worst = (0u64, 0usize);
    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
    for (i, (&g, &w)) in got.iter().zip(want).enumerate() {
        let g = sfp(g, bits);
        lo = lo.min(g);
        hi = hi.max(g);
        let e = g.abs_diff(w);
        if e > worst.0 {
            worst = (e, i);
        }
    }
    (worst.0, worst.1, lo, hi)
}

/// Runs one step in process and scores it.
pub fn run(cfg: &RunConfig, shape: CellShape) -> Result<RnnSummary> {
    cfg.validate()?;
    if shape.hidden == 0 || shape.input_dim == 0 {
        return Err(CliError::Config("hidden and input dimensions must be positive".into()));
    }
    let start = Instant::now();
    let (sig, th) = gate_params()?;
    let data = CellData::generate(shape, cfg.seed);
    let want = oracle(&data);
    let inputs: Vec<u64> = data.input.iter().map(|&v| enc(v, STATE_RING)).collect();
    let spec = SessionSpec {
        blocks: cfg.blocks(),
        seed: cfg.seed,
        session_id: 0,
        capture: false,
    };
    let run = run_in_process(&spec, STATE_RING, &inputs, |p, v| {
        party_step(p, v, &data, &sig, &th)
    })?;
    let (a, b) = (&run.p1, &run.p2);
    let z = reconst_batch(&a.z, &b.z)?;
    let ht = reconst_batch(&a.htilde, &b.htilde)?;
    let hn = reconst_batch(&a.h_next, &b.h_next)?;
    let (max, argmax, _, _) = max_ulp(&hn, &want.h_next, STATE_RING);
    let (z_ulp, _, z_min, z_max) = max_ulp(&z, &want.z, GATE_BITS);
    let (h_ulp, _, h_min, h_max) = max_ulp(&ht, &want.htilde, GATE_BITS);

    let c = cfg.blocks().cost;
    let n = shape.hidden as u64;
    let sirnn = |e| -> Result<u64> {
        let per = sirnn_bits(&c, &sig, e).zip(sirnn_bits(&c, &th, e));
        per.map(|(s, t)| n * (s + t))
            .ok_or_else(|| CliError::Config("no SIRNN row for the gates".into()))
    };
    let sirnn_structural = sirnn(SirnnExpn::Shared)?;
    let ledger = &run.outcome_p1.ledger;
    Ok(RnnSummary {
        hidden: shape.hidden,
        input_dim: shape.input_dim,
        zero: shape.zero,
        sigmoid_instances: n,
        tanh_instances: n,
        sigmoid_s_in: SIGMOID_IN_SCALE,
        sigmoid_s: sig.s,
        sigmoid_bw_o: sig.bw_o,
        tanh_s: th.s,
        tanh_bw_o: th.bw_o,
        max_ulp: max,
        argmax_index: argmax,
        z_max_ulp: z_ulp,
        htilde_max_ulp: h_ulp,
        z_min,
        z_max,
        htilde_min: h_min,
        htilde_max: h_max,
        activation_bits: a.activation_bits,
        cell_bits: ledger.bits_sent,
        sirnn_activation_bits: sirnn_structural,
        sirnn_lookup_activation_bits: sirnn(SirnnExpn::LookupTable)?,
        traffic_ratio: a.activation_bits as f64 / sirnn_structural as f64,
        rounds: ledger.rounds,
        domain_clamped: ledger.domain_clamped,
        wall_time_s: start.elapsed().as_secs_f64(),
        config_hash: config_hash(cfg, shape, &sig, &th),
        seed: cfg.seed,
    })
}

/// Hash of everything that determines the step's result.
pub fn config_hash(cfg: &RunConfig, shape: CellShape, sig: &ProtocolParams, th: &ProtocolParams) -> String {
    digest(&serde_json::json!({
        "format_version": 1,
        "shape": shape,
        "sigmoid": cfg.hash_hex(sig),
        "tanh": cfg.hash_hex(th),
    }))
}
