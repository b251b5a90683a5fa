//! The four activation protocols, composed from the building blocks.

pub mod signed;
pub mod exp;
pub mod local;
pub mod model;
pub mod params;
pub mod session;
pub mod sigmoid;

pub use exp::{exp, expn};
pub use model::{model_bits, sirnn_bits, SirnnExpn};
pub use params::{Function, ProtocolParams};
pub use session::{run_in_process, run_with_shares, SessionRun, SessionSpec};
pub use sigmoid::{negx, sigmoid, tanh};

use serde::{Deserialize, Serialize};

use crate::blocks::{CostLedger, DealerSummary, Party};
use crate::error::Result;
use crate::fixedpoint::{sfp, ulp_error, FxNum};
use crate::sharing::{reconst_batch, ArithShares};
use crate::transport::ChannelStats;

/// Dispatches on `params.func`.
pub fn run_protocol(p: &mut Party, x: &ArithShares, params: &ProtocolParams) -> Result<ArithShares> {
    match params.func {
        Function::Exp => exp(p, x, params),
        Function::Expn => expn(p, x, params),
        Function::Sigmoid => sigmoid(p, x, params),
        Function::Tanh => tanh(p, x, params),
    }
}

/// Reconstructed outputs and counters of one in-process run.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub params: ProtocolParams,
    pub outputs: Vec<u64>,
    pub ledger: CostLedger,
    /// P1's physical traffic to P2 and to the dealer.
    pub peer: ChannelStats,
    pub dealer_link: ChannelStats,
    pub dealer: DealerSummary,
    pub transcript: Option<Vec<u8>>,
}

/// Runs `params.func` on the raw `l`-bit `inputs` as one batch.
pub fn evaluate(params: &ProtocolParams, spec: &SessionSpec, inputs: &[u64]) -> Result<Evaluation> {
    params.validate()?;
    let run = run_in_process(spec, params.l, inputs, |p, x| run_protocol(p, x, params))?;
    let outputs = reconst_batch(&run.p1, &run.p2)?;
    debug_assert_eq!(run.outcome_p1.ledger, run.outcome_p2.ledger);
    Ok(Evaluation {
        params: *params,
        outputs,
        ledger: run.outcome_p1.ledger,
        peer: run.outcome_p1.peer,
        dealer_link: run.outcome_p1.dealer,
        dealer: run.dealer,
        transcript: run.transcript,
    })
}

/// ULP distance of one output from the function's exact value.
pub fn score(params: &ProtocolParams, input: u64, output: u64) -> u64 {
    let cin = params.input_config();
    let exact = params.func.oracle(sfp(input, cin.bits()), params.s);
    ulp_error(exact, FxNum::wrapping(output, params.output_config()))
}

/// Max and mean ULP over a set of scored points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UlpSummary {
    pub count: u64,
    pub max: u64,
    pub mean: f64,
    /// Raw input attaining the maximum.
    pub argmax: u64,
}

pub fn summarize(params: &ProtocolParams, inputs: &[u64], outputs: &[u64]) -> UlpSummary {
    let mut s = UlpSummary::default();
    let mut total = 0u128;
    for (&x, &y) in inputs.iter().zip(outputs) {
        let u = score(params, x, y);
        total += u as u128;
        if u > s.max || s.count == 0 {
            s.max = u;
            s.argmax = x;
        }
        s.count += 1;
    }
    if s.count > 0 {
        s.mean = total as f64 / s.count as f64;
    }
    s
}
