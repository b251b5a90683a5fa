//! Cost benchmark: one packed batch of random in-domain instances.

use nlact_core::protocols::{model_bits, sirnn_bits, ProtocolParams, SirnnExpn};

use crate::config::RunConfig;
use crate::error::Result;
use crate::expected::Expected;
use crate::report::{kb, Comparison, Row};
use crate::sweep::{make_row, run_batch, Domain};

/// Runs `cfg.batch` seeded random inputs and scores them.
pub fn bench(cfg: &RunConfig, p: &ProtocolParams) -> Result<Row> {
    cfg.validate()?;
    let domain = Domain::of(p);
    let inputs = domain.sample(cfg.batch, cfg.seed);
    let run = run_batch(cfg, p, &inputs)?;
    Ok(make_row(cfg, p, &inputs, &run, domain.len(), false))
}

/// Our model traffic next to the SIRNN rows and the published figures.
pub fn compare(cfg: &RunConfig, p: &ProtocolParams) -> Comparison {
    let c = cfg.blocks().cost;
    let ours = model_bits(&c, p);
    let expected = Expected::embedded();
    let t = &expected.traffic_kb_per_instance;
    let at_ref = p.s == t.s;
    Comparison {
        function: p.func,
        s: p.s,
        ours_bits: ours,
        sirnn_structural_bits: sirnn_bits(&c, p, SirnnExpn::Shared),
        sirnn_lookup_bits: sirnn_bits(&c, p, SirnnExpn::LookupTable),
        ours_kb: kb(ours as f64),
        reference_ours_kb: t.ours.get(&p.func).copied().filter(|_| at_ref),
        reference_sirnn_kb: t.sirnn.get(&p.func).copied().filter(|_| at_ref),
    }
}
