//! Reference numbers the harness compares against, loaded from
//! `data/expected.json`.

use std::collections::BTreeMap;

use nlact_core::protocols::Function;
use serde::Deserialize;

const EMBEDDED: &str = include_str!("../data/expected.json");

#[derive(Clone, Debug, Deserialize)]
pub struct Expected {
    pub format_version: u32,
    pub source: String,
    pub sprime_sweep: SprimeSweep,
    pub precision: Precision,
    pub halving: Halving,
    pub building_blocks: BuildingBlocks,
    pub rounds: Rounds,
    pub traffic_kb_per_instance: Traffic,
    pub rnn_cell: RnnCell,
}

#[derive(Clone, Debug, Deserialize)]
pub struct SprimeSweep {
    pub s: u32,
    pub offsets: Vec<u32>,
    pub max_ulp: BTreeMap<Function, Vec<Option<u64>>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Precision {
    pub ulp_tolerance: u64,
    pub cases: Vec<PrecisionCase>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
pub struct PrecisionCase {
    pub function: Function,
    pub s: u32,
    pub offset: u32,
    pub max_ulp: u64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
pub struct Halving {
    pub max_offset: u32,
    pub ratio_low: f64,
    pub ratio_high: f64,
}

pub type Counts = BTreeMap<String, u64>;

#[derive(Clone, Debug, Deserialize)]
pub struct BuildingBlocks {
    pub ours: BTreeMap<Function, Counts>,
    pub sirnn: BTreeMap<Function, Counts>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Rounds {
    pub s: Vec<u32>,
    pub ours: BTreeMap<Function, u64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Traffic {
    pub s: u32,
    pub ours: BTreeMap<Function, f64>,
    pub sirnn: BTreeMap<Function, f64>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
pub struct GateShape {
    pub s_in: u32,
    pub s_out: u32,
    pub bits: u32,
}

#[derive(Clone, Copy, Debug, Deserialize)]
pub struct RnnCell {
    pub instances_per_gate: usize,
    pub sigmoid: GateShape,
    pub tanh: GateShape,
    pub max_ulp: u64,
    pub reference_traffic_ratio: f64,
}

impl Expected {
    /// The copy compiled into the binary.
    pub fn embedded() -> Expected {
        serde_json::from_str(EMBEDDED).expect("embedded expected values parse")
    }

    /// Reference max ULP at `offset`, if one was reported.
    pub fn sprime(&self, f: Function, offset: u32) -> Option<u64> {
        let i = self.sprime_sweep.offsets.iter().position(|&o| o == offset)?;
        self.sprime_sweep.max_ulp.get(&f)?.get(i).copied().flatten()
    }
}
