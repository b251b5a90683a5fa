//! Closed-form communication costs and the per-session ledger.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockKind {
    Msb,
    MsbToWrap,
    Mux,
    And,
    B2A,
    CrossTerm,
    Mult,
    Truncate,
    Rec,
    Expn,
}

impl BlockKind {
    pub const ALL: [BlockKind; 10] = [
        BlockKind::Msb,
        BlockKind::MsbToWrap,
        BlockKind::Mux,
        BlockKind::And,
        BlockKind::B2A,
        BlockKind::CrossTerm,
        BlockKind::Mult,
        BlockKind::Truncate,
        BlockKind::Rec,
        BlockKind::Expn,
    ];

    /// Name used in ledgers and reports.
    pub fn name(self) -> &'static str {
        match self {
            BlockKind::Msb => "msb",
            BlockKind::MsbToWrap => "msbTOwrap",
            BlockKind::Mux => "Mux",
            BlockKind::And => "AND",
            BlockKind::B2A => "B2A",
            BlockKind::CrossTerm => "CrossTerm",
            BlockKind::Mult => "Mult",
            BlockKind::Truncate => "TR",
            BlockKind::Rec => "Rec",
            BlockKind::Expn => "expn",
        }
    }

    pub fn from_name(s: &str) -> Option<BlockKind> {
        BlockKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Which published bound to charge for AND.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum AndCost {
    /// `λ + 20` bits.
    #[default]
    LambdaPlus20,
    /// A flat 148 bits.
    Flat148,
}

/// Per-block bit costs as functions of the security parameter and widths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub lambda: u64,
    pub and_cost: AndCost,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            lambda: 128,
            and_cost: AndCost::default(),
        }
    }
}

impl CostModel {
    pub fn msb(&self, l: u32) -> u64 {
        self.lambda * l as u64 + 14 * l as u64
    }

    pub fn msb_to_wrap(&self) -> u64 {
        self.lambda + 2
    }

    pub fn mux(&self, l: u32) -> u64 {
        2 * (self.lambda + l as u64)
    }

    pub fn and(&self) -> u64 {
        match self.and_cost {
            AndCost::LambdaPlus20 => self.lambda + 20,
            AndCost::Flat148 => 148,
        }
    }

    pub fn b2a(&self, l: u32) -> u64 {
        self.lambda + l as u64
    }

    /// `μ(λ + μ/2 + 1/2) + mn`, kept integral as `μ(2λ + μ + 1)/2 + mn`.
    pub fn cross_term(&self, m: u32, n: u32) -> u64 {
        let (m, n) = (m as u64, n as u64);
        let mu = m.min(n);
        mu * (2 * self.lambda + mu + 1) / 2 + m * n
    }

    pub fn mult(&self, m: u32, n: u32) -> u64 {
        let (m, n) = (m as u64, n as u64);
        let (mu, nu) = (m.min(n), m.max(n));
        self.lambda * (2 * mu + 6) + 2 * mu * nu + mu * mu + 3 * mu + 2 * nu + 4
    }

    /// Truncation of an `l`-bit value by `s` bits.
    pub fn truncate(&self, l: u32, s: u32) -> u64 {
        self.lambda * (s as u64 + 1) + l as u64 + 13 * s as u64
    }

    /// Digit decomposition of an `l`-bit value into `d`-bit digits.
    pub fn dig_dec(&self, l: u32, d: u32) -> u64 {
        let c = l.div_ceil(d) as u64;
        (c - 1) * (self.lambda * (d as u64 + 2) + 15 * d as u64 + 20)
    }

    /// Table lookup on a `d`-bit index returning `n` bits.
    pub fn lut(&self, d: u32, n: u32) -> u64 {
        2 * self.lambda + (1u64 << d) * n as u64
    }
}

/// Rounds charged per block invocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTable {
    pub msb: u64,
    pub other: u64,
}

impl Default for RoundTable {
    fn default() -> Self {
        RoundTable { msb: 2, other: 1 }
    }
}

impl RoundTable {
    pub fn rounds(&self, kind: BlockKind) -> u64 {
        match kind {
            BlockKind::Msb => self.msb,
            _ => self.other,
        }
    }
}

/// Model-level accounting for one session.
///
/// `invocations` counts top-level blocks per instance (a nested protocol such
/// as expn inside sigmoid shows up under its own name); `primitive` counts
/// every block actually executed. Rounds are charged once per batched call.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    pub bits_sent: u64,
    pub messages: u64,
    pub rounds: u64,
    pub invocations: BTreeMap<String, u64>,
    pub primitive: BTreeMap<String, u64>,
    /// Set when values passed through a domain clamp (which values were
    /// actually moved stays secret).
    pub domain_clamped: bool,
}

impl CostLedger {
    pub fn merge(&mut self, o: &CostLedger) {
        self.bits_sent += o.bits_sent;
        self.messages += o.messages;
        self.rounds += o.rounds;
        for (k, v) in &o.invocations {
            *self.invocations.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &o.primitive {
            *self.primitive.entry(k.clone()).or_default() += v;
        }
        self.domain_clamped |= o.domain_clamped;
    }

    pub fn count(&self, kind: BlockKind) -> u64 {
        self.invocations.get(kind.name()).copied().unwrap_or(0)
    }

    /// Invocation counts divided by the number of instances.
    pub fn per_instance(&self, instances: u64) -> BTreeMap<String, u64> {
        self.invocations
            .iter()
            .map(|(k, v)| (k.clone(), v / instances.max(1)))
            .collect()
    }

    pub(crate) fn record_invocation(&mut self, kind: BlockKind, n: u64) {
        *self.invocations.entry(kind.name().to_string()).or_default() += n;
    }

    pub(crate) fn record_primitive(&mut self, kind: BlockKind, n: u64, bits_each: u64, rounds: u64) {
        *self.primitive.entry(kind.name().to_string()).or_default() += n;
        self.bits_sent += bits_each * n;
        self.rounds += rounds;
        self.messages += 2 * rounds;
    }
}

/// Builds an invocation map from `(kind, count)` pairs.
pub fn counts(pairs: &[(BlockKind, u64)]) -> BTreeMap<String, u64> {
    pairs
        .iter()
        .map(|(k, v)| (k.name().to_string(), *v))
        .collect()
}
