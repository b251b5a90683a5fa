//! Two-party building blocks with a dealer.

pub mod cost;
pub mod dealer;
pub mod party;
pub mod reciprocal;
pub mod wire;

pub use cost::{counts, AndCost, BlockKind, CostLedger, CostModel, RoundTable};
pub use dealer::{decode_inputs, Dealer, DealerSummary};
pub use party::{BackendKind, BlockConfig, Party, PartyOutcome, RecMode};
