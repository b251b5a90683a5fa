//! Closed-form per-instance communication of the protocols, and of the
//! SIRNN compositions they are compared against, from the per-block formulas.

use serde::{Deserialize, Serialize};

use super::local::table_bits;
use super::params::{Function, ProtocolParams};
use crate::blocks::reciprocal::{rec_cost, MAX_ITERATIVE_SCALE};
use crate::blocks::CostModel;

/// Digit width of SIRNN's lookup-table exponential.
pub const SIRNN_DIGIT_BITS: u32 = 8;

/// Bits one instance of `params.func` is charged.
pub fn model_bits(c: &CostModel, p: &ProtocolParams) -> u64 {
    let trunc = c.truncate(p.n_bits, 2 * p.s_prime - p.s);
    let cross = |h| {
        let w = table_bits(p, h);
        c.cross_term(w, w)
    };
    match p.func {
        Function::Exp => {
            cross(0) + cross(1) + cross(2)
                + c.msb(p.l)
                + c.msb_to_wrap()
                + c.and()
                + 2 * c.mux(p.n_bits)
                + trunc
        }
        Function::Expn => cross(1) + cross(2) + c.msb_to_wrap() + c.mux(p.n_bits) + trunc,
        Function::Sigmoid | Function::Tanh => {
            c.msb(p.l) + c.mux(p.l) + expn_bits(c, p) + rec_bits(c, p.s) + c.mux(p.bw_o)
        }
    }
}

fn expn_bits(c: &CostModel, p: &ProtocolParams) -> u64 {
    model_bits(c, &ProtocolParams { func: Function::Expn, ..*p })
}

fn rec_bits(c: &CostModel, s: u32) -> u64 {
    if s > MAX_ITERATIVE_SCALE {
        0
    } else {
        rec_cost(c, s)
    }
}

/// How SIRNN's own exponential is costed inside its sigmoid/tanh rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SirnnExpn {
    /// The same expn as ours, isolating the structural difference of the rows.
    Shared,
    /// Digit decomposition plus lookup tables, multiplications and truncations.
    LookupTable,
}

/// Model bits of SIRNN's lookup-table exponential on an `l`-bit input with
/// `n`-bit table entries at scale `s`.
pub fn sirnn_expn_bits(c: &CostModel, l: u32, s: u32, n: u32) -> u64 {
    let d = SIRNN_DIGIT_BITS;
    let digits = l.div_ceil(d) as u64;
    c.dig_dec(l, d)
        + digits * c.lut(d, n)
        + (digits - 1) * (c.mult(n, n) + c.truncate(2 * n, s))
}

/// Model bits of one SIRNN sigmoid or tanh: msb×2, Mux×2, Rec×1, expn×1,
/// B2A×1, Mult×1, TR×1. `None` for the functions without such a row.
pub fn sirnn_bits(c: &CostModel, p: &ProtocolParams, expn: SirnnExpn) -> Option<u64> {
    let e = match expn {
        SirnnExpn::Shared => expn_bits(c, p),
        SirnnExpn::LookupTable => sirnn_expn_bits(c, p.l, p.s, p.bw_o),
    };
    match p.func {
        Function::Sigmoid | Function::Tanh => Some(
            2 * c.msb(p.l)
                + c.mux(p.l)
                + c.mux(p.bw_o)
                + rec_bits(c, p.s)
                + e
                + c.b2a(p.bw_o)
                + c.mult(p.bw_o, p.bw_o)
                + c.truncate(2 * p.bw_o, p.s),
        ),
        Function::Expn => Some(sirnn_expn_bits(c, p.l, p.s, p.bw_o)),
        Function::Exp => None,
    }
}
