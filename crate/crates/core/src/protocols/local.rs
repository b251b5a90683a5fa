//! The exponential tables each party evaluates on its own share, and a
//! plaintext evaluation of the case analysis from two known shares.
//!
//! Entries are computed in double precision and floored: at most 53 bits of
//! the result are significant, which keeps the local error below 2^-50
//! relative, well under one step of any grid used here.

use super::params::ProtocolParams;
use crate::fixedpoint::{mask, msb};
use crate::sharing::wrap_oracle;

/// `Fix(e^{(share - offset·L/2) / 2^s}, s')` for `offset` in {0, 1, 2}.
pub fn table_entry(p: &ProtocolParams, share: u64, half_steps: u32) -> u64 {
    let shift = (half_steps as u64) << (p.l - 1);
    let e = (share as f64 - shift as f64) / (1u64 << p.s) as f64;
    let v = e.exp() * (1u64 << p.s_prime) as f64;
    v.floor() as u64
}

/// Bit length of the largest entry of the table with the given offset
/// (entries grow with the share, so the top share decides).
pub fn table_bits(p: &ProtocolParams, half_steps: u32) -> u32 {
    let shift = half_steps as f64 * 2f64.powi(p.l as i32 - 1);
    let e = (2f64.powi(p.l as i32) - 1.0 - shift) / 2f64.powi(p.s as i32);
    let v = (e.exp() * 2f64.powi(p.s_prime as i32)).floor();
    if v >= 2f64.powi(64) {
        v.log2().floor() as u32 + 1
    } else {
        (64 - (v as u64).leading_zeros()).max(1)
    }
}

pub fn table(p: &ProtocolParams, shares: &[u64], half_steps: u32) -> Vec<u64> {
    shares.iter().map(|&x| table_entry(p, x, half_steps)).collect()
}

/// Plaintext value of the exp composition for shares `(x1, x2)`: the same
/// tables, cross terms mod N, case selection and final floor.
pub fn exp_from_shares(p: &ProtocolParams, x1: u64, x2: u64) -> u64 {
    let nm = mask(p.n_bits) as u128;
    let prod = |h: u32| (table_entry(p, x1, h) as u128 * table_entry(p, x2, h) as u128) & nm;
    let (a, b, c) = (prod(0), prod(1), prod(2));
    let x = x1.wrapping_add(x2) & mask(p.l);
    let m = msb(x, p.l) as u8;
    let w = wrap_oracle(x1, x2, p.l);
    let t1 = if (w ^ m) == 1 { b.wrapping_sub(a) & nm } else { 0 };
    let t2 = if (w & m) == 1 { c.wrapping_sub(a) & nm } else { 0 };
    let rst = (t1 + t2 + a) & nm;
    ((rst >> (2 * p.s_prime - p.s)) as u64) & mask(p.bw_o)
}

/// As [`exp_from_shares`] for the negative-input composition.
pub fn expn_from_shares(p: &ProtocolParams, x1: u64, x2: u64) -> u64 {
    let nm = mask(p.n_bits) as u128;
    let prod = |h: u32| (table_entry(p, x1, h) as u128 * table_entry(p, x2, h) as u128) & nm;
    let (a, b) = (prod(1), prod(2));
    let w = wrap_oracle(x1, x2, p.l);
    let t = if w == 1 { b.wrapping_sub(a) & nm } else { 0 };
    let rst = (t + a) & nm;
    ((rst >> (2 * p.s_prime - p.s)) as u64) & mask(p.bw_o)
}
