//! `e^x` over the whole input ring, and the negative-input variant.

use super::local::{table, table_bits};
use super::params::ProtocolParams;
use crate::blocks::Party;
use crate::error::{Error, Result};
use crate::sharing::{ArithShares, BoolShares};

fn check_input(p: &Party, x: &ArithShares, params: &ProtocolParams) -> Result<()> {
    if x.ring != params.l {
        return Err(Error::RingMismatch {
            left: x.ring,
            right: params.l,
        });
    }
    if x.owner != p.id() {
        return Err(Error::Contract("input shares belong to the other party".into()));
    }
    Ok(())
}

/// Cross term of the two parties' table entries at the given offset.
fn cross(p: &mut Party, x: &ArithShares, params: &ProtocolParams, h: u32) -> Result<ArithShares> {
    let mine = table(params, &x.raw, h);
    let w = table_bits(params, h);
    p.cross_term(&mine, w, w, params.n_bits)
}

/// Shares of `Fix(e^{rev(x)}, s)` in `Z_{2^bw_o}`.
///
/// With `a`, `b`, `c` the products of the parties' tables at offsets 0, L/2
/// and L, the result is `a + (b - a)[wrap ^ msb] + (c - a)[wrap & msb]`,
/// truncated by `2s' - s`. Products of unselected branches may wrap mod N;
/// they cancel against `a` exactly.
pub fn exp(p: &mut Party, x: &ArithShares, params: &ProtocolParams) -> Result<ArithShares> {
    check_input(p, x, params)?;
    let a = cross(p, x, params, 0)?;
    let b = cross(p, x, params, 1)?;
    let c = cross(p, x, params, 2)?;
    let m = p.msb(x)?;
    let w = p.msb_to_wrap(x, &m)?;
    let wm = p.and(&w, &m)?;
    let w_xor_m = w.xor(&m)?;
    let t1 = p.mux(&b.sub(&a)?, &w_xor_m)?;
    let t2 = p.mux(&c.sub(&a)?, &wm)?;
    let rst = t1.add(&t2)?.add(&a)?;
    finish(p, &rst, params)
}

/// Shares of `Fix(e^{rev(x)}, s)` for strictly negative `rev(x)`.
///
/// `msb(x) = 1` is known, so its sharing is the constant pair (0, 1) and
/// only the wrap bit is computed. A non-negative input is rejected by the
/// msbTOwrap functionality.
pub fn expn(p: &mut Party, x: &ArithShares, params: &ProtocolParams) -> Result<ArithShares> {
    check_input(p, x, params)?;
    let a = cross(p, x, params, 1)?;
    let b = cross(p, x, params, 2)?;
    let m = BoolShares::constant(p.id(), x.len(), 0, 1);
    let w = p.msb_to_wrap(x, &m)?;
    let t = p.mux(&b.sub(&a)?, &w)?;
    let rst = t.add(&a)?;
    finish(p, &rst, params)
}

fn finish(p: &mut Party, rst: &ArithShares, params: &ProtocolParams) -> Result<ArithShares> {
    let y = p.truncate(rst, 2 * params.s_prime - params.s)?;
    y.reduce(params.bw_o)
}
