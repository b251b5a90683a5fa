//! Sigmoid and tanh through the negative-input exponential.

use super::exp::expn;
use super::params::ProtocolParams;
use crate::blocks::{BlockKind, Party};
use crate::error::{Error, Result};
use crate::fixedpoint::mask;
use crate::sharing::{ArithShares, BoolShares};

/// `negx`: `-(x + 1)` for non-negative `x`, `x` otherwise, computed as
/// `(2x + 1)·msb(x) - x - 1`; its value is always negative. Also returns the
/// shared msb.
pub fn negx(p: &mut Party, x: &ArithShares) -> Result<(ArithShares, BoolShares)> {
    let two_x_1 = x.scale(2).add_public(1);
    let m = p.msb(x)?;
    let sel = p.mux(&two_x_1, &m)?;
    Ok((sel.sub(x)?.add_public(mask(x.ring)), m))
}

fn sigmoid_body(p: &mut Party, x: &ArithShares, params: &ProtocolParams) -> Result<ArithShares> {
    if x.ring != params.l {
        return Err(Error::RingMismatch {
            left: x.ring,
            right: params.l,
        });
    }
    let s = params.s;
    let (negx, m) = negx(p, x)?;
    let n = x.len();
    let e = p.scope(BlockKind::Expn, n, |p| expn(p, &negx, params))?;
    let v = e.add_public(1 << s);
    let rec = p.rec(&v, s, params.bw_o)?;
    let flip = rec.scale(2).neg().add_public(1 << s);
    let adj = p.mux(&flip, &m)?;
    rec.add(&adj)
}

/// Shares of `Fix(sigmoid(rev(x)), s)` in `Z_{2^bw_o}`; non-negative inputs
/// are evaluated at `rev(x) + 2^-s`.
pub fn sigmoid(p: &mut Party, x: &ArithShares, params: &ProtocolParams) -> Result<ArithShares> {
    sigmoid_body(p, x, params)
}

/// Shares of `Fix(tanh(rev(x)), s)` as `2·sigmoid(2x) - 1`; `rev(x)` must
/// lie in `[-4, 4)` for `2x` to stay in the ring.
pub fn tanh(p: &mut Party, x: &ArithShares, params: &ProtocolParams) -> Result<ArithShares> {
    let x2 = x.scale(2);
    let sig = sigmoid_body(p, &x2, params)?;
    Ok(sig.scale(2).add_public((1u64 << params.s).wrapping_neg()))
}
