//! Signed helpers used around the activations when they sit inside a larger
//! fixed-point computation.

use crate::blocks::Party;
use crate::error::{Error, Result};
use crate::fixedpoint::mask;
use crate::sharing::ArithShares;

fn enc(v: i64, k: u32) -> u64 {
    (v as u64) & mask(k)
}

/// Clamps signed `x` into `[lo, hi]` (raw signed values): two msb and two
/// Mux. Sets the ledger's `domain_clamped` flag. `x - lo` and `hi - x` must
/// not overflow the ring.
pub fn clamp(p: &mut Party, x: &ArithShares, lo: i64, hi: i64) -> Result<ArithShares> {
    if lo > hi {
        return Err(Error::Contract(format!("empty clamp range [{lo}, {hi}]")));
    }
    let k = x.ring;
    let below = p.msb(&x.add_public(enc(-lo, k)))?;
    let up = x.neg().add_public(enc(lo, k));
    let x = x.add(&p.mux(&up, &below)?)?;
    let above = p.msb(&x.neg().add_public(enc(hi, k)))?;
    let down = x.neg().add_public(enc(hi, k));
    let x = x.add(&p.mux(&down, &above)?)?;
    p.mark_clamped();
    Ok(x)
}

/// Same unsigned value in `Z_{2^k}`, as a Mult by a shared public one.
pub fn extend_unsigned(p: &mut Party, x: &ArithShares, k: u32) -> Result<ArithShares> {
    if k <= x.ring {
        return x.reduce(k);
    }
    let one_val = if p.id().is_p1() { 1 } else { 0 };
    let one = ArithShares::new(k - x.ring, p.id(), vec![one_val; x.len()])?;
    p.mult(x, &one)
}

/// Same signed value in `Z_{2^k}`.
pub fn extend_signed(p: &mut Party, x: &ArithShares, k: u32) -> Result<ArithShares> {
    if k <= x.ring {
        return x.reduce(k);
    }
    let half = 1u64 << (x.ring - 1);
    let shifted = x.add_public(half);
    Ok(extend_unsigned(p, &shifted, k)?.add_public(half.wrapping_neg()))
}

/// `floor(x / 2^t)` for signed `x`, into `Z_{2^(k-t)}`.
pub fn truncate_signed(p: &mut Party, x: &ArithShares, t: u32) -> Result<ArithShares> {
    let k = x.ring;
    let half = 1u64 << (k - 1);
    let y = p.truncate(&x.add_public(half), t)?;
    Ok(y.add_public((half >> t).wrapping_neg()))
}

/// `u · v` for `u` unsigned with value below `2^(m-1)` and `v` signed,
/// into `Z_{2^(m+n-1)}` as a signed value.
pub fn mult_unsigned_signed(
    p: &mut Party,
    u: &ArithShares,
    v: &ArithShares,
) -> Result<ArithShares> {
    let (m, n) = (u.ring, v.ring);
    // u (v + 2^(n-1)) < 2^(m-1) 2^n, so it is exact in m+n-1 bits
    let shifted = v.add_public(1u64 << (n - 1));
    let prod = p.mult(u, &shifted)?.reduce(m + n - 1)?;
    prod.sub(&u.shl_widen(n - 1)?)
}
