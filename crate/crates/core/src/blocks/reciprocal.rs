//! Reciprocal of a shared value in `[1, 2]`.
//!
//! The iterative form is Newton's method `r <- r (2 - v r)` from the linear
//! estimate `r0 = (2.9142 - v) / 2`, carried at `f` fractional bits and
//! truncated back to scale `s` at the end.

use super::cost::{BlockKind, CostModel};
use super::party::{Party, RecMode};
use crate::error::{Error, Result};
use crate::sharing::ArithShares;

/// Largest scale the iterative form supports (`2f + 2 <= 64`, `f > s`).
pub const MAX_ITERATIVE_SCALE: u32 = 28;

/// Working precision of the Newton iterations.
pub fn working_bits(s: u32) -> u32 {
    (s + 8).min(30)
}

/// Newton steps needed to bring the initial error (< 2^-3.5) below 2^-(s+1).
pub fn iterations(s: u32) -> u32 {
    let need = (s as f64 + 1.0) / 3.5;
    (need.log2().ceil().max(1.0)) as u32
}

/// Bits charged for one reciprocal at scale `s`, output ring `s + 2`.
pub fn rec_cost(c: &CostModel, s: u32) -> u64 {
    let f = working_bits(s);
    let step = c.mult(s + 2, f + 1)
        + c.truncate(s + f + 3, s)
        + c.mult(f + 1, f + 1)
        + c.truncate(2 * f + 2, f);
    iterations(s) as u64 * step + c.truncate(f + 2, f - s)
}

fn initial_constant(s: u32) -> u64 {
    (2.9142 * (1u64 << s) as f64).floor() as u64
}

impl Party {
    /// `round(2^(2s) / v)` (ideal) or its Newton approximation (iterative),
    /// for `v` at scale `s` with value in `[1, 2]`; output ring `out_ring`.
    pub fn rec(&mut self, v: &ArithShares, s: u32, out_ring: u32) -> Result<ArithShares> {
        if v.ring < s + 2 {
            return Err(Error::Contract(format!(
                "reciprocal input ring {} narrower than s+2 = {}",
                v.ring,
                s + 2
            )));
        }
        match self.config().rec {
            RecMode::Ideal => {
                let bits = if s <= MAX_ITERATIVE_SCALE {
                    rec_cost(&self.config().cost, s)
                } else {
                    0
                };
                self.rec_ideal(v, s, out_ring, bits)
            }
            RecMode::Iterative => {
                if s > MAX_ITERATIVE_SCALE || out_ring != s + 2 {
                    return Err(Error::Contract(format!(
                        "iterative reciprocal needs s <= {MAX_ITERATIVE_SCALE} and an s+2 output ring (s={s}, out={out_ring})"
                    )));
                }
                let n = v.len();
                self.scope(BlockKind::Rec, n, |p| rec_newton(p, v, s))
            }
        }
    }
}

fn rec_newton(p: &mut Party, v: &ArithShares, s: u32) -> Result<ArithShares> {
    let f = working_bits(s);
    let v = v.reduce(s + 2)?;
    // (2.9142 - v) at scale s is r0 at scale s+1
    let r0 = v.neg().add_public(initial_constant(s));
    let mut r = r0.shl_widen(f - s - 1)?;
    let k = iterations(s);
    for i in 0..k {
        let t = p.mult(&v, &r)?;
        let t = p.truncate(&t, s)?.reduce(f + 1)?;
        // 2 - t vanishes mod 2^(f+1) except for the -t
        let e = t.neg();
        let rr = p.mult(&r, &e)?;
        r = p.truncate(&rr, f)?;
        if i + 1 < k {
            r = r.reduce(f + 1)?;
        }
    }
    p.truncate(&r, f - s)
}
