//! Fixed-point encoding over `Z_{2^l}` and the ULP metric.
//!
//! A real `x_f` is encoded as `floor(x_f * 2^s) mod 2^l`. Values with the top
//! bit set are negative under the two's-complement reading (`sfp`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reference::Dd;

/// Bitwidth `l` and scale `s` of a fixed-point encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedConfig {
    l: u32,
    s: u32,
}

impl FixedConfig {
    pub fn new(l: u32, s: u32) -> Result<Self> {
        if l == 0 || l > 64 {
            return Err(Error::Config(format!("bitwidth {l} outside 1..=64")));
        }
        if s >= l {
            return Err(Error::Config(format!("scale {s} must be below bitwidth {l}")));
        }
        Ok(FixedConfig { l, s })
    }

    pub fn bits(&self) -> u32 {
        self.l
    }

    pub fn scale(&self) -> u32 {
        self.s
    }

    /// `2^l - 1`.
    pub fn mask(&self) -> u64 {
        mask(self.l)
    }
}

/// All-ones mask for a `bits`-wide ring.
#[inline]
pub fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// An element of `Z_{2^l}` read as a fixed-point number at scale `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FxNum {
    raw: u64,
    cfg: FixedConfig,
}

impl FxNum {
    pub fn new(raw: u64, cfg: FixedConfig) -> Result<Self> {
        if raw & !cfg.mask() != 0 {
            return Err(Error::OutOfRing {
                value: raw as u128,
                bits: cfg.l,
            });
        }
        Ok(FxNum { raw, cfg })
    }

    /// Reduces `raw` into the ring instead of rejecting it.
    pub fn wrapping(raw: u64, cfg: FixedConfig) -> Self {
        FxNum {
            raw: raw & cfg.mask(),
            cfg,
        }
    }

    pub fn raw(&self) -> u64 {
        self.raw
    }

    pub fn config(&self) -> FixedConfig {
        self.cfg
    }

    pub fn msb(&self) -> bool {
        msb(self.raw, self.cfg.l)
    }

    pub fn sfp(&self) -> i64 {
        sfp(self.raw, self.cfg.l)
    }

    pub fn rev(&self) -> f64 {
        self.sfp() as f64 / (1u64 << self.cfg.s) as f64
    }

    /// Exact `sfp / 2^s`.
    pub fn rev_dd(&self) -> Dd {
        Dd::from_i128(self.sfp() as i128).ldexp(-(self.cfg.s as i32))
    }
}

/// `floor(x_f * 2^s) mod 2^l`.
///
/// `-0.0` and subnormal inputs encode as zero.
pub fn fix(x_f: f64, cfg: FixedConfig) -> Result<FxNum> {
    if !x_f.is_finite() {
        return Err(Error::Contract(format!("cannot encode non-finite {x_f}")));
    }
    if x_f == 0.0 || x_f.is_subnormal() {
        return Ok(FxNum { raw: 0, cfg });
    }
    let scaled = x_f * 2f64.powi(cfg.s as i32);
    if scaled.abs() >= 2f64.powi(63) {
        return Err(Error::Contract(format!(
            "{x_f} * 2^{} overflows the encoding",
            cfg.s
        )));
    }
    let v = scaled.floor() as i64;
    Ok(FxNum::wrapping(v as u64, cfg))
}

#[inline]
pub fn msb(raw: u64, l: u32) -> bool {
    (raw >> (l - 1)) & 1 == 1
}

/// Two's-complement reading of an `l`-bit value.
#[inline]
pub fn sfp(raw: u64, l: u32) -> i64 {
    if l == 64 {
        raw as i64
    } else if msb(raw, l) {
        raw as i64 - (1i64 << l)
    } else {
        raw as i64
    }
}

/// Distance in grid steps between `produced` and `exact` rounded to the
/// grid (ties to even).
pub fn ulp_error(exact: impl Into<Dd>, produced: FxNum) -> u64 {
    let exact = exact.into();
    let target = exact.ldexp(produced.cfg.s as i32).round_ties_even();
    (produced.sfp() as i128 - target).unsigned_abs() as u64
}

/// One scored sample of a precision sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UlpReport {
    pub input: f64,
    pub exact: f64,
    pub produced: FxNum,
    pub ulp: u64,
}

impl UlpReport {
    pub fn score(input: f64, exact: Dd, produced: FxNum) -> Self {
        UlpReport {
            input,
            exact: exact.to_f64(),
            produced,
            ulp: ulp_error(exact, produced),
        }
    }
}
