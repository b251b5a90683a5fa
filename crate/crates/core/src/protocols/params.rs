//! Ring and scale bookkeeping for one protocol run.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixedpoint::FixedConfig;
use crate::reference::{self, Dd};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Function {
    Exp,
    Expn,
    Sigmoid,
    Tanh,
}

impl Function {
    pub const ALL: [Function; 4] = [
        Function::Exp,
        Function::Expn,
        Function::Sigmoid,
        Function::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Exp => "exp",
            Function::Expn => "expn",
            Function::Sigmoid => "sigmoid",
            Function::Tanh => "tanh",
        }
    }

    /// Default `s' - s`.
    pub fn default_offset(self) -> u32 {
        match self {
            Function::Exp => 9,
            Function::Expn => 12,
            Function::Sigmoid => 9,
            Function::Tanh => 11,
        }
    }

    /// Default `bw_o - s`.
    pub fn default_out_margin(self) -> u32 {
        match self {
            Function::Exp => 13,
            _ => 2,
        }
    }

    /// Whether the raw `l`-bit input lies in the function's domain.
    pub fn in_domain(self, raw: u64, cfg: FixedConfig) -> bool {
        let v = crate::fixedpoint::sfp(raw & cfg.mask(), cfg.bits());
        match self {
            Function::Exp | Function::Sigmoid => true,
            Function::Expn => v < 0,
            Function::Tanh => {
                // 2x must stay representable
                let lim = 1i64 << (cfg.bits() - 2);
                (-lim..lim).contains(&v)
            }
        }
    }

    /// The value the protocol approximates at grid input `sfp / 2^s`,
    /// including the `2^-s` shift applied to non-negative sigmoid inputs.
    pub fn oracle(self, sfp: i64, s: u32) -> Dd {
        let x = Dd::from_i128(sfp as i128).ldexp(-(s as i32));
        let eps = Dd::ONE.ldexp(-(s as i32));
        match self {
            Function::Exp | Function::Expn => reference::exp(x),
            Function::Sigmoid => {
                if sfp >= 0 {
                    reference::sigmoid(x + eps)
                } else {
                    reference::sigmoid(x)
                }
            }
            Function::Tanh => {
                // 2 sigmoid(2x + eps) - 1 = tanh(x + eps/2)
                if sfp >= 0 {
                    reference::tanh(x + eps.ldexp(-1))
                } else {
                    reference::tanh(x)
                }
            }
        }
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Function {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Function::ALL
            .into_iter()
            .find(|f| f.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown function {s:?}")))
    }
}

/// Bitwidths and scales of one run: input `Z_{2^l}` at scale `s`, output
/// `Z_{2^bw_o}` at scale `s`, local tables at scale `s'`, cross terms in
/// `Z_{2^n_bits}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub func: Function,
    pub s: u32,
    pub s_prime: u32,
    pub l: u32,
    pub bw_o: u32,
    pub n_bits: u32,
}

impl ProtocolParams {
    pub fn defaults(func: Function, s: u32) -> Result<Self> {
        Self::with_offset(func, s, func.default_offset())
    }

    pub fn with_offset(func: Function, s: u32, offset: u32) -> Result<Self> {
        let p = ProtocolParams {
            func,
            s,
            s_prime: s + offset,
            l: s + 4,
            bw_o: s + func.default_out_margin(),
            n_bits: 64,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn input_config(&self) -> FixedConfig {
        FixedConfig::new(self.l, self.s).expect("validated")
    }

    pub fn output_config(&self) -> FixedConfig {
        FixedConfig::new(self.bw_o, self.s).expect("validated")
    }

    /// Bits the scaled result occupies before truncation: `bw_o - s + 2s'`.
    pub fn product_bits(&self) -> u32 {
        self.bw_o - self.s + 2 * self.s_prime
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        FixedConfig::new(self.l, self.s)?;
        // s' = s is accepted so the unrefined baseline can be measured
        if self.s_prime < self.s {
            return bad(format!("s' = {} is below s = {}", self.s_prime, self.s));
        }
        if 2 * self.s_prime == self.s {
            return bad("the final truncation 2s' - s must be positive".into());
        }
        if self.bw_o <= self.s || self.bw_o > 64 {
            return bad(format!("bw_o = {} must lie in (s, 64]", self.bw_o));
        }
        if self.n_bits > 64 || self.n_bits < self.l {
            return bad(format!("N bits = {} must lie in [l, 64]", self.n_bits));
        }
        if self.product_bits() > 64 {
            return bad(format!(
                "bw_o - s + 2s' = {} exceeds 64",
                self.product_bits()
            ));
        }
        if self.product_bits() > self.n_bits {
            return bad(format!(
                "N bits = {} cannot hold bw_o - s + 2s' = {}",
                self.n_bits,
                self.product_bits()
            ));
        }
        if matches!(self.func, Function::Sigmoid | Function::Tanh) && self.bw_o < self.s + 2 {
            return bad("sigmoid/tanh need bw_o >= s + 2".into());
        }
        if self.l < 3 {
            return bad("l must be at least 3".into());
        }
        let widest = super::local::table_bits(self, 0);
        if widest > 64 {
            return bad(format!(
                "local exponential tables need {widest} bits; reduce l - s or s'"
            ));
        }
        Ok(())
    }
}
