//! The third party: evaluates ideal functionalities, or hands out correlated
//! randomness for the Beaver backend.
//!
//! Under the ideal backend the dealer reconstructs its inputs, which is
//! exactly the trusted-box model the protocols are analysed in, and nothing
//! more: it gives no cryptographic protection against the dealer.

use rand::{Rng, RngCore};
use rand_chacha::ChaCha20Rng;

use super::wire::{
    put_u64s, Reader, Request, MODE_BEAVER, MODE_IDEAL, STATUS_CONTRACT, STATUS_OK,
};
use crate::error::{Error, Result};
use crate::fixedpoint::{mask, msb};
use crate::sharing::{seeded_rng, wrap_oracle};
use crate::transport::{tags, Channel, ChannelStats};

/// Sub-operations multiplexed on the `MULT` tag under the Beaver backend.
pub(crate) const MULT_TRIPLE: u32 = 0;
pub(crate) const MULT_EXT_MASK: u32 = 1;

pub struct Dealer {
    p1: Channel,
    p2: Channel,
    rng: ChaCha20Rng,
    served: u64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DealerSummary {
    pub requests: u64,
    pub to_p1: ChannelStats,
    pub to_p2: ChannelStats,
}

impl Dealer {
    pub fn new(p1: Channel, p2: Channel, seed: u64) -> Dealer {
        Dealer {
            p1,
            p2,
            rng: seeded_rng(seed),
            served: 0,
        }
    }

    /// Sends fresh shares of `values` (ring `ring`) to both parties.
    pub fn deal_inputs(&mut self, values: &[u64], ring: u32) -> Result<()> {
        check_ring(ring)?;
        let (a, b) = self.split_arith(values, ring);
        let mut m1 = (ring as u64).to_le_bytes().to_vec();
        let mut m2 = m1.clone();
        m1.extend(a);
        m2.extend(b);
        self.p1.send_msg(tags::INPUT, &m1)?;
        self.p2.send_msg(tags::INPUT, &m2)
    }

    /// Serves requests until both parties say goodbye.
    pub fn serve(&mut self) -> Result<DealerSummary> {
        loop {
            let (t1, m1) = self.p1.recv_any()?;
            let (t2, m2) = self.p2.recv_any()?;
            if t1 != t2 {
                return Err(Error::Desync(format!(
                    "parties requested different blocks: {t1:#04x} vs {t2:#04x}"
                )));
            }
            if t1 == tags::BYE {
                break;
            }
            let (r1, d1) = Request::decode(&m1)?;
            let (r2, d2) = Request::decode(&m2)?;
            if r1 != r2 {
                return Err(Error::Desync(format!(
                    "parties disagree on block {t1:#04x}: {r1:?} vs {r2:?}"
                )));
            }
            self.served += 1;
            match self.dispatch(t1, &r1, d1, d2) {
                Ok((a, b)) => {
                    let mut o1 = Vec::with_capacity(a.len() + 1);
                    o1.push(STATUS_OK);
                    o1.extend(a);
                    let mut o2 = Vec::with_capacity(b.len() + 1);
                    o2.push(STATUS_OK);
                    o2.extend(b);
                    self.p1.send_msg(t1, &o1)?;
                    self.p2.send_msg(t1, &o2)?;
                }
                Err(Error::Contract(msg)) => {
                    let mut o = vec![STATUS_CONTRACT];
                    o.extend_from_slice(msg.as_bytes());
                    self.p1.send_msg(t1, &o)?;
                    self.p2.send_msg(t1, &o)?;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(self.summary())
    }

    pub fn summary(&self) -> DealerSummary {
        DealerSummary {
            requests: self.served,
            to_p1: self.p1.stats(),
            to_p2: self.p2.stats(),
        }
    }

    fn dispatch(
        &mut self,
        tag: u8,
        req: &Request,
        d1: &[u8],
        d2: &[u8],
    ) -> Result<(Vec<u8>, Vec<u8>)> {
        match req.mode {
            MODE_IDEAL => self.ideal(tag, req, d1, d2),
            MODE_BEAVER => {
                if !d1.is_empty() || !d2.is_empty() {
                    return Err(Error::Desync(
                        "correlated-randomness requests carry no data".into(),
                    ));
                }
                self.beaver(tag, req)
            }
            m => Err(Error::Desync(format!("unknown mode {m}"))),
        }
    }

    fn split_arith(&mut self, values: &[u64], ring: u32) -> (Vec<u8>, Vec<u8>) {
        let m = mask(ring);
        let mut a = Vec::with_capacity(values.len() * 8);
        let mut b = Vec::with_capacity(values.len() * 8);
        for &v in values {
            let r = self.rng.next_u64() & m;
            a.extend_from_slice(&r.to_le_bytes());
            b.extend_from_slice(&(v.wrapping_sub(r) & m).to_le_bytes());
        }
        (a, b)
    }

    fn split_bits(&mut self, bits: &[u8]) -> (Vec<u8>, Vec<u8>) {
        let mut a = Vec::with_capacity(bits.len());
        let mut b = Vec::with_capacity(bits.len());
        for &v in bits {
            let r = self.rng.gen::<bool>() as u8;
            a.push(r);
            b.push(v ^ r);
        }
        (a, b)
    }

    fn ideal(
        &mut self,
        tag: u8,
        req: &Request,
        d1: &[u8],
        d2: &[u8],
    ) -> Result<(Vec<u8>, Vec<u8>)> {
        let n = req.batch as usize;
        let p = req.params;
        let (mut r1, mut r2) = (Reader::new(d1), Reader::new(d2));
        let out = match tag {
            tags::MSB => {
                let l = p[0];
                check_ring(l)?;
                let x = reconstruct(&mut r1, &mut r2, n, l)?;
                let bits: Vec<u8> = x.iter().map(|&v| msb(v, l) as u8).collect();
                Out::Bits(bits)
            }
            tags::MSB_TO_WRAP => {
                let l = p[0];
                check_ring(l)?;
                let (x1, x2) = (ring_vec(&mut r1, n, l)?, ring_vec(&mut r2, n, l)?);
                let (m1, m2) = (r1.bits(n)?, r2.bits(n)?);
                let mut bits = Vec::with_capacity(n);
                for i in 0..n {
                    let x = x1[i].wrapping_add(x2[i]) & mask(l);
                    if msb(x, l) as u8 != m1[i] ^ m2[i] {
                        return Err(Error::Contract(
                            "msbTOwrap: boolean input does not share msb(x)".into(),
                        ));
                    }
                    bits.push(wrap_oracle(x1[i], x2[i], l));
                }
                Out::Bits(bits)
            }
            tags::MUX => {
                let l = p[0];
                check_ring(l)?;
                let x = reconstruct(&mut r1, &mut r2, n, l)?;
                let b = xor_bits(&mut r1, &mut r2, n)?;
                Out::Arith(
                    x.iter().zip(&b).map(|(&v, &b)| if b == 1 { v } else { 0 }).collect(),
                    l,
                )
            }
            tags::AND => {
                let a = xor_bits(&mut r1, &mut r2, n)?;
                let b = xor_bits(&mut r1, &mut r2, n)?;
                Out::Bits(a.iter().zip(&b).map(|(x, y)| x & y).collect())
            }
            tags::B2A => {
                let l = p[0];
                check_ring(l)?;
                let b = xor_bits(&mut r1, &mut r2, n)?;
                Out::Arith(b.iter().map(|&b| b as u64).collect(), l)
            }
            tags::CROSS_TERM => {
                let (m, k, out) = (p[0], p[1], p[2]);
                check_ring(m)?;
                check_ring(k)?;
                check_ring(out)?;
                let a1 = ring_vec(&mut r1, n, m)?;
                let a2 = ring_vec(&mut r2, n, k)?;
                let om = mask(out) as u128;
                Out::Arith(
                    a1.iter()
                        .zip(&a2)
                        .map(|(&a, &b)| ((a as u128 * b as u128) & om) as u64)
                        .collect(),
                    out,
                )
            }
            tags::MULT => {
                let (m, k) = (p[0], p[1]);
                check_ring(m)?;
                check_ring(k)?;
                check_ring(m + k)?;
                let x = reconstruct(&mut r1, &mut r2, n, m)?;
                let y = reconstruct(&mut r1, &mut r2, n, k)?;
                let om = mask(m + k) as u128;
                Out::Arith(
                    x.iter()
                        .zip(&y)
                        .map(|(&a, &b)| ((a as u128 * b as u128) & om) as u64)
                        .collect(),
                    m + k,
                )
            }
            tags::TRUNCATE => {
                let (l, t) = (p[0], p[1]);
                check_ring(l)?;
                if t == 0 || t >= l {
                    return Err(Error::Contract(format!(
                        "truncation by {t} of a {l}-bit value"
                    )));
                }
                let x = reconstruct(&mut r1, &mut r2, n, l)?;
                Out::Arith(x.iter().map(|v| v >> t).collect(), l - t)
            }
            tags::REC => {
                let (l, s, out) = (p[0], p[1], p[2]);
                check_ring(l)?;
                check_ring(out)?;
                if 2 * s + 1 >= 128 {
                    return Err(Error::Contract(format!("reciprocal scale {s} too large")));
                }
                let v = reconstruct(&mut r1, &mut r2, n, l)?;
                let lo = 1u64 << s;
                let mut y = Vec::with_capacity(n);
                for &v in &v {
                    if cfg!(debug_assertions) && !(lo..=2 * lo).contains(&v) {
                        return Err(Error::Contract(format!(
                            "reciprocal input {v} outside [2^{s}, 2^{}]",
                            s + 1
                        )));
                    }
                    let v = v.max(1) as u128;
                    // round(2^(2s) / v); no ties since v | 2^(2s+1) forces v | 2^(2s)
                    let q = ((1u128 << (2 * s + 1)) / v).div_ceil(2);
                    y.push((q as u64) & mask(out));
                }
                Out::Arith(y, out)
            }
            t => return Err(Error::Desync(format!("unknown block tag {t:#04x}"))),
        };
        r1.finish()?;
        r2.finish()?;
        Ok(match out {
            Out::Bits(b) => self.split_bits(&b),
            Out::Arith(v, l) => self.split_arith(&v, l),
        })
    }

    fn beaver(&mut self, tag: u8, req: &Request) -> Result<(Vec<u8>, Vec<u8>)> {
        let n = req.batch as usize;
        let p = req.params;
        let (mut o1, mut o2) = (Vec::new(), Vec::new());
        match tag {
            tags::AND => {
                let a: Vec<u8> = (0..n).map(|_| self.rng.gen::<bool>() as u8).collect();
                let b: Vec<u8> = (0..n).map(|_| self.rng.gen::<bool>() as u8).collect();
                let c: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x & y).collect();
                for v in [a, b, c] {
                    let (x, y) = self.split_bits(&v);
                    o1.extend(x);
                    o2.extend(y);
                }
            }
            tags::MUX => {
                let l = p[0];
                check_ring(l)?;
                let r: Vec<u8> = (0..n).map(|_| self.rng.gen::<bool>() as u8).collect();
                let u: Vec<u64> = (0..n).map(|_| self.rng.next_u64() & mask(l)).collect();
                let ur: Vec<u64> = u.iter().zip(&r).map(|(&u, &r)| u * r as u64).collect();
                let (x, y) = self.split_bits(&r);
                o1.extend(x);
                o2.extend(y);
                let ra: Vec<u64> = r.iter().map(|&b| b as u64).collect();
                for v in [ra, u, ur] {
                    let (x, y) = self.split_arith(&v, l);
                    o1.extend(x);
                    o2.extend(y);
                }
            }
            tags::B2A => {
                let l = p[0];
                check_ring(l)?;
                let r: Vec<u8> = (0..n).map(|_| self.rng.gen::<bool>() as u8).collect();
                let (x, y) = self.split_bits(&r);
                o1.extend(x);
                o2.extend(y);
                let ra: Vec<u64> = r.iter().map(|&b| b as u64).collect();
                let (x, y) = self.split_arith(&ra, l);
                o1.extend(x);
                o2.extend(y);
            }
            tags::CROSS_TERM => {
                let out = p[2];
                check_ring(out)?;
                let m = mask(out);
                let u: Vec<u64> = (0..n).map(|_| self.rng.next_u64() & m).collect();
                let v: Vec<u64> = (0..n).map(|_| self.rng.next_u64() & m).collect();
                let uv: Vec<u64> = u.iter().zip(&v).map(|(&a, &b)| a.wrapping_mul(b) & m).collect();
                let (w1, w2) = self.split_arith(&uv, out);
                put_u64s(&mut o1, &u);
                o1.extend(w1);
                put_u64s(&mut o2, &v);
                o2.extend(w2);
            }
            tags::MULT if p[0] == MULT_TRIPLE => {
                let k = p[1];
                check_ring(k)?;
                let m = mask(k);
                let a: Vec<u64> = (0..n).map(|_| self.rng.next_u64() & m).collect();
                let b: Vec<u64> = (0..n).map(|_| self.rng.next_u64() & m).collect();
                let c: Vec<u64> = a.iter().zip(&b).map(|(&x, &y)| x.wrapping_mul(y) & m).collect();
                for v in [a, b, c] {
                    let (x, y) = self.split_arith(&v, k);
                    o1.extend(x);
                    o2.extend(y);
                }
            }
            tags::MULT if p[0] == MULT_EXT_MASK => {
                let (m, k) = (p[1], p[2]);
                check_ring(m)?;
                check_ring(k)?;
                let r: Vec<u64> = (0..n).map(|_| self.rng.next_u64() & mask(m)).collect();
                let rb1: Vec<u64> = (0..n).map(|_| self.rng.next_u64() & mask(m)).collect();
                let rb2: Vec<u64> = r.iter().zip(&rb1).map(|(a, b)| a ^ b).collect();
                put_u64s(&mut o1, &rb1);
                put_u64s(&mut o2, &rb2);
                let (x, y) = self.split_arith(&r, k);
                o1.extend(x);
                o2.extend(y);
            }
            t => {
                return Err(Error::Contract(format!(
                    "block {t:#04x} has no correlated-randomness form"
                )))
            }
        }
        Ok((o1, o2))
    }
}

enum Out {
    Bits(Vec<u8>),
    Arith(Vec<u64>, u32),
}

fn check_ring(k: u32) -> Result<()> {
    if k == 0 || k > 64 {
        return Err(Error::Contract(format!("ring width {k} outside 1..=64")));
    }
    Ok(())
}

fn ring_vec(r: &mut Reader<'_>, n: usize, l: u32) -> Result<Vec<u64>> {
    let v = r.u64s(n)?;
    if v.iter().any(|x| x & !mask(l) != 0) {
        return Err(Error::Contract(format!("value outside Z_2^{l}")));
    }
    Ok(v)
}

fn reconstruct(r1: &mut Reader<'_>, r2: &mut Reader<'_>, n: usize, l: u32) -> Result<Vec<u64>> {
    let a = ring_vec(r1, n, l)?;
    let b = ring_vec(r2, n, l)?;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| x.wrapping_add(*y) & mask(l))
        .collect())
}

fn xor_bits(r1: &mut Reader<'_>, r2: &mut Reader<'_>, n: usize) -> Result<Vec<u8>> {
    let a = r1.bits(n)?;
    let b = r2.bits(n)?;
    Ok(a.iter().zip(&b).map(|(x, y)| x ^ y).collect())
}

/// Reads a dealt input vector (see [`Dealer::deal_inputs`]).
pub fn decode_inputs(msg: &[u8]) -> Result<(u32, Vec<u64>)> {
    if msg.len() < 8 || !(msg.len() - 8).is_multiple_of(8) {
        return Err(Error::Desync("malformed input message".into()));
    }
    let ring = u64::from_le_bytes(msg[..8].try_into().unwrap()) as u32;
    let mut r = Reader::new(&msg[8..]);
    let v = r.u64s((msg.len() - 8) / 8)?;
    Ok((ring, v))
}
