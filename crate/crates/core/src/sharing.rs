//! Two-out-of-two additive and XOR secret sharing.
//!
//! Scalar types ([`ArithShare`], [`BoolShare`]) mirror the textbook
//! definitions; the vector types ([`ArithShares`], [`BoolShares`]) are what
//! the protocols operate on, one party's view of a batch of instances.

use rand::{CryptoRng, Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixedpoint::mask;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartyId {
    P1,
    P2,
}

impl PartyId {
    pub fn index(self) -> usize {
        match self {
            PartyId::P1 => 0,
            PartyId::P2 => 1,
        }
    }

    pub fn other(self) -> PartyId {
        match self {
            PartyId::P1 => PartyId::P2,
            PartyId::P2 => PartyId::P1,
        }
    }

    pub fn is_p1(self) -> bool {
        self == PartyId::P1
    }
}

/// Deterministic generator for tests and replayable runs.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Generator seeded from OS entropy.
pub fn entropy_rng() -> ChaCha20Rng {
    ChaCha20Rng::from_entropy()
}

fn check_width(k: u32) -> Result<()> {
    if k == 0 || k > 64 {
        return Err(Error::Config(format!("ring width {k} outside 1..=64")));
    }
    Ok(())
}

fn check_in_ring(x: u64, k: u32) -> Result<()> {
    if x & !mask(k) != 0 {
        return Err(Error::OutOfRing {
            value: x as u128,
            bits: k,
        });
    }
    Ok(())
}

/// One party's share of an element of `Z_{2^k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArithShare {
    raw: u64,
    k: u32,
    owner: PartyId,
}

impl ArithShare {
    pub fn new(raw: u64, k: u32, owner: PartyId) -> Result<Self> {
        check_width(k)?;
        check_in_ring(raw, k)?;
        Ok(ArithShare { raw, k, owner })
    }

    pub fn raw(&self) -> u64 {
        self.raw
    }

    pub fn ring(&self) -> u32 {
        self.k
    }

    pub fn owner(&self) -> PartyId {
        self.owner
    }
}

/// One party's XOR share of a bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoolShare {
    bit: u8,
    owner: PartyId,
}

impl BoolShare {
    pub fn new(bit: u8, owner: PartyId) -> Result<Self> {
        if bit > 1 {
            return Err(Error::Contract(format!("{bit} is not a bit")));
        }
        Ok(BoolShare { bit, owner })
    }

    pub fn bit(&self) -> u8 {
        self.bit
    }

    pub fn owner(&self) -> PartyId {
        self.owner
    }
}

pub fn share_arith<R: RngCore + CryptoRng>(
    x: u64,
    k: u32,
    rng: &mut R,
) -> Result<(ArithShare, ArithShare)> {
    check_width(k)?;
    let r = rng.next_u64() & mask(k);
    share_arith_with(x, k, r)
}

/// Sharing with a caller-chosen first share.
pub fn share_arith_with(x: u64, k: u32, share1: u64) -> Result<(ArithShare, ArithShare)> {
    check_width(k)?;
    check_in_ring(x, k)?;
    check_in_ring(share1, k)?;
    let s2 = x.wrapping_sub(share1) & mask(k);
    Ok((
        ArithShare {
            raw: share1,
            k,
            owner: PartyId::P1,
        },
        ArithShare {
            raw: s2,
            k,
            owner: PartyId::P2,
        },
    ))
}

pub fn reconst_arith(s1: ArithShare, s2: ArithShare) -> Result<u64> {
    if s1.k != s2.k {
        return Err(Error::RingMismatch {
            left: s1.k,
            right: s2.k,
        });
    }
    Ok(s1.raw.wrapping_add(s2.raw) & mask(s1.k))
}

/// 1 iff `r1 + r2 >= 2^k`.
pub fn wrap_oracle(r1: u64, r2: u64, k: u32) -> u8 {
    let sum = r1 as u128 + r2 as u128;
    (sum >> k != 0) as u8
}

pub fn share_bool<R: RngCore + CryptoRng>(b: u8, rng: &mut R) -> Result<(BoolShare, BoolShare)> {
    share_bool_with(b, rng.gen::<bool>() as u8)
}

pub fn share_bool_with(b: u8, share1: u8) -> Result<(BoolShare, BoolShare)> {
    let s1 = BoolShare::new(share1, PartyId::P1)?;
    BoolShare::new(b, PartyId::P1)?;
    Ok((s1, BoolShare::new(b ^ share1, PartyId::P2)?))
}

pub fn reconst_bool(s1: BoolShare, s2: BoolShare) -> u8 {
    s1.bit ^ s2.bit
}

/// `sum coeff_i * share_i + const`, with the constant absorbed by P1 only.
pub fn local_affine(
    coeffs: &[u64],
    shares: &[ArithShare],
    constant: u64,
    owner: PartyId,
) -> Result<ArithShare> {
    if coeffs.len() != shares.len() || shares.is_empty() {
        return Err(Error::Contract(
            "coefficient and share lists must be non-empty and of equal length".into(),
        ));
    }
    let k = shares[0].k;
    let mut acc = 0u64;
    for (c, s) in coeffs.iter().zip(shares) {
        if s.k != k {
            return Err(Error::RingMismatch { left: k, right: s.k });
        }
        acc = acc.wrapping_add(c.wrapping_mul(s.raw));
    }
    if owner.is_p1() {
        acc = acc.wrapping_add(constant);
    }
    Ok(ArithShare {
        raw: acc & mask(k),
        k,
        owner,
    })
}

/// Re-reads a share in a wider ring without touching it.
///
/// Only sound when the caller knows the shares do not wrap; that contract is
/// the caller's to document.
pub fn ring_lift(share: ArithShare, k_new: u32) -> Result<ArithShare> {
    check_width(k_new)?;
    if k_new < share.k {
        return Err(Error::Contract(format!(
            "ring_lift cannot narrow {} -> {k_new}",
            share.k
        )));
    }
    Ok(ArithShare { k: k_new, ..share })
}

/// One party's shares of a batch of ring elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArithShares {
    pub ring: u32,
    pub owner: PartyId,
    pub raw: Vec<u64>,
}

impl ArithShares {
    pub fn new(ring: u32, owner: PartyId, raw: Vec<u64>) -> Result<Self> {
        check_width(ring)?;
        if let Some(&bad) = raw.iter().find(|&&v| v & !mask(ring) != 0) {
            return Err(Error::OutOfRing {
                value: bad as u128,
                bits: ring,
            });
        }
        Ok(ArithShares { ring, owner, raw })
    }

    /// Trusted constructor for values already reduced.
    pub(crate) fn from_raw(ring: u32, owner: PartyId, raw: Vec<u64>) -> Self {
        debug_assert!(raw.iter().all(|v| v & !mask(ring) == 0));
        ArithShares { ring, owner, raw }
    }

    pub fn zeros(ring: u32, owner: PartyId, n: usize) -> Self {
        ArithShares {
            ring,
            owner,
            raw: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn mask(&self) -> u64 {
        mask(self.ring)
    }

    pub fn get(&self, i: usize) -> ArithShare {
        ArithShare {
            raw: self.raw[i],
            k: self.ring,
            owner: self.owner,
        }
    }

    fn zip_with(&self, o: &ArithShares, f: impl Fn(u64, u64) -> u64) -> Result<ArithShares> {
        if self.ring != o.ring {
            return Err(Error::RingMismatch {
                left: self.ring,
                right: o.ring,
            });
        }
        if self.len() != o.len() {
            return Err(Error::Contract(format!(
                "batch length {} vs {}",
                self.len(),
                o.len()
            )));
        }
        let m = self.mask();
        Ok(ArithShares::from_raw(
            self.ring,
            self.owner,
            self.raw
                .iter()
                .zip(&o.raw)
                .map(|(&a, &b)| f(a, b) & m)
                .collect(),
        ))
    }

    pub fn add(&self, o: &ArithShares) -> Result<ArithShares> {
        self.zip_with(o, u64::wrapping_add)
    }

    pub fn sub(&self, o: &ArithShares) -> Result<ArithShares> {
        self.zip_with(o, u64::wrapping_sub)
    }

    pub fn neg(&self) -> ArithShares {
        self.map(|v| v.wrapping_neg())
    }

    pub fn scale(&self, c: u64) -> ArithShares {
        self.map(|v| v.wrapping_mul(c))
    }

    /// Adds a public constant (P1's share absorbs it).
    pub fn add_public(&self, c: u64) -> ArithShares {
        if self.owner.is_p1() {
            self.map(|v| v.wrapping_add(c))
        } else {
            self.clone()
        }
    }

    /// Adds a public per-element vector (P1's share absorbs it).
    pub fn add_public_vec(&self, c: &[u64]) -> ArithShares {
        if self.owner.is_p1() {
            let m = self.mask();
            ArithShares::from_raw(
                self.ring,
                self.owner,
                self.raw
                    .iter()
                    .zip(c)
                    .map(|(&v, &c)| v.wrapping_add(c) & m)
                    .collect(),
            )
        } else {
            self.clone()
        }
    }

    pub fn map(&self, f: impl Fn(u64) -> u64) -> ArithShares {
        let m = self.mask();
        ArithShares::from_raw(
            self.ring,
            self.owner,
            self.raw.iter().map(|&v| f(v) & m).collect(),
        )
    }

    /// Local reduction to a narrower ring; always sound for additive shares.
    pub fn reduce(&self, k_new: u32) -> Result<ArithShares> {
        check_width(k_new)?;
        if k_new > self.ring {
            return Err(Error::Contract(format!(
                "reduce cannot widen {} -> {k_new}",
                self.ring
            )));
        }
        let m = mask(k_new);
        Ok(ArithShares::from_raw(
            k_new,
            self.owner,
            self.raw.iter().map(|v| v & m).collect(),
        ))
    }

    /// Batch form of [`ring_lift`]: same raw values, wider ring.
    pub fn lift(&self, k_new: u32) -> Result<ArithShares> {
        check_width(k_new)?;
        if k_new < self.ring {
            return Err(Error::Contract(format!(
                "ring_lift cannot narrow {} -> {k_new}",
                self.ring
            )));
        }
        Ok(ArithShares {
            ring: k_new,
            ..self.clone()
        })
    }

    /// Multiplies by `2^k` while growing the ring by `k` bits.
    ///
    /// `x1 + x2 = x + w*2^l` becomes `2^k x1 + 2^k x2 = 2^k x + w*2^(l+k)`,
    /// so the product is exact in the wider ring regardless of the wrap.
    pub fn shl_widen(&self, k: u32) -> Result<ArithShares> {
        let ring = self.ring + k;
        check_width(ring)?;
        Ok(ArithShares::from_raw(
            ring,
            self.owner,
            self.raw.iter().map(|&v| v << k).collect(),
        ))
    }
}

/// One party's XOR shares of a batch of bits (one byte per bit).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolShares {
    pub owner: PartyId,
    pub bits: Vec<u8>,
}

impl BoolShares {
    pub fn new(owner: PartyId, bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Contract(format!("{b} is not a bit")));
        }
        Ok(BoolShares { owner, bits })
    }

    /// A public bit vector: P1 holds it, P2 holds zeros.
    pub fn public(owner: PartyId, bits: &[u8]) -> Self {
        BoolShares {
            owner,
            bits: if owner.is_p1() {
                bits.to_vec()
            } else {
                vec![0; bits.len()]
            },
        }
    }

    /// Shares of a constant bit laid out as `(c1, c2)`, `c1 ^ c2` the value.
    pub fn constant(owner: PartyId, n: usize, c1: u8, c2: u8) -> Self {
        let b = if owner.is_p1() { c1 } else { c2 };
        BoolShares {
            owner,
            bits: vec![b & 1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn xor(&self, o: &BoolShares) -> Result<BoolShares> {
        if self.len() != o.len() {
            return Err(Error::Contract(format!(
                "batch length {} vs {}",
                self.len(),
                o.len()
            )));
        }
        Ok(BoolShares {
            owner: self.owner,
            bits: self.bits.iter().zip(&o.bits).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// Flips the shared bit (P1 flips its share).
    pub fn not(&self) -> BoolShares {
        if self.owner.is_p1() {
            BoolShares {
                owner: self.owner,
                bits: self.bits.iter().map(|b| b ^ 1).collect(),
            }
        } else {
            self.clone()
        }
    }

    pub fn get(&self, i: usize) -> BoolShare {
        BoolShare {
            bit: self.bits[i],
            owner: self.owner,
        }
    }
}

/// Splits a batch of plaintext values into both parties' share vectors.
pub fn share_batch<R: RngCore + CryptoRng>(
    values: &[u64],
    ring: u32,
    rng: &mut R,
) -> Result<(ArithShares, ArithShares)> {
    check_width(ring)?;
    let m = mask(ring);
    let mut a = Vec::with_capacity(values.len());
    let mut b = Vec::with_capacity(values.len());
    for &v in values {
        check_in_ring(v, ring)?;
        let r = rng.next_u64() & m;
        a.push(r);
        b.push(v.wrapping_sub(r) & m);
    }
    Ok((
        ArithShares::from_raw(ring, PartyId::P1, a),
        ArithShares::from_raw(ring, PartyId::P2, b),
    ))
}

pub fn reconst_batch(a: &ArithShares, b: &ArithShares) -> Result<Vec<u64>> {
    if a.ring != b.ring {
        return Err(Error::RingMismatch {
            left: a.ring,
            right: b.ring,
        });
    }
    if a.len() != b.len() {
        return Err(Error::Contract("batch length mismatch".into()));
    }
    let m = a.mask();
    Ok(a.raw
        .iter()
        .zip(&b.raw)
        .map(|(x, y)| x.wrapping_add(*y) & m)
        .collect())
}

pub fn share_bool_batch<R: RngCore + CryptoRng>(
    bits: &[u8],
    rng: &mut R,
) -> Result<(BoolShares, BoolShares)> {
    let mut a = Vec::with_capacity(bits.len());
    let mut b = Vec::with_capacity(bits.len());
    for &v in bits {
        if v > 1 {
            return Err(Error::Contract(format!("{v} is not a bit")));
        }
        let r = rng.gen::<bool>() as u8;
        a.push(r);
        b.push(v ^ r);
    }
    Ok((
        BoolShares {
            owner: PartyId::P1,
            bits: a,
        },
        BoolShares {
            owner: PartyId::P2,
            bits: b,
        },
    ))
}

pub fn reconst_bool_batch(a: &BoolShares, b: &BoolShares) -> Vec<u8> {
    a.bits.iter().zip(&b.bits).map(|(x, y)| x ^ y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::{msb, sfp};

    #[test]
    fn share_examples() {
        let (a, b) = share_arith_with(0, 4, 7).unwrap();
        assert_eq!((a.raw(), b.raw()), (7, 9));
        let (_, b) = share_arith_with(12, 8, 12).unwrap();
        assert_eq!(b.raw(), 0);
        let mut rng = seeded_rng(1);
        assert!(share_arith(70000, 16, &mut rng).is_err());
        assert!(share_arith(1, 65, &mut rng).is_err());
    }

    #[test]
    fn reconst_examples() {
        let a = ArithShare::new(40000, 16, PartyId::P1).unwrap();
        let b = ArithShare::new(30000, 16, PartyId::P2).unwrap();
        assert_eq!(reconst_arith(a, b).unwrap(), 4464);
        let z = ArithShare::new(0, 16, PartyId::P1).unwrap();
        assert_eq!(reconst_arith(z, z).unwrap(), 0);
        let c = ArithShare::new(1, 32, PartyId::P2).unwrap();
        assert!(matches!(
            reconst_arith(a, c),
            Err(Error::RingMismatch { .. })
        ));
    }

    #[test]
    fn random_round_trip() {
        let mut rng = seeded_rng(7);
        for k in [1u32, 8, 16, 33, 64] {
            for _ in 0..1000 {
                let x = rng.next_u64() & mask(k);
                let (a, b) = share_arith(x, k, &mut rng).unwrap();
                assert_eq!(reconst_arith(a, b).unwrap(), x);
            }
        }
        for _ in 0..100 {
            let bit = rng.gen::<bool>() as u8;
            let (a, b) = share_bool(bit, &mut rng).unwrap();
            assert_eq!(reconst_bool(a, b), bit);
        }
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_oracle(40000, 30000, 16), 1);
        assert_eq!(wrap_oracle(1, 1, 16), 0);
        assert_eq!(wrap_oracle(65535, 1, 16), 1);
        assert_eq!(wrap_oracle(u64::MAX, 1, 64), 1);
    }

    #[test]
    fn bool_examples() {
        let (a, b) = share_bool_with(1, 1).unwrap();
        assert_eq!(b.bit(), 0);
        assert_eq!(reconst_bool(a, b), 1);
        let (_, b) = share_bool_with(0, 1).unwrap();
        assert_eq!(b.bit(), 1);
        let one = BoolShare::new(1, PartyId::P1).unwrap();
        assert_eq!(reconst_bool(one, one), 0);
        assert!(share_bool_with(2, 0).is_err());
    }

    #[test]
    fn affine_examples() {
        let x1 = ArithShare::new(5, 16, PartyId::P1).unwrap();
        assert_eq!(local_affine(&[2], &[x1], 1, PartyId::P1).unwrap().raw(), 11);
        let x2 = ArithShare::new(9, 16, PartyId::P2).unwrap();
        assert_eq!(local_affine(&[2], &[x2], 1, PartyId::P2).unwrap().raw(), 18);
        let w = ArithShare::new(9, 32, PartyId::P2).unwrap();
        assert!(local_affine(&[1, 1], &[x2, w], 0, PartyId::P2).is_err());
    }

    #[test]
    fn affine_is_linear() {
        let mut rng = seeded_rng(11);
        for k in [16u32, 32, 64] {
            for _ in 0..10_000 {
                let x = rng.next_u64() & mask(k);
                let y = rng.next_u64() & mask(k);
                let (c0, c1, c) = (rng.next_u64(), rng.next_u64(), rng.next_u64());
                let (x1, x2) = share_arith(x, k, &mut rng).unwrap();
                let (y1, y2) = share_arith(y, k, &mut rng).unwrap();
                let z1 = local_affine(&[c0, c1], &[x1, y1], c, PartyId::P1).unwrap();
                let z2 = local_affine(&[c0, c1], &[x2, y2], c, PartyId::P2).unwrap();
                let want = c0
                    .wrapping_mul(x)
                    .wrapping_add(c1.wrapping_mul(y))
                    .wrapping_add(c)
                    & mask(k);
                assert_eq!(reconst_arith(z1, z2).unwrap(), want);
            }
        }
    }

    #[test]
    fn lift_examples() {
        let s = ArithShare::new(10, 16, PartyId::P1).unwrap();
        let w = ring_lift(s, 32).unwrap();
        assert_eq!((w.raw(), w.ring()), (10, 32));
        let z = ArithShare::new(0, 8, PartyId::P2).unwrap();
        assert_eq!(ring_lift(z, 64).unwrap().raw(), 0);
        let n = ArithShare::new(10, 32, PartyId::P1).unwrap();
        assert!(ring_lift(n, 16).is_err());
    }

    #[test]
    fn wrap_msb_reconst_consistency_exhaustive() {
        let k = 8;
        for r1 in 0..256u64 {
            for r2 in 0..256u64 {
                let x = (r1 + r2) & mask(k);
                let w = wrap_oracle(r1, r2, k) as i64;
                assert_eq!(r1 as i64 + r2 as i64 - (w << k), x as i64);
                // signed reading: subtract one more modulus when the sign bit is set
                let m = msb(x, k) as i64;
                assert_eq!(r1 as i64 + r2 as i64 - ((w + m) << k), sfp(x, k));
            }
        }
    }

    #[test]
    fn batch_ops_reconstruct() {
        let mut rng = seeded_rng(3);
        let xs: Vec<u64> = (0..500).map(|_| rng.next_u64() & 0xffff).collect();
        let ys: Vec<u64> = (0..500).map(|_| rng.next_u64() & 0xffff).collect();
        let (x1, x2) = share_batch(&xs, 16, &mut rng).unwrap();
        let (y1, y2) = share_batch(&ys, 16, &mut rng).unwrap();
        let d1 = x1.sub(&y1).unwrap().scale(3).add_public(5);
        let d2 = x2.sub(&y2).unwrap().scale(3).add_public(5);
        let got = reconst_batch(&d1, &d2).unwrap();
        for i in 0..xs.len() {
            assert_eq!(got[i], (xs[i].wrapping_sub(ys[i]).wrapping_mul(3) + 5) & 0xffff);
        }
        let r = reconst_batch(&x1.reduce(8).unwrap(), &x2.reduce(8).unwrap()).unwrap();
        assert!(r.iter().zip(&xs).all(|(a, b)| *a == b & 0xff));
        let w = reconst_batch(&x1.shl_widen(5).unwrap(), &x2.shl_widen(5).unwrap()).unwrap();
        assert!(w.iter().zip(&xs).all(|(a, b)| *a == b << 5));
        assert!(x1.add(&x1.reduce(8).unwrap()).is_err());
    }
}
