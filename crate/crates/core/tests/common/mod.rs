#![allow(dead_code)]

use nlact_core::blocks::{BackendKind, BlockConfig, Party};
use nlact_core::protocols::{run_with_shares, SessionSpec};
use nlact_core::sharing::{seeded_rng, ArithShares, BoolShares, PartyId};
use nlact_core::Result;
use rand::Rng;

pub fn config(backend: BackendKind) -> BlockConfig {
    BlockConfig {
        backend,
        ..Default::default()
    }
}

/// Runs `f` on both parties from the given input shares and returns each
/// side's output.
pub fn run2<T, F>(cfg: BlockConfig, seed: u64, ring: u32, s1: &[u64], s2: &[u64], f: F) -> (T, T)
where
    T: Send,
    F: Fn(&mut Party, &ArithShares) -> Result<T> + Sync,
{
    let spec = SessionSpec {
        blocks: cfg,
        seed,
        ..Default::default()
    };
    let r = run_with_shares(&spec, ring, s1, s2, f).expect("session");
    (r.p1, r.p2)
}

/// A random split of each value in `Z_{2^k}`.
pub fn split(values: &[u64], k: u32, seed: u64) -> (Vec<u64>, Vec<u64>) {
    let mut rng = seeded_rng(seed);
    let m = nlact_core::fixedpoint::mask(k);
    let a: Vec<u64> = values.iter().map(|_| rng.gen::<u64>() & m).collect();
    let b = values
        .iter()
        .zip(&a)
        .map(|(v, a)| v.wrapping_sub(*a) & m)
        .collect();
    (a, b)
}

/// A random XOR split of each bit.
pub fn split_bits(bits: &[u8], seed: u64) -> (Vec<u8>, Vec<u8>) {
    let mut rng = seeded_rng(seed);
    let a: Vec<u8> = bits.iter().map(|_| rng.gen::<bool>() as u8).collect();
    let b = bits.iter().zip(&a).map(|(x, y)| x ^ y).collect();
    (a, b)
}

pub fn pick<'a, T>(id: PartyId, a: &'a [T], b: &'a [T]) -> &'a [T] {
    if id.is_p1() {
        a
    } else {
        b
    }
}

pub fn bools(id: PartyId, a: &[u8], b: &[u8]) -> BoolShares {
    BoolShares::new(id, pick(id, a, b).to_vec()).unwrap()
}

pub fn add(a: &ArithShares, b: &ArithShares) -> Vec<u64> {
    nlact_core::sharing::reconst_batch(a, b).unwrap()
}

pub fn xor(a: &BoolShares, b: &BoolShares) -> Vec<u8> {
    nlact_core::sharing::reconst_bool_batch(a, b)
}
