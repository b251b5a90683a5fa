mod common;

use common::*;
use nlact_core::blocks::reciprocal::rec_cost;
use nlact_core::blocks::{BackendKind, BlockConfig, BlockKind, CostModel, RecMode};
use nlact_core::fixedpoint::{mask, msb};
use nlact_core::sharing::{seeded_rng, wrap_oracle, ArithShares};
use nlact_core::Error;
use rand::Rng;

const BOTH: [BackendKind; 2] = [BackendKind::Ideal, BackendKind::Beaver];

#[test]
fn msb_exhaustive_l8_all_splits() {
    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    for x in 0..256u64 {
        for a in 0..256u64 {
            s1.push(a);
            s2.push(x.wrapping_sub(a) & 0xff);
        }
    }
    let (o1, o2) = run2(config(BackendKind::Ideal), 1, 8, &s1, &s2, |p, x| p.msb(x));
    let got = xor(&o1, &o2);
    for (i, g) in got.iter().enumerate() {
        let x = (i / 256) as u64;
        assert_eq!(*g, msb(x, 8) as u8, "x={x}");
    }
}

#[test]
fn msb_examples() {
    let (a, b) = split(&[61440, 0, 32768, 32767], 16, 3);
    let (o1, o2) = run2(config(BackendKind::Ideal), 1, 16, &a, &b, |p, x| p.msb(x));
    assert_eq!(xor(&o1, &o2), vec![1, 0, 1, 0]);
}

#[test]
fn msb_to_wrap_exhaustive_l8_all_share_pairs() {
    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    let mut m = Vec::new();
    for a in 0..256u64 {
        for b in 0..256u64 {
            s1.push(a);
            s2.push(b);
            m.push(msb((a + b) & 0xff, 8) as u8);
        }
    }
    let (m1, m2) = split_bits(&m, 5);
    let (o1, o2) = run2(config(BackendKind::Ideal), 2, 8, &s1, &s2, |p, x| {
        p.msb_to_wrap(x, &bools(p.id(), &m1, &m2))
    });
    let got = xor(&o1, &o2);
    for i in 0..s1.len() {
        assert_eq!(got[i], wrap_oracle(s1[i], s2[i], 8), "{} {}", s1[i], s2[i]);
    }
}

#[test]
fn msb_to_wrap_examples() {
    // shares (40000, 30000) at k=16 wrap; (1, 2) do not
    let (o1, o2) = run2(config(BackendKind::Ideal), 1, 16, &[40000, 1], &[30000, 2], |p, x| {
        let m = vec![0u8, 0];
        p.msb_to_wrap(x, &bools(p.id(), &m, &m))
    });
    assert_eq!(xor(&o1, &o2), vec![1, 0]);
}

#[test]
fn msb_to_wrap_rejects_inconsistent_msb() {
    let spec = nlact_core::protocols::SessionSpec::default();
    let r = nlact_core::protocols::run_with_shares(&spec, 8, &[200], &[0], |p, x| {
        // msb(200) = 1 but both shares claim 0
        p.msb_to_wrap(x, &bools(p.id(), &[0], &[0]))
    });
    assert!(matches!(r, Err(Error::Contract(_))), "{r:?}");
}

#[test]
fn truncate_exhaustive_l10() {
    for t in 1..10u32 {
        let xs: Vec<u64> = (0..1024u64).flat_map(|x| std::iter::repeat_n(x, 8)).collect();
        let (a, b) = split(&xs, 10, t as u64);
        let (o1, o2) = run2(config(BackendKind::Ideal), t as u64, 10, &a, &b, |p, x| {
            p.truncate(x, t)
        });
        assert_eq!(o1.ring, 10 - t);
        let got = add(&o1, &o2);
        for (x, g) in xs.iter().zip(&got) {
            assert_eq!(*g, x >> t, "x={x} t={t}");
        }
    }
}

#[test]
fn truncate_examples_and_errors() {
    let (a, b) = split(&[4096, 15], 32, 1);
    let (o1, o2) = run2(config(BackendKind::Ideal), 1, 32, &a, &b, |p, x| p.truncate(x, 4));
    assert_eq!(add(&o1, &o2), vec![256, 0]);
    let spec = nlact_core::protocols::SessionSpec::default();
    let r = nlact_core::protocols::run_with_shares(&spec, 8, &[1], &[2], |p, x| p.truncate(x, 8));
    assert!(matches!(r, Err(Error::Contract(_))));
}

#[test]
fn mux_examples_both_backends() {
    for be in BOTH {
        let (a, b) = split(&[5, 5], 16, 9);
        let (c1, c2) = split_bits(&[1, 0], 9);
        let (o1, o2) = run2(config(be), 4, 16, &a, &b, |p, x| p.mux(x, &bools(p.id(), &c1, &c2)));
        assert_eq!(add(&o1, &o2), vec![5, 0], "{be:?}");
    }
}

#[test]
fn mux_random_matches_plaintext() {
    for k in [16u32, 32, 64] {
        for be in BOTH {
            let mut rng = seeded_rng(k as u64);
            let xs: Vec<u64> = (0..10_000).map(|_| rng.gen::<u64>() & mask(k)).collect();
            let bs: Vec<u8> = (0..10_000).map(|_| rng.gen::<bool>() as u8).collect();
            let (a, b) = split(&xs, k, 11);
            let (c1, c2) = split_bits(&bs, 12);
            let (o1, o2) = run2(config(be), 13, k, &a, &b, |p, x| {
                p.mux(x, &bools(p.id(), &c1, &c2))
            });
            let got = add(&o1, &o2);
            for i in 0..xs.len() {
                assert_eq!(got[i], if bs[i] == 1 { xs[i] } else { 0 });
            }
        }
    }
}

#[test]
fn and_truth_table_all_sharings() {
    for be in BOTH {
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut x1 = Vec::new();
        let mut y1 = Vec::new();
        for xv in 0..2u8 {
            for yv in 0..2u8 {
                for xs in 0..2u8 {
                    for ys in 0..2u8 {
                        x.push(xv);
                        y.push(yv);
                        x1.push(xs);
                        y1.push(ys);
                    }
                }
            }
        }
        let x2: Vec<u8> = x.iter().zip(&x1).map(|(a, b)| a ^ b).collect();
        let y2: Vec<u8> = y.iter().zip(&y1).map(|(a, b)| a ^ b).collect();
        let n = x.len();
        let (o1, o2) = run2(config(be), 3, 8, &vec![0; n], &vec![0; n], |p, _| {
            p.and(&bools(p.id(), &x1, &x2), &bools(p.id(), &y1, &y2))
        });
        let got = xor(&o1, &o2);
        for i in 0..n {
            assert_eq!(got[i], x[i] & y[i], "{be:?}");
        }
    }
}

#[test]
fn b2a_both_sharings() {
    for be in BOTH {
        for k in [16u32, 64] {
            let bits = [0u8, 0, 1, 1];
            let s1 = [0u8, 1, 0, 1];
            let s2: Vec<u8> = bits.iter().zip(&s1).map(|(a, b)| a ^ b).collect();
            let (o1, o2) = run2(config(be), 8, k, &[0; 4], &[0; 4], |p, _| {
                p.b2a(&bools(p.id(), &s1, &s2), k)
            });
            assert_eq!(o1.ring, k);
            assert_eq!(add(&o1, &o2), vec![0, 0, 1, 1], "{be:?} k={k}");
        }
    }
}

#[test]
fn cross_term_examples() {
    for be in BOTH {
        let (o1, o2) = run2(config(be), 1, 8, &[3, 0], &[4, 9], |p, x| {
            p.cross_term_exact(&x.raw, 8, 8)
        });
        assert_eq!(o1.ring, 16);
        assert_eq!(add(&o1, &o2), vec![12, 0]);
    }
}

#[test]
fn cross_term_random_against_wide_product() {
    for (m, n) in [(44u32, 20u32), (32, 32)] {
        for be in BOTH {
            let mut rng = seeded_rng((m * 100 + n) as u64);
            let a1: Vec<u64> = (0..10_000).map(|_| rng.gen::<u64>() & mask(m)).collect();
            let a2: Vec<u64> = (0..10_000).map(|_| rng.gen::<u64>() & mask(n)).collect();
            let (o1, o2) = run2(config(be), 2, 64, &a1, &a2, |p, x| {
                p.cross_term_exact(&x.raw, m, n)
            });
            let got = add(&o1, &o2);
            for i in 0..a1.len() {
                let want = (a1[i] as u128 * a2[i] as u128) & mask(m + n) as u128;
                assert_eq!(got[i] as u128, want);
            }
        }
    }
}

#[test]
fn cross_term_rejects_oversized_output() {
    let spec = nlact_core::protocols::SessionSpec::default();
    let r = nlact_core::protocols::run_with_shares(&spec, 8, &[1], &[1], |p, x| {
        p.cross_term_exact(&x.raw, 40, 40)
    });
    assert!(matches!(r, Err(Error::Contract(_))));
}

fn mult_case(be: BackendKind, m: u32, n: u32, count: usize, seed: u64) -> Vec<(u64, u64, u64)> {
    let mut rng = seeded_rng(seed);
    let xs: Vec<u64> = (0..count).map(|_| rng.gen::<u64>() & mask(m)).collect();
    let ys: Vec<u64> = (0..count).map(|_| rng.gen::<u64>() & mask(n)).collect();
    // both operands ride in one input vector of width max(m, n)
    let k = m.max(n);
    let mut both = xs.clone();
    both.extend(&ys);
    let (a, b) = split(&both, k, seed + 1);
    let (o1, o2) = run2(config(be), seed, k, &a, &b, |p, v| {
        let x = ArithShares::new(m, p.id(), v.raw[..count].iter().map(|r| r & mask(m)).collect())?;
        let y = ArithShares::new(n, p.id(), v.raw[count..].iter().map(|r| r & mask(n)).collect())?;
        p.mult(&x, &y)
    });
    let got = add(&o1, &o2);
    (0..count).map(|i| (xs[i], ys[i], got[i])).collect()
}

#[test]
fn mult_random_against_wide_product() {
    for (m, n) in [(44u32, 20u32), (32, 32), (1, 7), (16, 16)] {
        for be in BOTH {
            for (x, y, z) in mult_case(be, m, n, 10_000, (m * n) as u64) {
                assert_eq!(z as u128, (x as u128 * y as u128) & mask(m + n) as u128, "{be:?} {m}x{n}");
            }
        }
    }
}

#[test]
fn mult_examples() {
    for be in BOTH {
        let (o1, o2) = run2(config(be), 1, 8, &[1, 0], &[0, 0], |p, x| {
            let seven = ArithShares::new(8, p.id(), vec![if p.id().is_p1() { 7 } else { 0 }; 2])?;
            p.mult(x, &seven)
        });
        assert_eq!(add(&o1, &o2), vec![7, 0]);
    }
}

#[test]
fn backend_equivalence_on_ten_thousand_cases() {
    // AND and Mux and the products are exact, so the reconstructions agree
    let n = 10_000usize;
    let mut rng = seeded_rng(77);
    let xs: Vec<u64> = (0..n).map(|_| rng.gen::<u64>() & mask(32)).collect();
    let ys: Vec<u64> = (0..n).map(|_| rng.gen::<u64>() & mask(32)).collect();
    let bs: Vec<u8> = (0..n).map(|_| rng.gen::<bool>() as u8).collect();
    let cs: Vec<u8> = (0..n).map(|_| rng.gen::<bool>() as u8).collect();
    let mut both = xs.clone();
    both.extend(&ys);
    let (a, b) = split(&both, 32, 78);
    let (b1, b2) = split_bits(&bs, 79);
    let (c1, c2) = split_bits(&cs, 80);
    let run = |be: BackendKind| {
        let (o1, o2) = run2(config(be), 81, 32, &a, &b, |p, v| {
            let x = ArithShares::new(32, p.id(), v.raw[..n].to_vec())?;
            let y = ArithShares::new(32, p.id(), v.raw[n..].to_vec())?;
            let and = p.and(&bools(p.id(), &b1, &b2), &bools(p.id(), &c1, &c2))?;
            let mux = p.mux(&x, &bools(p.id(), &b1, &b2))?;
            let mult = p.mult(&x, &y)?;
            let ct = p.cross_term_exact(&x.raw, 32, 32)?;
            Ok((and, mux, mult, ct))
        });
        (
            xor(&o1.0, &o2.0),
            add(&o1.1, &o2.1),
            add(&o1.2, &o2.2),
            add(&o1.3, &o2.3),
        )
    };
    let ideal = run(BackendKind::Ideal);
    let beaver = run(BackendKind::Beaver);
    assert_eq!(ideal.0, beaver.0, "AND");
    assert_eq!(ideal.1, beaver.1, "Mux");
    assert_eq!(ideal.2, beaver.2, "Mult");
    assert_eq!(ideal.3, beaver.3, "CrossTerm");
}

#[test]
fn beaver_peer_traffic_only_under_beaver() {
    let (a, b) = split(&[1, 2, 3], 16, 1);
    for be in BOTH {
        let spec = nlact_core::protocols::SessionSpec {
            blocks: config(be),
            ..Default::default()
        };
        let r = nlact_core::protocols::run_with_shares(&spec, 16, &a, &b, |p, x| {
            let m = vec![1u8; 3];
            p.mux(x, &bools(p.id(), &m, &[0; 3]))
        })
        .unwrap();
        let peer = r.outcome_p1.peer.bytes_sent;
        match be {
            BackendKind::Ideal => assert_eq!(peer, 0),
            BackendKind::Beaver => assert!(peer > 0),
        }
    }
}

fn rec_run(mode: RecMode, be: BackendKind, s: u32, vs: &[u64]) -> Vec<u64> {
    let cfg = BlockConfig {
        backend: be,
        rec: mode,
        ..Default::default()
    };
    let (a, b) = split(vs, s + 2, 5);
    let (o1, o2) = run2(cfg, 6, s + 2, &a, &b, |p, x| p.rec(x, s, s + 2));
    add(&o1, &o2)
}

#[test]
fn rec_examples() {
    for mode in [RecMode::Ideal, RecMode::Iterative] {
        let got = rec_run(mode, BackendKind::Ideal, 12, &[4096, 6144, 8192]);
        assert!(got[0].abs_diff(4096) <= if mode == RecMode::Ideal { 0 } else { 2 });
        assert!(got[1].abs_diff(2731) <= 2, "{mode:?}: {}", got[1]);
        assert!(got[2].abs_diff(2048) <= 2);
    }
    assert_eq!(rec_run(RecMode::Ideal, BackendKind::Ideal, 12, &[6144]), vec![2731]);
}

#[test]
fn rec_iterative_within_two_ulp_of_ideal_at_s12() {
    let vs: Vec<u64> = (4096..8192).collect();
    let ideal = rec_run(RecMode::Ideal, BackendKind::Ideal, 12, &vs);
    let iter = rec_run(RecMode::Iterative, BackendKind::Ideal, 12, &vs);
    let worst = ideal.iter().zip(&iter).map(|(a, b)| a.abs_diff(*b)).max().unwrap();
    assert!(worst <= 2, "worst {worst}");
}

#[test]
fn rec_iterative_beaver_matches_ideal_backend() {
    let vs: Vec<u64> = (4096..8192).step_by(7).collect();
    let a = rec_run(RecMode::Iterative, BackendKind::Ideal, 12, &vs);
    let b = rec_run(RecMode::Iterative, BackendKind::Beaver, 12, &vs);
    assert_eq!(a, b);
}

#[test]
fn rec_rejects_out_of_range_in_debug() {
    if !cfg!(debug_assertions) {
        return;
    }
    let spec = nlact_core::protocols::SessionSpec::default();
    let r = nlact_core::protocols::run_with_shares(&spec, 14, &[100], &[0], |p, x| p.rec(x, 12, 14));
    assert!(matches!(r, Err(Error::Contract(_))), "{r:?}");
}

#[test]
fn ledger_bits_equal_formula_sum() {
    let c = CostModel::default();
    let (a, b) = split(&[1, 2, 3, 4], 16, 1);
    let spec = nlact_core::protocols::SessionSpec::default();
    let r = nlact_core::protocols::run_with_shares(&spec, 16, &a, &b, |p, x| {
        let m = p.msb(x)?;
        let w = p.msb_to_wrap(x, &m)?;
        let _ = p.and(&m, &w)?;
        let _ = p.mux(x, &m)?;
        let _ = p.b2a(&m, 16)?;
        let _ = p.truncate(x, 12)?;
        let _ = p.mult(x, x)?;
        let _ = p.cross_term_exact(&x.raw.iter().map(|v| v & 0xff).collect::<Vec<_>>(), 8, 8)?;
        Ok(())
    })
    .unwrap();
    let l = r.outcome_p1.ledger.clone();
    let per = c.msb(16) + c.msb_to_wrap() + c.and() + c.mux(16) + c.b2a(16)
        + c.truncate(16, 12) + c.mult(16, 16) + c.cross_term(8, 8);
    assert_eq!(l.bits_sent, 4 * per);
    assert_eq!(c.msb(16), 2272);
    // msb charges two rounds, the others one
    assert_eq!(l.rounds, 2 + 7);
    assert_eq!(l.messages, 2 * l.rounds);
    for k in [BlockKind::Msb, BlockKind::MsbToWrap, BlockKind::And, BlockKind::Mux] {
        assert_eq!(l.count(k), 4);
    }
    assert_eq!(r.outcome_p1.ledger, r.outcome_p2.ledger);
}

#[test]
fn ideal_rec_charges_the_iterative_composition() {
    let c = CostModel::default();
    let vs = [4096u64, 5000];
    let run = |mode| {
        let cfg = BlockConfig {
            rec: mode,
            ..Default::default()
        };
        let (a, b) = split(&vs, 14, 1);
        let spec = nlact_core::protocols::SessionSpec {
            blocks: cfg,
            ..Default::default()
        };
        nlact_core::protocols::run_with_shares(&spec, 14, &a, &b, |p, x| p.rec(x, 12, 14))
            .unwrap()
            .outcome_p1
            .ledger
    };
    let ideal = run(RecMode::Ideal);
    let iter = run(RecMode::Iterative);
    assert_eq!(ideal.bits_sent, 2 * rec_cost(&c, 12));
    assert_eq!(iter.bits_sent, ideal.bits_sent);
    assert_eq!(ideal.count(BlockKind::Rec), 2);
    assert_eq!(iter.count(BlockKind::Rec), 2);
    assert_eq!(iter.count(BlockKind::Mult), 0);
    assert!(iter.primitive["Mult"] > 0);
}

#[test]
fn output_shares_are_fresh() {
    // one fixed value through Mux many times: P1's share covers Z_256
    // roughly uniformly while every reconstruction stays put
    let n = 25_600usize;
    let xs = vec![77u64; n];
    let (a, b) = split(&xs, 8, 1);
    let ones = vec![1u8; n];
    let zeros = vec![0u8; n];
    let mut seen_first = Vec::new();
    for seed in [1u64, 2] {
        for be in BOTH {
            let (o1, o2) = run2(config(be), seed, 8, &a, &b, |p, x| {
                p.mux(x, &bools(p.id(), &ones, &zeros))
            });
            assert!(add(&o1, &o2).iter().all(|&v| v == 77));
            let mut hist = [0u32; 256];
            for &v in &o1.raw {
                hist[v as usize] += 1;
            }
            let expect = n as f64 / 256.0;
            let chi2: f64 = hist
                .iter()
                .map(|&h| (h as f64 - expect).powi(2) / expect)
                .sum();
            // 255 degrees of freedom; 350 is beyond p = 1e-4
            assert!(chi2 < 350.0, "{be:?} seed {seed}: chi2 {chi2}");
            assert!(hist.iter().all(|&h| h > 0));
            seen_first.push(o1.raw[0]);
        }
    }
    assert!(seen_first.windows(2).any(|w| w[0] != w[1]));
}
