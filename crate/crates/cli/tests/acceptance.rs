//! Acceptance suite: one PASS/FAIL line per criterion, expectations read from
//! `data/expected.json`. Exits nonzero when any criterion fails.

use std::collections::BTreeMap;
use std::time::Instant;

use nlact_cli::config::RunConfig;
use nlact_cli::expected::Expected;
use nlact_cli::rnn_cell::{self, CellShape};
use nlact_cli::sweep::{sweep, sweep_sprime};
use nlact_core::blocks::{BackendKind, BlockConfig, CostModel, RecMode};
use nlact_core::protocols::{
    evaluate, local, model_bits, negx, run_protocol, run_with_shares, sirnn_bits, Function,
    ProtocolParams, SessionSpec, SirnnExpn,
};
use nlact_core::sharing::{
    reconst_batch, reconst_bool_batch, seeded_rng, wrap_oracle, ArithShares, BoolShares,
};
use rand::Rng;

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn cfg_for(f: Function, s: u32, offset: u32) -> RunConfig {
    RunConfig {
        function: f,
        s,
        s_prime: Some(s + offset),
        ..Default::default()
    }
}

fn case(e: &Expected, f: Function) -> (u32, u32, u64) {
    let c = e
        .precision
        .cases
        .iter()
        .find(|c| c.function == f)
        .expect("precision case present");
    (c.s, c.offset, c.max_ulp + e.precision.ulp_tolerance)
}

fn exhaustive_max(f: Function, s: u32, offset: u32) -> (u64, u64, bool) {
    let cfg = cfg_for(f, s, offset);
    let p = cfg.params().expect("feasible");
    let row = sweep(&cfg, &p).expect("sweep runs");
    (row.max_ulp.unwrap(), row.instances, row.exhaustive)
}

fn c1(e: &Expected) -> Outcome {
    let (s, off, bound) = case(e, Function::Expn);
    let t = Instant::now();
    let (max, n, ex) = exhaustive_max(Function::Expn, s, off);
    let secs = t.elapsed().as_secs_f64();
    outcome(
        ex && max <= bound && secs < 300.0,
        format!("expn s={s} s'=s+{off}: max ULP {max} (bound {bound}) over all {n} negative inputs, {secs:.1}s single-threaded"),
    )
}

fn c2(e: &Expected) -> Outcome {
    let (s, off, bound) = case(e, Function::Exp);
    let (max, n, ex) = exhaustive_max(Function::Exp, s, off);
    outcome(ex && max <= bound, format!("exp s={s} s'=s+{off}: max ULP {max} (bound {bound}) over {n} inputs"))
}

fn c3(e: &Expected) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for f in [Function::Sigmoid, Function::Tanh] {
        let (s, off, bound) = case(e, f);
        let (max, n, ex) = exhaustive_max(f, s, off);
        pass &= ex && max <= bound;
        parts.push(format!("{f} s={s} s'=s+{off}: {max} (bound {bound}, {n} inputs)"));
    }
    outcome(pass, parts.join("; "))
}

fn ratios(row: &[Option<u64>], upto: usize) -> Vec<Option<f64>> {
    (0..upto)
        .map(|t| match (row.get(t).copied().flatten(), row.get(t + 1).copied().flatten()) {
            (Some(a), Some(b)) if a > 0 => Some(b as f64 / a as f64),
            _ => None,
        })
        .collect()
}

fn c4(e: &Expected) -> Outcome {
    let h = e.halving;
    let s = e.sprime_sweep.s;
    let offsets: Vec<u32> = (0..=h.max_offset + 1).collect();
    let table = sweep_sprime(&RunConfig { s, ..Default::default() }, &Function::ALL, &offsets)
        .expect("sweep runs");
    let band = |r: f64| (h.ratio_low..=h.ratio_high).contains(&r);
    let mut pass = true;
    let mut parts = Vec::new();
    for row in &table.rows {
        let ours: Vec<String> = row.max_ulp.iter().map(|v| v.map_or("-".into(), |u| u.to_string())).collect();
        let bad: Vec<String> = ratios(&row.max_ulp, h.max_offset as usize + 1)
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_some_and(band))
            .map(|(t, r)| format!("{t}->{}: {}", t + 1, r.map_or("n/a".into(), |r| format!("{r:.3}"))))
            .collect();
        let published = e.sprime_sweep.max_ulp.get(&row.function).cloned().unwrap_or_default();
        let pub_bad = ratios(&published, h.max_offset as usize + 1)
            .iter()
            .filter(|r| !r.is_some_and(band))
            .count();
        pass &= bad.is_empty();
        parts.push(format!(
            "{}: [{}] out of band {:?} (published row: {pub_bad} out of band)",
            row.function,
            ours.join(" "),
            bad
        ));
    }
    outcome(pass, format!("ratios in [{}, {}] for t <= {}; {}", h.ratio_low, h.ratio_high, h.max_offset, parts.join("; ")))
}

fn spec(backend: BackendKind, rec: RecMode, seed: u64) -> SessionSpec {
    SessionSpec {
        blocks: BlockConfig {
            backend,
            rec,
            ..Default::default()
        },
        seed,
        ..Default::default()
    }
}

fn sample(p: &ProtocolParams, n: usize, seed: u64) -> Vec<u64> {
    nlact_cli::sweep::Domain::of(p).sample(n, seed)
}

fn c5(e: &Expected) -> Outcome {
    let mut pass = true;
    let mut bad = Vec::new();
    for f in Function::ALL {
        let want = &e.building_blocks.ours[&f];
        for backend in [BackendKind::Ideal, BackendKind::Beaver] {
            for rec in [RecMode::Ideal, RecMode::Iterative] {
                let p = ProtocolParams::defaults(f, 12).unwrap();
                let xs = sample(&p, 8, 2);
                let ev = evaluate(&p, &spec(backend, rec, 2), &xs).unwrap();
                let got = ev.ledger.per_instance(xs.len() as u64);
                if &got != want {
                    pass = false;
                    bad.push(format!("{f}/{backend:?}/{rec:?}: {got:?}"));
                }
            }
        }
    }
    outcome(pass, format!("4 functions x 2 backends x 2 Rec modes equal the published counts{}", if bad.is_empty() { String::new() } else { format!("; mismatches {bad:?}") }))
}

fn c6(e: &Expected) -> Outcome {
    let c = CostModel::default();
    let mut pass = c.lambda == 128;
    let mut parts = Vec::new();
    for f in [Function::Sigmoid, Function::Tanh] {
        let p = ProtocolParams::defaults(f, 16).unwrap();
        let ours = model_bits(&c, &p);
        let sirnn = sirnn_bits(&c, &p, SirnnExpn::Shared).unwrap();
        let saved = c.msb(p.l) + c.b2a(p.bw_o) + c.mult(p.bw_o, p.bw_o) + c.truncate(2 * p.bw_o, p.s);
        // the block lists differ by exactly one msb, B2A, Mult and TR
        let mut diff = BTreeMap::new();
        for (k, v) in &e.building_blocks.sirnn[&f] {
            let d = v - e.building_blocks.ours[&f].get(k).copied().unwrap_or(0);
            if d > 0 {
                diff.insert(k.as_str(), d);
            }
        }
        let named = diff == BTreeMap::from([("B2A", 1), ("Mult", 1), ("TR", 1), ("msb", 1)]);
        pass &= sirnn > ours && sirnn - ours == saved && named;
        parts.push(format!("{f}: SIRNN {sirnn} > ours {ours} bits, saving {} = msb+B2A+Mult+TR", sirnn - ours));
    }
    outcome(pass, format!("s=16, lambda=128; {}", parts.join("; ")))
}

fn c7(e: &Expected) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for f in Function::ALL {
        let mut per_s = Vec::new();
        for &s in &e.rounds.s {
            for backend in [BackendKind::Ideal, BackendKind::Beaver] {
                let p = ProtocolParams::defaults(f, s).unwrap();
                let ev = evaluate(&p, &spec(backend, RecMode::Ideal, 3), &sample(&p, 4, 3)).unwrap();
                per_s.push((s, backend, ev.ledger.rounds));
            }
        }
        let first = per_s[0].2;
        pass &= per_s.iter().all(|r| r.2 == first);
        parts.push(format!("{f} {first}"));
    }
    outcome(pass, format!("rounds equal at s = {:?} on both backends: {}", e.rounds.s, parts.join(", ")))
}

fn c8() -> Outcome {
    let c = CostModel::default();
    let (l, m, n, s) = (16, 32, 32, 12);
    let hand = [
        ("msb", c.msb(l), 2272),
        ("msbTOwrap", c.msb_to_wrap(), 130),
        ("Mux", c.mux(l), 288),
        ("AND", c.and(), 148),
        ("B2A", c.b2a(l), 144),
        ("CrossTerm", c.cross_term(m, n), 5648),
        ("Mult", c.mult(m, n), 12196),
        ("TR", c.truncate(l, s), 1836),
    ];
    let mut pass = hand.iter().all(|h| h.1 == h.2);
    // the ledger charges the same amounts when the blocks actually run
    let xs: Vec<u64> = (0..4).map(|i| i * 0x1111).collect();
    let r = run_with_shares(&spec(BackendKind::Beaver, RecMode::Ideal, 4), 64, &xs, &xs, |p, x| {
        let x16 = x.reduce(l)?;
        let x32 = x.reduce(m)?;
        let mut charged = Vec::new();
        let mut step = |p: &mut nlact_core::blocks::Party, f: &mut dyn FnMut(&mut nlact_core::blocks::Party) -> nlact_core::Result<()>| {
            let before = p.ledger().bits_sent;
            f(p)?;
            charged.push((p.ledger().bits_sent - before) / 4);
            Ok::<_, nlact_core::Error>(())
        };
        let mut m_bits = None;
        step(p, &mut |p| {
            m_bits = Some(p.msb(&x16)?);
            Ok(())
        })?;
        let mb = m_bits.unwrap();
        step(p, &mut |p| p.msb_to_wrap(&x16, &mb).map(drop))?;
        step(p, &mut |p| p.mux(&x16, &mb).map(drop))?;
        step(p, &mut |p| p.and(&mb, &mb).map(drop))?;
        step(p, &mut |p| p.b2a(&mb, l).map(drop))?;
        step(p, &mut |p| p.cross_term(&x32.raw, m, n, 64).map(drop))?;
        step(p, &mut |p| p.mult(&x32, &x32).map(drop))?;
        step(p, &mut |p| p.truncate(&x16, s).map(drop))?;
        Ok(charged)
    })
    .unwrap();
    let ran: Vec<u64> = r.p1;
    pass &= ran.iter().zip(&hand).all(|(got, h)| *got == h.2);
    let listed: Vec<String> = hand.iter().zip(&ran).map(|(h, r)| format!("{}={} (ledger {r})", h.0, h.1)).collect();
    outcome(pass, format!("lambda=128, l=16, m=n=32, s=12: {}", listed.join(", ")))
}

/// All 256 inputs x all 256 splits at l = 8.
fn all_splits() -> (Vec<u64>, Vec<u64>) {
    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    for x in 0..256u64 {
        for a in 0..256u64 {
            s1.push(a);
            s2.push(x.wrapping_sub(a) & 255);
        }
    }
    (s1, s2)
}

fn c9() -> Outcome {
    let (s1, s2) = all_splits();
    let x: Vec<u64> = s1.iter().zip(&s2).map(|(a, b)| (a + b) & 255).collect();
    let mut mismatches = BTreeMap::new();
    let mut count = |name: &str, bad: usize| {
        mismatches.insert(name.to_string(), bad);
    };
    for backend in [BackendKind::Ideal, BackendKind::Beaver] {
        let sp = spec(backend, RecMode::Ideal, 5);
        let r = run_with_shares(&sp, 8, &s1, &s2, |p, v| {
            let m = p.msb(v)?;
            let w = p.msb_to_wrap(v, &m)?;
            let t = p.truncate(v, 3)?;
            let (nx, _) = negx(p, v)?;
            Ok((m, w, t, nx))
        })
        .unwrap();
        let tag = format!("{backend:?}").to_lowercase();
        let msb = reconst_bool_batch(&r.p1.0, &r.p2.0);
        count(&format!("msb/{tag}"), (0..x.len()).filter(|&i| msb[i] as u64 != x[i] >> 7).count());
        let wrap = reconst_bool_batch(&r.p1.1, &r.p2.1);
        count(
            &format!("msbTOwrap/{tag}"),
            (0..x.len()).filter(|&i| wrap[i] != wrap_oracle(s1[i], s2[i], 8)).count(),
        );
        let tr = reconst_batch(&r.p1.2, &r.p2.2).unwrap();
        count(&format!("TR/{tag}"), (0..x.len()).filter(|&i| tr[i] != x[i] >> 3).count());
        let nx = reconst_batch(&r.p1.3, &r.p2.3).unwrap();
        count(
            &format!("negx/{tag}"),
            (0..x.len())
                .filter(|&i| nx[i] != if x[i] >> 7 == 0 { !x[i] & 255 } else { x[i] })
                .count(),
        );
        for f in [Function::Exp, Function::Expn] {
            let p = ProtocolParams::defaults(f, 4).unwrap();
            let idx: Vec<usize> = (0..x.len()).filter(|&i| f.in_domain(x[i], p.input_config())).collect();
            let a: Vec<u64> = idx.iter().map(|&i| s1[i]).collect();
            let b: Vec<u64> = idx.iter().map(|&i| s2[i]).collect();
            let r = run_with_shares(&sp, 8, &a, &b, |pt, v| run_protocol(pt, v, &p)).unwrap();
            let got = reconst_batch(&r.p1, &r.p2).unwrap();
            let bad = (0..a.len())
                .filter(|&i| {
                    let want = match f {
                        Function::Exp => local::exp_from_shares(&p, a[i], b[i]),
                        _ => local::expn_from_shares(&p, a[i], b[i]),
                    };
                    got[i] != want
                })
                .count();
            count(&format!("{f}-cases/{tag}"), bad);
        }
    }
    let total: usize = mismatches.values().sum();
    outcome(total == 0, format!("l=8, 65536 (input, split) pairs per block; mismatches {mismatches:?}"))
}

fn c10() -> Outcome {
    const N: usize = 10_000;
    let mut rng = seeded_rng(10);
    let a: Vec<u64> = (0..N).map(|_| rng.gen()).collect();
    let b: Vec<u64> = (0..N).map(|_| rng.gen()).collect();
    let run = |backend| {
        run_with_shares(&spec(backend, RecMode::Ideal, 10), 64, &a, &b, |p, v| {
            let bits = |k: u32| BoolShares::new(v.owner, v.raw.iter().map(|r| ((r >> k) & 1) as u8).collect());
            let (u, w) = (bits(0)?, bits(1)?);
            let and = p.and(&u, &w)?;
            let mux = p.mux(&v.reduce(20)?, &u)?;
            let mult = p.mult(&v.reduce(24)?, &ArithShares::new(28, v.owner, v.raw.iter().map(|r| r >> 36).collect())?)?;
            let cross = p.cross_term(&v.reduce(32)?.raw, 32, 32, 64)?;
            Ok((and, mux, mult, cross))
        })
        .unwrap()
    };
    let (i, bv) = (run(BackendKind::Ideal), run(BackendKind::Beaver));
    let open = |r: &nlact_core::protocols::SessionRun<(BoolShares, ArithShares, ArithShares, ArithShares)>| {
        (
            reconst_bool_batch(&r.p1.0, &r.p2.0),
            reconst_batch(&r.p1.1, &r.p2.1).unwrap(),
            reconst_batch(&r.p1.2, &r.p2.2).unwrap(),
            reconst_batch(&r.p1.3, &r.p2.3).unwrap(),
        )
    };
    let (oi, ob) = (open(&i), open(&bv));
    // plaintext values of the same cases
    let mask = |k: u32| (1u64 << k) - 1;
    let mut wrong = 0;
    for k in 0..N {
        let (u, w) = ((a[k] ^ b[k]) & 1, ((a[k] >> 1) ^ (b[k] >> 1)) & 1);
        let x20 = a[k].wrapping_add(b[k]) & mask(20);
        let x24 = a[k].wrapping_add(b[k]) & mask(24);
        let y28 = ((a[k] >> 36) + (b[k] >> 36)) & mask(28);
        let cross = (a[k] & mask(32)).wrapping_mul(b[k] & mask(32));
        wrong += usize::from(oi.0[k] as u64 != (u & w))
            + usize::from(oi.1[k] != u * x20)
            + usize::from(oi.2[k] != x24 * y28)
            + usize::from(oi.3[k] != cross);
    }
    let differ = (0..N)
        .filter(|&k| oi.0[k] != ob.0[k] || oi.1[k] != ob.1[k] || oi.2[k] != ob.2[k] || oi.3[k] != ob.3[k])
        .count();
    outcome(
        differ == 0 && wrong == 0,
        format!("{N} seeded cases of AND, Mux, Mult, CrossTerm: {differ} backend differences, {wrong} plaintext mismatches"),
    )
}

fn c11(e: &Expected) -> Outcome {
    let r = rnn_cell::run(&RunConfig::default(), CellShape::default()).unwrap();
    let rc = e.rnn_cell;
    let shape_ok = r.sigmoid_instances as usize == rc.instances_per_gate
        && r.tanh_instances as usize == rc.instances_per_gate
        && (r.sigmoid_s_in, r.sigmoid_s, r.sigmoid_bw_o) == (rc.sigmoid.s_in, rc.sigmoid.s_out, rc.sigmoid.bits)
        && (r.tanh_s, r.tanh_bw_o) == (rc.tanh.s_out, rc.tanh.bits);
    outcome(
        shape_ok && r.max_ulp <= rc.max_ulp && r.traffic_ratio < 1.0,
        format!(
            "wall-clock and end-to-end accuracy substituted by 5-7 plus the cell step: max ULP {} (bound {}), activation traffic {:.3}x of SIRNN (published {:.2}, asserted < 1)",
            r.max_ulp, rc.max_ulp, r.traffic_ratio, rc.reference_traffic_ratio
        ),
    )
}

fn main() {
    let e = Expected::embedded();
    let criteria: Vec<(u32, &str, Check)> = vec![
        (1, "exhaustive precision, expn", Box::new(|| c1(&e))),
        (2, "exhaustive precision, exp", Box::new(|| c2(&e))),
        (3, "exhaustive precision, sigmoid/tanh", Box::new(|| c3(&e))),
        (4, "s' halving shape", Box::new(|| c4(&e))),
        (5, "building-block ledger equality", Box::new(|| c5(&e))),
        (6, "savings vs SIRNN composition", Box::new(|| c6(&e))),
        (7, "constant rounds", Box::new(|| c7(&e))),
        (8, "cost-formula values", Box::new(c8)),
        (9, "oracle equivalence at l=8", Box::new(c9)),
        (10, "backend equivalence", Box::new(c10)),
        (11, "substituted end-to-end check (rnn cell)", Box::new(|| c11(&e))),
    ];
    let mut failed = Vec::new();
    for (n, name, check) in &criteria {
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2}: {verdict}  {name} -- {}", o.detail);
        if !o.pass {
            failed.push(*n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
