//! One party's view of the building blocks.
//!
//! Every block takes this party's shares for a whole batch, talks to the
//! dealer (and, under the Beaver backend, to the peer), charges the model
//! cost to the ledger and returns this party's output shares.

use serde::{Deserialize, Serialize};

use super::cost::{BlockKind, CostLedger, CostModel, RoundTable};
use super::dealer::{MULT_EXT_MASK, MULT_TRIPLE};
use super::wire::{put_bits, put_u64s, Reader, Request, MODE_BEAVER, MODE_IDEAL, STATUS_OK};
use crate::error::{Error, Result};
use crate::fixedpoint::mask;
use crate::sharing::{ArithShares, BoolShares, PartyId};
use crate::transport::{tags, Channel, ChannelStats};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// The dealer evaluates every block on reconstructed inputs.
    #[default]
    Ideal,
    /// AND, Mux, B2A, CrossTerm and Mult run on dealer-supplied correlated
    /// randomness; the remaining blocks fall back to the ideal dealer.
    Beaver,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecMode {
    /// Exact rounding by the dealer.
    #[default]
    Ideal,
    /// Newton iteration on shares built from Mult and TR.
    Iterative,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub backend: BackendKind,
    pub cost: CostModel,
    pub rounds: RoundTable,
    pub rec: RecMode,
}

/// Ledger and physical counters left behind by a finished party.
#[derive(Clone, Debug, Default)]
pub struct PartyOutcome {
    pub ledger: CostLedger,
    pub dealer: ChannelStats,
    pub peer: ChannelStats,
}

pub struct Party {
    id: PartyId,
    dealer: Channel,
    peer: Channel,
    cfg: BlockConfig,
    ledger: CostLedger,
    depth: u32,
}

impl Party {
    pub fn new(id: PartyId, dealer: Channel, peer: Channel, cfg: BlockConfig) -> Party {
        Party {
            id,
            dealer,
            peer,
            cfg,
            ledger: CostLedger::default(),
            depth: 0,
        }
    }

    pub fn id(&self) -> PartyId {
        self.id
    }

    pub fn config(&self) -> &BlockConfig {
        &self.cfg
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    pub fn take_ledger(&mut self) -> CostLedger {
        std::mem::take(&mut self.ledger)
    }

    pub fn peer_stats(&self) -> ChannelStats {
        self.peer.stats()
    }

    pub fn dealer_stats(&self) -> ChannelStats {
        self.dealer.stats()
    }

    pub fn peer_channel(&mut self) -> &mut Channel {
        &mut self.peer
    }

    pub fn dealer_channel(&mut self) -> &mut Channel {
        &mut self.dealer
    }

    pub fn mark_clamped(&mut self) {
        self.ledger.domain_clamped = true;
    }

    /// Ends the dealer session and hands back the counters.
    pub fn finish(mut self) -> Result<PartyOutcome> {
        self.dealer.bye()?;
        Ok(PartyOutcome {
            ledger: self.ledger,
            dealer: self.dealer.stats(),
            peer: self.peer.stats(),
        })
    }

    /// Runs `f` as one composite block: it is counted once per instance
    /// under `kind`, and everything inside only in the primitive counts.
    pub fn scope<T>(
        &mut self,
        kind: BlockKind,
        n: usize,
        f: impl FnOnce(&mut Party) -> Result<T>,
    ) -> Result<T> {
        if self.depth == 0 {
            self.ledger.record_invocation(kind, n as u64);
        }
        self.depth += 1;
        let r = f(self);
        self.depth -= 1;
        r
    }

    fn charge(&mut self, kind: BlockKind, n: usize, bits_each: u64) {
        if self.depth == 0 {
            self.ledger.record_invocation(kind, n as u64);
        }
        let rounds = self.cfg.rounds.rounds(kind);
        self.ledger.record_primitive(kind, n as u64, bits_each, rounds);
    }

    fn dealer_call(
        &mut self,
        tag: u8,
        mode: u8,
        n: usize,
        params: [u32; 4],
        data: &[u8],
    ) -> Result<Vec<u8>> {
        let batch = u32::try_from(n).map_err(|_| Error::Contract("batch too large".into()))?;
        let mut msg = Vec::with_capacity(21 + data.len());
        Request {
            mode,
            batch,
            params,
        }
        .encode_into(&mut msg);
        msg.extend_from_slice(data);
        self.dealer.send_msg(tag, &msg)?;
        let mut resp = self.dealer.recv_msg(tag)?;
        match resp.first() {
            Some(&STATUS_OK) => {
                resp.remove(0);
                Ok(resp)
            }
            Some(_) => Err(Error::Contract(
                String::from_utf8_lossy(&resp[1..]).into_owned(),
            )),
            None => Err(Error::Desync("empty dealer response".into())),
        }
    }

    /// Swaps equal-length messages with the peer (P1 speaks first).
    fn exchange(&mut self, mine: &[u8]) -> Result<Vec<u8>> {
        let theirs = if self.id.is_p1() {
            self.peer.send_msg(tags::OPEN, mine)?;
            self.peer.recv_msg(tags::OPEN)?
        } else {
            let t = self.peer.recv_msg(tags::OPEN)?;
            self.peer.send_msg(tags::OPEN, mine)?;
            t
        };
        if theirs.len() != mine.len() {
            return Err(Error::Desync(format!(
                "opening of {} bytes, expected {}",
                theirs.len(),
                mine.len()
            )));
        }
        Ok(theirs)
    }

    fn arith(&self, ring: u32, raw: Vec<u64>) -> ArithShares {
        ArithShares::from_raw(ring, self.id, raw)
    }

    fn bools(&self, bits: Vec<u8>) -> BoolShares {
        BoolShares {
            owner: self.id,
            bits,
        }
    }

    fn check_owner_a(&self, x: &ArithShares) -> Result<()> {
        if x.owner != self.id {
            return Err(Error::Contract(format!(
                "{:?} handed shares belonging to {:?}",
                self.id, x.owner
            )));
        }
        Ok(())
    }

    fn check_len(a: usize, b: usize) -> Result<()> {
        if a != b {
            return Err(Error::Contract(format!("batch length {a} vs {b}")));
        }
        Ok(())
    }

    // ---- ideal-only blocks -------------------------------------------------

    /// Boolean shares of the most significant bit.
    pub fn msb(&mut self, x: &ArithShares) -> Result<BoolShares> {
        self.check_owner_a(x)?;
        let n = x.len();
        self.charge(BlockKind::Msb, n, self.cfg.cost.msb(x.ring));
        let mut d = Vec::new();
        put_u64s(&mut d, &x.raw);
        let r = self.dealer_call(tags::MSB, MODE_IDEAL, n, [x.ring, 0, 0, 0], &d)?;
        let mut rd = Reader::new(&r);
        let bits = rd.bits(n)?;
        rd.finish()?;
        Ok(self.bools(bits))
    }

    /// Boolean shares of the wrap bit of `x`'s shares, given shares of its msb.
    pub fn msb_to_wrap(&mut self, x: &ArithShares, m: &BoolShares) -> Result<BoolShares> {
        self.check_owner_a(x)?;
        Self::check_len(x.len(), m.len())?;
        let n = x.len();
        self.charge(BlockKind::MsbToWrap, n, self.cfg.cost.msb_to_wrap());
        let mut d = Vec::new();
        put_u64s(&mut d, &x.raw);
        put_bits(&mut d, &m.bits);
        let r = self.dealer_call(tags::MSB_TO_WRAP, MODE_IDEAL, n, [x.ring, 0, 0, 0], &d)?;
        let mut rd = Reader::new(&r);
        let bits = rd.bits(n)?;
        rd.finish()?;
        Ok(self.bools(bits))
    }

    /// `floor(x / 2^t)` into `Z_{2^(l-t)}`, `x` read as unsigned.
    pub fn truncate(&mut self, x: &ArithShares, t: u32) -> Result<ArithShares> {
        self.check_owner_a(x)?;
        if t == 0 || t >= x.ring {
            return Err(Error::Contract(format!(
                "truncation by {t} of a {}-bit value",
                x.ring
            )));
        }
        let n = x.len();
        self.charge(BlockKind::Truncate, n, self.cfg.cost.truncate(x.ring, t));
        let mut d = Vec::new();
        put_u64s(&mut d, &x.raw);
        let r = self.dealer_call(tags::TRUNCATE, MODE_IDEAL, n, [x.ring, t, 0, 0], &d)?;
        self.read_arith(&r, n, x.ring - t)
    }

    fn read_arith(&self, r: &[u8], n: usize, ring: u32) -> Result<ArithShares> {
        let mut rd = Reader::new(r);
        let v = rd.u64s(n)?;
        rd.finish()?;
        if v.iter().any(|x| x & !mask(ring) != 0) {
            return Err(Error::Desync("dealer returned out-of-ring share".into()));
        }
        Ok(self.arith(ring, v))
    }

    pub(crate) fn rec_ideal(
        &mut self,
        v: &ArithShares,
        s: u32,
        out_ring: u32,
        bits_each: u64,
    ) -> Result<ArithShares> {
        let n = v.len();
        self.charge(BlockKind::Rec, n, bits_each);
        let mut d = Vec::new();
        put_u64s(&mut d, &v.raw);
        let r = self.dealer_call(tags::REC, MODE_IDEAL, n, [v.ring, s, out_ring, 0], &d)?;
        self.read_arith(&r, n, out_ring)
    }

    // ---- blocks with a Beaver form -----------------------------------------

    /// `b ? x : 0`.
    pub fn mux(&mut self, x: &ArithShares, b: &BoolShares) -> Result<ArithShares> {
        self.check_owner_a(x)?;
        Self::check_len(x.len(), b.len())?;
        let n = x.len();
        self.charge(BlockKind::Mux, n, self.cfg.cost.mux(x.ring));
        match self.cfg.backend {
            BackendKind::Ideal => {
                let mut d = Vec::new();
                put_u64s(&mut d, &x.raw);
                put_bits(&mut d, &b.bits);
                let r = self.dealer_call(tags::MUX, MODE_IDEAL, n, [x.ring, 0, 0, 0], &d)?;
                self.read_arith(&r, n, x.ring)
            }
            BackendKind::Beaver => self.beaver_mux(x, b),
        }
    }

    pub fn and(&mut self, a: &BoolShares, b: &BoolShares) -> Result<BoolShares> {
        Self::check_len(a.len(), b.len())?;
        let n = a.len();
        self.charge(BlockKind::And, n, self.cfg.cost.and());
        match self.cfg.backend {
            BackendKind::Ideal => {
                let mut d = Vec::new();
                put_bits(&mut d, &a.bits);
                put_bits(&mut d, &b.bits);
                let r = self.dealer_call(tags::AND, MODE_IDEAL, n, [0; 4], &d)?;
                let mut rd = Reader::new(&r);
                let bits = rd.bits(n)?;
                rd.finish()?;
                Ok(self.bools(bits))
            }
            BackendKind::Beaver => self.beaver_and(a, b),
        }
    }

    /// The shared bit as 0/1 in `Z_{2^ring}`.
    pub fn b2a(&mut self, b: &BoolShares, ring: u32) -> Result<ArithShares> {
        let n = b.len();
        self.charge(BlockKind::B2A, n, self.cfg.cost.b2a(ring));
        match self.cfg.backend {
            BackendKind::Ideal => {
                let mut d = Vec::new();
                put_bits(&mut d, &b.bits);
                let r = self.dealer_call(tags::B2A, MODE_IDEAL, n, [ring, 0, 0, 0], &d)?;
                self.read_arith(&r, n, ring)
            }
            BackendKind::Beaver => self.beaver_b2a(b, ring),
        }
    }

    /// Shares in `Z_{2^out_ring}` of `a1 * a2`, where P1 privately holds
    /// `a1 < 2^m` and P2 privately holds `a2 < 2^n`. `mine` is this party's
    /// private input vector.
    ///
    /// The cost is charged for `(m, n)`; when `m + n > out_ring` the product
    /// is reduced modulo the output ring.
    pub fn cross_term(
        &mut self,
        mine: &[u64],
        m: u32,
        n: u32,
        out_ring: u32,
    ) -> Result<ArithShares> {
        for w in [m, n, out_ring] {
            if w == 0 || w > 64 {
                return Err(Error::Contract(format!("CrossTerm width {w} outside 1..=64")));
            }
        }
        let own = if self.id.is_p1() { m } else { n };
        if mine.iter().any(|v| v & !mask(own) != 0) {
            return Err(Error::Contract(format!(
                "CrossTerm input exceeds {own} bits"
            )));
        }
        let cnt = mine.len();
        self.charge(BlockKind::CrossTerm, cnt, self.cfg.cost.cross_term(m, n));
        match self.cfg.backend {
            BackendKind::Ideal => {
                let mut d = Vec::new();
                put_u64s(&mut d, mine);
                let r = self.dealer_call(tags::CROSS_TERM, MODE_IDEAL, cnt, [m, n, out_ring, 0], &d)?;
                self.read_arith(&r, cnt, out_ring)
            }
            BackendKind::Beaver => self.beaver_cross_term(mine, m, n, out_ring),
        }
    }

    /// Exact variant: the output ring is `m + n` bits.
    pub fn cross_term_exact(&mut self, mine: &[u64], m: u32, n: u32) -> Result<ArithShares> {
        if m + n > 64 {
            return Err(Error::Contract(format!(
                "CrossTerm output of {m}+{n} bits exceeds 64"
            )));
        }
        self.cross_term(mine, m, n, m + n)
    }

    /// `x * y` into `Z_{2^(m+n)}`, inputs read as unsigned.
    pub fn mult(&mut self, x: &ArithShares, y: &ArithShares) -> Result<ArithShares> {
        self.check_owner_a(x)?;
        self.check_owner_a(y)?;
        Self::check_len(x.len(), y.len())?;
        let (m, n) = (x.ring, y.ring);
        if m + n > 64 {
            return Err(Error::Contract(format!(
                "Mult output of {m}+{n} bits exceeds 64"
            )));
        }
        let cnt = x.len();
        self.charge(BlockKind::Mult, cnt, self.cfg.cost.mult(m, n));
        match self.cfg.backend {
            BackendKind::Ideal => {
                let mut d = Vec::new();
                put_u64s(&mut d, &x.raw);
                put_u64s(&mut d, &y.raw);
                let r = self.dealer_call(tags::MULT, MODE_IDEAL, cnt, [m, n, 0, 0], &d)?;
                self.read_arith(&r, cnt, m + n)
            }
            BackendKind::Beaver => {
                let k = m + n;
                let xk = self.beaver_extend(x, k)?;
                let yk = self.beaver_extend(y, k)?;
                self.beaver_triple_mult(&xk, &yk)
            }
        }
    }

    // ---- Beaver realisations (uncharged; the public block charges) ----------

    fn beaver_and(&mut self, x: &BoolShares, y: &BoolShares) -> Result<BoolShares> {
        let n = x.len();
        let r = self.dealer_call(tags::AND, MODE_BEAVER, n, [0; 4], &[])?;
        let mut rd = Reader::new(&r);
        let (a, b, c) = (rd.bits(n)?, rd.bits(n)?, rd.bits(n)?);
        rd.finish()?;
        let mut mine = Vec::with_capacity(2 * n);
        mine.extend(x.bits.iter().zip(&a).map(|(x, a)| x ^ a));
        mine.extend(y.bits.iter().zip(&b).map(|(y, b)| y ^ b));
        let theirs = self.exchange(&mine)?;
        let p1 = self.id.is_p1() as u8;
        let z = (0..n)
            .map(|i| {
                let e = mine[i] ^ theirs[i];
                let f = mine[n + i] ^ theirs[n + i];
                c[i] ^ (e & b[i]) ^ (f & a[i]) ^ (p1 & e & f)
            })
            .collect();
        Ok(self.bools(z))
    }

    fn beaver_b2a(&mut self, b: &BoolShares, ring: u32) -> Result<ArithShares> {
        let n = b.len();
        let r = self.dealer_call(tags::B2A, MODE_BEAVER, n, [ring, 0, 0, 0], &[])?;
        let mut rd = Reader::new(&r);
        let rb = rd.bits(n)?;
        let ra = rd.u64s(n)?;
        rd.finish()?;
        let mine: Vec<u8> = b.bits.iter().zip(&rb).map(|(x, r)| x ^ r).collect();
        let theirs = self.exchange(&mine)?;
        let m = mask(ring);
        let p1 = self.id.is_p1();
        let out = (0..n)
            .map(|i| {
                // b = c + (1 - 2c) r
                let c = (mine[i] ^ theirs[i]) as u64;
                let base = if p1 { c } else { 0 };
                let coef = 1u64.wrapping_sub(c.wrapping_mul(2));
                base.wrapping_add(coef.wrapping_mul(ra[i])) & m
            })
            .collect();
        Ok(self.arith(ring, out))
    }

    fn beaver_mux(&mut self, x: &ArithShares, b: &BoolShares) -> Result<ArithShares> {
        let n = x.len();
        let l = x.ring;
        let m = mask(l);
        let r = self.dealer_call(tags::MUX, MODE_BEAVER, n, [l, 0, 0, 0], &[])?;
        let mut rd = Reader::new(&r);
        let rb = rd.bits(n)?;
        let ra = rd.u64s(n)?;
        let u = rd.u64s(n)?;
        let ur = rd.u64s(n)?;
        rd.finish()?;
        // open c = b ^ r and d = x - u together
        let mut mine = Vec::with_capacity(n * 9);
        let cs: Vec<u8> = b.bits.iter().zip(&rb).map(|(b, r)| b ^ r).collect();
        put_bits(&mut mine, &cs);
        let ds: Vec<u64> = x.raw.iter().zip(&u).map(|(x, u)| x.wrapping_sub(*u) & m).collect();
        put_u64s(&mut mine, &ds);
        let theirs = self.exchange(&mine)?;
        let mut tr = Reader::new(&theirs);
        let tc = tr.bits(n)?;
        let td = tr.u64s(n)?;
        let out = (0..n)
            .map(|i| {
                // b*x = c*x + (1-2c)*x*r,  x*r = d*r + u*r
                let c = (cs[i] ^ tc[i]) as u64;
                let d = ds[i].wrapping_add(td[i]);
                let xr = d.wrapping_mul(ra[i]).wrapping_add(ur[i]);
                let coef = 1u64.wrapping_sub(c.wrapping_mul(2));
                c.wrapping_mul(x.raw[i]).wrapping_add(coef.wrapping_mul(xr)) & m
            })
            .collect();
        Ok(self.arith(l, out))
    }

    fn beaver_cross_term(
        &mut self,
        mine: &[u64],
        _m: u32,
        _n: u32,
        out_ring: u32,
    ) -> Result<ArithShares> {
        let cnt = mine.len();
        let msk = mask(out_ring);
        let r = self.dealer_call(tags::CROSS_TERM, MODE_BEAVER, cnt, [_m, _n, out_ring, 0], &[])?;
        let mut rd = Reader::new(&r);
        let mask_v = rd.u64s(cnt)?;
        let w = rd.u64s(cnt)?;
        rd.finish()?;
        // P1 opens d = a1 - u, P2 opens e = a2 - v
        let opened: Vec<u64> = mine
            .iter()
            .zip(&mask_v)
            .map(|(a, u)| a.wrapping_sub(*u) & msk)
            .collect();
        let mut buf = Vec::new();
        put_u64s(&mut buf, &opened);
        let theirs = self.exchange(&buf)?;
        let other = Reader::new(&theirs).u64s(cnt)?;
        let out = (0..cnt)
            .map(|i| {
                if self.id.is_p1() {
                    // d*e + u*e + w1
                    let (d, e) = (opened[i], other[i]);
                    d.wrapping_mul(e)
                        .wrapping_add(mask_v[i].wrapping_mul(e))
                        .wrapping_add(w[i])
                        & msk
                } else {
                    // d*v + w2
                    let d = other[i];
                    d.wrapping_mul(mask_v[i]).wrapping_add(w[i]) & msk
                }
            })
            .collect();
        Ok(self.arith(out_ring, out))
    }

    /// Shares of the same unsigned value in the wider ring `Z_{2^k}`.
    ///
    /// Opens `c = x + r mod 2^m` for a dealer mask `r`; then
    /// `x = c - r + 2^m [c < r]`, with the comparison evaluated bitwise on
    /// XOR shares of `r` using AND triples.
    fn beaver_extend(&mut self, x: &ArithShares, k: u32) -> Result<ArithShares> {
        let m = x.ring;
        if m == k {
            return Ok(x.clone());
        }
        let n = x.len();
        let r = self.dealer_call(tags::MULT, MODE_BEAVER, n, [MULT_EXT_MASK, m, k, 0], &[])?;
        let mut rd = Reader::new(&r);
        let rbits = rd.u64s(n)?;
        let rk = rd.u64s(n)?;
        rd.finish()?;
        let mm = mask(m);
        let cs: Vec<u64> = x.raw.iter().zip(&rk).map(|(x, r)| x.wrapping_add(*r) & mm).collect();
        let mut buf = Vec::new();
        put_u64s(&mut buf, &cs);
        let theirs = self.exchange(&buf)?;
        let tc = Reader::new(&theirs).u64s(n)?;
        let c: Vec<u64> = cs.iter().zip(&tc).map(|(a, b)| a.wrapping_add(*b) & mm).collect();

        let bit = |v: u64, j: u32| ((v >> j) & 1) as u8;
        let mut lt = self.bools(
            (0..n)
                .map(|i| if bit(c[i], 0) == 0 { bit(rbits[i], 0) } else { 0 })
                .collect(),
        );
        for j in 1..m {
            let rj = self.bools((0..n).map(|i| bit(rbits[i], j)).collect());
            let both = self.beaver_and(&rj, &lt)?;
            lt = self.bools(
                (0..n)
                    .map(|i| {
                        if bit(c[i], j) == 0 {
                            rj.bits[i] ^ lt.bits[i] ^ both.bits[i]
                        } else {
                            both.bits[i]
                        }
                    })
                    .collect(),
            );
        }
        let ltk = self.beaver_b2a(&lt, k)?;
        let km = mask(k);
        let p1 = self.id.is_p1();
        let out = (0..n)
            .map(|i| {
                let base = if p1 { c[i] } else { 0 };
                base.wrapping_sub(rk[i])
                    .wrapping_add(ltk.raw[i] << m)
                    & km
            })
            .collect();
        Ok(self.arith(k, out))
    }

    fn beaver_triple_mult(&mut self, x: &ArithShares, y: &ArithShares) -> Result<ArithShares> {
        let n = x.len();
        let k = x.ring;
        let km = mask(k);
        let r = self.dealer_call(tags::MULT, MODE_BEAVER, n, [MULT_TRIPLE, k, 0, 0], &[])?;
        let mut rd = Reader::new(&r);
        let a = rd.u64s(n)?;
        let b = rd.u64s(n)?;
        let c = rd.u64s(n)?;
        rd.finish()?;
        let mut mine = Vec::with_capacity(2 * n);
        mine.extend(x.raw.iter().zip(&a).map(|(x, a)| x.wrapping_sub(*a) & km));
        mine.extend(y.raw.iter().zip(&b).map(|(y, b)| y.wrapping_sub(*b) & km));
        let mut buf = Vec::new();
        put_u64s(&mut buf, &mine);
        let theirs = self.exchange(&buf)?;
        let t = Reader::new(&theirs).u64s(2 * n)?;
        let p1 = self.id.is_p1();
        let out = (0..n)
            .map(|i| {
                let d = mine[i].wrapping_add(t[i]);
                let e = mine[n + i].wrapping_add(t[n + i]);
                let mut z = c[i]
                    .wrapping_add(d.wrapping_mul(b[i]))
                    .wrapping_add(e.wrapping_mul(a[i]));
                if p1 {
                    z = z.wrapping_add(d.wrapping_mul(e));
                }
                z & km
            })
            .collect();
        Ok(self.arith(k, out))
    }
}
