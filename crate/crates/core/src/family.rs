//! Small collapsing protocols for the Boolean problem that send a fixed
//! number of bits per player. None of them is correct; they exist to be
//! attacked by the adversary.
//!
//! Players `1..k` look only at their suffix composition (and, for `hash`, at
//! everything else their collapsing view holds). The last player guesses the
//! bit of the previous message at its pointer.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{Layer, Variant};
use crate::sim::{player_fn, Message, PlayerView, Protocol, ViewKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// First `t` bits of the suffix.
    Truncate,
    /// `t` parities over seeded subsets of the suffix.
    Parity,
    /// `t` bits of a seeded hash of the whole view.
    Hash,
    /// Empty messages.
    Constant,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Truncate => "truncate",
            FamilyKind::Parity => "parity",
            FamilyKind::Hash => "hash",
            FamilyKind::Constant => "constant",
        }
    }
}

/// A family member named like `truncate4`, `parity6`, `hash5` or `constant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub t: usize,
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "constant" {
            return Ok(Self { kind: FamilyKind::Constant, t: 0 });
        }
        for kind in [FamilyKind::Truncate, FamilyKind::Parity, FamilyKind::Hash] {
            if let Some(rest) = s.strip_prefix(kind.name()) {
                let t = rest
                    .parse()
                    .map_err(|_| Error::Malformed(format!("`{s}`: expected {}<bits>", kind.name())))?;
                return Ok(Self { kind, t });
            }
        }
        Err(Error::Malformed(format!("`{s}` is not a sample protocol name")))
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FamilyKind::Constant => f.write_str("constant"),
            kind => write!(f, "{}{}", kind.name(), self.t),
        }
    }
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn absorb(state: &mut u64, value: u64) {
    *state ^= value;
    splitmix(state);
}

fn view_hash(seed: u64, v: &PlayerView<'_>, t: usize) -> Result<Vec<bool>> {
    let mut state = seed ^ (v.player() as u64).rotate_left(32);
    for &b in v.suffix_bits()?.as_slice() {
        absorb(&mut state, u64::from(b) + 2);
    }
    for h in 1..v.player() {
        match v.layer(h)? {
            Layer::Start(i) => absorb(&mut state, *i as u64),
            Layer::Map(f) => f.as_slice().iter().for_each(|&y| absorb(&mut state, y as u64)),
            Layer::Bits(x) => x.as_slice().iter().for_each(|&b| absorb(&mut state, u64::from(b))),
        }
    }
    for m in v.board() {
        absorb(&mut state, m.len() as u64);
        m.bits().iter().for_each(|&b| absorb(&mut state, u64::from(b)));
    }
    let mut out = Vec::with_capacity(t);
    while out.len() < t {
        let word = splitmix(&mut state);
        out.extend((0..64).map(|s| (word >> s) & 1 == 1).take(t - out.len()));
    }
    Ok(out)
}

/// Builds the member `kind` with `t` bits per player. `seed` picks the parity
/// subsets and the hash key.
pub fn family_protocol(kind: FamilyKind, n: usize, k: usize, t: usize, seed: u64) -> Result<Protocol> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let t = if kind == FamilyKind::Constant { 0 } else { t };
    if t > n && kind == FamilyKind::Truncate {
        return Err(Error::InvalidParameter(format!("cannot truncate {n} bits to {t}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets: Arc<Vec<Vec<Vec<bool>>>> =
        Arc::new((1..k).map(|_| (0..t).map(|_| (0..n).map(|_| rng.gen()).collect()).collect()).collect());

    let mut players = Vec::with_capacity(k);
    for j in 1..k {
        let subsets = subsets.clone();
        players.push(player_fn(move |v: &PlayerView<'_>| {
            let bits = match kind {
                FamilyKind::Constant => Vec::new(),
                FamilyKind::Truncate => v.suffix_bits()?.as_slice()[..t].to_vec(),
                FamilyKind::Parity => {
                    let y = v.suffix_bits()?;
                    subsets[j - 1]
                        .iter()
                        .map(|mask| (0..n).filter(|&r| mask[r] && y.get(r)).count() % 2 == 1)
                        .collect()
                }
                FamilyKind::Hash => view_hash(seed, v, t)?,
            };
            Ok(Message::from_bits(bits))
        }));
    }
    players.push(player_fn(|v: &PlayerView<'_>| {
        let last = v.message(v.player() - 1);
        let guess = if last.is_empty() { false } else { last.bits()[v.pointer()? % last.len()] };
        Ok(Message::from_bits(vec![guess]))
    }));

    let name = FamilySpec { kind, t }.to_string();
    Ok(Protocol::new(name, Variant::Mpj, ViewKind::Collapsing, players)
        .with_width(n)
        .with_declared_max_bits(t))
}
