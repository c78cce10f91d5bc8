//! Fooling-pair construction against collapsing protocols for the Boolean
//! problem whose players each send at most `n - ½·log2 n - 2` bits.
//!
//! Level by level, the adversary groups the half-weight candidates for the
//! current suffix composition by the message they induce, picks a cell holding
//! a crossing pair, and wires the next layer so the previous pair is the
//! composition of the new pair with that layer. After the last level the two
//! instances share every message but disagree on the answer.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::instance::{Answer, BitVector, Instance, Layer, LayerFunction, MpjInstance, Variant};
use crate::sim::{run_replayed, Message, PlayerView, Protocol, Suffix, ViewKind};

/// `[I_00, I_01, I_10, I_11]`, 0-based and ascending.
pub type Iab = [Vec<usize>; 4];

fn same_width(x: &BitVector, y: &BitVector) -> Result<()> {
    if x.width() != y.width() {
        return Err(Error::WidthMismatch { expected: x.width(), found: y.width() });
    }
    Ok(())
}

/// `I_ab(x, y) = {r : (x_r, y_r) = (a, b)}`, indexed by `2a + b`.
pub fn iab_sets(x: &BitVector, y: &BitVector) -> Result<Iab> {
    same_width(x, y)?;
    let mut sets: Iab = Default::default();
    for r in 0..x.width() {
        sets[2 * usize::from(x.get(r)) + usize::from(y.get(r))].push(r);
    }
    Ok(sets)
}

pub fn is_crossing(x: &BitVector, y: &BitVector) -> Result<bool> {
    Ok(iab_sets(x, y)?.iter().all(|s| !s.is_empty()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingPair {
    pub x: BitVector,
    pub y: BitVector,
    pub iab: Iab,
}

impl CrossingPair {
    fn new(x: BitVector, y: BitVector) -> Self {
        let iab = iab_sets(&x, &y).expect("same width");
        debug_assert!(iab.iter().all(|s| !s.is_empty()));
        Self { x, y, iab }
    }
}

fn is_half_weight(x: &BitVector) -> bool {
    2 * x.weight() == x.width()
}

/// A crossing pair inside `cell`, if any. Half-weight members are tried first:
/// two distinct ones cross unless they are complements.
pub fn find_crossing_pair(cell: &[BitVector]) -> Option<CrossingPair> {
    let half: Vec<&BitVector> = cell.iter().filter(|x| is_half_weight(x)).collect();
    for (a, x) in half.iter().enumerate() {
        for y in &half[a + 1..] {
            if x != y && **y != x.complement() {
                return Some(CrossingPair::new((*x).clone(), (*y).clone()));
            }
        }
    }
    for (a, x) in cell.iter().enumerate() {
        for y in &cell[a + 1..] {
            if x.width() == y.width() && is_crossing(x, y).unwrap_or(false) {
                return Some(CrossingPair::new(x.clone(), y.clone()));
            }
        }
    }
    None
}

/// All weight-`n/2` strings of length `n`, lexicographic.
pub fn half_weight_strings(n: usize) -> Vec<BitVector> {
    assert!(n.is_multiple_of(2) && n <= 63, "n must be even and at most 63");
    (0..1u64 << n)
        .filter(|v| 2 * v.count_ones() as usize == n)
        .map(|v| BitVector::from_value(n, v))
        .collect()
}

/// `C(n, k)`, or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(c)
}

/// `C(n, n/2) > 2^n / (2·√n)`, decided exactly as `C(n, n/2)²·n > 4^{n-1}`.
pub fn half_weight_count_exceeds(n: u64) -> Option<bool> {
    let c = binomial(n, n / 2)?;
    let lhs = c.checked_mul(c)?.checked_mul(u128::from(n))?;
    let rhs = 1u128.checked_shl(2 * (n as u32) - 2)?;
    Some(lhs > rhs)
}

/// Whether `t <= n - ½·log2 n - 2`, decided exactly as `4^{n-2-t} >= n`.
pub fn within_bit_limit(n: usize, t: usize) -> bool {
    if t + 2 > n {
        return false;
    }
    let slack = 2 * (n - 2 - t);
    slack >= usize::BITS as usize || (1usize << slack) >= n
}

/// Largest `t` with `t <= n - ½·log2 n - 2`.
pub fn bit_limit(n: usize) -> Option<usize> {
    (0..n).rev().find(|&t| within_bit_limit(n, t))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossedCell {
    pub message: Message,
    pub pair: CrossingPair,
}

/// Groups the half-weight strings by `msg` and returns the first cell, in
/// message order, that contains a crossing pair.
pub fn find_crossed_cell<F>(n: usize, t_bound: usize, msg: F) -> Result<CrossedCell>
where
    F: Fn(&BitVector) -> Result<Message>,
{
    if !n.is_multiple_of(2) || !(2..=63).contains(&n) {
        return Err(Error::InvalidParameter(format!("n must be even and in 2..=62, got {n}")));
    }
    if !within_bit_limit(n, t_bound) {
        return Err(Error::Precondition(format!(
            "message bound {t_bound} exceeds n - ½·log2 n - 2 at n = {n}"
        )));
    }
    let mut cells: BTreeMap<Vec<bool>, Vec<BitVector>> = BTreeMap::new();
    for x in half_weight_strings(n) {
        let m = msg(&x)?;
        if m.len() > t_bound {
            return Err(Error::BadMessage {
                player: 0,
                reason: format!("{} bits on {x}, bound is {t_bound}", m.len()),
            });
        }
        cells.entry(m.bits().to_vec()).or_default().push(x);
    }
    for (bits, cell) in &cells {
        if let Some(pair) = find_crossing_pair(cell) {
            return Ok(CrossedCell { message: Message::from_bits(bits.clone()), pair });
        }
    }
    Err(Error::NoCrossedCell(format!(
        "{} cells over {} half-weight strings, none crossed",
        cells.len(),
        cells.values().map(Vec::len).sum::<usize>()
    )))
}

/// Refuses protocols the construction does not apply to. Returns the declared
/// per-player bound.
pub fn check_attackable(protocol: &Protocol, n: usize) -> Result<usize> {
    if protocol.view() != ViewKind::Collapsing {
        return Err(Error::Precondition(format!("protocol `{}` is not collapsing", protocol.name())));
    }
    if protocol.variant() != Variant::Mpj {
        return Err(Error::Precondition(format!("protocol `{}` does not solve the Boolean problem", protocol.name())));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::Precondition(format!("n must be even, got {n}")));
    }
    if let Some(w) = protocol.width() {
        if w != n {
            return Err(Error::Precondition(format!("protocol is built for n = {w}, not {n}")));
        }
    }
    let t = protocol
        .declared_max_bits()
        .ok_or_else(|| Error::Precondition(format!("protocol `{}` declares no per-player bound", protocol.name())))?;
    if !within_bit_limit(n, t) {
        return Err(Error::Precondition(format!(
            "declared bound {t} exceeds n - ½·log2 n - 2 at n = {n} (limit {})",
            bit_limit(n).map_or_else(|| "none".to_string(), |l| l.to_string())
        )));
    }
    Ok(t)
}

/// Two instances differing only in `x`, with equal messages from players
/// `1..k` and different answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoolingPair {
    pub inst0: Instance,
    pub inst1: Instance,
    /// Messages of players `1..k`, shared by both instances.
    pub prefix: Vec<Message>,
}

pub fn build_fooling_inputs(protocol: &Protocol, n: usize) -> Result<FoolingPair> {
    let t = check_attackable(protocol, n)?;
    let k = protocol.k();
    let mut prefix: Vec<Layer> = Vec::with_capacity(k - 1);
    let mut board: Vec<Message> = Vec::with_capacity(k - 1);
    let mut pair: Option<CrossingPair> = None;

    for player in 1..k {
        let cell = find_crossed_cell(n, t, |y| {
            let view = PlayerView::collapsing(
                Variant::Mpj,
                n,
                k,
                player,
                prefix.clone(),
                Some(Suffix::Bits(y.clone())),
                &board,
            )?;
            protocol.message(&view)
        })
        .map_err(|e| match e {
            Error::BadMessage { reason, .. } => Error::BadMessage { player, reason },
            Error::NoCrossedCell(why) => Error::NoCrossedCell(format!("level {player}: {why}")),
            other => other,
        })?;
        let next = cell.pair;
        match &pair {
            None => {
                let i = next.iab[1][0];
                prefix.push(Layer::Start(i));
            }
            Some(prev) => {
                let mut map = vec![0usize; n];
                for (class, targets) in prev.iab.iter().zip(&next.iab) {
                    for &r in class {
                        map[r] = targets[0];
                    }
                }
                let f = LayerFunction::new(map)?;
                if next.x.compose(&f) != prev.x || next.y.compose(&f) != prev.y {
                    return Err(Error::Invariant(format!("level {player}: layer does not carry the previous pair")));
                }
                prefix.push(Layer::Map(f));
            }
        }
        board.push(cell.message);
        pair = Some(next);
    }

    let pair = pair.expect("k >= 2");
    let Some(Layer::Start(i)) = prefix.first().cloned() else {
        return Err(Error::Invariant("first layer is not a start vertex".into()));
    };
    let middles: Vec<LayerFunction> = prefix[1..]
        .iter()
        .map(|l| match l {
            Layer::Map(f) => f.clone(),
            _ => unreachable!("middle layers are maps"),
        })
        .collect();
    let inst0: Instance = MpjInstance::new(i, middles.clone(), pair.x)?.into();
    let inst1: Instance = MpjInstance::new(i, middles, pair.y)?.into();
    if inst0.eval() != Answer::Bit(false) || inst1.eval() != Answer::Bit(true) {
        return Err(Error::Invariant("fooling instances do not have answers 0 and 1".into()));
    }
    Ok(FoolingPair { inst0, inst1, prefix: board })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoolingReport {
    /// Players `1..k` wrote the same messages on both instances.
    pub prefix_equal: bool,
    pub outputs: [Answer; 2],
    pub expected: [Answer; 2],
    pub errors: usize,
    pub degenerate: bool,
}

impl FoolingReport {
    pub fn exactly_one_error(&self) -> bool {
        self.errors == 1
    }
}

/// Replays both instances through the runtime and reports what happened.
pub fn verify_fooling(protocol: &Protocol, inst0: &Instance, inst1: &Instance) -> Result<FoolingReport> {
    check_attackable(protocol, inst0.n())?;
    let k = inst0.k();
    if inst1.k() != k || inst1.n() != inst0.n() || (1..k).any(|h| inst0.layer(h) != inst1.layer(h)) {
        return Err(Error::Precondition("instances must differ only in the last layer".into()));
    }
    let t0 = run_replayed(protocol, inst0)?;
    let t1 = run_replayed(protocol, inst1)?;
    let prefix_equal = t0.messages()[..k - 1] == t1.messages()[..k - 1];
    let outputs = [t0.output(), t1.output()];
    let expected = [inst0.eval(), inst1.eval()];
    let errors = outputs.iter().zip(&expected).filter(|(o, e)| o != e).count();
    Ok(FoolingReport { prefix_equal, outputs, expected, errors, degenerate: inst0 == inst1 })
}
