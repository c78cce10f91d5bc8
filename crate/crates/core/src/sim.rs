//! One-way blackboard runtime.
//!
//! Players speak once each, in order `1..=k`. Player `j` is handed a
//! [`PlayerView`] holding only what its [`ViewKind`] allows, so a message
//! function cannot read its own forehead (or, when collapsing, the individual
//! layers ahead of it) because that data is never put in the view.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::generate::{random_bits, random_function, random_permutation};
use crate::instance::{
    vertex_bits, Answer, BitVector, DerivedViews, Instance, Layer, LayerFunction, Variant,
};

/// A blackboard message. `parts` records the lengths of the logical parts a
/// sender wrote; it is debug framing only and never counted as communication.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Message {
    bits: Vec<bool>,
    parts: Vec<usize>,
}

impl Message {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits, parts: Vec::new() }
    }

    /// Big-endian, exactly `width` bits.
    pub fn from_uint(value: usize, width: usize) -> Self {
        let mut m = Self::new();
        m.push_uint(value, width);
        m
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn push_bit(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn push_bits(&mut self, bits: &[bool]) {
        self.bits.extend_from_slice(bits);
    }

    pub fn push_uint(&mut self, value: usize, width: usize) {
        debug_assert!(width >= usize::BITS as usize || value >> width == 0, "{value} does not fit in {width} bits");
        for shift in (0..width).rev() {
            self.bits.push((value >> shift) & 1 == 1);
        }
    }

    /// Closes the current part: everything pushed since the previous call.
    pub fn end_part(&mut self) {
        let framed: usize = self.parts.iter().sum();
        self.parts.push(self.bits.len() - framed);
    }

    pub fn reader(&self, player: usize) -> BitReader<'_> {
        BitReader { bits: &self.bits, pos: 0, player }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Sequential reader over a message; `player` is the sender, for errors.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
    player: usize,
}

impl<'a> BitReader<'a> {
    fn short(&self, wanted: usize) -> Error {
        Error::BadMessage {
            player: self.player,
            reason: format!("needed {wanted} bits at offset {}, message has {}", self.pos, self.bits.len()),
        }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn take(&mut self, len: usize) -> Result<&'a [bool]> {
        if self.remaining() < len {
            return Err(self.short(len));
        }
        let out = &self.bits[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    pub fn skip(&mut self, len: usize) -> Result<()> {
        self.take(len).map(|_| ())
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        Ok(self.take(1)?[0])
    }

    pub fn read_uint(&mut self, width: usize) -> Result<usize> {
        Ok(self.take(width)?.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b)))
    }

    pub fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::BadMessage {
                player: self.player,
                reason: format!("{} trailing bits", self.remaining()),
            });
        }
        Ok(())
    }
}

/// What each player may look at besides the blackboard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViewKind {
    /// Every layer except the player's own.
    FullOneWay,
    /// The layers behind the player plus the composition of the layers ahead.
    Collapsing,
    /// `î_j` plus the composition of the layers ahead.
    ConservativeCollapsing,
}

impl ViewKind {
    pub fn name(self) -> &'static str {
        match self {
            ViewKind::FullOneWay => "full",
            ViewKind::Collapsing => "collapsing",
            ViewKind::ConservativeCollapsing => "conservative-collapsing",
        }
    }
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Composition of all layers ahead of a player.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Suffix {
    /// `x̂_j` for the Boolean problem.
    Bits(BitVector),
    /// `f̂_j` for the vertex-valued problem.
    Map(LayerFunction),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum ViewData {
    Full { layers: Vec<Option<Layer>> },
    Collapsing { prefix: Vec<Layer>, suffix: Option<Suffix> },
    Conservative { pointer: Option<usize>, suffix: Option<Suffix> },
}

/// Everything player `j` is allowed to know.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerView<'a> {
    player: usize,
    n: usize,
    k: usize,
    variant: Variant,
    data: ViewData,
    board: &'a [Message],
}

impl<'a> PlayerView<'a> {
    /// Collapsing view built from parts, for drivers (such as the adversary)
    /// that explore message functions without complete instances.
    /// `prefix` holds layers `1..j`; `suffix` is required unless this is the
    /// last player of the Boolean problem.
    pub fn collapsing(
        variant: Variant,
        n: usize,
        k: usize,
        player: usize,
        prefix: Vec<Layer>,
        suffix: Option<Suffix>,
        board: &'a [Message],
    ) -> Result<Self> {
        if !(1..=k).contains(&player) || prefix.len() != player - 1 || board.len() != player - 1 {
            return Err(Error::InvalidParameter(format!(
                "collapsing view for player {player} of {k} needs {} prefix layers and messages",
                player.saturating_sub(1)
            )));
        }
        let needs_suffix = !(variant == Variant::Mpj && player == k);
        if needs_suffix != suffix.is_some() {
            return Err(Error::InvalidParameter("suffix presence does not match player".into()));
        }
        Ok(Self { player, n, k, variant, data: ViewData::Collapsing { prefix, suffix }, board })
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn kind(&self) -> ViewKind {
        match self.data {
            ViewData::Full { .. } => ViewKind::FullOneWay,
            ViewData::Collapsing { .. } => ViewKind::Collapsing,
            ViewData::Conservative { .. } => ViewKind::ConservativeCollapsing,
        }
    }

    /// Messages of players `1..j`, in order.
    pub fn board(&self) -> &'a [Message] {
        self.board
    }

    /// Message of player `h < j`.
    pub fn message(&self, h: usize) -> &'a Message {
        &self.board[h - 1]
    }

    fn hidden(&self, what: &'static str) -> Error {
        Error::NotVisible { player: self.player, what }
    }

    /// Input component `h`, if this view exposes it.
    pub fn layer(&self, h: usize) -> Result<&Layer> {
        match &self.data {
            ViewData::Full { layers } => layers
                .get(h.wrapping_sub(1))
                .and_then(Option::as_ref)
                .ok_or_else(|| self.hidden("that layer")),
            ViewData::Collapsing { prefix, .. } => {
                prefix.get(h.wrapping_sub(1)).ok_or_else(|| self.hidden("that layer"))
            }
            ViewData::Conservative { .. } => Err(self.hidden("individual layers")),
        }
    }

    pub fn start(&self) -> Result<usize> {
        match self.layer(1)? {
            Layer::Start(i) => Ok(*i),
            _ => Err(Error::Invariant("layer 1 is not a start vertex".into())),
        }
    }

    /// `f_h` for a mapped layer this view exposes.
    pub fn map(&self, h: usize) -> Result<&LayerFunction> {
        match self.layer(h)? {
            Layer::Map(f) => Ok(f),
            _ => Err(Error::Invariant(format!("layer {h} is not a function"))),
        }
    }

    pub fn bits(&self) -> Result<&BitVector> {
        match self.layer(self.k)? {
            Layer::Bits(x) => Ok(x),
            _ => Err(Error::Invariant("last layer is not a bit string".into())),
        }
    }

    /// `î_j`, the vertex reached after following layers `1..j`.
    pub fn pointer(&self) -> Result<usize> {
        if self.player < 2 {
            return Err(self.hidden("a pointer (the start vertex is on its forehead)"));
        }
        if let ViewData::Conservative { pointer, .. } = &self.data {
            return pointer.ok_or_else(|| self.hidden("a pointer"));
        }
        let mut v = self.start()?;
        for h in 2..self.player {
            v = self.map(h)?.apply(v);
        }
        Ok(v)
    }

    /// Composition of layers `j+1..k` (`x̂_j` or `f̂_j`).
    pub fn suffix(&self) -> Result<Suffix> {
        match &self.data {
            ViewData::Collapsing { suffix, .. } | ViewData::Conservative { suffix, .. } => {
                suffix.clone().ok_or_else(|| self.hidden("a suffix composition"))
            }
            ViewData::Full { .. } => {
                let j = self.player;
                match self.variant {
                    Variant::Mpj => {
                        if j == self.k {
                            return Err(self.hidden("a suffix composition"));
                        }
                        let mut x = self.bits()?.clone();
                        for h in (j + 1..self.k).rev() {
                            x = x.compose(self.map(h)?);
                        }
                        Ok(Suffix::Bits(x))
                    }
                    Variant::MpjHat => {
                        let mut f = LayerFunction::identity(self.n);
                        for h in (j + 1..=self.k).rev() {
                            f = f.after(self.map(h)?);
                        }
                        Ok(Suffix::Map(f))
                    }
                }
            }
        }
    }

    pub fn suffix_bits(&self) -> Result<BitVector> {
        match self.suffix()? {
            Suffix::Bits(x) => Ok(x),
            Suffix::Map(_) => Err(Error::Invariant("expected a Boolean suffix".into())),
        }
    }

    pub fn suffix_map(&self) -> Result<LayerFunction> {
        match self.suffix()? {
            Suffix::Map(f) => Ok(f),
            Suffix::Bits(_) => Err(Error::Invariant("expected a function suffix".into())),
        }
    }
}

/// Builds player `j`'s view of `inst` under `kind`.
pub fn player_view<'a>(
    kind: ViewKind,
    inst: &Instance,
    derived: &DerivedViews,
    j: usize,
    board: &'a [Message],
) -> PlayerView<'a> {
    let k = inst.k();
    let suffix = || match inst.variant() {
        Variant::Mpj => derived.xhat(j).cloned().map(Suffix::Bits),
        Variant::MpjHat => derived.fhat(j).cloned().map(Suffix::Map),
    };
    let data = match kind {
        ViewKind::FullOneWay => ViewData::Full {
            layers: (1..=k).map(|h| (h != j).then(|| inst.layer(h))).collect(),
        },
        ViewKind::Collapsing => ViewData::Collapsing {
            prefix: (1..j).map(|h| inst.layer(h)).collect(),
            suffix: suffix(),
        },
        ViewKind::ConservativeCollapsing => ViewData::Conservative {
            pointer: (j >= 2).then(|| derived.ihat(j)),
            suffix: suffix(),
        },
    };
    PlayerView { player: j, n: inst.n(), k, variant: inst.variant(), data, board }
}

pub type PlayerFn = Arc<dyn Fn(&PlayerView<'_>) -> Result<Message> + Send + Sync>;

/// Wraps a closure as a player message function.
pub fn player_fn<F>(f: F) -> PlayerFn
where
    F: Fn(&PlayerView<'_>) -> Result<Message> + Send + Sync + 'static,
{
    Arc::new(f)
}

/// A deterministic one-way protocol: one message function per player.
#[derive(Clone)]
pub struct Protocol {
    name: String,
    variant: Variant,
    view: ViewKind,
    width: Option<usize>,
    declared_max_bits: Option<usize>,
    players: Vec<PlayerFn>,
}

impl fmt::Debug for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Protocol")
            .field("name", &self.name)
            .field("k", &self.k())
            .field("variant", &self.variant)
            .field("view", &self.view)
            .field("width", &self.width)
            .field("declared_max_bits", &self.declared_max_bits)
            .finish()
    }
}

impl Protocol {
    pub fn new(name: impl Into<String>, variant: Variant, view: ViewKind, players: Vec<PlayerFn>) -> Self {
        assert!(players.len() >= 2, "a protocol needs at least two players");
        Self {
            name: name.into(),
            variant,
            view,
            width: None,
            declared_max_bits: None,
            players,
        }
    }

    /// Restricts the protocol to instances of width `n`.
    pub fn with_width(mut self, n: usize) -> Self {
        self.width = Some(n);
        self
    }

    /// Claims that players `1..k` never send more than `t` bits each.
    pub fn with_declared_max_bits(mut self, t: usize) -> Self {
        self.declared_max_bits = Some(t);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.players.len()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn view(&self) -> ViewKind {
        self.view
    }

    pub fn width(&self) -> Option<usize> {
        self.width
    }

    pub fn declared_max_bits(&self) -> Option<usize> {
        self.declared_max_bits
    }

    /// Player `view.player()`'s message. Enforces the declared bound.
    pub fn message(&self, view: &PlayerView<'_>) -> Result<Message> {
        let j = view.player();
        let msg = (self.players[j - 1])(view)?;
        if let Some(t) = self.declared_max_bits {
            if j < self.k() && msg.len() > t {
                return Err(Error::BadMessage {
                    player: j,
                    reason: format!("{} bits exceeds the declared bound {t}", msg.len()),
                });
            }
        }
        Ok(msg)
    }

    fn check_fits(&self, inst: &Instance) -> Result<()> {
        if inst.k() != self.k() {
            return Err(Error::Mismatch(format!("protocol has {} players, instance has k = {}", self.k(), inst.k())));
        }
        if inst.variant() != self.variant {
            return Err(Error::Mismatch(format!("protocol solves {}, instance is {}", self.variant, inst.variant())));
        }
        if let Some(n) = self.width {
            if inst.n() != n {
                return Err(Error::Mismatch(format!("protocol is built for n = {n}, instance has n = {}", inst.n())));
            }
        }
        Ok(())
    }
}

/// Messages in speaking order and the decoded output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    messages: Vec<Message>,
    output: Answer,
}

impl Transcript {
    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn output(&self) -> Answer {
        self.output
    }

    pub fn per_player_bits(&self) -> Vec<usize> {
        self.messages.iter().map(Message::len).collect()
    }

    /// All bits written, including the final output message.
    pub fn total_cost(&self) -> usize {
        self.messages.iter().map(Message::len).sum()
    }

    /// Bits written by players `1..k`.
    pub fn non_output_cost(&self) -> usize {
        self.messages[..self.messages.len() - 1].iter().map(Message::len).sum()
    }
}

/// Reads the answer from the last message: one bit for the Boolean problem,
/// `ceil(log2 n)` big-endian bits holding `answer - 1` otherwise.
pub fn decode_output(variant: Variant, n: usize, k: usize, msg: &Message) -> Result<Answer> {
    let bad = |reason: String| Error::BadMessage { player: k, reason };
    match variant {
        Variant::Mpj => {
            if msg.len() != 1 {
                return Err(bad(format!("output must be 1 bit, got {}", msg.len())));
            }
            Ok(Answer::Bit(msg.bits()[0]))
        }
        Variant::MpjHat => {
            let width = vertex_bits(n);
            if msg.len() != width {
                return Err(bad(format!("output must be {width} bits, got {}", msg.len())));
            }
            let v = msg.reader(k).read_uint(width)?;
            if v >= n {
                return Err(bad(format!("output {} outside [n]", v + 1)));
            }
            Ok(Answer::Vertex(v))
        }
    }
}

/// Encodes an answer the way [`decode_output`] reads it.
pub fn encode_output(n: usize, answer: Answer) -> Message {
    match answer {
        Answer::Bit(b) => Message::from_bits(vec![b]),
        Answer::Vertex(v) => Message::from_uint(v, vertex_bits(n)),
    }
}

/// Runs the protocol once: players `1..=k` in order, each seeing only its view.
pub fn run(protocol: &Protocol, inst: &Instance) -> Result<Transcript> {
    protocol.check_fits(inst)?;
    let derived = inst.derive_views();
    let k = inst.k();
    let mut board: Vec<Message> = Vec::with_capacity(k);
    for j in 1..=k {
        let msg = {
            let view = player_view(protocol.view, inst, &derived, j, &board);
            protocol.message(&view)?
        };
        board.push(msg);
    }
    let output = decode_output(inst.variant(), inst.n(), k, &board[k - 1])?;
    Ok(Transcript { messages: board, output })
}

/// Runs twice and fails if any message differs.
pub fn run_replayed(protocol: &Protocol, inst: &Instance) -> Result<Transcript> {
    let first = run(protocol, inst)?;
    let second = run(protocol, inst)?;
    if let Some(j) = (0..first.messages.len()).find(|&j| first.messages[j] != second.messages[j]) {
        return Err(Error::Nondeterministic { player: j + 1 });
    }
    Ok(first)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureKind {
    WrongOutput(Answer),
    Error(Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub instance: Instance,
    pub expected: Answer,
    pub kind: FailureKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checked: usize,
    pub failures: Vec<Failure>,
    /// Largest total cost, output included.
    pub worst_cost: usize,
    pub worst_non_output_cost: usize,
    pub per_player_max_bits: Vec<usize>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, t: &Transcript) {
        self.worst_cost = self.worst_cost.max(t.total_cost());
        self.worst_non_output_cost = self.worst_non_output_cost.max(t.non_output_cost());
        let bits = t.per_player_bits();
        if self.per_player_max_bits.len() < bits.len() {
            self.per_player_max_bits.resize(bits.len(), 0);
        }
        for (slot, b) in self.per_player_max_bits.iter_mut().zip(bits) {
            *slot = (*slot).max(b);
        }
    }
}

/// Runs every instance (with replay) and compares the output to the
/// brute-force answer. Protocol errors are recorded as failures.
pub fn verify<I>(protocol: &Protocol, instances: I) -> VerifyReport
where
    I: IntoIterator<Item = Instance>,
{
    let mut report = VerifyReport::default();
    for inst in instances {
        report.checked += 1;
        let expected = inst.eval();
        match run_replayed(protocol, &inst) {
            Ok(t) => {
                report.record(&t);
                if t.output() != expected {
                    report.failures.push(Failure { instance: inst, expected, kind: FailureKind::WrongOutput(t.output()) });
                }
            }
            Err(e) => report.failures.push(Failure { instance: inst, expected, kind: FailureKind::Error(e) }),
        }
    }
    report
}

/// One row of a cost table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostRow {
    pub n: usize,
    pub k: usize,
    pub protocol: String,
    pub view: ViewKind,
    pub checked: usize,
    pub failures: usize,
    pub max_cost: usize,
    pub max_non_output_cost: usize,
    pub per_player_max: Vec<usize>,
}

/// Measures worst-case costs for each `n`. `make_protocol` builds the
/// protocol for a width and `instances` supplies the inputs to run.
pub fn cost_profile<P, S, I>(n_values: &[usize], make_protocol: P, mut instances: S) -> Result<Vec<CostRow>>
where
    P: Fn(usize) -> Result<Protocol>,
    S: FnMut(usize) -> Result<I>,
    I: IntoIterator<Item = Instance>,
{
    n_values
        .iter()
        .map(|&n| {
            let protocol = make_protocol(n)?;
            let report = verify(&protocol, instances(n)?);
            Ok(CostRow {
                n,
                k: protocol.k(),
                protocol: protocol.name().to_string(),
                view: protocol.view(),
                checked: report.checked,
                failures: report.failures.len(),
                max_cost: report.worst_cost,
                max_non_output_cost: report.worst_non_output_cost,
                per_player_max: report.per_player_max_bits,
            })
        })
        .collect()
}

/// A player whose message changed when only data outside its view changed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsolationViolation {
    pub player: usize,
    pub original: Instance,
    pub mutated: Instance,
}

/// Returns a copy of `inst` that differs only in data player `j` cannot see
/// under `kind`: the forehead layer, and for collapsing views a different
/// factorization of the layers ahead with the same composition; conservative
/// views additionally get a different prefix reaching the same `î_j`.
pub fn mutate_invisible<R: Rng + ?Sized>(kind: ViewKind, inst: &Instance, j: usize, rng: &mut R) -> Instance {
    let n = inst.n();
    let k = inst.k();
    let variant = inst.variant();
    let mask = inst.perm_mask();
    let needs_perm = |h: usize| mask.get(h.wrapping_sub(2)).copied().unwrap_or(false);
    let fresh_map = |h: usize, rng: &mut R| {
        if needs_perm(h) {
            random_permutation(n, rng)
        } else {
            random_function(n, rng)
        }
    };
    let mut comps = inst.components();

    comps[j - 1] = match &comps[j - 1] {
        Layer::Start(_) => Layer::Start(rng.gen_range(0..n)),
        Layer::Bits(_) => Layer::Bits(random_bits(n, rng)),
        Layer::Map(_) => Layer::Map(fresh_map(j, rng)),
    };

    if kind != ViewKind::FullOneWay && j + 2 <= k {
        // refactor layers j+1..k keeping their composition
        let derived = inst.derive_views();
        let last = k - 1; // highest mapped layer that is replaced by a permutation
        let mut inner = LayerFunction::identity(n);
        for h in j + 1..=last {
            let g = random_permutation(n, rng);
            inner = g.after(&inner);
            comps[h - 1] = Layer::Map(g);
        }
        let inv = inner.inverse().expect("composition of permutations");
        match variant {
            Variant::Mpj => {
                let xhat = derived.xhat(j).expect("Boolean suffix");
                comps[k - 1] = Layer::Bits(xhat.compose(&inv));
            }
            Variant::MpjHat => {
                let fhat = derived.fhat(j).expect("function suffix");
                let g_last = fhat.after(&inv);
                if needs_perm(k) && !g_last.is_permutation() {
                    // cannot refactor without breaking the mask; restore
                    for h in j + 1..=k {
                        comps[h - 1] = inst.layer(h);
                    }
                } else {
                    comps[k - 1] = Layer::Map(g_last);
                }
            }
        }
    }

    if kind == ViewKind::ConservativeCollapsing && j >= 3 {
        let target = inst.derive_views().ihat(j);
        let mut v = rng.gen_range(0..n);
        comps[0] = Layer::Start(v);
        for h in 2..j - 1 {
            let g = fresh_map(h, rng);
            v = g.apply(v);
            comps[h - 1] = Layer::Map(g);
        }
        let mut g = fresh_map(j - 1, rng).as_slice().to_vec();
        if let Some(q) = g.iter().position(|&w| w == target) {
            g.swap(v, q);
        } else {
            g[v] = target;
        }
        comps[j - 2] = Layer::Map(LayerFunction::new(g).expect("in range"));
    }

    let hat_mask = (variant == Variant::MpjHat).then_some(mask);
    Instance::from_components(variant, comps, hat_mask).expect("mutation keeps the instance well formed")
}

/// One randomized isolation check: runs `inst`, mutates data that a random
/// player cannot see, and recomputes that player's message against the same
/// board. `Ok(None)` means the message was unchanged.
pub fn isolation_trial<R: Rng + ?Sized>(
    protocol: &Protocol,
    inst: &Instance,
    rng: &mut R,
) -> Result<Option<IsolationViolation>> {
    let transcript = run(protocol, inst)?;
    let j = rng.gen_range(1..=inst.k());
    let mutated = mutate_invisible(protocol.view(), inst, j, rng);
    let derived = mutated.derive_views();
    let board = &transcript.messages()[..j - 1];
    let view = player_view(protocol.view(), &mutated, &derived, j, board);
    let msg = protocol.message(&view)?;
    if msg != transcript.messages()[j - 1] {
        return Ok(Some(IsolationViolation { player: j, original: inst.clone(), mutated }));
    }
    Ok(None)
}
