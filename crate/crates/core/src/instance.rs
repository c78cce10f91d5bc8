//! Pointer-jumping inputs, the brute-force evaluator, and the prefix/suffix
//! compositions that protocols and the adversary are built on.
//!
//! Vertices are stored 0-based. Everything that leaves the process (JSON,
//! `Display`, CLI output) is 1-based, so `[n] = {1, ..., n}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A total function `[n] -> [n]`: one layer of edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LayerFunction {
    map: Vec<usize>,
}

impl LayerFunction {
    /// Builds a layer from 0-based images.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::Malformed("layer of width 0".into()));
        }
        if let Some(&v) = map.iter().find(|&&v| v >= n) {
            return Err(Error::OutOfRange { value: v + 1, n });
        }
        Ok(Self { map })
    }

    /// Builds a layer from 1-based images, as written in files and on the command line.
    pub fn from_one_based(values: &[usize]) -> Result<Self> {
        let n = values.len();
        let map = values
            .iter()
            .map(|&v| {
                if v == 0 || v > n {
                    Err(Error::OutOfRange { value: v, n })
                } else {
                    Ok(v - 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(map)
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    pub fn constant(n: usize, value: usize) -> Self {
        assert!(value < n, "constant value out of range");
        Self { map: vec![value; n] }
    }

    pub fn width(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn apply(&self, r: usize) -> usize {
        self.map[r]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.map.iter().map(|v| v + 1).collect()
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.map.len()];
        for &v in &self.map {
            if std::mem::replace(&mut seen[v], true) {
                return false;
            }
        }
        true
    }

    /// `self ∘ inner`, i.e. `r -> self(inner(r))`.
    pub fn after(&self, inner: &LayerFunction) -> LayerFunction {
        debug_assert_eq!(self.width(), inner.width());
        LayerFunction {
            map: inner.map.iter().map(|&r| self.map[r]).collect(),
        }
    }

    pub fn inverse(&self) -> Option<LayerFunction> {
        let mut inv = vec![usize::MAX; self.map.len()];
        for (r, &v) in self.map.iter().enumerate() {
            if inv[v] != usize::MAX {
                return None;
            }
            inv[v] = r;
        }
        Some(LayerFunction { map: inv })
    }

    /// Elements of `f^{-1}(s)`, ascending.
    pub fn fiber(&self, s: usize) -> Vec<usize> {
        (0..self.map.len()).filter(|&r| self.map[r] == s).collect()
    }

    /// `|f^{-1}(s)|` for every `s`.
    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.map.len()];
        for &v in &self.map {
            sizes[v] += 1;
        }
        sizes
    }
}

impl fmt::Display for LayerFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (idx, v) in self.map.iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, ")")
    }
}

/// A string in `{0,1}^n`. The leftmost character of the text form is `x_1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    bits: Vec<bool>,
}

impl BitVector {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Malformed("bit vector of width 0".into()));
        }
        Ok(Self { bits })
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![false; n] }
    }

    /// The `n`-bit string whose big-endian value is `value` (`x_1` is the top bit).
    pub fn from_value(n: usize, value: u64) -> Self {
        debug_assert!(n <= 64);
        Self {
            bits: (0..n).map(|r| (value >> (n - 1 - r)) & 1 == 1).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn get(&self, r: usize) -> bool {
        self.bits[r]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> BitVector {
        BitVector {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// `x ∘ f`, i.e. `r -> x(f(r))`.
    pub fn compose(&self, f: &LayerFunction) -> BitVector {
        debug_assert_eq!(self.width(), f.width());
        BitVector {
            bits: f.as_slice().iter().map(|&r| self.bits[r]).collect(),
        }
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Malformed(format!("bit string contains {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        BitVector::new(bits)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A subset of `[n]` stored as its indicator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    members: Vec<bool>,
}

impl Subset {
    pub fn full(n: usize) -> Self {
        Self { members: vec![true; n] }
    }

    pub fn empty(n: usize) -> Self {
        Self { members: vec![false; n] }
    }

    /// From 0-based members.
    pub fn from_members(n: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for r in members {
            s.members[r] = true;
        }
        s
    }

    pub fn from_indicator(members: Vec<bool>) -> Self {
        Self { members }
    }

    pub fn width(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn contains(&self, r: usize) -> bool {
        self.members[r]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&b| b)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(r, &b)| b.then_some(r))
    }

    pub fn indicator(&self) -> &[bool] {
        &self.members
    }

    /// Position of `r` among the members in ascending order.
    pub fn rank(&self, r: usize) -> Option<usize> {
        self.contains(r)
            .then(|| self.members[..r].iter().filter(|&&b| b).count())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Boolean pointer jumping: the last layer is a bit string.
    #[serde(rename = "mpj")]
    Mpj,
    /// Vertex-valued pointer jumping: the last layer is a function.
    #[serde(rename = "mpjhat")]
    MpjHat,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Mpj => "mpj",
            Variant::MpjHat => "mpjhat",
        })
    }
}

/// The value a protocol must output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Answer {
    Bit(bool),
    /// 0-based vertex of the last layer.
    Vertex(usize),
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Bit(b) => write!(f, "{}", u8::from(*b)),
            Answer::Vertex(v) => write!(f, "{}", v + 1),
        }
    }
}

/// One input component, i.e. what is written on one forehead.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Layer {
    /// Layer 1: the start vertex `i`.
    Start(usize),
    /// A middle layer, or the last layer of the vertex-valued problem.
    Map(LayerFunction),
    /// The last layer `x` of the Boolean problem.
    Bits(BitVector),
}

/// `(i, f_2, ..., f_{k-1}, x)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MpjInstance {
    i: usize,
    middles: Vec<LayerFunction>,
    x: BitVector,
}

impl MpjInstance {
    pub fn new(i: usize, middles: Vec<LayerFunction>, x: BitVector) -> Result<Self> {
        let n = x.width();
        if i >= n {
            return Err(Error::OutOfRange { value: i + 1, n });
        }
        for f in &middles {
            if f.width() != n {
                return Err(Error::WidthMismatch { expected: n, found: f.width() });
            }
        }
        Ok(Self { i, middles, x })
    }

    pub fn n(&self) -> usize {
        self.x.width()
    }

    pub fn k(&self) -> usize {
        self.middles.len() + 2
    }

    pub fn start(&self) -> usize {
        self.i
    }

    pub fn middles(&self) -> &[LayerFunction] {
        &self.middles
    }

    /// `f_j` for `2 <= j <= k-1`.
    pub fn f(&self, j: usize) -> &LayerFunction {
        &self.middles[j - 2]
    }

    pub fn x(&self) -> &BitVector {
        &self.x
    }

    /// `x ∘ f_{k-1} ∘ ... ∘ f_2 (i)` by literal left-to-right pointer following.
    pub fn eval(&self) -> bool {
        let v = self.middles.iter().fold(self.i, |v, f| f.apply(v));
        self.x.get(v)
    }
}

/// `(i, f_2, ..., f_k)` plus which layers are required to be permutations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MpjHatInstance {
    i: usize,
    layers: Vec<LayerFunction>,
    perm_mask: Vec<bool>,
}

impl MpjHatInstance {
    pub fn new(i: usize, layers: Vec<LayerFunction>, perm_mask: Vec<bool>) -> Result<Self> {
        let Some(first) = layers.first() else {
            return Err(Error::Malformed("vertex-valued instance needs k >= 2".into()));
        };
        let n = first.width();
        if i >= n {
            return Err(Error::OutOfRange { value: i + 1, n });
        }
        if perm_mask.len() != layers.len() {
            return Err(Error::Malformed(format!(
                "perm_mask has {} entries for {} layers",
                perm_mask.len(),
                layers.len()
            )));
        }
        for (idx, f) in layers.iter().enumerate() {
            if f.width() != n {
                return Err(Error::WidthMismatch { expected: n, found: f.width() });
            }
            if perm_mask[idx] && !f.is_permutation() {
                return Err(Error::Malformed(format!("layer f_{} must be a permutation", idx + 2)));
            }
        }
        Ok(Self { i, layers, perm_mask })
    }

    /// Every layer flagged as a permutation (and checked to be one).
    pub fn all_perm(i: usize, layers: Vec<LayerFunction>) -> Result<Self> {
        let mask = vec![true; layers.len()];
        Self::new(i, layers, mask)
    }

    /// No permutation requirement on any layer.
    pub fn unconstrained(i: usize, layers: Vec<LayerFunction>) -> Result<Self> {
        let mask = vec![false; layers.len()];
        Self::new(i, layers, mask)
    }

    pub fn n(&self) -> usize {
        self.layers[0].width()
    }

    pub fn k(&self) -> usize {
        self.layers.len() + 1
    }

    pub fn start(&self) -> usize {
        self.i
    }

    pub fn layers(&self) -> &[LayerFunction] {
        &self.layers
    }

    /// `f_j` for `2 <= j <= k`.
    pub fn f(&self, j: usize) -> &LayerFunction {
        &self.layers[j - 2]
    }

    pub fn perm_mask(&self) -> &[bool] {
        &self.perm_mask
    }

    pub fn eval(&self) -> usize {
        self.layers.iter().fold(self.i, |v, f| f.apply(v))
    }
}

/// Either problem variant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instance {
    Mpj(MpjInstance),
    Hat(MpjHatInstance),
}

impl From<MpjInstance> for Instance {
    fn from(inst: MpjInstance) -> Self {
        Instance::Mpj(inst)
    }
}

impl From<MpjHatInstance> for Instance {
    fn from(inst: MpjHatInstance) -> Self {
        Instance::Hat(inst)
    }
}

impl Instance {
    pub fn variant(&self) -> Variant {
        match self {
            Instance::Mpj(_) => Variant::Mpj,
            Instance::Hat(_) => Variant::MpjHat,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Instance::Mpj(m) => m.n(),
            Instance::Hat(h) => h.n(),
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Instance::Mpj(m) => m.k(),
            Instance::Hat(h) => h.k(),
        }
    }

    pub fn start(&self) -> usize {
        match self {
            Instance::Mpj(m) => m.start(),
            Instance::Hat(h) => h.start(),
        }
    }

    /// The brute-force answer.
    pub fn eval(&self) -> Answer {
        match self {
            Instance::Mpj(m) => Answer::Bit(m.eval()),
            Instance::Hat(h) => Answer::Vertex(h.eval()),
        }
    }

    /// Input component `h` (`1 <= h <= k`): the data on player `h`'s forehead.
    pub fn layer(&self, h: usize) -> Layer {
        let k = self.k();
        assert!((1..=k).contains(&h), "layer index {h} outside 1..={k}");
        match self {
            _ if h == 1 => Layer::Start(self.start()),
            Instance::Mpj(m) if h == k => Layer::Bits(m.x.clone()),
            Instance::Mpj(m) => Layer::Map(m.f(h).clone()),
            Instance::Hat(hat) => Layer::Map(hat.f(h).clone()),
        }
    }

    /// All `k` input components in order.
    pub fn components(&self) -> Vec<Layer> {
        (1..=self.k()).map(|h| self.layer(h)).collect()
    }

    /// Inverse of [`Instance::components`]. `perm_mask` is only used by the
    /// vertex-valued variant.
    pub fn from_components(
        variant: Variant,
        components: Vec<Layer>,
        perm_mask: Option<Vec<bool>>,
    ) -> Result<Self> {
        let k = components.len();
        if k < 2 {
            return Err(Error::Malformed(format!("need k >= 2 components, got {k}")));
        }
        let mut iter = components.into_iter();
        let Some(Layer::Start(i)) = iter.next() else {
            return Err(Error::Malformed("component 1 must be the start vertex".into()));
        };
        let mut maps = Vec::with_capacity(k - 1);
        let mut last_bits = None;
        for (pos, layer) in iter.enumerate() {
            let h = pos + 2;
            match layer {
                Layer::Map(f) => maps.push(f),
                Layer::Bits(x) if variant == Variant::Mpj && h == k => last_bits = Some(x),
                _ => return Err(Error::Malformed(format!("component {h} has the wrong kind"))),
            }
        }
        match variant {
            Variant::Mpj => {
                let x = last_bits
                    .ok_or_else(|| Error::Malformed("last component must be a bit string".into()))?;
                Ok(MpjInstance::new(i, maps, x)?.into())
            }
            Variant::MpjHat => {
                let mask = perm_mask.unwrap_or_else(|| vec![false; maps.len()]);
                Ok(MpjHatInstance::new(i, maps, mask)?.into())
            }
        }
    }

    /// The permutation requirements of the mapped layers (`f_2` first).
    pub fn perm_mask(&self) -> Vec<bool> {
        match self {
            Instance::Mpj(m) => vec![false; m.middles.len()],
            Instance::Hat(h) => h.perm_mask.clone(),
        }
    }

    pub fn derive_views(&self) -> DerivedViews {
        derive_views(self)
    }
}

/// Prefix pointers `î_j` and suffix compositions `x̂_j` / `f̂_j` of one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedViews {
    k: usize,
    /// `î_2, ..., î_k`.
    ihat: Vec<usize>,
    /// Boolean problem: `x̂_1, ..., x̂_{k-1}`.
    xhat: Vec<BitVector>,
    /// Vertex-valued problem: `f̂_1, ..., f̂_k` with `f̂_k` the identity.
    fhat: Vec<LayerFunction>,
}

impl DerivedViews {
    pub fn k(&self) -> usize {
        self.k
    }

    /// `î_j` for `2 <= j <= k`.
    pub fn ihat(&self, j: usize) -> usize {
        self.ihat[j - 2]
    }

    /// `x̂_j` for `1 <= j <= k-1`; `None` for the vertex-valued problem.
    pub fn xhat(&self, j: usize) -> Option<&BitVector> {
        self.xhat.get(j.checked_sub(1)?)
    }

    /// `f̂_j` for `1 <= j <= k`; `None` for the Boolean problem.
    pub fn fhat(&self, j: usize) -> Option<&LayerFunction> {
        self.fhat.get(j.checked_sub(1)?)
    }
}

pub fn derive_views(inst: &Instance) -> DerivedViews {
    let k = inst.k();
    let mut ihat = Vec::with_capacity(k - 1);
    ihat.push(inst.start());
    for j in 2..k {
        let prev = ihat[j - 2];
        let next = match inst {
            Instance::Mpj(m) => m.f(j).apply(prev),
            Instance::Hat(h) => h.f(j).apply(prev),
        };
        ihat.push(next);
    }
    match inst {
        Instance::Mpj(m) => {
            // x̂_{k-1} = x, x̂_j = x̂_{j+1} ∘ f_{j+1}
            let mut xhat = vec![m.x.clone(); k - 1];
            for j in (1..k - 1).rev() {
                xhat[j - 1] = xhat[j].compose(m.f(j + 1));
            }
            DerivedViews { k, ihat, xhat, fhat: Vec::new() }
        }
        Instance::Hat(h) => {
            let n = h.n();
            let mut fhat = vec![LayerFunction::identity(n); k];
            for j in (1..k).rev() {
                fhat[j - 1] = fhat[j].after(h.f(j + 1));
            }
            DerivedViews { k, ihat, xhat: Vec::new(), fhat }
        }
    }
}

pub fn eval_mpj(inst: &MpjInstance) -> bool {
    inst.eval()
}

pub fn eval_mpj_hat(inst: &MpjHatInstance) -> usize {
    inst.eval()
}

/// The 3-player instance `(î_j, f_j, x̂_j)` embedded at level `j`, `1 < j < k`.
pub fn embed_three(inst: &MpjInstance, j: usize) -> Result<MpjInstance> {
    let k = inst.k();
    if j <= 1 || j >= k {
        return Err(Error::InvalidParameter(format!("embedding level {j} outside 2..={}", k - 1)));
    }
    let ihat = inst.middles[..j - 2].iter().fold(inst.i, |v, f| f.apply(v));
    let xhat = inst.middles[j - 1..]
        .iter()
        .rev()
        .fold(inst.x.clone(), |x, f| x.compose(f));
    MpjInstance::new(ihat, vec![inst.f(j).clone()], xhat)
}

/// Number of bits needed for a vertex of `[n]`: `ceil(log2 n)`.
pub fn vertex_bits(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (n - 1).ilog2() as usize + 1
    }
}
