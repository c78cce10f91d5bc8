//! Exhaustive enumeration and seeded sampling of instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{BitVector, Instance, Layer, LayerFunction, Variant};

/// Describes a family of instances: width, number of players, variant, and
/// which mapped layers (`f_2` first) must be permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceShape {
    pub n: usize,
    pub k: usize,
    pub variant: Variant,
    pub perm_mask: Vec<bool>,
}

impl InstanceShape {
    pub fn new(n: usize, k: usize, variant: Variant, perm_mask: Vec<bool>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if k < 2 {
            return Err(Error::InvalidParameter("k must be at least 2".into()));
        }
        let expected = mapped_layers(k, variant);
        if perm_mask.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "perm mask has {} entries, {variant} with k = {k} has {expected} mapped layers",
                perm_mask.len()
            )));
        }
        Ok(Self { n, k, variant, perm_mask })
    }

    /// Boolean problem with unconstrained middle layers.
    pub fn mpj(n: usize, k: usize) -> Self {
        Self::new(n, k, Variant::Mpj, vec![false; mapped_layers(k, Variant::Mpj)])
            .expect("valid shape")
    }

    /// Vertex-valued problem with every layer a permutation.
    pub fn hat_perm(n: usize, k: usize) -> Self {
        Self::new(n, k, Variant::MpjHat, vec![true; mapped_layers(k, Variant::MpjHat)])
            .expect("valid shape")
    }

    /// Vertex-valued problem with unconstrained layers.
    pub fn hat(n: usize, k: usize) -> Self {
        Self::new(n, k, Variant::MpjHat, vec![false; mapped_layers(k, Variant::MpjHat)])
            .expect("valid shape")
    }

    /// Number of instances in the family, saturating at `u128::MAX`.
    pub fn count(&self) -> u128 {
        let n = self.n as u128;
        let functions = checked_pow(n, self.n);
        let perms = (1..=n).try_fold(1u128, |acc, v| acc.checked_mul(v));
        let mut total = Some(n);
        for &perm in &self.perm_mask {
            let per_layer = if perm { perms } else { functions };
            total = total.zip(per_layer).and_then(|(a, b)| a.checked_mul(b));
        }
        if self.variant == Variant::Mpj {
            total = total.zip(checked_pow(2, self.n)).and_then(|(a, b)| a.checked_mul(b));
        }
        total.unwrap_or(u128::MAX)
    }
}

fn mapped_layers(k: usize, variant: Variant) -> usize {
    match variant {
        Variant::Mpj => k.saturating_sub(2),
        Variant::MpjHat => k.saturating_sub(1),
    }
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base))
}

/// Every instance of `shape`, lexicographic over `(i, f_2, ..., x)` with
/// 1-based value tuples compared entrywise. Refuses when the family is larger
/// than `budget`.
pub fn enumerate_instances(shape: &InstanceShape, budget: u128) -> Result<InstanceIter> {
    let count = shape.count();
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }
    let n = shape.n;
    let mut options: Vec<Vec<Layer>> = Vec::with_capacity(shape.k);
    options.push((0..n).map(Layer::Start).collect());
    for &perm in &shape.perm_mask {
        let layers = if perm { all_permutations(n) } else { all_functions(n) };
        options.push(layers.into_iter().map(Layer::Map).collect());
    }
    if shape.variant == Variant::Mpj {
        options.push(
            (0..1u64 << n)
                .map(|v| Layer::Bits(BitVector::from_value(n, v)))
                .collect(),
        );
    }
    Ok(InstanceIter {
        variant: shape.variant,
        perm_mask: shape.perm_mask.clone(),
        cursor: vec![0; options.len()],
        options,
        remaining: count,
    })
}

pub struct InstanceIter {
    variant: Variant,
    perm_mask: Vec<bool>,
    options: Vec<Vec<Layer>>,
    cursor: Vec<usize>,
    remaining: u128,
}

impl Iterator for InstanceIter {
    type Item = Instance;

    fn next(&mut self) -> Option<Instance> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let components = self
            .cursor
            .iter()
            .zip(&self.options)
            .map(|(&c, opts)| opts[c].clone())
            .collect();
        // odometer, last component fastest
        for pos in (0..self.cursor.len()).rev() {
            self.cursor[pos] += 1;
            if self.cursor[pos] < self.options[pos].len() {
                break;
            }
            self.cursor[pos] = 0;
        }
        let mask = (self.variant == Variant::MpjHat).then(|| self.perm_mask.clone());
        Some(
            Instance::from_components(self.variant, components, mask)
                .expect("enumerated components are well formed"),
        )
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (r, Some(r))
    }
}

/// All `n^n` functions in lexicographic order of their value tuples.
pub fn all_functions(n: usize) -> Vec<LayerFunction> {
    let mut out = Vec::new();
    let mut map = vec![0usize; n];
    loop {
        out.push(LayerFunction::new(map.clone()).expect("in range"));
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            map[pos] += 1;
            if map[pos] < n {
                break;
            }
            map[pos] = 0;
        }
    }
}

/// All `n!` permutations in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<LayerFunction> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(LayerFunction::new(p.clone()).expect("in range"));
        // next permutation
        let Some(pivot) = (0..n.saturating_sub(1)).rev().find(|&a| p[a] < p[a + 1]) else {
            return out;
        };
        let succ = (pivot + 1..n).rev().find(|&b| p[b] > p[pivot]).expect("exists");
        p.swap(pivot, succ);
        p[pivot + 1..].reverse();
    }
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LayerFunction {
    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(rng);
    LayerFunction::new(map).expect("in range")
}

pub fn random_function<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LayerFunction {
    LayerFunction::new((0..n).map(|_| rng.gen_range(0..n)).collect()).expect("in range")
}

pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitVector {
    BitVector::new((0..n).map(|_| rng.gen()).collect()).expect("n > 0")
}

/// Draws one instance of `shape` from `rng`.
pub fn sample_instance_with<R: Rng + ?Sized>(shape: &InstanceShape, rng: &mut R) -> Instance {
    let n = shape.n;
    let mut components = Vec::with_capacity(shape.k);
    components.push(Layer::Start(rng.gen_range(0..n)));
    for &perm in &shape.perm_mask {
        let f = if perm { random_permutation(n, rng) } else { random_function(n, rng) };
        components.push(Layer::Map(f));
    }
    if shape.variant == Variant::Mpj {
        components.push(Layer::Bits(random_bits(n, rng)));
    }
    let mask = (shape.variant == Variant::MpjHat).then(|| shape.perm_mask.clone());
    Instance::from_components(shape.variant, components, mask).expect("sampled components are well formed")
}

/// Deterministic in `seed`.
pub fn sample_instance(shape: &InstanceShape, seed: u64) -> Instance {
    sample_instance_with(shape, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `count` instances drawn from one seeded stream.
pub fn sample_instances(shape: &InstanceShape, seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sample_instance_with(shape, &mut rng)).collect()
}
