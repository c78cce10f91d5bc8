//! Permutation covers.
//!
//! A set `A` of permutations *d-covers* `f: [n] -> [n]` when every `r` either
//! has some `π ∈ A` with `π(r) = f(r)`, or sits in a fiber `f^{-1}(f(r))` of
//! size greater than `d`. The `(S, d)` variant only asks this for `r ∈ S` and
//! measures fibers inside `S`.
//!
//! Both constructions split the domain into the fibers `A_i = f^{-1}(s_i)` and
//! the codomain into blocks `B_i` of equal size with `B_i ∩ Range(f) = {s_i}`,
//! then rotate within each pair: `π_ℓ(a_{i,j}) = b_{i, (j - ℓ) mod |B_i|}`,
//! where `mod` returns values in `1..=|B_i|`.

use serde::Serialize;

use crate::instance::{LayerFunction, Subset};

/// Fibers of `f` and matching codomain blocks, all 0-based and ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberPartition {
    /// `s_1 < ... < s_t`.
    pub range_values: Vec<usize>,
    /// `A_i = f^{-1}(s_i)`.
    pub fibers: Vec<Vec<usize>>,
    /// `B_i`, with `|B_i| = |A_i|` and `B_i ∩ Range(f) = {s_i}`.
    pub blocks: Vec<Vec<usize>>,
}

/// Blocks are filled in order `i = 1..t`: `s_i` first, then the smallest
/// unused values outside `Range(f)`.
pub fn build_fiber_partition(f: &LayerFunction) -> FiberPartition {
    let n = f.width();
    let sizes = f.fiber_sizes();
    let range_values: Vec<usize> = (0..n).filter(|&s| sizes[s] > 0).collect();
    let fibers: Vec<Vec<usize>> = range_values.iter().map(|&s| f.fiber(s)).collect();
    let mut spare = (0..n).filter(|&s| sizes[s] == 0);
    let blocks = range_values
        .iter()
        .zip(&fibers)
        .map(|(&s, fiber)| {
            let mut block: Vec<usize> = std::iter::once(s)
                .chain(spare.by_ref().take(fiber.len() - 1))
                .collect();
            block.sort_unstable();
            block
        })
        .collect();
    FiberPartition { range_values, fibers, blocks }
}

/// `α mod β` with result in `1..=β`.
fn wrap_mod(alpha: i64, beta: i64) -> i64 {
    let r = alpha.rem_euclid(beta);
    if r == 0 {
        beta
    } else {
        r
    }
}

/// Rotation `π_{i,ℓ}` for every pair, glued into `π_ℓ`. `fibers[i]` and
/// `blocks[i]` are already in the order the rule indexes them by.
fn rotations(n: usize, fibers: &[Vec<usize>], blocks: &[Vec<usize>], d: usize) -> Vec<LayerFunction> {
    (1..=d as i64)
        .map(|ell| {
            let mut map = vec![usize::MAX; n];
            for (fiber, block) in fibers.iter().zip(blocks) {
                let beta = block.len() as i64;
                for (pos, &a) in fiber.iter().enumerate() {
                    let j = pos as i64 + 1;
                    map[a] = block[(wrap_mod(j - ell, beta) - 1) as usize];
                }
            }
            LayerFunction::new(map).expect("rotations are total")
        })
        .collect()
}

/// A set of permutations together with what it claims to cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverSet {
    /// `π_1, ..., π_d` in construction order; duplicates are possible.
    pub perms: Vec<LayerFunction>,
    pub d: usize,
    pub target: LayerFunction,
    /// `Some(S)` for an `(S, d)`-cover.
    pub scope: Option<Subset>,
}

impl CoverSet {
    pub fn verify(&self) -> CoverCheck {
        match &self.scope {
            None => verify_d_cover(&self.perms, &self.target, self.d),
            Some(s) => verify_sd_cover(&self.perms, &self.target, s, self.d),
        }
    }

    /// Smallest `ℓ` (0-based) with `π_ℓ(r) = f(r)`.
    pub fn covering_index(&self, r: usize) -> Option<usize> {
        let target = self.target.apply(r);
        self.perms.iter().position(|p| p.apply(r) == target)
    }
}

/// `A_d(f)`: always exactly `d` permutations.
pub fn build_d_cover(f: &LayerFunction, d: usize) -> CoverSet {
    assert!(d >= 1, "d must be positive");
    let part = build_fiber_partition(f);
    let perms = rotations(f.width(), &part.fibers, &part.blocks, d);
    CoverSet { perms, d, target: f.clone(), scope: None }
}

/// `A_{S,d}(f)`: fibers list members of `S` first, blocks put `s_i` last.
pub fn build_sd_cover(f: &LayerFunction, scope: &Subset, d: usize) -> CoverSet {
    assert!(d >= 1, "d must be positive");
    assert_eq!(scope.width(), f.width());
    let part = build_fiber_partition(f);
    let fibers: Vec<Vec<usize>> = part
        .fibers
        .iter()
        .map(|fiber| {
            let (inside, outside): (Vec<usize>, Vec<usize>) = fiber.iter().partition(|&&a| scope.contains(a));
            inside.into_iter().chain(outside).collect()
        })
        .collect();
    let blocks: Vec<Vec<usize>> = part
        .blocks
        .iter()
        .zip(&part.range_values)
        .map(|(block, &s)| block.iter().copied().filter(|&b| b != s).chain(std::iter::once(s)).collect())
        .collect();
    let perms = rotations(f.width(), &fibers, &blocks, d);
    CoverSet { perms, d, target: f.clone(), scope: Some(scope.clone()) }
}

/// Outcome of a cover check; `witness` is the first uncovered point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverCheck {
    pub holds: bool,
    pub witness: Option<usize>,
}

impl CoverCheck {
    fn from_witness(witness: Option<usize>) -> Self {
        Self { holds: witness.is_none(), witness }
    }
}

pub fn verify_d_cover(perms: &[LayerFunction], f: &LayerFunction, d: usize) -> CoverCheck {
    let sizes = f.fiber_sizes();
    let witness = (0..f.width()).find(|&r| {
        let hit = perms.iter().any(|p| p.apply(r) == f.apply(r));
        !hit && sizes[f.apply(r)] <= d
    });
    CoverCheck::from_witness(witness)
}

pub fn verify_sd_cover(perms: &[LayerFunction], f: &LayerFunction, scope: &Subset, d: usize) -> CoverCheck {
    let mut sizes = vec![0usize; f.width()];
    for r in scope.iter() {
        sizes[f.apply(r)] += 1;
    }
    let witness = scope.iter().find(|&r| {
        let hit = perms.iter().any(|p| p.apply(r) == f.apply(r));
        !hit && sizes[f.apply(r)] <= d
    });
    CoverCheck::from_witness(witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::all_functions;

    fn lf(v: &[usize]) -> LayerFunction {
        LayerFunction::from_one_based(v).unwrap()
    }

    fn one_based(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
        sets.iter().map(|s| s.iter().map(|v| v + 1).collect()).collect()
    }

    #[test]
    fn fiber_partition_examples() {
        let p = build_fiber_partition(&LayerFunction::identity(4));
        assert_eq!(one_based(&p.fibers), vec![vec![1], vec![2], vec![3], vec![4]]);
        assert_eq!(p.fibers, p.blocks);

        let p = build_fiber_partition(&lf(&[2, 2, 4, 4]));
        assert_eq!(one_based(&p.fibers), vec![vec![1, 2], vec![3, 4]]);
        assert_eq!(one_based(&p.blocks), vec![vec![1, 2], vec![3, 4]]);

        let p = build_fiber_partition(&lf(&[1, 1, 1, 1]));
        assert_eq!(one_based(&p.fibers), vec![vec![1, 2, 3, 4]]);
        assert_eq!(one_based(&p.blocks), vec![vec![1, 2, 3, 4]]);
    }

    #[test]
    fn d_cover_examples() {
        let c = build_d_cover(&LayerFunction::identity(4), 1);
        assert_eq!(c.perms, vec![LayerFunction::identity(4)]);

        let c = build_d_cover(&lf(&[2, 2, 4, 4]), 2);
        assert_eq!(c.perms, vec![lf(&[2, 1, 4, 3]), lf(&[1, 2, 3, 4])]);
        assert!(c.verify().holds);

        let f = lf(&[1, 1, 1, 1]);
        let c = build_d_cover(&f, 2);
        assert!(c.verify().holds);
        assert!((0..4).all(|r| f.fiber_sizes()[f.apply(r)] > 2));
    }

    #[test]
    fn verify_examples() {
        let id = LayerFunction::identity(3);
        for d in 1..=3 {
            assert!(verify_d_cover(std::slice::from_ref(&id), &id, d).holds);
        }
        let swap = lf(&[2, 1]);
        let check = verify_d_cover(&[LayerFunction::identity(2)], &swap, 2);
        assert_eq!(check, CoverCheck { holds: false, witness: Some(0) });

        let check = verify_sd_cover(&[LayerFunction::identity(2)], &swap, &Subset::from_members(2, [0]), 1);
        assert_eq!(check.witness, Some(0));
        assert!(verify_sd_cover(&[], &swap, &Subset::empty(2), 1).holds);
    }

    #[test]
    fn sd_cover_examples() {
        let f = lf(&[2, 2, 4, 4]);
        let c = build_sd_cover(&f, &Subset::from_members(4, [0, 2]), 1);
        assert_eq!(c.perms[0].apply(0), f.apply(0));
        assert!(c.verify().holds);

        let full = build_sd_cover(&f, &Subset::full(4), 2);
        assert!(verify_d_cover(&full.perms, &f, 2).holds);

        let empty = build_sd_cover(&f, &Subset::empty(4), 2);
        assert_eq!(empty.perms.len(), 2);
        assert!(empty.verify().holds);
    }

    #[test]
    fn wrap_mod_convention() {
        assert_eq!(wrap_mod(0, 2), 2);
        assert_eq!(wrap_mod(-1, 2), 1);
        assert_eq!(wrap_mod(3, 3), 3);
        assert_eq!(wrap_mod(-4, 3), 2);
        assert_eq!(wrap_mod(5, 1), 1);
    }

    #[test]
    fn rotation_images_have_full_size() {
        // |{π_{i,ℓ}(a_{i,j}) : ℓ ∈ [d]}| = min(d, |B_i|), by enumeration at n = 5
        for f in all_functions(5) {
            let part = build_fiber_partition(&f);
            for d in 1..=5 {
                let cover = build_d_cover(&f, d);
                for (fiber, block) in part.fibers.iter().zip(&part.blocks) {
                    for &a in fiber {
                        let mut images: Vec<usize> = cover.perms.iter().map(|p| p.apply(a)).collect();
                        images.sort_unstable();
                        images.dedup();
                        assert_eq!(images.len(), d.min(block.len()), "f = {f}, d = {d}");
                        assert!(images.iter().all(|v| block.contains(v)));
                    }
                }
            }
        }
    }
}
