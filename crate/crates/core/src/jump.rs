//! Upper-bound protocols for the Boolean problem: the INDEX baseline, the
//! 3-player cover protocol, and its k-player generalization. The latter two
//! are parameterized by any protocol for the permutation special case of the
//! 3-player problem ([`PermProtocol3`]).
//!
//! Message layout (no length headers; every reader derives the lengths):
//!
//! * player 1: `k - 2` parts of `d·m` bits (one `α` per cover permutation, in
//!   construction order), then one bit `x_s` per `s ∈ S_{k-1}`, ascending;
//! * player `j` in `2..k`: `d` strings `β`, `m` bits each;
//! * player `k`: the answer bit.

use std::sync::Arc;

use crate::covers::{build_d_cover, build_sd_cover};
use crate::error::{Error, Result};
use crate::instance::{BitVector, LayerFunction, Subset, Variant};
use crate::sim::{player_fn, Message, PlayerView, Protocol, ViewKind};

/// A 3-player protocol for inputs `(i, π, x)` with `π` a permutation:
/// `γ(i, π, α(π, x), β(i, x, α(π, x))) = x_{π(i)}`.
pub trait PermProtocol3: Send + Sync {
    fn width(&self) -> usize;

    /// `m`: length of both `α` and `β`.
    fn message_len(&self) -> usize;

    fn alpha(&self, pi: &LayerFunction, x: &BitVector) -> Vec<bool>;

    fn beta(&self, i: usize, x: &BitVector, alpha: &[bool]) -> Vec<bool>;

    fn gamma(&self, i: usize, pi: &LayerFunction, alpha: &[bool], beta: &[bool]) -> bool;
}

/// Baseline: `α = x`, `β` constant zeros, `γ` reads `α_{π(i)}`. `m = n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaivePermProtocol {
    n: usize,
}

impl NaivePermProtocol {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl PermProtocol3 for NaivePermProtocol {
    fn width(&self) -> usize {
        self.n
    }

    fn message_len(&self) -> usize {
        self.n
    }

    fn alpha(&self, _pi: &LayerFunction, x: &BitVector) -> Vec<bool> {
        x.as_slice().to_vec()
    }

    fn beta(&self, _i: usize, _x: &BitVector, _alpha: &[bool]) -> Vec<bool> {
        vec![false; self.n]
    }

    fn gamma(&self, i: usize, pi: &LayerFunction, alpha: &[bool], _beta: &[bool]) -> bool {
        alpha[pi.apply(i)]
    }
}

/// First `(i, π, x)` on which `p` breaks its contract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractViolation {
    pub i: usize,
    pub pi: LayerFunction,
    pub x: BitVector,
    pub reason: String,
}

/// Exhaustive contract sweep over all `n · n! · 2^n` triples. Returns the
/// number of triples checked.
pub fn check_perm_protocol(p: &dyn PermProtocol3) -> Result<usize, ContractViolation> {
    let n = p.width();
    let m = p.message_len();
    let perms = crate::generate::all_permutations(n);
    let mut checked = 0;
    for i in 0..n {
        for pi in &perms {
            for v in 0..1u64 << n {
                let x = BitVector::from_value(n, v);
                let fail = |reason: String| ContractViolation { i, pi: pi.clone(), x: x.clone(), reason };
                let a = p.alpha(pi, &x);
                if a.len() != m {
                    return Err(fail(format!("alpha has {} bits, m = {m}", a.len())));
                }
                let b = p.beta(i, &x, &a);
                if b.len() != m {
                    return Err(fail(format!("beta has {} bits, m = {m}", b.len())));
                }
                if p.gamma(i, pi, &a, &b) != x.get(pi.apply(i)) {
                    return Err(fail("gamma disagrees with x_{π(i)}".into()));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// `S_1 = [n]`, `S_j = {s : |S_{j-1} ∩ f_j^{-1}(s)| > d}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SjChain {
    sets: Vec<Subset>,
}

impl SjChain {
    /// `S_j`, `1 <= j <= k-1`.
    pub fn get(&self, j: usize) -> &Subset {
        &self.sets[j - 1]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Subset> {
        self.sets.iter()
    }
}

/// `layers` is `f_2, ..., f_{k-1}`.
pub fn build_sj_chain(n: usize, layers: &[LayerFunction], d: usize) -> SjChain {
    let mut sets = vec![Subset::full(n)];
    for f in layers {
        let prev = sets.last().expect("non-empty");
        let mut counts = vec![0usize; n];
        for r in prev.iter() {
            counts[f.apply(r)] += 1;
        }
        sets.push(Subset::from_indicator(counts.iter().map(|&c| c > d).collect()));
    }
    SjChain { sets }
}

/// `ceil(1 / ((k-2)·φ)^{1/(k-1)})`, computed as the least `d` with
/// `d^{k-1}·(k-2)·φ >= 1`.
pub fn choose_d(k: usize, phi: f64) -> Result<usize> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("choose_d needs k >= 3, got {k}")));
    }
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::InvalidParameter(format!("phi must lie in (0, 1], got {phi}")));
    }
    let y = (k - 2) as f64 * phi;
    let exp = (k - 1) as i32;
    let enough = |d: usize| (d as f64).powi(exp) * y >= 1.0;
    let mut d = ((1.0 / y).powf(1.0 / f64::from(exp)).ceil() as usize).max(1);
    while d > 1 && enough(d - 1) {
        d -= 1;
    }
    while !enough(d) {
        d += 1;
    }
    Ok(d)
}

/// `2dm + n/d`: bound on players 1 and 2 of the 3-player protocol.
pub fn mpj3_cost_bound(n: usize, d: usize, m: usize) -> f64 {
    (2 * d * m) as f64 + n as f64 / d as f64
}

/// `2(k-2)dm + n/d^{k-2}`: bound on players `1..k` of the k-player protocol.
pub fn mpjk_cost_bound(n: usize, k: usize, d: usize, m: usize) -> f64 {
    (2 * (k - 2) * d * m) as f64 + n as f64 / (d as f64).powi((k - 2) as i32)
}

/// Player 1 sends `x`; player 2 outputs `x_i`.
pub fn index_protocol(n: usize) -> Protocol {
    Protocol::new(
        "index",
        Variant::Mpj,
        ViewKind::FullOneWay,
        vec![
            player_fn(|v| {
                let mut m = Message::from_bits(v.bits()?.as_slice().to_vec());
                m.end_part();
                Ok(m)
            }),
            player_fn(|v| {
                let i = v.start()?;
                let bit = v.message(1).reader(1).take(v.n())?[i];
                Ok(Message::from_bits(vec![bit]))
            }),
        ],
    )
    .with_width(n)
}

fn push_checked(msg: &mut Message, bits: &[bool], m: usize, what: &str) -> Result<()> {
    if bits.len() != m {
        return Err(Error::Invariant(format!("{what} produced {} bits, expected m = {m}", bits.len())));
    }
    msg.push_bits(bits);
    Ok(())
}

/// The 3-player cover protocol with parameter `d`.
pub fn mpj3_sublinear(p: Arc<dyn PermProtocol3>, d: usize) -> Result<Protocol> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let n = p.width();
    let m = p.message_len();

    let p1 = {
        let p = p.clone();
        player_fn(move |v: &PlayerView<'_>| {
            let f = v.map(2)?;
            let x = v.bits()?;
            let mut msg = Message::new();
            for pi in &build_d_cover(f, d).perms {
                push_checked(&mut msg, &p.alpha(pi, x), m, "alpha")?;
            }
            msg.end_part();
            let sizes = f.fiber_sizes();
            for s in (0..n).filter(|&s| sizes[s] > d) {
                msg.push_bit(x.get(s));
            }
            msg.end_part();
            Ok(msg)
        })
    };

    let p2 = {
        let p = p.clone();
        player_fn(move |v: &PlayerView<'_>| {
            let i = v.start()?;
            let x = v.bits()?;
            let mut reader = v.message(1).reader(1);
            let mut msg = Message::new();
            for _ in 0..d {
                let alpha = reader.take(m)?;
                push_checked(&mut msg, &p.beta(i, x, alpha), m, "beta")?;
            }
            msg.end_part();
            Ok(msg)
        })
    };

    let p3 = player_fn(move |v: &PlayerView<'_>| {
        let i = v.start()?;
        let f = v.map(2)?;
        let target = f.apply(i);
        let sizes = f.fiber_sizes();
        let first = v.message(1);
        let heavy = (0..n).filter(|&s| sizes[s] > d).count();
        if first.len() != d * m + heavy {
            return Err(Error::BadMessage {
                player: 1,
                reason: format!("expected {} bits, got {}", d * m + heavy, first.len()),
            });
        }
        if sizes[target] > d {
            let rank = (0..target).filter(|&s| sizes[s] > d).count();
            let mut r = first.reader(1);
            r.skip(d * m + rank)?;
            return Ok(Message::from_bits(vec![r.read_bit()?]));
        }
        let cover = build_d_cover(f, d);
        let ell = cover
            .covering_index(i)
            .ok_or_else(|| Error::Invariant(format!("no cover permutation maps {} to {}", i + 1, target + 1)))?;
        let alpha = &first.bits()[ell * m..(ell + 1) * m];
        let mut r = v.message(2).reader(2);
        r.skip(ell * m)?;
        let beta = r.take(m)?;
        Ok(Message::from_bits(vec![p.gamma(i, &cover.perms[ell], alpha, beta)]))
    });

    Ok(Protocol::new("mpj3-sublinear", Variant::Mpj, ViewKind::FullOneWay, vec![p1, p2, p3]).with_width(n))
}

/// The k-player protocol: the 3-player scheme embedded at every level, with
/// `(S_j, d)`-covers restricting each level to the pointers still in play.
pub fn mpjk_sublinear(p: Arc<dyn PermProtocol3>, d: usize, k: usize) -> Result<Protocol> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    if k < 3 {
        return Err(Error::InvalidParameter(format!("k must be at least 3, got {k}")));
    }
    let n = p.width();
    let m = p.message_len();

    let middles = move |v: &PlayerView<'_>| -> Result<Vec<LayerFunction>> {
        (2..k).map(|h| v.map(h).cloned()).collect()
    };

    let mut players = Vec::with_capacity(k);

    players.push({
        let p = p.clone();
        player_fn(move |v: &PlayerView<'_>| {
            let layers = middles(v)?;
            let x = v.bits()?;
            // xhat[j] = x̂_j for j in 1..k-1 (index 0 unused)
            let mut xhat = vec![x.clone(); k];
            for j in (1..k - 1).rev() {
                xhat[j] = xhat[j + 1].compose(&layers[j - 1]);
            }
            let chain = build_sj_chain(n, &layers, d);
            let mut msg = Message::new();
            for level in 1..=k - 2 {
                let cover = build_sd_cover(&layers[level - 1], chain.get(level), d);
                for pi in &cover.perms {
                    push_checked(&mut msg, &p.alpha(pi, &xhat[level + 1]), m, "alpha")?;
                }
                msg.end_part();
            }
            for s in chain.get(k - 1).iter() {
                msg.push_bit(x.get(s));
            }
            msg.end_part();
            Ok(msg)
        })
    });

    for j in 2..k {
        let p = p.clone();
        players.push(player_fn(move |v: &PlayerView<'_>| {
            let pointer = v.pointer()?;
            let xhat = v.suffix_bits()?;
            let mut reader = v.message(1).reader(1);
            reader.skip((j - 2) * d * m)?;
            let mut msg = Message::new();
            for _ in 0..d {
                let alpha = reader.take(m)?;
                push_checked(&mut msg, &p.beta(pointer, &xhat, alpha), m, "beta")?;
            }
            msg.end_part();
            Ok(msg)
        }));
    }

    players.push(player_fn(move |v: &PlayerView<'_>| {
        let layers = middles(v)?;
        let chain = build_sj_chain(n, &layers, d);
        let first = v.message(1);
        let expected = (k - 2) * d * m + chain.get(k - 1).len();
        if first.len() != expected {
            return Err(Error::BadMessage {
                player: 1,
                reason: format!("expected {expected} bits, got {}", first.len()),
            });
        }
        let mut pointer = v.start()?;
        for level in 1..=k - 2 {
            let f = &layers[level - 1];
            let scope = chain.get(level);
            if !scope.contains(pointer) {
                return Err(Error::Invariant(format!("pointer {} left S_{level}", pointer + 1)));
            }
            let target = f.apply(pointer);
            let crowd = scope.iter().filter(|&r| f.apply(r) == target).count();
            if crowd <= d {
                let cover = build_sd_cover(f, scope, d);
                let ell = cover.covering_index(pointer).ok_or_else(|| {
                    Error::Invariant(format!("no cover permutation at level {level} maps {} to {}", pointer + 1, target + 1))
                })?;
                let mut ra = first.reader(1);
                ra.skip(((level - 1) * d + ell) * m)?;
                let alpha = ra.take(m)?;
                let mut rb = v.message(level + 1).reader(level + 1);
                rb.skip(ell * m)?;
                let beta = rb.take(m)?;
                return Ok(Message::from_bits(vec![p.gamma(pointer, &cover.perms[ell], alpha, beta)]));
            }
            pointer = target;
        }
        let rank = chain
            .get(k - 1)
            .rank(pointer)
            .ok_or_else(|| Error::Invariant(format!("final pointer {} not in S_{}", pointer + 1, k - 1)))?;
        let mut r = first.reader(1);
        r.skip((k - 2) * d * m + rank)?;
        Ok(Message::from_bits(vec![r.read_bit()?]))
    }));

    Ok(Protocol::new("mpjk-sublinear", Variant::Mpj, ViewKind::FullOneWay, players).with_width(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{enumerate_instances, sample_instance, InstanceShape};
    use crate::instance::{Instance, MpjInstance};
    use crate::sim::{run, verify};

    fn naive(n: usize) -> Arc<dyn PermProtocol3> {
        Arc::new(NaivePermProtocol::new(n))
    }

    #[test]
    fn naive_contract_holds() {
        assert_eq!(check_perm_protocol(&NaivePermProtocol::new(3)), Ok(3 * 6 * 8));
        let p = NaivePermProtocol::new(4);
        let x: BitVector = "0100".parse().unwrap();
        let id = LayerFunction::identity(4);
        let a = p.alpha(&id, &x);
        assert!(p.gamma(1, &id, &a, &p.beta(1, &x, &a)));
        assert_eq!(p.message_len(), 4);
    }

    #[test]
    fn broken_perm_protocol_is_caught() {
        struct Liar;
        impl PermProtocol3 for Liar {
            fn width(&self) -> usize {
                2
            }
            fn message_len(&self) -> usize {
                1
            }
            fn alpha(&self, _: &LayerFunction, _: &BitVector) -> Vec<bool> {
                vec![false]
            }
            fn beta(&self, _: usize, _: &BitVector, _: &[bool]) -> Vec<bool> {
                vec![false]
            }
            fn gamma(&self, _: usize, _: &LayerFunction, _: &[bool], _: &[bool]) -> bool {
                false
            }
        }
        let v = check_perm_protocol(&Liar).unwrap_err();
        assert!(v.x.get(v.pi.apply(v.i)));
    }

    #[test]
    fn index_protocol_examples() {
        let inst: Instance = MpjInstance::new(0, vec![], "10".parse().unwrap()).unwrap().into();
        let t = run(&index_protocol(2), &inst).unwrap();
        assert_eq!(t.output().to_string(), "1");
        assert_eq!(t.per_player_bits(), vec![2, 1]);
        let report = verify(&index_protocol(4), enumerate_instances(&InstanceShape::mpj(4, 2), 100).unwrap());
        assert!(report.passed());
        assert_eq!(report.per_player_max_bits, vec![4, 1]);
    }

    #[test]
    fn mpj3_identity_trace() {
        let n = 4;
        let p = mpj3_sublinear(naive(n), 1).unwrap();
        for i in 0..n {
            let inst: Instance = MpjInstance::new(i, vec![LayerFunction::identity(n)], "0110".parse().unwrap())
                .unwrap()
                .into();
            let t = run(&p, &inst).unwrap();
            assert_eq!(t.output(), inst.eval());
            assert_eq!(t.total_cost(), 2 * n + 1);
            assert_eq!(t.messages()[0].parts(), &[n, 0]);
        }
    }

    #[test]
    fn mpj3_exhaustive_n3() {
        for d in 1..=3 {
            let p = mpj3_sublinear(naive(3), d).unwrap();
            let report = verify(&p, enumerate_instances(&InstanceShape::mpj(3, 3), 1_000).unwrap());
            assert_eq!(report.checked, 648);
            assert!(report.passed(), "d = {d}: {:?}", report.failures.first());
        }
    }

    #[test]
    fn mpj3_cost_bound_n4() {
        let p = mpj3_sublinear(naive(4), 2).unwrap();
        let bound = mpj3_cost_bound(4, 2, 4);
        for inst in enumerate_instances(&InstanceShape::mpj(4, 3), 100_000).unwrap() {
            let t = run(&p, &inst).unwrap();
            assert!(t.non_output_cost() as f64 <= bound);
        }
    }

    #[test]
    fn mpjk_k3_matches_mpj3_transcripts() {
        let a = mpj3_sublinear(naive(3), 2).unwrap();
        let b = mpjk_sublinear(naive(3), 2, 3).unwrap();
        for inst in enumerate_instances(&InstanceShape::mpj(3, 3), 1_000).unwrap() {
            assert_eq!(run(&a, &inst).unwrap().messages(), run(&b, &inst).unwrap().messages());
        }
    }

    #[test]
    fn mpjk_exhaustive_n3_k4() {
        for d in 1..=2 {
            let p = mpjk_sublinear(naive(3), d, 4).unwrap();
            let report = verify(&p, enumerate_instances(&InstanceShape::mpj(3, 4), 100_000).unwrap());
            assert_eq!(report.checked, 17_496);
            assert!(report.passed(), "d = {d}: {:?}", report.failures.first());
        }
    }

    #[test]
    fn choose_d_examples() {
        assert_eq!(choose_d(3, 1.0), Ok(1));
        assert_eq!(choose_d(3, 0.25), Ok(2));
        assert_eq!(choose_d(4, 0.01), Ok(4));
        assert!(choose_d(3, 0.0).is_err());
        assert!(choose_d(3, -1.0).is_err());
        assert!(choose_d(2, 0.5).is_err());
        // exact integer boundary: (1/(1·1/9))^{1/2} = 3
        assert_eq!(choose_d(3, 1.0 / 9.0), Ok(3));
    }

    #[test]
    fn sj_chain_examples() {
        let perms = vec![LayerFunction::identity(5), LayerFunction::from_one_based(&[2, 3, 4, 5, 1]).unwrap()];
        let chain = build_sj_chain(5, &perms, 1);
        assert_eq!(chain.len(), 3);
        assert!(chain.get(2).is_empty() && chain.get(3).is_empty());

        let chain = build_sj_chain(4, &[LayerFunction::constant(4, 2)], 2);
        assert_eq!(chain.get(2).iter().collect::<Vec<_>>(), vec![2]);

        for seed in 0..1000u64 {
            let Instance::Mpj(inst) = sample_instance(&InstanceShape::mpj(8, 4), seed) else { unreachable!() };
            let d = (seed % 4) as usize + 1;
            let chain = build_sj_chain(8, inst.middles(), d);
            for j in 1..=3 {
                assert!(chain.get(j).len() as f64 <= 8.0 / (d as f64).powi(j as i32 - 1));
            }
        }
    }

    #[test]
    fn degenerate_d() {
        let p = mpjk_sublinear(naive(3), 3, 4).unwrap();
        let report = verify(&p, enumerate_instances(&InstanceShape::mpj(3, 4), 100_000).unwrap());
        assert!(report.passed());
        assert!(mpj3_sublinear(naive(3), 0).is_err());
        assert!(mpjk_sublinear(naive(3), 1, 2).is_err());
    }
}
