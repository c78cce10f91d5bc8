//! Bucketing schemes and the collapsing protocol for the vertex-valued
//! problem with all layers permutations.
//!
//! `B_t` splits `[n]` into `2^t` contiguous buckets `B_j = {r : ⌈2^t·r/n⌉ = j}`.
//! Player 1 announces the `B_{b_1}` bucket of `f̂_1(r)` for every `r`. Each
//! later player learns the answer's bucket from the previous message, keeps
//! the points `S_j` whose suffix image lands in it, and refines: it sends the
//! indicator of `S_j` and the `B_{b_j}` bucket of `f̂_j(s)` for each `s ∈ S_j`.
//! Once buckets are singletons the last player reads off the answer.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{vertex_bits, Answer, LayerFunction, Subset, Variant};
use crate::sim::{encode_output, player_fn, Message, PlayerView, Protocol, ViewKind};

/// `log^{(i)} n` in floating point. The recursion stops as soon as the value
/// drops to 1 or below.
pub fn iterated_log(n: f64, i: usize) -> f64 {
    let mut v = n;
    for _ in 0..i {
        if v <= 1.0 {
            break;
        }
        v = v.log2();
    }
    v
}

/// `⌈log2 v⌉` for `v >= 1`.
fn ceil_log2(v: usize) -> usize {
    if v <= 1 {
        0
    } else {
        (usize::BITS - (v - 1).leading_zeros()) as usize
    }
}

/// `⌈log^{(i)} n⌉`, exact, floored at 1. Uses `⌈log2 ⌈y⌉⌉ = ⌈log2 y⌉`.
pub fn ceil_iterated_log(n: usize, i: usize) -> usize {
    let mut c = n;
    for _ in 0..i {
        if c <= 1 {
            break;
        }
        c = ceil_log2(c);
    }
    c.max(1)
}

/// The scheme `B_t` over `[n]`. Buckets and points are 0-based here; the
/// free functions [`bucket_index`] and [`bucket_members`] are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BucketingScheme {
    n: usize,
    t: usize,
}

impl BucketingScheme {
    pub fn new(n: usize, t: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if t == 0 || t > 63 {
            return Err(Error::InvalidParameter(format!("bucket bits must lie in 1..=63, got {t}")));
        }
        Ok(Self { n, t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn bucket_count(&self) -> u128 {
        1u128 << self.t
    }

    /// Bucket of point `r`.
    pub fn bucket_of(&self, r: usize) -> usize {
        let num = ((r as u128) + 1) << self.t;
        (num.div_ceil(self.n as u128) - 1) as usize
    }

    /// Points of bucket `j`, ascending.
    pub fn members(&self, j: usize) -> Vec<usize> {
        // r is in bucket j iff j·n < 2^t·(r+1) <= (j+1)·n
        let n = self.n as u128;
        let lo = (j as u128) * n / (1u128 << self.t); // first r+1 with 2^t(r+1) > j·n is lo+1
        let hi = ((j as u128) + 1) * n / (1u128 << self.t);
        (lo as usize..hi.min(n) as usize).collect()
    }

    pub fn max_bucket_size(&self) -> usize {
        (self.n as u128).div_ceil(self.bucket_count()) as usize
    }

    /// Non-empty buckets, 1-based, for inspection.
    pub fn describe(&self) -> SchemeDoc {
        let mut buckets = Vec::new();
        let mut current: Option<(usize, Vec<usize>)> = None;
        for r in 0..self.n {
            let j = self.bucket_of(r);
            match &mut current {
                Some((cj, members)) if *cj == j => members.push(r + 1),
                _ => {
                    if let Some((cj, members)) = current.take() {
                        buckets.push(BucketDoc { index: cj + 1, members });
                    }
                    current = Some((j, vec![r + 1]));
                }
            }
        }
        if let Some((cj, members)) = current {
            buckets.push(BucketDoc { index: cj + 1, members });
        }
        SchemeDoc { n: self.n, t: self.t, buckets }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BucketDoc {
    pub index: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemeDoc {
    pub n: usize,
    pub t: usize,
    pub buckets: Vec<BucketDoc>,
}

/// 1-based `j` with `r ∈ B_j`.
pub fn bucket_index(t: usize, n: usize, r: usize) -> Result<usize> {
    if r == 0 || r > n {
        return Err(Error::OutOfRange { value: r, n });
    }
    Ok(BucketingScheme::new(n, t)?.bucket_of(r - 1) + 1)
}

/// 1-based members of `B_j`, ascending.
pub fn bucket_members(t: usize, n: usize, j: usize) -> Result<Vec<usize>> {
    let scheme = BucketingScheme::new(n, t)?;
    if j == 0 || j as u128 > scheme.bucket_count() {
        return Err(Error::OutOfRange { value: j, n: scheme.bucket_count().min(usize::MAX as u128) as usize });
    }
    Ok(scheme.members(j - 1).into_iter().map(|r| r + 1).collect())
}

/// Bucket widths `b_1..b_k` and how many players actually refine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BucketPlan {
    pub n: usize,
    pub k: usize,
    /// `b_1, ..., b_k`.
    pub bits: Vec<usize>,
    pub doubling: bool,
    /// Players `1..=active` send bucket data; players `active+1..k` stay silent.
    pub active: usize,
}

impl BucketPlan {
    /// `b_j = ⌈log^{(k-j)} n⌉`.
    pub fn standard(n: usize, k: usize) -> Result<Self> {
        check_nk(n, k)?;
        let bits = (1..=k).map(|j| ceil_iterated_log(n, k - j)).collect();
        Ok(Self { n, k, bits, doubling: false, active: k - 1 })
    }

    /// `b_1` as in the standard plan, then `b_{j+1} = min(⌈log2 n⌉, 2·b_j)`,
    /// stopping at the first player whose buckets are singletons.
    pub fn doubling(n: usize, k: usize) -> Result<Self> {
        check_nk(n, k)?;
        let cap = vertex_bits(n);
        let mut bits = vec![ceil_iterated_log(n, k - 1).min(cap)];
        while bits.len() < k - 1 && *bits.last().expect("non-empty") < cap {
            let next = (2 * bits.last().expect("non-empty")).min(cap);
            bits.push(next);
        }
        let active = bits.len();
        if bits[active - 1] < cap {
            bits[active - 1] = cap;
        }
        bits.resize(k - 1, 0);
        bits.push(n);
        Ok(Self { n, k, bits, doubling: true, active })
    }

    /// `b_j`, 1-based.
    pub fn b(&self, j: usize) -> usize {
        self.bits[j - 1]
    }

    pub fn scheme(&self, j: usize) -> BucketingScheme {
        BucketingScheme::new(self.n, self.b(j)).expect("plan widths are valid")
    }

    /// `n·b_1 + Σ_{j=2}^{active} (n + ⌈n/2^{b_{j-1}}⌉·b_j)`: the largest bit
    /// count players `1..k` can send.
    pub fn cost_bound(&self) -> usize {
        let mut total = self.n * self.b(1);
        for j in 2..=self.active {
            total += self.n + self.scheme(j - 1).max_bucket_size() * self.b(j);
        }
        total
    }

    pub fn describe(&self) -> PlanDoc {
        PlanDoc {
            plan: self.clone(),
            schemes: (1..=self.active).map(|j| self.scheme(j).describe()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanDoc {
    #[serde(flatten)]
    pub plan: BucketPlan,
    pub schemes: Vec<SchemeDoc>,
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("bucketing needs n >= 2, got {n}")));
    }
    if k < 3 {
        return Err(Error::InvalidParameter(format!("bucketing needs k >= 3, got {k}")));
    }
    Ok(())
}

fn require_perm(f: &LayerFunction, what: &str) -> Result<()> {
    if f.is_permutation() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what} is not a permutation")))
    }
}

/// `î_h`, following the visible layers `2..h` from the start vertex.
fn pointer_at(v: &PlayerView<'_>, h: usize) -> Result<usize> {
    let mut p = v.start()?;
    for g in 2..h {
        p = v.map(g)?.apply(p);
    }
    Ok(p)
}

/// Answer bucket as announced by player `from`, read at `î_{from+1}`.
fn read_bucket(plan: &BucketPlan, v: &PlayerView<'_>, from: usize) -> Result<usize> {
    let n = plan.n;
    let width = plan.b(from);
    let msg = v.message(from);
    let mut reader = msg.reader(from);
    let pointer = pointer_at(v, from + 1)?;
    if from == 1 {
        reader.skip(pointer * width)?;
        return reader.read_uint(width);
    }
    let scope = Subset::from_indicator(reader.take(n)?.to_vec());
    let rank = scope.rank(pointer).ok_or_else(|| {
        Error::Invariant(format!("pointer {} missing from the set announced by player {from}", pointer + 1))
    })?;
    reader.skip(rank * width)?;
    reader.read_uint(width)
}

fn build(plan: BucketPlan, name: &str) -> Protocol {
    let n = plan.n;
    let k = plan.k;
    let plan = std::sync::Arc::new(plan);
    let mut players = Vec::with_capacity(k);

    players.push({
        let plan = plan.clone();
        player_fn(move |v: &PlayerView<'_>| {
            let fhat = v.suffix_map()?;
            require_perm(&fhat, "the composition of the layers")?;
            let scheme = plan.scheme(1);
            let mut msg = Message::new();
            for r in 0..n {
                msg.push_uint(scheme.bucket_of(fhat.apply(r)), plan.b(1));
            }
            msg.end_part();
            Ok(msg)
        })
    });

    for j in 2..k {
        let plan = plan.clone();
        players.push(player_fn(move |v: &PlayerView<'_>| {
            if j > plan.active {
                return Ok(Message::new());
            }
            for h in 2..j {
                require_perm(v.map(h)?, "a visible layer")?;
            }
            let fhat = v.suffix_map()?;
            require_perm(&fhat, "the composition of the layers ahead")?;
            let bucket = read_bucket(&plan, v, j - 1)?;
            let coarse = plan.scheme(j - 1);
            let fine = plan.scheme(j);
            let scope = Subset::from_indicator((0..n).map(|s| coarse.bucket_of(fhat.apply(s)) == bucket).collect());
            let mut msg = Message::from_bits(scope.indicator().to_vec());
            msg.end_part();
            for s in scope.iter() {
                msg.push_uint(fine.bucket_of(fhat.apply(s)), plan.b(j));
            }
            msg.end_part();
            Ok(msg)
        }));
    }

    players.push(player_fn(move |v: &PlayerView<'_>| {
        for h in 2..k {
            require_perm(v.map(h)?, "a visible layer")?;
        }
        let last = plan.active;
        let bucket = read_bucket(&plan, v, last)?;
        let members = plan.scheme(last).members(bucket);
        match members.as_slice() {
            [answer] => Ok(encode_output(n, Answer::Vertex(*answer))),
            _ => Err(Error::Invariant(format!(
                "final bucket {} holds {} points, expected one",
                bucket + 1,
                members.len()
            ))),
        }
    }));

    Protocol::new(name, Variant::MpjHat, ViewKind::Collapsing, players).with_width(n)
}

/// The protocol with `b_j = ⌈log^{(k-j)} n⌉`.
pub fn bucketing_protocol(n: usize, k: usize) -> Result<Protocol> {
    Ok(build(BucketPlan::standard(n, k)?, "bucketing"))
}

/// The doubling variant, suited to `k` beyond `log* n`.
pub fn bucketing_protocol_doubling(n: usize, k: usize) -> Result<Protocol> {
    Ok(build(BucketPlan::doubling(n, k)?, "bucketing-doubling"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{enumerate_instances, sample_instances, InstanceShape};
    use crate::instance::{Instance, MpjHatInstance};
    use crate::sim::{run, verify};

    #[test]
    fn iterated_log_examples() {
        assert_eq!(iterated_log(16.0, 0), 16.0);
        assert_eq!(iterated_log(16.0, 1), 4.0);
        assert_eq!(iterated_log(16.0, 2), 2.0);
        assert_eq!(iterated_log(65536.0, 3), 2.0);
        assert_eq!(iterated_log(16.0, 9), 1.0);
        assert_eq!(ceil_iterated_log(16, 4), 1);
        assert_eq!(ceil_iterated_log(2, 3), 1);
        assert_eq!(ceil_iterated_log(1000, 1), 10);
        assert_eq!(ceil_iterated_log(1000, 2), 4);
    }

    #[test]
    fn exact_and_float_iterated_logs_agree() {
        for n in 1..=5000usize {
            for i in 0..6 {
                let float = (iterated_log(n as f64, i).ceil() as usize).max(1);
                assert_eq!(ceil_iterated_log(n, i), float, "n = {n}, i = {i}");
            }
        }
    }

    #[test]
    fn bucket_examples() {
        let b: Vec<usize> = (1..=8).map(|r| bucket_index(2, 8, r).unwrap()).collect();
        assert_eq!(b, vec![1, 1, 2, 2, 3, 3, 4, 4]);
        assert_eq!(bucket_members(1, 5, 1).unwrap(), vec![1, 2]);
        assert_eq!(bucket_members(1, 5, 2).unwrap(), vec![3, 4, 5]);
        assert!(bucket_index(1, 5, 0).is_err());
        assert!(bucket_index(1, 5, 6).is_err());
        assert!(bucket_members(1, 5, 3).is_err());
        for j in 1..=8 {
            assert!(bucket_members(3, 5, j).unwrap().len() <= 1);
        }
    }

    #[test]
    fn buckets_partition_and_respect_size_law() {
        for n in 1..=64 {
            for t in 1..=ceil_log2(n).max(1) {
                let scheme = BucketingScheme::new(n, t).unwrap();
                let mut seen = Vec::new();
                for j in 0..scheme.bucket_count() as usize {
                    let members = scheme.members(j);
                    assert!(members.len() <= scheme.max_bucket_size());
                    assert!(members.iter().all(|&r| scheme.bucket_of(r) == j));
                    seen.extend(members);
                }
                assert_eq!(seen, (0..n).collect::<Vec<_>>(), "n = {n}, t = {t}");
            }
        }
    }

    #[test]
    fn plans() {
        let p = BucketPlan::standard(16, 3).unwrap();
        assert_eq!(p.bits, vec![2, 4, 16]);
        let p = BucketPlan::standard(16, 5).unwrap();
        assert_eq!(p.bits, vec![1, 1, 2, 4, 16]);
        let p = BucketPlan::doubling(16, 8).unwrap();
        assert_eq!(&p.bits[..p.active], &[1, 2, 4]);
        assert!(p.bits[p.active..7].iter().all(|&b| b == 0));
        let p = BucketPlan::doubling(65536, 3).unwrap();
        assert_eq!(p.bits, vec![4, 16, 65536]);
        assert!(BucketPlan::standard(1, 3).is_err());
        assert!(BucketPlan::standard(4, 2).is_err());
    }

    #[test]
    fn identity_example() {
        let id = LayerFunction::identity(4);
        let inst: Instance = MpjHatInstance::all_perm(2, vec![id.clone(), id]).unwrap().into();
        let t = run(&bucketing_protocol(4, 3).unwrap(), &inst).unwrap();
        assert_eq!(t.output(), Answer::Vertex(2));
    }

    #[test]
    fn exhaustive_n4_k3() {
        let p = bucketing_protocol(4, 3).unwrap();
        let plan = BucketPlan::standard(4, 3).unwrap();
        let mut checked = 0;
        for inst in enumerate_instances(&InstanceShape::hat_perm(4, 3), 10_000).unwrap() {
            let t = run(&p, &inst).unwrap();
            assert_eq!(t.output(), inst.eval());
            assert_eq!(t.messages()[0].len(), 4 * plan.b(1));
            checked += 1;
        }
        assert_eq!(checked, 2304);
    }

    #[test]
    fn rejects_non_permutations() {
        let inst: Instance =
            MpjHatInstance::unconstrained(0, vec![LayerFunction::constant(4, 0), LayerFunction::identity(4)])
                .unwrap()
                .into();
        assert!(matches!(run(&bucketing_protocol(4, 3).unwrap(), &inst), Err(Error::Precondition(_))));
    }

    #[test]
    fn doubling_terminates_early() {
        let p = bucketing_protocol_doubling(4, 10).unwrap();
        let plan = BucketPlan::doubling(4, 10).unwrap();
        assert!(plan.active < 9);
        let report = verify(&p, sample_instances(&InstanceShape::hat_perm(4, 10), 5, 300));
        assert!(report.passed());
        assert!(report.per_player_max_bits[plan.active..9].iter().all(|&b| b == 0));
    }

    #[test]
    fn doubling_matches_oracle() {
        let p = bucketing_protocol_doubling(16, 8).unwrap();
        let report = verify(&p, sample_instances(&InstanceShape::hat_perm(16, 8), 9, 500));
        assert!(report.passed());
        assert!(report.worst_non_output_cost <= BucketPlan::doubling(16, 8).unwrap().cost_bound());
    }

    #[test]
    fn plan_json_lists_nonempty_buckets() {
        let doc = BucketPlan::standard(5, 3).unwrap().describe();
        let first = &doc.schemes[0];
        assert_eq!(first.t, 2);
        let members: Vec<Vec<usize>> = first.buckets.iter().map(|b| b.members.clone()).collect();
        assert_eq!(members, vec![vec![1], vec![2], vec![3], vec![4, 5]]);
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.starts_with(r#"{"n":5,"k":3,"bits":[2,3,5]"#), "{json}");
    }
}
