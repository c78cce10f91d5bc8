//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nofjump::adversary::{build_fooling_inputs, find_crossed_cell, half_weight_strings, is_crossing, verify_fooling};
use nofjump::bucketing::{bucketing_protocol, bucketing_protocol_doubling};
use nofjump::covers::{build_d_cover, build_sd_cover};
use nofjump::family::{family_protocol, FamilyKind};
use nofjump::generate::{all_functions, enumerate_instances, sample_instances, InstanceShape};
use nofjump::jump::{index_protocol, mpj3_sublinear, mpjk_sublinear, NaivePermProtocol, PermProtocol3};
use nofjump::sim::{isolation_trial, run_replayed};
use nofjump::{Answer, BitVector, Instance, LayerFunction, Message, Protocol, Subset};

type Outcome = Result<String, String>;

fn naive(n: usize) -> Arc<dyn PermProtocol3> {
    Arc::new(NaivePermProtocol::new(n))
}

/// Pointer walk, independent of the library's evaluator.
fn oracle(inst: &Instance) -> Answer {
    match inst {
        Instance::Mpj(m) => {
            let mut v = m.start();
            for f in m.middles() {
                v = f.as_slice()[v];
            }
            Answer::Bit(m.x().as_slice()[v])
        }
        Instance::Hat(h) => {
            let mut v = h.start();
            for f in h.layers() {
                v = f.as_slice()[v];
            }
            Answer::Vertex(v)
        }
    }
}

/// `S_1..S_{k-1}` by the defining recursion.
fn chain(inst: &Instance, d: usize) -> Vec<Vec<usize>> {
    let Instance::Mpj(m) = inst else { unreachable!() };
    let n = m.n();
    let mut sets = vec![(0..n).collect::<Vec<_>>()];
    for f in m.middles() {
        let prev = sets.last().unwrap();
        let next = (0..n)
            .filter(|&s| prev.iter().filter(|&&r| f.as_slice()[r] == s).count() > d)
            .collect();
        sets.push(next);
    }
    sets
}

/// Runs the sweep for criteria 1-3: correctness, cost bound, part sizes.
struct Sweep {
    checked: usize,
    failures: usize,
    cost_violations: usize,
    part_violations: usize,
}

fn sweep(protocol: &Protocol, instances: impl IntoIterator<Item = Instance>, d: usize) -> Sweep {
    let mut s = Sweep { checked: 0, failures: 0, cost_violations: 0, part_violations: 0 };
    for inst in instances {
        s.checked += 1;
        let n = inst.n();
        let k = inst.k();
        let m = n;
        let t = match run_replayed(protocol, &inst) {
            Ok(t) if t.output() == oracle(&inst) => t,
            _ => {
                s.failures += 1;
                continue;
            }
        };
        let bound = (2 * (k - 2) * d * m) as f64 + n as f64 / (d as f64).powi(k as i32 - 2);
        if t.non_output_cost() as f64 > bound {
            s.cost_violations += 1;
        }
        let mut expected_parts = vec![d * m; k - 2];
        expected_parts.push(chain(&inst, d)[k - 2].len());
        let others_ok = (2..k).all(|j| t.messages()[j - 1].len() == d * m);
        if t.messages()[0].parts() != expected_parts.as_slice() || !others_ok {
            s.part_violations += 1;
        }
    }
    s
}

fn criteria_1_to_3() -> [Outcome; 3] {
    let mut c1 = Vec::new();
    let mut c1_ok = true;
    let mut c3_checked = 0;
    let mut c3_bad = 0;
    for d in 1..=3 {
        let s = sweep(&mpj3_sublinear(naive(3), d).unwrap(), enumerate_instances(&InstanceShape::mpj(3, 3), 1_000).unwrap(), d);
        c1_ok &= s.checked == 648 && s.failures == 0;
        c1.push(format!("n=3 d={d}: {}/{} ok", s.checked - s.failures, s.checked));
        c3_checked += s.checked;
        c3_bad += s.cost_violations + s.part_violations;
    }
    for d in [1, 2, 4] {
        let s = sweep(&mpj3_sublinear(naive(8), d).unwrap(), sample_instances(&InstanceShape::mpj(8, 3), 2024 + d as u64, 10_000), d);
        c1_ok &= s.checked == 10_000 && s.failures == 0;
        c1.push(format!("n=8 d={d}: {}/{} ok", s.checked - s.failures, s.checked));
        c3_checked += s.checked;
        c3_bad += s.cost_violations + s.part_violations;
    }
    let s = sweep(&mpjk_sublinear(naive(3), 2, 4).unwrap(), enumerate_instances(&InstanceShape::mpj(3, 4), 20_000).unwrap(), 2);
    let c2_ok = s.checked == 17_496 && s.failures == 0;
    c3_checked += s.checked;
    c3_bad += s.cost_violations + s.part_violations;
    let c2 = format!("n=3 k=4 d=2: {}/{} ok", s.checked - s.failures, s.checked);
    let c3 = format!("{c3_checked} transcripts, {c3_bad} over the bound or with wrong part sizes");
    let wrap = |ok: bool, msg: String| if ok { Ok(msg) } else { Err(msg) };
    [wrap(c1_ok, c1.join(", ")), wrap(c2_ok, c2), wrap(c3_bad == 0 && c3_checked > 0, c3)]
}

fn covered(perms: &[LayerFunction], f: &LayerFunction, scope: &[usize], d: usize) -> bool {
    scope.iter().all(|&r| {
        let target = f.as_slice()[r];
        let crowd = scope.iter().filter(|&&s| f.as_slice()[s] == target).count();
        crowd > d || perms.iter().any(|p| p.as_slice()[r] == target)
    })
}

fn criterion_4() -> Outcome {
    let mut checked = 0;
    let mut bad = 0;
    for f in all_functions(4) {
        for d in 1..=4 {
            let cover = build_d_cover(&f, d);
            checked += 1;
            let perms_ok = cover.perms.iter().all(LayerFunction::is_permutation);
            if !perms_ok || cover.perms.len() > d || !covered(&cover.perms, &f, &[0, 1, 2, 3], d) {
                bad += 1;
            }
        }
    }
    for f in all_functions(3) {
        for mask in 0..8u32 {
            let members: Vec<usize> = (0..3).filter(|r| mask >> r & 1 == 1).collect();
            let scope = Subset::from_members(3, members.iter().copied());
            for d in 1..=3 {
                let cover = build_sd_cover(&f, &scope, d);
                checked += 1;
                let perms_ok = cover.perms.iter().all(LayerFunction::is_permutation);
                if !perms_ok || cover.perms.len() > d || !covered(&cover.perms, &f, &members, d) {
                    bad += 1;
                }
            }
        }
    }
    let msg = format!("{checked} covers checked (1024 d-covers, 648 (S,d)-covers), {bad} violations");
    if bad == 0 && checked == 1024 + 648 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// `⌈log^{(i)} n⌉` in floating point, floored at 1.
fn ceil_log_iter(n: usize, i: usize) -> usize {
    let mut v = n as f64;
    for _ in 0..i {
        if v <= 1.0 {
            break;
        }
        v = v.log2();
    }
    (v.ceil() as usize).max(1)
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let cases: Vec<(usize, usize, Vec<Instance>)> = vec![
        (4, 3, enumerate_instances(&InstanceShape::hat_perm(4, 3), 10_000).unwrap().collect()),
        (16, 3, sample_instances(&InstanceShape::hat_perm(16, 3), 53, 10_000)),
        (16, 4, sample_instances(&InstanceShape::hat_perm(16, 4), 54, 10_000)),
        (16, 5, sample_instances(&InstanceShape::hat_perm(16, 5), 55, 10_000)),
    ];
    for (n, k, insts) in cases {
        let p = bucketing_protocol(n, k).unwrap();
        let b: Vec<usize> = (1..k).map(|j| ceil_log_iter(n, k - j)).collect();
        let (mut failures, mut cost_bad) = (0, 0);
        let total = insts.len();
        for inst in insts {
            let Ok(t) = run_replayed(&p, &inst) else {
                failures += 1;
                continue;
            };
            if t.output() != oracle(&inst) {
                failures += 1;
            }
            let msgs = t.messages();
            if msgs[0].len() != n * b[0] {
                cost_bad += 1;
            }
            for j in 2..k {
                let s_j = msgs[j - 1].bits()[..n].iter().filter(|&&x| x).count();
                let cap = n.div_ceil(1 << b[j - 2]);
                if msgs[j - 1].len() != n + s_j * b[j - 1] || s_j > cap {
                    cost_bad += 1;
                }
            }
        }
        ok &= failures == 0 && cost_bad == 0;
        notes.push(format!("n={n} k={k}: {failures}/{total} failures, {cost_bad} cost mismatches"));
    }
    if ok {
        Ok(notes.join(", "))
    } else {
        Err(notes.join(", "))
    }
}

fn binom(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |c, i| c * u128::from(n - i) / u128::from(i + 1))
}

fn criterion_6() -> Outcome {
    let mut bad = Vec::new();
    let mut pairs = 0u64;
    for n in [4, 6, 8] {
        let all = half_weight_strings(n);
        for x in &all {
            for y in &all {
                let complementary = x.as_slice().iter().zip(y.as_slice()).all(|(a, b)| a != b);
                if x != y && !complementary {
                    pairs += 1;
                    if !is_crossing(x, y).unwrap() {
                        bad.push(format!("(a) {x} {y}"));
                    }
                }
            }
        }
    }
    for n in (4..=64u64).step_by(2) {
        let lhs = binom(n, n / 2) as f64;
        let rhs = 2f64.powi(n as i32) / (2.0 * (n as f64).sqrt());
        if lhs <= rhs {
            bad.push(format!("(b) n={n}"));
        }
    }
    let mut runs = 0;
    for n in [8usize, 10, 12] {
        let t = (n as f64 - 0.5 * (n as f64).log2() - 2.0).floor() as usize;
        for trial in 0..100u64 {
            let key: u64 = ChaCha8Rng::seed_from_u64(trial * 31 + n as u64).gen();
            let msg = |x: &BitVector| {
                let v = x.as_slice().iter().fold(0u64, |acc, &b| acc << 1 | u64::from(b));
                let mut rng = ChaCha8Rng::seed_from_u64(key ^ v.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                Ok(Message::from_bits((0..t).map(|_| rng.gen()).collect()))
            };
            runs += 1;
            match find_crossed_cell(n, t, msg) {
                Ok(cell) if is_crossing(&cell.pair.x, &cell.pair.y).unwrap() && msg(&cell.pair.x).unwrap() == cell.message && msg(&cell.pair.y).unwrap() == cell.message => {}
                _ => bad.push(format!("(c) n={n} trial={trial}")),
            }
        }
    }
    let msg = format!("{pairs} half-weight pairs, 31 binomial checks, {runs} crossed-cell searches, {} failures", bad.len());
    if bad.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}: {}", bad.join("; ")))
    }
}

fn criterion_7() -> Outcome {
    let mut total = 0;
    let mut wins = 0;
    let mut losses = Vec::new();
    for n in [8usize, 10] {
        let limit = (n as f64 - 0.5 * (n as f64).log2() - 2.0).floor() as usize;
        for k in [3usize, 4] {
            let mut members = vec![(FamilyKind::Truncate, limit, 0u64), (FamilyKind::Truncate, limit / 2, 0)];
            for seed in 0..6 {
                members.push((FamilyKind::Parity, limit - (seed as usize % 2), seed));
                members.push((FamilyKind::Hash, limit - (seed as usize % 3), seed));
            }
            for (kind, t, seed) in members {
                total += 1;
                let p = family_protocol(kind, n, k, t, seed).unwrap();
                let verdict = build_fooling_inputs(&p, n).and_then(|pair| {
                    let report = verify_fooling(&p, &pair.inst0, &pair.inst1)?;
                    let t0 = run_replayed(&p, &pair.inst0)?;
                    let t1 = run_replayed(&p, &pair.inst1)?;
                    let differ = oracle(&pair.inst0) != oracle(&pair.inst1);
                    let same_prefix = t0.messages()[..k - 1] == t1.messages()[..k - 1] && t0.messages()[..k - 1] == pair.prefix[..];
                    Ok(report.prefix_equal && report.exactly_one_error() && differ && same_prefix)
                });
                match verdict {
                    Ok(true) => wins += 1,
                    other => losses.push(format!("{} n={n} k={k} seed={seed}: {other:?}", p.name())),
                }
            }
        }
    }
    let msg = format!("{wins}/{total} collapsing protocols fooled");
    if total >= 50 && wins == total {
        Ok(msg)
    } else {
        Err(format!("{msg}: {}", losses.join("; ")))
    }
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for n in [4usize, 8, 16, 32] {
        let p = index_protocol(n);
        let worst = sample_instances(&InstanceShape::mpj(n, 2), n as u64, 500)
            .iter()
            .map(|inst| {
                let t = run_replayed(&p, inst).unwrap();
                ok &= t.output() == oracle(inst);
                t.non_output_cost()
            })
            .max()
            .unwrap();
        ok &= worst == n;
        notes.push(format!("n={n}: {worst}"));
    }
    if ok {
        Ok(notes.join(", "))
    } else {
        Err(notes.join(", "))
    }
}

fn criterion_9() -> Outcome {
    let mut protocols: Vec<(Protocol, InstanceShape)> = vec![
        (index_protocol(8), InstanceShape::mpj(8, 2)),
        (mpj3_sublinear(naive(8), 2).unwrap(), InstanceShape::mpj(8, 3)),
        (mpjk_sublinear(naive(8), 2, 5).unwrap(), InstanceShape::mpj(8, 5)),
        (bucketing_protocol(16, 4).unwrap(), InstanceShape::hat_perm(16, 4)),
        (bucketing_protocol_doubling(16, 7).unwrap(), InstanceShape::hat_perm(16, 7)),
    ];
    for kind in [FamilyKind::Truncate, FamilyKind::Parity, FamilyKind::Hash, FamilyKind::Constant] {
        protocols.push((family_protocol(kind, 8, 4, 4, 1).unwrap(), InstanceShape::mpj(8, 4)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = Vec::new();
    for (p, shape) in &protocols {
        for inst in sample_instances(shape, 90, 1_000) {
            match isolation_trial(p, &inst, &mut rng) {
                Ok(None) => {}
                other => violations.push(format!("{}: {other:?}", p.name())),
            }
        }
    }
    let msg = format!("{} protocols x 1000 trials, {} violations", protocols.len(), violations.len());
    if violations.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}: {}", violations.join("; ")))
    }
}

fn main() -> ExitCode {
    let titles = [
        "oracle equivalence, 3 players",
        "oracle equivalence, k players",
        "cost formula and part sizes",
        "cover correctness, exhaustive",
        "bucketing protocol",
        "crossing-pair lemmas",
        "adversary end to end",
        "index baseline cost",
        "view isolation",
    ];
    let start = Instant::now();
    let mut outcomes: Vec<Outcome> = criteria_1_to_3().into();
    outcomes.push(criterion_4());
    outcomes.push(criterion_5());
    outcomes.push(criterion_6());
    outcomes.push(criterion_7());
    outcomes.push(criterion_8());
    outcomes.push(criterion_9());

    let mut failed = 0;
    for (idx, (title, outcome)) in titles.iter().zip(&outcomes).enumerate() {
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {title} ({detail})", idx + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {title} ({detail})", idx + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {:.1}s", outcomes.len() - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
