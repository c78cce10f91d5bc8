//! Experiment harness behind the `nofjump` binary: verification sweeps, cost
//! tables, cover inspection, and adversary runs.

use std::fmt;
use std::io::Write;

use anyhow::{bail, Result};
use serde::Serialize;

use nofjump::adversary::{bit_limit, build_fooling_inputs, verify_fooling};
use nofjump::covers::{build_d_cover, build_fiber_partition, build_sd_cover};
use nofjump::generate::{enumerate_instances, sample_instances};
use nofjump::instance::{Instance, LayerFunction, Subset};
use nofjump::schema::InstanceDoc;
use nofjump::sim::{run_replayed, verify, Failure, FailureKind};

pub mod registry;

pub use registry::{PermChoice, ProtocolKind, Setup};

/// A configuration mistake; the binary exits with status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Comma-separated widths; the empty string is the empty list.
pub fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| UsageError(format!("`{p}` is not a non-negative integer")).into()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Which instances a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Exhaustive { budget: u128 },
    Seeded { seed: u64, samples: usize },
}

/// Outcome for one `(n, protocol)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub n: usize,
    pub k: usize,
    pub protocol: String,
    pub view: String,
    pub checked: usize,
    pub failures: usize,
    /// Largest total, final output included.
    pub max_cost: usize,
    pub non_output_max: usize,
    pub per_player_max: Vec<usize>,
    /// Bound on the non-output bits, where the protocol has one.
    pub bound: Option<f64>,
    pub bound_ok: Option<bool>,
}

/// Rows plus the first failure seen, if any.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    pub first_failure: Option<Failure>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.rows.iter().map(|r| r.failures).sum()
    }
}

fn instances(setup: &Setup, n: usize, sampling: Sampling) -> Result<Vec<Instance>> {
    let shape = setup.shape(n)?;
    Ok(match sampling {
        Sampling::Exhaustive { budget } => match enumerate_instances(&shape, budget) {
            Ok(it) => it.collect(),
            Err(e) => bail!(UsageError(e.to_string())),
        },
        Sampling::Seeded { seed, samples } => sample_instances(&shape, seed, samples),
    })
}

/// Verifies `setup` at every width in `ns`.
pub fn sweep(setup: &Setup, ns: &[usize], sampling: Sampling) -> Result<SweepOutcome> {
    let mut rows = Vec::with_capacity(ns.len());
    let mut first_failure = None;
    for &n in ns {
        let protocol = setup.protocol(n)?;
        let report = verify(&protocol, instances(setup, n, sampling)?);
        let bound = setup.bound(n)?;
        let mut per_player_max = report.per_player_max_bits.clone();
        per_player_max.resize(setup.k, 0);
        rows.push(ResultRow {
            n,
            k: setup.k,
            protocol: setup.name(),
            view: setup.view().name().to_string(),
            checked: report.checked,
            failures: report.failures.len(),
            max_cost: report.worst_cost,
            non_output_max: report.worst_non_output_cost,
            per_player_max,
            bound,
            bound_ok: bound.map(|b| report.worst_non_output_cost as f64 <= b),
        });
        if first_failure.is_none() {
            first_failure = report.failures.into_iter().next();
        }
    }
    Ok(SweepOutcome { rows, first_failure })
}

/// Writes `rows` as CSV (`n,k,protocol,view,max_cost,p1_bits..pK_bits,...`)
/// or as a JSON array. `players` fixes the number of per-player columns.
pub fn write_rows<W: Write>(rows: &[ResultRow], players: usize, format: Format, out: W) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header: Vec<String> = ["n", "k", "protocol", "view", "max_cost"].map(String::from).to_vec();
            header.extend((1..=players).map(|j| format!("p{j}_bits")));
            header.extend(["checked", "failures", "non_output_max", "bound", "bound_ok"].map(String::from));
            w.write_record(&header)?;
            for r in rows {
                let mut rec = vec![r.n.to_string(), r.k.to_string(), r.protocol.clone(), r.view.clone(), r.max_cost.to_string()];
                rec.extend((0..players).map(|j| r.per_player_max.get(j).map_or_else(String::new, usize::to_string)));
                rec.push(r.checked.to_string());
                rec.push(r.failures.to_string());
                rec.push(r.non_output_max.to_string());
                rec.push(r.bound.map_or_else(String::new, |b| b.to_string()));
                rec.push(r.bound_ok.map_or_else(String::new, |b| b.to_string()));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// One-line description of a failure for humans.
pub fn describe_failure(f: &Failure) -> String {
    let what = match &f.kind {
        FailureKind::WrongOutput(got) => format!("output {got}, expected {}", f.expected),
        FailureKind::Error(e) => format!("error: {e}"),
    };
    format!("{what} on {}", serde_json::to_string(&InstanceDoc::from(&f.instance)).expect("serializable"))
}

/// Transcript of one run, for `nofjump run`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub protocol: String,
    pub view: String,
    pub instance: InstanceDoc,
    pub messages: Vec<String>,
    pub parts: Vec<Vec<usize>>,
    pub output: String,
    pub expected: String,
    pub correct: bool,
    pub total_cost: usize,
    pub non_output_cost: usize,
}

pub fn run_one(setup: &Setup, inst: &Instance) -> Result<RunReport> {
    if inst.k() != setup.k {
        bail!(UsageError(format!("instance has k = {}, protocol expects {}", inst.k(), setup.k)));
    }
    let protocol = setup.protocol(inst.n())?;
    let t = run_replayed(&protocol, inst)?;
    let expected = inst.eval();
    Ok(RunReport {
        protocol: setup.name(),
        view: setup.view().name().to_string(),
        instance: InstanceDoc::from(inst),
        messages: t.messages().iter().map(ToString::to_string).collect(),
        parts: t.messages().iter().map(|m| m.parts().to_vec()).collect(),
        output: t.output().to_string(),
        expected: expected.to_string(),
        correct: t.output() == expected,
        total_cost: t.total_cost(),
        non_output_cost: t.non_output_cost(),
    })
}

/// Cover construction for `nofjump cover`; everything 1-based.
#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    pub f: Vec<usize>,
    pub d: usize,
    pub scope: Option<Vec<usize>>,
    pub range_values: Vec<usize>,
    pub fibers: Vec<Vec<usize>>,
    pub blocks: Vec<Vec<usize>>,
    pub perms: Vec<Vec<usize>>,
    pub verified: bool,
    pub witness: Option<usize>,
}

pub fn cover_report(f: &[usize], scope: Option<&[usize]>, d: usize) -> Result<CoverReport> {
    if d == 0 {
        bail!(UsageError("--d must be positive".into()));
    }
    let func = LayerFunction::from_one_based(f).map_err(|e| UsageError(format!("--f: {e}")))?;
    let n = func.width();
    let cover = match scope {
        None => build_d_cover(&func, d),
        Some(members) => {
            if let Some(&bad) = members.iter().find(|&&s| s == 0 || s > n) {
                bail!(UsageError(format!("--s member {bad} outside 1..={n}")));
            }
            build_sd_cover(&func, &Subset::from_members(n, members.iter().map(|s| s - 1)), d)
        }
    };
    let check = cover.verify();
    let part = build_fiber_partition(&func);
    let one = |v: &[usize]| v.iter().map(|x| x + 1).collect::<Vec<_>>();
    Ok(CoverReport {
        f: f.to_vec(),
        d,
        scope: scope.map(<[usize]>::to_vec),
        range_values: one(&part.range_values),
        fibers: part.fibers.iter().map(|v| one(v)).collect(),
        blocks: part.blocks.iter().map(|v| one(v)).collect(),
        perms: cover.perms.iter().map(LayerFunction::to_one_based).collect(),
        verified: check.holds,
        witness: check.witness.map(|w| w + 1),
    })
}

/// Largest width `attack` accepts without an override.
pub const ATTACK_MAX_N: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct AttackReport {
    pub protocol: String,
    pub n: usize,
    pub k: usize,
    /// Largest per-player bit count the construction tolerates at this `n`.
    pub limit: Option<usize>,
    pub inst0: InstanceDoc,
    pub inst1: InstanceDoc,
    /// Shared messages of players `1..k-1`.
    pub prefix: Vec<String>,
    pub prefix_equal: bool,
    pub outputs: [String; 2],
    pub expected: [String; 2],
    pub errors: usize,
}

/// Builds and replays a fooling pair. Refusals surface as
/// [`nofjump::Error::Precondition`].
pub fn attack(setup: &Setup, n: usize, allow_large: bool) -> Result<AttackReport> {
    if n > ATTACK_MAX_N && !allow_large {
        bail!(UsageError(format!("attack enumerates C(n, n/2) strings per level; n = {n} exceeds {ATTACK_MAX_N} (pass --allow-large-n)")));
    }
    let protocol = setup.protocol(n)?;
    let pair = build_fooling_inputs(&protocol, n)?;
    let report = verify_fooling(&protocol, &pair.inst0, &pair.inst1)?;
    Ok(AttackReport {
        protocol: setup.name(),
        n,
        k: setup.k,
        limit: bit_limit(n),
        inst0: InstanceDoc::from(&pair.inst0),
        inst1: InstanceDoc::from(&pair.inst1),
        prefix: pair.prefix.iter().map(ToString::to_string).collect(),
        prefix_equal: report.prefix_equal,
        outputs: report.outputs.map(|a| a.to_string()),
        expected: report.expected.map(|a| a.to_string()),
        errors: report.errors,
    })
}

/// Protocols compared by `emit-plot-data` at a given `k`.
pub fn plot_setups(k: usize, d: usize, perm: PermChoice, seed: u64) -> Result<Vec<Setup>> {
    let mut names = vec![("index", Some(2))];
    if k == 3 {
        names.push(("mpj3-sublinear", Some(3)));
    }
    names.push(("mpjk-sublinear", Some(k.max(3))));
    names.push(("bucketing", Some(k.max(3))));
    names.push(("bucketing-doubling", Some(k.max(3))));
    names
        .into_iter()
        .map(|(name, k)| Setup::resolve(name, k, Some(d), perm, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list("4,8, 16").unwrap(), vec![4, 8, 16]);
        assert!(parse_list("").unwrap().is_empty());
        assert!(parse_list("4,x").is_err());
    }

    #[test]
    fn csv_layout() {
        let setup = Setup::resolve("index", None, None, PermChoice::Naive, 0).unwrap();
        let out = sweep(&setup, &[4], Sampling::Seeded { seed: 1, samples: 10 }).unwrap();
        let mut buf = Vec::new();
        write_rows(&out.rows, 2, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "n,k,protocol,view,max_cost,p1_bits,p2_bits,checked,failures,non_output_max,bound,bound_ok\n\
             4,2,index,full,5,4,1,10,0,4,4,true\n"
        );
    }

    #[test]
    fn cover_of_example() {
        let r = cover_report(&[2, 2, 4, 4], None, 2).unwrap();
        assert_eq!(r.perms, vec![vec![2, 1, 4, 3], vec![1, 2, 3, 4]]);
        assert!(r.verified);
        assert!(cover_report(&[2, 9], None, 1).is_err());
    }

    #[test]
    fn attack_refuses_large_n() {
        let setup = Setup::resolve("truncate4", None, None, PermChoice::Naive, 0).unwrap();
        let err = attack(&setup, 18, false).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }
}
