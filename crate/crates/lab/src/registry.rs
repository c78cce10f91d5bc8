//! Protocols the CLI can name, with their default `k`, instance family, and
//! communication bound.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, Result};

use nofjump::bucketing::{bucketing_protocol, bucketing_protocol_doubling, BucketPlan};
use nofjump::family::{family_protocol, FamilySpec};
use nofjump::generate::InstanceShape;
use nofjump::jump::{
    choose_d, index_protocol, mpj3_cost_bound, mpj3_sublinear, mpjk_cost_bound, mpjk_sublinear, NaivePermProtocol,
    PermProtocol3,
};
use nofjump::sim::{player_fn, Message, Protocol, ViewKind};
use nofjump::Variant;

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    Index,
    Mpj3Sublinear,
    MpjkSublinear,
    Bucketing,
    BucketingDoubling,
    /// Every player stays silent and the last one answers 0.
    BrokenConst,
    Family(FamilySpec),
}

impl FromStr for ProtocolKind {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, UsageError> {
        Ok(match s {
            "index" => ProtocolKind::Index,
            "mpj3-sublinear" => ProtocolKind::Mpj3Sublinear,
            "mpjk-sublinear" => ProtocolKind::MpjkSublinear,
            "bucketing" => ProtocolKind::Bucketing,
            "bucketing-doubling" => ProtocolKind::BucketingDoubling,
            "broken-const" => ProtocolKind::BrokenConst,
            other => ProtocolKind::Family(
                other
                    .parse()
                    .map_err(|_| UsageError(format!("unknown protocol `{other}`")))?,
            ),
        })
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolKind::Index => f.write_str("index"),
            ProtocolKind::Mpj3Sublinear => f.write_str("mpj3-sublinear"),
            ProtocolKind::MpjkSublinear => f.write_str("mpjk-sublinear"),
            ProtocolKind::Bucketing => f.write_str("bucketing"),
            ProtocolKind::BucketingDoubling => f.write_str("bucketing-doubling"),
            ProtocolKind::BrokenConst => f.write_str("broken-const"),
            ProtocolKind::Family(spec) => spec.fmt(f),
        }
    }
}

/// Black box for the permutation case of the 3-player problem.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum PermChoice {
    #[default]
    Naive,
}

impl PermChoice {
    fn build(self, n: usize) -> Arc<dyn PermProtocol3> {
        match self {
            PermChoice::Naive => Arc::new(NaivePermProtocol::new(n)),
        }
    }
}

/// A protocol name with its parameters resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Setup {
    pub kind: ProtocolKind,
    pub k: usize,
    /// Cover parameter of the sublinear protocols.
    pub d: Option<usize>,
    pub perm: PermChoice,
    /// Seed for parity subsets and hash keys of sample protocols.
    pub seed: u64,
}

impl Setup {
    pub fn resolve(name: &str, k: Option<usize>, d: Option<usize>, perm: PermChoice, seed: u64) -> Result<Self> {
        let kind: ProtocolKind = name.parse()?;
        let fixed = |want: usize| -> Result<usize> {
            match k {
                Some(k) if k != want => Err(UsageError(format!("{kind} is a {want}-player protocol, got --k {k}")).into()),
                _ => Ok(want),
            }
        };
        let k = match kind {
            ProtocolKind::Index => fixed(2)?,
            ProtocolKind::Mpj3Sublinear => fixed(3)?,
            ProtocolKind::MpjkSublinear => k.unwrap_or(4),
            _ => k.unwrap_or(3),
        };
        if k < 2 {
            bail!(UsageError(format!("k must be at least 2, got {k}")));
        }
        let d = match kind {
            ProtocolKind::Mpj3Sublinear | ProtocolKind::MpjkSublinear => {
                // m = n for the naive black box, so φ = 1
                let d = match d {
                    Some(d) => d,
                    None => choose_d(k, 1.0)?,
                };
                if d == 0 {
                    bail!(UsageError("--d must be positive".into()));
                }
                Some(d)
            }
            _ => None,
        };
        Ok(Self { kind, k, d, perm, seed })
    }

    pub fn name(&self) -> String {
        self.kind.to_string()
    }

    pub fn view(&self) -> ViewKind {
        match self.kind {
            ProtocolKind::Bucketing | ProtocolKind::BucketingDoubling | ProtocolKind::Family(_) => ViewKind::Collapsing,
            _ => ViewKind::FullOneWay,
        }
    }

    pub fn shape(&self, n: usize) -> Result<InstanceShape> {
        if n == 0 {
            bail!(UsageError("n must be positive".into()));
        }
        Ok(match self.kind {
            ProtocolKind::Bucketing | ProtocolKind::BucketingDoubling => InstanceShape::hat_perm(n, self.k),
            _ => InstanceShape::mpj(n, self.k),
        })
    }

    pub fn protocol(&self, n: usize) -> Result<Protocol> {
        let k = self.k;
        Ok(match self.kind {
            ProtocolKind::Index => index_protocol(n),
            ProtocolKind::Mpj3Sublinear => mpj3_sublinear(self.perm.build(n), self.d.expect("resolved"))?,
            ProtocolKind::MpjkSublinear => mpjk_sublinear(self.perm.build(n), self.d.expect("resolved"), k)?,
            ProtocolKind::Bucketing => bucketing_protocol(n, k)?,
            ProtocolKind::BucketingDoubling => bucketing_protocol_doubling(n, k)?,
            ProtocolKind::BrokenConst => {
                let mut players = vec![player_fn(|_| Ok(Message::new())); k - 1];
                players.push(player_fn(|_| Ok(Message::from_bits(vec![false]))));
                Protocol::new("broken-const", Variant::Mpj, ViewKind::FullOneWay, players).with_width(n)
            }
            ProtocolKind::Family(spec) => family_protocol(spec.kind, n, k, spec.t, self.seed)?,
        })
    }

    /// Bucket plan, for the bucketing protocols.
    pub fn plan(&self, n: usize) -> Result<Option<BucketPlan>> {
        Ok(match self.kind {
            ProtocolKind::Bucketing => Some(BucketPlan::standard(n, self.k)?),
            ProtocolKind::BucketingDoubling => Some(BucketPlan::doubling(n, self.k)?),
            _ => None,
        })
    }

    /// Upper bound on the bits written by players `1..k` (output excluded).
    pub fn bound(&self, n: usize) -> Result<Option<f64>> {
        Ok(match self.kind {
            ProtocolKind::Index => Some(n as f64),
            ProtocolKind::Mpj3Sublinear => Some(mpj3_cost_bound(n, self.d.expect("resolved"), n)),
            ProtocolKind::MpjkSublinear => Some(mpjk_cost_bound(n, self.k, self.d.expect("resolved"), n)),
            ProtocolKind::Bucketing | ProtocolKind::BucketingDoubling => {
                self.plan(n)?.map(|p| p.cost_bound() as f64)
            }
            ProtocolKind::BrokenConst | ProtocolKind::Family(_) => None,
        })
    }
}
