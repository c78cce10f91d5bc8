//! JSON form of an instance:
//!
//! ```json
//! {"n":4,"k":3,"variant":"mpj","i":2,"layers":[[3,1,2,4]],"x":"0101"}
//! ```
//!
//! Values are 1-based, `layers` lists `f_2` first, and `x` is omitted for the
//! vertex-valued variant. `perm_mask` is optional and only written when some
//! layer is required to be a permutation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{BitVector, Instance, LayerFunction, MpjHatInstance, MpjInstance, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub n: usize,
    pub k: usize,
    pub variant: Variant,
    pub i: usize,
    pub layers: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm_mask: Option<Vec<bool>>,
}

impl From<&Instance> for InstanceDoc {
    fn from(inst: &Instance) -> Self {
        match inst {
            Instance::Mpj(m) => InstanceDoc {
                n: m.n(),
                k: m.k(),
                variant: Variant::Mpj,
                i: m.start() + 1,
                layers: m.middles().iter().map(LayerFunction::to_one_based).collect(),
                x: Some(m.x().to_string()),
                perm_mask: None,
            },
            Instance::Hat(h) => InstanceDoc {
                n: h.n(),
                k: h.k(),
                variant: Variant::MpjHat,
                i: h.start() + 1,
                layers: h.layers().iter().map(LayerFunction::to_one_based).collect(),
                x: None,
                perm_mask: h.perm_mask().iter().any(|&b| b).then(|| h.perm_mask().to_vec()),
            },
        }
    }
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Instance> {
        if doc.i == 0 || doc.i > doc.n {
            return Err(Error::OutOfRange { value: doc.i, n: doc.n });
        }
        let layers = doc
            .layers
            .iter()
            .map(|l| {
                if l.len() != doc.n {
                    return Err(Error::WidthMismatch { expected: doc.n, found: l.len() });
                }
                LayerFunction::from_one_based(l)
            })
            .collect::<Result<Vec<_>>>()?;
        let inst: Instance = match doc.variant {
            Variant::Mpj => {
                let x: BitVector = doc
                    .x
                    .as_deref()
                    .ok_or_else(|| Error::Malformed("mpj instance without x".into()))?
                    .parse()?;
                if x.width() != doc.n {
                    return Err(Error::WidthMismatch { expected: doc.n, found: x.width() });
                }
                MpjInstance::new(doc.i - 1, layers, x)?.into()
            }
            Variant::MpjHat => {
                if doc.x.is_some() {
                    return Err(Error::Malformed("mpjhat instance must not carry x".into()));
                }
                let mask = doc.perm_mask.unwrap_or_else(|| vec![false; layers.len()]);
                MpjHatInstance::new(doc.i - 1, layers, mask)?.into()
            }
        };
        if inst.k() != doc.k {
            return Err(Error::Malformed(format!(
                "k = {} but {} layers imply k = {}",
                doc.k,
                doc.layers.len(),
                inst.k()
            )));
        }
        Ok(inst)
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string(&InstanceDoc::from(inst)).expect("instance serializes")
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    doc.try_into()
}
