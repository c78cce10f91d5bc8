//! Simulation toolkit for multiparty pointer jumping in the one-way
//! number-on-the-forehead model: instances, a blackboard runtime with enforced
//! views, cover-based and bucketing protocols, and a fooling-set adversary.

pub mod adversary;
pub mod bucketing;
pub mod covers;
pub mod error;
pub mod family;
pub mod generate;
pub mod instance;
pub mod jump;
pub mod schema;
pub mod sim;

pub use error::{Error, Result};
pub use instance::{Answer, BitVector, Instance, Layer, LayerFunction, MpjHatInstance, MpjInstance, Subset, Variant};
pub use sim::{run, verify, Message, PlayerView, Protocol, Transcript, ViewKind};
