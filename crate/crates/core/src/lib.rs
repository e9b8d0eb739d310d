pub mod cit;
pub mod code;
pub mod cost;
pub mod dispersal;
pub mod error;
pub mod fraction;
mod hitting;
pub mod peg;
pub mod sim;
pub mod stopping;

pub use code::{Chunk, TannerGraph};
pub use error::{Error, Result};
pub use fraction::Fraction;
pub use hitting::greedy_hitting_set;
pub use peg::{build_de_peg, build_peg, BadCycleLedger, PegParams};
pub use stopping::{enumerate_stopping_sets, greedy_cover, MinSize, StoppingSetReport};
pub use cit::{CitParams, CodedInterleavingTree};
pub use cost::{Bytes, CostBreakdown};
pub use dispersal::{DispersalPlan, OracleParams};
pub use sim::{AdversaryModel, RoundOutcome};
