//! Binary LDPC primitives over byte chunks.

mod alist;
mod chunk;
mod cycles;
mod encode;
mod peel;
mod sets;
mod tanner;

pub use alist::{read_alist, write_alist};
pub use chunk::Chunk;
pub use cycles::{
    enumerate_g_cycles, enumerate_g_cycles_capped, enumerate_g_cycles_from_cn, Cycle, CycleEnumeration,
    DEFAULT_CYCLE_CAP,
};
pub use encode::{gf2_rank, pivots_in_order, satisfies_checks, systematic_encode, trailing_parity_order, with_trailing_parity, SystematicEncoder, SystematicLayout};
pub use peel::{peel_decode, peel_erasures, PeelStatus, PeelingOutcome};
pub use sets::{emd, is_stopping_set};
pub use tanner::{Node, TannerGraph};
