//! Coded interleaving tree: a Merkle tree whose every layer is LDPC-coded
//! before being hashed into its parent.

mod params;
mod tree;

pub use params::{CitParams, LayerShape};
pub use tree::{
    build_cit, hash_chunk, pom_index_cover, pom_indices, verify_chunk, CodedInterleavingTree, CompactPom, Hash,
    PomLayer, ProofOfMembership, HASH_LEN,
};
