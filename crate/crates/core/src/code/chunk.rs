use std::fmt;

use serde::{Deserialize, Serialize};

/// An opaque coded symbol. Codes act on chunks bytewise via XOR.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Chunk(pub Vec<u8>);

impl Chunk {
    pub fn zeros(len: usize) -> Chunk {
        Chunk(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    /// `self ^= other`; both chunks must have equal length.
    pub fn xor_assign(&mut self, other: &Chunk) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
}

impl From<Vec<u8>> for Chunk {
    fn from(v: Vec<u8>) -> Chunk {
        Chunk(v)
    }
}

impl fmt::Debug for Chunk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: String = self.0.iter().take(8).map(|b| format!("{b:02x}")).collect();
        write!(f, "Chunk[{}]({head}{})", self.len(), if self.len() > 8 { ".." } else { "" })
    }
}
