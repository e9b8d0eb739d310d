use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraction::Fraction;

/// Shape of a coded interleaving tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitParams {
    /// Block size `b` in bytes.
    pub block_size: u64,
    /// Hash output size `y` in bytes.
    pub hash_size: u64,
    /// Hashes batched per parent data symbol, `q`.
    pub batch: u64,
    /// Number of layers `l` below the root.
    pub layers: usize,
    /// Base layer length `M`.
    pub base_size: u64,
    pub rate: Fraction,
}

impl CitParams {
    /// The four-layer, rate-1/2 tree with 1 MB blocks and 32-byte hashes.
    pub fn reference() -> CitParams {
        CitParams {
            block_size: 1_000_000,
            hash_size: 32,
            batch: 4,
            layers: 4,
            base_size: 256,
            rate: Fraction::new(1, 2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Params(m));
        if self.layers == 0 {
            return bad("need at least one layer".into());
        }
        if self.batch < 2 || self.hash_size == 0 || self.block_size == 0 {
            return bad("batch must be >= 2, hash size and block size positive".into());
        }
        let r = self.rate.ratio();
        if r <= Ratio::from_integer(0) || r >= Ratio::from_integer(1) {
            return bad(format!("rate {} must lie in (0, 1)", self.rate));
        }
        let sizes = self.layer_sizes_unchecked();
        for (j, n) in sizes.iter().enumerate() {
            if !n.is_integer() || *n < Ratio::from_integer(1) {
                return bad(format!("layer {} size {n} is not a positive integer", j + 1));
            }
            if !(n * r).is_integer() {
                return bad(format!("layer {} has a fractional number of data symbols", j + 1));
            }
        }
        if self.layers > 1 {
            let q = Ratio::from_integer(self.batch as i64);
            if !(q * r).is_integer() || !(q * (Ratio::from_integer(1) - r)).is_integer() {
                return bad(format!(
                    "q R and q (1 - R) must be integers for the sibling property (q = {}, R = {})",
                    self.batch, self.rate
                ));
            }
        }
        Ok(())
    }

    fn layer_sizes_unchecked(&self) -> Vec<Ratio<i64>> {
        let qr = Ratio::from_integer(self.batch as i64) * self.rate.ratio();
        (1..=self.layers)
            .map(|j| Ratio::from_integer(self.base_size as i64) / qr.pow((self.layers - j) as i32))
            .collect()
    }

    /// `[n_1, ..., n_l]`.
    pub fn layer_sizes(&self) -> Result<Vec<usize>> {
        self.validate()?;
        Ok(self.layer_sizes_unchecked().iter().map(|n| n.to_integer() as usize).collect())
    }

    /// `(n_j, s_j, p_j)` for 1-based layer `j`.
    pub fn layer_shape(&self, j: usize) -> Result<LayerShape> {
        let sizes = self.layer_sizes()?;
        if j == 0 || j > self.layers {
            return Err(Error::Input(format!("layer {j} outside 1..={}", self.layers)));
        }
        Ok(self.shape_of(sizes[j - 1]))
    }

    fn shape_of(&self, n: usize) -> LayerShape {
        let s = (self.rate.ratio() * Ratio::from_integer(n as i64)).to_integer() as usize;
        LayerShape { n, s, p: n - s }
    }

    pub fn shapes(&self) -> Result<Vec<LayerShape>> {
        Ok(self.layer_sizes()?.into_iter().map(|n| self.shape_of(n)).collect())
    }

    /// Number of root hashes, `t = n_1`.
    pub fn root_hashes(&self) -> Result<usize> {
        Ok(self.layer_sizes()?[0])
    }

    /// Bytes in one base-layer data chunk as stored (rounded up).
    pub fn base_chunk_len(&self) -> Result<usize> {
        let s = self.shapes()?[self.layers - 1].s;
        Ok(self.block_size.div_ceil(s as u64) as usize)
    }

    /// Bytes in one upper-layer symbol, `q y`.
    pub fn hash_batch_len(&self) -> usize {
        (self.batch * self.hash_size) as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerShape {
    pub n: usize,
    /// Data symbols.
    pub s: usize,
    /// Parity symbols.
    pub p: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_layer_sizes() {
        assert_eq!(CitParams::reference().layer_sizes().unwrap(), vec![32, 64, 128, 256]);
        assert_eq!(CitParams::reference().root_hashes().unwrap(), 32);
    }

    #[test]
    fn single_layer_and_small_tree() {
        let p = CitParams { layers: 1, ..CitParams::reference() };
        assert_eq!(p.layer_sizes().unwrap(), vec![256]);
        let p = CitParams { layers: 3, base_size: 64, ..CitParams::reference() };
        assert_eq!(p.layer_sizes().unwrap(), vec![16, 32, 64]);
    }

    #[test]
    fn non_integral_sizes_rejected() {
        let p = CitParams { base_size: 250, ..CitParams::reference() };
        assert!(p.layer_sizes().is_err());
        let p = CitParams { batch: 3, rate: Fraction::new(1, 3), base_size: 27, layers: 2, ..CitParams::reference() };
        // q R = 1 keeps sizes integral but n_1 R = 9 is fine; q(1 - R) = 2 as well
        assert!(p.validate().is_ok());
        let p = CitParams { batch: 3, rate: Fraction::new(1, 2), base_size: 54, layers: 2, ..CitParams::reference() };
        assert!(p.validate().is_err());
    }
}
