use std::collections::BTreeSet;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cit::params::{CitParams, LayerShape};
use crate::code::{Chunk, SystematicEncoder, TannerGraph};
use crate::error::{input_err, Error, Result};

pub const HASH_LEN: usize = 32;
pub type Hash = [u8; HASH_LEN];

pub fn hash_chunk(c: &Chunk) -> Hash {
    Sha256::digest(c.as_bytes()).into()
}

/// Index of the data symbol one layer up that holds the hash of symbol `x`,
/// and the slot of that hash inside it.
fn parent_slot(x: usize, parent: &LayerShape) -> (usize, usize) {
    (x % parent.s, x / parent.s)
}

/// Layered coded symbols with their root commitment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodedInterleavingTree {
    pub params: CitParams,
    /// `layers[0]` is layer 1 (just below the root); the last entry is the base layer.
    pub layers: Vec<Vec<Chunk>>,
    pub root: Vec<Hash>,
}

/// Builds the tree bottom-up from `block`.
///
/// `codes[j]` encodes layer `j + 1` and must keep its parity in the trailing
/// `p_j` columns.
pub fn build_cit(block: &[u8], params: &CitParams, codes: &[TannerGraph]) -> Result<CodedInterleavingTree> {
    let shapes = params.shapes()?;
    if params.hash_size as usize != HASH_LEN {
        return Err(Error::Params(format!("hash size must be {HASH_LEN} bytes (SHA-256)")));
    }
    if codes.len() != params.layers {
        return Err(Error::Params(format!("{} codes given for {} layers", codes.len(), params.layers)));
    }
    if block.len() as u64 > params.block_size {
        return Err(Error::Params(format!("block of {} bytes exceeds b = {}", block.len(), params.block_size)));
    }
    let encoders = shapes
        .iter()
        .zip(codes)
        .enumerate()
        .map(|(j, (sh, g))| {
            if g.num_vns() != sh.n {
                return Err(Error::Params(format!("code for layer {} has {} VNs, need {}", j + 1, g.num_vns(), sh.n)));
            }
            let enc = SystematicEncoder::new(g, sh.s)?;
            if !enc.layout().trailing_parity {
                return Err(Error::Params(format!(
                    "code for layer {}: the last {} columns do not span the checks",
                    j + 1,
                    sh.p
                )));
            }
            Ok(enc)
        })
        .collect::<Result<Vec<_>>>()?;

    let base = shapes[params.layers - 1];
    let chunk_len = params.base_chunk_len()?;
    let mut padded = block.to_vec();
    padded.resize(chunk_len * base.s, 0);
    let data: Vec<Chunk> = padded.chunks(chunk_len).map(|c| Chunk(c.to_vec())).collect();

    let mut layers = vec![Vec::new(); params.layers];
    layers[params.layers - 1] = encoders[params.layers - 1].encode(&data)?;
    for j in (0..params.layers - 1).rev() {
        let child = &layers[j + 1];
        let hashes: Vec<Hash> = child.par_iter().map(hash_chunk).collect();
        let parent = shapes[j];
        let mut data = vec![Vec::with_capacity(params.hash_batch_len()); parent.s];
        for (x, h) in hashes.iter().enumerate() {
            data[x % parent.s].extend_from_slice(h);
        }
        let data: Vec<Chunk> = data.into_iter().map(Chunk).collect();
        layers[j] = encoders[j].encode(&data)?;
    }
    let root = layers[0].par_iter().map(hash_chunk).collect();
    Ok(CodedInterleavingTree { params: params.clone(), layers, root })
}

/// POM symbol indices (data, parity) at every layer above `layer`, top first.
pub fn pom_indices(params: &CitParams, layer: usize, index: usize) -> Result<Vec<(usize, usize)>> {
    let shapes = params.shapes()?;
    if layer == 0 || layer > params.layers {
        return Err(input_err!("layer {layer} outside 1..={}", params.layers));
    }
    if index >= shapes[layer - 1].n {
        return Err(input_err!("index {index} outside layer {layer} of size {}", shapes[layer - 1].n));
    }
    Ok(shapes[..layer - 1].iter().map(|sh| (index % sh.s, sh.s + index % sh.p)).collect())
}

/// The two full symbols of one proof layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PomLayer {
    pub data_index: usize,
    pub data: Chunk,
    pub parity_index: usize,
    pub parity: Chunk,
}

/// Proof of membership for symbol `index` of `layer`; `layers[0]` is layer 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofOfMembership {
    pub layer: usize,
    pub index: usize,
    pub layers: Vec<PomLayer>,
}

impl CodedInterleavingTree {
    pub fn symbol(&self, layer: usize, index: usize) -> Result<&Chunk> {
        self.layers
            .get(layer.wrapping_sub(1))
            .and_then(|l| l.get(index))
            .ok_or_else(|| input_err!("no symbol ({layer}, {index})"))
    }

    pub fn pom(&self, layer: usize, index: usize) -> Result<ProofOfMembership> {
        let idx = pom_indices(&self.params, layer, index)?;
        let layers = idx
            .into_iter()
            .enumerate()
            .map(|(j, (d, p))| PomLayer {
                data_index: d,
                data: self.layers[j][d].clone(),
                parity_index: p,
                parity: self.layers[j][p].clone(),
            })
            .collect();
        Ok(ProofOfMembership { layer, index, layers })
    }

    /// Layered binary form: a JSON header line, then every symbol in layer order.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let header = TreeHeader {
            params: self.params.clone(),
            symbol_lens: self.layers.iter().map(|l| l.first().map_or(0, Chunk::len)).collect(),
            root: self.root.iter().map(hex::encode).collect(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for layer in &self.layers {
            for c in layer {
                w.write_all(c.as_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<CodedInterleavingTree> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        let nl = buf.iter().position(|&b| b == b'\n').ok_or_else(|| Error::Parse("tree: missing header".into()))?;
        let header: TreeHeader = serde_json::from_slice(&buf[..nl])?;
        let shapes = header.params.shapes()?;
        let mut rest = &buf[nl + 1..];
        let mut layers = Vec::new();
        for (sh, &len) in shapes.iter().zip(&header.symbol_lens) {
            let mut layer = Vec::with_capacity(sh.n);
            for _ in 0..sh.n {
                if rest.len() < len {
                    return Err(Error::Parse("tree: truncated symbol data".into()));
                }
                layer.push(Chunk(rest[..len].to_vec()));
                rest = &rest[len..];
            }
            layers.push(layer);
        }
        if !rest.is_empty() {
            return Err(Error::Parse("tree: trailing bytes".into()));
        }
        let root = header
            .root
            .iter()
            .map(|h| {
                let v = hex::decode(h).map_err(|e| Error::Parse(format!("tree: root hash: {e}")))?;
                Hash::try_from(v.as_slice()).map_err(|_| Error::Parse("tree: root hash length".into()))
            })
            .collect::<Result<_>>()?;
        Ok(CodedInterleavingTree { params: header.params, layers, root })
    }
}

#[derive(Serialize, Deserialize)]
struct TreeHeader {
    params: CitParams,
    symbol_lens: Vec<usize>,
    root: Vec<String>,
}

/// Proof in transmitted form: per layer, the data symbol without the hash the
/// verifier recomputes (`q - 1` hashes) and the full parity symbol (`q` hashes).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactPom {
    pub layer: usize,
    pub index: usize,
    /// Top layer first.
    pub parts: Vec<(Vec<u8>, Vec<u8>)>,
}

impl ProofOfMembership {
    pub fn compact(&self, params: &CitParams) -> Result<CompactPom> {
        let shapes = params.shapes()?;
        let y = params.hash_size as usize;
        let parts = self
            .layers
            .iter()
            .enumerate()
            .map(|(j, pl)| {
                let child = if j + 1 == self.layers.len() { self.index } else { self.layers[j + 1].data_index };
                let (_, slot) = parent_slot(child, &shapes[j]);
                let mut d = pl.data.0.clone();
                d.drain(slot * y..(slot + 1) * y);
                (d, pl.parity.0.clone())
            })
            .collect();
        Ok(CompactPom { layer: self.layer, index: self.index, parts })
    }
}

impl CompactPom {
    /// Raw concatenation, `y (2q - 1)` bytes per layer above the symbol.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.parts.iter().flat_map(|(d, p)| d.iter().chain(p)).copied().collect()
    }

    pub fn from_bytes(params: &CitParams, layer: usize, index: usize, bytes: &[u8]) -> Result<CompactPom> {
        pom_indices(params, layer, index)?;
        let y = params.hash_size as usize;
        let q = params.batch as usize;
        let per = y * (2 * q - 1);
        if bytes.len() != per * (layer - 1) {
            return Err(input_err!("proof of {} bytes, expected {}", bytes.len(), per * (layer - 1)));
        }
        let parts = bytes
            .chunks(per)
            .map(|c| (c[..y * (q - 1)].to_vec(), c[y * (q - 1)..].to_vec()))
            .collect();
        Ok(CompactPom { layer, index, parts })
    }

    /// Length-prefixed record: `layer`, `index` and the proof bytes, all little-endian.
    pub fn write_record(&self, mut w: impl Write) -> Result<()> {
        let body = self.to_bytes();
        w.write_all(&(self.layer as u32).to_le_bytes())?;
        w.write_all(&(self.index as u32).to_le_bytes())?;
        w.write_all(&(body.len() as u32).to_le_bytes())?;
        w.write_all(&body)?;
        Ok(())
    }

    pub fn read_record(params: &CitParams, mut r: impl Read) -> Result<CompactPom> {
        let mut word = [0u8; 4];
        let mut next = |r: &mut dyn Read| -> Result<usize> {
            r.read_exact(&mut word)?;
            Ok(u32::from_le_bytes(word) as usize)
        };
        let layer = next(&mut r)?;
        let index = next(&mut r)?;
        let len = next(&mut r)?;
        let mut body = vec![0; len];
        r.read_exact(&mut body)?;
        CompactPom::from_bytes(params, layer, index, &body)
    }
}

/// Checks `chunk` at `(layer, index)` against `root` through `proof`.
///
/// Malformed proof shapes are input errors; a well-formed proof that does not
/// lead to the root gives `Ok(false)`.
pub fn verify_chunk(
    root: &[Hash],
    params: &CitParams,
    layer: usize,
    index: usize,
    chunk: &Chunk,
    proof: &CompactPom,
) -> Result<bool> {
    let idx = pom_indices(params, layer, index)?;
    let shapes = params.shapes()?;
    let y = params.hash_size as usize;
    let q = params.batch as usize;
    if proof.layer != layer || proof.index != index || proof.parts.len() != idx.len() {
        return Err(input_err!("proof is for ({}, {}) with {} layers", proof.layer, proof.index, proof.parts.len()));
    }
    if root.len() != shapes[0].n {
        return Err(input_err!("root has {} hashes, expected {}", root.len(), shapes[0].n));
    }
    if proof.parts.iter().any(|(d, p)| d.len() != y * (q - 1) || p.len() != y * q) {
        return Err(input_err!("proof part of the wrong size"));
    }
    let expected_len = if layer == params.layers { params.base_chunk_len()? } else { params.hash_batch_len() };
    if chunk.len() != expected_len {
        return Ok(false);
    }

    // Walk upwards: `carried` is the hash of the known child at the layer below.
    let mut carried = hash_chunk(chunk);
    let mut child_index = index;
    let mut parity_child: Option<(usize, Hash)> = None;
    for j in (0..idx.len()).rev() {
        let (d_idx, p_idx) = idx[j];
        let (d_part, p_part) = &proof.parts[j];
        let (_, slot) = parent_slot(child_index, &shapes[j]);
        let mut data = d_part.clone();
        data.splice(slot * y..slot * y, carried);
        if let Some((pc, ph)) = parity_child {
            let (at, s) = parent_slot(pc, &shapes[j]);
            if at != d_idx || data[s * y..(s + 1) * y] != ph {
                return Ok(false);
            }
        }
        carried = Sha256::digest(&data).into();
        parity_child = Some((p_idx, Sha256::digest(p_part).into()));
        child_index = d_idx;
    }
    match parity_child {
        None => Ok(root.get(index) == Some(&carried)),
        Some((p_idx, ph)) => Ok(root[child_index] == carried && root[p_idx] == ph),
    }
}

/// Per layer above the base, the symbol indices referenced by the POMs of `base`.
pub fn pom_index_cover(params: &CitParams, base: &BTreeSet<usize>) -> Result<Vec<BTreeSet<usize>>> {
    let shapes = params.shapes()?;
    let m = shapes[params.layers - 1].n;
    if let Some(&bad) = base.iter().find(|&&i| i >= m) {
        return Err(input_err!("base index {bad} outside 0..{m}"));
    }
    Ok(shapes[..params.layers - 1]
        .iter()
        .map(|sh| base.iter().flat_map(|&i| [i % sh.s, sh.s + i % sh.p]).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{satisfies_checks, with_trailing_parity};
    use crate::peg::{build_peg, PegParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small() -> CitParams {
        CitParams { block_size: 4000, layers: 3, base_size: 64, ..CitParams::reference() }
    }

    fn codes(p: &CitParams) -> Vec<TannerGraph> {
        p.shapes()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(j, sh)| with_trailing_parity(&build_peg(&PegParams::for_layer(j + 1, sh.n, 1, 2, 11)).unwrap()).unwrap())
            .collect()
    }

    fn block(n: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random()).collect()
    }

    #[test]
    fn pom_index_examples() {
        let p = CitParams::reference();
        assert_eq!(pom_indices(&p, 4, 0).unwrap(), vec![(0, 16), (0, 32), (0, 64)]);
        assert_eq!(pom_indices(&p, 4, 69).unwrap()[2], (5, 69));
        assert!(pom_indices(&p, 1, 3).unwrap().is_empty());
        assert!(pom_indices(&p, 4, 256).is_err());
        assert!(pom_indices(&p, 5, 0).is_err());
    }

    #[test]
    fn build_is_deterministic_and_sensitive() {
        let p = small();
        let cs = codes(&p);
        let b = block(4000, 1);
        let t = build_cit(&b, &p, &cs).unwrap();
        assert_eq!(t.root, build_cit(&b, &p, &cs).unwrap().root);
        let mut c = b.clone();
        c[1234] ^= 1;
        assert_ne!(t.root, build_cit(&c, &p, &cs).unwrap().root);
        for (g, layer) in cs.iter().zip(&t.layers) {
            assert!(satisfies_checks(g, layer));
        }
        assert!(build_cit(&block(4001, 0), &p, &cs).is_err());
    }

    #[test]
    fn non_trailing_code_rejected() {
        let p = CitParams { layers: 1, base_size: 16, block_size: 100, ..CitParams::reference() };
        let g = build_peg(&PegParams::for_layer(1, 16, 1, 2, 0)).unwrap();
        let good = with_trailing_parity(&g).unwrap();
        // move the trailing columns to the front
        let order: Vec<usize> = (8..16).chain(0..8).collect();
        let bad = good.permute_columns(&order).unwrap();
        assert!(build_cit(&block(100, 0), &p, &[good]).is_ok());
        assert!(matches!(build_cit(&block(100, 0), &p, &[bad]), Err(Error::Params(_))));
    }

    #[test]
    fn proofs_verify_and_detect_tampering() {
        let p = small();
        let t = build_cit(&block(4000, 2), &p, &codes(&p)).unwrap();
        for (layer, index) in [(3, 0), (3, 45), (2, 31), (1, 7)] {
            let chunk = t.symbol(layer, index).unwrap();
            let proof = t.pom(layer, index).unwrap().compact(&p).unwrap();
            assert!(verify_chunk(&t.root, &p, layer, index, chunk, &proof).unwrap());
            let mut bad = chunk.clone();
            bad.0[0] ^= 0x80;
            assert!(!verify_chunk(&t.root, &p, layer, index, &bad, &proof).unwrap());
            for part in 0..proof.parts.len() {
                for which in 0..2 {
                    let mut q = proof.clone();
                    let v = if which == 0 { &mut q.parts[part].0 } else { &mut q.parts[part].1 };
                    v[3] ^= 1;
                    assert!(!verify_chunk(&t.root, &p, layer, index, chunk, &q).unwrap());
                }
            }
        }
        let proof = t.pom(3, 1).unwrap().compact(&p).unwrap();
        assert!(verify_chunk(&t.root, &p, 3, 0, t.symbol(3, 0).unwrap(), &proof).is_err());
    }

    #[test]
    fn compact_proof_round_trips() {
        let p = small();
        let t = build_cit(&block(4000, 3), &p, &codes(&p)).unwrap();
        let proof = t.pom(3, 17).unwrap().compact(&p).unwrap();
        assert_eq!(proof.to_bytes().len(), 32 * 7 * 2);
        assert_eq!(CompactPom::from_bytes(&p, 3, 17, &proof.to_bytes()).unwrap(), proof);
        let mut buf = Vec::new();
        proof.write_record(&mut buf).unwrap();
        assert_eq!(CompactPom::read_record(&p, buf.as_slice()).unwrap(), proof);
        assert!(CompactPom::from_bytes(&p, 3, 17, &proof.to_bytes()[1..]).is_err());
    }

    #[test]
    fn tree_file_round_trips() {
        let p = small();
        let t = build_cit(&block(3000, 4), &p, &codes(&p)).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(CodedInterleavingTree::read_from(buf.as_slice()).unwrap(), t);
        buf.pop();
        assert!(CodedInterleavingTree::read_from(buf.as_slice()).is_err());
    }

    #[test]
    fn index_cover_edges() {
        let p = CitParams::reference();
        let all: BTreeSet<usize> = (0..256).collect();
        let c = pom_index_cover(&p, &all).unwrap();
        assert_eq!(c.iter().map(BTreeSet::len).collect::<Vec<_>>(), vec![32, 64, 128]);
        assert!(pom_index_cover(&p, &BTreeSet::new()).unwrap().iter().all(BTreeSet::is_empty));
        assert!(pom_index_cover(&p, &[256].into_iter().collect()).is_err());
    }
}
