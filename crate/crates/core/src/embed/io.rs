//! Binary model file.
//!
//! Layout, all integers and reals little-endian:
//!
//! ```text
//! magic        8 bytes  "CCDEMB01"
//! dim          u32
//! vocab        u32
//! seed         u64
//! window_k     u32
//! negatives    u32
//! epochs       u32
//! learn_rate   f64
//! per word:    u32 byte length, UTF-8 bytes, dim f64 input, dim f64 output
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{EmbeddingModel, SkipgramConfig};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"CCDEMB01";

pub fn write_model<W: Write>(model: &EmbeddingModel, mut out: W) -> std::io::Result<()> {
    let c = &model.config;
    out.write_all(MAGIC)?;
    out.write_all(&(model.dim() as u32).to_le_bytes())?;
    out.write_all(&(model.len() as u32).to_le_bytes())?;
    out.write_all(&c.seed.to_le_bytes())?;
    out.write_all(&(c.window_radius as u32).to_le_bytes())?;
    out.write_all(&(c.negative_samples as u32).to_le_bytes())?;
    out.write_all(&(c.epochs as u32).to_le_bytes())?;
    out.write_all(&c.learning_rate.to_le_bytes())?;
    for w in model.words() {
        out.write_all(&(w.len() as u32).to_le_bytes())?;
        out.write_all(w.as_bytes())?;
        for x in model.input_vector(w).unwrap_or_default() {
            out.write_all(&x.to_le_bytes())?;
        }
        for x in model.output_vector(w).unwrap_or_default() {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::ModelFormat("embedding file is truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn read_model<R: Read>(mut input: R) -> Result<EmbeddingModel> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    let mut c = Cursor { bytes: &bytes, pos: 0 };
    if c.take(8)? != MAGIC {
        return Err(Error::ModelFormat("not an embedding file".into()));
    }
    let dim = c.u32()? as usize;
    let vocab = c.u32()? as usize;
    let seed = c.u64()?;
    let window_radius = c.u32()? as usize;
    let negative_samples = c.u32()? as usize;
    let epochs = c.u32()? as usize;
    let learning_rate = c.f64()?;
    let mut words = Vec::with_capacity(vocab);
    let mut input_v = Vec::with_capacity(vocab * dim);
    let mut output_v = Vec::with_capacity(vocab * dim);
    for _ in 0..vocab {
        let len = c.u32()? as usize;
        let word = std::str::from_utf8(c.take(len)?)
            .map_err(|_| Error::ModelFormat("vocabulary word is not UTF-8".into()))?;
        words.push(word.to_string());
        for _ in 0..dim {
            input_v.push(c.f64()?);
        }
        for _ in 0..dim {
            output_v.push(c.f64()?);
        }
    }
    if c.pos != bytes.len() {
        return Err(Error::ModelFormat("trailing bytes after embedding records".into()));
    }
    let config = SkipgramConfig {
        window_radius,
        embedding_dim: dim,
        negative_samples,
        epochs,
        learning_rate,
        seed,
    };
    EmbeddingModel::from_parts(words, dim, input_v, output_v, config)
}

pub fn save(model: &EmbeddingModel, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_model(model, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<EmbeddingModel> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = EmbeddingModel::from_vectors(&[("größe", vec![0.5, -1.25]), ("b", vec![3.0, 1e-300])]).unwrap();
        let mut buf = Vec::new();
        write_model(&m, &mut buf).unwrap();
        assert_eq!(read_model(&buf[..]).unwrap(), m);
        assert!(read_model(&buf[..buf.len() - 1]).is_err());
        assert!(read_model(&b"nonsense"[..]).is_err());
    }
}
