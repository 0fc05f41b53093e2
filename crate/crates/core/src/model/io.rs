//! Binary forest file and a readable dump.
//!
//! Layout, all integers and reals little-endian:
//!
//! ```text
//! magic            8 bytes  "CCDFOR\0\0"
//! version          u32      currently 1
//! n_trees          u32
//! criterion        u8       0 gini, 1 entropy
//! max_depth        u32      0 for unbounded
//! min_split        u32
//! min_leaf         u32
//! feature_subset   u8       0 sqrt, 1 log2, 2 all
//! bootstrap        u8
//! seed             u64
//! samples          u64
//! positives        u64
//! width            u32
//! per feature:     u32 byte length, UTF-8 name, u8 kept flag
//! per tree:        u32 node count, then nodes in preorder:
//!   leaf           u8 0, f64 positive, f64 samples
//!   split          u8 1, u32 feature, f64 threshold, u32 left, u32 right,
//!                  f64 samples, f64 decrease
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::forest::{FeatureSubset, Forest, Hyperparams, TrainingInfo};
use super::impurity::Criterion;
use super::tree::{Node, Tree};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"CCDFOR\0\0";
const VERSION: u32 = 1;

fn u32_of(n: usize) -> std::io::Result<[u8; 4]> {
    u32::try_from(n)
        .map(u32::to_le_bytes)
        .map_err(|_| std::io::Error::new(std::io::ErrorKind::InvalidInput, "value exceeds u32"))
}

pub fn write_forest<W: Write>(forest: &Forest, mut out: W) -> std::io::Result<()> {
    let hp = &forest.hyperparams;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&u32_of(hp.n_trees)?)?;
    out.write_all(&[match hp.criterion {
        Criterion::Gini => 0,
        Criterion::Entropy => 1,
    }])?;
    out.write_all(&u32_of(hp.max_depth.unwrap_or(0))?)?;
    out.write_all(&u32_of(hp.min_samples_split)?)?;
    out.write_all(&u32_of(hp.min_samples_leaf)?)?;
    out.write_all(&[match hp.feature_subset {
        FeatureSubset::Sqrt => 0,
        FeatureSubset::Log2 => 1,
        FeatureSubset::All => 2,
    }])?;
    out.write_all(&[u8::from(hp.bootstrap)])?;
    out.write_all(&hp.seed.to_le_bytes())?;
    out.write_all(&(forest.info.samples as u64).to_le_bytes())?;
    out.write_all(&(forest.info.positives as u64).to_le_bytes())?;
    out.write_all(&u32_of(forest.width())?)?;
    for (name, kept) in forest.feature_names.iter().zip(&forest.kept_mask) {
        out.write_all(&u32_of(name.len())?)?;
        out.write_all(name.as_bytes())?;
        out.write_all(&[u8::from(*kept)])?;
    }
    for tree in &forest.trees {
        out.write_all(&u32_of(tree.nodes.len())?)?;
        for node in &tree.nodes {
            match *node {
                Node::Leaf { positive, samples } => {
                    out.write_all(&[0])?;
                    out.write_all(&positive.to_le_bytes())?;
                    out.write_all(&samples.to_le_bytes())?;
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    samples,
                    decrease,
                } => {
                    out.write_all(&[1])?;
                    out.write_all(&u32_of(feature)?)?;
                    out.write_all(&threshold.to_le_bytes())?;
                    out.write_all(&u32_of(left)?)?;
                    out.write_all(&u32_of(right)?)?;
                    out.write_all(&samples.to_le_bytes())?;
                    out.write_all(&decrease.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| bad("forest file is truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn read_forest<R: Read>(mut input: R) -> Result<Forest> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|e| bad(e.to_string()))?;
    let mut c = Cursor { bytes: &bytes, pos: 0 };
    if c.take(8)? != MAGIC {
        return Err(bad("not a forest file"));
    }
    let version = c.u32()?;
    if version != VERSION as usize {
        return Err(bad(format!("unsupported forest version {version}")));
    }
    let n_trees = c.u32()?;
    let criterion = match c.u8()? {
        0 => Criterion::Gini,
        1 => Criterion::Entropy,
        x => return Err(bad(format!("unknown criterion {x}"))),
    };
    let max_depth = Some(c.u32()?).filter(|&d| d > 0);
    let min_samples_split = c.u32()?;
    let min_samples_leaf = c.u32()?;
    let feature_subset = match c.u8()? {
        0 => FeatureSubset::Sqrt,
        1 => FeatureSubset::Log2,
        2 => FeatureSubset::All,
        x => return Err(bad(format!("unknown feature subset {x}"))),
    };
    let bootstrap = c.u8()? != 0;
    let seed = c.u64()?;
    let samples = c.u64()? as usize;
    let positives = c.u64()? as usize;
    let width = c.u32()?;
    let mut feature_names = Vec::with_capacity(width.min(1 << 16));
    let mut kept_mask = Vec::with_capacity(width.min(1 << 16));
    for _ in 0..width {
        let len = c.u32()?;
        let name = std::str::from_utf8(c.take(len)?).map_err(|_| bad("feature name is not UTF-8"))?;
        feature_names.push(name.to_string());
        kept_mask.push(c.u8()? != 0);
    }
    let mut trees = Vec::with_capacity(n_trees.min(1 << 16));
    for _ in 0..n_trees {
        let count = c.u32()?;
        let mut nodes = Vec::with_capacity(count.min(1 << 20));
        for i in 0..count {
            let node = match c.u8()? {
                0 => Node::Leaf {
                    positive: c.f64()?,
                    samples: c.f64()?,
                },
                1 => {
                    let feature = c.u32()?;
                    let threshold = c.f64()?;
                    let left = c.u32()?;
                    let right = c.u32()?;
                    if feature >= width || left <= i || right <= i || left >= count || right >= count {
                        return Err(bad("split node refers outside its tree"));
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                        samples: c.f64()?,
                        decrease: c.f64()?,
                    }
                }
                x => return Err(bad(format!("unknown node tag {x}"))),
            };
            nodes.push(node);
        }
        if nodes.is_empty() {
            return Err(bad("empty tree"));
        }
        trees.push(Tree { nodes });
    }
    if c.pos != bytes.len() {
        return Err(bad("trailing bytes after forest records"));
    }
    Ok(Forest {
        trees,
        feature_names,
        kept_mask,
        hyperparams: Hyperparams {
            n_trees,
            criterion,
            max_depth,
            min_samples_split,
            min_samples_leaf,
            feature_subset,
            bootstrap,
            seed,
        },
        info: TrainingInfo { samples, positives },
    })
}

pub fn save_forest(forest: &Forest, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_forest(forest, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_forest(path: &Path) -> Result<Forest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_forest(&bytes[..])
}

/// Indented text rendering of every tree.
pub fn dump_forest(forest: &Forest) -> String {
    let mut s = String::new();
    let hp = &forest.hyperparams;
    let _ = writeln!(
        s,
        "forest: {} trees, seed {}, {} of {} features kept",
        forest.trees.len(),
        hp.seed,
        forest.kept_mask.iter().filter(|&&k| k).count(),
        forest.width()
    );
    for (t, tree) in forest.trees.iter().enumerate() {
        let _ = writeln!(s, "tree {t}");
        let mut stack = vec![(0usize, 1usize)];
        while let Some((i, indent)) = stack.pop() {
            let pad = "  ".repeat(indent);
            match tree.nodes[i] {
                Node::Leaf { positive, samples } => {
                    let _ = writeln!(s, "{pad}leaf p={positive:.4} n={samples}");
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    samples,
                    decrease,
                } => {
                    let _ = writeln!(
                        s,
                        "{pad}{} <= {threshold} n={samples} decrease={decrease:.6}",
                        forest.feature_names[feature]
                    );
                    stack.push((right, indent + 1));
                    stack.push((left, indent + 1));
                }
            }
        }
    }
    s
}
