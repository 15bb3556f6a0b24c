//! Binary checkpoint and embedding-dump formats, plus the vocabulary sidecar.
//!
//! Checkpoint layout, all little-endian:
//!
//! ```text
//! magic        8 bytes  "IKGECKP1"
//! model        u8       0 = TransE, 1 = RotatE
//! norm order   u8       1 or 2
//! reserved     u16      0
//! dim          u32
//! entities     u32
//! relations    u32
//! seed         u64
//! entity rows  f32 * entities * width   (width = dim, or 2*dim for RotatE)
//! relations    f32 * relations * dim    (RotatE: phases)
//! ```
//!
//! An embedding dump uses magic `"IKGEEMB1"`, the same first four fields,
//! then `count: u32` followed by `count` rows of entity width.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kg::Vocabulary;
use crate::model::{EmbeddingTables, ModelKind, NormOrder};

const CKPT_MAGIC: &[u8; 8] = b"IKGECKP1";
const DUMP_MAGIC: &[u8; 8] = b"IKGEEMB1";

fn model_code(m: ModelKind) -> u8 {
    match m {
        ModelKind::TransE => 0,
        ModelKind::RotatE => 1,
    }
}

fn model_from_code(c: u8) -> Result<ModelKind> {
    match c {
        0 => Ok(ModelKind::TransE),
        1 => Ok(ModelKind::RotatE),
        _ => Err(Error::Checkpoint(format!("unknown model code {c}"))),
    }
}

fn put_floats(buf: &mut Vec<u8>, xs: &[f64]) {
    for &x in xs {
        buf.extend_from_slice(&(x as f32).to_le_bytes());
    }
}

pub fn encode_checkpoint(t: &EmbeddingTables) -> Vec<u8> {
    let mut buf = Vec::with_capacity(32 + 4 * (t.entity_params().len() + t.relation_params().len()));
    buf.extend_from_slice(CKPT_MAGIC);
    buf.push(model_code(t.model));
    buf.push(t.norm.order());
    buf.extend_from_slice(&0u16.to_le_bytes());
    buf.extend_from_slice(&(t.dim as u32).to_le_bytes());
    buf.extend_from_slice(&(t.num_entities() as u32).to_le_bytes());
    buf.extend_from_slice(&(t.num_relations() as u32).to_le_bytes());
    buf.extend_from_slice(&t.seed.to_le_bytes());
    put_floats(&mut buf, t.entity_params());
    put_floats(&mut buf, t.relation_params());
    buf
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Checkpoint("truncated file".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 4)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect())
    }

    fn header(&mut self, magic: &[u8; 8]) -> Result<(ModelKind, NormOrder, usize)> {
        if self.take(8)? != magic {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let model = model_from_code(self.u8()?)?;
        let norm = NormOrder::from_order(self.u8()?).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let _reserved = self.u16()?;
        let dim = self.u32()? as usize;
        if dim == 0 {
            return Err(Error::Checkpoint("zero dimension".into()));
        }
        Ok((model, norm, dim))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Checkpoint(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<EmbeddingTables> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let (model, norm, dim) = r.header(CKPT_MAGIC)?;
    let ne = r.u32()? as usize;
    let nr = r.u32()? as usize;
    let seed = r.u64()?;
    let entities = r.floats(ne * model.entity_width(dim))?;
    let relations = r.floats(nr * dim)?;
    r.finish()?;
    EmbeddingTables::from_parts(model, norm, dim, seed, entities, relations)
}

pub fn save_checkpoint(t: &EmbeddingTables, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(t)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<EmbeddingTables> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}

/// Rows of estimated embeddings, in checkpoint float format.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDump {
    pub model: ModelKind,
    pub norm: NormOrder,
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
}

pub fn encode_dump(d: &EmbeddingDump) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(DUMP_MAGIC);
    buf.push(model_code(d.model));
    buf.push(d.norm.order());
    buf.extend_from_slice(&0u16.to_le_bytes());
    buf.extend_from_slice(&(d.dim as u32).to_le_bytes());
    buf.extend_from_slice(&(d.rows.len() as u32).to_le_bytes());
    for row in &d.rows {
        put_floats(&mut buf, row);
    }
    buf
}

pub fn decode_dump(bytes: &[u8]) -> Result<EmbeddingDump> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let (model, norm, dim) = r.header(DUMP_MAGIC)?;
    let count = r.u32()? as usize;
    let w = model.entity_width(dim);
    let rows = (0..count).map(|_| r.floats(w)).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(EmbeddingDump {
        model,
        norm,
        dim,
        rows,
    })
}

/// `entity<TAB>id<TAB>name` and `relation<TAB>id<TAB>name` lines.
pub fn write_vocab(v: &Vocabulary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (i, n) in v.entity_names().iter().enumerate() {
        writeln!(out, "entity\t{i}\t{n}").unwrap();
    }
    for (i, n) in v.relation_names().iter().enumerate() {
        writeln!(out, "relation\t{i}\t{n}").unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_vocab(path: impl AsRef<Path>) -> Result<Vocabulary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut v = Vocabulary::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            msg: msg.to_owned(),
        };
        let mut cols = line.splitn(3, '\t');
        let (kind, id, name) = match (cols.next(), cols.next(), cols.next()) {
            (Some(k), Some(id), Some(n)) => (k, id, n),
            _ => return Err(err("expected kind<TAB>id<TAB>name")),
        };
        let id: u32 = id.parse().map_err(|_| err("bad id"))?;
        let got = match kind {
            "entity" => v.intern_entity(name),
            "relation" => v.intern_relation(name),
            _ => return Err(err("kind must be entity or relation")),
        };
        if got != id {
            return Err(err("ids must be dense and in order"));
        }
    }
    Ok(v)
}
