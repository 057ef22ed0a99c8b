//! Little-endian binary encoding of composite hashes and indexes.
//! The byte layout is documented in `docs/index-format.md`.

use std::collections::HashMap;

use crc::{Crc, CRC_64_XZ};

use crate::analysis::{rho_p, AnalysisParams, DistributionKind, MetricP};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hashing::{CompositeHash, HashFunction, HashKey, RngSeed};
use crate::index::{Index, IndexMode};

pub const MAGIC: [u8; 4] = *b"CANN";
pub const FORMAT_VERSION: u16 = 1;

const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

const P_FINITE: u8 = 0;
const P_INFINITE: u8 = 1;
const DIST_UNIFORM: u8 = 0;
const DIST_RADEMACHER: u8 = 1;
const MODE_FULL: u8 = 0;
const MODE_LIGHT: u8 = 1;

/// CRC-64/XZ of `bytes`.
pub fn checksum(bytes: &[u8]) -> u64 {
    CRC64.checksum(bytes)
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let bytes = self.bytes(N)?;
        Ok(bytes.try_into().expect("length checked"))
    }
    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Corrupt(format!("unexpected end of data at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    fn len_prefixed(&mut self, what: &str, elem_size: usize) -> Result<usize> {
        let n = self.u64()?;
        let n = usize::try_from(n).map_err(|_| Error::Corrupt(format!("{what} count {n} too large")))?;
        // Reject counts that cannot fit in what is left before allocating.
        if n.checked_mul(elem_size).is_none_or(|b| b > self.buf.len() - self.pos) {
            return Err(Error::Corrupt(format!("{what} count {n} exceeds remaining data")));
        }
        Ok(n)
    }
}

fn write_composite(w: &mut Writer, hash: &CompositeHash) {
    w.0.extend_from_slice(&MAGIC);
    w.u16(FORMAT_VERSION);
    w.u32(hash.dim() as u32);
    w.u32(hash.k() as u32);
    if hash.p().is_infinite() {
        w.u8(P_INFINITE);
    } else {
        w.u8(P_FINITE);
    }
    w.f64(hash.p().value());
    w.f64(hash.r());
    w.u8(match hash.dist() {
        DistributionKind::BoundedUniform => DIST_UNIFORM,
        DistributionKind::Rademacher => DIST_RADEMACHER,
    });
    w.u64(hash.seed().0);
    for f in hash.functions() {
        match hash.dist() {
            DistributionKind::BoundedUniform => f.projection().iter().for_each(|&v| w.f64(v)),
            DistributionKind::Rademacher => {
                for chunk in f.projection().chunks(8) {
                    let byte = chunk
                        .iter()
                        .enumerate()
                        .fold(0u8, |acc, (bit, &v)| if v > 0.0 { acc | (1 << bit) } else { acc });
                    w.u8(byte);
                }
            }
        }
    }
}

/// Reads magic and version, distinguishing "not ours" from "newer format".
fn read_header(r: &mut Reader) -> Result<()> {
    if r.buf.len() < MAGIC.len() || r.buf[..MAGIC.len()] != MAGIC {
        return Err(Error::NotIndexFile);
    }
    r.pos = MAGIC.len();
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch { found: version, expected: FORMAT_VERSION });
    }
    Ok(())
}

fn read_composite_body(r: &mut Reader) -> Result<CompositeHash> {
    let d = r.u32()? as usize;
    let k = r.u32()? as usize;
    if d == 0 || k == 0 {
        return Err(Error::Corrupt(format!("invalid shape d={d} k={k}")));
    }
    let p = match (r.u8()?, r.f64()?) {
        (P_INFINITE, _) => MetricP::INFINITY,
        (P_FINITE, value) => MetricP::new(value).map_err(|e| Error::Corrupt(e.to_string()))?,
        (tag, _) => return Err(Error::Corrupt(format!("unknown metric tag {tag}"))),
    };
    let radius = r.f64()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Corrupt(format!("invalid radius {radius}")));
    }
    let dist = match r.u8()? {
        DIST_UNIFORM => DistributionKind::BoundedUniform,
        DIST_RADEMACHER => DistributionKind::Rademacher,
        tag => return Err(Error::Corrupt(format!("unknown distribution tag {tag}"))),
    };
    let seed = RngSeed(r.u64()?);
    let per_function = match dist {
        DistributionKind::BoundedUniform => d * 8,
        DistributionKind::Rademacher => d.div_ceil(8),
    };
    if k.checked_mul(per_function).is_none_or(|b| b > r.buf.len() - r.pos) {
        return Err(Error::Corrupt("projection block exceeds remaining data".into()));
    }
    let denom = radius * rho_p(d, p);
    let mut funcs = Vec::with_capacity(k);
    for _ in 0..k {
        let projection = match dist {
            DistributionKind::BoundedUniform => (0..d).map(|_| r.f64()).collect::<Result<Vec<_>>>()?,
            DistributionKind::Rademacher => {
                let packed = r.bytes(per_function)?;
                (0..d).map(|i| if (packed[i / 8] >> (i % 8)) & 1 == 1 { 1.0 } else { -1.0 }).collect()
            }
        };
        funcs.push(HashFunction::from_parts(projection, denom).map_err(|e| Error::Corrupt(e.to_string()))?);
    }
    CompositeHash::from_parts(funcs, p, radius, dist, seed).map_err(|e| Error::Corrupt(e.to_string()))
}

pub(crate) fn encode_composite(hash: &CompositeHash) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    write_composite(&mut w, hash);
    w.0
}

pub(crate) fn decode_composite(bytes: &[u8]) -> Result<CompositeHash> {
    let mut r = Reader { buf: bytes, pos: 0 };
    read_header(&mut r)?;
    let hash = read_composite_body(&mut r)?;
    if r.pos != bytes.len() {
        return Err(Error::Corrupt(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(hash)
}

pub(crate) fn encode_index(index: &Index) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    write_composite(&mut w, index.composite_hash());
    w.f64(index.params().c());
    w.u8(match index.mode() {
        IndexMode::FullExpansion => MODE_FULL,
        IndexMode::Light => MODE_LIGHT,
    });
    w.u64(index.cell_budget());
    let ds = index.dataset();
    w.u64(ds.len() as u64);
    ds.as_flat().iter().for_each(|&v| w.f64(v));

    let mut buckets: Vec<(&HashKey, &[u32])> = index.buckets().collect();
    buckets.sort_unstable_by(|a, b| a.0.cmp(b.0));
    w.u64(buckets.len() as u64);
    for (key, ids) in buckets {
        key.iter().for_each(|&v| w.i64(v));
        w.u32(ids.len() as u32);
        ids.iter().for_each(|&id| w.u32(id));
    }
    let crc = checksum(&w.0);
    w.u64(crc);
    w.0
}

pub(crate) fn decode_index(bytes: &[u8]) -> Result<Index> {
    let mut r = Reader { buf: bytes, pos: 0 };
    read_header(&mut r).map_err(|e| match e {
        Error::Corrupt(_) => Error::Checksum,
        other => other,
    })?;
    if bytes.len() < r.pos + 8 {
        return Err(Error::Checksum);
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 8);
    if checksum(body) != u64::from_le_bytes(trailer.try_into().expect("8 bytes")) {
        return Err(Error::Checksum);
    }
    let mut r = Reader { buf: body, pos: r.pos };

    let hash = read_composite_body(&mut r)?;
    let c = r.f64()?;
    let params = AnalysisParams::new(hash.dim(), hash.p(), hash.r(), c, hash.dist())
        .map_err(|e| Error::Corrupt(e.to_string()))?;
    let mode = match r.u8()? {
        MODE_FULL => IndexMode::FullExpansion,
        MODE_LIGHT => IndexMode::Light,
        tag => return Err(Error::Corrupt(format!("unknown mode tag {tag}"))),
    };
    let cell_budget = r.u64()?;
    let d = hash.dim();
    let n = r.len_prefixed("point", d * 8)?;
    let values = (0..n * d).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let dataset = Dataset::from_flat(d, values)?;

    let k = hash.k();
    let bucket_count = r.len_prefixed("bucket", k * 8 + 4)?;
    let mut buckets = HashMap::with_capacity(bucket_count);
    for _ in 0..bucket_count {
        let key = HashKey::new((0..k).map(|_| r.i64()).collect::<Result<Vec<_>>>()?);
        let count = r.u32()? as usize;
        let ids = (0..count).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        if ids.iter().any(|&id| id as usize >= n) {
            return Err(Error::Corrupt("bucket references a point outside the dataset".into()));
        }
        if buckets.insert(key, ids).is_some() {
            return Err(Error::Corrupt("duplicate bucket key".into()));
        }
    }
    if r.pos != body.len() {
        return Err(Error::Corrupt(format!("{} trailing bytes", body.len() - r.pos)));
    }
    Index::from_parts(params, hash, mode, cell_budget, dataset, buckets)
}

impl CompositeHash {
    /// Standalone hash block (no checksum trailer).
    pub fn to_bytes(&self) -> Vec<u8> {
        encode_composite(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        decode_composite(bytes)
    }
}
