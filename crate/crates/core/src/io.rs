//! Edge-list text files and the binary index format.
//!
//! Index layout, all integers little-endian: magic `WFIX`, version `u16`,
//! prime `u64`, `n` as `u32`, block count `k` as `u32`, `k` block degrees as
//! `u32`, then row-major `u64` sections (strips per block, prefix strips per
//! block, `U^{-1}`), then an FNV-1a 64-bit checksum of every preceding byte.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{FieldElem, PrimeField};
use crate::graph::Graph;
use crate::matrix::DenseMatrix;
use crate::walk_oracle::WalkIndex;

pub const INDEX_MAGIC: &[u8; 4] = b"WFIX";
pub const INDEX_VERSION: u16 = 1;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Parses `n m` followed by `m` arcs `u v`. Blank lines and lines starting
/// with `#` are skipped; errors carry 1-based line numbers.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
    let pair = |line: usize, s: &str| -> Result<(usize, usize)> {
        let mut it = s.split_whitespace();
        let mut next = |what: &str| -> Result<usize> {
            let tok = it.next().ok_or_else(|| parse_err(line, format!("missing {what}")))?;
            tok.parse().map_err(|_| parse_err(line, format!("invalid {what} {tok:?}")))
        };
        let a = next("first field")?;
        let b = next("second field")?;
        if it.next().is_some() {
            return Err(parse_err(line, "trailing tokens".into()));
        }
        Ok((a, b))
    };
    let (hline, header) = lines.next().ok_or_else(|| parse_err(0, "empty input, expected header `n m`".into()))?;
    let (n, m) = pair(hline, header)?;
    let mut g = Graph::new(n);
    let mut last = hline;
    for (line, body) in lines {
        let (u, v) = pair(line, body)?;
        if u >= n || v >= n {
            return Err(parse_err(line, format!("arc {u} {v} out of range for n = {n}")));
        }
        if g.has_edge(u, v) {
            return Err(parse_err(line, format!("duplicate arc {u} {v}")));
        }
        g.add_edge(u, v)?;
        last = line;
    }
    if g.edge_count() != m {
        return Err(parse_err(last, format!("header declares {m} arcs, found {}", g.edge_count())));
    }
    Ok(g)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut s = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

pub fn write_edge_list(path: &Path, g: &Graph) -> Result<()> {
    std::fs::write(path, format_edge_list(g))?;
    Ok(())
}

fn put_matrix(buf: &mut Vec<u8>, m: &DenseMatrix) {
    for x in m.data() {
        buf.extend_from_slice(&x.value().to_le_bytes());
    }
}

pub fn encode_index(idx: &WalkIndex) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(INDEX_MAGIC);
    buf.extend_from_slice(&INDEX_VERSION.to_le_bytes());
    buf.extend_from_slice(&idx.field().modulus().to_le_bytes());
    buf.extend_from_slice(&(idx.n() as u32).to_le_bytes());
    buf.extend_from_slice(&(idx.block_degrees().len() as u32).to_le_bytes());
    for &d in idx.block_degrees() {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for m in idx.strips().iter().chain(idx.prefix_strips()) {
        put_matrix(&mut buf, m);
    }
    put_matrix(&mut buf, idx.u_inv());
    let sum = fnv1a64(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());
    buf
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::IndexFormat("truncated index".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
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

    fn matrix(&mut self, field: &PrimeField, rows: usize, cols: usize) -> Result<DenseMatrix> {
        let len = rows.checked_mul(cols).ok_or_else(|| Error::IndexFormat("section too large".into()))?;
        let raw = self.take(len.checked_mul(8).ok_or_else(|| Error::IndexFormat("section too large".into()))?)?;
        let mut data = Vec::with_capacity(len);
        for chunk in raw.chunks_exact(8) {
            let x = u64::from_le_bytes(chunk.try_into().unwrap());
            if x >= field.modulus() {
                return Err(Error::IndexFormat(format!("value {x} is not reduced mod {}", field.modulus())));
            }
            data.push(FieldElem(x as u32));
        }
        DenseMatrix::from_elems(field, rows, cols, data)
    }
}

pub fn decode_index(bytes: &[u8]) -> Result<WalkIndex> {
    if bytes.len() < 8 + INDEX_MAGIC.len() {
        return Err(Error::IndexFormat("file too short".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    if &body[..4] != INDEX_MAGIC {
        return Err(Error::IndexFormat("bad magic".into()));
    }
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    if fnv1a64(body) != stored {
        return Err(Error::IndexFormat("checksum mismatch".into()));
    }
    let mut c = Cursor { bytes: body, pos: 4 };
    let version = c.u16()?;
    if version != INDEX_VERSION {
        return Err(Error::IndexFormat(format!("unsupported version {version}, expected {INDEX_VERSION}")));
    }
    let field = PrimeField::new(c.u64()?)?;
    let n = c.u32()? as usize;
    let k = c.u32()? as usize;
    if k > n {
        return Err(Error::IndexFormat(format!("{k} blocks for n = {n}")));
    }
    let degrees = (0..k).map(|_| c.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
    if degrees.iter().sum::<usize>() != n {
        return Err(Error::IndexFormat("block degrees do not sum to n".into()));
    }
    let mu = degrees.iter().copied().min().unwrap_or(0);
    let strips = degrees.iter().map(|&l| c.matrix(&field, n, l + mu)).collect::<Result<Vec<_>>>()?;
    let prefix = degrees.iter().map(|&l| c.matrix(&field, n, l + mu)).collect::<Result<Vec<_>>>()?;
    let u_inv = c.matrix(&field, n, n)?;
    if c.pos != body.len() {
        return Err(Error::IndexFormat("trailing bytes before checksum".into()));
    }
    WalkIndex::from_parts(field, degrees, strips, prefix, u_inv).map_err(|e| Error::IndexFormat(e.to_string()))
}

pub fn is_index_file(path: &Path) -> Result<bool> {
    let mut magic = [0u8; 4];
    let mut f = std::fs::File::open(path)?;
    match f.read_exact(&mut magic) {
        Ok(()) => Ok(&magic == INDEX_MAGIC),
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Ok(false),
        Err(e) => Err(e.into()),
    }
}

pub fn write_index(path: &Path, idx: &WalkIndex) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&encode_index(idx))?;
    f.flush()?;
    Ok(())
}

pub fn read_index(path: &Path) -> Result<WalkIndex> {
    decode_index(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk_oracle::{preprocess, PreprocessConfig};

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn edge_list_parsing() {
        let g = parse_edge_list("# a triangle\n3 3\n0 1\n\n1 2\n2 0\n").unwrap();
        assert_eq!(g, Graph::cycle(3));
        assert_eq!(parse_edge_list(&format_edge_list(&g)).unwrap(), g);
        let err = |s: &str| match parse_edge_list(s) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(err("3 2\n0 1\n0 1\n"), 3);
        assert_eq!(err("3 1\n0 3\n"), 2);
        assert_eq!(err("3 1\n0 x\n"), 2);
        assert_eq!(err("3 2\n0 1\n"), 2);
        assert_eq!(err("3\n"), 1);
        assert_eq!(err("# only\n"), 0);
    }

    #[test]
    fn index_roundtrip_and_corruption() {
        let mut edges: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        edges.push((5, 5));
        let g = Graph::from_edges(7, edges).unwrap();
        let (_, idx) = preprocess(&g, &PreprocessConfig::default()).unwrap();
        let bytes = encode_index(&idx);
        let back = decode_index(&bytes).unwrap();
        assert_eq!(back, idx);
        assert_eq!(back.graph().unwrap(), g);

        let mut bad = bytes.clone();
        bad[30] ^= 1;
        assert!(matches!(decode_index(&bad), Err(Error::IndexFormat(m)) if m.contains("checksum")));
        let mut bad = bytes.clone();
        bad[4] = 9;
        let body = bad.len() - 8;
        let sum = fnv1a64(&bad[..body]);
        bad[body..].copy_from_slice(&sum.to_le_bytes());
        assert!(matches!(decode_index(&bad), Err(Error::IndexFormat(m)) if m.contains("version")));
        assert!(decode_index(&bytes[..bytes.len() - 1]).is_err());
    }
}
