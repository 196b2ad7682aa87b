//! On-disk segment cache.
//!
//! Layout: the 8-byte magic `PSLAB001`, then for each segment its base and
//! span as little-endian u64, followed by `ceil(span / 16)` payload bytes
//! holding the odd-integer bits LSB-first.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use super::PrimeSegment;
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &[u8; 8] = b"PSLAB001";

pub fn write_cache(path: &Path, segments: &[PrimeSegment]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(CACHE_MAGIC)?;
    for seg in segments {
        out.write_all(&seg.base().to_le_bytes())?;
        out.write_all(&seg.span().to_le_bytes())?;
        let nbytes = seg.span().div_ceil(16) as usize;
        let mut payload: Vec<u8> = seg.bits().iter().flat_map(|w| w.to_le_bytes()).collect();
        payload.resize(nbytes, 0);
        out.write_all(&payload)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_cache(path: &Path) -> Result<Vec<PrimeSegment>> {
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Argument(format!("{}: not a segment cache", path.display())));
    }
    let mut segments = Vec::new();
    loop {
        let mut word = [0u8; 8];
        match input.read_exact(&mut word) {
            Ok(()) => {}
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let base = u64::from_le_bytes(word);
        input.read_exact(&mut word)?;
        let span = u64::from_le_bytes(word);
        if base & 1 == 1 {
            return Err(Error::Argument(format!("{}: odd segment base {base}", path.display())));
        }
        let mut payload = vec![0u8; span.div_ceil(16) as usize];
        input.read_exact(&mut payload)?;
        let nbits = span / 2;
        let mut bits: Vec<u64> = payload
            .chunks(8)
            .map(|c| {
                let mut w = [0u8; 8];
                w[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(w)
            })
            .collect();
        bits.resize(nbits.div_ceil(64) as usize, 0);
        if nbits % 64 != 0 {
            if let Some(last) = bits.last_mut() {
                *last &= (1u64 << (nbits % 64)) - 1;
            }
        }
        segments.push(PrimeSegment::from_raw(base, span, bits));
    }
    Ok(segments)
}
