//! Little-endian table files:
//!
//! ```text
//! "APDB" | version u16 | spec length u16 | spec bytes | scale u64
//! | store_residual u8 | word bytes u8 | entry count u64 | spec digest [32]
//! | primary entries | residual entries (if stored) | checksum u64
//! ```
//!
//! The checksum is the first eight bytes (little-endian) of the SHA-256 of
//! everything before it.

use super::{spec_digest, Ranker, TwoCostPdb};
use crate::abstraction::AbstractionSpec;
use crate::error::{Error, Result};
use crate::word::PdbWord;
use sha2::{Digest, Sha256};
use std::path::Path;

const MAGIC: &[u8; 4] = b"APDB";
const VERSION: u16 = 1;

fn checksum(bytes: &[u8]) -> u64 {
    let d = Sha256::digest(bytes);
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::CorruptPdb("truncated".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(
            self.take(2)?.try_into().expect("2 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}

impl<W: PdbWord> TwoCostPdb<W> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let spec = self.spec.encode();
        let words = self.primary.len() * (1 + usize::from(self.residual.is_some()));
        let mut out = Vec::with_capacity(64 + spec.len() + words * W::BYTES);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(spec.len() as u16).to_le_bytes());
        out.extend_from_slice(&spec);
        out.extend_from_slice(&self.spec.scale().to_le_bytes());
        out.push(u8::from(self.residual.is_some()));
        out.push(W::BYTES as u8);
        out.extend_from_slice(&(self.primary.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.digest);
        for &w in &self.primary {
            w.write_le(&mut out);
        }
        if let Some(r) = &self.residual {
            for &w in r {
                w.write_le(&mut out);
            }
        }
        let sum = checksum(&out);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    /// Parses a table. With `expected`, a table built for any other
    /// abstraction is rejected with [`Error::WrongPdb`].
    pub fn from_bytes(bytes: &[u8], expected: Option<&AbstractionSpec>) -> Result<Self> {
        if bytes.len() < MAGIC.len() + 8 || &bytes[..4] != MAGIC {
            return Err(Error::CorruptPdb("not a pattern database file".into()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        if checksum(body) != u64::from_le_bytes(tail.try_into().expect("8 bytes")) {
            return Err(Error::CorruptPdb("checksum mismatch".into()));
        }
        let mut rd = Reader {
            bytes: body,
            pos: 4,
        };
        let version = rd.u16()?;
        if version != VERSION {
            return Err(Error::CorruptPdb(format!("unsupported version {version}")));
        }
        let spec_len = rd.u16()? as usize;
        let spec_bytes = rd.take(spec_len)?;
        let (spec, used) = AbstractionSpec::decode(spec_bytes)?;
        if used != spec_len {
            return Err(Error::CorruptPdb("trailing abstraction bytes".into()));
        }
        let scale = rd.u64()?;
        if scale != spec.scale() {
            return Err(Error::CorruptPdb(format!(
                "scale {scale} does not match the abstraction's {}",
                spec.scale()
            )));
        }
        let store_residual = match rd.u8()? {
            0 => false,
            1 => true,
            b => return Err(Error::CorruptPdb(format!("bad residual flag {b}"))),
        };
        let width = rd.u8()? as usize;
        if width != W::BYTES {
            return Err(Error::CorruptPdb(format!(
                "entries are {width} bytes wide, expected {}",
                W::BYTES
            )));
        }
        let count = rd.u64()?;
        let digest: [u8; 32] = rd.take(32)?.try_into().expect("32 bytes");
        if digest != spec_digest(&spec) {
            return Err(Error::CorruptPdb("abstraction digest mismatch".into()));
        }
        if let Some(e) = expected {
            if spec_digest(e) != digest {
                return Err(Error::WrongPdb);
            }
        }
        let ranker = Ranker::new(&spec)?;
        if count != ranker.size() {
            return Err(Error::CorruptPdb(format!(
                "{count} entries, abstraction needs {}",
                ranker.size()
            )));
        }
        let mut read_words = || -> Result<Vec<W>> {
            let raw = rd.take(count as usize * W::BYTES)?;
            Ok(raw.chunks_exact(W::BYTES).map(W::read_le).collect())
        };
        let primary = read_words()?;
        let residual = if store_residual {
            Some(read_words()?)
        } else {
            None
        };
        if rd.pos != body.len() {
            return Err(Error::CorruptPdb("trailing bytes".into()));
        }
        Ok(TwoCostPdb {
            spec,
            ranker,
            primary,
            residual,
            digest,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, expected: Option<&AbstractionSpec>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?, expected)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{BlankMode, CostScheme, TilePartition};
    use crate::domains::Puzzle;
    use crate::pdb::BuildOptions;

    fn small() -> TwoCostPdb<u32> {
        let spec = AbstractionSpec::new(
            Puzzle::pancake(6).unwrap(),
            TilePartition::parse("3-3").unwrap(),
            1,
            CostScheme::CostSplit,
            BlankMode::Tracked,
        )
        .unwrap();
        TwoCostPdb::build(&spec, BuildOptions::default()).unwrap()
    }

    #[test]
    fn bytes_round_trip() {
        let pdb = small();
        let bytes = pdb.to_bytes();
        let back = TwoCostPdb::<u32>::from_bytes(&bytes, Some(pdb.spec())).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        assert!(back.entries().eq(pdb.entries()));
    }

    #[test]
    fn damage_is_detected() {
        let bytes = small().to_bytes();
        for cut in [0, 3, 20, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(
                TwoCostPdb::<u32>::from_bytes(&bytes[..cut], None),
                Err(Error::CorruptPdb(_))
            ));
        }
        let mut flipped = bytes.clone();
        flipped[bytes.len() / 2] ^= 1;
        assert!(matches!(
            TwoCostPdb::<u32>::from_bytes(&flipped, None),
            Err(Error::CorruptPdb(_))
        ));
    }

    #[test]
    fn width_and_spec_are_checked() {
        let pdb = small();
        let bytes = pdb.to_bytes();
        assert!(matches!(
            TwoCostPdb::<u16>::from_bytes(&bytes, None),
            Err(Error::CorruptPdb(_))
        ));
        let other = pdb.spec().with_group(0).unwrap();
        assert_eq!(
            TwoCostPdb::<u32>::from_bytes(&bytes, Some(&other)).unwrap_err(),
            Error::WrongPdb
        );
    }
}
