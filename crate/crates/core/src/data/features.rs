//! `FVSEQ1` per-modality feature files.
//!
//! Layout (little-endian): magic `FVSEQ1`, modality `u8` (0 visual,
//! 1 audio), episode id (`u16` length + UTF-8), `T: u32`, `D: u32`, then
//! `T*D` row-major `f64`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::binio::{put_f64s, ByteReader};
use crate::error::{Error, Result};
use crate::numcore::Matrix;

pub const FVSEQ_MAGIC: &[u8; 6] = b"FVSEQ1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modality {
    Visual,
    Audio,
}

impl Modality {
    fn code(self) -> u8 {
        match self {
            Modality::Visual => 0,
            Modality::Audio => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Visual => "visual",
            Modality::Audio => "audio",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "visual" => Ok(Modality::Visual),
            "audio" => Ok(Modality::Audio),
            _ => Err(Error::InvalidArgument(format!("unknown modality `{s}`"))),
        }
    }
}

/// Per-second features of one modality for one episode (`T x D`).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSequence {
    pub episode_id: String,
    pub modality: Modality,
    data: Matrix,
}

impl FeatureSequence {
    pub fn new(episode_id: impl Into<String>, modality: Modality, data: Matrix) -> Result<Self> {
        let episode_id = episode_id.into();
        if data.rows() == 0 || data.cols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "feature sequence `{episode_id}` must be non-empty, got {}x{}",
                data.rows(),
                data.cols()
            )));
        }
        if !data.is_finite() {
            return Err(Error::NonFinite(format!("features of `{episode_id}`")));
        }
        if episode_id.len() > u16::MAX as usize {
            return Err(Error::InvalidArgument("episode id too long".into()));
        }
        Ok(FeatureSequence {
            episode_id,
            modality,
            data,
        })
    }

    /// Number of seconds `T`.
    pub fn len(&self) -> usize {
        self.data.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(6 + 1 + 2 + self.episode_id.len() + 8 + 8 * self.data.len());
        out.extend_from_slice(FVSEQ_MAGIC);
        out.push(self.modality.code());
        out.extend_from_slice(&(self.episode_id.len() as u16).to_le_bytes());
        out.extend_from_slice(self.episode_id.as_bytes());
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        put_f64s(&mut out, self.data.as_slice());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes, "FVSEQ1 file");
        let magic = r.take(FVSEQ_MAGIC.len())?;
        if magic != FVSEQ_MAGIC {
            return Err(Error::Format {
                what: "FVSEQ1 file",
                detail: format!("bad magic {:?}", String::from_utf8_lossy(magic)),
            });
        }
        let modality = match r.u8()? {
            0 => Modality::Visual,
            1 => Modality::Audio,
            m => {
                return Err(Error::Format {
                    what: "FVSEQ1 file",
                    detail: format!("unknown modality byte {m}"),
                })
            }
        };
        let id_len = r.u16()? as usize;
        let id = std::str::from_utf8(r.take(id_len)?)
            .map_err(|_| Error::Format {
                what: "FVSEQ1 file",
                detail: "episode id is not UTF-8".into(),
            })?
            .to_string();
        let t = r.u32()? as usize;
        let d = r.u32()? as usize;
        let values = r.f64s(t.checked_mul(d).ok_or_else(|| Error::Format {
            what: "FVSEQ1 file",
            detail: format!("{t}x{d} overflows"),
        })?)?;
        if r.remaining() != 0 {
            return Err(Error::Format {
                what: "FVSEQ1 file",
                detail: format!("{} trailing bytes after offset {}", r.remaining(), r.position()),
            });
        }
        FeatureSequence::new(id, modality, Matrix::from_vec(t, d, values)?)
    }
}

pub fn write_fvseq(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, seq.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_fvseq(path: impl AsRef<Path>) -> Result<FeatureSequence> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    FeatureSequence::from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::SplitRng;

    fn sample(t: usize, d: usize) -> FeatureSequence {
        let m = SplitRng::new(1).uniform_matrix(t, d, 10.0);
        FeatureSequence::new("ep-ü", Modality::Audio, m).unwrap()
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.fvseq");
        let s = sample(300, 26);
        write_fvseq(&s, &path).unwrap();
        let back = read_fvseq(&path).unwrap();
        assert_eq!(back, s);
        assert_eq!(fs::read(&path).unwrap().len(), 6 + 1 + 2 + "ep-ü".len() + 8 + 300 * 26 * 8);
    }

    #[test]
    fn header_larger_than_payload_is_truncation() {
        let mut bytes = sample(4, 3).to_bytes();
        let t_at = 6 + 1 + 2 + "ep-ü".len();
        bytes[t_at] = 5;
        assert!(matches!(FeatureSequence::from_bytes(&bytes), Err(Error::Truncated { .. })));
        let bytes = sample(4, 3).to_bytes();
        assert!(matches!(
            FeatureSequence::from_bytes(&bytes[..bytes.len() - 3]),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn bad_magic_and_trailing_bytes() {
        let mut bytes = sample(2, 2).to_bytes();
        bytes[5] = b'2';
        assert!(matches!(FeatureSequence::from_bytes(&bytes), Err(Error::Format { .. })));
        let mut bytes = sample(2, 2).to_bytes();
        bytes.push(0);
        assert!(matches!(FeatureSequence::from_bytes(&bytes), Err(Error::Format { .. })));
    }

    #[test]
    fn rejects_empty_or_non_finite() {
        assert!(FeatureSequence::new("e", Modality::Visual, Matrix::zeros(0, 3)).is_err());
        let mut m = Matrix::zeros(2, 2);
        m.set(0, 0, f64::NAN);
        assert!(FeatureSequence::new("e", Modality::Visual, m).is_err());
    }

    proptest::proptest! {
        #[test]
        fn bytes_round_trip(t in 1usize..20, d in 1usize..20, seed in 0u64..1000, id in "[a-z0-9_-]{0,12}") {
            let m = SplitRng::new(seed).uniform_matrix(t, d, 1e6);
            let s = FeatureSequence::new(id, Modality::Visual, m).unwrap();
            let back = FeatureSequence::from_bytes(&s.to_bytes()).unwrap();
            proptest::prop_assert_eq!(back.matrix().as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                s.matrix().as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            proptest::prop_assert_eq!(back, s);
        }
    }
}
