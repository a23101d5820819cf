//! Binary params file and its JSON sidecar.
//!
//! Layout: 8-byte magic `TWONLKH1`, `u32` format version, `u64` dimension `d`,
//! then `4d² + 5d + 1` little-endian `f64` values in [`ScorerParams`] flat
//! order. The JSON sidecar records the training config and loss curve.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LikelihoodError, ScorerParams, TrainConfig};

pub const PARAMS_MAGIC: [u8; 8] = *b"TWONLKH1";
pub const PARAMS_VERSION: u32 = 1;

pub fn encode_params(params: &ScorerParams) -> Vec<u8> {
    let flat = params.to_flat();
    let mut out = Vec::with_capacity(20 + 8 * flat.len());
    out.extend_from_slice(&PARAMS_MAGIC);
    out.extend_from_slice(&PARAMS_VERSION.to_le_bytes());
    out.extend_from_slice(&(params.dim() as u64).to_le_bytes());
    for v in flat {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_params(bytes: &[u8]) -> Result<ScorerParams, LikelihoodError> {
    let bad = |msg: &str| LikelihoodError::Format(msg.to_owned());
    if bytes.len() < 20 || bytes[..8] != PARAMS_MAGIC {
        return Err(bad("missing magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != PARAMS_VERSION {
        return Err(LikelihoodError::Format(format!("unsupported version {version}")));
    }
    let d = usize::try_from(u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")))
        .map_err(|_| bad("dimension overflows usize"))?;
    let body = &bytes[20..];
    let expected = ScorerParams::flat_len(d)
        .checked_mul(8)
        .ok_or_else(|| bad("dimension too large"))?;
    if body.len() != expected {
        return Err(LikelihoodError::Format(format!(
            "expected {expected} payload bytes, found {}",
            body.len()
        )));
    }
    let flat: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ScorerParams::from_flat(d, &flat)
}

pub fn write_params(path: &Path, params: &ScorerParams) -> Result<(), LikelihoodError> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&encode_params(params))?;
    out.flush()?;
    Ok(())
}

pub fn read_params(path: &Path) -> Result<ScorerParams, LikelihoodError> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_params(&bytes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsSidecar {
    pub format_version: u32,
    pub d: usize,
    pub config: TrainConfig,
    pub loss_curve: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let bytes = encode_params(&ScorerParams::zeros(2));
        assert_eq!(&bytes[..8], b"TWONLKH1");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[12..20].try_into().unwrap()), 2);
        assert_eq!(bytes.len(), 20 + 8 * ScorerParams::flat_len(2));
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let mut bytes = encode_params(&ScorerParams::zeros(2));
        assert!(decode_params(&bytes[..bytes.len() - 1]).is_err());
        bytes[8] = 9;
        assert!(decode_params(&bytes).is_err());
        assert!(decode_params(b"nope").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.bin");
        let p = ScorerParams::init(3, 4);
        write_params(&path, &p).unwrap();
        assert_eq!(read_params(&path).unwrap(), p);
    }

    proptest! {
        #[test]
        fn encode_decode_is_lossless(d in 1usize..5, seed in any::<u64>()) {
            let p = ScorerParams::init(d, seed);
            prop_assert_eq!(decode_params(&encode_params(&p)).unwrap(), p);
        }
    }
}
