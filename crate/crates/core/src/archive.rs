//! Self-describing archive for [`HomomorphismSpec`]: one line of JSON header,
//! then the generators as little-endian `f64`, `(re, im)` interleaved,
//! row-major, `Q_{αβ}` in `α`-major order.

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorizer::HomomorphismSpec;
use crate::foundations::TruncationScheme;
use crate::scalar::{Real, C};

pub const FORMAT_NAME: &str = "heisenberg.homomorphism-spec";
pub const FORMAT_VERSION: u32 = 1;
pub const LAYOUT: &str = "row-major, interleaved (re, im), little-endian f64, Q_ab alpha-major";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveHeader {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub lambda: f64,
    pub max_degree: usize,
    pub source_dim: usize,
    pub target_dim: usize,
    pub generator_count: usize,
    pub layout: String,
    pub payload_bytes: usize,
}

impl ArchiveHeader {
    pub fn for_spec<T: Real>(spec: &HomomorphismSpec<T>) -> Self {
        let big_d = spec.source_dim();
        let d = spec.target_dim();
        Self {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            n: spec.n(),
            lambda: spec.lambda().as_f64(),
            max_degree: spec.scheme().max_degree(),
            source_dim: big_d,
            target_dim: d,
            generator_count: big_d * big_d,
            layout: LAYOUT.into(),
            payload_bytes: big_d * big_d * d * d * 16,
        }
    }
}

pub fn write_spec<T: Real, W: Write>(spec: &HomomorphismSpec<T>, mut out: W) -> Result<()> {
    let header = ArchiveHeader::for_spec(spec);
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(header.payload_bytes);
    for q in spec.generators() {
        for r in 0..q.nrows() {
            for c in 0..q.ncols() {
                buf.extend_from_slice(&q[(r, c)].re.as_f64().to_le_bytes());
                buf.extend_from_slice(&q[(r, c)].im.as_f64().to_le_bytes());
            }
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_spec<T: Real, R: BufRead>(mut input: R) -> Result<HomomorphismSpec<T>> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: ArchiveHeader = serde_json::from_str(line.trim_end())?;
    if header.format != FORMAT_NAME {
        return Err(Error::Format(format!("unknown format {:?}", header.format)));
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {}", header.version)));
    }
    if header.n == 0 {
        return Err(Error::Format("dimension n must be at least 1".into()));
    }
    let scheme = TruncationScheme::new(header.n, header.max_degree);
    let big_d = scheme.dim();
    let d = header.target_dim;
    if header.source_dim != big_d || header.generator_count != big_d * big_d || header.payload_bytes != big_d * big_d * d * d * 16 {
        return Err(Error::Format("header sizes are inconsistent".into()));
    }
    let mut payload = Vec::with_capacity(header.payload_bytes);
    input.read_to_end(&mut payload)?;
    if payload.len() != header.payload_bytes {
        return Err(Error::Format(format!(
            "payload has {} bytes, header declares {}",
            payload.len(),
            header.payload_bytes
        )));
    }
    let mut words = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")));
    let mut q = Vec::with_capacity(big_d * big_d);
    for _ in 0..big_d * big_d {
        let mut m = DMatrix::from_element(d, d, C::new(T::zero(), T::zero()));
        for r in 0..d {
            for c in 0..d {
                let re = words.next().unwrap_or(f64::NAN);
                let im = words.next().unwrap_or(f64::NAN);
                m[(r, c)] = C::new(T::lit(re), T::lit(im));
            }
        }
        q.push(m);
    }
    HomomorphismSpec::new(T::lit(header.lambda), scheme, d, q)
}

pub fn save_spec<T: Real>(spec: &HomomorphismSpec<T>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_spec(spec, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_spec<T: Real>(path: &Path) -> Result<HomomorphismSpec<T>> {
    let file = std::fs::File::open(path)?;
    read_spec(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorizer::synthesize_homomorphism;

    fn spec() -> HomomorphismSpec<f64> {
        let scheme = TruncationScheme::new(1, 2);
        synthesize_homomorphism(-1.5, &scheme, &[DMatrix::identity(3, 3)], 2, 3).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = spec();
        let mut bytes = Vec::new();
        write_spec(&s, &mut bytes).unwrap();
        let back: HomomorphismSpec<f64> = read_spec(&bytes[..]).unwrap();
        assert_eq!(back, s);
        let newline = bytes.iter().position(|&b| b == b'\n').unwrap();
        assert_eq!(bytes.len() - newline - 1, 9 * 25 * 16);
    }

    #[test]
    fn payload_layout() {
        let s = spec();
        let mut bytes = Vec::new();
        write_spec(&s, &mut bytes).unwrap();
        let start = bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
        // Q_{01}, entry (row 1, col 0): generator 1, offset 5 complex values
        let at = start + (25 + 5) * 16;
        let re = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[at + 8..at + 16].try_into().unwrap());
        assert_eq!(C::new(re, im), s.q(0, 1)[(1, 0)]);
    }

    #[test]
    fn truncated_payload_rejected() {
        let mut bytes = Vec::new();
        write_spec(&spec(), &mut bytes).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(read_spec::<f64, _>(&bytes[..]), Err(Error::Format(_))));
        assert!(read_spec::<f64, _>(&b"{\"format\":\"x\"}\n"[..]).is_err());
    }
}
