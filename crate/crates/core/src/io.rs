//! Field files: one JSON header line, then little-endian `f64` pairs
//! `(re, im)` in flat order, components fastest.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{AntiSymMatrix, Field, Kind, Matrix, Rep, Scalar, SymMatrix, Vector};
use crate::grid::{Grid, MAX_DIM};
use crate::scalar::Real;
use crate::Complex;

/// Longest header accepted before the newline.
const MAX_HEADER: usize = 1 << 20;

const KINDS: [&str; 5] = [Scalar::NAME, Vector::NAME, SymMatrix::NAME, AntiSymMatrix::NAME, Matrix::NAME];

fn components_of(kind: &str, d: usize) -> Option<usize> {
    Some(match kind {
        k if k == Scalar::NAME => Scalar::components(d),
        k if k == Vector::NAME => Vector::components(d),
        k if k == SymMatrix::NAME => SymMatrix::components(d),
        k if k == AntiSymMatrix::NAME => AntiSymMatrix::components(d),
        k if k == Matrix::NAME => Matrix::components(d),
        _ => return None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub kind: String,
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub rep: Rep,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Free-form provenance (run configuration, version).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl FieldHeader {
    pub fn for_field<T: Real, K: Kind>(f: &Field<T, K>) -> Self {
        let g = f.grid();
        Self {
            kind: K::NAME.to_string(),
            d: g.dim(),
            n: g.n(),
            length: g.length().as_f64(),
            rep: f.rep(),
            seed: None,
            provenance: None,
        }
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_provenance(mut self, p: serde_json::Value) -> Self {
        self.provenance = Some(p);
        self
    }

    fn points(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    fn payload_bytes(&self) -> Result<usize> {
        let nc = components_of(&self.kind, self.d)
            .ok_or_else(|| Error::MalformedHeader(format!("unknown kind {:?}", self.kind)))?;
        Ok(self.points() * nc * 16)
    }

    fn grid<T: Real>(&self) -> Result<Grid<T>> {
        Grid::new(self.d, self.n, T::lit(self.length)).map_err(|e| Error::MalformedHeader(e.to_string()))
    }
}

/// Header line plus payload.
pub fn encode<T: Real, K: Kind>(f: &Field<T, K>, header: &FieldHeader) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec(header)?;
    out.push(b'\n');
    out.reserve(f.data().len() * 16);
    for z in f.data() {
        out.extend_from_slice(&z.re.as_f64().to_le_bytes());
        out.extend_from_slice(&z.im.as_f64().to_le_bytes());
    }
    Ok(out)
}

/// Splits and validates the header; returns it with the payload slice.
pub fn decode_header(bytes: &[u8]) -> Result<(FieldHeader, &[u8])> {
    let end = bytes
        .iter()
        .take(MAX_HEADER)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MalformedHeader("no header line".into()))?;
    let header: FieldHeader = serde_json::from_slice(&bytes[..end])
        .map_err(|e| Error::MalformedHeader(format!("header is not valid JSON: {e}")))?;
    if components_of(&header.kind, header.d).is_none() {
        return Err(Error::MalformedHeader(format!("unknown kind {:?}", header.kind)));
    }
    header.grid::<f64>()?;
    Ok((header, &bytes[end + 1..]))
}

/// Length check: a payload that fits another (kind, d) at the same `n` is a
/// kind mismatch, anything else a length error.
fn check_payload(header: &FieldHeader, payload: &[u8]) -> Result<()> {
    let expected = header.payload_bytes()?;
    if payload.len() == expected {
        return Ok(());
    }
    for d in 2..=MAX_DIM {
        for kind in KINDS {
            let nc = components_of(kind, d).expect("known kind");
            if (kind, d) != (header.kind.as_str(), header.d) && header.n.pow(d as u32) * nc * 16 == payload.len() {
                return Err(Error::KindMismatch {
                    expected: format!("{} d={}", header.kind, header.d),
                    found: format!("payload sized for {kind} d={d}"),
                });
            }
        }
    }
    Err(Error::PayloadLength { expected, found: payload.len() })
}

fn decode_payload<T: Real>(payload: &[u8]) -> Vec<Complex<T>> {
    payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect()
}

/// Decodes a field of a known kind.
pub fn decode<T: Real, K: Kind>(bytes: &[u8]) -> Result<(Field<T, K>, FieldHeader)> {
    let (header, payload) = decode_header(bytes)?;
    if header.kind != K::NAME {
        return Err(Error::KindMismatch { expected: K::NAME.into(), found: header.kind });
    }
    check_payload(&header, payload)?;
    let field = Field::from_data(&header.grid()?, header.rep, decode_payload(payload))?;
    Ok((field, header))
}

pub fn write_field<T: Real, K: Kind>(f: &Field<T, K>, path: impl AsRef<Path>) -> Result<()> {
    write_field_with(f, &FieldHeader::for_field(f), path)
}

pub fn write_field_with<T: Real, K: Kind>(f: &Field<T, K>, header: &FieldHeader, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode(f, header)?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

fn read_bytes(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok(bytes)
}

pub fn read_field<T: Real, K: Kind>(path: impl AsRef<Path>) -> Result<Field<T, K>> {
    Ok(decode(&read_bytes(path)?)?.0)
}

/// A field of any kind, as read from a file.
#[derive(Clone, Debug)]
pub enum AnyField<T: Real> {
    Scalar(Field<T, Scalar>),
    Vector(Field<T, Vector>),
    SymMatrix(Field<T, SymMatrix>),
    AntiSymMatrix(Field<T, AntiSymMatrix>),
    Matrix(Field<T, Matrix>),
}

impl<T: Real> AnyField<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyField::Scalar(_) => Scalar::NAME,
            AnyField::Vector(_) => Vector::NAME,
            AnyField::SymMatrix(_) => SymMatrix::NAME,
            AnyField::AntiSymMatrix(_) => AntiSymMatrix::NAME,
            AnyField::Matrix(_) => Matrix::NAME,
        }
    }
}

pub fn decode_any<T: Real>(bytes: &[u8]) -> Result<(AnyField<T>, FieldHeader)> {
    let (header, _) = decode_header(bytes)?;
    Ok(match header.kind.as_str() {
        k if k == Scalar::NAME => {
            let (f, h) = decode(bytes)?;
            (AnyField::Scalar(f), h)
        }
        k if k == Vector::NAME => {
            let (f, h) = decode(bytes)?;
            (AnyField::Vector(f), h)
        }
        k if k == SymMatrix::NAME => {
            let (f, h) = decode(bytes)?;
            (AnyField::SymMatrix(f), h)
        }
        k if k == AntiSymMatrix::NAME => {
            let (f, h) = decode(bytes)?;
            (AnyField::AntiSymMatrix(f), h)
        }
        _ => {
            let (f, h) = decode(bytes)?;
            (AnyField::Matrix(f), h)
        }
    })
}

pub fn read_any<T: Real>(path: impl AsRef<Path>) -> Result<(AnyField<T>, FieldHeader)> {
    decode_any(&read_bytes(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_field;

    fn sample() -> Field<f64, SymMatrix> {
        let g = Grid::new(3, 8, 2.0).unwrap();
        random_field::<f64, SymMatrix>(&g, 1.0, 11).unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let f = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.field");
        let header = FieldHeader::for_field(&f).with_seed(Some(11));
        write_field_with(&f, &header, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let (back, h) = decode::<f64, SymMatrix>(&bytes).unwrap();
        assert_eq!(h, header);
        assert_eq!(back.rep(), Rep::Spectral);
        for (a, b) in back.data().iter().zip(f.data()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let physical = f.to_physical();
        write_field(&physical, &path).unwrap();
        let back: Field<f64, SymMatrix> = read_field(&path).unwrap();
        assert_eq!(back.data(), physical.data());
        assert!(matches!(read_any::<f64>(&path).unwrap().0, AnyField::SymMatrix(_)));
    }

    #[test]
    fn distinct_errors() {
        let f = sample();
        let bytes = encode(&f, &FieldHeader::for_field(&f)).unwrap();

        let truncated = &bytes[..bytes.len() - 5];
        assert!(matches!(decode::<f64, SymMatrix>(truncated), Err(Error::PayloadLength { .. })));

        assert!(matches!(decode::<f64, SymMatrix>(b"{not json\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(decode::<f64, SymMatrix>(b"no newline"), Err(Error::MalformedHeader(_))));
        let unknown = b"{\"kind\":\"tensor\",\"d\":3,\"n\":8,\"L\":1.0,\"rep\":\"physical\"}\n";
        assert!(matches!(decode::<f64, SymMatrix>(unknown), Err(Error::MalformedHeader(_))));
        let bad_n = b"{\"kind\":\"scalar\",\"d\":3,\"n\":7,\"L\":1.0,\"rep\":\"physical\"}\n";
        assert!(matches!(decode::<f64, Scalar>(bad_n), Err(Error::MalformedHeader(_))));

        assert!(matches!(decode::<f64, Vector>(&bytes), Err(Error::KindMismatch { .. })));

        // d = 3 header over a d = 2 payload of the same kind.
        let g2 = Grid::<f64>::new(2, 8, 2.0).unwrap();
        let f2 = random_field::<f64, SymMatrix>(&g2, 1.0, 1).unwrap();
        let mut forged = serde_json::to_vec(&FieldHeader::for_field(&f)).unwrap();
        forged.push(b'\n');
        let enc2 = encode(&f2, &FieldHeader::for_field(&f2)).unwrap();
        forged.extend_from_slice(decode_header(&enc2).unwrap().1);
        assert!(matches!(decode::<f64, SymMatrix>(&forged), Err(Error::KindMismatch { .. })));

        assert_eq!(Error::PayloadLength { expected: 1, found: 0 }.exit_code(), 4);
        assert_eq!(Error::MalformedHeader(String::new()).exit_code(), 3);
    }
}
