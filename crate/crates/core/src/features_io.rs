//! Feature file format.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "SPGF"
//!      4     4  version (u32) = 1
//!      8     8  N, frame rows (u64)
//!     16     8  K, feature width (u64)
//!     24     4  frame_stride (u32), original frames between rows, >= 1
//!     28     4  fps_num (u32), 0 if unknown
//!     32     4  fps_den (u32), 0 if unknown
//!     36  4·N·K payload, f32 little-endian, row-major
//! ```
//!
//! Files ending in `.csv` hold one frame per line, comma-separated. An
//! optional first line starting with `#` may carry `stride=S` and `fps=N/D`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;

pub const MAGIC: [u8; 4] = *b"SPGF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureFileHeader {
    pub n: u64,
    pub k: u64,
    pub frame_stride: u32,
    pub fps_num: u32,
    pub fps_den: u32,
}

impl FeatureFileHeader {
    /// Header describing `features`, with unknown frame rate.
    pub fn for_matrix(features: &FeatureMatrix, frame_stride: u32) -> Self {
        Self {
            n: features.n_rows() as u64,
            k: features.dim() as u64,
            frame_stride,
            fps_num: 0,
            fps_den: 0,
        }
    }

    pub fn with_fps(mut self, num: u32, den: u32) -> Self {
        self.fps_num = num;
        self.fps_den = den;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(Error::Format(format!("empty matrix {}x{}", self.n, self.k)));
        }
        if self.frame_stride == 0 {
            return Err(Error::Format("frame stride must be at least 1".into()));
        }
        Ok(())
    }

    fn payload_len(&self) -> Result<u64> {
        self.n
            .checked_mul(self.k)
            .and_then(|v| v.checked_mul(4))
            .ok_or_else(|| Error::Format(format!("N·K overflows for {}x{}", self.n, self.k)))
    }

    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..8].copy_from_slice(&VERSION.to_le_bytes());
        out[8..16].copy_from_slice(&self.n.to_le_bytes());
        out[16..24].copy_from_slice(&self.k.to_le_bytes());
        out[24..28].copy_from_slice(&self.frame_stride.to_le_bytes());
        out[28..32].copy_from_slice(&self.fps_num.to_le_bytes());
        out[32..36].copy_from_slice(&self.fps_den.to_le_bytes());
        out
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!(
                "header needs {HEADER_LEN} bytes, file has {}",
                bytes.len()
            )));
        }
        if bytes[0..4] != MAGIC {
            return Err(Error::Format(format!("bad magic {:?}", &bytes[0..4])));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let header = Self {
            n: u64_at(8),
            k: u64_at(16),
            frame_stride: u32_at(24),
            fps_num: u32_at(28),
            fps_den: u32_at(32),
        };
        header.validate()?;
        Ok(header)
    }
}

/// Decodes a binary feature file held in memory.
pub fn decode_features(bytes: &[u8]) -> Result<(FeatureMatrix, FeatureFileHeader)> {
    let header = FeatureFileHeader::decode(bytes)?;
    let expected = header.payload_len()?;
    let actual = (bytes.len() - HEADER_LEN) as u64;
    if actual != expected {
        return Err(Error::Truncated { expected, actual });
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    let features = FeatureMatrix::new(header.n as usize, header.k as usize, data)?;
    Ok((features, header))
}

/// Encodes `features` in the binary format. Values are rounded to `f32`.
pub fn encode_features(features: &FeatureMatrix, header: &FeatureFileHeader) -> Result<Vec<u8>> {
    check_header(features, header)?;
    let mut out = Vec::with_capacity(HEADER_LEN + features.as_slice().len() * 4);
    out.extend_from_slice(&header.encode());
    for (i, &v) in features.as_slice().iter().enumerate() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(Error::NonFinite {
                row: i / features.dim(),
                col: i % features.dim(),
            });
        }
        out.extend_from_slice(&f.to_le_bytes());
    }
    Ok(out)
}

fn check_header(features: &FeatureMatrix, header: &FeatureFileHeader) -> Result<()> {
    header.validate()?;
    if header.n != features.n_rows() as u64 || header.k != features.dim() as u64 {
        return Err(Error::Format(format!(
            "header says {}x{}, matrix is {}x{}",
            header.n,
            header.k,
            features.n_rows(),
            features.dim()
        )));
    }
    Ok(())
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn load_features(path: impl AsRef<Path>) -> Result<(FeatureMatrix, FeatureFileHeader)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if is_csv(path) {
        decode_csv(&bytes)
    } else {
        decode_features(&bytes)
    }
}

pub fn save_features(
    features: &FeatureMatrix,
    header: &FeatureFileHeader,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = if is_csv(path) {
        encode_csv(features, header)?
    } else {
        encode_features(features, header)?
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn parse_csv_meta(line: &str, header: &mut FeatureFileHeader) -> Result<()> {
    for token in line.trim_start_matches('#').split_whitespace() {
        let Some((key, value)) = token.split_once('=') else {
            continue;
        };
        let bad = || Error::Format(format!("bad csv metadata '{token}'"));
        match key {
            "stride" => header.frame_stride = value.parse().map_err(|_| bad())?,
            "fps" => {
                let (num, den) = value.split_once('/').ok_or_else(bad)?;
                header.fps_num = num.parse().map_err(|_| bad())?;
                header.fps_den = den.parse().map_err(|_| bad())?;
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn decode_csv(bytes: &[u8]) -> Result<(FeatureMatrix, FeatureFileHeader)> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| Error::Format(format!("csv is not UTF-8: {e}")))?;
    let mut header = FeatureFileHeader {
        n: 0,
        k: 0,
        frame_stride: 1,
        fps_num: 0,
        fps_den: 0,
    };
    if let Some(first) = text.lines().next().filter(|l| l.starts_with('#')) {
        parse_csv_meta(first, &mut header)?;
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut data = Vec::new();
    let mut rows = 0usize;
    let mut dim = None;
    for record in reader.records() {
        let record = record?;
        let width = *dim.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::Format(format!(
                "csv row {rows} has {} fields, expected {width}",
                record.len()
            )));
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Format(format!("csv row {rows}, column {col}: '{field}'")))?;
            data.push(v);
        }
        rows += 1;
    }
    let dim = dim.unwrap_or(0);
    header.n = rows as u64;
    header.k = dim as u64;
    header.validate()?;
    let features = FeatureMatrix::new(rows, dim, data)?;
    Ok((features, header))
}

pub fn encode_csv(features: &FeatureMatrix, header: &FeatureFileHeader) -> Result<Vec<u8>> {
    check_header(features, header)?;
    let mut out = Vec::new();
    writeln!(
        out,
        "# spgf stride={} fps={}/{}",
        header.frame_stride, header.fps_num, header.fps_den
    )
    .expect("write to Vec");
    {
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(&mut out);
        for row in features.rows() {
            writer.write_record(row.iter().map(|v| v.to_string()))?;
        }
        writer.flush().map_err(|e| Error::io("<memory>", e))?;
    }
    Ok(out)
}

/// Original (0-based) frame number of feature row `row` (0-based).
pub fn to_frame_index(row: usize, header: &FeatureFileHeader) -> Result<u64> {
    if row as u64 >= header.n {
        return Err(Error::OutOfRange {
            index: row,
            len: header.n as usize,
        });
    }
    Ok(row as u64 * header.frame_stride as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureMatrix {
        FeatureMatrix::new(2, 3, vec![1.0, 2.0, 3.0, -0.5, 0.25, 8.0]).unwrap()
    }

    #[test]
    fn binary_well_formed() {
        let f = sample();
        let h = FeatureFileHeader::for_matrix(&f, 5).with_fps(30000, 1001);
        let bytes = encode_features(&f, &h).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 24);
        assert_eq!(&bytes[0..4], b"SPGF");
        let (g, h2) = decode_features(&bytes).unwrap();
        assert_eq!(g, f);
        assert_eq!(h2, h);
        assert_eq!(h2.frame_stride, 5);
    }

    #[test]
    fn header_byte_layout() {
        let f = sample();
        let h = FeatureFileHeader::for_matrix(&f, 7).with_fps(25, 1);
        let b = encode_features(&f, &h).unwrap();
        assert_eq!(&b[4..8], &[1, 0, 0, 0]);
        assert_eq!(&b[8..16], &[2, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&b[16..24], &[3, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&b[24..28], &[7, 0, 0, 0]);
        assert_eq!(&b[28..32], &[25, 0, 0, 0]);
        assert_eq!(&b[32..36], &[1, 0, 0, 0]);
        assert_eq!(&b[36..40], &1.0f32.to_le_bytes());
    }

    #[test]
    fn truncated_payload() {
        let f = sample();
        let mut bytes = encode_features(&f, &FeatureFileHeader::for_matrix(&f, 1)).unwrap();
        bytes.truncate(bytes.len() - 4);
        assert!(matches!(
            decode_features(&bytes),
            Err(Error::Truncated {
                expected: 24,
                actual: 20
            })
        ));
    }

    #[test]
    fn rejects_bad_header() {
        let f = sample();
        let good = encode_features(&f, &FeatureFileHeader::for_matrix(&f, 1)).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode_features(&bad), Err(Error::Format(_))));

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(decode_features(&bad), Err(Error::Format(_))));

        let mut bad = good.clone();
        bad[24..28].copy_from_slice(&0u32.to_le_bytes());
        assert!(decode_features(&bad).is_err());

        let mut bad = good[..HEADER_LEN].to_vec();
        bad[8..16].copy_from_slice(&0u64.to_le_bytes());
        assert!(decode_features(&bad).is_err());

        assert!(decode_features(&good[..10]).is_err());
    }

    #[test]
    fn rejects_zero_row_with_index() {
        let f = sample();
        let mut bytes = encode_features(&f, &FeatureFileHeader::for_matrix(&f, 1)).unwrap();
        for b in &mut bytes[HEADER_LEN + 12..] {
            *b = 0;
        }
        assert!(matches!(
            decode_features(&bytes),
            Err(Error::ZeroNorm { row: 1 })
        ));

        let mut bytes = encode_features(&f, &FeatureFileHeader::for_matrix(&f, 1)).unwrap();
        bytes[HEADER_LEN + 4..HEADER_LEN + 8].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            decode_features(&bytes),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn header_must_match_matrix() {
        let f = sample();
        let mut h = FeatureFileHeader::for_matrix(&f, 1);
        h.n = 3;
        assert!(encode_features(&f, &h).is_err());
        let h = FeatureFileHeader::for_matrix(&f, 0);
        assert!(encode_features(&f, &h).is_err());
    }

    #[test]
    fn csv_with_metadata() {
        let text = "# spgf stride=4 fps=30/1\n1, 2, 3\n0.5,0,1e-3\n";
        let (f, h) = decode_csv(text.as_bytes()).unwrap();
        assert_eq!((f.n_rows(), f.dim()), (2, 3));
        assert_eq!(f.row(1), &[0.5, 0.0, 1e-3]);
        assert_eq!((h.frame_stride, h.fps_num, h.fps_den), (4, 30, 1));
    }

    #[test]
    fn csv_defaults_and_errors() {
        let (f, h) = decode_csv(b"# frames\n1,0\n0,1\n").unwrap();
        assert_eq!(f.n_rows(), 2);
        assert_eq!(h.frame_stride, 1);
        let (_, h) = decode_csv(b"3,4\n").unwrap();
        assert_eq!((h.frame_stride, h.fps_num), (1, 0));

        assert!(decode_csv(b"1,2\n3\n").is_err());
        assert!(decode_csv(b"1,x\n").is_err());
        assert!(matches!(
            decode_csv(b"1,2\n0,0\n"),
            Err(Error::ZeroNorm { row: 1 })
        ));
        assert!(decode_csv(b"# only a comment\n").is_err());
    }

    #[test]
    fn frame_index_mapping() {
        let f = FeatureMatrix::new(4, 1, vec![1.0; 4]).unwrap();
        let h5 = FeatureFileHeader::for_matrix(&f, 5);
        assert_eq!(to_frame_index(0, &h5).unwrap(), 0);
        assert_eq!(to_frame_index(2, &h5).unwrap(), 10);
        let h1 = FeatureFileHeader::for_matrix(&f, 1);
        assert_eq!(to_frame_index(3, &h1).unwrap(), 3);
        assert!(to_frame_index(4, &h1).is_err());
    }

    #[test]
    fn file_round_trip_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let f = sample();
        let h = FeatureFileHeader::for_matrix(&f, 5);
        for name in ["x.spgf", "x.csv"] {
            let path = dir.path().join(name);
            save_features(&f, &h, &path).unwrap();
            let (g, h2) = load_features(&path).unwrap();
            assert_eq!(g, f);
            assert_eq!(h2, h);
        }
        assert!(matches!(
            load_features(dir.path().join("missing.spgf")),
            Err(Error::Io { .. })
        ));
    }
}
