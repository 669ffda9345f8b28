//! Grayscale image files: netpbm PGM (plain P2 and binary P5) and CSV.
//!
//! PGM `maxval` must be `2^q - 1` for a bit depth `q` in `1..=8`, so the
//! header alone fixes the intensity range. CSV files carry no depth and are
//! read with a caller-supplied one.

use std::path::Path;

use qpix_core::{GrayImage, ImageError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("PGM parse error at byte {offset}: {message}")]
    Pgm { offset: usize, message: String },
    #[error("CSV parse error at line {line}, field {field}: {message}")]
    Csv {
        line: usize,
        field: usize,
        message: String,
    },
    #[error("invalid image: {0}")]
    Image(#[from] ImageError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    PlainPgm,
    BinaryPgm,
    Csv,
}

impl ImageFormat {
    /// Picks the output format from a file extension. Anything that is not
    /// `.csv` is written as PGM.
    pub fn for_path(path: &Path, plain: bool) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => ImageFormat::Csv,
            _ if plain => ImageFormat::PlainPgm,
            _ => ImageFormat::BinaryPgm,
        }
    }
}

/// Decodes an image, sniffing PGM by its magic number and falling back to CSV
/// with `csv_bits` of depth.
pub fn read_image(bytes: &[u8], csv_bits: u32) -> Result<GrayImage, FormatError> {
    if bytes.first() == Some(&b'P') {
        parse_pgm(bytes)
    } else {
        let text = std::str::from_utf8(bytes).map_err(|e| FormatError::Csv {
            line: 1 + bytes[..e.valid_up_to()]
                .iter()
                .filter(|&&b| b == b'\n')
                .count(),
            field: 0,
            message: "not valid UTF-8".into(),
        })?;
        parse_csv(text, csv_bits)
    }
}

pub fn write_image(image: &GrayImage, format: ImageFormat) -> Vec<u8> {
    match format {
        ImageFormat::PlainPgm => write_pgm(image, true),
        ImageFormat::BinaryPgm => write_pgm(image, false),
        ImageFormat::Csv => write_csv(image).into_bytes(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, FormatError> {
        Err(FormatError::Pgm {
            offset,
            message: message.into(),
        })
    }

    /// Skips whitespace and `#` comments running to end of line.
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, FormatError> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.bytes.get(start) {
                None => self.err(start, format!("unexpected end of data, expected {what}")),
                Some(&b) => self.err(start, format!("expected {what}, found byte 0x{b:02x}")),
            };
        }
        if let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_whitespace() && b != b'#' {
                return self.err(self.pos, format!("unexpected byte 0x{b:02x} in {what}"));
            }
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .or_else(|_| self.err(start, format!("{what} out of range")))
    }
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, FormatError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let plain = match bytes.get(..2) {
        Some(b"P2") => true,
        Some(b"P5") => false,
        Some([b'P', d]) if d.is_ascii_digit() => {
            return cur.err(0, format!("unsupported netpbm variant P{}", *d as char))
        }
        _ => return cur.err(0, "missing PGM magic number (P2 or P5)"),
    };
    cur.pos = 2;
    if !bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return cur.err(2, "expected whitespace after magic number");
    }

    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval_at = {
        cur.skip_space();
        cur.pos
    };
    let maxval = cur.number("maxval")?;
    let q = match maxval.checked_add(1) {
        Some(v) if v.is_power_of_two() && (2..=256).contains(&v) => v.trailing_zeros(),
        _ => {
            return cur.err(
                maxval_at,
                format!("maxval {maxval} is not 2^q - 1 for q in 1..=8"),
            )
        }
    };
    if width == 0 || height == 0 {
        return cur.err(maxval_at, "image has zero width or height");
    }

    let count = width
        .checked_mul(height)
        .filter(|&c| c <= 1 << 24)
        .map_or_else(|| cur.err(0, "image dimensions too large"), Ok)?;
    let mut pixels = Vec::with_capacity(count);
    if plain {
        for i in 0..count {
            cur.skip_space();
            let at = cur.pos;
            let v = cur.number(&format!("pixel {i}"))?;
            if v > maxval {
                return cur.err(at, format!("pixel value {v} exceeds maxval {maxval}"));
            }
            pixels.push(v);
        }
        cur.skip_space();
        if cur.pos < bytes.len() {
            return cur.err(cur.pos, "trailing data after raster");
        }
    } else {
        // exactly one whitespace byte separates maxval from the raster
        let start = cur.pos + 1;
        let raster = bytes.get(start..start + count).map_or_else(
            || {
                cur.err(
                    bytes.len(),
                    format!("raster truncated: need {count} bytes after offset {start}"),
                )
            },
            Ok,
        )?;
        for (i, &b) in raster.iter().enumerate() {
            if u32::from(b) > maxval {
                return cur.err(
                    start + i,
                    format!("pixel value {b} exceeds maxval {maxval}"),
                );
            }
            pixels.push(u32::from(b));
        }
    }

    let rows: Vec<&[u32]> = pixels.chunks(width).collect();
    Ok(GrayImage::from_rows(q, &rows)?)
}

pub fn write_pgm(image: &GrayImage, plain: bool) -> Vec<u8> {
    let side = image.side();
    let magic = if plain { "P2" } else { "P5" };
    let mut out = format!("{magic}\n{side} {side}\n{}\n", image.max_intensity()).into_bytes();
    if plain {
        for row in image.rows() {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    } else {
        // intensities fit in a byte since q <= 8
        out.extend(image.pixels().iter().map(|&v| v as u8));
    }
    out
}

pub fn parse_csv(text: &str, bits: u32) -> Result<GrayImage, FormatError> {
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(j, field)| {
                field.trim().parse::<u32>().map_err(|e| FormatError::Csv {
                    line: i + 1,
                    field: j + 1,
                    message: format!("{:?}: {e}", field.trim()),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(GrayImage::from_rows(bits, &rows)?)
}

pub fn write_csv(image: &GrayImage) -> String {
    let mut out = String::new();
    for row in image.rows() {
        let fields: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GrayImage {
        GrayImage::new(1, 8, vec![0, 100, 200, 255]).unwrap()
    }

    #[test]
    fn plain_pgm_layout() {
        let bytes = write_pgm(&sample(), true);
        assert_eq!(bytes, b"P2\n2 2\n255\n0 100\n200 255\n");
        assert_eq!(parse_pgm(&bytes).unwrap(), sample());
    }

    #[test]
    fn binary_pgm_layout() {
        let bytes = write_pgm(&sample(), false);
        assert_eq!(bytes, b"P5\n2 2\n255\n\x00\x64\xc8\xff");
        assert_eq!(parse_pgm(&bytes).unwrap(), sample());
    }

    #[test]
    fn header_comments_and_depth() {
        let img = parse_pgm(b"P2 # made by hand\n2 # width\n2\n3\n0 1 2 3\n").unwrap();
        assert_eq!(img.bit_depth(), 2);
        assert_eq!(img.pixels(), &[0, 1, 2, 3]);
    }

    #[test]
    fn corrupt_headers_name_offsets() {
        match parse_pgm(b"P2\n2 x\n255\n") {
            Err(FormatError::Pgm { offset: 5, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_pgm(b"Q5\n") {
            Err(FormatError::Pgm { offset: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_pgm(b"P6\n2 2\n255\n") {
            Err(FormatError::Pgm { offset: 0, message }) => assert!(message.contains("P6")),
            other => panic!("{other:?}"),
        }
        match parse_pgm(b"P2\n2 2\n200\n0 0 0 0\n") {
            Err(FormatError::Pgm { offset: 7, message }) => assert!(message.contains("maxval")),
            other => panic!("{other:?}"),
        }
        match parse_pgm(b"P5\n2 2\n255\n\x00\x01") {
            Err(FormatError::Pgm {
                offset: 13,
                message,
            }) => assert!(message.contains("truncated")),
            other => panic!("{other:?}"),
        }
        match parse_pgm(b"P2\n2 2\n15\n0 1 16 3\n") {
            Err(FormatError::Pgm { offset: 14, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shape_errors_come_from_image_validation() {
        assert!(matches!(
            parse_pgm(b"P2\n3 3\n255\n0 0 0 0 0 0 0 0 0\n"),
            Err(FormatError::Image(ImageError::SideNotPowerOfTwo {
                side: 3
            }))
        ));
        assert!(matches!(
            parse_pgm(b"P2\n4 2\n255\n0 0 0 0 0 0 0 0\n"),
            Err(FormatError::Image(ImageError::NotSquare { .. }))
        ));
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let text = write_csv(&sample());
        assert_eq!(text, "0,100\n200,255\n");
        assert_eq!(parse_csv(&text, 8).unwrap(), sample());
        assert!(matches!(
            parse_csv("0,1\n2,x\n", 8),
            Err(FormatError::Csv {
                line: 2,
                field: 2,
                ..
            })
        ));
        assert!(matches!(
            parse_csv("0,1\n2,300\n", 8),
            Err(FormatError::Image(ImageError::IntensityOverflow { .. }))
        ));
    }

    #[test]
    fn sniffing() {
        assert_eq!(
            read_image(b"0,1\n2,3\n", 2).unwrap().pixels(),
            &[0, 1, 2, 3]
        );
        assert_eq!(
            read_image(&write_pgm(&sample(), false), 2).unwrap(),
            sample()
        );
        assert_eq!(
            ImageFormat::for_path(Path::new("a.CSV"), false),
            ImageFormat::Csv
        );
        assert_eq!(
            ImageFormat::for_path(Path::new("a.pgm"), true),
            ImageFormat::PlainPgm
        );
    }
}
