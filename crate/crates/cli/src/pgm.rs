//! Binary PGM (P5) and PPM (P6) with maxval 255.
//!
//! A P6 file is read as a grayscale grid three times as wide, one byte per
//! channel, which is how the cipher treats colour images.

use std::fs;
use std::io;
use std::path::Path;

use chaoscrypt::Image;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("bad magic {0:?}, expected P5 (or P6 with --rgb)")]
    Magic(String),
    #[error("header field {field}: {reason}")]
    Header { field: &'static str, reason: String },
    #[error("unsupported maxval {0}, only 255 is supported")]
    Maxval(u64),
    #[error("raster truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("raster has {0} trailing bytes")]
    Trailing(usize),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channels {
    Gray,
    Rgb,
}

impl Channels {
    fn magic(self) -> &'static [u8; 2] {
        match self {
            Channels::Gray => b"P5",
            Channels::Rgb => b"P6",
        }
    }

    fn count(self) -> usize {
        match self {
            Channels::Gray => 1,
            Channels::Rgb => 3,
        }
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.data.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &'static str) -> Result<u64, PgmError> {
        self.skip_space();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            let reason = match self.data.get(self.pos) {
                None => "missing, file ends in the header".to_string(),
                Some(&b) => format!("expected a decimal number, found {:?}", b as char),
            };
            return Err(PgmError::Header { field, reason });
        }
        let text = std::str::from_utf8(&self.data[start..self.pos]).unwrap();
        text.parse().map_err(|_| PgmError::Header {
            field,
            reason: format!("{text} is too large"),
        })
    }
}

/// Decodes a P5 file, or a P6 file when `channels` is `Rgb`.
pub fn decode(data: &[u8], channels: Channels) -> Result<Image, PgmError> {
    if data.get(..2) != Some(channels.magic()) {
        let got = String::from_utf8_lossy(&data[..data.len().min(2)]).into_owned();
        return Err(PgmError::Magic(got));
    }
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    for (field, v) in [("width", width), ("height", height)] {
        if v == 0 {
            return Err(PgmError::Header {
                field,
                reason: "must be positive".into(),
            });
        }
    }
    if maxval != 255 {
        return Err(PgmError::Maxval(maxval));
    }
    match data.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(PgmError::Header {
                field: "separator",
                reason: "expected one whitespace byte after maxval".into(),
            })
        }
    }
    let raster = &data[cur.pos..];
    let expected = width * height * channels.count();
    if raster.len() < expected {
        return Err(PgmError::Truncated {
            expected,
            actual: raster.len(),
        });
    }
    if raster.len() > expected {
        return Err(PgmError::Trailing(raster.len() - expected));
    }
    Ok(
        Image::new(width * channels.count(), height, raster.to_vec())
            .expect("dimensions checked above"),
    )
}

/// Canonical encoding: `P5\n<w> <h>\n255\n` and the raster.
pub fn encode(img: &Image, channels: Channels) -> Vec<u8> {
    let width = img.width() / channels.count();
    let mut out = Vec::with_capacity(img.len() + 20);
    out.extend_from_slice(channels.magic());
    out.extend_from_slice(format!("\n{} {}\n255\n", width, img.height()).as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

pub fn read(path: &Path, channels: Channels) -> Result<Image, PgmError> {
    let data = fs::read(path).map_err(|source| PgmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&data, channels)
}

pub fn write(img: &Image, path: &Path, channels: Channels) -> Result<(), PgmError> {
    fs::write(path, encode(img, channels)).map_err(|source| PgmError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_pgm(path: &Path) -> Result<Image, PgmError> {
    read(path, Channels::Gray)
}

pub fn write_pgm(img: &Image, path: &Path) -> Result<(), PgmError> {
    write(img, path, Channels::Gray)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |i, j| (i * 31 + j * 7) as u8).unwrap()
    }

    #[test]
    fn two_by_two() {
        let mut data = b"P5 2 2 255\n".to_vec();
        data.extend([1, 2, 3, 4]);
        let im = decode(&data, Channels::Gray).unwrap();
        assert_eq!((im.width(), im.height()), (2, 2));
        assert_eq!(im.get(1, 0), 2);
        assert_eq!(im.get(0, 1), 3);
    }

    #[test]
    fn round_trip() {
        let im = img(3, 5);
        assert_eq!(
            decode(&encode(&im, Channels::Gray), Channels::Gray).unwrap(),
            im
        );
    }

    #[test]
    fn one_pixel_file() {
        // "P5\n" + "1 1\n" + "255\n" is 3 + 4 + 4 header bytes
        let bytes = encode(&img(1, 1), Channels::Gray);
        assert_eq!(&bytes[..11], b"P5\n1 1\n255\n");
        assert_eq!(bytes.len(), 12);
    }

    #[test]
    fn raster_size() {
        let bytes = encode(&img(256, 256), Channels::Gray);
        assert_eq!(&bytes[..15], b"P5\n256 256\n255\n");
        assert_eq!(bytes.len() - 15, 65536);
    }

    #[test]
    fn comments_in_header() {
        let mut data = b"P5\n# made by hand\n2 1\n# depth\n255\n".to_vec();
        data.extend([9, 8]);
        assert_eq!(decode(&data, Channels::Gray).unwrap().pixels(), &[9, 8]);
    }

    #[test]
    fn errors_name_the_field() {
        let wide = decode(b"P5 2 2 65535\n\0\0\0\0", Channels::Gray).unwrap_err();
        assert!(matches!(wide, PgmError::Maxval(65535)));

        let short = decode(b"P5 2 2 255\n\0\0\0", Channels::Gray).unwrap_err();
        assert!(matches!(
            short,
            PgmError::Truncated {
                expected: 4,
                actual: 3
            }
        ));

        let magic = decode(b"P2 2 2 255\n0 0 0 0", Channels::Gray).unwrap_err();
        assert!(matches!(magic, PgmError::Magic(_)));

        let height = decode(b"P5 2 x 255\n", Channels::Gray).unwrap_err();
        assert!(matches!(
            height,
            PgmError::Header {
                field: "height",
                ..
            }
        ));

        let maxval = decode(b"P5 2 2", Channels::Gray).unwrap_err();
        assert!(matches!(
            maxval,
            PgmError::Header {
                field: "maxval",
                ..
            }
        ));

        let zero = decode(b"P5 0 2 255\n", Channels::Gray).unwrap_err();
        assert!(matches!(zero, PgmError::Header { field: "width", .. }));

        let extra = decode(b"P5 1 1 255\n\0\0", Channels::Gray).unwrap_err();
        assert!(matches!(extra, PgmError::Trailing(1)));
    }

    #[test]
    fn rgb_is_three_bytes_per_pixel() {
        let mut data = b"P6\n2 1\n255\n".to_vec();
        data.extend([1, 2, 3, 4, 5, 6]);
        let im = decode(&data, Channels::Rgb).unwrap();
        assert_eq!((im.width(), im.height()), (6, 1));
        assert_eq!(encode(&im, Channels::Rgb), data);
        assert!(decode(&data, Channels::Gray).is_err());
    }
}
