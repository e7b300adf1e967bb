//! Keystream derivation and the substitution-permutation cipher.
//!
//! Indices are 0-based throughout: pixel `(i, j)` has column `i` in
//! `0..width` and row `j` in `0..height`, and its substitution byte is
//! `s1[j * width + i]`. Circular shifts move pixels toward larger indices.

use std::io::{Read, Write};

use crate::chaos::{compound_step, f0, f1, quantize, SecretKey};
use crate::error::CipherError;

/// An 8-bit grayscale image, `width` columns by `height` rows, stored row
/// by row.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, CipherError> {
        if width == 0 || height == 0 {
            return Err(CipherError::EmptyImage { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or(CipherError::EmptyImage { width, height })?;
        if pixels.len() != expected {
            return Err(CipherError::BufferSize {
                width,
                height,
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, CipherError> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    /// Builds an image by evaluating `f(i, j)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, CipherError> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for j in 0..height {
            for i in 0..width {
                pixels.push(f(i, j));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.pixels[j * self.width + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: u8) {
        self.pixels[j * self.width + i] = value;
    }

    /// Raster bytes, row-major, top row first.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    /// Pixel-wise XOR of two images of the same shape.
    pub fn xor(&self, other: &Image) -> Result<Image, CipherError> {
        self.check_shape(other.width, other.height)?;
        let pixels = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(Image {
            width: self.width,
            height: self.height,
            pixels,
        })
    }

    pub(crate) fn check_shape(&self, width: usize, height: usize) -> Result<(), CipherError> {
        if self.width == width && self.height == height {
            Ok(())
        } else {
            Err(CipherError::Shape {
                expected_width: width,
                expected_height: height,
                width: self.width,
                height: self.height,
            })
        }
    }
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Image({}x{}", self.width, self.height)?;
        if self.pixels.len() <= 64 {
            write!(f, ", {:?}", self.pixels)?;
        }
        f.write_str(")")
    }
}

/// The three sequences that fully determine encryption for one key and
/// image size.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Keystreams {
    width: usize,
    height: usize,
    /// XOR bytes, one per pixel, indexed `j * width + i`.
    pub s1: Vec<u8>,
    /// Horizontal shift of each row, values in `0..width`.
    pub s2: Vec<usize>,
    /// Vertical shift of each column, values in `0..height`.
    pub s3: Vec<usize>,
}

impl Keystreams {
    /// Assembles keystreams from parts, checking lengths and ranges.
    pub fn from_parts(
        width: usize,
        height: usize,
        s1: Vec<u8>,
        s2: Vec<usize>,
        s3: Vec<usize>,
    ) -> Result<Self, CipherError> {
        if width == 0 || height == 0 {
            return Err(CipherError::EmptyImage { width, height });
        }
        if s1.len() != width * height || s2.len() != height || s3.len() != width {
            return Err(CipherError::Keystreams(format!(
                "lengths ({}, {}, {}) do not match {width}x{height}",
                s1.len(),
                s2.len(),
                s3.len()
            )));
        }
        if let Some(j) = s2.iter().position(|&s| s >= width) {
            return Err(CipherError::Keystreams(format!(
                "row shift s2[{j}] = {} is not below width {width}",
                s2[j]
            )));
        }
        if let Some(i) = s3.iter().position(|&s| s >= height) {
            return Err(CipherError::Keystreams(format!(
                "column shift s3[{i}] = {} is not below height {height}",
                s3[i]
            )));
        }
        Ok(Self {
            width,
            height,
            s1,
            s2,
            s3,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn check_image(&self, img: &Image) -> Result<(), CipherError> {
        img.check_shape(self.width, self.height)
    }
}

/// Derives `(s1, s2, s3)` for a `width x height` image.
///
/// `width * height` compound steps produce `s1`. From the state they leave
/// behind, `f0` is iterated `height` more times for the row shifts and
/// `f1` is iterated `width` more times for the column shifts.
pub fn derive_keystreams(
    key: &SecretKey,
    width: usize,
    height: usize,
) -> Result<Keystreams, CipherError> {
    if width == 0 || height == 0 {
        return Err(CipherError::EmptyImage { width, height });
    }
    let mut state = key.initial_state();
    let mut s1 = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        let (next, sample) = compound_step(state);
        state = next;
        s1.push(quantize(sample.z, 256) as u8);
    }

    let mut x = state.x;
    let s2 = (0..height)
        .map(|_| {
            x = f0(x);
            quantize(x, width)
        })
        .collect();

    let mut y = state.y;
    let s3 = (0..width)
        .map(|_| {
            y = f1(y);
            quantize(y, height)
        })
        .collect();

    Ok(Keystreams {
        width,
        height,
        s1,
        s2,
        s3,
    })
}

/// Encrypts with the closed form: each cipher pixel is read from its
/// source position and XORed with that source's keystream byte.
pub fn encrypt(plain: &Image, ks: &Keystreams) -> Result<Image, CipherError> {
    ks.check_image(plain)?;
    let (m, n) = (ks.width, ks.height);
    let mut out = vec![0u8; m * n];
    for j in 0..n {
        for i in 0..m {
            let js = (j + n - ks.s3[i]) % n;
            let is = (i + m - ks.s2[js]) % m;
            let k = js * m + is;
            out[j * m + i] = plain.pixels[k] ^ ks.s1[k];
        }
    }
    Ok(Image {
        width: m,
        height: n,
        pixels: out,
    })
}

/// Encrypts in three passes: XOR substitution, row rotation by `s2`, then
/// column rotation by `s3`. Produces the same output as [`encrypt`].
pub fn encrypt_staged(plain: &Image, ks: &Keystreams) -> Result<Image, CipherError> {
    ks.check_image(plain)?;
    let (m, n) = (ks.width, ks.height);

    let substituted: Vec<u8> = plain
        .pixels
        .iter()
        .zip(&ks.s1)
        .map(|(p, k)| p ^ k)
        .collect();

    let mut rows = vec![0u8; m * n];
    for (j, (src, dst)) in substituted.chunks(m).zip(rows.chunks_mut(m)).enumerate() {
        dst.copy_from_slice(src);
        dst.rotate_right(ks.s2[j]);
    }

    let mut out = vec![0u8; m * n];
    for i in 0..m {
        let shift = ks.s3[i];
        for j in 0..n {
            out[((j + shift) % n) * m + i] = rows[j * m + i];
        }
    }
    Ok(Image {
        width: m,
        height: n,
        pixels: out,
    })
}

/// Inverts [`encrypt`]. The keystream byte is taken from the destination
/// position.
pub fn decrypt(cipher: &Image, ks: &Keystreams) -> Result<Image, CipherError> {
    ks.check_image(cipher)?;
    let (m, n) = (ks.width, ks.height);
    let mut out = vec![0u8; m * n];
    for j in 0..n {
        for i in 0..m {
            let ic = (i + ks.s2[j]) % m;
            let jc = (j + ks.s3[ic]) % n;
            out[j * m + i] = cipher.pixels[jc * m + ic] ^ ks.s1[j * m + i];
        }
    }
    Ok(Image {
        width: m,
        height: n,
        pixels: out,
    })
}

/// Where plaintext pixel `(i, j)` lands in the ciphertext.
pub fn forward_position(ks: &Keystreams, i: usize, j: usize) -> (usize, usize) {
    let ic = (i + ks.s2[j]) % ks.width;
    let jc = (j + ks.s3[ic]) % ks.height;
    (ic, jc)
}

const DUMP_MAGIC: &[u8; 4] = b"CCKS";
const DUMP_VERSION: u8 = 1;

/// Writes the binary keystream dump: a 16-byte header (`CCKS`, version 1,
/// three zero bytes, width and height as LE u32), the `s1` bytes, then
/// `s2` and `s3` as LE u32.
pub fn write_keystream_dump<W: Write>(ks: &Keystreams, mut w: W) -> std::io::Result<()> {
    let mut header = [0u8; 16];
    header[..4].copy_from_slice(DUMP_MAGIC);
    header[4] = DUMP_VERSION;
    header[8..12].copy_from_slice(&dim_u32(ks.width)?.to_le_bytes());
    header[12..16].copy_from_slice(&dim_u32(ks.height)?.to_le_bytes());
    w.write_all(&header)?;
    w.write_all(&ks.s1)?;
    for &s in ks.s2.iter().chain(&ks.s3) {
        w.write_all(&dim_u32(s)?.to_le_bytes())?;
    }
    w.flush()
}

fn dim_u32(v: usize) -> std::io::Result<u32> {
    u32::try_from(v)
        .map_err(|_| std::io::Error::new(std::io::ErrorKind::InvalidInput, "value exceeds u32"))
}

/// Reads a dump written by [`write_keystream_dump`].
pub fn read_keystream_dump<R: Read>(mut r: R) -> Result<Keystreams, CipherError> {
    let io = |e: std::io::Error| CipherError::Dump(e.to_string());
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|_| CipherError::Dump("truncated header".into()))?;
    if &header[..4] != DUMP_MAGIC {
        return Err(CipherError::Dump("bad magic".into()));
    }
    if header[4] != DUMP_VERSION {
        return Err(CipherError::Dump(format!(
            "unsupported version {}",
            header[4]
        )));
    }
    if header[5..8] != [0, 0, 0] {
        return Err(CipherError::Dump("reserved bytes are not zero".into()));
    }
    let width = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    if width == 0 || height == 0 {
        return Err(CipherError::EmptyImage { width, height });
    }

    let mut s1 = vec![0u8; width * height];
    r.read_exact(&mut s1)
        .map_err(|_| CipherError::Dump("truncated s1".into()))?;
    let mut read_u32s = |count: usize, what: &str| -> Result<Vec<usize>, CipherError> {
        let mut buf = vec![0u8; count * 4];
        r.read_exact(&mut buf)
            .map_err(|_| CipherError::Dump(format!("truncated {what}")))?;
        Ok(buf
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
            .collect())
    };
    let s2 = read_u32s(height, "s2")?;
    let s3 = read_u32s(width, "s3")?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(io)?;
    if !rest.is_empty() {
        return Err(CipherError::Dump(format!("{} trailing bytes", rest.len())));
    }
    Keystreams::from_parts(width, height, s1, s2, s3)
}
