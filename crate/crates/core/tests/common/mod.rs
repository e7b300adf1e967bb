//! Independent reference implementations used as test oracles.
//!
//! Everything here is written against the cipher's defining equations with
//! 1-based indices, sharing no code with the library beyond the public
//! `Image`, `Keystreams` and `SecretKey` types.

#![allow(dead_code)]

use chaoscrypt::{Image, Keystreams, SecretKey};
use rand::Rng;

/// 1-based modular reduction into `1..=m`.
fn wrap1(v: i64, m: usize) -> usize {
    ((v - 1).rem_euclid(m as i64) + 1) as usize
}

pub fn ref_f0(x: f64) -> f64 {
    8.0 * (x * x * x * x) - 8.0 * (x * x) + 1.0
}

pub fn ref_f1(y: f64) -> f64 {
    4.0 * (y * y * y) - 3.0 * y
}

fn ref_quantize(v: f64, levels: usize) -> usize {
    if v == 1.0 {
        levels - 1
    } else {
        let q = ((1.0 + v) / 2.0 * levels as f64).floor() as usize;
        q.min(levels - 1)
    }
}

/// Compound samples `z_1..z_count` plus the final `(x, y)`.
pub fn ref_compound(x0: f64, y0: f64, count: usize) -> (Vec<f64>, f64, f64) {
    let (mut xs, mut ys) = (vec![x0], vec![y0]);
    let mut z = Vec::with_capacity(count);
    for _ in 0..count {
        let (x, y) = (*xs.last().unwrap(), *ys.last().unwrap());
        if x + y < 0.0 {
            xs.push(ref_f0(x));
            z.push(*xs.last().unwrap());
        } else {
            ys.push(ref_f1(y));
            z.push(*ys.last().unwrap());
        }
    }
    (z, *xs.last().unwrap(), *ys.last().unwrap())
}

/// Keystreams computed from scratch. `s1[k-1] = S1(k)` and so on.
pub fn ref_keystreams(key: &SecretKey, m: usize, n: usize) -> (Vec<u8>, Vec<usize>, Vec<usize>) {
    let (z, mut x, mut y) = ref_compound(key.x0(), key.y0(), m * n);
    let s1 = z.iter().map(|&v| ref_quantize(v, 256) as u8).collect();
    let mut s2 = Vec::new();
    for _ in 1..=n {
        x = ref_f0(x);
        s2.push(ref_quantize(x, m));
    }
    let mut s3 = Vec::new();
    for _ in 1..=m {
        y = ref_f1(y);
        s3.push(ref_quantize(y, n));
    }
    (s1, s2, s3)
}

/// `I(i, j)` with 1-based `i` (column) and `j` (row).
fn at(img: &[Vec<u8>], i: usize, j: usize) -> u8 {
    img[j - 1][i - 1]
}

fn to_grid(img: &Image) -> Vec<Vec<u8>> {
    img.pixels()
        .chunks(img.width())
        .map(|r| r.to_vec())
        .collect()
}

fn from_grid(grid: Vec<Vec<u8>>) -> Image {
    let (m, n) = (grid[0].len(), grid.len());
    Image::new(m, n, grid.concat()).unwrap()
}

/// Substitution, then each row `j` rotated by `S2(j)` toward larger `i`,
/// then each column `i` rotated by `S3(i)` toward larger `j`, one pixel at
/// a time.
pub fn staged_encrypt(plain: &Image, ks: &Keystreams) -> Image {
    let (m, n) = (plain.width(), plain.height());
    let p = to_grid(plain);
    let s1 = |k: usize| ks.s1[k - 1];
    let s2 = |j: usize| ks.s2[j - 1] as i64;
    let s3 = |i: usize| ks.s3[i - 1] as i64;

    let mut star = vec![vec![0u8; m]; n];
    for j in 1..=n {
        for i in 1..=m {
            star[j - 1][i - 1] = at(&p, i, j) ^ s1((j - 1) * m + i);
        }
    }
    let mut star2 = vec![vec![0u8; m]; n];
    for j in 1..=n {
        for i in 1..=m {
            star2[j - 1][i - 1] = at(&star, wrap1(i as i64 - s2(j), m), j);
        }
    }
    let mut out = vec![vec![0u8; m]; n];
    for j in 1..=n {
        for i in 1..=m {
            out[j - 1][i - 1] = at(&star2, i, wrap1(j as i64 - s3(i), n));
        }
    }
    from_grid(out)
}

/// Inverts the three stages in reverse order.
pub fn staged_decrypt(cipher: &Image, ks: &Keystreams) -> Image {
    let (m, n) = (cipher.width(), cipher.height());
    let c = to_grid(cipher);
    let s2 = |j: usize| ks.s2[j - 1] as i64;
    let s3 = |i: usize| ks.s3[i - 1] as i64;

    let mut star2 = vec![vec![0u8; m]; n];
    for j in 1..=n {
        for i in 1..=m {
            star2[j - 1][i - 1] = at(&c, i, wrap1(j as i64 + s3(i), n));
        }
    }
    let mut star = vec![vec![0u8; m]; n];
    for j in 1..=n {
        for i in 1..=m {
            star[j - 1][i - 1] = at(&star2, wrap1(i as i64 + s2(j), m), j);
        }
    }
    let mut out = vec![vec![0u8; m]; n];
    for j in 1..=n {
        for i in 1..=m {
            out[j - 1][i - 1] = at(&star, i, j) ^ ks.s1[(j - 1) * m + i - 1];
        }
    }
    from_grid(out)
}

pub fn random_image<R: Rng>(rng: &mut R, m: usize, n: usize) -> Image {
    let mut pixels = vec![0u8; m * n];
    rng.fill(pixels.as_mut_slice());
    Image::new(m, n, pixels).unwrap()
}

/// Any key in [-1, 1]^2, weak or not.
pub fn any_key<R: Rng>(rng: &mut R) -> SecretKey {
    SecretKey::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)).unwrap()
}

/// A smooth natural-looking 256x256 test picture: overlapping soft blobs
/// on a gradient.
pub fn peppers_like() -> Image {
    let blobs = [
        (70.0, 90.0, 55.0, 210.0),
        (170.0, 80.0, 45.0, 150.0),
        (120.0, 180.0, 65.0, 90.0),
        (210.0, 200.0, 40.0, 240.0),
    ];
    Image::from_fn(256, 256, |i, j| {
        let (x, y) = (i as f64, j as f64);
        let mut v = 40.0 + 0.25 * x + 0.1 * y;
        for &(cx, cy, r, level) in &blobs {
            let d2 = ((x - cx).powi(2) + (y - cy).powi(2)) / (r * r);
            v += (level - v) * (-d2).exp();
        }
        v.clamp(0.0, 255.0) as u8
    })
    .unwrap()
}
