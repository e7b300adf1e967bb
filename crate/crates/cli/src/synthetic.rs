//! Deterministic stand-in pictures for the attack demo.

use chaoscrypt::Image;

/// Smooth blobs on a gradient, loosely like a photo of vegetables.
pub fn peppers_like(width: usize, height: usize) -> Image {
    let (sx, sy) = (width as f64 / 256.0, height as f64 / 256.0);
    let blobs = [
        (70.0, 90.0, 55.0, 210.0),
        (170.0, 80.0, 45.0, 150.0),
        (120.0, 180.0, 65.0, 90.0),
        (210.0, 200.0, 40.0, 240.0),
    ];
    Image::from_fn(width, height, |i, j| {
        let (x, y) = (i as f64 / sx, j as f64 / sy);
        let mut v = 40.0 + 0.25 * x + 0.1 * y;
        for &(cx, cy, r, level) in &blobs {
            let d2 = ((x - cx).powi(2) + (y - cy).powi(2)) / (r * r);
            v += (level - v) * (-d2).exp();
        }
        v.clamp(0.0, 255.0) as u8
    })
    .expect("positive size")
}

/// Concentric rings with a diagonal stripe, used as the unseen image.
pub fn rings(width: usize, height: usize) -> Image {
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    Image::from_fn(width, height, |i, j| {
        let r = ((i as f64 - cx).powi(2) + (j as f64 - cy).powi(2)).sqrt();
        let ring = 128.0 + 100.0 * (r / 6.0).sin();
        if (i + j) % 64 < 8 {
            255
        } else {
            ring as u8
        }
    })
    .expect("positive size")
}
