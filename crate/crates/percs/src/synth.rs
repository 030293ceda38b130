//! Deterministic synthetic test images.
//!
//! No standard photographic test content ships with the crate, so demos and
//! tests synthesize natural-statistics imagery instead: multi-octave value
//! noise (power roughly decaying with spatial frequency, like photographs),
//! a smooth illumination gradient, and a few soft-edged geometric objects.
//! Everything is derived from a ChaCha8 stream, so a `(width, height, seed)`
//! triple always yields the identical image.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imageio::GrayImage;

/// Natural-statistics grayscale image: smooth background, fractal texture,
/// and a handful of objects with soft edges. Samples are quantized to
/// integers in [0, 255].
pub fn natural_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = vec![0.0f64; width * height];

    // Illumination: tilted plane plus a broad cosine bump.
    let tilt_x = rng.gen_range(-0.35..0.35);
    let tilt_y = rng.gen_range(-0.35..0.35);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    for y in 0..height {
        for x in 0..width {
            let fx = x as f64 / width as f64;
            let fy = y as f64 / height as f64;
            field[y * width + x] = tilt_x * fx
                + tilt_y * fy
                + 0.18 * (std::f64::consts::TAU * (0.7 * fx + 0.4 * fy) + phase).cos();
        }
    }

    // Fractal value noise: octaves of smoothly interpolated random grids
    // with amplitude halving as cell size halves.
    let mut cell = (width.min(height) / 4).max(4);
    let mut amplitude = 0.5;
    while cell >= 4 {
        add_value_noise(&mut field, width, height, cell, amplitude, &mut rng);
        cell /= 2;
        amplitude *= 0.45;
    }

    // Objects: soft-edged disks and axis-aligned slabs.
    for _ in 0..5 {
        let cx = rng.gen_range(0.0..width as f64);
        let cy = rng.gen_range(0.0..height as f64);
        let radius = rng.gen_range(0.08..0.22) * width.min(height) as f64;
        let level = rng.gen_range(-0.45..0.45);
        let feather = radius * 0.15 + 1.0;
        for y in 0..height {
            for x in 0..width {
                let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
                let t = ((radius - d) / feather).clamp(-1.0, 1.0);
                field[y * width + x] += level * 0.5 * (1.0 + t);
            }
        }
    }

    // Normalize to something viewable and quantize.
    let lo = field.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let samples = field
        .iter()
        .map(|v| (16.0 + 224.0 * (v - lo) / span).round())
        .collect();
    GrayImage::new(width, height, samples).expect("sizes match")
}

fn add_value_noise(
    field: &mut [f64],
    width: usize,
    height: usize,
    cell: usize,
    amplitude: f64,
    rng: &mut ChaCha8Rng,
) {
    let gw = width / cell + 2;
    let gh = height / cell + 2;
    let grid: Vec<f64> = (0..gw * gh).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
    for y in 0..height {
        let gy = y / cell;
        let ty = smooth((y % cell) as f64 / cell as f64);
        for x in 0..width {
            let gx = x / cell;
            let tx = smooth((x % cell) as f64 / cell as f64);
            let v00 = grid[gy * gw + gx];
            let v10 = grid[gy * gw + gx + 1];
            let v01 = grid[(gy + 1) * gw + gx];
            let v11 = grid[(gy + 1) * gw + gx + 1];
            let top = v00 + (v10 - v00) * tx;
            let bottom = v01 + (v11 - v01) * tx;
            field[y * width + x] += amplitude * (top + (bottom - top) * ty);
        }
    }
}
