//! Image quality measures: PSNR and mean SSIM.
//!
//! SSIM follows the original reference implementation: 11x11 Gaussian window
//! with sigma 1.5, `C1 = (0.01 * 255)^2`, `C2 = (0.03 * 255)^2`, and the mean
//! taken over all fully contained windows (valid-mode filtering, no border
//! crop beyond that).

use crate::error::{Error, Result};
use crate::imageio::GrayImage;

const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// Image-level quality summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    /// Peak signal-to-noise ratio in dB; `+inf` for identical images.
    pub psnr_db: f64,
    /// Mean structural similarity in `[-1, 1]`.
    pub ssim: f64,
    /// Mean squared error in intensity^2 units.
    pub mse: f64,
}

/// Mean squared error over all pixels.
pub fn mse(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    check_dims(reference, test)?;
    let sum: f64 = reference
        .samples
        .iter()
        .zip(&test.samples)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / reference.samples.len() as f64)
}

/// `10 * log10(255^2 / MSE)`; `+inf` when the images are identical.
pub fn psnr(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    let mse = mse(reference, test)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// Mean SSIM with the reference 11x11 Gaussian window.
pub fn ssim(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    check_dims(reference, test)?;
    if reference.width < WINDOW || reference.height < WINDOW {
        return Err(Error::DimensionMismatch(format!(
            "ssim needs at least {WINDOW}x{WINDOW} pixels, got {}x{}",
            reference.width, reference.height
        )));
    }

    let (w, h) = (reference.width, reference.height);
    let x = &reference.samples;
    let y = &test.samples;
    let xx: Vec<f64> = x.iter().map(|a| a * a).collect();
    let yy: Vec<f64> = y.iter().map(|a| a * a).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let kernel = gaussian_kernel();
    let mu_x = filter_valid(x, w, h, &kernel);
    let mu_y = filter_valid(y, w, h, &kernel);
    let m_xx = filter_valid(&xx, w, h, &kernel);
    let m_yy = filter_valid(&yy, w, h, &kernel);
    let m_xy = filter_valid(&xy, w, h, &kernel);

    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (ux, uy) = (mu_x[i], mu_y[i]);
        let var_x = m_xx[i] - ux * ux;
        let var_y = m_yy[i] - uy * uy;
        let cov = m_xy[i] - ux * uy;
        let value = ((2.0 * ux * uy + C1) * (2.0 * cov + C2))
            / ((ux * ux + uy * uy + C1) * (var_x + var_y + C2));
        total += value;
    }
    Ok((total / mu_x.len() as f64).clamp(-1.0, 1.0))
}

/// PSNR, SSIM and MSE in one report.
pub fn evaluate(reference: &GrayImage, test: &GrayImage) -> Result<QualityReport> {
    let mse = mse(reference, test)?;
    let psnr_db = if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    };
    let ssim = ssim(reference, test)?;
    Ok(QualityReport { psnr_db, ssim, mse })
}

fn check_dims(reference: &GrayImage, test: &GrayImage) -> Result<()> {
    if reference.width != test.width || reference.height != test.height {
        return Err(Error::DimensionMismatch(format!(
            "reference is {}x{}, test is {}x{}",
            reference.width, reference.height, test.width, test.height
        )));
    }
    Ok(())
}

/// Normalized 1-D Gaussian taps; the separable product reproduces the
/// reference's normalized 2-D window.
fn gaussian_kernel() -> [f64; WINDOW] {
    let mut kernel = [0.0; WINDOW];
    let center = (WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, tap) in kernel.iter_mut().enumerate() {
        let d = i as f64 - center;
        *tap = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
        sum += *tap;
    }
    for tap in &mut kernel {
        *tap /= sum;
    }
    kernel
}

/// Separable valid-mode filtering: output is `(w - 10) x (h - 10)`.
fn filter_valid(data: &[f64], w: usize, h: usize, kernel: &[f64; WINDOW]) -> Vec<f64> {
    let out_w = w - WINDOW + 1;
    let out_h = h - WINDOW + 1;
    let mut rows = vec![0.0; out_w * h];
    for y in 0..h {
        for x in 0..out_w {
            let mut acc = 0.0;
            for (k, tap) in kernel.iter().enumerate() {
                acc += tap * data[y * w + x + k];
            }
            rows[y * out_w + x] = acc;
        }
    }
    let mut out = vec![0.0; out_w * out_h];
    for y in 0..out_h {
        for x in 0..out_w {
            let mut acc = 0.0;
            for (k, tap) in kernel.iter().enumerate() {
                acc += tap * rows[(y + k) * out_w + x];
            }
            out[y * out_w + x] = acc;
        }
    }
    out
}
