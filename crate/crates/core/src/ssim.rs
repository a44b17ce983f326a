//! Windowed structural similarity on luma.

use crate::error::{Error, Result};
use crate::render::TactileImage;

pub const C1: f64 = 0.01 * 0.01;
pub const C2: f64 = 0.03 * 0.03;

/// Mean SSIM over every fully contained `window_px × window_px` box window.
///
/// Both images are reduced to Rec.601 luma with dynamic range 1. The
/// per-window statistics are computed with the arguments in a symmetric
/// order, so `ssim(a, b) == ssim(b, a)` bit for bit and `ssim(a, a) == 1`.
pub fn ssim(a: &TactileImage, b: &TactileImage, window_px: usize) -> Result<f64> {
    a.same_size(b)?;
    if window_px < 3 || window_px % 2 == 0 {
        return Err(Error::Parameter(format!("window {window_px} must be odd and >= 3")));
    }
    if a.width < window_px || a.height < window_px {
        return Err(Error::Parameter(format!(
            "window {window_px} larger than {}x{} image",
            a.width, a.height
        )));
    }
    ssim_luma(&a.luma(), &b.luma(), a.width, a.height, window_px)
}

/// SSIM on raw luma planes.
pub fn ssim_luma(x: &[f64], y: &[f64], w: usize, h: usize, win: usize) -> Result<f64> {
    if x.len() != w * h || y.len() != w * h {
        return Err(Error::DimensionMismatch(x.len(), 1, y.len(), 1));
    }
    let sx = integral(w, h, |i| x[i]);
    let sy = integral(w, h, |i| y[i]);
    let sxx = integral(w, h, |i| x[i] * x[i]);
    let syy = integral(w, h, |i| y[i] * y[i]);
    let sxy = integral(w, h, |i| x[i] * y[i]);
    let n = (win * win) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for j in 0..=h - win {
        for i in 0..=w - win {
            let bx = |t: &[f64]| box_sum(t, w, i, j, win) / n;
            let (mx, my) = (bx(&sx), bx(&sy));
            // No clamping: for x == y the three moments must stay equal.
            let vx = bx(&sxx) - mx * mx;
            let vy = bx(&syy) - my * my;
            let cxy = bx(&sxy) - mx * my;
            let num = (2.0 * mx * my + C1) * (2.0 * cxy + C2);
            let den = (mx * mx + my * my + C1) * (vx + vy + C2);
            total += num / den;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

fn integral(w: usize, h: usize, f: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut t = vec![0.0; (w + 1) * (h + 1)];
    for j in 0..h {
        let mut row = 0.0;
        for i in 0..w {
            row += f(j * w + i);
            t[(j + 1) * (w + 1) + i + 1] = t[j * (w + 1) + i + 1] + row;
        }
    }
    t
}

fn box_sum(t: &[f64], w: usize, i: usize, j: usize, win: usize) -> f64 {
    let s = w + 1;
    t[(j + win) * s + i + win] - t[j * s + i + win] - t[(j + win) * s + i] + t[j * s + i]
}
