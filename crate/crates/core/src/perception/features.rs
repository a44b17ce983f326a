//! Fixed-length descriptors for the desk-scale classifiers.

use std::f64::consts::PI;

use crate::contact::DepthField;
use crate::error::{Error, Result};
use crate::geom::P2;
use crate::render::TactileImage;

use super::matching::Correspondence;

const DIRECTION_BINS: usize = 8;
const RINGS: usize = 4;
const RING_WIDTH_PX: f64 = 25.0;
/// Displacements below this (px) carry no direction.
const MIN_MOTION_PX: f64 = 0.25;

/// Layout of [`extract_features`]:
/// `[0..8)` direction histogram sorted descending, `8` mean magnitude, `9` max magnitude,
/// `[10..14)` ring magnitude means, `[14..18)` ring stretch means (minus 1),
/// `18` mean stretch − 1, `19` contact-area fraction, `20` anisotropy,
/// `21` radius of gyration / 100 px, `22` max stretch − 1, `23` fraction of
/// visibly stretched markers, `24` mean / max magnitude, `[25..29)` ring
/// magnitude means / max magnitude, `29` stretch-weighted radius of
/// gyration / 100 px, `[30..33)` 2nd–4th largest stretch / largest,
/// `[33..36)` 2nd–4th largest magnitude / largest.
pub const FEATURE_LEN: usize = 36;
/// Rank ratios kept per profile.
const RANKS: usize = 3;
/// Stretch above which a marker counts as visibly enlarged.
const STRETCH_VISIBLE: f64 = 0.02;
/// Mean R, G, B, luma std, mean |∂x| and mean |∂y| of luma.
pub const TEXTURE_FEATURE_LEN: usize = 6;

#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureInput<'a> {
    pub correspondences: Option<&'a [Correspondence]>,
    pub depth: Option<&'a DepthField>,
}

/// Contact descriptor from marker motion and/or a depth field.
pub fn extract_features(input: FeatureInput<'_>) -> Result<Vec<f64>> {
    let corr = input.correspondences.unwrap_or(&[]);
    if corr.is_empty() && input.depth.is_none() {
        return Err(Error::EmptyInput("no correspondences and no depth field".into()));
    }
    let mut f = vec![0.0; FEATURE_LEN];
    if let Some(d) = input.depth {
        f[19] = d.contact_fraction();
    }
    if corr.is_empty() {
        return Ok(f);
    }
    let n = corr.len() as f64;
    let mags: Vec<f64> = corr.iter().map(|c| c.displacement().norm()).collect();
    let strain: Vec<f64> = corr.iter().map(|c| c.stretch - 1.0).collect();

    let total: f64 = mags.iter().filter(|&&m| m > MIN_MOTION_PX).sum();
    if total > 0.0 {
        for (c, &m) in corr.iter().zip(&mags) {
            if m > MIN_MOTION_PX {
                let d = c.displacement();
                let a = d.y.atan2(d.x).rem_euclid(2.0 * PI);
                let bin = ((a / (2.0 * PI / DIRECTION_BINS as f64)).round() as usize) % DIRECTION_BINS;
                f[bin] += m / total;
            }
        }
        // Yaw is arbitrary, so only the sorted profile is kept.
        f[..DIRECTION_BINS].sort_unstable_by(|a, b| b.total_cmp(a));
    }
    f[8] = mags.iter().sum::<f64>() / n;
    f[9] = mags.iter().cloned().fold(0.0, f64::max);
    f[18] = strain.iter().sum::<f64>() / n;

    let center = weighted_center(corr, &strain, &mags);
    let mut ring_mag = [0.0; RINGS];
    let mut ring_str = [0.0; RINGS];
    let mut ring_n = [0usize; RINGS];
    for (k, c) in corr.iter().enumerate() {
        let r = (c.reference - center).norm();
        let ring = ((r / RING_WIDTH_PX) as usize).min(RINGS - 1);
        ring_mag[ring] += mags[k];
        ring_str[ring] += strain[k];
        ring_n[ring] += 1;
    }
    for r in 0..RINGS {
        if ring_n[r] > 0 {
            f[10 + r] = ring_mag[r] / ring_n[r] as f64;
            f[14 + r] = ring_str[r] / ring_n[r] as f64;
        }
    }

    f[22] = strain.iter().cloned().fold(0.0, f64::max);
    f[23] = strain.iter().filter(|&&s| s > STRETCH_VISIBLE).count() as f64 / n;
    if f[9] > 0.0 {
        f[24] = f[8] / f[9];
        for r in 0..RINGS {
            f[25 + r] = f[10 + r] / f[9];
        }
    }
    let ssum: f64 = strain.iter().map(|s| s.max(0.0)).sum();
    if ssum > 0.0 {
        let g: f64 = corr
            .iter()
            .zip(&strain)
            .map(|(c, s)| s.max(0.0) * (c.reference - center).norm_squared())
            .sum();
        f[29] = (g / ssum).sqrt() / 100.0;
    }

    rank_ratios(&strain, &mut f[30..30 + RANKS]);
    rank_ratios(&mags, &mut f[33..33 + RANKS]);

    // Second moments of the motion distribution.
    let wsum: f64 = mags.iter().sum();
    if wsum > 0.0 {
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for (c, &m) in corr.iter().zip(&mags) {
            let d = c.reference - center;
            sxx += m * d.x * d.x;
            syy += m * d.y * d.y;
            sxy += m * d.x * d.y;
        }
        let (sxx, syy, sxy) = (sxx / wsum, syy / wsum, sxy / wsum);
        let tr = sxx + syy;
        let disc = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
        if tr > 0.0 {
            f[20] = disc / tr;
        }
        f[21] = tr.sqrt() / 100.0;
    }
    Ok(f)
}

/// `k`-th largest value over the largest, for k = 2, 3, …: a flat punch
/// concentrates stretch on few markers, a curved face grades it.
fn rank_ratios(values: &[f64], out: &mut [f64]) {
    let mut v: Vec<f64> = values.iter().map(|x| x.max(0.0)).collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    if v.first().map_or(true, |&m| m <= 0.0) {
        return;
    }
    for (k, o) in out.iter_mut().enumerate() {
        *o = v.get(k + 1).map_or(0.0, |x| x / v[0]);
    }
}

/// Contact centre: stretch-weighted centroid when markers stretch,
/// otherwise motion-weighted, otherwise the plain mean.
fn weighted_center(corr: &[Correspondence], strain: &[f64], mags: &[f64]) -> P2 {
    let centroid = |w: &dyn Fn(usize) -> f64| {
        let (mut x, mut y, mut s) = (0.0, 0.0, 0.0);
        for (k, c) in corr.iter().enumerate() {
            let wk = w(k);
            x += wk * c.reference.x;
            y += wk * c.reference.y;
            s += wk;
        }
        (s > 1e-9).then(|| P2::new(x / s, y / s))
    };
    centroid(&|k| strain[k].max(0.0))
        .or_else(|| centroid(&|k| mags[k]))
        .or_else(|| centroid(&|_| 1.0))
        .unwrap_or(P2::origin())
}

/// Colour and texture statistics of an image, for texture heads.
pub fn texture_features(img: &TactileImage) -> Result<Vec<f64>> {
    if img.width < 2 || img.height < 2 {
        return Err(Error::EmptyInput("image too small for texture features".into()));
    }
    let n = img.pixels.len() as f64;
    let mut f = vec![0.0; TEXTURE_FEATURE_LEN];
    for p in &img.pixels {
        f[0] += p.r;
        f[1] += p.g;
        f[2] += p.b;
    }
    for v in &mut f[..3] {
        *v /= n;
    }
    let luma = img.luma();
    let mean = luma.iter().sum::<f64>() / n;
    f[3] = (luma.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n).sqrt();
    let (w, h) = (img.width, img.height);
    let (mut gx, mut gy) = (0.0, 0.0);
    for j in 0..h {
        for i in 0..w {
            if i + 1 < w {
                gx += (luma[j * w + i + 1] - luma[j * w + i]).abs();
            }
            if j + 1 < h {
                gy += (luma[(j + 1) * w + i] - luma[j * w + i]).abs();
            }
        }
    }
    f[4] = gx / ((w - 1) * h) as f64;
    f[5] = gy / (w * (h - 1)) as f64;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::V2;

    fn corr(x: f64, y: f64, d: V2) -> Correspondence {
        Correspondence {
            ref_index: 0,
            cur_index: 0,
            reference: P2::new(x, y),
            current: P2::new(x, y) + d,
            stretch: 1.0,
        }
    }

    #[test]
    fn zero_motion_is_zero_vector() {
        let c: Vec<_> = (0..9).map(|k| corr(k as f64 * 10.0, 5.0, V2::zeros())).collect();
        let f = extract_features(FeatureInput {
            correspondences: Some(&c),
            depth: None,
        })
        .unwrap();
        assert_eq!(f.len(), FEATURE_LEN);
        assert!(f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_shift_fills_zero_degree_bin() {
        let c: Vec<_> = (0..9).map(|k| corr(k as f64 * 10.0, 5.0, V2::new(3.0, 0.0))).collect();
        let f = extract_features(FeatureInput {
            correspondences: Some(&c),
            depth: None,
        })
        .unwrap();
        assert!((f[0] - 1.0).abs() < 1e-12);
        assert!(f[1..8].iter().all(|&v| v == 0.0));
        assert_eq!(f[8], 3.0);
    }

    #[test]
    fn empty_input_is_error() {
        assert!(matches!(
            extract_features(FeatureInput::default()),
            Err(Error::EmptyInput(_))
        ));
    }
}
