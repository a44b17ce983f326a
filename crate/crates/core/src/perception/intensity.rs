//! Depth from intensity maps and contact segmentation of TIR frames.

use crate::color::Rgb;
use crate::contact::DepthField;
use crate::error::{Error, Result};
use crate::geom::RasterFrame;
use crate::render::{BackgroundScene, TactileImage};

#[derive(Debug, Clone, PartialEq)]
pub struct DepthEstimate {
    pub depth: DepthField,
    /// Pixels clipped to black: the depth there is only a lower bound.
    pub saturated: Vec<bool>,
}

/// Inverts the linear intensity map, `d̂ = (I_bg − I) / α` clamped at zero.
///
/// Each pixel is read from the channel with the brightest background, the
/// last one to clip. Where that channel is black the estimate is the
/// lower bound `I_bg / α` and the pixel is flagged as saturated.
pub fn estimate_depth_from_intensity(img: &TactileImage, background: Rgb, alpha: f64, frame: RasterFrame) -> Result<DepthEstimate> {
    if !(alpha > 0.0) {
        return Err(Error::Parameter(format!("intensity gain {alpha} must be positive")));
    }
    if frame.width != img.width || frame.height != img.height {
        return Err(Error::DimensionMismatch(img.width, img.height, frame.width, frame.height));
    }
    let bg = background.channels();
    let k = (0..3).max_by(|&a, &b| bg[a].total_cmp(&bg[b])).unwrap_or(0);
    let mut depth = DepthField::zeros(frame);
    let mut saturated = vec![false; img.pixels.len()];
    for (idx, p) in img.pixels.iter().enumerate() {
        let v = p.channels()[k];
        depth.data[idx] = ((bg[k] - v) / alpha).max(0.0);
        saturated[idx] = v <= 0.0 && bg[k] > 0.0;
    }
    Ok(DepthEstimate { depth, saturated })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn fraction(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.data.len() as f64
        }
    }

    pub fn iou(&self, other: &Mask) -> f64 {
        let inter = self.data.iter().zip(&other.data).filter(|(a, b)| **a && **b).count();
        let union = self.data.iter().zip(&other.data).filter(|(a, b)| **a || **b).count();
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    fn morph(&self, dilate: bool) -> Mask {
        let (w, h) = (self.width, self.height);
        let mut out = self.clone();
        for j in 0..h {
            for i in 0..w {
                let mut acc = !dilate;
                for jj in j.saturating_sub(1)..=(j + 1).min(h - 1) {
                    for ii in i.saturating_sub(1)..=(i + 1).min(w - 1) {
                        let v = self.data[jj * w + ii];
                        if dilate {
                            acc |= v;
                        } else {
                            acc &= v;
                        }
                    }
                }
                out.data[j * w + i] = acc;
            }
        }
        out
    }

    /// 3×3 opening followed by 3×3 closing.
    pub fn open_close(&self) -> Mask {
        if self.width == 0 || self.height == 0 {
            return self.clone();
        }
        self.morph(false).morph(true).morph(true).morph(false)
    }
}

/// Contact mask of a TIR frame: luma differs from `background·clarity` by
/// more than `threshold`, cleaned with one 3×3 open/close pass.
pub fn segment_contact_tir(img: &TactileImage, background: &BackgroundScene, clarity: f64, threshold: f64) -> Result<Mask> {
    if background.width != img.width || background.height != img.height {
        return Err(Error::DimensionMismatch(img.width, img.height, background.width, background.height));
    }
    let data = img
        .pixels
        .iter()
        .zip(&background.image)
        .map(|(p, b)| (p.luma() - b.scale(clarity).luma()).abs() > threshold)
        .collect();
    Ok(Mask {
        width: img.width,
        height: img.height,
        data,
    }
    .open_close())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{compute_depth_field, ContactPose, IndenterKind};
    use crate::model::{preset, SensorVariant};
    use crate::render::render_imm;

    #[test]
    fn uniform_background_gives_zero_depth() {
        let cfg = preset(SensorVariant::CSight);
        let img = TactileImage::filled(480, 480, cfg.illumination.base_intensity, cfg.mechanism);
        let e = estimate_depth_from_intensity(&img, cfg.illumination.base_intensity, 0.6, cfg.raster()).unwrap();
        assert!(e.depth.data.iter().all(|&d| d == 0.0));
        assert!(estimate_depth_from_intensity(&img, cfg.illumination.base_intensity, 0.0, cfg.raster()).is_err());
    }

    #[test]
    fn saturated_pixel_reports_lower_bound() {
        let cfg = preset(SensorVariant::CSight);
        let mut img = TactileImage::filled(480, 480, cfg.illumination.base_intensity, cfg.mechanism);
        img.pixels[7] = Rgb::BLACK;
        let alpha = cfg.imm.unwrap().gain;
        let e = estimate_depth_from_intensity(&img, cfg.illumination.base_intensity, alpha, cfg.raster()).unwrap();
        assert!(e.saturated[7] && !e.saturated[8]);
        assert!((e.depth.data[7] - 0.9 / alpha).abs() < 1e-12);
    }

    #[test]
    fn round_trip_sphere() {
        let cfg = preset(SensorVariant::CSight);
        let d = compute_depth_field(
            &IndenterKind::Sphere.default_shape(),
            &ContactPose::new(13.0, 13.0, 0.9, 0.0),
            &cfg,
        )
        .unwrap();
        let alpha = cfg.imm.unwrap().gain;
        let img = render_imm(&d, &cfg).unwrap().quantized();
        let e = estimate_depth_from_intensity(&img, cfg.illumination.base_intensity, alpha, cfg.raster()).unwrap();
        for k in 0..d.data.len() {
            if !e.saturated[k] {
                assert!((e.depth.data[k] - d.data[k]).abs() <= 1.0 / (255.0 * alpha));
            }
        }
    }

    #[test]
    fn open_close_removes_speckle() {
        let mut m = Mask {
            width: 10,
            height: 10,
            data: vec![false; 100],
        };
        m.data[55] = true;
        assert_eq!(m.open_close().count(), 0);
        let mut block = m.clone();
        for j in 2..7 {
            for i in 2..7 {
                block.data[j * 10 + i] = true;
            }
        }
        block.data[55] = false;
        block.data[99] = true;
        // The hole is closed again and the corner speckle is gone.
        let cleaned = block.open_close();
        assert!(!cleaned.data[99]);
        assert!(cleaned.count() > 0 && cleaned.data[3 * 10 + 3]);
    }
}
