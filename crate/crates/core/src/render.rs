//! Tactile image formation for each sensing mechanism.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::color::Rgb;
use crate::contact::DepthField;
use crate::error::{Error, Result};
use crate::geom::{self, RasterFrame, P2};
use crate::markers::{Geometry, MarkerLayout, P3};
use crate::model::{Mechanism, SensorConfig};

/// Supersampling grid per axis used for marker coverage.
pub const SUPERSAMPLE: usize = 4;
/// Stroke width of tessellation cell edges, mm.
pub const CELL_EDGE_WIDTH_MM: f64 = 0.15;
/// Radius of the dots drawn at coordinate-marker origins and pointer tips, mm.
pub const FRAME_DOT_RADIUS_MM: f64 = 0.2;
/// Camera-to-surface distance of the weak-perspective marker projection, mm.
pub const CAMERA_DISTANCE_MM: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TactileImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
    pub mechanism: Mechanism,
    pub frame_id: u64,
}

impl TactileImage {
    pub fn filled(width: usize, height: usize, color: Rgb, mechanism: Mechanism) -> Self {
        TactileImage {
            width,
            height,
            pixels: vec![color; width * height],
            mechanism,
            frame_id: 0,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> Rgb {
        self.pixels[j * self.width + i]
    }

    pub fn set(&mut self, i: usize, j: usize, c: Rgb) {
        self.pixels[j * self.width + i] = c;
    }

    pub fn luma(&self) -> Vec<f64> {
        self.pixels.iter().map(|p| p.luma()).collect()
    }

    pub fn in_unit_range(&self) -> bool {
        self.pixels.iter().all(|p| p.in_unit_range())
    }

    /// Rounds every channel to 8 bits, as a PNG round trip would.
    pub fn quantized(&self) -> Self {
        let q = |v: f64| (v * 255.0).round() / 255.0;
        let mut out = self.clone();
        for p in &mut out.pixels {
            *p = Rgb::new(q(p.r), q(p.g), q(p.b));
        }
        out
    }

    pub fn same_size(&self, o: &TactileImage) -> Result<()> {
        if self.width != o.width || self.height != o.height {
            return Err(Error::DimensionMismatch(self.width, self.height, o.width, o.height));
        }
        Ok(())
    }
}

/// External scene seen through a clear skin.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundScene {
    pub width: usize,
    pub height: usize,
    pub image: Vec<Rgb>,
    /// Attenuation with distance from the skin, in [0, 1].
    pub distance_factor: f64,
}

impl BackgroundScene {
    pub fn uniform(width: usize, height: usize, color: Rgb, distance_factor: f64) -> Self {
        BackgroundScene {
            width,
            height,
            image: vec![color; width * height],
            distance_factor,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> Rgb {
        self.image[j * self.width + i]
    }

    fn check(&self, w: usize, h: usize) -> Result<()> {
        if self.width != w || self.height != h {
            return Err(Error::DimensionMismatch(self.width, self.height, w, h));
        }
        if !(0.0..=1.0).contains(&self.distance_factor) || !self.image.iter().all(|c| c.in_unit_range()) {
            return Err(Error::Parameter("background channels and distance factor must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Procedural fabric textures standing in for the cloth wrapped over parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fabric {
    /// Blue cotton with horizontal grain.
    Cotton,
    /// Pale synthetic fibre with sparse glossy points.
    ChemicalFibre,
    /// Beige hemp with coarse irregular weave.
    Hemp,
}

impl Fabric {
    pub const ALL: [Fabric; 3] = [Fabric::Cotton, Fabric::ChemicalFibre, Fabric::Hemp];

    /// Renders the fabric at `mm_per_px`, shifted by `offset_mm` so every
    /// sample sees a different patch.
    pub fn scene(self, frame: &RasterFrame, offset_mm: (f64, f64), seed: u64, distance_factor: f64) -> BackgroundScene {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase: f64 = rng.gen_range(0.0..2.0 * PI);
        let (w, h) = (frame.width, frame.height);
        let mut image = Vec::with_capacity(w * h);
        for j in 0..h {
            for i in 0..w {
                let p = frame.pixel_center_mm(i, j);
                let (x, y) = (p.x + offset_mm.0, p.y + offset_mm.1);
                let c = match self {
                    Fabric::Cotton => {
                        let grain = 0.5 + 0.5 * (2.0 * PI * y / 0.6 + phase).sin();
                        let weft = 0.5 + 0.5 * (2.0 * PI * x / 2.3).sin();
                        let v = 0.75 + 0.2 * grain + 0.05 * weft;
                        Rgb::new(0.15 * v, 0.3 * v, 0.8 * v)
                    }
                    Fabric::ChemicalFibre => {
                        let gx = (x / 0.8).rem_euclid(1.0) - 0.5;
                        let gy = (y / 0.8).rem_euclid(1.0) - 0.5;
                        let spot = (-(gx * gx + gy * gy) / 0.02).exp();
                        let base = 0.62 + 0.03 * (2.0 * PI * (x + y) / 5.0 + phase).sin();
                        Rgb::gray(base + 0.33 * spot)
                    }
                    Fabric::Hemp => {
                        let n = hash_noise((x / 0.5).floor() as i64, (y / 0.5).floor() as i64, seed);
                        let cross = 0.5 + 0.5 * ((2.0 * PI * x / 1.1).sin() * (2.0 * PI * y / 1.1 + phase).sin());
                        let v = 0.55 + 0.25 * n + 0.1 * cross;
                        Rgb::new(0.78 * v, 0.66 * v, 0.45 * v)
                    }
                };
                image.push(c.clamp01());
            }
        }
        BackgroundScene {
            width: w,
            height: h,
            image,
            distance_factor,
        }
    }
}

fn hash_noise(a: i64, b: i64, seed: u64) -> f64 {
    let mut z = (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ seed.wrapping_mul(0x1656_67B1_9E37_79F9);
    z ^= z >> 33;
    z = z.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z ^= z >> 33;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

impl fmt::Display for Fabric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fabric::Cotton => "cotton",
            Fabric::ChemicalFibre => "chemical_fibre",
            Fabric::Hemp => "hemp",
        })
    }
}

impl FromStr for Fabric {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cotton" => Ok(Fabric::Cotton),
            "chemical_fibre" | "fibre" => Ok(Fabric::ChemicalFibre),
            "hemp" => Ok(Fabric::Hemp),
            _ => Err(format!("unknown fabric {s:?}")),
        }
    }
}

/// Refraction angle from `sin θ / sin θ_l = n_ratio`.
///
/// Returns [`Error::TotalInternalReflection`] when `sin θ / n_ratio > 1`,
/// which can only happen for `n_ratio < 1`.
pub fn refract_angle(theta_incident: f64, n_ratio: f64) -> Result<f64> {
    if !(n_ratio > 0.0) {
        return Err(Error::Parameter(format!("refractive ratio {n_ratio} must be positive")));
    }
    if !(0.0..PI / 2.0).contains(&theta_incident) {
        return Err(Error::Parameter(format!(
            "incidence angle {theta_incident} outside [0, pi/2)"
        )));
    }
    let s = theta_incident.sin() / n_ratio;
    if s > 1.0 {
        return Err(Error::TotalInternalReflection(s));
    }
    Ok(s.asin())
}

fn mismatch(renderer: &'static str, m: Mechanism) -> Error {
    Error::MechanismMismatch {
        renderer,
        mechanism: m.to_string(),
    }
}

/// Intensity mapping: `I = clamp(I_bg − α·d, 0, 1)` per channel.
pub fn render_imm(depth: &DepthField, cfg: &SensorConfig) -> Result<TactileImage> {
    if !matches!(cfg.mechanism, Mechanism::Imm | Mechanism::ImmMdm) {
        return Err(mismatch("render_imm", cfg.mechanism));
    }
    let imm = cfg
        .imm
        .ok_or_else(|| Error::Parameter("intensity-mapping parameters missing".into()))?;
    let bg = cfg.illumination.base_intensity;
    let f = &depth.frame;
    let mut img = TactileImage::filled(f.width, f.height, bg, cfg.mechanism);
    let a = imm.gain;
    if !(a > 0.0) {
        return Err(Error::Parameter(format!("intensity gain {a} must be positive")));
    }
    // Written as α·(I_bg/α − d) so that d = I_bg/α lands exactly on 0, and
    // capped at I_bg so that d = 0 reproduces the background exactly.
    let bgc = bg.channels();
    let knee = bgc.map(|c| c / a);
    for (px, &d) in img.pixels.iter_mut().zip(&depth.data) {
        if d > 0.0 {
            let ch = |k: usize| (a * (knee[k] - d)).min(bgc[k]);
            *px = Rgb::new(ch(0), ch(1), ch(2)).clamp01();
        }
    }
    Ok(img)
}

/// Marker rendering over either the opaque skin or, through a clear skin,
/// the background attenuated by clarity and distance.
pub fn render_mdm(layout: &MarkerLayout, cfg: &SensorConfig, background: Option<&BackgroundScene>) -> Result<TactileImage> {
    if !cfg.mechanism.uses_markers() {
        return Err(mismatch("render_mdm", cfg.mechanism));
    }
    let frame = cfg.raster();
    let t = cfg.skin.transparency;
    let mut img = TactileImage::filled(frame.width, frame.height, cfg.skin.color, cfg.mechanism);
    if let Some(bg) = background {
        if t <= 0.0 {
            return Err(Error::Parameter("a background needs a transparent skin".into()));
        }
        bg.check(frame.width, frame.height)?;
        let k = cfg.elastomer.clarity * bg.distance_factor;
        for (px, b) in img.pixels.iter_mut().zip(&bg.image) {
            *px = if t >= 1.0 {
                b.scale(k)
            } else {
                cfg.skin.color.scale(1.0 - t).add(b.scale(k * t))
            };
        }
    } else if t > 0.0 {
        let c = cfg.skin.color.scale(1.0 - t);
        img.pixels.iter_mut().for_each(|p| *p = c);
    }
    draw_markers(&mut img, &frame, layout);
    Ok(img)
}

/// Intensity map with markers drawn on top (IMM + MDM).
pub fn render_imm_mdm(depth: &DepthField, layout: &MarkerLayout, cfg: &SensorConfig) -> Result<TactileImage> {
    if cfg.mechanism != Mechanism::ImmMdm {
        return Err(mismatch("render_imm_mdm", cfg.mechanism));
    }
    let mut img = render_imm(depth, cfg)?;
    draw_markers(&mut img, &cfg.raster(), layout);
    Ok(img)
}

/// Total internal reflection through a clear elastomer: the background
/// times clarity everywhere, lifted by `contact_gain + β·|∇d|` inside the
/// contact patch.
pub fn render_tir(depth: &DepthField, cfg: &SensorConfig, background: &BackgroundScene) -> Result<TactileImage> {
    if cfg.mechanism != Mechanism::ImmMfm {
        return Err(mismatch("render_tir", cfg.mechanism));
    }
    let f = depth.frame;
    background.check(f.width, f.height)?;
    let clarity = cfg.elastomer.clarity;
    let tir = cfg.tir;
    let mut img = TactileImage::filled(f.width, f.height, Rgb::BLACK, cfg.mechanism);
    for j in 0..f.height {
        for i in 0..f.width {
            let base = background.at(i, j).scale(clarity);
            let d = depth.at(i, j);
            let px = if d > tir.depth_threshold {
                let (gx, gy) = depth.gradient(i, j);
                let boost = tir.contact_gain + tir.gradient_gain * gx.hypot(gy);
                base.add(Rgb::gray(boost)).clamp01()
            } else {
                base
            };
            img.set(i, j, px);
        }
    }
    Ok(img)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StripeOrientation {
    /// Rows shift sideways.
    X,
    /// Columns shift up and down.
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensTextureParams {
    pub stripe_pitch_px: f64,
    pub amplitude_px: f64,
    pub orientation: StripeOrientation,
    pub seed: u64,
}

/// Printed-lens stripe texture: each scanline is displaced by
/// `amplitude·sin(2π·line/pitch + φ)` and linearly resampled.
pub fn apply_lens_distortion(img: &TactileImage, params: &LensTextureParams) -> Result<TactileImage> {
    if !(params.stripe_pitch_px > 0.0 && params.amplitude_px >= 0.0 && params.amplitude_px < params.stripe_pitch_px) {
        return Err(Error::Parameter(format!(
            "need pitch > 0 and 0 <= amplitude < pitch, got pitch {} amplitude {}",
            params.stripe_pitch_px, params.amplitude_px
        )));
    }
    if params.amplitude_px == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let phase: f64 = rng.gen_range(0.0..2.0 * PI);
    let shift = |line: usize| params.amplitude_px * (2.0 * PI * line as f64 / params.stripe_pitch_px + phase).sin();
    let mut out = img.clone();
    let (w, h) = (img.width, img.height);
    let sample_line = |get: &dyn Fn(usize) -> Rgb, n: usize, pos: f64| -> Rgb {
        let x = pos.clamp(0.0, (n - 1) as f64);
        let x0 = x.floor() as usize;
        let x1 = (x0 + 1).min(n - 1);
        get(x0).lerp(get(x1), x - x0 as f64)
    };
    match params.orientation {
        StripeOrientation::X => {
            for j in 0..h {
                let s = shift(j);
                for i in 0..w {
                    let c = sample_line(&|k| img.at(k, j), w, i as f64 + s);
                    out.set(i, j, c);
                }
            }
        }
        StripeOrientation::Y => {
            for i in 0..w {
                let s = shift(i);
                for j in 0..h {
                    let c = sample_line(&|k| img.at(i, k), h, j as f64 + s);
                    out.set(i, j, c);
                }
            }
        }
    }
    Ok(out)
}

/// Weak-perspective magnification of a marker at height `z` (mm, positive
/// away from the camera).
pub fn magnification(z: f64) -> f64 {
    CAMERA_DISTANCE_MM / (CAMERA_DISTANCE_MM + z)
}

/// Projected pixel positions of a coordinate marker's origin and its three
/// tips, `[origin, x_tip, y_tip, z_tip]`.
pub fn project_frame(frame: &RasterFrame, origin: &P3, tips: &[P3; 3]) -> [P2; 4] {
    project_frame_with(frame, origin, tips, CAMERA_DISTANCE_MM)
}

/// [`project_frame`] with an explicit camera distance. The origin maps
/// orthographically; pointer offsets shrink by `D / (D + z_origin)`.
pub fn project_frame_with(frame: &RasterFrame, origin: &P3, tips: &[P3; 3], camera_distance: f64) -> [P2; 4] {
    let o = frame.to_px(P2::new(origin.x, origin.y));
    let m = camera_distance / (camera_distance + origin.z) / frame.mm_per_px;
    let tip = |t: &P3| P2::new(o.x + m * (t.x - origin.x), o.y + m * (t.y - origin.y));
    [o, tip(&tips[0]), tip(&tips[1]), tip(&tips[2])]
}

enum Shape {
    Disk { c: P2, r: f64 },
    Strokes { segs: Vec<(P2, P2)>, half: f64 },
}

impl Shape {
    fn contains(&self, p: P2) -> bool {
        match self {
            Shape::Disk { c, r } => (p - c).norm_squared() <= r * r,
            Shape::Strokes { segs, half } => segs.iter().any(|(a, b)| geom::segment_distance(p, *a, *b) <= *half),
        }
    }

    fn bbox(&self) -> (P2, P2) {
        match self {
            Shape::Disk { c, r } => (P2::new(c.x - r, c.y - r), P2::new(c.x + r, c.y + r)),
            Shape::Strokes { segs, half } => {
                let mut lo = P2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = P2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for (a, b) in segs {
                    for p in [a, b] {
                        lo = P2::new(lo.x.min(p.x), lo.y.min(p.y));
                        hi = P2::new(hi.x.max(p.x), hi.y.max(p.y));
                    }
                }
                (P2::new(lo.x - half, lo.y - half), P2::new(hi.x + half, hi.y + half))
            }
        }
    }
}

/// Composites a shape given in pixel coordinates with 4×4 supersampled coverage.
fn fill(img: &mut TactileImage, shape: &Shape, color: Rgb) {
    let (lo, hi) = shape.bbox();
    let i0 = lo.x.floor().max(0.0) as usize;
    let j0 = lo.y.floor().max(0.0) as usize;
    let i1 = (hi.x.ceil().max(0.0) as usize).min(img.width);
    let j1 = (hi.y.ceil().max(0.0) as usize).min(img.height);
    let n = SUPERSAMPLE;
    let total = (n * n) as f64;
    for j in j0..j1 {
        for i in i0..i1 {
            let mut hits = 0usize;
            for sy in 0..n {
                for sx in 0..n {
                    let p = P2::new(
                        i as f64 + (sx as f64 + 0.5) / n as f64,
                        j as f64 + (sy as f64 + 0.5) / n as f64,
                    );
                    if shape.contains(p) {
                        hits += 1;
                    }
                }
            }
            if hits > 0 {
                let k = hits as f64 / total;
                let c = img.at(i, j).lerp(color, k);
                img.set(i, j, c);
            }
        }
    }
}

/// Draws markers deepest layer first so shallower layers occlude them.
pub fn draw_markers(img: &mut TactileImage, frame: &RasterFrame, layout: &MarkerLayout) {
    let mut order: Vec<&crate::markers::Marker> = layout.markers.iter().collect();
    order.sort_by_key(|m| (m.layer, m.id));
    let s = frame.mm_per_px;
    for m in order {
        match &m.geometry {
            Geometry::Disk { center, radius } => {
                let shape = Shape::Disk {
                    c: frame.to_px(*center),
                    r: radius / s,
                };
                fill(img, &shape, m.color);
            }
            Geometry::Polygon { vertices } => {
                let pts: Vec<P2> = vertices.iter().map(|v| frame.to_px(*v)).collect();
                let segs = (0..pts.len()).map(|k| (pts[k], pts[(k + 1) % pts.len()])).collect();
                fill(
                    img,
                    &Shape::Strokes {
                        segs,
                        half: 0.5 * CELL_EDGE_WIDTH_MM / s,
                    },
                    m.color,
                );
            }
            Geometry::Frame {
                origin,
                tips,
                axis_colors,
            } => {
                let proj = project_frame(frame, origin, tips);
                let r = FRAME_DOT_RADIUS_MM / s;
                for k in 0..3 {
                    fill(img, &Shape::Disk { c: proj[k + 1], r }, axis_colors[k]);
                }
                fill(img, &Shape::Disk { c: proj[0], r }, m.color);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{compute_depth_field, ContactPose, IndenterKind, IndenterShape};
    use crate::markers::{gen_dot_layout, Arrangement, Stiffness};
    use crate::model::{preset, SensorVariant};
    use crate::ssim::ssim;

    #[test]
    fn refraction_examples() {
        assert_eq!(refract_angle(0.0, 1.3).unwrap(), 0.0);
        let t = refract_angle(30f64.to_radians(), 1.5).unwrap().to_degrees();
        assert!((t - 19.4712).abs() < 1e-4, "{t}");
        assert!(matches!(
            refract_angle(60f64.to_radians(), 0.8),
            Err(Error::TotalInternalReflection(_))
        ));
        assert!(refract_angle(0.1, 0.0).is_err());
    }

    fn ctac_center() -> P2 {
        P2::new(17.0, 13.5)
    }

    #[test]
    fn imm_zero_depth_is_uniform_background() {
        let cfg = preset(SensorVariant::CSight);
        let img = render_imm(&DepthField::zeros(cfg.raster()), &cfg).unwrap();
        assert!(img.pixels.iter().all(|&p| p == cfg.illumination.base_intensity));
    }

    #[test]
    fn imm_clamp_boundary_and_monotonicity() {
        let cfg = preset(SensorVariant::CSight);
        let imm = cfg.imm.unwrap();
        let bg = cfg.background_level();
        let mut d = DepthField::zeros(cfg.raster());
        d.data[0] = bg / imm.gain;
        d.data[1] = 0.2;
        d.data[2] = 0.4;
        let img = render_imm(&d, &cfg).unwrap();
        assert_eq!(img.pixels[0], Rgb::BLACK);
        assert!(img.pixels[1].luma() > img.pixels[2].luma());
    }

    #[test]
    fn imm_rejects_marker_sensor() {
        let cfg = preset(SensorVariant::CTac);
        let r = render_imm(&DepthField::zeros(cfg.raster()), &cfg);
        assert!(matches!(r, Err(Error::MechanismMismatch { .. })));
    }

    #[test]
    fn opaque_skin_without_markers_is_uniform() {
        let cfg = preset(SensorVariant::CTac);
        let mut layout = cfg.marker_layout().unwrap().unwrap();
        layout.markers.clear();
        let img = render_mdm(&layout, &cfg, None).unwrap();
        assert!(img.pixels.iter().all(|&p| p == cfg.skin.color));
    }

    #[test]
    fn single_disk_centroid_matches_projection() {
        let cfg = preset(SensorVariant::CTac);
        let frame = cfg.raster();
        for (dx, dy) in [(0.0, 0.0), (0.033, -0.071), (0.25, 0.125)] {
            let c = ctac_center() + crate::geom::V2::new(dx, dy);
            let bounds = crate::geom::Rect::new(c.x - 1.0, c.y - 1.0, c.x + 1.0, c.y + 1.0);
            let layout = gen_dot_layout(bounds, Arrangement::Uniform { rows: 1, cols: 1 }, 0.5, Stiffness::Rigid, 0, Rgb::WHITE)
                .unwrap();
            let img = render_mdm(&layout, &cfg, None).unwrap();
            let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
            for j in 0..img.height {
                for i in 0..img.width {
                    let w = img.at(i, j).luma();
                    sx += w * (i as f64 + 0.5);
                    sy += w * (j as f64 + 0.5);
                    sw += w;
                }
            }
            let expect = frame.to_px(c);
            let got = P2::new(sx / sw, sy / sw);
            assert!((got - expect).norm() < 0.5, "{got} vs {expect}");
        }
    }

    #[test]
    fn transparent_skin_shows_attenuated_background() {
        let cfg = preset(SensorVariant::ViCTac);
        let layout = cfg.marker_layout().unwrap().unwrap();
        let frame = cfg.raster();
        let bg = Fabric::Cotton.scene(&frame, (0.0, 0.0), 3, 0.8);
        let img = render_mdm(&layout, &cfg, Some(&bg)).unwrap();
        // Far corner is outside every marker.
        for (i, j) in [(0, 0), (5, 470), (470, 3)] {
            let expect = bg.at(i, j).scale(cfg.elastomer.clarity * 0.8);
            assert!(img.at(i, j).dist(expect) <= 1.0 / 255.0);
        }
        assert!(img.in_unit_range());
    }

    #[test]
    fn background_with_opaque_skin_is_rejected() {
        let cfg = preset(SensorVariant::CTac);
        let layout = cfg.marker_layout().unwrap().unwrap();
        let bg = BackgroundScene::uniform(480, 480, Rgb::gray(0.5), 1.0);
        assert!(render_mdm(&layout, &cfg, Some(&bg)).is_err());
    }

    fn tir_setup(kind: IndenterKind, press: f64) -> (SensorConfig, DepthField, BackgroundScene, TactileImage) {
        let cfg = preset(SensorVariant::ViCSight);
        let depth = compute_depth_field(&kind.default_shape(), &ContactPose::new(17.0, 13.5, press, 0.0), &cfg).unwrap();
        let bg = Fabric::Hemp.scene(&cfg.raster(), (0.0, 0.0), 5, 1.0);
        let img = render_tir(&depth, &cfg, &bg).unwrap();
        (cfg, depth, bg, img)
    }

    #[test]
    fn tir_zero_depth_is_background_times_clarity() {
        let (cfg, _, bg, img) = tir_setup(IndenterKind::Dot, 0.0);
        for (p, b) in img.pixels.iter().zip(&bg.image) {
            assert_eq!(*p, b.scale(cfg.elastomer.clarity));
        }
    }

    #[test]
    fn tir_flat_dot_lights_rim_more_than_interior() {
        let cfg = preset(SensorVariant::ViCSight);
        let depth = compute_depth_field(
            &IndenterShape::Dot { radius: 2.0 },
            &ContactPose::new(17.0, 13.5, 0.8, 0.0),
            &cfg,
        )
        .unwrap();
        let bg = BackgroundScene::uniform(480, 480, Rgb::gray(0.2), 1.0);
        let img = render_tir(&depth, &cfg, &bg).unwrap();
        let base = 0.2 * cfg.elastomer.clarity;
        let c = cfg.raster().to_px(ctac_center());
        let interior = img.at(c.x as usize, c.y as usize).luma() - base;
        let mut rim: f64 = 0.0;
        for i in 0..480 {
            rim = rim.max(img.at(i, c.y as usize).luma() - base);
        }
        assert!((interior - cfg.tir.contact_gain).abs() < 1e-9);
        assert!(rim > interior + 0.5, "rim {rim} interior {interior}");
    }

    #[test]
    fn tir_wave_stripes_follow_crests() {
        let (cfg, depth, bg, img) = tir_setup(IndenterKind::Waves, 0.8);
        let frame = cfg.raster();
        let IndenterShape::Waves { wavelength, .. } = IndenterKind::Waves.default_shape() else {
            unreachable!()
        };
        let row = frame.to_px(ctac_center()).y as usize;
        // Brightened runs along the centre row.
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut start = None;
        for i in 0..frame.width {
            let lit = img.at(i, row).luma() - bg.at(i, row).luma() * cfg.elastomer.clarity > 0.05;
            match (lit, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push((s, i - 1));
                    start = None;
                }
                _ => {}
            }
        }
        assert_eq!(runs.len(), 3, "{runs:?}");
        for (k, (a, b)) in runs.iter().enumerate() {
            let mid_px = 0.5 * (*a as f64 + *b as f64) + 0.5;
            let mid_mm = frame.to_mm(P2::new(mid_px, 0.0)).x;
            let crest = 17.0 + (k as f64 - 1.0) * wavelength;
            assert!((mid_mm - crest).abs() <= frame.mm_per_px, "{mid_mm} vs {crest}");
        }
        let _ = depth;
    }

    fn checkerboard(n: usize, cell: usize) -> TactileImage {
        let mut img = TactileImage::filled(n, n, Rgb::BLACK, Mechanism::Imm);
        for j in 0..n {
            for i in 0..n {
                if (i / cell + j / cell) % 2 == 0 {
                    img.set(i, j, Rgb::WHITE);
                }
            }
        }
        img
    }

    #[test]
    fn lens_distortion_identity_determinism_and_damage() {
        let img = checkerboard(96, 12);
        let zero = LensTextureParams {
            stripe_pitch_px: 9.0,
            amplitude_px: 0.0,
            orientation: StripeOrientation::X,
            seed: 1,
        };
        assert_eq!(apply_lens_distortion(&img, &zero).unwrap(), img);
        let two = LensTextureParams { amplitude_px: 2.0, ..zero };
        let a = apply_lens_distortion(&img, &two).unwrap();
        assert_eq!(a, apply_lens_distortion(&img, &two).unwrap());
        assert!(ssim(&a, &img, 7).unwrap() < 1.0);
        let bad = LensTextureParams { amplitude_px: 9.0, ..zero };
        assert!(apply_lens_distortion(&img, &bad).is_err());
    }
}
