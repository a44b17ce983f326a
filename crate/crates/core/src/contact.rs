//! Rigid indenters pressed into the elastomer: penetration depth, a smoothed
//! gradient displacement model, and marker advection.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Rotation3, Vector3};

use crate::error::{Error, Result};
use crate::geom::{RasterFrame, V2, P2};
use crate::markers::{Geometry, Marker, MarkerLayout, Stiffness};
use crate::model::{ElastomerSpec, MechanicsParams, SensorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndenterKind {
    Dot,
    Ring,
    Sphere,
    Curve,
    Waves,
    MultiDot,
}

impl IndenterKind {
    pub const ALL: [IndenterKind; 6] = [
        IndenterKind::Dot,
        IndenterKind::Ring,
        IndenterKind::Sphere,
        IndenterKind::Curve,
        IndenterKind::Waves,
        IndenterKind::MultiDot,
    ];

    /// Default dimensions used by the dataset recipes and demos.
    pub fn default_shape(self) -> IndenterShape {
        match self {
            IndenterKind::Dot => IndenterShape::Dot { radius: 1.5 },
            IndenterKind::Ring => IndenterShape::Ring { inner: 3.0, outer: 5.0 },
            IndenterKind::Sphere => IndenterShape::Sphere { radius: 6.0 },
            IndenterKind::Curve => IndenterShape::Curve {
                arc_radius: 5.0,
                stroke_width: 1.2,
                sweep: PI,
            },
            IndenterKind::Waves => IndenterShape::Waves {
                wavelength: 3.0,
                amplitude: 1.0,
                ridge_length: 9.0,
            },
            IndenterKind::MultiDot => IndenterShape::MultiDot {
                dot_radius: 1.0,
                count: 4,
                spread: 3.5,
            },
        }
    }
}

impl fmt::Display for IndenterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndenterKind::Dot => "dot",
            IndenterKind::Ring => "ring",
            IndenterKind::Sphere => "sphere",
            IndenterKind::Curve => "curve",
            IndenterKind::Waves => "waves",
            IndenterKind::MultiDot => "multi_dot",
        })
    }
}

impl FromStr for IndenterKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "dot" => Ok(IndenterKind::Dot),
            "ring" => Ok(IndenterKind::Ring),
            "sphere" => Ok(IndenterKind::Sphere),
            "curve" => Ok(IndenterKind::Curve),
            "waves" => Ok(IndenterKind::Waves),
            "multi_dot" | "dots" => Ok(IndenterKind::MultiDot),
            _ => Err(format!("unknown indenter {s:?}")),
        }
    }
}

/// Analytic indenter underside. All flat-faced shapes are extruded punches;
/// `Sphere` is the only curved face. Dimensions in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndenterShape {
    Dot { radius: f64 },
    Ring { inner: f64, outer: f64 },
    Sphere { radius: f64 },
    /// Circular-arc stroke centred on the pose, spanning `sweep` radians
    /// symmetric about the local +x axis, with rounded ends.
    Curve { arc_radius: f64, stroke_width: f64, sweep: f64 },
    /// Corrugated patch: three parallel ridges along local y with a
    /// raised-cosine profile. Crests (lowest points) at local x = −λ, 0, λ.
    Waves { wavelength: f64, amplitude: f64, ridge_length: f64 },
    /// `count` flat dots evenly spaced on a circle of radius `spread`.
    MultiDot { dot_radius: f64, count: usize, spread: f64 },
}

impl IndenterShape {
    pub fn kind(&self) -> IndenterKind {
        match self {
            IndenterShape::Dot { .. } => IndenterKind::Dot,
            IndenterShape::Ring { .. } => IndenterKind::Ring,
            IndenterShape::Sphere { .. } => IndenterKind::Sphere,
            IndenterShape::Curve { .. } => IndenterKind::Curve,
            IndenterShape::Waves { .. } => IndenterKind::Waves,
            IndenterShape::MultiDot { .. } => IndenterKind::MultiDot,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            IndenterShape::Dot { radius } => radius > 0.0,
            IndenterShape::Ring { inner, outer } => inner > 0.0 && outer > inner,
            IndenterShape::Sphere { radius } => radius > 0.0,
            IndenterShape::Curve {
                arc_radius,
                stroke_width,
                sweep,
            } => arc_radius > 0.0 && stroke_width > 0.0 && sweep > 0.0 && sweep <= 2.0 * PI,
            IndenterShape::Waves {
                wavelength,
                amplitude,
                ridge_length,
            } => wavelength > 0.0 && amplitude > 0.0 && ridge_length > 0.0,
            IndenterShape::MultiDot {
                dot_radius,
                count,
                spread,
            } => dot_radius > 0.0 && count > 0 && spread >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("invalid indenter dimensions: {self:?}")))
        }
    }

    /// Radius of a circle around the pose centre containing the whole footprint.
    pub fn footprint_radius(&self) -> f64 {
        match *self {
            IndenterShape::Dot { radius } => radius,
            IndenterShape::Ring { outer, .. } => outer,
            IndenterShape::Sphere { radius } => radius,
            IndenterShape::Curve {
                arc_radius,
                stroke_width,
                ..
            } => arc_radius + 0.5 * stroke_width,
            IndenterShape::Waves {
                wavelength,
                ridge_length,
                ..
            } => (1.5 * wavelength).hypot(0.5 * ridge_length),
            IndenterShape::MultiDot { dot_radius, spread, .. } => spread + dot_radius,
        }
    }

    /// Radius of the circle containing the contact for a given press depth.
    pub fn contact_radius(&self, press: f64) -> f64 {
        match *self {
            IndenterShape::Sphere { radius } => {
                let p = press.min(radius);
                (2.0 * radius * p - p * p).max(0.0).sqrt()
            }
            _ => self.footprint_radius(),
        }
    }

    /// Height of the underside above its lowest point, at local coordinates
    /// (pose-centred, yaw removed). `INFINITY` where there is no material.
    fn relief(&self, q: V2) -> f64 {
        let r = q.norm();
        match *self {
            IndenterShape::Dot { radius } => flat(r <= radius),
            IndenterShape::Ring { inner, outer } => flat(r >= inner && r <= outer),
            IndenterShape::Sphere { radius } => {
                if r < radius {
                    radius - (radius * radius - r * r).sqrt()
                } else {
                    radius
                }
            }
            IndenterShape::Curve {
                arc_radius,
                stroke_width,
                sweep,
            } => {
                let half = 0.5 * stroke_width;
                let ang = q.y.atan2(q.x);
                let on_arc = ang.abs() <= 0.5 * sweep && (r - arc_radius).abs() <= half;
                let cap = |a: f64| (q - V2::new(arc_radius * a.cos(), arc_radius * a.sin())).norm() <= half;
                flat(on_arc || cap(0.5 * sweep) || cap(-0.5 * sweep))
            }
            IndenterShape::Waves {
                wavelength,
                amplitude,
                ridge_length,
            } => {
                if q.x.abs() <= 1.5 * wavelength && q.y.abs() <= 0.5 * ridge_length {
                    0.5 * amplitude * (1.0 - (2.0 * PI * q.x / wavelength).cos())
                } else {
                    f64::INFINITY
                }
            }
            IndenterShape::MultiDot {
                dot_radius,
                count,
                spread,
            } => flat(multi_dot_centers(count, spread).any(|c| (q - c).norm() <= dot_radius)),
        }
    }
}

fn flat(inside: bool) -> f64 {
    if inside {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn multi_dot_centers(count: usize, spread: f64) -> impl Iterator<Item = V2> {
    (0..count).map(move |k| {
        if count == 1 {
            V2::zeros()
        } else {
            let a = 2.0 * PI * k as f64 / count as f64;
            V2::new(spread * a.cos(), spread * a.sin())
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPose {
    /// Indenter centre in sensing-area millimetres.
    pub center: P2,
    pub press_depth: f64,
    pub yaw: f64,
}

impl ContactPose {
    pub fn new(x: f64, y: f64, press_depth: f64, yaw: f64) -> Self {
        ContactPose {
            center: P2::new(x, y),
            press_depth,
            yaw,
        }
    }

    fn to_local(&self, p: P2) -> V2 {
        let d = p - self.center;
        let (s, c) = self.yaw.sin_cos();
        V2::new(c * d.x + s * d.y, -s * d.x + c * d.y)
    }
}

/// Height of the indenter underside above the undeformed surface at `p`.
/// Negative values are penetration; the deepest point sits at `-press_depth`.
pub fn indenter_height(shape: &IndenterShape, pose: &ContactPose, p: P2) -> f64 {
    shape.relief(pose.to_local(p)) - pose.press_depth
}

/// Scalar raster in mm on the camera grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthField {
    pub frame: RasterFrame,
    pub data: Vec<f64>,
}

impl DepthField {
    pub fn zeros(frame: RasterFrame) -> Self {
        DepthField {
            frame,
            data: vec![0.0; frame.len()],
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.frame.width + i]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Bilinear sample at a mm position; zero outside the raster.
    pub fn sample(&self, p: P2) -> f64 {
        bilinear(&self.frame, p, |i, j| self.at(i, j))
    }

    /// Fraction of pixels with positive depth.
    pub fn contact_fraction(&self) -> f64 {
        let n = self.data.iter().filter(|&&d| d > 0.0).count();
        n as f64 / self.data.len().max(1) as f64
    }

    /// Central-difference gradient in mm/mm, zero-padded at the border.
    pub fn gradient(&self, i: usize, j: usize) -> (f64, f64) {
        central_gradient(&self.frame, &self.data, i, j)
    }
}

fn central_gradient(frame: &RasterFrame, data: &[f64], i: usize, j: usize) -> (f64, f64) {
    let w = frame.width;
    let get = |ii: isize, jj: isize| -> f64 {
        if ii < 0 || jj < 0 || ii as usize >= w || jj as usize >= frame.height {
            0.0
        } else {
            data[jj as usize * w + ii as usize]
        }
    };
    let (i, j) = (i as isize, j as isize);
    let s2 = 2.0 * frame.mm_per_px;
    (
        (get(i + 1, j) - get(i - 1, j)) / s2,
        (get(i, j + 1) - get(i, j - 1)) / s2,
    )
}

fn bilinear(frame: &RasterFrame, p: P2, get: impl Fn(usize, usize) -> f64) -> f64 {
    let q = frame.to_px(p);
    let (x, y) = (q.x - 0.5, q.y - 0.5);
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let mut acc = 0.0;
    for (dx, wx) in [(0.0, 1.0 - fx), (1.0, fx)] {
        for (dy, wy) in [(0.0, 1.0 - fy), (1.0, fy)] {
            let (ii, jj) = (x0 + dx, y0 + dy);
            if wx * wy == 0.0 || ii < 0.0 || jj < 0.0 || ii >= frame.width as f64 || jj >= frame.height as f64 {
                continue;
            }
            acc += wx * wy * get(ii as usize, jj as usize);
        }
    }
    acc
}

/// Penetration depth `max(0, −height)` sampled at every pixel centre.
pub fn compute_depth_field(shape: &IndenterShape, pose: &ContactPose, cfg: &SensorConfig) -> Result<DepthField> {
    shape.validate()?;
    if !(pose.press_depth >= 0.0) || pose.press_depth > cfg.elastomer.thickness {
        return Err(Error::Parameter(format!(
            "press depth {} mm must lie in [0, {}]",
            pose.press_depth, cfg.elastomer.thickness
        )));
    }
    let area = cfg.area_rect();
    let reach = shape.contact_radius(pose.press_depth);
    let touches = if reach > 0.0 {
        area.intersects_disk(pose.center, reach)
    } else {
        area.contains(pose.center)
    };
    if !touches {
        return Err(Error::PoseOutOfArea);
    }
    let frame = cfg.raster();
    let mut field = DepthField::zeros(frame);
    if pose.press_depth == 0.0 {
        return Ok(field);
    }
    let r = shape.footprint_radius();
    let (xs, ys) = frame.pixel_span(
        P2::new(pose.center.x - r, pose.center.y - r),
        P2::new(pose.center.x + r, pose.center.y + r),
    );
    for j in ys {
        for i in xs.clone() {
            let h = indenter_height(shape, pose, frame.pixel_center_mm(i, j));
            if h < 0.0 {
                field.data[j * frame.width + i] = -h;
            }
        }
    }
    Ok(field)
}

/// Surface displacement (ux, uy, uz) in mm per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationField {
    pub frame: RasterFrame,
    pub data: Vec<[f64; 3]>,
}

impl DeformationField {
    pub fn at(&self, i: usize, j: usize) -> [f64; 3] {
        self.data[j * self.frame.width + i]
    }

    /// Bilinear sample of all three components.
    pub fn sample(&self, p: P2) -> Vector3<f64> {
        Vector3::new(
            bilinear(&self.frame, p, |i, j| self.at(i, j)[0]),
            bilinear(&self.frame, p, |i, j| self.at(i, j)[1]),
            bilinear(&self.frame, p, |i, j| self.at(i, j)[2]),
        )
    }

    /// ∂u/∂x and ∂u/∂y at `p` by symmetric differences of one pixel.
    pub fn jacobian(&self, p: P2) -> (Vector3<f64>, Vector3<f64>) {
        let h = self.frame.mm_per_px;
        let dx = (self.sample(P2::new(p.x + h, p.y)) - self.sample(P2::new(p.x - h, p.y))) / (2.0 * h);
        let dy = (self.sample(P2::new(p.x, p.y + h)) - self.sample(P2::new(p.x, p.y - h))) / (2.0 * h);
        (dx, dy)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.iter().all(|&c| c == 0.0))
    }
}

fn gaussian_kernel(sigma_px: f64) -> Vec<f64> {
    let radius = (3.0 * sigma_px).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|t| (-(t * t) as f64 / (2.0 * sigma_px * sigma_px)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// `uz = −d`; `(ux, uy) = −κ·(30/stiffness)·∇(G_σ ∗ d)`.
///
/// The blur runs only over the support bounding box grown by the kernel
/// radius, which gives the same values as a full-raster pass because the
/// field is zero elsewhere. Summation order within each pixel is fixed.
pub fn compute_displacement_field(
    depth: &DepthField,
    elastomer: &ElastomerSpec,
    mechanics: &MechanicsParams,
) -> DeformationField {
    let frame = depth.frame;
    let (w, h) = (frame.width, frame.height);
    let mut data: Vec<[f64; 3]> = depth.data.iter().map(|&d| [0.0, 0.0, -d]).collect();

    let mut lo = (usize::MAX, usize::MAX);
    let mut hi = (0usize, 0usize);
    for j in 0..h {
        for i in 0..w {
            if depth.data[j * w + i] > 0.0 {
                lo = (lo.0.min(i), lo.1.min(j));
                hi = (hi.0.max(i), hi.1.max(j));
            }
        }
    }
    if lo.0 == usize::MAX {
        return DeformationField { frame, data };
    }
    let kernel = gaussian_kernel(mechanics.sigma / frame.mm_per_px);
    let kr = kernel.len() / 2;
    let grow = kr + 2;
    let x0 = lo.0.saturating_sub(grow);
    let y0 = lo.1.saturating_sub(grow);
    let x1 = (hi.0 + grow + 1).min(w);
    let y1 = (hi.1 + grow + 1).min(h);
    let (bw, bh) = (x1 - x0, y1 - y0);

    // Horizontal pass over rows that can be non-zero, then vertical pass.
    let mut tmp = vec![0.0; bw * bh];
    for j in lo.1..=hi.1 {
        for i in x0..x1 {
            let mut acc = 0.0;
            for (t, kv) in kernel.iter().enumerate() {
                let ii = i as isize + t as isize - kr as isize;
                if ii >= lo.0 as isize && ii <= hi.0 as isize {
                    acc += kv * depth.data[j * w + ii as usize];
                }
            }
            tmp[(j - y0) * bw + (i - x0)] = acc;
        }
    }
    let mut smooth = vec![0.0; w * h];
    for j in y0..y1 {
        for i in x0..x1 {
            let mut acc = 0.0;
            for (t, kv) in kernel.iter().enumerate() {
                let jj = j as isize + t as isize - kr as isize;
                if jj >= lo.1 as isize && jj <= hi.1 as isize {
                    acc += kv * tmp[(jj as usize - y0) * bw + (i - x0)];
                }
            }
            smooth[j * w + i] = acc;
        }
    }
    let k = mechanics.kappa * 30.0 / elastomer.stiffness;
    for j in y0..y1 {
        for i in x0..x1 {
            let (gx, gy) = central_gradient(&frame, &smooth, i, j);
            let cell = &mut data[j * w + i];
            cell[0] = -k * gx;
            cell[1] = -k * gy;
        }
    }
    DeformationField { frame, data }
}

/// Applies a rigid rotation about the frame origin and a translation to a
/// coordinate marker. Other marker kinds are only translated in-plane.
pub fn transform_coordinate_marker(marker: &Marker, rotation: &Rotation3<f64>, translation: &Vector3<f64>) -> Marker {
    let mut out = marker.clone();
    match &mut out.geometry {
        Geometry::Frame { origin, tips, .. } => {
            let o = *origin;
            for t in tips.iter_mut() {
                *t = o + translation + rotation * (*t - o);
            }
            *origin = o + translation;
        }
        Geometry::Disk { center, .. } => *center += translation.xy(),
        Geometry::Polygon { vertices } => vertices.iter_mut().for_each(|v| *v += translation.xy()),
    }
    out
}

/// Moves every marker by the field sampled at its anchor, attenuated by
/// `λ^(layers above)`. Flexible disks grow by `1 + k·d_local`; coordinate
/// frames additionally rotate with the local surface.
pub fn displace_markers(layout: &MarkerLayout, field: &DeformationField, mechanics: &MechanicsParams) -> MarkerLayout {
    let mut out = layout.clone();
    for m in out.markers.iter_mut() {
        let anchor = m.geometry.anchor();
        let u = field.sample(anchor);
        let atten = mechanics.lambda.powi(layout.layer_depth_steps(m.layer) as i32);
        let shift = V2::new(u.x, u.y) * atten;
        let d_local = (-u.z).max(0.0);
        match &mut m.geometry {
            Geometry::Disk { center, radius } => {
                *center += shift;
                if m.stiffness == Stiffness::Flexible {
                    *radius *= 1.0 + mechanics.stretch_gain * d_local;
                }
            }
            Geometry::Polygon { vertices } => {
                let c = crate::geom::polygon_centroid(vertices);
                let scale = if m.stiffness == Stiffness::Flexible {
                    1.0 + mechanics.stretch_gain * d_local
                } else {
                    1.0
                };
                for v in vertices.iter_mut() {
                    *v = c + shift + (*v - c) * scale;
                }
            }
            Geometry::Frame { .. } => {
                let (jx, jy) = field.jacobian(anchor);
                let omega = Vector3::new(jy.z, -jx.z, 0.5 * (jx.y - jy.x)) * atten;
                let rot = Rotation3::new(omega);
                let moved = transform_coordinate_marker(m, &rot, &(u * atten));
                m.geometry = moved.geometry;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, SensorVariant};

    fn pose(press: f64) -> ContactPose {
        ContactPose::new(17.0, 13.5, press, 0.0)
    }

    #[test]
    fn sphere_heights() {
        let s = IndenterShape::Sphere { radius: 4.0 };
        let p = pose(1.0);
        assert_eq!(indenter_height(&s, &p, p.center), -1.0);
        assert!(indenter_height(&s, &p, P2::new(21.0, 13.5)) >= 0.0);
    }

    #[test]
    fn ring_flat_face() {
        let s = IndenterShape::Ring { inner: 3.0, outer: 5.0 };
        let p = pose(0.5);
        assert_eq!(indenter_height(&s, &p, P2::new(21.0, 13.5)), -0.5);
        assert!(indenter_height(&s, &p, p.center) > 0.0);
    }

    #[test]
    fn zero_press_gives_zero_field() {
        let cfg = preset(SensorVariant::CTac);
        for kind in IndenterKind::ALL {
            let d = compute_depth_field(&kind.default_shape(), &pose(0.0), &cfg).unwrap();
            assert!(d.data.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn sphere_contact_radius_matches_algebra() {
        let cfg = preset(SensorVariant::CTac);
        let s = IndenterShape::Sphere { radius: 4.0 };
        let p = pose(1.0);
        let d = compute_depth_field(&s, &p, &cfg).unwrap();
        let expected = 7f64.sqrt();
        let px = cfg.camera.mm_per_px;
        let mut max_r: f64 = 0.0;
        for j in 0..d.frame.height {
            for i in 0..d.frame.width {
                if d.at(i, j) > 0.0 {
                    max_r = max_r.max((d.frame.pixel_center_mm(i, j) - p.center).norm());
                }
            }
        }
        assert!((max_r - expected).abs() <= px, "{max_r} vs {expected}");
        assert!((d.max() - 1.0).abs() < 0.01);
    }

    #[test]
    fn ring_center_has_no_depth() {
        let cfg = preset(SensorVariant::CTac);
        let p = pose(0.8);
        let d = compute_depth_field(&IndenterKind::Ring.default_shape(), &p, &cfg).unwrap();
        assert_eq!(d.sample(p.center), 0.0);
        assert!(d.max() > 0.0);
    }

    #[test]
    fn out_of_area_pose_errors() {
        let cfg = preset(SensorVariant::CTac);
        let far = ContactPose::new(-30.0, -30.0, 0.5, 0.0);
        let r = compute_depth_field(&IndenterKind::Dot.default_shape(), &far, &cfg);
        assert!(matches!(r, Err(Error::PoseOutOfArea)));
    }

    #[test]
    fn too_deep_press_errors() {
        let cfg = preset(SensorVariant::CTac);
        let r = compute_depth_field(&IndenterKind::Dot.default_shape(), &pose(10.0), &cfg);
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn zero_depth_zero_deformation() {
        let cfg = preset(SensorVariant::CTac);
        let d = DepthField::zeros(cfg.raster());
        let f = compute_displacement_field(&d, &cfg.elastomer, &cfg.mechanics);
        assert!(f.is_zero());
    }

    #[test]
    fn sphere_lateral_motion_points_outward() {
        let cfg = preset(SensorVariant::CTac);
        let p = pose(1.0);
        let d = compute_depth_field(&IndenterShape::Sphere { radius: 5.0 }, &p, &cfg).unwrap();
        let f = compute_displacement_field(&d, &cfg.elastomer, &cfg.mechanics);
        for k in 0..16 {
            let a = k as f64 * PI / 8.0;
            for r in [1.0, 2.5, 4.0, 6.0] {
                let q = p.center + V2::new(r * a.cos(), r * a.sin());
                let u = f.sample(q);
                let radial = V2::new(a.cos(), a.sin());
                let lat = V2::new(u.x, u.y);
                assert!(lat.dot(&radial) > 0.0, "r={r} a={a}");
                assert!(lat.perp(&radial).abs() < 0.05 * lat.norm() + 1e-9);
            }
        }
    }

    #[test]
    fn dot_doubling_press_doubles_uz() {
        let cfg = preset(SensorVariant::CTac);
        let s = IndenterKind::Dot.default_shape();
        let a = compute_depth_field(&s, &pose(0.4), &cfg).unwrap();
        let b = compute_depth_field(&s, &pose(0.8), &cfg).unwrap();
        let fa = compute_displacement_field(&a, &cfg.elastomer, &cfg.mechanics);
        let fb = compute_displacement_field(&b, &cfg.elastomer, &cfg.mechanics);
        let c = pose(0.0).center;
        assert_eq!(fb.sample(c).z, 2.0 * fa.sample(c).z);
    }

    #[test]
    fn uz_is_exactly_minus_depth() {
        let cfg = preset(SensorVariant::CTac);
        let d = compute_depth_field(&IndenterKind::Waves.default_shape(), &pose(0.7), &cfg).unwrap();
        let f = compute_displacement_field(&d, &cfg.elastomer, &cfg.mechanics);
        assert!(d.data.iter().zip(&f.data).all(|(d, u)| u[2] + d == 0.0));
    }

    #[test]
    fn blur_window_matches_full_raster() {
        // Reference: the same separable blur over the entire raster.
        let cfg = preset(SensorVariant::CTac);
        let p = ContactPose::new(12.0, 9.0, 0.9, 0.3);
        let d = compute_depth_field(&IndenterKind::Curve.default_shape(), &p, &cfg).unwrap();
        let f = compute_displacement_field(&d, &cfg.elastomer, &cfg.mechanics);
        let fr = d.frame;
        let kernel = gaussian_kernel(cfg.mechanics.sigma / fr.mm_per_px);
        let kr = (kernel.len() / 2) as isize;
        let (w, h) = (fr.width as isize, fr.height as isize);
        let mut tmp = vec![0.0; fr.len()];
        for j in 0..h {
            for i in 0..w {
                let mut acc = 0.0;
                for (t, kv) in kernel.iter().enumerate() {
                    let ii = i + t as isize - kr;
                    if ii >= 0 && ii < w {
                        acc += kv * d.data[(j * w + ii) as usize];
                    }
                }
                tmp[(j * w + i) as usize] = acc;
            }
        }
        let mut sm = vec![0.0; fr.len()];
        for j in 0..h {
            for i in 0..w {
                let mut acc = 0.0;
                for (t, kv) in kernel.iter().enumerate() {
                    let jj = j + t as isize - kr;
                    if jj >= 0 && jj < h {
                        acc += kv * tmp[(jj * w + i) as usize];
                    }
                }
                sm[(j * w + i) as usize] = acc;
            }
        }
        let k = cfg.mechanics.kappa;
        let mut worst: f64 = 0.0;
        for j in 0..fr.height {
            for i in 0..fr.width {
                let (gx, gy) = central_gradient(&fr, &sm, i, j);
                let u = f.at(i, j);
                worst = worst.max((u[0] + k * gx).abs()).max((u[1] + k * gy).abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn displacement_with_zero_field_is_identity() {
        let cfg = preset(SensorVariant::ViCTac);
        let layout = cfg.marker_layout().unwrap().unwrap();
        let f = compute_displacement_field(&DepthField::zeros(cfg.raster()), &cfg.elastomer, &cfg.mechanics);
        assert_eq!(displace_markers(&layout, &f, &cfg.mechanics), layout);
    }

    #[test]
    fn flexible_disk_grows_rigid_does_not() {
        let cfg = preset(SensorVariant::CTac);
        let mut layout = cfg.marker_layout().unwrap().unwrap();
        layout.markers.truncate(2);
        let c = P2::new(17.0, 13.5);
        for (k, m) in layout.markers.iter_mut().enumerate() {
            m.geometry = Geometry::Disk { center: c, radius: 0.5 };
            m.stiffness = if k == 0 { Stiffness::Flexible } else { Stiffness::Rigid };
        }
        let mut depth = DepthField::zeros(cfg.raster());
        depth.data.iter_mut().for_each(|v| *v = 1.0);
        let f = compute_displacement_field(&depth, &cfg.elastomer, &cfg.mechanics);
        let out = displace_markers(&layout, &f, &cfg.mechanics);
        let radius = |m: &Marker| match m.geometry {
            Geometry::Disk { radius, .. } => radius,
            _ => unreachable!(),
        };
        assert!((radius(&out.markers[0]) - 0.6).abs() < 1e-12);
        assert_eq!(radius(&out.markers[1]), 0.5);
    }

    #[test]
    fn deep_layer_moves_less() {
        let cfg = preset(SensorVariant::ViCTac);
        let layout = cfg.marker_layout().unwrap().unwrap();
        let p = pose(0.9);
        let d = compute_depth_field(&IndenterKind::Sphere.default_shape(), &p, &cfg).unwrap();
        let f = compute_displacement_field(&d, &cfg.elastomer, &cfg.mechanics);
        let out = displace_markers(&layout, &f, &cfg.mechanics);
        // Compare each deep marker's motion with what the top layer would get
        // at the same anchor.
        for (before, after) in layout.markers.iter().zip(&out.markers) {
            if before.layer != 0 {
                continue;
            }
            let moved = (after.geometry.anchor() - before.geometry.anchor()).norm();
            let u = f.sample(before.geometry.anchor());
            let top = V2::new(u.x, u.y).norm();
            assert!(moved <= top + 1e-15);
            assert!((moved - cfg.mechanics.lambda * top).abs() < 1e-12);
        }
    }
}
