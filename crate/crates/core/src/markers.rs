//! Marker layouts: dot grids, double-layer dots, regular tessellations and
//! three-pointer coordinate frames.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::color::Rgb;
use crate::error::{Error, Result};
use crate::geom::{self, Rect, P2};
use crate::model::{SensorConfig, Severity, Violation};
use crate::textfmt::{self, KvDoc};

pub type P3 = Point3<f64>;

/// Rejection samples drawn before random placement gives up.
pub const RANDOM_RETRY_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stiffness {
    Rigid,
    Flexible,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Disk {
        center: P2,
        radius: f64,
    },
    Polygon {
        vertices: Vec<P2>,
    },
    /// A gyroscope-like pointer triad: origin plus x, y and z axis tips.
    Frame {
        origin: P3,
        tips: [P3; 3],
        axis_colors: [Rgb; 3],
    },
}

impl Geometry {
    /// In-plane anchor point (disk centre, polygon centroid, frame origin).
    pub fn anchor(&self) -> P2 {
        match self {
            Geometry::Disk { center, .. } => *center,
            Geometry::Polygon { vertices } => geom::polygon_centroid(vertices),
            Geometry::Frame { origin, .. } => P2::new(origin.x, origin.y),
        }
    }

    /// In-plane bounding box.
    pub fn bbox(&self) -> (P2, P2) {
        let pts: Vec<P2> = match self {
            Geometry::Disk { center, radius } => {
                return (
                    P2::new(center.x - radius, center.y - radius),
                    P2::new(center.x + radius, center.y + radius),
                )
            }
            Geometry::Polygon { vertices } => vertices.clone(),
            Geometry::Frame { origin, tips, .. } => std::iter::once(origin)
                .chain(tips.iter())
                .map(|p| P2::new(p.x, p.y))
                .collect(),
        };
        let mut lo = P2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = P2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            lo = P2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = P2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub id: usize,
    /// 0 is the deepest layer.
    pub layer: usize,
    pub geometry: Geometry,
    pub color: Rgb,
    pub stiffness: Stiffness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayoutKind {
    Dot,
    DoubleLayer,
    Voronoi,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellShape {
    Triangle,
    Square,
    Hexagon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkerLayout {
    pub kind: LayoutKind,
    pub bounds: Rect,
    /// Vertical distance between consecutive marker layers (0 for single layer).
    pub layer_separation: f64,
    /// Minimum edge-to-edge clearance between disks on the same layer.
    pub min_clearance: f64,
    pub markers: Vec<Marker>,
}

impl MarkerLayout {
    pub fn layer_count(&self) -> usize {
        self.markers.iter().map(|m| m.layer + 1).max().unwrap_or(0)
    }

    pub fn layer(&self, layer: usize) -> impl Iterator<Item = &Marker> {
        self.markers.iter().filter(move |m| m.layer == layer)
    }

    /// Depth below the skin of a layer, counted in layer steps (top layer = 0).
    pub fn layer_depth_steps(&self, layer: usize) -> usize {
        self.layer_count().saturating_sub(1).saturating_sub(layer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arrangement {
    /// Grid filling the bounds, one marker per cell centre.
    Uniform { rows: usize, cols: usize },
    /// Rejection-sampled centres with a minimum centre-to-centre spacing.
    Random {
        count: usize,
        min_spacing: f64,
        seed: u64,
    },
}

fn disk(id: usize, layer: usize, center: P2, radius: f64, color: Rgb, stiffness: Stiffness) -> Marker {
    Marker {
        id,
        layer,
        geometry: Geometry::Disk { center, radius },
        color,
        stiffness,
    }
}

fn grid_centers(bounds: &Rect, rows: usize, cols: usize, radius: f64) -> Result<Vec<P2>> {
    if rows == 0 || cols == 0 {
        return Err(Error::Pitch("grid needs at least one row and column".into()));
    }
    let px = bounds.width() / cols as f64;
    let py = bounds.height() / rows as f64;
    if px <= 2.0 * radius || py <= 2.0 * radius {
        return Err(Error::Pitch(format!(
            "pitch {:.4}x{:.4} mm must exceed marker diameter {:.4} mm",
            px,
            py,
            2.0 * radius
        )));
    }
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(P2::new(
                bounds.min.x + (c as f64 + 0.5) * px,
                bounds.min.y + (r as f64 + 0.5) * py,
            ));
        }
    }
    Ok(out)
}

fn random_centers(bounds: &Rect, count: usize, min_spacing: f64, radius: f64, seed: u64) -> Result<Vec<P2>> {
    let inner = Rect::new(
        bounds.min.x + radius,
        bounds.min.y + radius,
        bounds.max.x - radius,
        bounds.max.y - radius,
    );
    if bounds.width() <= 2.0 * radius || bounds.height() <= 2.0 * radius {
        return Err(Error::InfeasiblePacking("bounds smaller than one marker".into()));
    }
    // Disks of radius s/2 around each centre are disjoint and lie inside the
    // inner rectangle grown by s/2.
    let half = 0.5 * min_spacing;
    let avail = (inner.width() + min_spacing) * (inner.height() + min_spacing);
    let need = count as f64 * std::f64::consts::PI * half * half;
    if need > avail {
        return Err(Error::InfeasiblePacking(format!(
            "{count} markers at spacing {min_spacing} mm need {need:.3} mm² but only {avail:.3} mm² is available"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<P2> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let s2 = min_spacing * min_spacing;
    while pts.len() < count {
        if attempts >= RANDOM_RETRY_BUDGET {
            return Err(Error::InfeasiblePacking(format!(
                "placed {} of {count} markers after {RANDOM_RETRY_BUDGET} samples",
                pts.len()
            )));
        }
        attempts += 1;
        let p = P2::new(
            rng.gen_range(inner.min.x..=inner.max.x),
            rng.gen_range(inner.min.y..=inner.max.y),
        );
        if pts.iter().all(|q| (p - q).norm_squared() >= s2) {
            pts.push(p);
        }
    }
    Ok(pts)
}

fn arrangement_centers(bounds: &Rect, arrangement: Arrangement, radius: f64) -> Result<Vec<P2>> {
    if radius <= 0.0 {
        return Err(Error::Parameter("marker radius must be positive".into()));
    }
    match arrangement {
        Arrangement::Uniform { rows, cols } => grid_centers(bounds, rows, cols, radius),
        Arrangement::Random {
            count,
            min_spacing,
            seed,
        } => {
            if min_spacing < 2.0 * radius {
                return Err(Error::Pitch(format!(
                    "minimum spacing {min_spacing} mm is below the marker diameter {}",
                    2.0 * radius
                )));
            }
            random_centers(bounds, count, min_spacing, radius, seed)
        }
    }
}

fn min_gap(centers: &[P2], radius: f64) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            best = best.min((a - b).norm() - 2.0 * radius);
        }
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

pub fn gen_dot_layout(
    bounds: Rect,
    arrangement: Arrangement,
    radius: f64,
    stiffness: Stiffness,
    layer: usize,
    color: Rgb,
) -> Result<MarkerLayout> {
    let centers = arrangement_centers(&bounds, arrangement, radius)?;
    let min_clearance = min_gap(&centers, radius).max(0.0);
    let markers = centers
        .into_iter()
        .enumerate()
        .map(|(id, c)| disk(id, layer, c, radius, color, stiffness))
        .collect();
    Ok(MarkerLayout {
        kind: LayoutKind::Dot,
        bounds,
        layer_separation: 0.0,
        min_clearance,
        markers,
    })
}

/// Two stacked dot layers. Layer 0 (deep) fills `bounds` minus `layer_offset`
/// on the high side; layer 1 fills `bounds` minus the offset on the low side,
/// so with a half-pitch offset the two grids interleave in projection.
pub fn gen_double_layer(
    bounds: Rect,
    arrangement: Arrangement,
    layer_offset: (f64, f64),
    radius: f64,
    separation_mm: f64,
    colors: (Rgb, Rgb),
    stiffness: Stiffness,
) -> Result<MarkerLayout> {
    if separation_mm <= 0.0 {
        return Err(Error::Parameter("layer separation must be positive".into()));
    }
    if colors.0 == colors.1 {
        return Err(Error::Parameter("layer colours must differ".into()));
    }
    let (ox, oy) = (layer_offset.0.abs(), layer_offset.1.abs());
    let deep_bounds = Rect::new(bounds.min.x, bounds.min.y, bounds.max.x - ox, bounds.max.y - oy);
    let top_bounds = Rect::new(bounds.min.x + ox, bounds.min.y + oy, bounds.max.x, bounds.max.y);
    let top_arr = match arrangement {
        Arrangement::Random {
            count,
            min_spacing,
            seed,
        } => Arrangement::Random {
            count,
            min_spacing,
            seed: seed.wrapping_add(0x9E37_79B9_7F4A_7C15),
        },
        a => a,
    };
    let deep = arrangement_centers(&deep_bounds, arrangement, radius)?;
    let top = arrangement_centers(&top_bounds, top_arr, radius)?;
    let min_clearance = min_gap(&deep, radius).min(min_gap(&top, radius)).max(0.0);
    let mut markers = Vec::with_capacity(deep.len() + top.len());
    for c in deep {
        markers.push(disk(markers.len(), 0, c, radius, colors.0, stiffness));
    }
    for c in top {
        markers.push(disk(markers.len(), 1, c, radius, colors.1, stiffness));
    }
    Ok(MarkerLayout {
        kind: LayoutKind::DoubleLayer,
        bounds,
        layer_separation: separation_mm,
        min_clearance,
        markers,
    })
}

/// Regular tessellation clipped to `bounds`. Cells are stored as polygon
/// markers; shared vertices are bitwise identical between neighbouring cells.
pub fn gen_voronoi(bounds: Rect, cell: CellShape, pitch_mm: f64, edge_color: Rgb) -> Result<MarkerLayout> {
    let limit = bounds.width().min(bounds.height()) / 2.0;
    if !(pitch_mm > 0.0 && pitch_mm <= limit) {
        return Err(Error::Pitch(format!(
            "cell pitch {pitch_mm} mm must lie in (0, {limit}]"
        )));
    }
    let raw = match cell {
        CellShape::Square => square_cells(&bounds, pitch_mm),
        CellShape::Triangle => triangle_cells(&bounds, pitch_mm),
        CellShape::Hexagon => hexagon_cells(&bounds, pitch_mm),
    };
    let tol = 1e-9 * pitch_mm * pitch_mm;
    let markers = raw
        .into_iter()
        .map(|poly| geom::clip_to_rect(&poly, &bounds))
        .filter(|poly| poly.len() >= 3 && geom::polygon_area(poly) > tol)
        .enumerate()
        .map(|(id, vertices)| Marker {
            id,
            layer: 0,
            geometry: Geometry::Polygon { vertices },
            color: edge_color,
            stiffness: Stiffness::Rigid,
        })
        .collect();
    Ok(MarkerLayout {
        kind: LayoutKind::Voronoi,
        bounds,
        layer_separation: 0.0,
        min_clearance: 0.0,
        markers,
    })
}

fn square_cells(b: &Rect, pitch: f64) -> Vec<Vec<P2>> {
    let v = |i: i64, j: i64| P2::new(b.min.x + i as f64 * pitch, b.min.y + j as f64 * pitch);
    let nx = (b.width() / pitch - 1e-9).ceil() as i64;
    let ny = (b.height() / pitch - 1e-9).ceil() as i64;
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            out.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    out
}

/// Equilateral triangles with side `pitch`, rows of height `pitch·√3/2`.
fn triangle_cells(b: &Rect, pitch: f64) -> Vec<Vec<P2>> {
    let h = pitch * 3f64.sqrt() / 2.0;
    // Lattice vertex (i, j): row j, column i, odd rows shifted by half a pitch.
    let v = |i: i64, j: i64| {
        let shift = if j.rem_euclid(2) == 1 { 0.5 * pitch } else { 0.0 };
        P2::new(b.min.x + i as f64 * pitch - shift, b.min.y + j as f64 * h)
    };
    let ny = (b.height() / h - 1e-9).ceil() as i64;
    let nx = (b.width() / pitch).ceil() as i64 + 1;
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..=nx {
            let (a0, a1) = (v(i, j), v(i + 1, j));
            if j % 2 == 0 {
                // Upper row is shifted left: its vertices i and i+1 straddle (a0, a1).
                let (b0, b1) = (v(i, j + 1), v(i + 1, j + 1));
                out.push(vec![a0, a1, b1]);
                out.push(vec![a0, b1, b0]);
            } else {
                let (b0, b1) = (v(i, j + 1), v(i + 1, j + 1));
                out.push(vec![a0, a1, b0]);
                out.push(vec![a1, b1, b0]);
            }
        }
    }
    out
}

/// Pointy-top hexagons whose centres are `pitch` apart.
fn hexagon_cells(b: &Rect, pitch: f64) -> Vec<Vec<P2>> {
    // Hexagon centres and vertices all lie on a triangular lattice with basis
    // e1, e2 (side s = pitch/√3) when counted in thirds of a lattice step, so
    // every vertex comes from integer coordinates and neighbours agree exactly.
    let s = pitch / 3f64.sqrt();
    let e1 = (pitch, 0.0);
    let e2 = (pitch / 2.0, 1.5 * s);
    let third = |a: i64, c: i64| {
        P2::new(
            b.min.x + (a as f64 * e1.0 + c as f64 * e2.0) / 3.0,
            b.min.y + (c as f64 * e2.1) / 3.0,
        )
    };
    // In thirds units, a centre at lattice (q, r) is (3q, 3r). The six vertex
    // offsets of a pointy-top hexagon in (e1, e2) thirds coordinates:
    const OFFS: [(i64, i64); 6] = [(1, 1), (-1, 2), (-2, 1), (-1, -1), (1, -2), (2, -1)];
    let rows = (b.height() / (1.5 * s)).ceil() as i64 + 2;
    let cols = (b.width() / pitch).ceil() as i64 + 2;
    let mut out = Vec::new();
    for r in -1..rows {
        let q0 = -(r.div_euclid(2)) - 1;
        for k in 0..=cols {
            let q = q0 + k;
            let (a, c) = (3 * q, 3 * r);
            let mut poly: Vec<P2> = OFFS.iter().map(|(da, dc)| third(a + da, c + dc)).collect();
            if geom::signed_area(&poly) < 0.0 {
                poly.reverse();
            }
            out.push(poly);
        }
    }
    out
}

/// Grid of three-pointer coordinate markers at rest (pointers along x, y, z).
pub fn gen_coordinate_markers(
    bounds: Rect,
    rows: usize,
    cols: usize,
    pointer_len_mm: f64,
    colors: (Rgb, Rgb, Rgb),
    origin_color: Rgb,
) -> Result<MarkerLayout> {
    if pointer_len_mm <= 0.0 {
        return Err(Error::Parameter("pointer length must be positive".into()));
    }
    let centers = grid_centers(&bounds, rows, cols, pointer_len_mm)?;
    let markers = centers
        .into_iter()
        .enumerate()
        .map(|(id, c)| {
            let origin = P3::new(c.x, c.y, 0.0);
            Marker {
                id,
                layer: 0,
                geometry: Geometry::Frame {
                    origin,
                    tips: [
                        origin + Vector3::x() * pointer_len_mm,
                        origin + Vector3::y() * pointer_len_mm,
                        origin + Vector3::z() * pointer_len_mm,
                    ],
                    axis_colors: [colors.0, colors.1, colors.2],
                },
                color: origin_color,
                stiffness: Stiffness::Rigid,
            }
        })
        .collect();
    Ok(MarkerLayout {
        kind: LayoutKind::Coordinate,
        bounds,
        layer_separation: 0.0,
        min_clearance: 0.0,
        markers,
    })
}

fn err(msg: String) -> Violation {
    Violation {
        severity: Severity::Error,
        message: msg,
    }
}

/// Checks a layout against the sensor it is embedded in.
pub fn validate_layout(layout: &MarkerLayout, cfg: &SensorConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let area = cfg.area_rect();
    let thickness = cfg.elastomer.thickness;
    let layers = layout.layer_count();
    if layers > 1 {
        let stack = (layers - 1) as f64 * layout.layer_separation;
        if stack >= thickness {
            out.push(err(format!(
                "marker layers span {stack} mm but the elastomer is only {thickness} mm thick"
            )));
        }
    }
    let eps = 1e-9;
    for m in &layout.markers {
        let inside = match &m.geometry {
            Geometry::Disk { center, radius } => {
                if *radius <= 0.0 {
                    out.push(err(format!("marker {} has non-positive radius", m.id)));
                }
                area.contains_disk(*center, radius - eps)
            }
            Geometry::Polygon { vertices } => {
                if vertices.len() < 3 || !geom::is_convex(vertices) {
                    out.push(err(format!("marker {} is not a convex polygon", m.id)));
                }
                let (lo, hi) = m.geometry.bbox();
                lo.x >= area.min.x - eps && lo.y >= area.min.y - eps && hi.x <= area.max.x + eps && hi.y <= area.max.y + eps
            }
            Geometry::Frame { origin, tips, .. } => {
                let legs: Vec<Vector3<f64>> = tips.iter().map(|t| t - origin).collect();
                let len = legs[0].norm();
                let ortho = (0..3).all(|i| {
                    ((i + 1)..3).all(|j| legs[i].dot(&legs[j]).abs() <= 1e-9 * len * len.max(1.0))
                });
                let equal = legs.iter().all(|l| (l.norm() - len).abs() <= 1e-9 * len.max(1.0));
                if !(ortho && equal) {
                    out.push(err(format!("marker {} pointers are not orthonormal", m.id)));
                }
                if len >= thickness {
                    out.push(err(format!(
                        "marker {} pointer length {len} mm does not fit in {thickness} mm elastomer",
                        m.id
                    )));
                }
                area.contains(P2::new(origin.x, origin.y))
            }
        };
        if !inside {
            out.push(err(format!("marker {} extends outside the sensing area", m.id)));
        }
    }
    for layer in 0..layers {
        let disks: Vec<(usize, P2, f64)> = layout
            .layer(layer)
            .filter_map(|m| match m.geometry {
                Geometry::Disk { center, radius } => Some((m.id, center, radius)),
                _ => None,
            })
            .collect();
        for (i, a) in disks.iter().enumerate() {
            for b in &disks[i + 1..] {
                if (a.1 - b.1).norm() - a.2 - b.2 < layout.min_clearance - 1e-9 {
                    out.push(err(format!(
                        "markers {} and {} on layer {layer} are closer than the {} mm clearance",
                        a.0, b.0, layout.min_clearance
                    )));
                }
            }
        }
    }
    out
}

impl fmt::Display for Stiffness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stiffness::Rigid => "rigid",
            Stiffness::Flexible => "flexible",
        })
    }
}

impl FromStr for Stiffness {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rigid" => Ok(Stiffness::Rigid),
            "flexible" => Ok(Stiffness::Flexible),
            _ => Err(format!("unknown stiffness {s:?}")),
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayoutKind::Dot => "dot",
            LayoutKind::DoubleLayer => "double_layer",
            LayoutKind::Voronoi => "voronoi",
            LayoutKind::Coordinate => "coordinate",
        })
    }
}

impl FromStr for LayoutKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dot" => Ok(LayoutKind::Dot),
            "double_layer" => Ok(LayoutKind::DoubleLayer),
            "voronoi" => Ok(LayoutKind::Voronoi),
            "coordinate" => Ok(LayoutKind::Coordinate),
            _ => Err(format!("unknown layout kind {s:?}")),
        }
    }
}

impl fmt::Display for CellShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellShape::Triangle => "triangle",
            CellShape::Square => "square",
            CellShape::Hexagon => "hexagon",
        })
    }
}

impl FromStr for CellShape {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "triangle" => Ok(CellShape::Triangle),
            "square" => Ok(CellShape::Square),
            "hexagon" => Ok(CellShape::Hexagon),
            _ => Err(format!("unknown cell shape {s:?}")),
        }
    }
}

pub const LAYOUT_SCHEMA_VERSION: u32 = 1;

fn pts_to_str(pts: &[P2]) -> String {
    pts.iter()
        .map(|p| format!("{},{}", p.x, p.y))
        .collect::<Vec<_>>()
        .join(";")
}

fn p3_str(p: &P3) -> String {
    textfmt::join_floats(&[p.x, p.y, p.z])
}

/// Serialises a layout. Field order is fixed so files diff cleanly.
pub fn layout_to_string(layout: &MarkerLayout) -> String {
    let mut d = KvDoc::new();
    d.push("schema_version", LAYOUT_SCHEMA_VERSION);
    d.push("kind", layout.kind);
    let b = &layout.bounds;
    d.push("bounds", textfmt::join_floats(&[b.min.x, b.min.y, b.max.x, b.max.y]));
    d.push("layer_separation", layout.layer_separation);
    d.push("min_clearance", layout.min_clearance);
    for m in &layout.markers {
        let geo = match &m.geometry {
            Geometry::Disk { center, radius } => format!("disk={},{},{}", center.x, center.y, radius),
            Geometry::Polygon { vertices } => format!("polygon={}", pts_to_str(vertices)),
            Geometry::Frame {
                origin,
                tips,
                axis_colors,
            } => format!(
                "frame={};{};{};{} axis_colors={};{};{}",
                p3_str(origin),
                p3_str(&tips[0]),
                p3_str(&tips[1]),
                p3_str(&tips[2]),
                axis_colors[0],
                axis_colors[1],
                axis_colors[2]
            ),
        };
        d.push(
            "marker",
            format!(
                "id={} layer={} stiffness={} color={} {geo}",
                m.id, m.layer, m.stiffness, m.color
            ),
        );
    }
    d.render()
}

pub fn layout_from_str(text: &str) -> Result<MarkerLayout> {
    let d = KvDoc::parse(text)?;
    d.check_schema(LAYOUT_SCHEMA_VERSION)?;
    let (bv, bl) = d.raw("bounds")?;
    let b = textfmt::parse_floats(bv, 4, bl)?;
    let mut markers = Vec::new();
    for (rec, line) in d.all("marker") {
        let mut id = None;
        let mut layer = 0usize;
        let mut stiffness = Stiffness::Rigid;
        let mut color = Rgb::WHITE;
        let mut geometry = None;
        let mut axis_colors = None;
        let bad = |m: String| Error::parse(line, m);
        for (k, v) in textfmt::attrs(rec) {
            match k {
                "id" => id = Some(v.parse().map_err(|e| bad(format!("id: {e}")))?),
                "layer" => layer = v.parse().map_err(|e| bad(format!("layer: {e}")))?,
                "stiffness" => stiffness = v.parse().map_err(bad)?,
                "color" => color = v.parse().map_err(bad)?,
                "disk" => {
                    let f = textfmt::parse_floats(v, 3, line)?;
                    geometry = Some(Geometry::Disk {
                        center: P2::new(f[0], f[1]),
                        radius: f[2],
                    });
                }
                "polygon" => {
                    let vertices = v
                        .split(';')
                        .map(|p| textfmt::parse_floats(p, 2, line).map(|f| P2::new(f[0], f[1])))
                        .collect::<Result<Vec<_>>>()?;
                    geometry = Some(Geometry::Polygon { vertices });
                }
                "frame" => {
                    let pts = v
                        .split(';')
                        .map(|p| textfmt::parse_floats(p, 3, line).map(|f| P3::new(f[0], f[1], f[2])))
                        .collect::<Result<Vec<_>>>()?;
                    if pts.len() != 4 {
                        return Err(bad("frame needs origin and three tips".into()));
                    }
                    geometry = Some(Geometry::Frame {
                        origin: pts[0],
                        tips: [pts[1], pts[2], pts[3]],
                        axis_colors: [Rgb::RED, Rgb::GREEN, Rgb::BLUE],
                    });
                }
                "axis_colors" => {
                    let c = v
                        .split(';')
                        .map(|p| p.parse::<Rgb>().map_err(&bad))
                        .collect::<Result<Vec<_>>>()?;
                    if c.len() != 3 {
                        return Err(bad("axis_colors needs three colours".into()));
                    }
                    axis_colors = Some([c[0], c[1], c[2]]);
                }
                other => return Err(bad(format!("unknown marker attribute {other:?}"))),
            }
        }
        let mut geometry = geometry.ok_or_else(|| bad("marker has no geometry".into()))?;
        if let (Geometry::Frame { axis_colors: slot, .. }, Some(c)) = (&mut geometry, axis_colors) {
            *slot = c;
        }
        markers.push(Marker {
            id: id.ok_or_else(|| bad("marker has no id".into()))?,
            layer,
            geometry,
            color,
            stiffness,
        });
    }
    Ok(MarkerLayout {
        kind: d.get("kind")?,
        bounds: Rect::new(b[0], b[1], b[2], b[3]),
        layer_separation: d.get("layer_separation")?,
        min_clearance: d.get("min_clearance")?,
        markers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, SensorVariant};

    fn square20() -> Rect {
        Rect::sized(20.0, 20.0)
    }

    #[test]
    fn uniform_grid_count() {
        let l = gen_dot_layout(
            square20(),
            Arrangement::Uniform { rows: 7, cols: 7 },
            0.5,
            Stiffness::Flexible,
            0,
            Rgb::WHITE,
        )
        .unwrap();
        assert_eq!(l.markers.len(), 49);
        let xs: std::collections::BTreeSet<u64> =
            l.markers.iter().map(|m| m.geometry.anchor().x.to_bits()).collect();
        assert_eq!(xs.len(), 7);
    }

    #[test]
    fn uniform_pitch_error() {
        let r = gen_dot_layout(
            square20(),
            Arrangement::Uniform { rows: 10, cols: 10 },
            1.0,
            Stiffness::Rigid,
            0,
            Rgb::WHITE,
        );
        assert!(matches!(r, Err(Error::Pitch(_))));
    }

    #[test]
    fn random_is_deterministic_and_spaced() {
        let arr = Arrangement::Random {
            count: 30,
            min_spacing: 1.5,
            seed: 42,
        };
        let a = gen_dot_layout(square20(), arr, 0.5, Stiffness::Rigid, 0, Rgb::WHITE).unwrap();
        let b = gen_dot_layout(square20(), arr, 0.5, Stiffness::Rigid, 0, Rgb::WHITE).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.markers.len(), 30);
        for (i, m) in a.markers.iter().enumerate() {
            for n in &a.markers[i + 1..] {
                assert!((m.geometry.anchor() - n.geometry.anchor()).norm() >= 1.5);
            }
        }
    }

    #[test]
    fn random_infeasible() {
        let arr = Arrangement::Random {
            count: 500,
            min_spacing: 3.0,
            seed: 1,
        };
        let r = gen_dot_layout(square20(), arr, 0.5, Stiffness::Rigid, 0, Rgb::WHITE);
        assert!(matches!(r, Err(Error::InfeasiblePacking(_))));
    }

    #[test]
    fn random_budget_exhaustion() {
        // Passes the area bound but cannot be packed by naive rejection.
        let arr = Arrangement::Random {
            count: 70,
            min_spacing: 2.2,
            seed: 7,
        };
        let r = gen_dot_layout(square20(), arr, 0.5, Stiffness::Rigid, 0, Rgb::WHITE);
        assert!(matches!(r, Err(Error::InfeasiblePacking(m)) if m.contains("after")));
    }

    #[test]
    fn double_layer_counts_colors_offsets() {
        let l = gen_double_layer(
            square20(),
            Arrangement::Uniform { rows: 5, cols: 5 },
            (2.0, 2.0),
            0.4,
            1.5,
            (Rgb::WHITE, Rgb::MAGENTA),
            Stiffness::Flexible,
        )
        .unwrap();
        assert_eq!(l.markers.len(), 50);
        assert_eq!(l.layer(0).count(), 25);
        assert_eq!(l.layer(1).count(), 25);
        assert!(l.layer(0).all(|m| m.color == Rgb::WHITE));
        assert!(l.layer(1).all(|m| m.color == Rgb::MAGENTA));
        for a in l.layer(0) {
            for b in l.layer(1) {
                assert!((a.geometry.anchor() - b.geometry.anchor()).norm() > 1e-6);
            }
        }
    }

    #[test]
    fn square_tiling_count() {
        let l = gen_voronoi(square20(), CellShape::Square, 5.0, Rgb::WHITE).unwrap();
        assert_eq!(l.markers.len(), 16);
    }

    #[test]
    fn voronoi_pitch_error() {
        assert!(gen_voronoi(square20(), CellShape::Hexagon, 11.0, Rgb::WHITE).is_err());
        assert!(gen_voronoi(square20(), CellShape::Hexagon, 0.0, Rgb::WHITE).is_err());
    }

    fn cell_polys(l: &MarkerLayout) -> Vec<Vec<P2>> {
        l.markers
            .iter()
            .map(|m| match &m.geometry {
                Geometry::Polygon { vertices } => vertices.clone(),
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn tilings_cover_bounds_without_overlap() {
        let bounds = Rect::new(1.0, 2.0, 19.0, 14.5);
        for cell in [CellShape::Triangle, CellShape::Square, CellShape::Hexagon] {
            let l = gen_voronoi(bounds, cell, 3.7, Rgb::WHITE).unwrap();
            let polys = cell_polys(&l);
            let total: f64 = polys.iter().map(|p| geom::polygon_area(p)).sum();
            assert!(
                (total - bounds.area()).abs() <= 1e-6 * bounds.area(),
                "{cell}: {total} vs {}",
                bounds.area()
            );
            for (i, a) in polys.iter().enumerate() {
                assert!(geom::is_convex(a), "{cell} cell {i} not convex");
                for b in &polys[i + 1..] {
                    let inter = geom::clip_convex(a, b);
                    let area = if inter.len() >= 3 { geom::polygon_area(&inter) } else { 0.0 };
                    assert!(area < 1e-6, "{cell}: overlap {area}");
                }
            }
        }
    }

    #[test]
    fn hexagon_interior_vertices_have_three_cells() {
        let bounds = square20();
        let l = gen_voronoi(bounds, CellShape::Hexagon, 4.0, Rgb::WHITE).unwrap();
        let mut incidence: std::collections::HashMap<(u64, u64), usize> = Default::default();
        for poly in cell_polys(&l) {
            for v in poly {
                *incidence.entry((v.x.to_bits(), v.y.to_bits())).or_default() += 1;
            }
        }
        let interior: Vec<usize> = incidence
            .iter()
            .filter(|((x, y), _)| {
                let p = P2::new(f64::from_bits(*x), f64::from_bits(*y));
                p.x > bounds.min.x + 1e-9 && p.x < bounds.max.x - 1e-9 && p.y > bounds.min.y + 1e-9 && p.y < bounds.max.y - 1e-9
            })
            .map(|(_, c)| *c)
            .collect();
        assert!(interior.len() > 10);
        assert!(interior.iter().all(|&c| c == 3), "{interior:?}");
    }

    #[test]
    fn coordinate_frames_orthonormal_and_upright() {
        let l = gen_coordinate_markers(square20(), 3, 3, 1.5, (Rgb::RED, Rgb::GREEN, Rgb::BLUE), Rgb::WHITE).unwrap();
        assert_eq!(l.markers.len(), 9);
        let mut tips = 0;
        for m in &l.markers {
            let Geometry::Frame { origin, tips: t, .. } = &m.geometry else { panic!() };
            tips += t.len();
            let legs: Vec<_> = t.iter().map(|p| p - origin).collect();
            for i in 0..3 {
                assert!((legs[i].norm() - 1.5).abs() < 1e-12);
                for j in i + 1..3 {
                    assert!(legs[i].dot(&legs[j]).abs() < 1e-9);
                }
            }
            assert!(legs[2].normalize().cross(&Vector3::z()).norm() < 1e-12);
        }
        assert_eq!(tips, 27);
    }

    #[test]
    fn layout_validation_cases() {
        let cfg = preset(SensorVariant::ViCTac);
        let layout = cfg.marker_layout().unwrap().unwrap();
        assert!(validate_layout(&layout, &cfg).is_empty());

        let mut thin = cfg.clone();
        thin.elastomer.thickness = 5.0;
        let mut deep = layout.clone();
        deep.layer_separation = 6.0;
        let v = validate_layout(&deep, &thin);
        assert_eq!(v.len(), 1, "{v:?}");

        let area = cfg.area_rect();
        let mut edge = layout.clone();
        edge.markers.truncate(1);
        edge.markers[0].geometry = Geometry::Disk {
            center: P2::new(area.min.x + 0.1, area.center().y),
            radius: 0.5,
        };
        let v = validate_layout(&edge, &cfg);
        assert!(v.iter().any(|v| v.message.contains("outside")), "{v:?}");
    }

    #[test]
    fn layout_text_round_trip() {
        let cfgs = [
            gen_voronoi(square20(), CellShape::Hexagon, 3.0, Rgb::WHITE).unwrap(),
            gen_coordinate_markers(square20(), 2, 2, 1.0, (Rgb::RED, Rgb::GREEN, Rgb::BLUE), Rgb::WHITE).unwrap(),
            gen_double_layer(
                square20(),
                Arrangement::Random {
                    count: 10,
                    min_spacing: 2.0,
                    seed: 3,
                },
                (0.0, 0.0),
                0.3,
                1.0,
                (Rgb::WHITE, Rgb::MAGENTA),
                Stiffness::Flexible,
            )
            .unwrap(),
        ];
        for l in cfgs {
            let text = layout_to_string(&l);
            let back = layout_from_str(&text).unwrap();
            assert_eq!(back, l);
            assert_eq!(layout_to_string(&back), text);
        }
    }
}
