//! Planar geometry helpers and the pixel/millimetre raster frame.

use nalgebra::{Point2, Vector2};

pub type P2 = Point2<f64>;
pub type V2 = Vector2<f64>;

/// Axis-aligned rectangle in millimetres, `min` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: P2,
    pub max: P2,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect {
            min: P2::new(x0.min(x1), y0.min(y1)),
            max: P2::new(x0.max(x1), y0.max(y1)),
        }
    }

    /// Rectangle with its lower corner at the origin.
    pub fn sized(w: f64, h: f64) -> Self {
        Rect::new(0.0, 0.0, w, h)
    }

    /// `w × h` rectangle centred inside `self`.
    pub fn centered(&self, w: f64, h: f64) -> Self {
        let c = self.center();
        Rect::new(c.x - w / 2.0, c.y - h / 2.0, c.x + w / 2.0, c.y + h / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> P2 {
        P2::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    pub fn contains(&self, p: P2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// True when the closed disk lies inside the rectangle.
    pub fn contains_disk(&self, c: P2, r: f64) -> bool {
        c.x - r >= self.min.x && c.x + r <= self.max.x && c.y - r >= self.min.y && c.y + r <= self.max.y
    }

    pub fn intersects_disk(&self, c: P2, r: f64) -> bool {
        let dx = (self.min.x - c.x).max(0.0).max(c.x - self.max.x);
        let dy = (self.min.y - c.y).max(0.0).max(c.y - self.max.y);
        dx * dx + dy * dy < r * r
    }

    pub fn corners(&self) -> [P2; 4] {
        [
            self.min,
            P2::new(self.max.x, self.min.y),
            self.max,
            P2::new(self.min.x, self.max.y),
        ]
    }
}

/// Signed polygon area (positive for counter-clockwise in a y-up frame).
pub fn signed_area(poly: &[P2]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

pub fn polygon_area(poly: &[P2]) -> f64 {
    signed_area(poly).abs()
}

pub fn polygon_centroid(poly: &[P2]) -> P2 {
    let a = signed_area(poly);
    if a.abs() < 1e-15 {
        let n = poly.len().max(1) as f64;
        let s = poly.iter().fold(V2::zeros(), |s, p| s + p.coords);
        return P2::from(s / n);
    }
    let n = poly.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let cross = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    P2::new(cx / (6.0 * a), cy / (6.0 * a))
}

/// Strict convexity check with collinear vertices tolerated.
pub fn is_convex(poly: &[P2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0.0_f64;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        let cross = (b - a).perp(&(c - b));
        if cross.abs() < 1e-12 {
            continue;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    sign != 0.0
}

/// Intersection of the segment `a→b` with the vertical or horizontal line
/// `axis = value`. Endpoints are ordered canonically so the same edge traversed
/// in either direction produces a bitwise-identical point.
fn cut(a: P2, b: P2, axis: usize, value: f64) -> P2 {
    let (p, q) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
    let t = (value - p[axis]) / (q[axis] - p[axis]);
    let mut out = P2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y));
    out[axis] = value;
    out
}

/// Sutherland–Hodgman clip of a polygon against an axis-aligned rectangle.
pub fn clip_to_rect(poly: &[P2], rect: &Rect) -> Vec<P2> {
    let planes: [(usize, f64, bool); 4] = [
        (0, rect.min.x, true),
        (0, rect.max.x, false),
        (1, rect.min.y, true),
        (1, rect.max.y, false),
    ];
    let mut out: Vec<P2> = poly.to_vec();
    for (axis, value, keep_greater) in planes {
        if out.is_empty() {
            break;
        }
        let inside = |p: &P2| {
            if keep_greater {
                p[axis] >= value
            } else {
                p[axis] <= value
            }
        };
        let input = std::mem::take(&mut out);
        let n = input.len();
        for i in 0..n {
            let cur = input[i];
            let prev = input[(i + n - 1) % n];
            match (inside(&prev), inside(&cur)) {
                (true, true) => out.push(cur),
                (true, false) => out.push(cut(prev, cur, axis, value)),
                (false, true) => {
                    out.push(cut(prev, cur, axis, value));
                    out.push(cur);
                }
                (false, false) => {}
            }
        }
    }
    dedup_ring(&mut out);
    out
}

/// Intersection of two convex polygons (Sutherland–Hodgman against each edge of `clip`).
pub fn clip_convex(subject: &[P2], clip: &[P2]) -> Vec<P2> {
    let orient = signed_area(clip).signum();
    let mut out = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let side = |p: &P2| orient * (b - a).perp(&(p - a));
        let input = std::mem::take(&mut out);
        let m = input.len();
        for j in 0..m {
            let cur = input[j];
            let prev = input[(j + m - 1) % m];
            let (sp, sc) = (side(&prev), side(&cur));
            let hit = |p: P2, q: P2, sp: f64, sq: f64| p + (q - p) * (sp / (sp - sq));
            match (sp >= 0.0, sc >= 0.0) {
                (true, true) => out.push(cur),
                (true, false) => out.push(hit(prev, cur, sp, sc)),
                (false, true) => {
                    out.push(hit(prev, cur, sp, sc));
                    out.push(cur);
                }
                (false, false) => {}
            }
        }
    }
    out
}

fn dedup_ring(poly: &mut Vec<P2>) {
    poly.dedup();
    while poly.len() > 1 && poly.first() == poly.last() {
        poly.pop();
    }
}

/// Distance from `p` to segment `a–b`.
pub fn segment_distance(p: P2, a: P2, b: P2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Maps between the camera raster (pixel indices) and sensing-area millimetres.
///
/// The raster is centred on the sensing area. Pixel `(i, j)` covers
/// `[origin.x + i·s, origin.x + (i+1)·s) × [origin.y + j·s, …)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterFrame {
    pub width: usize,
    pub height: usize,
    pub mm_per_px: f64,
    pub origin: P2,
}

impl RasterFrame {
    pub fn centered_on(area: &Rect, width: usize, height: usize, mm_per_px: f64) -> Self {
        let c = area.center();
        RasterFrame {
            width,
            height,
            mm_per_px,
            origin: P2::new(
                c.x - 0.5 * width as f64 * mm_per_px,
                c.y - 0.5 * height as f64 * mm_per_px,
            ),
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Continuous pixel coordinates (pixel centres at `i + 0.5`) of a mm point.
    pub fn to_px(&self, p: P2) -> P2 {
        P2::new(
            (p.x - self.origin.x) / self.mm_per_px,
            (p.y - self.origin.y) / self.mm_per_px,
        )
    }

    pub fn to_mm(&self, px: P2) -> P2 {
        P2::new(
            self.origin.x + px.x * self.mm_per_px,
            self.origin.y + px.y * self.mm_per_px,
        )
    }

    pub fn pixel_center_mm(&self, i: usize, j: usize) -> P2 {
        self.to_mm(P2::new(i as f64 + 0.5, j as f64 + 0.5))
    }

    /// Inclusive-exclusive pixel index ranges overlapping a mm box, clamped to the raster.
    pub fn pixel_span(&self, min: P2, max: P2) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let a = self.to_px(min);
        let b = self.to_px(max);
        let clampi = |v: f64, n: usize| v.floor().clamp(0.0, n as f64) as usize;
        (
            clampi(a.x, self.width)..clampi(b.x + 1.0, self.width),
            clampi(a.y, self.height)..clampi(b.y + 1.0, self.height),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_square_partially_outside() {
        let sq = [
            P2::new(-1.0, -1.0),
            P2::new(1.0, -1.0),
            P2::new(1.0, 1.0),
            P2::new(-1.0, 1.0),
        ];
        let out = clip_to_rect(&sq, &Rect::sized(5.0, 5.0));
        assert!((polygon_area(&out) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convexity() {
        let tri = [P2::new(0.0, 0.0), P2::new(1.0, 0.0), P2::new(0.0, 1.0)];
        assert!(is_convex(&tri));
        let dart = [
            P2::new(0.0, 0.0),
            P2::new(2.0, 1.0),
            P2::new(0.0, 2.0),
            P2::new(0.5, 1.0),
        ];
        assert!(!is_convex(&dart));
    }

    #[test]
    fn raster_round_trip() {
        let f = RasterFrame::centered_on(&Rect::sized(34.0, 27.0), 480, 480, 0.1);
        let p = P2::new(3.3, 20.1);
        let q = f.to_mm(f.to_px(p));
        assert!((p - q).norm() < 1e-12);
        let c = f.to_px(P2::new(17.0, 13.5));
        assert!((c.x - 240.0).abs() < 1e-9 && (c.y - 240.0).abs() < 1e-9);
    }
}
