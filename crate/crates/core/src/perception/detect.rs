//! Colour-class blob detection.

use std::collections::VecDeque;

use crate::color::Rgb;
use crate::geom::P2;
use crate::markers::LayoutKind;
use crate::render::TactileImage;

/// Membership weight above which a pixel seeds a component.
pub const DETECTION_THRESHOLD: f64 = 0.5;
/// Components are grown by this many pixels before taking the weighted centroid,
/// so antialiased rims contribute.
const GROW_PX: usize = 2;
/// Components smaller than this are treated as speckle.
const MIN_AREA_PX: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum DetectedShape {
    /// Radius of the disk with the same weighted area.
    Disk { radius: f64 },
    /// Convex outline of a tessellation cell interior.
    Polygon(Vec<P2>),
    /// `[origin, x tip, y tip, z tip]`; a tip hidden under the origin is
    /// reported at the origin.
    Pointers([P2; 4]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Pixel coordinates (pixel centres at `i + 0.5`).
    pub centroid: P2,
    pub shape: DetectedShape,
    /// Index into the expected colour list.
    pub color_class: usize,
    pub layer_guess: Option<usize>,
    /// Total membership weight (≈ area in px).
    pub mass: f64,
}

impl Detection {
    pub fn radius(&self) -> Option<f64> {
        match self.shape {
            DetectedShape::Disk { radius } => Some(radius),
            _ => None,
        }
    }
}

fn median_color(img: &TactileImage) -> Rgb {
    let mut ch = [Vec::new(), Vec::new(), Vec::new()];
    for p in &img.pixels {
        for (k, v) in p.channels().into_iter().enumerate() {
            ch[k].push(v);
        }
    }
    let med = |v: &mut Vec<f64>| {
        let mid = v.len() / 2;
        *v.select_nth_unstable_by(mid, f64::total_cmp).1
    };
    Rgb::new(med(&mut ch[0]), med(&mut ch[1]), med(&mut ch[2]))
}

/// Membership of every pixel in colour class `c` against background `bg`.
fn weights(img: &TactileImage, c: Rgb, bg: Rgb) -> Vec<f64> {
    let span = c.dist(bg);
    if span < 1e-9 {
        return vec![0.0; img.pixels.len()];
    }
    img.pixels
        .iter()
        .map(|p| (1.0 - p.dist(c) / span).clamp(0.0, 1.0))
        .collect()
}

/// 4-connected components of `mask`; returns a label map (0 = none) and the
/// pixel lists.
fn components(mask: &[bool], w: usize, h: usize) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut label = vec![0usize; w * h];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask[start] || label[start] != 0 {
            continue;
        }
        let id = comps.len() + 1;
        let mut pix = Vec::new();
        label[start] = id;
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            pix.push(k);
            let (i, j) = (k % w, k / w);
            let mut visit = |n: usize| {
                if mask[n] && label[n] == 0 {
                    label[n] = id;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < w {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - w);
            }
            if j + 1 < h {
                visit(k + w);
            }
        }
        comps.push(pix);
    }
    (label, comps)
}

struct Blob {
    centroid: P2,
    mass: f64,
    pixels: Vec<usize>,
}

/// Weighted blobs of one colour class.
fn blobs(img: &TactileImage, wts: &[f64]) -> Vec<Blob> {
    let (w, h) = (img.width, img.height);
    let mask: Vec<bool> = wts.iter().map(|&v| v > DETECTION_THRESHOLD).collect();
    let (label, comps) = components(&mask, w, h);
    let mut out = Vec::new();
    for (idx, pix) in comps.into_iter().enumerate() {
        if pix.len() < MIN_AREA_PX {
            continue;
        }
        let id = idx + 1;
        let (mut i0, mut j0, mut i1, mut j1) = (usize::MAX, usize::MAX, 0, 0);
        for &k in &pix {
            i0 = i0.min(k % w);
            i1 = i1.max(k % w);
            j0 = j0.min(k / w);
            j1 = j1.max(k / w);
        }
        let (i0, j0) = (i0.saturating_sub(GROW_PX), j0.saturating_sub(GROW_PX));
        let (i1, j1) = ((i1 + GROW_PX).min(w - 1), (j1 + GROW_PX).min(h - 1));
        let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let k = j * w + i;
                if label[k] != 0 && label[k] != id {
                    continue;
                }
                // Only pixels within GROW_PX (Chebyshev) of the component.
                let near = label[k] == id || {
                    let ja = j.saturating_sub(GROW_PX);
                    let jb = (j + GROW_PX).min(h - 1);
                    let ia = i.saturating_sub(GROW_PX);
                    let ib = (i + GROW_PX).min(w - 1);
                    (ja..=jb).any(|jj| (ia..=ib).any(|ii| label[jj * w + ii] == id))
                };
                if !near {
                    continue;
                }
                let v = wts[k];
                sx += v * (i as f64 + 0.5);
                sy += v * (j as f64 + 0.5);
                sw += v;
            }
        }
        if sw > 0.0 {
            out.push(Blob {
                centroid: P2::new(sx / sw, sy / sw),
                mass: sw,
                pixels: pix,
            });
        }
    }
    out
}

fn sort_row_major(v: &mut [Detection]) {
    v.sort_by(|a, b| {
        a.centroid
            .y
            .total_cmp(&b.centroid.y)
            .then(a.centroid.x.total_cmp(&b.centroid.x))
            .then(a.color_class.cmp(&b.color_class))
    });
}

/// Detects markers of the given colour classes.
///
/// The background is the per-channel median of the image. A pixel's
/// membership in class `c` is `1 − |p − c| / |c − bg|` clamped to [0, 1];
/// components above [`DETECTION_THRESHOLD`] are grown by two pixels and
/// reduced to membership-weighted centroids.
///
/// * `Dot` / `DoubleLayer`: one detection per blob per colour. For double
///   layers the colours are expected deepest layer first, and the class index
///   doubles as the layer guess.
/// * `Voronoi`: `expected_colors[0]` is the edge colour; detections are the
///   enclosed cell interiors (cells touching the image border are dropped).
/// * `Coordinate`: `expected_colors` are `[x, y, z, origin]`; every origin dot
///   is grouped with its nearest tip of each axis colour.
pub fn detect_markers(img: &TactileImage, kind: LayoutKind, expected_colors: &[Rgb]) -> Vec<Detection> {
    if img.pixels.is_empty() || expected_colors.is_empty() {
        return Vec::new();
    }
    let bg = median_color(img);
    let mut out = match kind {
        LayoutKind::Dot | LayoutKind::DoubleLayer => {
            let mut v = Vec::new();
            for (class, &c) in expected_colors.iter().enumerate() {
                for b in blobs(img, &weights(img, c, bg)) {
                    v.push(Detection {
                        centroid: b.centroid,
                        shape: DetectedShape::Disk {
                            radius: (b.mass / std::f64::consts::PI).sqrt(),
                        },
                        color_class: class,
                        layer_guess: (kind == LayoutKind::DoubleLayer).then_some(class),
                        mass: b.mass,
                    });
                }
            }
            v
        }
        LayoutKind::Voronoi => detect_cells(img, expected_colors[0], bg),
        LayoutKind::Coordinate => detect_frames(img, expected_colors, bg),
    };
    sort_row_major(&mut out);
    out
}

fn detect_cells(img: &TactileImage, edge: Rgb, bg: Rgb) -> Vec<Detection> {
    let (w, h) = (img.width, img.height);
    let wts = weights(img, edge, bg);
    let interior: Vec<bool> = wts.iter().map(|&v| v <= DETECTION_THRESHOLD).collect();
    let (_, comps) = components(&interior, w, h);
    let mut out = Vec::new();
    for pix in comps {
        if pix.len() < MIN_AREA_PX {
            continue;
        }
        let touches = pix
            .iter()
            .any(|&k| k % w == 0 || k % w == w - 1 || k / w == 0 || k / w == h - 1);
        if touches {
            continue;
        }
        let n = pix.len() as f64;
        let (sx, sy) = pix.iter().fold((0.0, 0.0), |(x, y), &k| {
            (x + (k % w) as f64 + 0.5, y + (k / w) as f64 + 0.5)
        });
        let hull = convex_hull(
            pix.iter()
                .flat_map(|&k| {
                    let (i, j) = ((k % w) as f64, (k / w) as f64);
                    [P2::new(i, j), P2::new(i + 1.0, j), P2::new(i, j + 1.0), P2::new(i + 1.0, j + 1.0)]
                })
                .collect(),
        );
        out.push(Detection {
            centroid: P2::new(sx / n, sy / n),
            shape: DetectedShape::Polygon(hull),
            color_class: 0,
            layer_guess: None,
            mass: n,
        });
    }
    out
}

/// Monotone-chain hull, counter-clockwise in image coordinates.
fn convex_hull(mut pts: Vec<P2>) -> Vec<P2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: P2, a: P2, b: P2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<P2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &P2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn detect_frames(img: &TactileImage, colors: &[Rgb], bg: Rgb) -> Vec<Detection> {
    if colors.len() < 4 {
        return Vec::new();
    }
    let tips: Vec<Vec<Blob>> = (0..3).map(|k| blobs(img, &weights(img, colors[k], bg))).collect();
    let origins = blobs(img, &weights(img, colors[3], bg));
    // Tips are claimed by the nearest origin only.
    let nearest_origin = |p: P2| {
        origins
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.centroid - p).norm().total_cmp(&(b.1.centroid - p).norm()))
            .map(|(k, _)| k)
    };
    let mut out = Vec::new();
    for (oi, o) in origins.iter().enumerate() {
        let mut ends = [o.centroid; 4];
        for (axis, blobs) in tips.iter().enumerate() {
            let best = blobs
                .iter()
                .filter(|b| nearest_origin(b.centroid) == Some(oi))
                .min_by(|a, b| (a.centroid - o.centroid).norm().total_cmp(&(b.centroid - o.centroid).norm()));
            if let Some(b) = best {
                ends[axis + 1] = b.centroid;
            }
        }
        let _ = &o.pixels;
        out.push(Detection {
            centroid: o.centroid,
            shape: DetectedShape::Pointers(ends),
            color_class: 3,
            layer_guess: None,
            mass: o.mass,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, Mechanism, SensorVariant};
    use crate::render::render_mdm;

    #[test]
    fn uniform_image_has_no_detections() {
        let img = TactileImage::filled(40, 40, Rgb::gray(0.3), Mechanism::Mdm);
        assert!(detect_markers(&img, LayoutKind::Dot, &[Rgb::WHITE]).is_empty());
    }

    #[test]
    fn ctac_grid_detected_at_projected_centres() {
        let cfg = preset(SensorVariant::CTac);
        let layout = cfg.marker_layout().unwrap().unwrap();
        let img = render_mdm(&layout, &cfg, None).unwrap();
        let det = detect_markers(&img, LayoutKind::Dot, &[Rgb::WHITE]);
        assert_eq!(det.len(), 49);
        let frame = cfg.raster();
        for m in &layout.markers {
            let p = frame.to_px(m.geometry.anchor());
            let best = det.iter().map(|d| (d.centroid - p).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 0.5, "{best}");
        }
    }

    #[test]
    fn double_layer_partitioned_by_colour() {
        let cfg = preset(SensorVariant::ViCTac);
        let layout = cfg.marker_layout().unwrap().unwrap();
        let img = render_mdm(&layout, &cfg, None).unwrap();
        let colors = cfg.markers.unwrap().colors;
        let det = detect_markers(&img, LayoutKind::DoubleLayer, &colors[..2]);
        for layer in 0..2 {
            let n = det.iter().filter(|d| d.color_class == layer).count();
            assert_eq!(n, layout.layer(layer).count());
        }
        assert!(det.iter().all(|d| d.layer_guess == Some(d.color_class)));
    }

    #[test]
    fn hull_of_square() {
        let h = convex_hull(vec![
            P2::new(0.0, 0.0),
            P2::new(1.0, 0.0),
            P2::new(0.5, 0.5),
            P2::new(1.0, 1.0),
            P2::new(0.0, 1.0),
        ]);
        assert_eq!(h.len(), 4);
    }
}
