//! One-to-one marker correspondence and displacement overlays.

use crate::color::Rgb;
use crate::error::{Error, Result};
use crate::geom::{V2, P2};
use crate::render::TactileImage;

use super::detect::{DetectedShape, Detection};

/// Displacements at or below this magnitude (px) are not drawn.
pub const OVERLAY_EPSILON_PX: f64 = 0.75;
const OVERLAY_RADIUS_PX: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    pub ref_index: usize,
    pub cur_index: usize,
    pub reference: P2,
    pub current: P2,
    /// Apparent size ratio current / reference; 1 for shapes without a size cue.
    pub stretch: f64,
}

impl Correspondence {
    pub fn displacement(&self) -> V2 {
        self.current - self.reference
    }
}

fn sq(a: P2, b: P2) -> f64 {
    (a - b).norm_squared()
}

/// Total squared distance of an assignment `perm[i]` = cur index of ref `i`.
pub fn assignment_cost(a: &[P2], b: &[P2], perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| sq(a[i], b[j])).sum()
}

/// Exhaustive search over all permutations (test oracle; n ≤ 9 or so).
pub fn optimal_assignment_bruteforce(a: &[P2], b: &[P2]) -> (Vec<usize>, f64) {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (perm.clone(), assignment_cost(a, b, &perm));
    // Heap's algorithm.
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let cost = assignment_cost(a, b, &perm);
            if cost < best.1 {
                best = (perm.clone(), cost);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Greedy mutual nearest neighbours: repeatedly pair every unmatched
/// reference with its nearest unmatched current point when that choice is
/// reciprocated. The globally closest pair is always mutual, so each round
/// makes progress.
fn greedy_mutual(a: &[P2], b: &[P2]) -> Vec<usize> {
    let n = a.len();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let nearest = |p: P2, pts: &[P2], taken: &dyn Fn(usize) -> bool| {
        (0..pts.len())
            .filter(|&k| !taken(k))
            .min_by(|&x, &y| sq(p, pts[x]).total_cmp(&sq(p, pts[y])).then(x.cmp(&y)))
    };
    loop {
        let mut progressed = false;
        let open: Vec<usize> = (0..n).filter(|&i| perm[i] == usize::MAX).collect();
        if open.is_empty() {
            break;
        }
        for &i in &open {
            if perm[i] != usize::MAX {
                continue;
            }
            let Some(j) = nearest(a[i], b, &|k| used[k]) else { continue };
            let back = nearest(b[j], a, &|k| perm[k] != usize::MAX);
            if back == Some(i) {
                perm[i] = j;
                used[j] = true;
                progressed = true;
            }
        }
        if !progressed {
            // Unreachable in exact arithmetic; fall back to pairing in order.
            let rest: Vec<usize> = (0..n).filter(|&i| perm[i] == usize::MAX).collect();
            for i in rest {
                let j = (0..n).find(|&k| !used[k]).expect("equal sizes");
                perm[i] = j;
                used[j] = true;
            }
        }
    }
    perm
}

/// Cancels negative cycles in the exchange graph until none is left, which
/// certifies optimality of the assignment. Edge `i → j` means "reference `i`
/// takes the point currently held by `j`".
fn cancel_cycles(a: &[P2], b: &[P2], perm: &mut [usize]) {
    let n = a.len();
    if n < 2 {
        return;
    }
    let scale = a.iter().zip(perm.iter()).map(|(p, &j)| sq(*p, b[j])).sum::<f64>() + 1.0;
    let tol = 1e-12 * scale;
    loop {
        let w = |i: usize, j: usize| sq(a[i], b[perm[j]]) - sq(a[i], b[perm[i]]);
        let mut dist = vec![0.0f64; n];
        let mut pred = vec![usize::MAX; n];
        let mut last = usize::MAX;
        for _ in 0..n {
            last = usize::MAX;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let nd = dist[i] + w(i, j);
                    if nd < dist[j] - tol {
                        dist[j] = nd;
                        pred[j] = i;
                        last = j;
                    }
                }
            }
            if last == usize::MAX {
                return;
            }
        }
        // Walk back n steps to land inside the cycle.
        let mut v = last;
        for _ in 0..n {
            if pred[v] == usize::MAX {
                return;
            }
            v = pred[v];
        }
        let mut cycle = vec![v];
        let mut u = pred[v];
        while u != v {
            if u == usize::MAX || cycle.len() > n {
                return;
            }
            cycle.push(u);
            u = pred[u];
        }
        cycle.reverse();
        // cycle[k] → cycle[k+1]: cycle[k] takes what cycle[k+1] holds.
        let gain: f64 = (0..cycle.len())
            .map(|k| w(cycle[k], cycle[(k + 1) % cycle.len()]))
            .sum();
        if gain >= -tol {
            return;
        }
        let held: Vec<usize> = cycle.iter().map(|&i| perm[i]).collect();
        for k in 0..cycle.len() {
            perm[cycle[k]] = held[(k + 1) % cycle.len()];
        }
    }
}

/// Minimum total squared distance assignment of points.
pub fn assign_points(a: &[P2], b: &[P2]) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(Error::Cardinality(a.len(), b.len()));
    }
    let mut perm = greedy_mutual(a, b);
    cancel_cycles(a, b, &mut perm);
    Ok(perm)
}

/// Matches detections one-to-one, minimising the total squared centroid
/// distance. Matching is done within each colour class; classes must have
/// equal counts on both sides.
pub fn match_markers(reference: &[Detection], current: &[Detection]) -> Result<Vec<Correspondence>> {
    if reference.len() != current.len() {
        return Err(Error::Cardinality(reference.len(), current.len()));
    }
    let mut classes: Vec<usize> = reference.iter().map(|d| d.color_class).collect();
    classes.sort_unstable();
    classes.dedup();
    let mut out = Vec::with_capacity(reference.len());
    for class in classes {
        let ri: Vec<usize> = (0..reference.len()).filter(|&k| reference[k].color_class == class).collect();
        let ci: Vec<usize> = (0..current.len()).filter(|&k| current[k].color_class == class).collect();
        if ri.len() != ci.len() {
            return Err(Error::Cardinality(ri.len(), ci.len()));
        }
        let a: Vec<P2> = ri.iter().map(|&k| reference[k].centroid).collect();
        let b: Vec<P2> = ci.iter().map(|&k| current[k].centroid).collect();
        let perm = assign_points(&a, &b)?;
        for (i, &j) in perm.iter().enumerate() {
            let (r, c) = (&reference[ri[i]], &current[ci[j]]);
            out.push(Correspondence {
                ref_index: ri[i],
                cur_index: ci[j],
                reference: r.centroid,
                current: c.centroid,
                stretch: stretch(r, c),
            });
        }
    }
    out.sort_by_key(|c| c.ref_index);
    Ok(out)
}

fn stretch(r: &Detection, c: &Detection) -> f64 {
    match (&r.shape, &c.shape) {
        (DetectedShape::Disk { radius: a }, DetectedShape::Disk { radius: b }) if *a > 0.0 && *b > 0.0 => b / a,
        (DetectedShape::Polygon(_), DetectedShape::Polygon(_)) if r.mass > 0.0 && c.mass > 0.0 => {
            (c.mass / r.mass).sqrt()
        }
        _ => 1.0,
    }
}

/// Grey copy of `cur_img` with a red dot at each moved marker's reference
/// position and a blue dot at its current position.
pub fn displacement_overlay(ref_img: &TactileImage, cur_img: &TactileImage, correspondences: &[Correspondence]) -> Result<TactileImage> {
    ref_img.same_size(cur_img)?;
    let mut out = cur_img.clone();
    for p in &mut out.pixels {
        *p = Rgb::gray(p.luma());
    }
    let moved: Vec<&Correspondence> = correspondences
        .iter()
        .filter(|c| c.displacement().norm() > OVERLAY_EPSILON_PX)
        .collect();
    for c in &moved {
        stamp(&mut out, c.reference, Rgb::RED);
    }
    for c in &moved {
        stamp(&mut out, c.current, Rgb::BLUE);
    }
    Ok(out)
}

fn stamp(img: &mut TactileImage, c: P2, color: Rgb) {
    let r = OVERLAY_RADIUS_PX;
    let i0 = (c.x - r).floor().max(0.0) as usize;
    let j0 = (c.y - r).floor().max(0.0) as usize;
    let i1 = ((c.x + r).ceil().max(0.0) as usize).min(img.width);
    let j1 = ((c.y + r).ceil().max(0.0) as usize).min(img.height);
    for j in j0..j1 {
        for i in i0..i1 {
            let d = P2::new(i as f64 + 0.5, j as f64 + 0.5) - c;
            if d.norm() <= r {
                img.set(i, j, color);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(x: f64, y: f64) -> Detection {
        Detection {
            centroid: P2::new(x, y),
            shape: DetectedShape::Disk { radius: 4.0 },
            color_class: 0,
            layer_guess: None,
            mass: 50.0,
        }
    }

    #[test]
    fn identity_and_rigid_shift() {
        let r: Vec<Detection> = (0..9).map(|k| det(20.0 * (k % 3) as f64, 20.0 * (k / 3) as f64)).collect();
        let m = match_markers(&r, &r).unwrap();
        assert!(m.iter().all(|c| c.ref_index == c.cur_index && c.displacement().norm() == 0.0));
        let cur: Vec<Detection> = r.iter().rev().map(|d| det(d.centroid.x + 3.0, d.centroid.y + 3.0)).collect();
        let m = match_markers(&r, &cur).unwrap();
        for c in m {
            assert_eq!(c.displacement(), V2::new(3.0, 3.0));
        }
    }

    #[test]
    fn cardinality_error() {
        assert!(matches!(
            match_markers(&[det(0.0, 0.0)], &[]),
            Err(Error::Cardinality(1, 0))
        ));
    }

    #[test]
    fn greedy_trap_is_fixed_by_refinement() {
        // Greedy pairs (0,0)↔(1,0) first, leaving a long edge; optimum crosses.
        let a = [P2::new(0.0, 0.0), P2::new(2.0, 0.0)];
        let b = [P2::new(1.0, 0.0), P2::new(-1.1, 0.0)];
        let perm = assign_points(&a, &b).unwrap();
        let (_, best) = optimal_assignment_bruteforce(&a, &b);
        assert!((assignment_cost(&a, &b, &perm) - best).abs() < 1e-12);
    }

    #[test]
    fn overlay_of_static_frame_is_plain_grey() {
        let img = TactileImage::filled(30, 30, Rgb::new(0.2, 0.4, 0.6), crate::model::Mechanism::Mdm);
        let c = Correspondence {
            ref_index: 0,
            cur_index: 0,
            reference: P2::new(10.0, 10.0),
            current: P2::new(10.5, 10.0),
            stretch: 1.0,
        };
        let o = displacement_overlay(&img, &img, &[c]).unwrap();
        let g = Rgb::gray(Rgb::new(0.2, 0.4, 0.6).luma());
        assert!(o.pixels.iter().all(|&p| p == g));
    }
}
