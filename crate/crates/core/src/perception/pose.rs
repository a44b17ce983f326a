//! Local 6D pose of a three-pointer coordinate marker.

use nalgebra::{Matrix2x3, Rotation3, Vector3};

use crate::error::{Error, Result};
use crate::geom::{RasterFrame, P2};
use crate::markers::P3;
use crate::render::CAMERA_DISTANCE_MM;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseGeometry {
    pub pointer_len_mm: f64,
    pub frame: RasterFrame,
    /// Camera distance of the weak-perspective model.
    pub camera_distance_mm: f64,
}

impl PoseGeometry {
    pub fn new(pointer_len_mm: f64, frame: RasterFrame) -> Self {
        PoseGeometry {
            pointer_len_mm,
            frame,
            camera_distance_mm: CAMERA_DISTANCE_MM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose6d {
    /// Origin position in the sensing-area frame, mm (z away from the camera).
    pub translation: Vector3<f64>,
    pub rotation: Rotation3<f64>,
}

impl Pose6d {
    /// `(roll, pitch, yaw)` in radians.
    pub fn euler(&self) -> (f64, f64, f64) {
        self.rotation.euler_angles()
    }
}

/// Projects a pose back to `[origin, x tip, y tip, z tip]` pixel positions.
pub fn project_pose6d(pose: &Pose6d, geom: &PoseGeometry) -> [P2; 4] {
    let t = pose.translation;
    let origin = P3::new(t.x, t.y, t.z);
    let tips = [0, 1, 2].map(|k| origin + pose.rotation * (Vector3::ith(k, 1.0) * geom.pointer_len_mm));
    crate::render::project_frame_with(&geom.frame, &origin, &tips, geom.camera_distance_mm)
}

/// Recovers a marker's pose from its projected origin and pointer tips.
///
/// Weak perspective: pointer offsets are `m·L·(first two rows of R)` with
/// `m = D / (D + z)`. The scale comes from the Frobenius norm of the 2×3
/// offset matrix, the first two rotation rows from its closest matrix with
/// orthonormal rows (polar factor), and the third row from their cross product.
pub fn estimate_marker_pose6d(points: &[P2; 4], geom: &PoseGeometry) -> Result<Pose6d> {
    let l = geom.pointer_len_mm;
    if !(l > 0.0) {
        return Err(Error::Parameter("pointer length must be positive".into()));
    }
    let s = geom.frame.mm_per_px;
    let o = points[0];
    let mut m = Matrix2x3::zeros();
    for k in 0..3 {
        let d = (points[k + 1] - o) * s / l;
        m[(0, k)] = d.x;
        m[(1, k)] = d.y;
    }
    let scale = (m.norm_squared() / 2.0).sqrt();
    if scale <= 0.0 {
        return Err(Error::Degenerate("all pointers project onto the origin".into()));
    }
    let svd = m.svd(true, true);
    let (sv_max, sv_min) = (svd.singular_values.max(), svd.singular_values.min());
    if sv_min <= 1e-6 * sv_max {
        return Err(Error::Degenerate("projected axes are parallel".into()));
    }
    let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
        return Err(Error::Degenerate("decomposition failed".into()));
    };
    let rows = u * vt;
    let r1 = Vector3::new(rows[(0, 0)], rows[(0, 1)], rows[(0, 2)]);
    let r2 = Vector3::new(rows[(1, 0)], rows[(1, 1)], rows[(1, 2)]);
    let r3 = r1.cross(&r2);
    let mat = nalgebra::Matrix3::from_rows(&[r1.transpose(), r2.transpose(), r3.transpose()]);
    let rotation = Rotation3::from_matrix_unchecked(mat);
    let z = geom.camera_distance_mm * (1.0 / scale - 1.0);
    let xy = geom.frame.to_mm(o);
    Ok(Pose6d {
        translation: Vector3::new(xy.x, xy.y, z),
        rotation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;

    fn geom() -> PoseGeometry {
        PoseGeometry::new(1.5, RasterFrame::centered_on(&Rect::sized(20.0, 20.0), 200, 200, 0.1))
    }

    #[test]
    fn rest_pose_is_identity() {
        let g = geom();
        let pose = Pose6d {
            translation: Vector3::new(10.0, 10.0, 0.0),
            rotation: Rotation3::identity(),
        };
        let p = project_pose6d(&pose, &g);
        let back = estimate_marker_pose6d(&p, &g).unwrap();
        assert!(back.rotation.angle() < 1e-9);
        assert!((back.translation - pose.translation).norm() < 1e-9);
    }

    #[test]
    fn parallel_axes_are_degenerate() {
        let g = geom();
        let o = P2::new(100.0, 100.0);
        let p = [o, P2::new(110.0, 100.0), P2::new(120.0, 100.0), P2::new(105.0, 100.0)];
        assert!(matches!(estimate_marker_pose6d(&p, &g), Err(Error::Degenerate(_))));
    }
}
