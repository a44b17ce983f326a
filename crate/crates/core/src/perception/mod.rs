//! Recovering contact information from rendered tactile images.

mod classify;
mod detect;
mod features;
mod intensity;
mod matching;
mod pose;

pub use classify::{accuracy, confusion_matrix, KnnModel};
pub use detect::{detect_markers, DetectedShape, Detection, DETECTION_THRESHOLD};
pub use features::{extract_features, texture_features, FeatureInput, FEATURE_LEN, TEXTURE_FEATURE_LEN};
pub use intensity::{estimate_depth_from_intensity, segment_contact_tir, DepthEstimate, Mask};
pub use matching::{
    assign_points, assignment_cost, displacement_overlay, match_markers, optimal_assignment_bruteforce, Correspondence,
    OVERLAY_EPSILON_PX,
};
pub use pose::{estimate_marker_pose6d, project_pose6d, Pose6d, PoseGeometry};
