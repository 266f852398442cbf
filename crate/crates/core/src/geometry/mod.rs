//! Continuous-curve machinery: poses, Dubins and Reeds-Shepp curves, hybrid
//! motion primitives and the arc+line trajectory constructor.

mod curve;
mod dubins;
mod pose;
mod primitives;
mod reeds_shepp;
mod trajectory;

pub use curve::{advance, CurvePath, CurveSegment, PathPoint, Steer};
pub use dubins::{dubins_candidates, dubins_distance, dubins_path, DubinsWord};
pub use pose::{angle_diff, discrete_curvature, heading_bin, normalize_angle, PoseSE2};
pub use primitives::{hybrid_primitives, min_turn_angle, MotionPrimitive, PrimitiveError};
pub use reeds_shepp::{reeds_shepp_candidates, reeds_shepp_distance, reeds_shepp_path};
pub use trajectory::{generate_trajectory, published_d_min, tangent_d_min, TrajectoryError, TrajectorySolution};
