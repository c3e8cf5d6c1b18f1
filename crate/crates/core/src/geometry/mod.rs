//! Point-cloud representation and the numeric substrate shared by every
//! metric: normalization, bounding boxes, Chamfer distance and 2D hull area.

mod aabb;
mod chamfer;
mod cloud;
mod hull;
pub mod io;
mod kdtree;
mod vec3;

pub use aabb::{iou, Aabb};
pub use chamfer::{chamfer, chamfer_brute_force};
pub use cloud::{normalize, PointCloud, MIN_PIPELINE_POINTS};
pub use hull::{convex_hull_2d, hull_area_2d, Point2};
pub use kdtree::KdTree;
pub use vec3::Vec3;
