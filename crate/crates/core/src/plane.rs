//! Horizontal plane extraction by RANSAC and the raw plane-anchoring error
//! terms that feed the static and dynamic anchoring utilities.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{chamfer, hull_area_2d, Point2, PointCloud, Vec3};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RansacParams {
    pub iterations: usize,
    /// Maximum point-to-plane distance for an inlier, in normalized units.
    pub threshold: f64,
    pub min_inlier_fraction: f64,
    /// Half-angle of the cone around the vertical axis a normal must fall in.
    pub horizontality_deg: f64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self { iterations: 500, threshold: 0.02, min_inlier_fraction: 0.05, horizontality_deg: 15.0 }
    }
}

impl RansacParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidRansacParams(m.into()));
        if self.iterations < 1 {
            return bad("iterations must be >= 1");
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return bad("threshold must be > 0");
        }
        if !(0.0..=1.0).contains(&self.min_inlier_fraction) {
            return bad("min_inlier_fraction must lie in [0, 1]");
        }
        if !(0.0..=90.0).contains(&self.horizontality_deg) {
            return bad("horizontality_deg must lie in [0, 90]");
        }
        Ok(())
    }
}

/// The fitted points of a plane together with its geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanePatch {
    pub inliers: PointCloud,
    /// Unit normal with non-negative vertical component.
    pub unit_normal: Vec3,
    /// Perpendicular vector from the origin to the plane.
    pub origin_offset: Vec3,
    /// Area of the 2D convex hull of the inliers within the plane.
    pub hull_area: f64,
}

impl PlanePatch {
    /// Builds a patch for the plane `{p : normal·p = distance}`.
    pub fn new(inliers: PointCloud, normal: Vec3, distance: f64) -> Result<Self> {
        let mut n = normal.normalized().ok_or_else(|| Error::InvalidCloud("plane normal has zero length".into()))?;
        let mut d = distance;
        if n.z < 0.0 {
            n = -n;
            d = -d;
        }
        let (u, v) = plane_basis(n);
        let projected: Vec<Point2> = inliers.points().iter().map(|&p| Point2::new(p.dot(u), p.dot(v))).collect();
        Ok(Self { hull_area: hull_area_2d(&projected), origin_offset: n * d, unit_normal: n, inliers })
    }

    /// Builds a patch whose plane passes through the inlier centroid.
    pub fn through_centroid(inliers: PointCloud, normal: Vec3) -> Result<Self> {
        let n = normal.normalized().ok_or_else(|| Error::InvalidCloud("plane normal has zero length".into()))?;
        let d = n.dot(inliers.centroid());
        Self::new(inliers, n, d)
    }

    /// Signed distance of the plane from the origin along the normal.
    pub fn distance(&self) -> f64 {
        self.unit_normal.dot(self.origin_offset)
    }
}

/// Orthonormal in-plane axes for a unit normal.
fn plane_basis(n: Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let u = n.cross(helper).normalized().expect("helper is never parallel to n");
    (u, n.cross(u))
}

fn count_inliers(points: &[Vec3], n: Vec3, d: f64, threshold: f64) -> usize {
    points.iter().filter(|p| (n.dot(**p) - d).abs() <= threshold).count()
}

/// Finds the horizontal plane with the most inliers.
///
/// Each iteration draws a 3-point minimal sample from a seeded stream, so the
/// same `(cloud, params, seed)` always evaluates the same candidates. Candidates
/// whose normal lies outside the horizontality cone are discarded.
pub fn ransac_horizontal_plane(cloud: &PointCloud, params: &RansacParams, seed: u64) -> Result<PlanePatch> {
    params.validate()?;
    let points = cloud.points();
    let required = (params.min_inlier_fraction * points.len() as f64).ceil() as usize;
    if points.len() < 3 {
        return Err(Error::NoHorizontalPlane { best: 0, required });
    }
    let min_vertical = params.horizontality_deg.to_radians().cos();
    let mut rng = seed::rng(seed);
    let mut best: Option<(usize, Vec3, f64)> = None;

    for _ in 0..params.iterations {
        let sample = index::sample(&mut rng, points.len(), 3);
        let (a, b, c) = (points[sample.index(0)], points[sample.index(1)], points[sample.index(2)]);
        let Some(mut n) = (b - a).cross(c - a).normalized() else { continue };
        if n.z < 0.0 {
            n = -n;
        }
        if n.z < min_vertical {
            continue;
        }
        let d = n.dot(a);
        let count = count_inliers(points, n, d, params.threshold);
        if best.is_none_or(|(top, _, _)| count > top) {
            best = Some((count, n, d));
        }
    }

    let Some((count, n, d)) = best else {
        return Err(Error::NoHorizontalPlane { best: 0, required });
    };
    if (count as f64) < params.min_inlier_fraction * points.len() as f64 || count < 3 {
        return Err(Error::NoHorizontalPlane { best: count, required });
    }
    let inliers: Vec<Vec3> = points.iter().copied().filter(|p| (n.dot(*p) - d).abs() <= params.threshold).collect();
    PlanePatch::new(PointCloud::new(inliers)?, n, d)
}

/// Raw, un-normalized discrepancies between an original and a regenerated plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneErrorComponents {
    /// `|1 - n_p · n_q|`, evaluated as `|n_p - n_q|² / 2` so identical normals
    /// give exactly zero.
    pub angle_term: f64,
    /// `|r_p - r_q|`
    pub offset_term: f64,
    /// `|A(p) - A(q)|`
    pub area_term: f64,
    /// Chamfer distance between the two inlier sets.
    pub cd_term: f64,
}

impl PlaneErrorComponents {
    pub const ZERO: Self = Self { angle_term: 0.0, offset_term: 0.0, area_term: 0.0, cd_term: 0.0 };

    pub fn as_array(&self) -> [f64; 4] {
        [self.angle_term, self.offset_term, self.area_term, self.cd_term]
    }
}

pub fn plane_error_components(p: &PlanePatch, q: &PlanePatch) -> PlaneErrorComponents {
    PlaneErrorComponents {
        angle_term: 0.5 * p.unit_normal.distance_squared(q.unit_normal),
        offset_term: (p.origin_offset - q.origin_offset).norm(),
        area_term: (p.hull_area - q.hull_area).abs(),
        cd_term: chamfer(&p.inliers, &q.inliers),
    }
}
