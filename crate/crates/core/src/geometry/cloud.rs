use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::error::{Error, Result};

/// Smallest cloud accepted at pipeline ingestion.
pub const MIN_PIPELINE_POINTS: usize = 4;

/// An ordered list of finite 3D points describing one object scan.
///
/// Order carries no meaning for any metric, but it is preserved by every
/// transformation so outputs stay reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec3>", into = "Vec<Vec3>")]
pub struct PointCloud {
    points: Vec<Vec3>,
}

impl PointCloud {
    /// Builds a cloud from at least one finite point.
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCloud("cloud has no points".into()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidCloud(format!("point {i} is not finite")));
        }
        Ok(Self { points })
    }

    /// Builds a cloud that satisfies the ingestion contract (≥ 4 points).
    pub fn for_pipeline(points: Vec<Vec3>) -> Result<Self> {
        if points.len() < MIN_PIPELINE_POINTS {
            return Err(Error::InvalidCloud(format!(
                "{} points, at least {MIN_PIPELINE_POINTS} required",
                points.len()
            )));
        }
        Self::new(points)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    pub fn centroid(&self) -> Vec3 {
        let mut sum = Vec3::ZERO;
        for &p in &self.points {
            sum += p;
        }
        sum / self.points.len() as f64
    }

    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Applies `f` to every point, keeping order.
    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> Result<Self> {
        Self::new(self.points.iter().map(|&p| f(p)).collect())
    }
}

impl TryFrom<Vec<Vec3>> for PointCloud {
    type Error = Error;

    fn try_from(points: Vec<Vec3>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<PointCloud> for Vec<Vec3> {
    fn from(c: PointCloud) -> Self {
        c.points
    }
}

/// Centers the cloud on its centroid and scales it so the farthest point
/// lies on the unit sphere.
pub fn normalize(cloud: &PointCloud) -> Result<PointCloud> {
    let c = cloud.centroid();
    let centered: Vec<Vec3> = cloud.points().iter().map(|&p| p - c).collect();
    let radius = centered.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::DegenerateCloud("all points coincide".into()));
    }
    PointCloud::new(centered.into_iter().map(|p| p / radius).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[[f64; 3]]) -> PointCloud {
        PointCloud::new(points.iter().map(|&a| a.into()).collect()).unwrap()
    }

    #[test]
    fn normalize_two_points() {
        let n = normalize(&cloud(&[[1.0, 1.0, 1.0], [3.0, 1.0, 1.0]])).unwrap();
        assert_eq!(n.points(), &[Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]);
    }

    #[test]
    fn normalize_rejects_coincident_points() {
        let err = normalize(&cloud(&[[5.0, 5.0, 5.0]; 4])).unwrap_err();
        assert!(matches!(err, Error::DegenerateCloud(_)));
    }

    #[test]
    fn normalize_is_idempotent() {
        let c = cloud(&[[0.1, 2.0, -3.0], [4.0, 0.5, 0.0], [-1.0, -1.0, 2.5], [0.0, 3.0, 1.0]]);
        let once = normalize(&c).unwrap();
        let twice = normalize(&once).unwrap();
        for (a, b) in once.points().iter().zip(twice.points()) {
            assert!(a.distance(*b) <= 1e-12);
        }
        assert!(once.centroid().norm() <= 1e-12);
        assert!((once.max_radius() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rejects_non_finite_and_small_pipeline_clouds() {
        assert!(PointCloud::new(vec![Vec3::new(f64::NAN, 0.0, 0.0)]).is_err());
        assert!(PointCloud::new(vec![]).is_err());
        assert!(PointCloud::for_pipeline(vec![Vec3::ZERO; 3]).is_err());
        assert!(PointCloud::for_pipeline(vec![Vec3::ZERO; 4]).is_ok());
    }
}
