use serde::{Deserialize, Serialize};

use super::{PointCloud, Vec3};

/// Axis-aligned bounding box with `min <= max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// Returns `None` unless `min <= max` on every axis.
    pub fn new(min: Vec3, max: Vec3) -> Option<Self> {
        (min.x <= max.x && min.y <= max.y && min.z <= max.z).then_some(Self { min, max })
    }

    pub fn of(cloud: &PointCloud) -> Self {
        let first = cloud.points()[0];
        let (min, max) = cloud.points().iter().fold((first, first), |(lo, hi), &p| (lo.min(p), hi.max(p)));
        Self { min, max }
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x * e.y * e.z
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (self.min.x..=self.max.x).contains(&p.x)
            && (self.min.y..=self.max.y).contains(&p.y)
            && (self.min.z..=self.max.z).contains(&p.z)
    }

    pub fn intersection(&self, o: &Aabb) -> Option<Aabb> {
        Aabb::new(self.min.max(o.min), self.max.min(o.max))
    }

    /// Smallest box containing both.
    pub fn hull(&self, o: &Aabb) -> Aabb {
        Aabb { min: self.min.min(o.min), max: self.max.max(o.max) }
    }

    pub fn translated(&self, by: Vec3) -> Aabb {
        Aabb { min: self.min + by, max: self.max + by }
    }
}

/// Intersection-over-union of two boxes.
///
/// Two zero-volume boxes score 1 when identical and 0 otherwise.
pub fn iou(a: &Aabb, b: &Aabb) -> f64 {
    let (va, vb) = (a.volume(), b.volume());
    if va == 0.0 && vb == 0.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    let inter = a.intersection(b).map_or(0.0, |i| i.volume());
    let union = va + vb - inter;
    (inter / union).clamp(0.0, 1.0)
}
