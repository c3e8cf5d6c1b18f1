use super::{KdTree, PointCloud, Vec3};

fn directed(from: &[Vec3], to: &KdTree) -> f64 {
    from.iter().map(|&p| to.nearest_distance_squared(p)).sum()
}

/// Chamfer distance: the sum over both clouds of squared distances to the
/// nearest point of the other cloud. No square root, no averaging.
pub fn chamfer(a: &PointCloud, b: &PointCloud) -> f64 {
    let ta = KdTree::new(a.points());
    let tb = KdTree::new(b.points());
    directed(a.points(), &tb) + directed(b.points(), &ta)
}

/// Reference O(n·m) double loop. Summation order matches [`chamfer`], so
/// the two agree bit for bit.
pub fn chamfer_brute_force(a: &PointCloud, b: &PointCloud) -> f64 {
    let one_way = |from: &[Vec3], to: &[Vec3]| -> f64 {
        from.iter().map(|&p| to.iter().map(|&q| p.distance_squared(q)).fold(f64::INFINITY, f64::min)).sum()
    };
    one_way(a.points(), b.points()) + one_way(b.points(), a.points())
}
