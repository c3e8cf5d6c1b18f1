use pcpriv_core::geometry::{
    chamfer, chamfer_brute_force, hull_area_2d, iou, normalize, Aabb, Point2, PointCloud, Vec3,
};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Vec3> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn cloud(max: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(point(), 4..max).prop_map(|p| PointCloud::new(p).unwrap())
}

fn aabb() -> impl Strategy<Value = Aabb> {
    (point(), 0.0..1.5f64, 0.0..1.5f64, 0.0..1.5f64)
        .prop_map(|(min, dx, dy, dz)| Aabb::new(min, min + Vec3::new(dx, dy, dz)).unwrap())
}

proptest! {
    #[test]
    fn chamfer_is_symmetric(a in cloud(64), b in cloud(64)) {
        prop_assert_eq!(chamfer(&a, &b), chamfer(&b, &a));
    }

    #[test]
    fn chamfer_matches_double_loop(a in cloud(96), b in cloud(96)) {
        prop_assert_eq!(chamfer(&a, &b).to_bits(), chamfer_brute_force(&a, &b).to_bits());
    }

    #[test]
    fn chamfer_of_cloud_with_itself_is_zero(a in cloud(64)) {
        prop_assert_eq!(chamfer(&a, &a), 0.0);
    }

    #[test]
    fn iou_is_bounded_and_symmetric(a in aabb(), b in aabb()) {
        let v = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, iou(&b, &a));
    }

    #[test]
    fn iou_with_itself_is_one(a in aabb()) {
        prop_assume!(a.volume() > 0.0);
        prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent(a in cloud(64)) {
        prop_assume!(a.max_radius() > 1e-6);
        let once = normalize(&a).unwrap();
        let twice = normalize(&once).unwrap();
        for (p, q) in once.points().iter().zip(twice.points()) {
            prop_assert!(p.distance(*q) <= 1e-12);
        }
        prop_assert!((once.max_radius() - 1.0).abs() < 1e-12);
        prop_assert!(once.centroid().norm() < 1e-12);
    }

    #[test]
    fn hull_area_is_invariant_under_point_order(
        pts in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3..40),
        shift in 0usize..40,
    ) {
        let a: Vec<Point2> = pts.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let mut b = a.clone();
        b.rotate_left(shift % a.len());
        b.reverse();
        prop_assert!((hull_area_2d(&a) - hull_area_2d(&b)).abs() < 1e-12);
    }
}

#[test]
fn hull_area_examples() {
    let square = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)];
    assert!((hull_area_2d(&square) - 1.0).abs() < 1e-15);
    let tri = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
    assert!((hull_area_2d(&tri) - 0.5).abs() < 1e-15);
    let line: Vec<Point2> = (0..5).map(|i| Point2::new(i as f64, 2.0 * i as f64)).collect();
    assert_eq!(hull_area_2d(&line), 0.0);
}

#[test]
fn degenerate_boxes() {
    let p = Vec3::new(0.5, 0.5, 0.5);
    let flat = Aabb::new(p, p).unwrap();
    assert_eq!(iou(&flat, &flat), 1.0);
    let other = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0)).unwrap();
    assert_eq!(iou(&flat, &other), 0.0);
}
