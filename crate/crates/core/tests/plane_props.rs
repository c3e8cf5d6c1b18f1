use pcpriv_core::geometry::{PointCloud, Vec3};
use pcpriv_core::plane::{plane_error_components, ransac_horizontal_plane, PlanePatch, RansacParams};
use pcpriv_core::Error;
use proptest::prelude::*;
use rand::Rng;

/// A noisy horizontal slab plus uniform clutter.
fn scene(seed: u64, height: f64, noise: f64) -> PointCloud {
    let mut rng = pcpriv_core::seed::rng(seed);
    let mut pts = Vec::new();
    for _ in 0..300 {
        let (x, y) = (rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6));
        pts.push(Vec3::new(x, y, height + rng.random_range(-noise..=noise)));
    }
    for _ in 0..200 {
        pts.push(Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    }
    PointCloud::new(pts).unwrap()
}

fn inlier_count(cloud: &PointCloud, params: &RansacParams, seed: u64) -> usize {
    match ransac_horizontal_plane(cloud, params, seed) {
        Ok(p) => p.inliers.len(),
        Err(Error::NoHorizontalPlane { best, .. }) => best,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn patch_invariants(seed in any::<u64>(), h in -0.8..0.8f64) {
        let cloud = scene(seed, h, 0.01);
        let params = RansacParams::default();
        let p = ransac_horizontal_plane(&cloud, &params, seed).unwrap();
        prop_assert!((p.unit_normal.norm() - 1.0).abs() <= 1e-9);
        prop_assert!(p.unit_normal.z >= 0.0);
        prop_assert!(p.unit_normal.cross(p.origin_offset).norm() <= 1e-9 * p.origin_offset.norm().max(1.0));
        for q in p.inliers.points() {
            prop_assert!((p.unit_normal.dot(*q) - p.distance()).abs() <= params.threshold + 1e-12);
        }
    }

    #[test]
    fn inliers_shrink_with_threshold(seed in any::<u64>(), t in 0.002..0.05f64, f in 0.1..1.0f64) {
        let cloud = scene(seed, 0.2, 0.02);
        let wide = RansacParams { threshold: t, ..Default::default() };
        let narrow = RansacParams { threshold: t * f, ..Default::default() };
        prop_assert!(inlier_count(&cloud, &narrow, seed) <= inlier_count(&cloud, &wide, seed));
    }

    #[test]
    fn ransac_is_deterministic(seed in any::<u64>()) {
        let cloud = scene(seed, -0.1, 0.01);
        let params = RansacParams::default();
        prop_assert_eq!(
            ransac_horizontal_plane(&cloud, &params, seed).unwrap(),
            ransac_horizontal_plane(&cloud, &params, seed).unwrap()
        );
    }

    #[test]
    fn error_components(seed in any::<u64>(), ax in -1.0..1.0f64, ay in -1.0..1.0f64, az in -1.0..1.0f64) {
        let cloud = scene(seed, 0.0, 0.01);
        let p = ransac_horizontal_plane(&cloud, &RansacParams::default(), seed).unwrap();
        prop_assert_eq!(plane_error_components(&p, &p).as_array(), [0.0; 4]);
        let n = Vec3::new(ax, ay, az);
        prop_assume!(n.norm() > 1e-3);
        let q = PlanePatch::through_centroid(p.inliers.clone(), n).unwrap();
        let c = plane_error_components(&p, &q);
        prop_assert!((0.0..=2.0).contains(&c.angle_term));
        prop_assert!(c.as_array().iter().all(|v| *v >= 0.0));
    }
}

fn flat_patch() -> PlanePatch {
    let pts = (0..100).map(|i| Vec3::new((i % 10) as f64 * 0.1, (i / 10) as f64 * 0.1, 0.3)).collect();
    PlanePatch::new(PointCloud::new(pts).unwrap(), Vec3::UNIT_Z, 0.3).unwrap()
}

#[test]
fn translated_plane_reports_offset_only() {
    let p = flat_patch();
    let moved = p.inliers.map(|v| v + Vec3::UNIT_Z * 0.2).unwrap();
    let q = PlanePatch::new(moved, Vec3::UNIT_Z, 0.5).unwrap();
    let c = plane_error_components(&p, &q);
    assert_eq!(c.angle_term, 0.0);
    assert!((c.offset_term - 0.2).abs() < 1e-12);
    assert!(c.area_term < 1e-12);
}

#[test]
fn perpendicular_normals_give_unit_angle_term() {
    let p = flat_patch();
    let q = PlanePatch::through_centroid(p.inliers.clone(), Vec3::new(1.0, 0.0, 0.0)).unwrap();
    assert!((plane_error_components(&p, &q).angle_term - 1.0).abs() < 1e-12);
}
