//! Labeled object corpora: a synthetic generator of parametric household
//! shapes and an ingester for `<root>/<class>/<object>.{xyz,bin}` trees.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{io, normalize, PointCloud, Vec3};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusObject {
    pub id: String,
    pub super_class: u32,
    pub intra_class: u32,
    pub cloud: PointCloud,
}

/// Objects ordered by `(super_class, intra_class)`; labels are dense indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub class_names: Vec<String>,
    pub objects: Vec<CorpusObject>,
}

/// Super-class labels `K` and, per super-class, intra-class labels `M_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpace {
    pub super_classes: Vec<u32>,
    pub intra_classes: Vec<Vec<u32>>,
}

impl LabelSpace {
    pub fn num_super(&self) -> usize {
        self.super_classes.len()
    }

    pub fn num_intra(&self, super_class: u32) -> usize {
        self.intra_classes[super_class as usize].len()
    }

    pub fn total_objects(&self) -> usize {
        self.intra_classes.iter().map(Vec::len).sum()
    }

    /// Both attack levels need at least two candidates to choose between.
    pub fn validate(&self) -> Result<()> {
        if self.super_classes.len() < 2 {
            return Err(Error::InvalidLabels(format!(
                "{} super-classes, at least 2 required",
                self.super_classes.len()
            )));
        }
        for (k, m) in self.intra_classes.iter().enumerate() {
            if m.len() < 2 {
                return Err(Error::InvalidLabels(format!(
                    "super-class {k} has {} objects, at least 2 required",
                    m.len()
                )));
            }
        }
        Ok(())
    }
}

impl Corpus {
    pub fn label_space(&self) -> LabelSpace {
        let mut intra = vec![Vec::new(); self.class_names.len()];
        for o in &self.objects {
            intra[o.super_class as usize].push(o.intra_class);
        }
        LabelSpace { super_classes: (0..self.class_names.len() as u32).collect(), intra_classes: intra }
    }

    pub fn find(&self, id: &str) -> Option<&CorpusObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    /// Writes `<dir>/<class>/<stem>.xyz` so that [`ingest_directory`] reads the
    /// same corpus back.
    pub fn write(&self, dir: &Path) -> Result<()> {
        for o in &self.objects {
            let class = &self.class_names[o.super_class as usize];
            let stem = o.id.strip_prefix(&format!("{class}_")).unwrap_or(&o.id);
            io::write_cloud(&dir.join(class).join(format!("{stem}.xyz")), &o.cloud)?;
        }
        Ok(())
    }
}

/// Loads `<root>/<class>/<object>.{xyz,txt,bin}`. Classes and objects are
/// labeled in lexicographic order; every cloud is normalized.
pub fn ingest_directory(root: &Path) -> Result<Corpus> {
    let read_dir = |p: &Path| -> Result<Vec<std::path::PathBuf>> {
        let mut v: Vec<_> = fs::read_dir(p)
            .map_err(|e| Error::io(p, e))?
            .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(p, e)))
            .collect::<Result<_>>()?;
        v.sort();
        Ok(v)
    };
    let mut class_names = Vec::new();
    let mut objects = Vec::new();
    for class_dir in read_dir(root)?.into_iter().filter(|p| p.is_dir()) {
        let class = class_dir.file_name().unwrap().to_string_lossy().into_owned();
        let super_class = class_names.len() as u32;
        let mut intra = 0;
        for file in read_dir(&class_dir)? {
            let ext = file.extension().and_then(|e| e.to_str()).unwrap_or("");
            if !file.is_file() || !["xyz", "txt", "bin"].contains(&ext) {
                continue;
            }
            let raw = io::read_cloud(&file)?;
            let cloud = PointCloud::for_pipeline(raw.into_points())
                .and_then(|c| normalize(&c))
                .map_err(|e| Error::InvalidCloud(format!("{}: {e}", file.display())))?;
            let stem = file.file_stem().unwrap().to_string_lossy();
            objects.push(CorpusObject { id: format!("{class}_{stem}"), super_class, intra_class: intra, cloud });
            intra += 1;
        }
        class_names.push(class);
    }
    Ok(Corpus { class_names, objects })
}

/// Household shape families, in the order classes are assigned.
pub const SHAPE_FAMILIES: [&str; 10] =
    ["table", "chair", "lamp", "cabinet", "monitor", "sofa", "bench", "bed", "bookshelf", "bathtub"];

/// Generates `classes × objects_per_class` normalized clouds. Each class is
/// one parametric family; each object draws its own dimension vector.
pub fn generate_synthetic_corpus(classes: usize, objects_per_class: usize, points: usize, seed: u64) -> Result<Corpus> {
    if classes < 2 || classes > SHAPE_FAMILIES.len() {
        return Err(Error::InvalidConfig(format!(
            "synthetic corpus needs 2..={} classes, got {classes}",
            SHAPE_FAMILIES.len()
        )));
    }
    if objects_per_class < 2 {
        return Err(Error::InvalidConfig(format!("objects_per_class must be >= 2, got {objects_per_class}")));
    }
    if points < crate::geometry::MIN_PIPELINE_POINTS {
        return Err(Error::InvalidConfig(format!("points per cloud must be >= 4, got {points}")));
    }
    let mut objects = Vec::with_capacity(classes * objects_per_class);
    for (k, family) in SHAPE_FAMILIES.iter().take(classes).enumerate() {
        for m in 0..objects_per_class {
            let mut rng = seed::rng(seed::mix(&[seed, seed::domain::CORPUS, k as u64, m as u64]));
            let surfaces = family_surfaces(family, &mut rng);
            let raw = sample_surfaces(&surfaces, points, &mut rng);
            let cloud = normalize(&PointCloud::new(raw)?)?;
            objects.push(CorpusObject {
                id: format!("{family}_{m:02}"),
                super_class: k as u32,
                intra_class: m as u32,
                cloud,
            });
        }
    }
    Ok(Corpus { class_names: SHAPE_FAMILIES[..classes].iter().map(|s| s.to_string()).collect(), objects })
}

#[derive(Debug, Clone, Copy)]
enum Surface {
    /// Parallelogram `center + a·u + b·v`, `a, b ∈ [-1, 1]`.
    Rect { center: Vec3, u: Vec3, v: Vec3 },
    /// Vertical lateral surface of a frustum standing on `base`.
    Frustum { base: Vec3, r0: f64, r1: f64, height: f64 },
    /// Horizontal disc.
    Disc { center: Vec3, radius: f64 },
}

impl Surface {
    fn area(&self) -> f64 {
        match *self {
            Surface::Rect { u, v, .. } => 4.0 * u.cross(v).norm(),
            Surface::Frustum { r0, r1, height, .. } => {
                std::f64::consts::PI * (r0 + r1) * (height * height + (r0 - r1).powi(2)).sqrt()
            }
            Surface::Disc { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec3 {
        match *self {
            Surface::Rect { center, u, v } => {
                center + u * rng.random_range(-1.0..=1.0) + v * rng.random_range(-1.0..=1.0)
            }
            Surface::Frustum { base, r0, r1, height } => {
                let r_max = r0.max(r1);
                let t = loop {
                    let t: f64 = rng.random();
                    if rng.random::<f64>() * r_max <= r0 + (r1 - r0) * t {
                        break t;
                    }
                };
                let r = r0 + (r1 - r0) * t;
                let theta = rng.random::<f64>() * TAU;
                base + Vec3::new(r * theta.cos(), r * theta.sin(), t * height)
            }
            Surface::Disc { center, radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let theta = rng.random::<f64>() * TAU;
                center + Vec3::new(r * theta.cos(), r * theta.sin(), 0.0)
            }
        }
    }
}

/// Six faces of an axis-aligned cuboid given its min corner and size.
fn cuboid(out: &mut Vec<Surface>, min: Vec3, size: Vec3) {
    let h = size * 0.5;
    let c = min + h;
    let (ex, ey, ez) = (Vec3::new(h.x, 0.0, 0.0), Vec3::new(0.0, h.y, 0.0), Vec3::new(0.0, 0.0, h.z));
    for sign in [-1.0, 1.0] {
        out.push(Surface::Rect { center: c + ez * sign, u: ex, v: ey });
        out.push(Surface::Rect { center: c + ex * sign, u: ey, v: ez });
        out.push(Surface::Rect { center: c + ey * sign, u: ex, v: ez });
    }
}

/// Cuboid centered in x/y at the origin, resting on `z0`.
fn centered_cuboid(out: &mut Vec<Surface>, w: f64, d: f64, z0: f64, h: f64) {
    cuboid(out, Vec3::new(-w / 2.0, -d / 2.0, z0), Vec3::new(w, d, h));
}

fn legs(out: &mut Vec<Surface>, w: f64, d: f64, leg: f64, height: f64) {
    for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
        let x = sx * (w - leg) / 2.0;
        let y = sy * (d - leg) / 2.0;
        cuboid(out, Vec3::new(x - leg / 2.0, y - leg / 2.0, 0.0), Vec3::new(leg, leg, height));
    }
}

fn family_surfaces(family: &str, rng: &mut ChaCha8Rng) -> Vec<Surface> {
    let mut s = Vec::new();
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..=hi);
    match family {
        "table" => {
            let (w, d, h, top, leg) = (u(1.2, 1.8), u(0.6, 1.0), u(0.6, 0.8), u(0.03, 0.08), u(0.04, 0.09));
            centered_cuboid(&mut s, w, d, h, top);
            legs(&mut s, w, d, leg, h);
        }
        "chair" => {
            let (w, d, h, back, leg) = (u(0.4, 0.6), u(0.4, 0.6), u(0.38, 0.5), u(0.35, 0.75), u(0.03, 0.06));
            centered_cuboid(&mut s, w, d, h, 0.05);
            cuboid(&mut s, Vec3::new(-w / 2.0, d / 2.0 - 0.05, h + 0.05), Vec3::new(w, 0.05, back));
            legs(&mut s, w, d, leg, h);
        }
        "lamp" => {
            let (base_r, pole_h, shade_r0, shade_r1, shade_h) =
                (u(0.15, 0.3), u(0.7, 1.4), u(0.22, 0.4), u(0.08, 0.18), u(0.18, 0.35));
            s.push(Surface::Disc { center: Vec3::ZERO, radius: base_r });
            s.push(Surface::Disc { center: Vec3::new(0.0, 0.0, 0.04), radius: base_r });
            s.push(Surface::Frustum { base: Vec3::ZERO, r0: base_r, r1: base_r, height: 0.04 });
            s.push(Surface::Frustum { base: Vec3::new(0.0, 0.0, 0.04), r0: 0.02, r1: 0.02, height: pole_h });
            s.push(Surface::Frustum { base: Vec3::new(0.0, 0.0, pole_h), r0: shade_r0, r1: shade_r1, height: shade_h });
        }
        "cabinet" => {
            let (w, d, h, plinth) = (u(0.8, 1.2), u(0.45, 0.6), u(0.5, 0.75), u(0.04, 0.1));
            centered_cuboid(&mut s, w - 0.06, d - 0.06, 0.0, plinth);
            centered_cuboid(&mut s, w, d, plinth, h);
        }
        "monitor" => {
            let (w, h, lift, base_w, base_d) = (u(0.6, 1.1), u(0.35, 0.65), u(0.08, 0.2), u(0.3, 0.5), u(0.22, 0.35));
            centered_cuboid(&mut s, base_w, base_d, 0.0, 0.025);
            cuboid(&mut s, Vec3::new(-0.03, -0.02, 0.025), Vec3::new(0.06, 0.04, lift));
            cuboid(&mut s, Vec3::new(-w / 2.0, -0.03, 0.025 + lift), Vec3::new(w, 0.04, h));
        }
        "sofa" => {
            let (w, d, seat_h, back_h, arm) = (u(1.4, 2.3), u(0.7, 1.0), u(0.35, 0.5), u(0.3, 0.5), u(0.12, 0.25));
            centered_cuboid(&mut s, w, d, 0.0, seat_h);
            cuboid(&mut s, Vec3::new(-w / 2.0, d / 2.0 - 0.18, seat_h), Vec3::new(w, 0.18, back_h));
            for sx in [-1.0, 1.0] {
                let x0 = if sx < 0.0 { -w / 2.0 } else { w / 2.0 - arm };
                cuboid(&mut s, Vec3::new(x0, -d / 2.0, seat_h), Vec3::new(arm, d, back_h * 0.5));
            }
        }
        "bench" => {
            let (w, d, h, side) = (u(1.1, 2.0), u(0.28, 0.45), u(0.4, 0.5), u(0.03, 0.06));
            centered_cuboid(&mut s, w, d, h, 0.05);
            for sx in [-1.0, 1.0] {
                let x0 = sx * (w / 2.0 - 0.1) - side / 2.0;
                cuboid(&mut s, Vec3::new(x0, -d / 2.0, 0.0), Vec3::new(side, d, h));
            }
        }
        "bed" => {
            let (w, l, h, head) = (u(1.0, 2.0), u(1.9, 2.3), u(0.3, 0.55), u(0.3, 0.7));
            cuboid(&mut s, Vec3::new(-w / 2.0, -l / 2.0, 0.0), Vec3::new(w, l, h));
            cuboid(&mut s, Vec3::new(-w / 2.0, l / 2.0, 0.0), Vec3::new(w, 0.06, h + head));
        }
        "bookshelf" => {
            let (w, d, h) = (u(0.6, 1.2), u(0.25, 0.4), u(1.0, 2.0));
            let shelves = 3 + (u(0.0, 2.99) as usize);
            let (hx, hy, hz) =
                (Vec3::new(w / 2.0, 0.0, 0.0), Vec3::new(0.0, d / 2.0, 0.0), Vec3::new(0.0, 0.0, h / 2.0));
            for sign in [-1.0, 1.0] {
                s.push(Surface::Rect { center: hx * sign + hz, u: hy, v: hz });
            }
            for i in 0..=shelves {
                let z = h * i as f64 / shelves as f64;
                s.push(Surface::Rect { center: Vec3::new(0.0, 0.0, z), u: hx, v: hy });
            }
        }
        "bathtub" => {
            let (w, l, h) = (u(0.65, 0.9), u(1.4, 1.9), u(0.4, 0.65));
            let (hx, hy, hz) =
                (Vec3::new(w / 2.0, 0.0, 0.0), Vec3::new(0.0, l / 2.0, 0.0), Vec3::new(0.0, 0.0, h / 2.0));
            s.push(Surface::Rect { center: Vec3::ZERO, u: hx, v: hy });
            s.push(Surface::Rect { center: Vec3::new(0.0, 0.0, 0.08), u: hx * 0.85, v: hy * 0.9 });
            for sign in [-1.0, 1.0] {
                s.push(Surface::Rect { center: hx * sign + hz, u: hy, v: hz });
                s.push(Surface::Rect { center: hy * sign + hz, u: hx, v: hz });
                s.push(Surface::Rect {
                    center: hx * (0.85 * sign) + hz + Vec3::new(0.0, 0.0, 0.04),
                    u: hy * 0.9,
                    v: hz * 0.85,
                });
            }
        }
        other => unreachable!("unknown shape family {other}"),
    }
    s
}

fn sample_surfaces(surfaces: &[Surface], n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let cumulative: Vec<f64> = surfaces
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s.area();
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("every family has surfaces");
    (0..n)
        .map(|_| {
            let pick = rng.random::<f64>() * total;
            let i = cumulative.partition_point(|&c| c <= pick).min(surfaces.len() - 1);
            surfaces[i].sample(rng)
        })
        .collect()
}
