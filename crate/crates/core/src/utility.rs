//! Utility of a regeneration relative to its original, and the area under
//! privacy-utility curves.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{iou, Aabb, PointCloud};
use crate::plane::PlaneErrorComponents;
use crate::privacy::{read_csv, write_csv};

/// IoU of the axis-aligned boxes of the two clouds.
pub fn q1_bbox(original: &PointCloud, regen: &PointCloud) -> f64 {
    iou(&Aabb::of(original), &Aabb::of(regen))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    /// Maps into `[0, 1]`; a zero-width range maps everything to 0.
    pub fn normalize(&self, x: f64) -> f64 {
        let span = self.max - self.min;
        if span <= 0.0 {
            0.0
        } else {
            ((x - self.min) / span).clamp(0.0, 1.0)
        }
    }
}

/// Per-component extremes of plane errors over a population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMaxStats {
    pub angle: Range,
    pub offset: Range,
    pub area: Range,
    pub cd: Range,
    pub population: usize,
}

impl MinMaxStats {
    pub fn ranges(&self) -> [Range; 4] {
        [self.angle, self.offset, self.area, self.cd]
    }

    pub fn normalize(&self, c: &PlaneErrorComponents) -> [f64; 4] {
        let raw = c.as_array();
        let r = self.ranges();
        std::array::from_fn(|i| r[i].normalize(raw[i]))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

pub fn fit_minmax<'a>(population: impl IntoIterator<Item = &'a PlaneErrorComponents>) -> Result<MinMaxStats> {
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    let mut n = 0;
    for c in population {
        for (i, v) in c.as_array().into_iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::InvalidConfig("min-max population is empty".into()));
    }
    let r = |i: usize| Range { min: lo[i], max: hi[i] };
    Ok(MinMaxStats { angle: r(0), offset: r(1), area: r(2), cd: r(3), population: n })
}

/// `(Q2 static, Q2 dynamic)`.
pub fn q2(components: &PlaneErrorComponents, stats: &MinMaxStats) -> (f64, f64) {
    let [a, o, s, c] = stats.normalize(components);
    let err_static = 0.5 * a + 0.5 * o;
    let err_dynamic = 0.25 * (a + o + s + c);
    (1.0 - err_static, 1.0 - err_dynamic)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityRecord {
    pub query_id: String,
    pub l: f64,
    pub epoch: u32,
    pub q1: f64,
    pub q2_static: f64,
    pub q2_dynamic: f64,
    pub chamfer: f64,
}

pub fn write_utility_records(path: &Path, records: &[UtilityRecord]) -> Result<()> {
    write_csv(path, records)
}

pub fn read_utility_records(path: &Path) -> Result<Vec<UtilityRecord>> {
    read_csv(path)
}

/// Trapezoidal area under privacy over utility. Points are sorted by
/// utility and privacy is averaged over repeated utility values.
pub fn auc_privacy_utility(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidCurve(format!("{} points, at least 2 required", points.len())));
    }
    if let Some(p) = points.iter().find(|(u, p)| !u.is_finite() || !p.is_finite()) {
        return Err(Error::InvalidCurve(format!("non-finite point {p:?}")));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let u = sorted[i].0;
        let group: Vec<f64> = sorted[i..].iter().take_while(|p| p.0 == u).map(|p| p.1).collect();
        i += group.len();
        merged.push((u, group.iter().sum::<f64>() / group.len() as f64));
    }
    if merged.len() < 2 {
        return Err(Error::DegenerateCurve);
    }
    Ok(merged.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum())
}

/// Rank correlation with average ranks for ties. `None` when either side
/// is constant or the lengths differ.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}
