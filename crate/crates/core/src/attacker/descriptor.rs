use serde::{Deserialize, Serialize};

use crate::geometry::PointCloud;

/// Normalized histogram of pairwise point distances (a D2 shape distribution).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor(pub Vec<f64>);

impl Descriptor {
    pub fn bins(&self) -> usize {
        self.0.len()
    }

    pub fn distance(&self, other: &Descriptor) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// Componentwise mean of equally sized descriptors.
    pub fn mean<'a>(items: impl IntoIterator<Item = &'a Descriptor>) -> Option<Descriptor> {
        let mut iter = items.into_iter();
        let mut acc = iter.next()?.0.clone();
        let mut n = 1.0;
        for d in iter {
            for (a, v) in acc.iter_mut().zip(&d.0) {
                *a += v;
            }
            n += 1.0;
        }
        acc.iter_mut().for_each(|a| *a /= n);
        Some(Descriptor(acc))
    }
}

/// Exhaustive pairwise-distance histogram over `[0, max_dist]`; distances at
/// or beyond `max_dist` fall in the last bin.
pub fn d2_descriptor(cloud: &PointCloud, bins: usize, max_dist: f64) -> Descriptor {
    let pts = cloud.points();
    let mut counts = vec![0u64; bins];
    let scale = bins as f64 / max_dist;
    for (i, &p) in pts.iter().enumerate() {
        for &q in &pts[i + 1..] {
            let bin = ((p.distance(q) * scale) as usize).min(bins - 1);
            counts[bin] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        let mut h = vec![0.0; bins];
        h[0] = 1.0;
        return Descriptor(h);
    }
    Descriptor(counts.into_iter().map(|c| c as f64 / total as f64).collect())
}
