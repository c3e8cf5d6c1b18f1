use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean and population standard deviation of one metric within one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStat {
    pub group: Vec<String>,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
}

pub type Metric<'a, R> = (&'a str, &'a dyn Fn(&R) -> f64);

/// Groups `rows` by `key` (groups ordered by key) and summarizes each metric.
pub fn aggregate<R, K: Ord + Clone + ToStrings>(
    rows: &[R],
    key: impl Fn(&R) -> K,
    metrics: &[Metric<'_, R>],
) -> Vec<GroupStat> {
    let mut groups: BTreeMap<K, Vec<&R>> = BTreeMap::new();
    for r in rows {
        groups.entry(key(r)).or_default().push(r);
    }
    let mut out = Vec::new();
    for (k, members) in groups {
        for (name, f) in metrics {
            let values: Vec<f64> = members.iter().map(|r| f(r)).collect();
            let (mean, sd) = mean_sd(&values);
            out.push(GroupStat { group: k.to_strings(), metric: name.to_string(), count: values.len(), mean, sd });
        }
    }
    out
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Group keys rendered as CSV cells.
pub trait ToStrings {
    fn to_strings(&self) -> Vec<String>;
}

impl ToStrings for () {
    fn to_strings(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Float key ordered by `total_cmp`.
#[derive(Debug, Clone, Copy)]
pub struct F(pub f64);

impl PartialEq for F {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for F {}

impl PartialOrd for F {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for F {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl ToStrings for F {
    fn to_strings(&self) -> Vec<String> {
        vec![self.0.to_string()]
    }
}

impl ToStrings for u32 {
    fn to_strings(&self) -> Vec<String> {
        vec![self.to_string()]
    }
}

impl<A: ToStrings, B: ToStrings> ToStrings for (A, B) {
    fn to_strings(&self) -> Vec<String> {
        let mut v = self.0.to_strings();
        v.extend(self.1.to_strings());
        v
    }
}

/// Long-format CSV: key columns, then `metric,count,mean,sd`.
pub fn write_summary(path: &Path, key_names: &[&str], stats: &[GroupStat]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = key_names.to_vec();
    header.extend(["metric", "count", "mean", "sd"]);
    w.write_record(&header)?;
    for s in stats {
        let mut row = s.group.clone();
        row.extend([s.metric.clone(), s.count.to_string(), s.mean.to_string(), s.sd.to_string()]);
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
