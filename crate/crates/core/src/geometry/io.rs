//! Point-cloud file formats.
//!
//! * text `xyz`: one `x y z` triple per line, whitespace separated
//! * binary: little-endian `f32` triplets, count implied by the file length
//!
//! Both load into double precision.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{PointCloud, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Xyz,
    Binary,
}

impl Format {
    /// `.bin` is binary, everything else is treated as text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("bin") => Format::Binary,
            _ => Format::Xyz,
        }
    }
}

pub fn parse_xyz(text: &str) -> std::result::Result<Vec<Vec3>, String> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace().map(str::parse::<f64>);
        let mut next = || -> std::result::Result<f64, String> {
            match fields.next() {
                Some(Ok(v)) => Ok(v),
                Some(Err(e)) => Err(format!("line {}: {e}", lineno + 1)),
                None => Err(format!("line {}: expected 3 coordinates", lineno + 1)),
            }
        };
        let p = Vec3::new(next()?, next()?, next()?);
        if fields.next().is_some() {
            return Err(format!("line {}: expected 3 coordinates", lineno + 1));
        }
        points.push(p);
    }
    Ok(points)
}

pub fn parse_binary(bytes: &[u8]) -> std::result::Result<Vec<Vec3>, String> {
    if !bytes.len().is_multiple_of(12) {
        return Err(format!("length {} is not a multiple of 12", bytes.len()));
    }
    Ok(bytes
        .chunks_exact(12)
        .map(|c| {
            let f = |i: usize| f32::from_le_bytes([c[i], c[i + 1], c[i + 2], c[i + 3]]) as f64;
            Vec3::new(f(0), f(4), f(8))
        })
        .collect())
}

/// Reads a cloud; the format is chosen by extension.
pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    let points = match Format::from_path(path) {
        Format::Xyz => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_xyz(&text)
        }
        Format::Binary => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            parse_binary(&bytes)
        }
    }
    .map_err(|msg| Error::InvalidCloud(format!("{}: {msg}", path.display())))?;
    PointCloud::new(points).map_err(|e| Error::InvalidCloud(format!("{}: {e}", path.display())))
}

pub fn format_xyz(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.len() * 48);
    for p in cloud.points() {
        out.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
    }
    out
}

pub fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    let bytes = match Format::from_path(path) {
        Format::Xyz => format_xyz(cloud).into_bytes(),
        Format::Binary => {
            cloud.points().iter().flat_map(|p| p.to_array().map(|v| (v as f32).to_le_bytes())).flatten().collect()
        }
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}
