//! Triangle meshes of sampled surfaces, written as ASCII OBJ or PLY.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::grid::MapSample;
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    #[default]
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MeshFormat::Obj => "obj",
            MeshFormat::Ply => "ply",
        }
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "ply" => Ok(MeshFormat::Ply),
            other => Err(Error::InvalidConfig(format!("unknown mesh format '{other}' (expected obj or ply)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshOutput {
    pub vertices: Vec<Vec3>,
    /// Zero-based vertex indices, counter-clockwise seen from `∂₁ ∧ ∂₂`.
    pub triangles: Vec<[usize; 3]>,
    pub format: MeshFormat,
}

impl MeshOutput {
    /// Triangulates a grid of `rows` rows by `nx` columns that closes up in
    /// `x`: the last column is joined to the first, so the seam carries no
    /// duplicate vertices.
    pub fn from_periodic_grid(values: &[Vec3], nx: usize, rows: usize, format: MeshFormat) -> Result<Self> {
        if nx < 3 || rows < 2 || values.len() != nx * rows {
            return Err(Error::InvalidConfig(format!(
                "cannot triangulate {} values as {rows} rows of {nx} columns",
                values.len()
            )));
        }
        let mut triangles = Vec::with_capacity(2 * nx * (rows - 1));
        for j in 0..rows - 1 {
            for i in 0..nx {
                let next = (i + 1) % nx;
                let a = j * nx + i;
                let b = j * nx + next;
                let c = (j + 1) * nx + next;
                let d = (j + 1) * nx + i;
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        Ok(MeshOutput { vertices: values.to_vec(), triangles, format })
    }

    pub fn from_sample(sample: &MapSample, format: MeshFormat) -> Result<Self> {
        Self::from_periodic_grid(&sample.values, sample.grid.nx, sample.grid.rows(), format)
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(40 * (self.vertices.len() + self.triangles.len()) + 200);
        match self.format {
            MeshFormat::Obj => {
                for v in &self.vertices {
                    let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
                }
                for [a, b, c] in &self.triangles {
                    let _ = writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1);
                }
            }
            MeshFormat::Ply => {
                out.push_str("ply\nformat ascii 1.0\n");
                let _ = writeln!(out, "element vertex {}", self.vertices.len());
                out.push_str("property double x\nproperty double y\nproperty double z\n");
                let _ = writeln!(out, "element face {}", self.triangles.len());
                out.push_str("property list uchar int vertex_indices\nend_header\n");
                for v in &self.vertices {
                    let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
                }
                for [a, b, c] in &self.triangles {
                    let _ = writeln!(out, "3 {a} {b} {c}");
                }
            }
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

/// Reads back the `v` and `f` records of an OBJ file (triangles only).
pub fn parse_obj(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let bad = |line: usize, msg: &str| Error::InvalidConfig(format!("OBJ line {}: {msg}", line + 1));
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .map(f64::from_str)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(k, "bad coordinate"))?;
                if c.len() != 3 {
                    return Err(bad(k, "vertex needs 3 coordinates"));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(usize::from_str)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(k, "bad index"))?;
                if idx.len() != 3 || idx.contains(&0) {
                    return Err(bad(k, "face needs 3 one-based indices"));
                }
                faces.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
            }
            Some(tok) if tok.starts_with('#') => {}
            None => {}
            Some(other) => return Err(bad(k, &format!("unexpected record '{other}'"))),
        }
    }
    if let Some(f) = faces.iter().find(|f| f.iter().any(|&i| i >= vertices.len())) {
        return Err(Error::InvalidConfig(format!("OBJ face {f:?} refers to a missing vertex")));
    }
    Ok((vertices, faces))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, rows: usize) -> Vec<Vec3> {
        (0..nx * rows).map(|k| Vec3::new((k % nx) as f64, (k / nx) as f64, 0.5)).collect()
    }

    #[test]
    fn welded_counts() {
        let m = MeshOutput::from_periodic_grid(&grid(4, 4), 4, 4, MeshFormat::Obj).unwrap();
        assert_eq!(m.vertices.len(), 16);
        assert_eq!(m.triangles.len(), 24);
        assert!(m.triangles.iter().flatten().all(|&i| i < 16));
        // every seam edge (column 3 to column 0) is used
        assert!(m.triangles.iter().any(|t| t.contains(&3) && t.contains(&0)));
    }

    #[test]
    fn obj_round_trip() {
        let m = MeshOutput::from_periodic_grid(&grid(5, 3), 5, 3, MeshFormat::Obj).unwrap();
        let text = m.render();
        assert!(!text.contains('\r'));
        assert!(text.lines().all(|l| l.starts_with("v ") || l.starts_with("f ")));
        let (v, f) = parse_obj(&text).unwrap();
        assert_eq!(v, m.vertices);
        assert_eq!(f, m.triangles);
    }

    #[test]
    fn ply_header() {
        let m = MeshOutput::from_periodic_grid(&grid(4, 2), 4, 2, MeshFormat::Ply).unwrap();
        let text = m.render();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("ply"));
        assert_eq!(lines.next(), Some("format ascii 1.0"));
        assert!(text.contains("element vertex 8\n"));
        assert!(text.contains("element face 8\n"));
        assert_eq!(text.lines().last(), Some("3 3 4 7"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MeshOutput::from_periodic_grid(&grid(4, 2), 4, 3, MeshFormat::Obj).is_err());
        assert!(MeshOutput::from_periodic_grid(&grid(2, 2), 2, 2, MeshFormat::Obj).is_err());
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
        assert!("stl".parse::<MeshFormat>().is_err());
        assert_eq!("PLY".parse::<MeshFormat>().unwrap(), MeshFormat::Ply);
    }
}
