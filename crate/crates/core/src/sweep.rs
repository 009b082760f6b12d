//! Cone surfaces for a list of corrugation numbers, with a CSV summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cone::{build_cone_surface, ConeConfig, DefectReport};
use crate::exec::Execution;
use crate::mesh::{MeshFormat, MeshOutput};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub ns: Vec<u32>,
    /// Parameters shared by every run; `base.n` is ignored. When `base.nx` is
    /// unset each run uses its own default column count.
    pub base: ConeConfig,
    pub out_dir: PathBuf,
    pub format: MeshFormat,
}

/// One line of `sweep.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: u32,
    pub c0_distance: f64,
    pub max_e11: f64,
    pub max_e12: f64,
    pub max_e22: f64,
    pub min_immersion_margin: f64,
    pub mesh: String,
}

impl SweepRow {
    fn new(report: &DefectReport, mesh: &Path) -> Self {
        SweepRow {
            n: report.n,
            c0_distance: report.c0_distance,
            max_e11: report.max_e11,
            max_e12: report.max_e12,
            max_e22: report.max_e22,
            min_immersion_margin: report.min_immersion_margin,
            mesh: mesh.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        }
    }
}

pub fn mesh_path(dir: &Path, n: u32, format: MeshFormat) -> PathBuf {
    dir.join(format!("cone_N{n}.{}", format.extension()))
}

pub fn report_path(dir: &Path, n: u32) -> PathBuf {
    dir.join(format!("report_N{n}.json"))
}

pub fn csv_path(dir: &Path) -> PathBuf {
    dir.join("sweep.csv")
}

/// Validates every run before writing anything.
pub fn run_configs(cfg: &SweepConfig) -> Result<Vec<ConeConfig>> {
    if cfg.ns.is_empty() {
        return Err(Error::InvalidConfig("the list of N values is empty".into()));
    }
    cfg.ns
        .iter()
        .map(|&n| {
            let run = ConeConfig { n, ..cfg.base };
            run.validate()?;
            Ok(run)
        })
        .collect()
}

/// Writes one mesh and one report per `N`, then `sweep.csv`.
pub fn run_sweep(cfg: &SweepConfig, exec: Execution) -> Result<Vec<SweepRow>> {
    let runs = run_configs(cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut rows = Vec::with_capacity(runs.len());
    for run in &runs {
        let (sample, report) = build_cone_surface(run, exec)?;
        let mesh = mesh_path(&cfg.out_dir, run.n, cfg.format);
        MeshOutput::from_sample(&sample, cfg.format)?.write_to(&mesh)?;
        fs::write(report_path(&cfg.out_dir, run.n), report.to_json()? + "\n")?;
        log::info!("N = {}: c0 distance {:.6e}, max defect {:.6e}", run.n, report.c0_distance, report.max_defect());
        rows.push(SweepRow::new(&report, &mesh));
    }
    let mut writer = csv::Writer::from_path(csv_path(&cfg.out_dir))?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SweepConfig {
            ns: vec![3, 6],
            base: ConeConfig { ny: 6, ..ConeConfig::default() },
            out_dir: dir.path().to_path_buf(),
            format: MeshFormat::Ply,
        };
        let rows = run_sweep(&cfg, Execution::Parallel).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].c0_distance > rows[1].c0_distance);
        assert!(mesh_path(dir.path(), 6, MeshFormat::Ply).exists());
        assert!(report_path(dir.path(), 3).exists());
        assert_eq!(read_csv(&csv_path(dir.path())).unwrap(), rows);
    }

    #[test]
    fn empty_or_invalid_lists() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = SweepConfig {
            ns: vec![],
            base: ConeConfig::default(),
            out_dir: dir.path().join("out"),
            format: MeshFormat::Obj,
        };
        assert!(matches!(run_sweep(&cfg, Execution::Sequential), Err(Error::InvalidConfig(_))));
        cfg.ns = vec![6, 0];
        assert!(run_sweep(&cfg, Execution::Sequential).is_err());
        assert!(!cfg.out_dir.exists());
    }
}
