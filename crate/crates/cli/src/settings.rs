//! Merging flags (already combined with the environment by clap) with an
//! optional TOML file and the library defaults.

use std::fs;
use std::path::{Path, PathBuf};

use kuiper::cone::ConeConfig;
use kuiper::mesh::MeshFormat;
use kuiper::verify::VerifyConfig;
use toml::{Table, Value};

use crate::args::{parse_grid, ConeArgs, SurfaceArgs, SweepArgs, VerifyArgs};
use crate::Failure;

/// Settings read from `--config`. Unknown keys are rejected.
#[derive(Debug, Default)]
pub struct FileConfig {
    table: Table,
}

const KEYS: &[&str] = &["N", "eta", "eps", "grid", "y_max", "format", "out", "report", "seed", "instances", "threads"];

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        let table: Table = text.parse().map_err(|e| Failure::invalid(format!("--config {}: {e}", path.display())))?;
        if let Some(key) = table.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Failure::invalid(format!("--config: unknown key {key:?}")));
        }
        Ok(FileConfig { table })
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.table.get(key)
    }

    fn float(&self, key: &str) -> Result<Option<f64>, Failure> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(*v)),
            Some(Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(v) => Err(Failure::invalid(format!("--config: {key} must be a number, got {v}"))),
        }
    }

    fn int(&self, key: &str) -> Result<Option<i64>, Failure> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(v)) => Ok(Some(*v)),
            Some(v) => Err(Failure::invalid(format!("--config: {key} must be an integer, got {v}"))),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>, Failure> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(v)) => Ok(Some(v.clone())),
            Some(v) => Err(Failure::invalid(format!("--config: {key} must be a string, got {v}"))),
        }
    }

    fn count<T: TryFrom<i64>>(&self, key: &str) -> Result<Option<T>, Failure> {
        self.int(key)?
            .map(|v| T::try_from(v).map_err(|_| Failure::invalid(format!("--{key}: {v} is out of range"))))
            .transpose()
    }

    /// `N` as a list, accepting a single integer too.
    fn ns(&self) -> Result<Option<Vec<u32>>, Failure> {
        match self.get("N") {
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Integer(n) => {
                        u32::try_from(*n).map_err(|_| Failure::invalid(format!("--N: {n} is out of range")))
                    }
                    _ => Err(Failure::invalid(format!("--config: N entries must be integers, got {v}"))),
                })
                .collect::<Result<_, _>>()
                .map(Some),
            _ => Ok(self.count::<u32>("N")?.map(|n| vec![n])),
        }
    }

    pub fn threads(&self) -> Result<Option<usize>, Failure> {
        self.count("threads")
    }
}

fn surface(args: &SurfaceArgs, file: &FileConfig, n: u32) -> Result<(ConeConfig, MeshFormat), Failure> {
    let defaults = ConeConfig::default();
    let grid = match args.grid.clone().or(file.string("grid")?) {
        Some(g) => {
            let (nx, ny) = parse_grid(&g).map_err(Failure::invalid)?;
            (Some(nx), ny)
        }
        None => (None, defaults.ny),
    };
    let y_max = args.y_max.or(file.float("y_max")?).unwrap_or(defaults.y_max);
    let cfg = ConeConfig {
        n,
        eta: args.eta.or(file.float("eta")?).unwrap_or(defaults.eta),
        eps: args.eps.or(file.float("eps")?).unwrap_or(defaults.eps),
        nx: grid.0,
        ny: grid.1,
        y_min: -y_max,
        y_max,
    };
    let format = match args.format {
        Some(f) => f,
        None => match file.string("format")? {
            Some(s) => s.parse().map_err(|e: kuiper::Error| Failure::invalid(format!("--format: {e}")))?,
            None => MeshFormat::Obj,
        },
    };
    Ok((cfg, format))
}

pub struct ConeRun {
    pub config: ConeConfig,
    pub format: MeshFormat,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
}

pub fn cone(args: &ConeArgs, file: &FileConfig) -> Result<ConeRun, Failure> {
    let n = match args.n {
        Some(n) => n,
        None => file.count("N")?.unwrap_or(ConeConfig::default().n),
    };
    let (config, format) = surface(&args.surface, file, n)?;
    let out = args
        .out
        .clone()
        .or(file.string("out")?.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("cone.{}", format.extension())));
    let report = args.report.clone().or(file.string("report")?.map(PathBuf::from));
    Ok(ConeRun { config, format, out, report })
}

pub struct SweepRun {
    pub ns: Vec<u32>,
    pub base: ConeConfig,
    pub format: MeshFormat,
    pub out: PathBuf,
}

pub fn sweep(args: &SweepArgs, file: &FileConfig) -> Result<SweepRun, Failure> {
    let ns = match &args.ns {
        Some(ns) => ns.clone(),
        None => file.ns()?.unwrap_or_else(|| vec![6, 12, 24, 48]),
    };
    if ns.is_empty() {
        return Err(Failure::invalid("--N: the list of corrugation numbers is empty".into()));
    }
    if ns.contains(&0) {
        return Err(Failure::invalid("--N: corrugation numbers must be positive".into()));
    }
    let (base, format) = surface(&args.surface, file, ns[0])?;
    let out = args.out.clone().or(file.string("out")?.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("sweep"));
    Ok(SweepRun { ns, base, format, out })
}

pub struct VerifyRun {
    pub config: VerifyConfig,
    pub report: Option<PathBuf>,
}

pub fn verify(args: &VerifyArgs, file: &FileConfig) -> Result<VerifyRun, Failure> {
    let defaults = VerifyConfig::default();
    let seed = match args.seed {
        Some(s) => s,
        None => file.count("seed")?.unwrap_or(defaults.seed),
    };
    let instances = match args.instances {
        Some(k) => k,
        None => file.count("instances")?.unwrap_or(defaults.instances),
    };
    if instances == 0 {
        return Err(Failure::invalid("--instances: must be at least 1".into()));
    }
    let config = VerifyConfig { seed, instances, fault: args.inject_fault, ..defaults };
    let report = args.report.clone().or(file.string("report")?.map(PathBuf::from));
    Ok(VerifyRun { config, report })
}
