//! Executes a validated config and records what it wrote.

use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fock::Sector;
use crate::model::Model;
use crate::observables::{skin_analysis, OccupationProfile};
use crate::oracles::{
    chain_first_order_spectrum, dot_sector21_eigenvalues, dot_sector2m1_eigenvalues, matching_distance,
    perturbation_params, FirstOrderForm, LambdaScaling,
};
use crate::spectral::{eigenvalues, logdet_phase, sweep_deformation, sweep_one_body, sweep_theta, theta_grid, SpectralFlow};
use crate::topology::{many_body_winding, one_body_invariants, winding_of_family};

use super::config::{ExperimentConfig, Task, ValidatedConfig};

pub const MANIFEST: &str = "manifest.json";
pub const LOCK: &str = ".pointgap.lock";

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub wall_time_seconds: f64,
    pub summary: Value,
    pub files: Vec<FileEntry>,
}

#[derive(Debug)]
pub enum RunError {
    /// The config was rejected before any computation.
    Config(Error),
    /// The computation itself failed.
    Compute { task: Task, sector: Option<Sector>, error: Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Compute { .. } => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "stage=config: {e}"),
            RunError::Compute { task, sector, error } => {
                write!(f, "stage=compute task={}", task.as_str())?;
                if let Some(s) = sector {
                    write!(f, " sector={s}")?;
                }
                if let Error::ReferenceOnSpectrum { theta: Some(t), .. } | Error::WindingUnresolvable { theta: t, .. } = error {
                    write!(f, " theta={t}")?;
                }
                write!(f, ": {error}")
            }
        }
    }
}

impl std::error::Error for RunError {}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub allow_heavy: bool,
}

pub fn run_file(path: &Path, opts: RunOptions) -> Result<RunManifest, RunError> {
    let config = ExperimentConfig::load(path).map_err(RunError::Config)?;
    run(&config, opts)
}

pub fn run(config: &ExperimentConfig, opts: RunOptions) -> Result<RunManifest, RunError> {
    let valid = config.validate(opts.allow_heavy).map_err(RunError::Config)?;
    let compute = |error: Error| RunError::Compute { task: config.task, sector: valid.sector, error };
    let start = Instant::now();
    let out_dir = &config.output_dir;
    fs::create_dir_all(out_dir).map_err(|e| compute(e.into()))?;
    let _lock = DirLock::acquire(out_dir).map_err(compute)?;

    let mut outputs = Outputs::new(out_dir);
    let summary = execute(&valid, &mut outputs).map_err(compute)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        summary,
        files: outputs.files,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| compute(e.into()))? + "\n";
    write_atomic(&out_dir.join(MANIFEST), text.as_bytes()).map_err(compute)?;
    Ok(manifest)
}

/// Exclusive marker file; removed on drop.
struct DirLock(PathBuf);

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK);
        let mut f = OpenOptions::new().write(true).create_new(true).open(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                Error::Unsupported(format!("{} is locked by another run ({})", dir.display(), path.display()))
            } else {
                e.into()
            }
        })?;
        writeln!(f, "{}", std::process::id())?;
        Ok(DirLock(path))
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<FileEntry>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path) -> Self {
        Outputs { dir, files: Vec::new() }
    }

    fn write(&mut self, name: &str, contents: String) -> Result<()> {
        write_atomic(&self.dir.join(name), contents.as_bytes())?;
        let digest = Sha256::digest(contents.as_bytes());
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: contents.len() as u64,
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        });
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        self.write(name, serde_json::to_string_pretty(value)? + "\n")
    }
}

fn flow_csv(flow: &SpectralFlow) -> String {
    let mut s = String::from("theta,eig_index,re_e,im_e\n");
    for (th, spec) in flow.grid.iter().zip(&flow.spectra) {
        for (k, e) in spec.iter().enumerate() {
            let _ = writeln!(s, "{th},{k},{},{}", e.re, e.im);
        }
    }
    s
}

fn occupations_csv(profiles: &[OccupationProfile]) -> String {
    let mut s = String::from("state_index,re_e,im_e,site,orbital,spin,value\n");
    for p in profiles {
        for (l, v) in &p.per_mode {
            let _ = writeln!(s, "{},{},{},{},{},{},{v}", p.eigenstate_index, p.eigenvalue.re, p.eigenvalue.im, l.site, l.orbital, l.spin);
        }
    }
    s
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn execute(v: &ValidatedConfig, out: &mut Outputs) -> Result<Value> {
    let n_grid = v.raw.n_grid;
    match v.raw.task {
        Task::Flow => {
            let flow = match v.sector {
                Some(s) => sweep_theta(&v.model, s, n_grid)?,
                None => sweep_one_body(&v.model, n_grid)?,
            };
            out.write("flow.csv", flow_csv(&flow))?;
            Ok(json!({ "points": flow.grid.len(), "gap_margin": flow.gap_margin(v.e_ref) }))
        }
        Task::Winding => winding_task(v, out),
        Task::Skin => {
            let sector = v.sector.expect("validated");
            let a = skin_analysis(&v.model, sector, n_grid)?;
            out.write("flow.csv", flow_csv(&a.twisted_flow))?;
            let mut obc = String::from("eig_index,re_e,im_e,defective\n");
            for (k, e) in a.obc.values.iter().enumerate() {
                let _ = writeln!(obc, "{k},{},{},{}", e.re, e.im, a.obc.defective[k]);
            }
            out.write("obc_spectrum.csv", obc)?;
            out.write("occupations.csv", occupations_csv(&a.raw_profiles))?;
            out.write("pbc_occupations.csv", occupations_csv(&a.pbc_profiles))?;
            if let Some(ps) = &a.product_profiles {
                out.write("product_occupations.csv", occupations_csv(ps))?;
            }
            let body = json!({ "sector": [sector.n, sector.parity], "sensitivity": a.sensitivity });
            out.write_json("sensitivity.json", &body)?;
            Ok(body)
        }
        Task::Deform => {
            let sector = v.sector.expect("validated");
            let spec = v.raw.deform.expect("validated");
            let base = match v.model {
                Model::Dot(p) => p,
                Model::Chain(_) => unreachable!("validated"),
            };
            let d = sweep_deformation(spec.path, &base, sector, spec.points, n_grid)?;
            let mut csv = String::from("s,theta,eig_index,re_e,im_e\n");
            let mut windings = Vec::with_capacity(d.path_params.len());
            for (s, flow) in d.path_params.iter().zip(&d.flows) {
                for (th, spec) in flow.grid.iter().zip(&flow.spectra) {
                    for (k, e) in spec.iter().enumerate() {
                        let _ = writeln!(csv, "{s},{th},{k},{},{}", e.re, e.im);
                    }
                }
                let m = Model::Dot(spec.path.params_at(&base, *s));
                windings.push(many_body_winding(&m, sector, v.e_ref, n_grid)?.value);
            }
            out.write("deform.csv", csv)?;
            Ok(json!({
                "path": spec.path,
                "points": spec.points,
                "gap_margin": d.gap_margin(v.e_ref),
                "windings": windings,
            }))
        }
        Task::OracleCheck => oracle_task(v, out),
    }
}

fn winding_task(v: &ValidatedConfig, out: &mut Outputs) -> Result<Value> {
    let n_grid = v.raw.n_grid;
    let body = match v.sector {
        Some(sector) => {
            let basis = v.model.sector_basis(sector)?;
            let family = v.model.family(&basis)?;
            let w = winding_of_family(|th| Ok(family.at(th).matrix), v.e_ref, n_grid)?;
            let mut phase = String::from("theta,log_magnitude,phase\n");
            for th in theta_grid(n_grid) {
                let ld = logdet_phase(&family.at(th).matrix, v.e_ref).map_err(|e| e.at_theta(th))?;
                let _ = writeln!(phase, "{th},{},{}", ld.log_magnitude, ld.phase);
            }
            out.write("phase.csv", phase)?;
            json!({
                "sector": [sector.n, sector.parity],
                "e_ref": pair(v.e_ref),
                "winding": w.value,
                "raw_phase_change": w.raw_phase_change,
                "gap_margin": w.gap_margin,
                "grid_size_used": w.grid_size_used,
                "max_phase_step": w.max_phase_step,
            })
        }
        None => {
            let (w, ws) = one_body_invariants(&v.model, v.e_ref, n_grid)?;
            json!({
                "sector": null,
                "e_ref": pair(v.e_ref),
                "winding": w.value,
                "raw_phase_change": w.raw_phase_change,
                "gap_margin": w.gap_margin,
                "grid_size_used": w.grid_size_used,
                "max_phase_step": w.max_phase_step,
                "spin_winding": {
                    "value": ws.value(),
                    "twice": ws.twice,
                    "integer": ws.is_integer(),
                    "up": ws.up,
                    "down": ws.down,
                },
            })
        }
    };
    out.write_json("winding.json", &body)?;
    Ok(body)
}

fn oracle_task(v: &ValidatedConfig, out: &mut Outputs) -> Result<Value> {
    let grid = theta_grid(v.raw.n_grid);
    let body = match v.model {
        Model::Dot(p) => {
            let mut rows = Vec::new();
            for sector in [Sector::new(2, 1)?, Sector::new(2, -1)?] {
                let basis = v.model.sector_basis(sector)?;
                let family = v.model.family(&basis)?;
                let mut worst = [0.0f64; 2];
                for &th in &grid {
                    let ed = eigenvalues(&family.at(th).matrix).map_err(|e| e.at_theta(th))?;
                    for (slot, scaling) in [LambdaScaling::Consistent, LambdaScaling::Strict].into_iter().enumerate() {
                        let formula: Vec<Complex64> = if sector.parity == 1 {
                            dot_sector21_eigenvalues(&p, th, scaling).to_vec()
                        } else {
                            dot_sector2m1_eigenvalues(&p, th, scaling).to_vec()
                        };
                        worst[slot] = worst[slot].max(matching_distance(&ed, &formula)?);
                    }
                }
                rows.push(json!({
                    "sector": [sector.n, sector.parity],
                    "consistent_max_distance": worst[0],
                    "strict_max_distance": worst[1],
                }));
            }
            json!({ "model": "dot", "theta_points": grid.len(), "sectors": rows })
        }
        Model::Chain(p) => {
            let sector = Sector::new(3, -1)?;
            let basis = v.model.sector_basis(sector)?;
            let family = v.model.family(&basis)?;
            let mut worst = [0.0f64; 2];
            for &th in &grid {
                let ed = eigenvalues(&family.at(th).matrix).map_err(|e| e.at_theta(th))?;
                for (slot, form) in [FirstOrderForm::Literal, FirstOrderForm::Effective].into_iter().enumerate() {
                    worst[slot] = worst[slot].max(matching_distance(&ed, &chain_first_order_spectrum(&p, th, form)?)?);
                }
            }
            let params = (0..p.sites)
                .map(|n| perturbation_params(&p, n, FirstOrderForm::Literal))
                .collect::<Result<Vec<_>>>()?;
            json!({
                "model": "chain",
                "sector": [3, -1],
                "theta_points": grid.len(),
                "literal_max_distance": worst[0],
                "effective_max_distance": worst[1],
                "literal_params": params,
            })
        }
    };
    out.write_json("oracle.json", &body)?;
    Ok(body)
}
