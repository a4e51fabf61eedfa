//! Winding numbers of determinant phases over the twist angle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{Sector, Spin};
use crate::model::{CMatrix, Model};
use crate::spectral::{eigenvalues, logdet_phase, par_map, principal, theta_grid, MIN_FLOW_GRID};

pub const DEFAULT_N_GRID: usize = 256;
/// Largest allowed phase step between neighbouring samples.
pub const MAX_STEP: f64 = PI / 2.0;
/// Maximum bisection depth per base interval.
pub const MAX_DEPTH: u32 = 12;
/// `|raw/2π - value|` must fall below this.
pub const INTEGER_TOL: f64 = 1e-6;
/// Bound on the spin-mixing entries of a one-body matrix.
pub const SPIN_MIX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingResult {
    pub value: i64,
    pub raw_phase_change: f64,
    pub max_phase_step: f64,
    pub gap_margin: f64,
    /// Number of θ intervals after refinement.
    pub grid_size_used: usize,
}

struct Sample {
    phase: f64,
    margin: f64,
}

fn sample(h: &CMatrix, e_ref: Complex64, with_margin: bool) -> Result<Sample> {
    let phase = logdet_phase(h, e_ref)?.phase;
    let margin = if with_margin {
        eigenvalues(h)?.iter().map(|e| (e - e_ref).norm()).fold(f64::INFINITY, f64::min)
    } else {
        f64::INFINITY
    };
    Ok(Sample { phase, margin })
}

struct Accum {
    raw: f64,
    max_step: f64,
    inserted: usize,
}

#[allow(clippy::too_many_arguments)]
fn refine(
    h: &(impl Fn(f64) -> Result<CMatrix> + Sync),
    e_ref: Complex64,
    a: f64,
    pa: f64,
    b: f64,
    pb: f64,
    depth: u32,
    acc: &mut Accum,
) -> Result<()> {
    let step = principal(pb - pa);
    if step.abs() <= MAX_STEP {
        acc.raw += step;
        acc.max_step = acc.max_step.max(step.abs());
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::WindingUnresolvable { theta: a, step });
    }
    let m = 0.5 * (a + b);
    let pm = logdet_phase(&h(m)?, e_ref).map_err(|e| e.at_theta(m))?.phase;
    acc.inserted += 1;
    refine(h, e_ref, a, pa, m, pm, depth + 1, acc)?;
    refine(h, e_ref, m, pm, b, pb, depth + 1, acc)
}

/// Winding of `det[h(θ) - e_ref]` around zero as θ runs over `[0, 2π]`.
///
/// The phase is sampled on the uniform grid; any interval whose wrapped step
/// exceeds π/2 is bisected, up to [`MAX_DEPTH`] levels. The gap margin is the
/// smallest `|E - e_ref|` over the spectra at the base grid points.
pub fn winding_of_family(
    h: impl Fn(f64) -> Result<CMatrix> + Sync,
    e_ref: Complex64,
    n_grid: usize,
) -> Result<WindingResult> {
    if n_grid < MIN_FLOW_GRID {
        return Err(Error::InvalidParameter(format!("n_grid must be at least {MIN_FLOW_GRID}, got {n_grid}")));
    }
    let grid = theta_grid(n_grid);
    let samples = par_map(&grid, |&th| h(th).and_then(|m| sample(&m, e_ref, true)).map_err(|e| e.at_theta(th)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut acc = Accum { raw: 0.0, max_step: 0.0, inserted: 0 };
    for k in 0..n_grid {
        refine(&h, e_ref, grid[k], samples[k].phase, grid[k + 1], samples[k + 1].phase, 0, &mut acc)?;
    }
    let turns = acc.raw / (2.0 * PI);
    let value = turns.round();
    if (turns - value).abs() >= INTEGER_TOL {
        return Err(Error::NotPeriodic { raw: acc.raw });
    }
    let gap_margin = samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    if gap_margin <= 0.0 {
        return Err(Error::ReferenceOnSpectrum { re: e_ref.re, im: e_ref.im, theta: None });
    }
    Ok(WindingResult {
        value: value as i64,
        raw_phase_change: acc.raw,
        max_phase_step: acc.max_step,
        gap_margin,
        grid_size_used: n_grid + acc.inserted,
    })
}

/// One-body winding `w`.
pub fn one_body_winding(h: impl Fn(f64) -> CMatrix + Sync, e_ref: Complex64, n_grid: usize) -> Result<WindingResult> {
    winding_of_family(|th| Ok(h(th)), e_ref, n_grid)
}

/// Spin winding `w_s = (w_↑ - w_↓)/2`, kept as the integer `w_↑ - w_↓` so
/// half-integers are represented exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinWinding {
    pub up: WindingResult,
    pub down: WindingResult,
    pub twice: i64,
}

impl SpinWinding {
    pub fn value(&self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn is_integer(&self) -> bool {
        self.twice % 2 == 0
    }

    /// `Some(w_s)` when the spin winding is an integer.
    pub fn as_integer(&self) -> Option<i64> {
        self.is_integer().then_some(self.twice / 2)
    }
}

fn spin_block(h: &CMatrix, rows: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), rows.len(), |i, j| h[(rows[i], rows[j])])
}

/// Largest spin-mixing entry norm, `‖[s^z, h]‖_F / 2`.
pub fn spin_mixing(h: &CMatrix, spins: &[Spin]) -> f64 {
    let mut acc = 0.0;
    for (i, si) in spins.iter().enumerate() {
        for (j, sj) in spins.iter().enumerate() {
            if si != sj {
                acc += h[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Spin winding of a one-body family whose rows carry the labels `spins`.
///
/// Fails with [`Error::SpinSymmetryBroken`] when `h(θ)` couples the two spin
/// species at any base grid point.
pub fn spin_winding(
    h: impl Fn(f64) -> CMatrix + Sync,
    spins: &[Spin],
    e_ref: Complex64,
    n_grid: usize,
) -> Result<SpinWinding> {
    if n_grid < MIN_FLOW_GRID {
        return Err(Error::InvalidParameter(format!("n_grid must be at least {MIN_FLOW_GRID}, got {n_grid}")));
    }
    for th in theta_grid(n_grid) {
        let m = h(th);
        if m.nrows() != spins.len() {
            return Err(Error::InvalidParameter(format!(
                "{} spin labels for a {}x{} matrix",
                spins.len(),
                m.nrows(),
                m.ncols()
            )));
        }
        // [s^z, h] has entries ±2 h_ij on the mixed blocks
        let norm = 2.0 * spin_mixing(&m, spins);
        if norm >= SPIN_MIX_TOL {
            return Err(Error::SpinSymmetryBroken { norm, theta: th });
        }
    }
    let rows = |s: Spin| -> Vec<usize> { (0..spins.len()).filter(|&i| spins[i] == s).collect() };
    let (up_rows, down_rows) = (rows(Spin::Up), rows(Spin::Down));
    let up = winding_of_family(|th| Ok(spin_block(&h(th), &up_rows)), e_ref, n_grid)?;
    let down = winding_of_family(|th| Ok(spin_block(&h(th), &down_rows)), e_ref, n_grid)?;
    Ok(SpinWinding { up, down, twice: up.value - down.value })
}

/// `(w, w_s)` of a model's one-body Hamiltonian.
pub fn one_body_invariants(model: &Model, e_ref: Complex64, n_grid: usize) -> Result<(WindingResult, SpinWinding)> {
    model.validate()?;
    let w = one_body_winding(|th| model.one_body(th), e_ref, n_grid)?;
    let ws = spin_winding(|th| model.one_body(th), &model.one_body_spins(), e_ref, n_grid)?;
    Ok((w, ws))
}

/// Many-body winding `W_(N,P)(e_ref)` of one Fock sector.
pub fn many_body_winding(model: &Model, sector: Sector, e_ref: Complex64, n_grid: usize) -> Result<WindingResult> {
    model.validate()?;
    let basis = model.sector_basis(sector)?;
    let family = model.family(&basis)?;
    winding_of_family(|th| Ok(family.at(th).matrix), e_ref, n_grid)
}
