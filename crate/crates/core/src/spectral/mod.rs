//! Dense non-Hermitian eigensolver, log-determinants and spectral flows.

mod schur;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::Sector;
use crate::model::{CMatrix, DotParams, Model};

/// Residual bound for accepted eigenpairs, relative to `‖H‖_F`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Eigenvalues closer than this (relative to `max(1, ‖H‖_F)`) form a cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Clusters whose eigenvectors have a smaller least singular value are
/// treated as missing eigenvectors.
const INDEPENDENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub values: Vec<Complex64>,
    /// Columns are unit-norm right eigenvectors, phase fixed so that the
    /// largest-magnitude component is real and positive.
    pub right_vectors: CMatrix,
    /// `true` where the pair failed the residual test or belongs to a
    /// cluster with a geometric multiplicity deficit.
    pub defective: Vec<bool>,
    /// Cluster label per eigenvalue; equal labels mean degenerate within
    /// [`CLUSTER_TOL`].
    pub cluster: Vec<usize>,
}

impl EigenSolution {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn any_defective(&self) -> bool {
        self.defective.iter().any(|&d| d)
    }
}

fn to_vec(m: &CMatrix) -> Vec<Complex64> {
    m.as_slice().to_vec()
}

fn solver_error(m: &CMatrix) -> Error {
    Error::NoConvergence { dim: m.nrows(), norm: m.norm() }
}

/// All eigenvalues of a square complex matrix.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidParameter("matrix must be square".into()));
    }
    if m.iter().any(|z| !z.is_finite()) {
        return Err(solver_error(m));
    }
    let f = schur::schur(n, to_vec(m), false).map_err(|_| solver_error(m))?;
    Ok(f.eigenvalues())
}

/// Full right eigendecomposition with residual and multiplicity checks.
pub fn eigendecompose(m: &CMatrix) -> Result<EigenSolution> {
    let n = m.nrows();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot diagonalize an empty matrix".into()));
    }
    if n != m.ncols() {
        return Err(Error::InvalidParameter("matrix must be square".into()));
    }
    if m.iter().any(|z| !z.is_finite()) {
        return Err(solver_error(m));
    }
    let f = schur::schur(n, to_vec(m), true).map_err(|_| solver_error(m))?;
    let values = f.eigenvalues();
    let y = schur::triangular_eigenvectors(n, &f.t);
    let z = DMatrix::from_column_slice(n, n, f.z.as_ref().expect("requested unitary factor"));
    let mut vecs = z * DMatrix::from_column_slice(n, n, &y);
    for mut col in vecs.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 && norm.is_finite() {
            col /= Complex64::new(norm, 0.0);
        }
        fix_phase(col.as_mut_slice());
    }

    let scale = m.norm();
    let mut defective: Vec<bool> = (0..n)
        .map(|k| {
            let v = vecs.column(k);
            let r = (m * v - v * values[k]).norm();
            !(r <= RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE))
        })
        .collect();

    let cluster = cluster_labels(&values, CLUSTER_TOL * scale.max(1.0));
    let n_clusters = cluster.iter().copied().max().map_or(0, |c| c + 1);
    for c in 0..n_clusters {
        let members: Vec<usize> = (0..n).filter(|&k| cluster[k] == c).collect();
        if members.len() < 2 {
            continue;
        }
        let block = DMatrix::from_fn(n, members.len(), |i, j| vecs[(i, members[j])]);
        let smin = block.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
        if smin < INDEPENDENCE_TOL {
            for &k in &members {
                defective[k] = true;
            }
        }
    }
    Ok(EigenSolution { values, right_vectors: vecs, defective, cluster })
}

/// Rotates `v` so its largest-magnitude component is real positive.
fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        // earliest index wins near-ties so the choice is stable against rounding
        if a > best_abs * (1.0 + 1e-10) {
            best = i;
            best_abs = a;
        }
    }
    if best_abs <= 0.0 {
        return;
    }
    let rot = v[best].conj() / best_abs;
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[best] = Complex64::new(v[best].norm(), 0.0);
}

/// Single-linkage clusters of values closer than `tol`, labelled in order of
/// first appearance.
pub fn cluster_labels(values: &[Complex64], tol: f64) -> Vec<usize> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        out[i] = label[r];
    }
    out
}

/// `log det(M - z)` split into magnitude and principal phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_magnitude: f64,
    /// In `(-π, π]`.
    pub phase: f64,
}

/// Wraps an angle into `(-π, π]`.
pub fn principal(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Log-determinant of `m - e_ref·1` by LU with partial pivoting. The phase is
/// summed pivot by pivot (plus `π` per row swap) and then wrapped.
///
/// Fails with [`Error::ReferenceOnSpectrum`] when a pivot falls below
/// `1e-12 · ‖m - e_ref‖_F`.
pub fn logdet_phase(m: &CMatrix, e_ref: Complex64) -> Result<LogDet> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidParameter("matrix must be square".into()));
    }
    let mut a = to_vec(m);
    for i in 0..n {
        a[i + i * n] -= e_ref;
    }
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let singular = || Error::ReferenceOnSpectrum { re: e_ref.re, im: e_ref.im, theta: None };
    if n > 0 && scale == 0.0 {
        return Err(singular());
    }
    let tol = 1e-12 * scale;
    let mut log_mag = 0.0;
    let mut phase = 0.0;
    for k in 0..n {
        let (mut p, mut best) = (k, 0.0);
        for i in k..n {
            let v = a[i + k * n].norm_sqr();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best.sqrt() <= tol {
            return Err(singular());
        }
        if p != k {
            for c in k..n {
                a.swap(k + c * n, p + c * n);
            }
            phase += PI;
        }
        let pivot = a[k + k * n];
        log_mag += pivot.norm().ln();
        phase += pivot.arg();
        let inv = pivot.inv();
        for i in k + 1..n {
            a[i + k * n] *= inv;
        }
        for c in k + 1..n {
            let akc = a[k + c * n];
            if akc == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (head, tail) = a.split_at_mut(c * n + k + 1);
            let lcol = &head[k * n + k + 1..k * n + n];
            for (x, l) in tail[..n - k - 1].iter_mut().zip(lcol) {
                *x -= l * akc;
            }
        }
    }
    Ok(LogDet { log_magnitude: log_mag, phase: principal(phase) })
}

/// Maps `f` over `items` on scoped threads; output order matches input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || part.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// `θ_k = 2πk/n` for `k = 0..=n`.
pub fn theta_grid(n_grid: usize) -> Vec<f64> {
    (0..=n_grid).map(|k| 2.0 * PI * k as f64 / n_grid as f64).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralFlow {
    pub label: String,
    pub grid: Vec<f64>,
    pub spectra: Vec<Vec<Complex64>>,
}

impl SpectralFlow {
    pub fn all_values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.spectra.iter().flatten().copied()
    }

    /// `min |E - e_ref|` over every sampled eigenvalue.
    pub fn gap_margin(&self, e_ref: Complex64) -> f64 {
        self.all_values().map(|e| (e - e_ref).norm()).fold(f64::INFINITY, f64::min)
    }
}

pub const MIN_FLOW_GRID: usize = 16;

/// Eigenvalues of an arbitrary θ-family on the uniform grid.
pub fn sweep_family(label: &str, n_grid: usize, h: impl Fn(f64) -> Result<CMatrix> + Sync) -> Result<SpectralFlow> {
    if n_grid < MIN_FLOW_GRID {
        return Err(Error::InvalidParameter(format!("n_grid must be at least {MIN_FLOW_GRID}, got {n_grid}")));
    }
    let grid = theta_grid(n_grid);
    let spectra = par_map(&grid, |&th| h(th).and_then(|m| eigenvalues(&m)).map_err(|e| e.at_theta(th)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralFlow { label: label.to_string(), grid, spectra })
}

/// Many-body spectral flow of one sector over `θ ∈ [0, 2π]`.
pub fn sweep_theta(model: &Model, sector: Sector, n_grid: usize) -> Result<SpectralFlow> {
    let basis = model.sector_basis(sector)?;
    let family = model.family(&basis)?;
    sweep_family(&format!("theta sweep, sector {sector}"), n_grid, |th| Ok(family.at(th).matrix))
}

/// One-body spectral flow.
pub fn sweep_one_body(model: &Model, n_grid: usize) -> Result<SpectralFlow> {
    sweep_family("one-body theta sweep", n_grid, |th| Ok(model.one_body(th)))
}

/// Deformations connecting the free dot to the trivial `λ = 0` dot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeformationPath {
    /// `J = V = s`, `λ = 1`, `s: 0 → 1`.
    InteractionRamp,
    /// `λ = 1 - s`, `J = V = √λ`, `s: 0 → 1`.
    HoppingRamp,
}

impl DeformationPath {
    pub fn params_at(self, base: &DotParams, s: f64) -> DotParams {
        match self {
            DeformationPath::InteractionRamp => DotParams { lambda: 1.0, j: s, v: s, ..*base },
            DeformationPath::HoppingRamp => {
                let lambda = 1.0 - s;
                let g = lambda.max(0.0).sqrt();
                DotParams { lambda, j: g, v: g, ..*base }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeformationFlow {
    pub path: DeformationPath,
    pub path_params: Vec<f64>,
    pub flows: Vec<SpectralFlow>,
}

impl DeformationFlow {
    pub fn gap_margin(&self, e_ref: Complex64) -> f64 {
        self.flows.iter().map(|f| f.gap_margin(e_ref)).fold(f64::INFINITY, f64::min)
    }
}

/// θ-sweeps at `path_points` evenly spaced points `s ∈ [0, 1]` of a path.
pub fn sweep_deformation(
    path: DeformationPath,
    base: &DotParams,
    sector: Sector,
    path_points: usize,
    n_grid: usize,
) -> Result<DeformationFlow> {
    if path_points < 2 {
        return Err(Error::InvalidParameter("a deformation path needs at least 2 points".into()));
    }
    let path_params: Vec<f64> = (0..path_points).map(|k| k as f64 / (path_points - 1) as f64).collect();
    let flows = path_params
        .iter()
        .map(|&s| {
            let model = Model::Dot(path.params_at(base, s));
            sweep_theta(&model, sector, n_grid).map(|mut f| {
                f.label = format!("{path:?} s={s}");
                f
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DeformationFlow { path, path_params, flows })
}

/// Directed Hausdorff distance `sup_{a ∈ from} inf_{b ∈ to} |a - b|`.
pub fn directed_hausdorff(from: &[Complex64], to: &[Complex64]) -> f64 {
    from.iter()
        .map(|a| to.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Largest distance between two points of a set.
pub fn diameter(values: &[Complex64]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}
