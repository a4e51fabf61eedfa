//! Right-eigenstate occupations and open/closed boundary comparisons.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{ModeIndex, ModeLabel, ModeLayout, Orbital, Sector, SectorBasis, Spin};
use crate::model::{chain_spin_block, Boundary, ChainParams, CMatrix, ManyBodyMatrix, Model};
use crate::spectral::{self, eigendecompose, par_map, EigenSolution, SpectralFlow};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationProfile {
    pub eigenstate_index: usize,
    pub eigenvalue: Complex64,
    /// `⟨N_{a↑}⟩`.
    pub n_a_up_total: f64,
    /// One entry per mode, in mode order.
    pub per_mode: Vec<(ModeLabel, f64)>,
    /// Degeneracy cluster of the eigenvalue.
    pub cluster: usize,
    /// The eigenvector came from a defective cluster and is not unique.
    pub jordan_ambiguous: bool,
}

impl OccupationProfile {
    pub fn get(&self, site: usize, orbital: Orbital, spin: Spin) -> Option<f64> {
        self.per_mode
            .iter()
            .find(|(l, _)| l.site == site && l.orbital == orbital && l.spin == spin)
            .map(|&(_, v)| v)
    }

    fn a_values(&self, spin: Option<Spin>) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.per_mode
            .iter()
            .filter(move |(l, _)| l.orbital == Orbital::A && spin.is_none_or(|s| l.spin == s))
            .map(|(l, v)| (l.site, *v))
    }

    /// `⟨N_a⟩`, summed over sites and spins.
    pub fn n_a_total(&self) -> f64 {
        self.a_values(None).map(|(_, v)| v).sum()
    }

    /// `⟨N_{aσ}⟩`.
    pub fn n_a_spin(&self, spin: Spin) -> f64 {
        self.a_values(Some(spin)).map(|(_, v)| v).sum()
    }

    /// Largest a-orbital occupation over sites and spins.
    pub fn max_site_occupation(&self) -> f64 {
        self.a_values(None).map(|(_, v)| v).fold(0.0, f64::max)
    }

    /// `⟨n_{0aσ}⟩ + ⟨n_{L-1,aσ}⟩`, maximized over σ.
    pub fn edge_weight(&self, sites: usize) -> f64 {
        [Spin::Up, Spin::Down]
            .into_iter()
            .map(|s| self.a_values(Some(s)).filter(|&(j, _)| j == 0 || j + 1 == sites).map(|(_, v)| v).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Share of the spin-`spin` a-orbital weight found on `sites`, aggregated
/// over `profiles`. `None` when no profile carries that spin.
pub fn weight_fraction(profiles: &[OccupationProfile], spin: Spin, sites: &[usize]) -> Option<f64> {
    let mut on = 0.0;
    let mut total = 0.0;
    for p in profiles {
        for (j, v) in p.a_values(Some(spin)) {
            total += v;
            if sites.contains(&j) {
                on += v;
            }
        }
    }
    (total > 1e-12).then(|| on / total)
}

/// Per-mode occupations of a unit-norm basis vector shape.
fn mode_occupations(basis: &SectorBasis, v: impl Iterator<Item = Complex64>) -> Vec<f64> {
    let mut occ = vec![0.0; basis.layout().num_modes()];
    let mut norm = 0.0;
    for (s, z) in basis.states().iter().zip(v) {
        let w = z.norm_sqr();
        norm += w;
        for m in s.occupied_modes() {
            occ[m.0] += w;
        }
    }
    if norm > 0.0 {
        for x in &mut occ {
            *x /= norm;
        }
    }
    occ
}

fn labelled(layout: &ModeLayout, occ: &[f64]) -> Vec<(ModeLabel, f64)> {
    layout.labels().into_iter().zip(occ.iter().copied()).collect()
}

fn n_a_up(layout: &ModeLayout, occ: &[f64]) -> f64 {
    layout
        .labels()
        .iter()
        .zip(occ)
        .filter(|(l, _)| l.orbital == Orbital::A && l.spin == Spin::Up)
        .map(|(_, v)| v)
        .sum()
}

/// Profiles of every right eigenvector of an already decomposed sector matrix.
pub fn profiles_from_solution(basis: &SectorBasis, sol: &EigenSolution) -> Result<Vec<OccupationProfile>> {
    if sol.dim() != basis.dim() {
        return Err(Error::InvalidParameter(format!(
            "eigensolution of dimension {} for a basis of dimension {}",
            sol.dim(),
            basis.dim()
        )));
    }
    let layout = basis.layout();
    let idx: Vec<usize> = (0..sol.dim()).collect();
    Ok(par_map(&idx, |&k| {
        let occ = mode_occupations(basis, sol.right_vectors.column(k).iter().copied());
        OccupationProfile {
            eigenstate_index: k,
            eigenvalue: sol.values[k],
            n_a_up_total: n_a_up(layout, &occ),
            per_mode: labelled(layout, &occ),
            cluster: sol.cluster[k],
            jordan_ambiguous: sol.defective[k],
        }
    }))
}

/// `⟨n_m⟩ = Σ_{s ∋ m} |v_s|²` for each unit-norm right eigenvector `v` of `m`.
pub fn occupation_profiles(m: &ManyBodyMatrix, basis: &SectorBasis) -> Result<Vec<OccupationProfile>> {
    if m.sector != basis.sector() || m.dim() != basis.dim() {
        return Err(Error::InvalidParameter("matrix and basis describe different sectors".into()));
    }
    let sol = eigendecompose(&m.matrix)?;
    profiles_from_solution(basis, &sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub edge_weight: f64,
    pub max_site_occupation: f64,
    /// Aggregated up-spin share on the two rightmost sites.
    pub up_right_fraction: Option<f64>,
    /// Aggregated down-spin share on the two leftmost sites.
    pub down_left_fraction: Option<f64>,
}

impl ProfileSummary {
    pub fn of(profiles: &[OccupationProfile], sites: usize) -> Self {
        ProfileSummary {
            edge_weight: profiles.iter().map(|p| p.edge_weight(sites)).fold(0.0, f64::max),
            max_site_occupation: profiles.iter().map(|p| p.max_site_occupation()).fold(0.0, f64::max),
            up_right_fraction: weight_fraction(profiles, Spin::Up, &[sites - 2, sites - 1]),
            down_left_fraction: weight_fraction(profiles, Spin::Down, &[0, 1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySensitivity {
    /// Symmetric Hausdorff distance between the open-chain spectrum and the
    /// union of twisted spectra over θ.
    pub hausdorff_obc_pbc: f64,
    /// `sup_{E ∈ OBC} dist(E, PBC flow)`.
    pub obc_to_pbc: f64,
    /// `sup_{E ∈ PBC flow} dist(E, OBC)`.
    pub pbc_to_obc: f64,
    /// Largest `|E|` of the open-chain spectrum.
    pub obc_spectral_radius: f64,
    pub obc_defective: bool,
    /// From the raw open-chain eigenvectors.
    pub raw: ProfileSummary,
    /// From product states; only for the noninteracting chain.
    pub product_state: Option<ProfileSummary>,
    /// `max(raw, product state)` edge weight.
    pub edge_weight: f64,
}

/// Everything computed while comparing open and twisted boundaries.
#[derive(Debug, Clone)]
pub struct SkinAnalysis {
    pub sensitivity: BoundarySensitivity,
    pub obc: EigenSolution,
    pub raw_profiles: Vec<OccupationProfile>,
    pub product_profiles: Option<Vec<OccupationProfile>>,
    /// Right eigenvectors of the periodic chain at `θ = 0`.
    pub pbc_profiles: Vec<OccupationProfile>,
    pub twisted_flow: SpectralFlow,
}

/// Compares the open chain with the twisted-boundary flow of the same sector.
/// Only chain models have a boundary to remove.
pub fn skin_analysis(model: &Model, sector: Sector, n_grid: usize) -> Result<SkinAnalysis> {
    let p = match model {
        Model::Chain(p) => p,
        Model::Dot(_) => return Err(Error::Unsupported("boundary sensitivity needs a chain model".into())),
    };
    p.validate()?;
    let open = Model::Chain(p.with_boundary(Boundary::Open));
    let twisted = Model::Chain(p.with_boundary(Boundary::Twisted));

    let basis = open.sector_basis(sector)?;
    let obc = eigendecompose(&open.family(&basis)?.at(0.0).matrix)?;
    let twisted_flow = spectral::sweep_theta(&twisted, sector, n_grid)?;
    let pbc: Vec<Complex64> = twisted_flow.all_values().collect();

    let obc_to_pbc = spectral::directed_hausdorff(&obc.values, &pbc);
    let pbc_to_obc = spectral::directed_hausdorff(&pbc, &obc.values);
    let raw_profiles = profiles_from_solution(&basis, &obc)?;
    let pbc = eigendecompose(&twisted.family(&basis)?.at(0.0).matrix)?;
    let pbc_profiles = profiles_from_solution(&basis, &pbc)?;
    let raw = ProfileSummary::of(&raw_profiles, p.sites);
    let product_profiles =
        if p.is_interacting() { None } else { Some(product_state_profiles(&p.with_boundary(Boundary::Open), sector)?) };
    let product_state = product_profiles.as_deref().map(|ps| ProfileSummary::of(ps, p.sites));
    let edge_weight = raw.edge_weight.max(product_state.map_or(0.0, |s| s.edge_weight));
    let sensitivity = BoundarySensitivity {
        hausdorff_obc_pbc: obc_to_pbc.max(pbc_to_obc),
        obc_to_pbc,
        pbc_to_obc,
        obc_spectral_radius: obc.values.iter().map(|e| e.norm()).fold(0.0, f64::max),
        obc_defective: obc.any_defective(),
        raw,
        product_state,
        edge_weight,
    };
    Ok(SkinAnalysis { sensitivity, obc, raw_profiles, product_profiles, pbc_profiles, twisted_flow })
}

pub fn boundary_sensitivity(model: &Model, sector: Sector, n_grid: usize) -> Result<BoundarySensitivity> {
    skin_analysis(model, sector, n_grid).map(|a| a.sensitivity)
}

/// An `h`-invariant `k`-dimensional subspace of a spin block, with the sum of
/// eigenvalues it carries. Its Slater determinant is a many-body eigenstate.
struct Orbitals {
    energy: Complex64,
    /// Diagonal of the projector onto the subspace.
    density: Vec<f64>,
}

/// Diagonal of `Φ (Φ†Φ)⁻¹ Φ†`.
fn projector_diagonal(phi: &CMatrix) -> Result<Vec<f64>> {
    let gram = phi.adjoint() * phi;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Unsupported("one-body orbitals are linearly dependent".into()))?;
    let rho = phi * inv * phi.adjoint();
    Ok((0..phi.nrows()).map(|j| rho[(j, j)].re).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Invariant subspaces of dimension `k`. For a diagonalizable block these are
/// spans of `k` eigenvectors; for a single nilpotent Jordan block the only
/// one is `ker h^k`.
fn invariant_subspaces(h: &CMatrix, k: usize) -> Result<Vec<Orbitals>> {
    let l = h.nrows();
    if k == 0 {
        return Ok(vec![Orbitals { energy: Complex64::new(0.0, 0.0), density: vec![0.0; l] }]);
    }
    let sol = eigendecompose(h)?;
    if !sol.any_defective() {
        return subsets(l, k)
            .into_iter()
            .map(|idx| {
                let phi = CMatrix::from_fn(l, k, |i, j| sol.right_vectors[(i, idx[j])]);
                Ok(Orbitals { energy: idx.iter().map(|&i| sol.values[i]).sum(), density: projector_diagonal(&phi)? })
            })
            .collect();
    }
    let scale = h.norm().max(1.0);
    if sol.values.iter().any(|e| e.norm() > 1e-8 * scale) {
        return Err(Error::Unsupported("product states of a partly defective block".into()));
    }
    let mut power = CMatrix::identity(l, l);
    for _ in 0..k {
        power = &power * h;
    }
    let svd = power.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let tol = 1e-10 * scale.powi(k as i32);
    let kernel: Vec<usize> = (0..l).filter(|&i| svd.singular_values[i] <= tol).collect();
    if kernel.len() != k {
        return Err(Error::Unsupported(format!(
            "nilpotent block has a {}-dimensional kernel of h^{k}; expected a single Jordan chain",
            kernel.len()
        )));
    }
    let phi = CMatrix::from_fn(l, k, |i, j| v_t[(kernel[j], i)].conj());
    Ok(vec![Orbitals { energy: Complex64::new(0.0, 0.0), density: projector_diagonal(&phi)? }])
}

/// Many-body right eigenstates of the noninteracting chain built as Slater
/// determinants of one-body orbitals per spin block, times every allowed
/// spin configuration of the edge b-orbitals. Evaluated at θ = 0.
pub fn product_state_profiles(p: &ChainParams, sector: Sector) -> Result<Vec<OccupationProfile>> {
    p.validate()?;
    if p.is_interacting() {
        return Err(Error::InvalidParameter("product states require J = V = 0".into()));
    }
    let model = Model::Chain(*p);
    let basis = model.sector_basis(sector)?;
    let layout = *basis.layout();
    let l = p.sites;
    let up_block = chain_spin_block(p, 0.0, Spin::Up);
    let down_block = chain_spin_block(p, 0.0, Spin::Down);
    let b_modes = |spin: Spin| -> [ModeIndex; 2] {
        [
            layout.mode(0, Orbital::B, spin).expect("chain edge b-orbital"),
            layout.mode(l - 1, Orbital::B, spin).expect("chain edge b-orbital"),
        ]
    };
    let (b_up, b_down) = (b_modes(Spin::Up), b_modes(Spin::Down));

    let mut out = Vec::new();
    let n_a = sector.n as usize - 2;
    for n_up in 0..=n_a.min(l) {
        let n_down = n_a - n_up;
        if n_down > l {
            continue;
        }
        let ups = invariant_subspaces(&up_block, n_up)?;
        let downs = invariant_subspaces(&down_block, n_down)?;
        // edge b spins: each bit picks ↑ (0) or ↓ (1) at the left/right edge
        for b_cfg in 0..4u32 {
            let b_up_count = (b_cfg & 1 == 0) as usize + (b_cfg & 2 == 0) as usize;
            let parity = if (n_up + b_up_count) % 2 == 0 { 1 } else { -1 };
            if parity != sector.parity {
                continue;
            }
            for u in &ups {
                for d in &downs {
                    let mut occ = vec![0.0; layout.num_modes()];
                    for j in 0..l {
                        occ[layout.mode(j, Orbital::A, Spin::Up).expect("a mode").0] = u.density[j];
                        occ[layout.mode(j, Orbital::A, Spin::Down).expect("a mode").0] = d.density[j];
                    }
                    for (edge, bit) in [(0usize, 1u32), (1, 2)] {
                        let m = if b_cfg & bit == 0 { b_up[edge] } else { b_down[edge] };
                        occ[m.0] = 1.0;
                    }
                    out.push(OccupationProfile {
                        eigenstate_index: out.len(),
                        eigenvalue: u.energy + d.energy,
                        n_a_up_total: n_a_up(&layout, &occ),
                        per_mode: labelled(&layout, &occ),
                        cluster: 0,
                        jordan_ambiguous: false,
                    });
                }
            }
        }
    }
    let values: Vec<Complex64> = out.iter().map(|p| p.eigenvalue).collect();
    let clusters = spectral::cluster_labels(&values, spectral::CLUSTER_TOL * up_block.norm().max(1.0));
    for (prof, c) in out.iter_mut().zip(clusters) {
        prof.cluster = c;
    }
    debug_assert!(out.len() <= basis.dim());
    Ok(out)
}
