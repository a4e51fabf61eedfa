//! The two interacting models: a two-orbital dot and the extended
//! Hatano-Nelson chain with spin-flip couplings to localized edge spins.
//!
//! Every Hamiltonian is written as a [`FermionOperator`], a sum of ladder
//! strings whose coefficients carry a factor `e^{i ν θ}`. Restricting it to a
//! [`SectorBasis`] gives a [`ThetaFamily`] that can be evaluated at any twist
//! angle without re-walking the basis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    apply_string, enumerate_sector, hop_string, spin_flip_string, FockState, Ladder, ModeIndex, ModeLayout, Orbital,
    Sector, SectorBasis, Spin,
};

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Two-orbital dot. One-body energies are
/// `diag(λe^{iθ} + iε_{a↑}, λe^{-iθ} + iε_{a↓}, iε_{b↑}, iε_{b↓})` and the
/// interaction is `(iJ/2)(S⁺_a S⁻_b + h.c.) + (iV/2)(S⁺_a S⁺_b + h.c.)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DotParams {
    pub lambda: f64,
    pub eps_a_up: f64,
    pub eps_a_down: f64,
    pub eps_b_up: f64,
    pub eps_b_down: f64,
    #[serde(default)]
    pub j: f64,
    #[serde(default)]
    pub v: f64,
}

impl DotParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda, self.eps_a_up, self.eps_a_down, self.eps_b_up, self.eps_b_down, self.j, self.v];
        if all.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("dot parameters must be finite".into()))
        }
    }

    pub fn with_interaction(mut self, j: f64, v: f64) -> Self {
        self.j = j;
        self.v = v;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Phase `e^{iθ}` on the link closing the ring.
    #[default]
    Twisted,
    /// Twisted with `θ = 0`; the twist argument is ignored.
    Periodic,
    /// Ring-closing links removed; the twist argument is ignored.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    /// The whole twist sits on the boundary link.
    #[default]
    BoundaryLink,
    /// Every link carries `e^{±iθ/L}`.
    Distributed,
}

/// Prefactor of the edge `S⁺_a S⁻_b + h.c.` exchange term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExchangeConvention {
    /// `J/2`.
    #[default]
    Half,
    /// `J`.
    Full,
}

impl ExchangeConvention {
    pub fn factor(self) -> f64 {
        match self {
            ExchangeConvention::Half => 0.5,
            ExchangeConvention::Full => 1.0,
        }
    }
}

/// Extended Hatano-Nelson chain: up spins hop `j → j+1`, down spins hop
/// `j → j-1`, both with amplitude `t`, and the a-orbital at each edge couples
/// to a singly occupied b-orbital through
/// `c_J (S⁺_a S⁻_b + h.c.) + iV (S⁺_a S⁺_b + h.c.)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub sites: usize,
    pub hopping: f64,
    #[serde(default)]
    pub j: f64,
    #[serde(default)]
    pub v: f64,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub gauge: Gauge,
    #[serde(default)]
    pub exchange: ExchangeConvention,
}

impl ChainParams {
    pub fn new(sites: usize, hopping: f64) -> Self {
        ChainParams {
            sites,
            hopping,
            j: 0.0,
            v: 0.0,
            boundary: Boundary::Twisted,
            gauge: Gauge::BoundaryLink,
            exchange: ExchangeConvention::Half,
        }
    }

    pub fn with_interaction(mut self, j: f64, v: f64) -> Self {
        self.j = j;
        self.v = v;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ModeLayout::chain(self.sites)?;
        if [self.hopping, self.j, self.v].iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("chain parameters must be finite".into()))
        }
    }

    pub fn is_interacting(&self) -> bool {
        self.j != 0.0 || self.v != 0.0
    }

    /// Directed a-orbital links `(to, from, coefficient, frequency)` for one spin.
    fn links(&self, spin: Spin) -> Vec<(usize, usize, Complex64, f64)> {
        let l = self.sites;
        let t = real(self.hopping);
        let step = |j: usize| match spin {
            Spin::Up => (j + 1) % l,
            Spin::Down => (j + l - 1) % l,
        };
        // the link that closes the ring
        let closing = match spin {
            Spin::Up => l - 1,
            Spin::Down => 0,
        };
        let sign = spin.sign() as f64;
        let mut out = Vec::with_capacity(l);
        for j in 0..l {
            let to = step(j);
            let is_closing = j == closing;
            match (self.boundary, self.gauge) {
                (Boundary::Open, _) if is_closing => {}
                (Boundary::Open, _) | (Boundary::Periodic, _) => out.push((to, j, t, 0.0)),
                (Boundary::Twisted, Gauge::BoundaryLink) => {
                    out.push((to, j, t, if is_closing { sign } else { 0.0 }));
                }
                (Boundary::Twisted, Gauge::Distributed) => out.push((to, j, t, sign / l as f64)),
            }
        }
        out
    }
}

/// One ladder string `coeff · e^{iνθ} · ops` (ops applied in slice order).
#[derive(Debug, Clone)]
pub struct Term {
    pub coeff: Complex64,
    pub frequency: f64,
    pub ops: Vec<Ladder>,
}

#[derive(Debug, Clone, Default)]
pub struct FermionOperator {
    terms: Vec<Term>,
}

/// Sector-restricted operator, stored as sparse parts per twist frequency.
#[derive(Debug, Clone)]
pub struct ThetaFamily {
    sector: Option<Sector>,
    dim: usize,
    parts: Vec<(f64, Vec<(usize, usize, Complex64)>)>,
}

/// Dense Hamiltonian of one sector at one twist angle.
#[derive(Debug, Clone)]
pub struct ManyBodyMatrix {
    pub sector: Option<Sector>,
    pub theta: f64,
    pub matrix: CMatrix,
}

impl ManyBodyMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

impl FermionOperator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn push(&mut self, coeff: Complex64, frequency: f64, ops: Vec<Ladder>) {
        if coeff != Complex64::new(0.0, 0.0) {
            self.terms.push(Term { coeff, frequency, ops });
        }
    }

    /// `coeff e^{iνθ} c†_to c_from`.
    pub fn push_hop(&mut self, coeff: Complex64, frequency: f64, to: ModeIndex, from: ModeIndex) {
        self.push(coeff, frequency, hop_string(to, from).to_vec());
    }

    /// `coeff · X_left · X_right` where both factors are two-operator strings;
    /// `right` acts first.
    pub fn push_product(&mut self, coeff: Complex64, left: [Ladder; 2], right: [Ladder; 2]) {
        self.push(coeff, 0.0, right.into_iter().chain(left).collect());
    }

    /// Restricts the operator to `basis`. Fails when any term maps a basis
    /// state to a state outside the basis.
    pub fn family_on(&self, basis: &SectorBasis) -> Result<ThetaFamily> {
        let mut parts: Vec<(f64, Vec<(usize, usize, Complex64)>)> = Vec::new();
        for term in &self.terms {
            let slot = match parts.iter().position(|(f, _)| *f == term.frequency) {
                Some(p) => p,
                None => {
                    parts.push((term.frequency, Vec::new()));
                    parts.len() - 1
                }
            };
            for (col, &state) in basis.states().iter().enumerate() {
                if let Some((target, sign)) = apply_string(state, &term.ops) {
                    let row = basis.index_of(target).ok_or_else(|| Error::LeavesSector {
                        sector: basis.sector().map_or("full space".into(), |s| s.to_string()),
                    })?;
                    parts[slot].1.push((row, col, term.coeff * sign as f64));
                }
            }
        }
        parts.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(ThetaFamily { sector: basis.sector(), dim: basis.dim(), parts })
    }
}

impl ThetaFamily {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sector(&self) -> Option<Sector> {
        self.sector
    }

    pub fn at(&self, theta: f64) -> ManyBodyMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (freq, entries) in &self.parts {
            let phase = if *freq == 0.0 { real(1.0) } else { Complex64::from_polar(1.0, freq * theta) };
            for &(r, c, z) in entries {
                m[(r, c)] += z * phase;
            }
        }
        ManyBodyMatrix { sector: self.sector, theta, matrix: m }
    }
}

/// Either of the two models, with everything needed to build sector matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "lowercase")]
pub enum Model {
    Dot(DotParams),
    Chain(ChainParams),
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Dot(p) => p.validate(),
            Model::Chain(p) => p.validate(),
        }
    }

    pub fn layout(&self) -> ModeLayout {
        match self {
            Model::Dot(_) => ModeLayout::Dot,
            Model::Chain(p) => ModeLayout::Chain { sites: p.sites },
        }
    }

    pub fn interaction(&self) -> (f64, f64) {
        match self {
            Model::Dot(p) => (p.j, p.v),
            Model::Chain(p) => (p.j, p.v),
        }
    }

    /// Sector basis with the model's frozen-mode constraints applied.
    pub fn sector_basis(&self, sector: Sector) -> Result<SectorBasis> {
        self.validate()?;
        let layout = self.layout();
        match self {
            Model::Dot(_) => enumerate_sector(layout, sector, &[]),
            Model::Chain(p) => {
                let max_n = 2 * p.sites as u32 + 2;
                if sector.n < 2 || sector.n > max_n {
                    return Err(Error::InvalidSector(format!(
                        "{sector}: the chain holds one fermion on each edge b-site, so N must lie in 2..={max_n}"
                    )));
                }
                let basis = enumerate_sector(layout, sector, &layout.edge_b_constraints())?;
                if basis.is_empty() {
                    return Err(Error::InvalidSector(format!("{sector} is empty under the edge constraint")));
                }
                Ok(basis)
            }
        }
    }

    /// Second-quantized Hamiltonian, valid on any basis of the layout.
    pub fn operator(&self) -> Result<FermionOperator> {
        self.validate()?;
        let layout = self.layout();
        let mut op = FermionOperator::new();
        let mode = |site, orb, spin| layout.mode(site, orb, spin).expect("mode exists");
        let flip = |site, orb, raise| spin_flip_string(&layout, site, orb, raise).expect("mode exists");
        match *self {
            Model::Dot(p) => {
                let a_up = mode(0, Orbital::A, Spin::Up);
                let a_dn = mode(0, Orbital::A, Spin::Down);
                let b_up = mode(0, Orbital::B, Spin::Up);
                let b_dn = mode(0, Orbital::B, Spin::Down);
                op.push_hop(real(p.lambda), 1.0, a_up, a_up);
                op.push_hop(real(p.lambda), -1.0, a_dn, a_dn);
                for (m, eps) in [(a_up, p.eps_a_up), (a_dn, p.eps_a_down), (b_up, p.eps_b_up), (b_dn, p.eps_b_down)] {
                    op.push_hop(I * eps, 0.0, m, m);
                }
                let cj = I * (p.j / 2.0);
                let cv = I * (p.v / 2.0);
                op.push_product(cj, flip(0, Orbital::A, true), flip(0, Orbital::B, false));
                op.push_product(cj, flip(0, Orbital::A, false), flip(0, Orbital::B, true));
                op.push_product(cv, flip(0, Orbital::A, true), flip(0, Orbital::B, true));
                op.push_product(cv, flip(0, Orbital::A, false), flip(0, Orbital::B, false));
            }
            Model::Chain(p) => {
                for spin in [Spin::Up, Spin::Down] {
                    for (to, from, c, freq) in p.links(spin) {
                        op.push_hop(c, freq, mode(to, Orbital::A, spin), mode(from, Orbital::A, spin));
                    }
                }
                let cj = real(p.j * p.exchange.factor());
                let cv = I * p.v;
                for site in [0, p.sites - 1] {
                    op.push_product(cj, flip(site, Orbital::A, true), flip(site, Orbital::B, false));
                    op.push_product(cj, flip(site, Orbital::A, false), flip(site, Orbital::B, true));
                    op.push_product(cv, flip(site, Orbital::A, true), flip(site, Orbital::B, true));
                    op.push_product(cv, flip(site, Orbital::A, false), flip(site, Orbital::B, false));
                }
            }
        }
        Ok(op)
    }

    pub fn family(&self, basis: &SectorBasis) -> Result<ThetaFamily> {
        self.operator()?.family_on(basis)
    }

    pub fn many_body(&self, theta: f64, sector: Sector) -> Result<ManyBodyMatrix> {
        let basis = self.sector_basis(sector)?;
        Ok(self.family(&basis)?.at(theta))
    }

    /// One-body matrix `h(θ)`. For the chain only the a-orbital modes enter
    /// (the edge b-orbitals have no one-body energy). Rows follow mode order.
    pub fn one_body(&self, theta: f64) -> CMatrix {
        match self {
            Model::Dot(p) => build_dot_one_body(p, theta),
            Model::Chain(p) => build_chain_one_body(p, theta),
        }
    }

    /// Spin label of each row of [`Model::one_body`].
    pub fn one_body_spins(&self) -> Vec<Spin> {
        let dim = match self {
            Model::Dot(_) => 4,
            Model::Chain(p) => 2 * p.sites,
        };
        (0..dim).map(|i| if i % 2 == 0 { Spin::Up } else { Spin::Down }).collect()
    }
}

pub fn build_dot_one_body(p: &DotParams, theta: f64) -> CMatrix {
    let d = [
        Complex64::from_polar(p.lambda, theta) + I * p.eps_a_up,
        Complex64::from_polar(p.lambda, -theta) + I * p.eps_a_down,
        I * p.eps_b_up,
        I * p.eps_b_down,
    ];
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&d))
}

pub fn build_dot_many_body(p: &DotParams, theta: f64, sector: Sector) -> Result<ManyBodyMatrix> {
    Model::Dot(*p).many_body(theta, sector)
}

/// `2L × 2L` a-orbital hopping matrix, `h[to, from]`.
pub fn build_chain_one_body(p: &ChainParams, theta: f64) -> CMatrix {
    let l = p.sites;
    let mut h = CMatrix::zeros(2 * l, 2 * l);
    for (s, spin) in [Spin::Up, Spin::Down].into_iter().enumerate() {
        for (to, from, c, freq) in p.links(spin) {
            h[(2 * to + s, 2 * from + s)] += c * Complex64::from_polar(1.0, freq * theta);
        }
    }
    h
}

pub fn build_chain_many_body(p: &ChainParams, theta: f64, sector: Sector) -> Result<ManyBodyMatrix> {
    Model::Chain(*p).many_body(theta, sector)
}

/// Single spin block (`L × L`, site order) of the chain's one-body matrix.
pub fn chain_spin_block(p: &ChainParams, theta: f64, spin: Spin) -> CMatrix {
    let h = build_chain_one_body(p, theta);
    let s = match spin {
        Spin::Up => 0,
        Spin::Down => 1,
    };
    CMatrix::from_fn(p.sites, p.sites, |i, j| h[(2 * i + s, 2 * j + s)])
}

/// Number of a-orbital fermions in a state.
pub fn a_orbital_count(layout: &ModeLayout, state: FockState) -> u32 {
    state.count_in(layout.orbital_mask(Orbital::A))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SectorBasis;

    fn fig_dot() -> DotParams {
        DotParams { lambda: 1.0, eps_a_up: 0.2, eps_a_down: -0.1, eps_b_up: 0.35, eps_b_down: -0.25, j: 0.0, v: 0.0 }
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn dot_one_body_matches_closed_form() {
        let h = build_dot_one_body(&fig_dot(), 0.0);
        let expect = [Complex64::new(1.0, 0.2), Complex64::new(1.0, -0.1), I * 0.35, I * -0.25];
        for i in 0..4 {
            assert!(close(h[(i, i)], expect[i]));
            for j in 0..4 {
                if i != j {
                    assert_eq!(h[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
        let h2pi = build_dot_one_body(&fig_dot(), 2.0 * std::f64::consts::PI);
        assert!((h2pi - h).norm() < 1e-14);
        let flat = DotParams { lambda: 0.0, ..fig_dot() };
        assert!((build_dot_one_body(&flat, 0.3) - build_dot_one_body(&flat, 2.1)).norm() == 0.0);
    }

    #[test]
    fn dot_sector_21_matrix() {
        let p = fig_dot().with_interaction(0.7, 1.3);
        let th = 0.9;
        let m = build_dot_many_body(&p, th, Sector::new(2, 1).unwrap()).unwrap().matrix;
        let e = |x: f64| Complex64::from_polar(1.0, x);
        assert!(close(m[(0, 0)], e(th) + I * (0.2 + 0.35)));
        assert!(close(m[(1, 1)], e(-th) + I * (-0.1 - 0.25)));
        assert!(close(m[(0, 1)], I * 0.65));
        assert!(close(m[(1, 0)], I * 0.65));
    }

    #[test]
    fn dot_sector_2m1_noninteracting_diagonal() {
        let p = fig_dot();
        let th = 0.4;
        let sector = Sector::new(2, -1).unwrap();
        let basis = Model::Dot(p).sector_basis(sector).unwrap();
        let m = build_dot_many_body(&p, th, sector).unwrap().matrix;
        let e = |x: f64| Complex64::from_polar(1.0, x);
        let cases = [
            (vec![0, 3], e(th) + I * (0.2 - 0.25)),
            (vec![1, 2], e(-th) + I * (-0.1 + 0.35)),
            (vec![0, 1], real(2.0 * th.cos()) + I * (0.2 - 0.1)),
            (vec![2, 3], I * (0.35 - 0.25)),
        ];
        for (modes, value) in cases {
            let k = basis.index_of(FockState::from_modes(&modes)).unwrap();
            assert!(close(m[(k, k)], value));
        }
        assert!((m.clone() - CMatrix::from_diagonal(&m.diagonal())).norm() == 0.0);
    }

    #[test]
    fn dot_interaction_is_i_times_hermitian() {
        let only_int = DotParams { lambda: 0.0, eps_a_up: 0.0, eps_a_down: 0.0, eps_b_up: 0.0, eps_b_down: 0.0, j: 0.8, v: -1.7 };
        let full = SectorBasis::full_space(ModeLayout::Dot).unwrap();
        let m = Model::Dot(only_int).family(&full).unwrap().at(0.0).matrix;
        let herm = m.map(|z| z * -I);
        assert!((herm.adjoint() - &herm).norm() < 1e-15);
    }

    #[test]
    fn chain_open_is_strictly_lower_in_site_order() {
        let p = ChainParams::new(5, 1.0).with_boundary(Boundary::Open);
        let up = chain_spin_block(&p, 1.0, Spin::Up);
        let mut m = up.clone();
        for _ in 0..5 {
            m = &m * &up;
        }
        assert!(m.norm() == 0.0);
        assert_eq!(up[(1, 0)], real(1.0));
        assert_eq!(up[(0, 4)], real(0.0));
        let dn = chain_spin_block(&p, 1.0, Spin::Down);
        assert_eq!(dn[(0, 1)], real(1.0));
    }

    #[test]
    fn chain_boundary_link_is_periodic_in_theta() {
        let p = ChainParams::new(4, 0.8).with_interaction(0.3, 0.5);
        let sector = Sector::new(3, -1).unwrap();
        let a = build_chain_many_body(&p, 0.0, sector).unwrap().matrix;
        let b = build_chain_many_body(&p, 2.0 * std::f64::consts::PI, sector).unwrap().matrix;
        assert!((a - b).norm() < 1e-13);
        let per = p.with_boundary(Boundary::Periodic);
        let c = build_chain_many_body(&per, 1.3, sector).unwrap().matrix;
        let d = build_chain_many_body(&p, 0.0, sector).unwrap().matrix;
        assert!((c - d).norm() < 1e-15);
    }

    #[test]
    fn chain_sector_must_fit_edge_constraint() {
        let p = ChainParams::new(7, 1.0);
        assert!(matches!(build_chain_many_body(&p, 0.0, Sector::new(1, -1).unwrap()), Err(Error::InvalidSector(_))));
        assert!(matches!(build_chain_many_body(&p, 0.0, Sector::new(17, 1).unwrap()), Err(Error::InvalidSector(_))));
        assert_eq!(build_chain_many_body(&p, 0.0, Sector::new(3, -1).unwrap()).unwrap().dim(), 28);
        assert_eq!(build_dot_many_body(&DotParams { ..fig_dot() }, 0.0, Sector::new(0, -1).unwrap()).unwrap().dim(), 0);
    }

    #[test]
    fn interaction_preserves_a_orbital_number() {
        let p = ChainParams::new(4, 1.0).with_interaction(0.9, 1.1);
        let sector = Sector::new(4, 1).unwrap();
        let model = Model::Chain(p);
        let basis = model.sector_basis(sector).unwrap();
        let m = model.family(&basis).unwrap().at(0.7).matrix;
        let layout = model.layout();
        for (r, &sr) in basis.states().iter().enumerate() {
            for (c, &sc) in basis.states().iter().enumerate() {
                if a_orbital_count(&layout, sr) != a_orbital_count(&layout, sc) {
                    assert_eq!(m[(r, c)], real(0.0));
                }
            }
        }
    }
}
