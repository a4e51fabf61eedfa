//! Occupation-number basis for spinful two-orbital fermions.
//!
//! States are bitsets over single-particle modes. Bit `i` set means mode `i`
//! is occupied, and the state is understood as
//! `c†_{i1} c†_{i2} ... c†_{ik} |0>` with `i1 < i2 < ... < ik`. Acting with
//! `c†_m` or `c_m` therefore picks up `(-1)^(number of occupied modes below m)`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Widest layout a [`FockState`] can hold.
pub const MAX_MODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Orbital {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn sign(self) -> i32 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl fmt::Display for Orbital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orbital::A => "a",
            Orbital::B => "b",
        })
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "up",
            Spin::Down => "down",
        })
    }
}

/// Index of a single-particle mode inside a [`ModeLayout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex(pub usize);

/// Physical label of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct ModeLabel {
    pub site: usize,
    pub orbital: Orbital,
    pub spin: Spin,
}

/// How the single-particle modes of a model are numbered.
///
/// Dot: `(a↑, a↓, b↑, b↓) = (0, 1, 2, 3)`.
///
/// Chain of `L` sites: `(j, a, σ) = 2j + [σ = ↓]` for `j = 0..L`, then the
/// edge b-orbitals `(0, b, ↑) = 2L`, `(0, b, ↓) = 2L + 1`,
/// `(L-1, b, ↑) = 2L + 2`, `(L-1, b, ↓) = 2L + 3`. Interior sites carry no
/// b-orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeLayout {
    Dot,
    Chain { sites: usize },
}

impl ModeLayout {
    pub fn chain(sites: usize) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidParameter(format!("chain needs at least 2 sites, got {sites}")));
        }
        let layout = ModeLayout::Chain { sites };
        if layout.num_modes() > MAX_MODES {
            return Err(Error::TooManyModes(layout.num_modes()));
        }
        Ok(layout)
    }

    pub fn num_modes(&self) -> usize {
        match *self {
            ModeLayout::Dot => 4,
            ModeLayout::Chain { sites } => 2 * sites + 4,
        }
    }

    pub fn num_sites(&self) -> usize {
        match *self {
            ModeLayout::Dot => 1,
            ModeLayout::Chain { sites } => sites,
        }
    }

    fn spin_offset(spin: Spin) -> usize {
        match spin {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    /// Mode of `(site, orbital, spin)`, or `None` when the layout has no such mode.
    pub fn mode(&self, site: usize, orbital: Orbital, spin: Spin) -> Option<ModeIndex> {
        let s = Self::spin_offset(spin);
        match (*self, orbital) {
            (ModeLayout::Dot, Orbital::A) if site == 0 => Some(ModeIndex(s)),
            (ModeLayout::Dot, Orbital::B) if site == 0 => Some(ModeIndex(2 + s)),
            (ModeLayout::Dot, _) => None,
            (ModeLayout::Chain { sites }, Orbital::A) if site < sites => Some(ModeIndex(2 * site + s)),
            (ModeLayout::Chain { sites }, Orbital::B) if site == 0 => Some(ModeIndex(2 * sites + s)),
            (ModeLayout::Chain { sites }, Orbital::B) if site == sites - 1 => Some(ModeIndex(2 * sites + 2 + s)),
            (ModeLayout::Chain { .. }, _) => None,
        }
    }

    pub fn label(&self, mode: ModeIndex) -> ModeLabel {
        let m = mode.0;
        let spin = if m % 2 == 0 { Spin::Up } else { Spin::Down };
        match *self {
            ModeLayout::Dot => ModeLabel {
                site: 0,
                orbital: if m < 2 { Orbital::A } else { Orbital::B },
                spin,
            },
            ModeLayout::Chain { sites } => {
                if m < 2 * sites {
                    ModeLabel { site: m / 2, orbital: Orbital::A, spin }
                } else {
                    let site = if m < 2 * sites + 2 { 0 } else { sites - 1 };
                    ModeLabel { site, orbital: Orbital::B, spin }
                }
            }
        }
    }

    pub fn labels(&self) -> Vec<ModeLabel> {
        (0..self.num_modes()).map(|m| self.label(ModeIndex(m))).collect()
    }

    /// Bitmask of all spin-up modes (the even indices in both layouts).
    pub fn up_mask(&self) -> u64 {
        (0..self.num_modes()).step_by(2).fold(0, |acc, m| acc | 1 << m)
    }

    pub fn orbital_mask(&self, orbital: Orbital) -> u64 {
        (0..self.num_modes())
            .filter(|&m| self.label(ModeIndex(m)).orbital == orbital)
            .fold(0, |acc, m| acc | 1 << m)
    }

    /// The chain constraint: each edge b-site holds exactly one fermion.
    pub fn edge_b_constraints(&self) -> Vec<OccupationConstraint> {
        match *self {
            ModeLayout::Dot => Vec::new(),
            ModeLayout::Chain { sites } => [0, sites - 1]
                .into_iter()
                .map(|j| OccupationConstraint {
                    modes: vec![
                        self.mode(j, Orbital::B, Spin::Up).expect("edge b mode"),
                        self.mode(j, Orbital::B, Spin::Down).expect("edge b mode"),
                    ],
                    count: 1,
                })
                .collect(),
        }
    }
}

/// Occupation bitset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FockState(pub u64);

impl FockState {
    pub const VACUUM: FockState = FockState(0);

    pub fn from_modes(modes: &[usize]) -> FockState {
        FockState(modes.iter().fold(0, |acc, &m| acc | 1 << m))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_occupied(self, m: ModeIndex) -> bool {
        self.0 >> m.0 & 1 == 1
    }

    pub fn particle_number(self) -> u32 {
        self.0.count_ones()
    }

    pub fn count_in(self, mask: u64) -> u32 {
        (self.0 & mask).count_ones()
    }

    /// `(-1)^{N↑}`.
    pub fn spin_parity(self, layout: &ModeLayout) -> i8 {
        if self.count_in(layout.up_mask()) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// `2 S^z = N↑ - N↓`.
    pub fn twice_sz(self, layout: &ModeLayout) -> i32 {
        let up = self.count_in(layout.up_mask()) as i32;
        up - (self.particle_number() as i32 - up)
    }

    fn sign_below(self, m: ModeIndex) -> i8 {
        let below = self.0 & ((1u64 << m.0) - 1);
        if below.count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn occupied_modes(self) -> impl Iterator<Item = ModeIndex> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let m = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(ModeIndex(m))
        })
    }
}

/// `c†_m |state>`, or `None` when the mode is already occupied.
pub fn apply_creation(state: FockState, m: ModeIndex) -> Option<(FockState, i8)> {
    if state.is_occupied(m) {
        return None;
    }
    Some((FockState(state.0 | 1 << m.0), state.sign_below(m)))
}

/// `c_m |state>`, or `None` when the mode is empty.
pub fn apply_annihilation(state: FockState, m: ModeIndex) -> Option<(FockState, i8)> {
    if !state.is_occupied(m) {
        return None;
    }
    Some((FockState(state.0 & !(1 << m.0)), state.sign_below(m)))
}

/// A single creation or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create(ModeIndex),
    Annihilate(ModeIndex),
}

impl Ladder {
    pub fn apply(self, state: FockState) -> Option<(FockState, i8)> {
        match self {
            Ladder::Create(m) => apply_creation(state, m),
            Ladder::Annihilate(m) => apply_annihilation(state, m),
        }
    }
}

/// Applies `ops` in slice order, i.e. `ops[0]` acts first.
pub fn apply_string(state: FockState, ops: &[Ladder]) -> Option<(FockState, i8)> {
    ops.iter().try_fold((state, 1i8), |(s, sign), op| op.apply(s).map(|(t, g)| (t, sign * g)))
}

/// `c†_i c_j`, application order.
pub fn hop_string(to: ModeIndex, from: ModeIndex) -> [Ladder; 2] {
    [Ladder::Annihilate(from), Ladder::Create(to)]
}

/// `S^+ = c†_↑ c_↓` (raise) or `S^- = c†_↓ c_↑` on one orbital of one site.
pub fn spin_flip_string(layout: &ModeLayout, site: usize, orbital: Orbital, raise: bool) -> Result<[Ladder; 2]> {
    let up = layout
        .mode(site, orbital, Spin::Up)
        .ok_or_else(|| Error::InvalidParameter(format!("layout has no mode ({site}, {orbital})")))?;
    let down = layout.mode(site, orbital, Spin::Down).expect("spin partner exists");
    Ok(if raise { hop_string(up, down) } else { hop_string(down, up) })
}

/// Symmetry sector label: particle number and spin parity `(-1)^{N↑}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Sector {
    pub n: u32,
    pub parity: i8,
}

impl Sector {
    pub fn new(n: u32, parity: i8) -> Result<Self> {
        if parity != 1 && parity != -1 {
            return Err(Error::InvalidParameter(format!("spin parity must be +1 or -1, got {parity}")));
        }
        Ok(Sector { n, parity })
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.parity)
    }
}

/// Exactly `count` of `modes` are occupied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationConstraint {
    pub modes: Vec<ModeIndex>,
    pub count: u32,
}

impl OccupationConstraint {
    pub fn mask(&self) -> u64 {
        self.modes.iter().fold(0, |acc, m| acc | 1 << m.0)
    }

    pub fn holds(&self, state: FockState) -> bool {
        state.count_in(self.mask()) == self.count
    }
}

/// Ordered basis of one symmetry sector.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    layout: ModeLayout,
    sector: Option<Sector>,
    states: Vec<FockState>,
    index_of: HashMap<FockState, usize>,
    constraints: Vec<OccupationConstraint>,
}

impl SectorBasis {
    fn from_states(
        layout: ModeLayout,
        sector: Option<Sector>,
        states: Vec<FockState>,
        constraints: Vec<OccupationConstraint>,
    ) -> Self {
        let index_of = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        SectorBasis { layout, sector, states, index_of, constraints }
    }

    /// Every state of the layout's Fock space, ascending.
    pub fn full_space(layout: ModeLayout) -> Result<Self> {
        let m = layout.num_modes();
        if m > 24 {
            return Err(Error::TooManyModes(m));
        }
        let states = (0..1u64 << m).map(FockState).collect();
        Ok(Self::from_states(layout, None, states, Vec::new()))
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    /// `None` for the full Fock space.
    pub fn sector(&self) -> Option<Sector> {
        self.sector
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn constraints(&self) -> &[OccupationConstraint] {
        &self.constraints
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: FockState) -> Option<usize> {
        self.index_of.get(&state).copied()
    }
}

/// Next larger integer with the same popcount (Gosper's hack).
fn next_combination(x: u64) -> Option<u64> {
    let c = x & x.wrapping_neg();
    let r = x.checked_add(c)?;
    Some((((r ^ x) >> 2) / c) | r)
}

/// All states with `N` particles and parity `P` satisfying `constraints`, in
/// ascending bitset order.
pub fn enumerate_sector(
    layout: ModeLayout,
    sector: Sector,
    constraints: &[OccupationConstraint],
) -> Result<SectorBasis> {
    let m = layout.num_modes();
    if m > MAX_MODES {
        return Err(Error::TooManyModes(m));
    }
    let n = sector.n as usize;
    if n > m {
        return Err(Error::InvalidSector(format!("{sector}: N exceeds the {m} available modes")));
    }
    let mut states = Vec::new();
    let limit = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    if n == 0 {
        let vac = FockState::VACUUM;
        if vac.spin_parity(&layout) == sector.parity && constraints.iter().all(|c| c.holds(vac)) {
            states.push(vac);
        }
    } else {
        let mut x = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        loop {
            let s = FockState(x);
            if s.spin_parity(&layout) == sector.parity && constraints.iter().all(|c| c.holds(s)) {
                states.push(s);
            }
            match next_combination(x) {
                Some(next) if next <= limit => x = next,
                _ => break,
            }
        }
    }
    Ok(SectorBasis::from_states(layout, Some(sector), states, constraints.to_vec()))
}

/// One nonzero matrix element of an operator acting on basis column `column`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionElement {
    pub column: usize,
    pub target: FockState,
    pub amplitude: i8,
}

/// Elements of `S^+` and `S^-` on `(site, orbital)` acting on every state of
/// `basis`. Spin flips change the parity, so targets lie outside the basis'
/// own sector and are returned as raw states.
pub fn spin_flip_operators(
    basis: &SectorBasis,
    site: usize,
    orbital: Orbital,
) -> Result<(Vec<ActionElement>, Vec<ActionElement>)> {
    let raise = spin_flip_string(basis.layout(), site, orbital, true)?;
    let lower = spin_flip_string(basis.layout(), site, orbital, false)?;
    let act = |ops: &[Ladder]| {
        basis
            .states()
            .iter()
            .enumerate()
            .filter_map(|(column, &s)| {
                apply_string(s, ops).map(|(target, amplitude)| ActionElement { column, target, amplitude })
            })
            .collect::<Vec<_>>()
    };
    Ok((act(&raise), act(&lower)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn creation_on_vacuum() {
        assert_eq!(apply_creation(FockState::VACUUM, ModeIndex(0)), Some((FockState(1), 1)));
        assert_eq!(apply_creation(FockState(1), ModeIndex(0)), None);
    }

    #[test]
    fn swapped_creation_order_flips_sign() {
        let a = apply_string(FockState::VACUUM, &[Ladder::Create(ModeIndex(0)), Ladder::Create(ModeIndex(1))]);
        let b = apply_string(FockState::VACUUM, &[Ladder::Create(ModeIndex(1)), Ladder::Create(ModeIndex(0))]);
        let (sa, ga) = a.unwrap();
        let (sb, gb) = b.unwrap();
        assert_eq!(sa, sb);
        assert_eq!(ga, -gb);
    }

    #[test]
    fn annihilation_signs() {
        assert_eq!(apply_annihilation(FockState(1), ModeIndex(0)), Some((FockState::VACUUM, 1)));
        assert_eq!(apply_annihilation(FockState::VACUUM, ModeIndex(0)), None);
        assert_eq!(apply_annihilation(FockState(0b11), ModeIndex(1)), Some((FockState(1), -1)));
    }

    #[test]
    fn chain_mode_layout_is_bit_exact() {
        let l = ModeLayout::chain(7).unwrap();
        assert_eq!(l.mode(0, Orbital::A, Spin::Up), Some(ModeIndex(0)));
        assert_eq!(l.mode(3, Orbital::A, Spin::Down), Some(ModeIndex(7)));
        assert_eq!(l.mode(0, Orbital::B, Spin::Up), Some(ModeIndex(14)));
        assert_eq!(l.mode(0, Orbital::B, Spin::Down), Some(ModeIndex(15)));
        assert_eq!(l.mode(6, Orbital::B, Spin::Up), Some(ModeIndex(16)));
        assert_eq!(l.mode(6, Orbital::B, Spin::Down), Some(ModeIndex(17)));
        assert_eq!(l.mode(3, Orbital::B, Spin::Up), None);
        for m in 0..l.num_modes() {
            let lab = l.label(ModeIndex(m));
            assert_eq!(l.mode(lab.site, lab.orbital, lab.spin), Some(ModeIndex(m)));
        }
        assert!(ModeLayout::chain(1).is_err());
        assert!(matches!(ModeLayout::chain(31), Err(Error::TooManyModes(66))));
    }

    #[test]
    fn dot_sector_2_plus() {
        let b = enumerate_sector(ModeLayout::Dot, Sector::new(2, 1).unwrap(), &[]).unwrap();
        // a↑b↑ and a↓b↓
        assert_eq!(b.states(), &[FockState::from_modes(&[0, 2]), FockState::from_modes(&[1, 3])]);
    }

    #[test]
    fn dot_sector_2_minus() {
        let b = enumerate_sector(ModeLayout::Dot, Sector::new(2, -1).unwrap(), &[]).unwrap();
        let mut expected = vec![
            FockState::from_modes(&[0, 3]),
            FockState::from_modes(&[1, 2]),
            FockState::from_modes(&[0, 1]),
            FockState::from_modes(&[2, 3]),
        ];
        expected.sort();
        assert_eq!(b.states(), expected.as_slice());
    }

    #[test]
    fn chain_sector_matches_brute_force() {
        let layout = ModeLayout::chain(7).unwrap();
        let cons = layout.edge_b_constraints();
        let sector = Sector::new(3, -1).unwrap();
        let b = enumerate_sector(layout, sector, &cons).unwrap();
        let brute: Vec<FockState> = (0..1u64 << layout.num_modes())
            .map(FockState)
            .filter(|s| s.particle_number() == 3 && s.spin_parity(&layout) == -1 && cons.iter().all(|c| c.holds(*s)))
            .collect();
        assert_eq!(b.dim(), 28);
        assert_eq!(b.states(), brute.as_slice());
    }

    #[test]
    fn empty_and_oversized_sectors() {
        let b = enumerate_sector(ModeLayout::Dot, Sector::new(0, -1).unwrap(), &[]).unwrap();
        assert!(b.is_empty());
        let v = enumerate_sector(ModeLayout::Dot, Sector::new(0, 1).unwrap(), &[]).unwrap();
        assert_eq!(v.states(), &[FockState::VACUUM]);
        assert!(enumerate_sector(ModeLayout::Dot, Sector::new(5, 1).unwrap(), &[]).is_err());
        assert!(Sector::new(2, 0).is_err());
    }

    #[test]
    fn sectors_cover_full_space() {
        for layout in [ModeLayout::Dot, ModeLayout::chain(3).unwrap()] {
            let m = layout.num_modes();
            let total: usize = (0..=m as u32)
                .flat_map(|n| [1i8, -1].map(|p| (n, p)))
                .map(|(n, p)| enumerate_sector(layout, Sector::new(n, p).unwrap(), &[]).unwrap().dim())
                .sum();
            assert_eq!(total, 1 << m);
        }
    }

    #[test]
    fn spin_flips_on_dot() {
        let layout = ModeLayout::Dot;
        // a↓ alone
        let basis = SectorBasis::from_states(layout, None, vec![FockState(0b0010), FockState(0b0100)], vec![]);
        let (plus, minus) = spin_flip_operators(&basis, 0, Orbital::A).unwrap();
        assert_eq!(plus.len(), 1);
        assert_eq!(plus[0].column, 0);
        assert_eq!(plus[0].target, FockState(0b0001));
        assert_eq!(plus[0].amplitude.abs(), 1);
        assert!(minus.is_empty());
        // S+ twice vanishes
        let twice = apply_string(plus[0].target, &spin_flip_string(&layout, 0, Orbital::A, true).unwrap());
        assert!(twice.is_none());
        assert!(spin_flip_operators(&basis, 1, Orbital::A).is_err());
    }

    #[test]
    fn parity_matches_sz_relation() {
        // P = e^{iπN/2} e^{iπ S^z} = i^{N + 2Sz} = i^{2 N↑} = (-1)^{N↑}
        let layout = ModeLayout::chain(3).unwrap();
        for bits in 0..1u64 << layout.num_modes() {
            let s = FockState(bits);
            let exponent = (s.particle_number() as i32 + s.twice_sz(&layout)).rem_euclid(4);
            let via_phase = match exponent {
                0 => 1,
                2 => -1,
                _ => unreachable!("N + 2Sz is always even"),
            };
            assert_eq!(via_phase, s.spin_parity(&layout));
        }
    }
}
