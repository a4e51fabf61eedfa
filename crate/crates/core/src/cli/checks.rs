//! Invariant suite behind `pointgap check`.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::fock::{apply_annihilation, apply_creation, FockState, ModeIndex, Sector, SectorBasis};
use crate::model::{ChainParams, DotParams, Gauge, Model};
use crate::observables::occupation_profiles;
use crate::oracles::matching_distance;
use crate::spectral::{eigenvalues, logdet_phase};
use crate::topology::{many_body_winding, one_body_invariants};

use super::presets::{reference_chain, reference_dot};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Outcome = std::result::Result<String, String>;

fn sector(n: u32, p: i8) -> Sector {
    Sector::new(n, p).expect("valid parity")
}

/// Linear combination of at most one Fock state.
type Amp = Option<(FockState, i32)>;

fn lift(r: Option<(FockState, i8)>, prefactor: i32) -> Amp {
    r.map(|(s, sg)| (s, sg as i32 * prefactor))
}

fn then(a: Amp, f: impl Fn(FockState) -> Option<(FockState, i8)>) -> Amp {
    a.and_then(|(s, sg)| lift(f(s), sg))
}

/// Sum of two single-state amplitudes.
fn add(a: Amp, b: Amp) -> Vec<(FockState, i32)> {
    match (a, b) {
        (None, None) => vec![],
        (Some(x), None) | (None, Some(x)) => vec![x],
        (Some((s, x)), Some((t, y))) if s == t => if x + y == 0 { vec![] } else { vec![(s, x + y)] },
        (Some(x), Some(y)) => vec![x, y],
    }
}

fn anticommutation() -> Outcome {
    const MODES: usize = 8;
    let mut checked = 0usize;
    for bits in 0u64..(1 << MODES) {
        let s = FockState(bits);
        for i in 0..MODES {
            for j in 0..MODES {
                let (mi, mj) = (ModeIndex(i), ModeIndex(j));
                let start: Amp = Some((s, 1));
                // {c_i, c†_j}
                let lhs = add(
                    then(then(start, |x| apply_creation(x, mj)), |x| apply_annihilation(x, mi)),
                    then(then(start, |x| apply_annihilation(x, mi)), |x| apply_creation(x, mj)),
                );
                let expect = if i == j { vec![(s, 1)] } else { vec![] };
                if lhs != expect {
                    return Err(format!("{{c_{i}, c+_{j}}} on {bits:#b} gave {lhs:?}"));
                }
                for (name, f) in [
                    ("c", apply_annihilation as fn(FockState, ModeIndex) -> Option<(FockState, i8)>),
                    ("c+", apply_creation),
                ] {
                    let r = add(
                        then(then(start, |x| f(x, mj)), |x| f(x, mi)),
                        then(then(start, |x| f(x, mi)), |x| f(x, mj)),
                    );
                    if !r.is_empty() {
                        return Err(format!("{{{name}_{i}, {name}_{j}}} on {bits:#b} does not vanish"));
                    }
                }
                checked += 3;
            }
        }
    }
    Ok(format!("{checked} anticommutators on all {} states of {MODES} modes", 1 << MODES))
}

fn block_structure_of(model: &Model, sectors: &[Sector]) -> Outcome {
    let layout = model.layout();
    let full = SectorBasis::full_space(layout).map_err(|e| e.to_string())?;
    let family = model.operator().and_then(|op| op.family_on(&full)).map_err(|e| e.to_string())?;
    for th in [0.0, 0.9, 2.7] {
        let h = family.at(th).matrix;
        let states = full.states();
        for (r, sr) in states.iter().enumerate() {
            for (c, sc) in states.iter().enumerate() {
                let same = sr.particle_number() == sc.particle_number() && sr.spin_parity(&layout) == sc.spin_parity(&layout);
                if !same && h[(r, c)].norm() != 0.0 {
                    return Err(format!("entry between {sr:?} and {sc:?} at theta {th}"));
                }
            }
        }
        for &s in sectors {
            let basis = model.sector_basis(s).map_err(|e| e.to_string())?;
            let block = model.family(&basis).map_err(|e| e.to_string())?.at(th).matrix;
            let idx: Vec<usize> = basis.states().iter().map(|st| full.index_of(*st).expect("state in full space")).collect();
            for (a, &ra) in idx.iter().enumerate() {
                for (b, &cb) in idx.iter().enumerate() {
                    if (h[(ra, cb)] - block[(a, b)]).norm() > 1e-14 {
                        return Err(format!("sector {s} block differs at ({a}, {b}), theta {th}"));
                    }
                }
                // constrained sectors must be closed inside the full space
                for (r, st) in states.iter().enumerate() {
                    if basis.index_of(*st).is_none() && h[(r, ra)].norm() != 0.0 {
                        return Err(format!("sector {s} leaks into {st:?} at theta {th}"));
                    }
                }
            }
        }
    }
    Ok(format!("{} states, sectors {:?}", full.dim(), sectors.iter().map(|s| s.to_string()).collect::<Vec<_>>()))
}

fn block_structure() -> Outcome {
    let dot = Model::Dot(reference_dot().with_interaction(0.7, 1.3));
    let chain = Model::Chain(ChainParams::new(3, 1.0).with_interaction(0.6, 1.1));
    let a = block_structure_of(&dot, &[sector(1, -1), sector(2, 1), sector(2, -1), sector(3, 1)])?;
    let b = block_structure_of(&chain, &[sector(3, -1), sector(3, 1), sector(4, 1), sector(5, -1)])?;
    Ok(format!("dot: {a}; chain: {b}"))
}

fn gauge_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for (sites, s, j, v) in [(5, sector(3, -1), 1.0, 1.0), (7, sector(3, -1), 0.4, 0.9), (5, sector(4, 1), 1.0, 1.0)] {
        let p = ChainParams::new(sites, 1.0).with_interaction(j, v);
        let a = Model::Chain(p);
        let b = Model::Chain(p.with_gauge(Gauge::Distributed));
        for th in [0.3, 1.7, 4.4] {
            let ea = eigenvalues(&a.many_body(th, s).map_err(|e| e.to_string())?.matrix).map_err(|e| e.to_string())?;
            let eb = eigenvalues(&b.many_body(th, s).map_err(|e| e.to_string())?.matrix).map_err(|e| e.to_string())?;
            let d = matching_distance(&ea, &eb).map_err(|e| e.to_string())?;
            worst = worst.max(d);
            if d > 1e-10 {
                return Err(format!("L={sites} sector {s} theta {th}: distance {d:e}"));
            }
            let oa = eigenvalues(&a.one_body(th)).map_err(|e| e.to_string())?;
            let ob = eigenvalues(&b.one_body(th)).map_err(|e| e.to_string())?;
            let d = matching_distance(&oa, &ob).map_err(|e| e.to_string())?;
            worst = worst.max(d);
            if d > 1e-10 {
                return Err(format!("L={sites} one-body theta {th}: distance {d:e}"));
            }
        }
    }
    Ok(format!("max spectral distance {worst:e}"))
}

fn flow_cases() -> Vec<(String, Model, Option<Sector>)> {
    let dot0 = Model::Dot(reference_dot());
    let dot1 = Model::Dot(reference_dot().with_interaction(1.0, 1.0));
    let ch0 = Model::Chain(reference_chain());
    let ch1 = Model::Chain(reference_chain().with_interaction(1.0, 1.0));
    let mut out = vec![
        ("dot one-body".to_string(), dot0, None),
        ("chain one-body".to_string(), ch0, None),
    ];
    for (tag, m) in [("dot J=V=0", dot0), ("dot J=V=1", dot1)] {
        for s in [sector(1, -1), sector(2, 1), sector(2, -1)] {
            out.push((format!("{tag} {s}"), m, Some(s)));
        }
    }
    for (tag, m) in [("chain J=V=0", ch0), ("chain J=V=1", ch1)] {
        out.push((format!("{tag} (3,-1)"), m, Some(sector(3, -1))));
    }
    out
}

fn spectrum(model: &Model, s: Option<Sector>, th: f64) -> std::result::Result<Vec<Complex64>, String> {
    let m = match s {
        Some(s) => model.many_body(th, s).map_err(|e| e.to_string())?.matrix,
        None => model.one_body(th),
    };
    eigenvalues(&m).map_err(|e| e.to_string())
}

fn periodicity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (label, model, s) in flow_cases() {
        let d = matching_distance(&spectrum(&model, s, 0.0)?, &spectrum(&model, s, 2.0 * std::f64::consts::PI)?)
            .map_err(|e| e.to_string())?;
        worst = worst.max(d);
        if d > 1e-8 {
            return Err(format!("{label}: distance {d:e} between theta 0 and 2 pi"));
        }
    }
    Ok(format!("{} flows, max distance {worst:e}", flow_cases().len()))
}

fn grid_doubling() -> Outcome {
    let zero = Complex64::new(0.0, 0.0);
    let mut n = 0;
    for (label, model, s) in flow_cases() {
        let pair = |grid| -> std::result::Result<(i64, i64), String> {
            match s {
                Some(s) => many_body_winding(&model, s, zero, grid).map(|w| (w.value, 0)),
                None => one_body_invariants(&model, zero, grid).map(|(w, ws)| (w.value, ws.twice)),
            }
            .map_err(|e| format!("{label}: {e}"))
        };
        let (a, b) = (pair(64)?, pair(128)?);
        if a != b {
            return Err(format!("{label}: {a:?} on 64 points, {b:?} on 128"));
        }
        n += 1;
    }
    Ok(format!("{n} windings unchanged from 64 to 128 points"))
}

fn determinant_consistency() -> Outcome {
    let refs = [Complex64::new(0.0, 0.0), Complex64::new(0.1, 0.3), Complex64::new(-0.04, 0.0)];
    let mut worst: f64 = 0.0;
    let mut cases = flow_cases();
    cases.push(("chain J=V=1 (4,1)".into(), Model::Chain(reference_chain().with_interaction(1.0, 1.0)), Some(sector(4, 1))));
    for (label, model, s) in cases {
        for th in [0.2, 1.1, 3.9] {
            let m = match s {
                Some(s) => model.many_body(th, s).map_err(|e| e.to_string())?.matrix,
                None => model.one_body(th),
            };
            let eig = eigenvalues(&m).map_err(|e| e.to_string())?;
            for &r in &refs {
                let Ok(ld) = logdet_phase(&m, r) else { continue };
                let det = Complex64::from_polar(ld.log_magnitude.exp(), ld.phase);
                let prod: Complex64 = eig.iter().map(|e| e - r).product();
                let rel = (det - prod).norm() / prod.norm();
                worst = worst.max(rel);
                if !(rel <= 1e-8) {
                    return Err(format!("{label} theta {th} ref {r}: relative mismatch {rel:e}"));
                }
            }
        }
    }
    Ok(format!("max relative mismatch {worst:e}"))
}

fn sum_rules() -> Outcome {
    let mut count = 0;
    let dot = Model::Dot(DotParams { lambda: 0.8, ..reference_dot().with_interaction(1.0, 0.6) });
    let ch = Model::Chain(reference_chain().with_interaction(1.0, 1.0));
    let cases = [(dot, sector(2, -1), 0usize), (ch, sector(3, -1), 2), (ch, sector(4, 1), 2)];
    for (model, s, frozen) in cases {
        let basis = model.sector_basis(s).map_err(|e| e.to_string())?;
        let family = model.family(&basis).map_err(|e| e.to_string())?;
        let n_a = match model {
            // the dot mixes a and b, so only the total is fixed
            Model::Dot(_) => None,
            Model::Chain(_) => Some(s.n as f64 - frozen as f64),
        };
        for th in [0.0, 2.1] {
            for prof in occupation_profiles(&family.at(th), &basis).map_err(|e| e.to_string())? {
                let total: f64 = prof.per_mode.iter().map(|(_, v)| v).sum();
                if (total - s.n as f64).abs() > 1e-9 {
                    return Err(format!("sector {s}: total occupation {total}"));
                }
                if let Some(na) = n_a {
                    if (prof.n_a_total() - na).abs() > 1e-9 {
                        return Err(format!("sector {s}: a-orbital occupation {}", prof.n_a_total()));
                    }
                }
                if prof.per_mode.iter().any(|(_, v)| *v < -1e-9 || *v > 1.0 + 1e-9) {
                    return Err(format!("sector {s}: occupation outside [0, 1]"));
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} profiles"))
}

/// Runs every check in a fixed order.
pub fn run_all() -> Vec<CheckResult> {
    let suite: [(&'static str, fn() -> Outcome); 7] = [
        ("fermionic anticommutation", anticommutation),
        ("sector block structure", block_structure),
        ("twist gauge equivalence", gauge_equivalence),
        ("theta periodicity", periodicity),
        ("winding grid doubling", grid_doubling),
        ("determinant consistency", determinant_consistency),
        ("occupation sum rules", sum_rules),
    ];
    suite
        .into_iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let r = f();
            let seconds = start.elapsed().as_secs_f64();
            match r {
                Ok(detail) => CheckResult { name, passed: true, detail, seconds },
                Err(detail) => CheckResult { name, passed: false, detail, seconds },
            }
        })
        .collect()
}
