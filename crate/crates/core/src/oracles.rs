//! Closed-form spectra, first-order chain eigenvalues and analytic windings.
//!
//! Nothing here touches the eigensolver; these are the independent side of
//! every numerical cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeIndex, SectorBasis};
use crate::model::{ChainParams, DotParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Symmetric and antisymmetric combinations of the dot's imaginary offsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DotClosedFormParams {
    pub delta0: f64,
    pub delta3: f64,
    pub delta0_prime: f64,
    pub delta3_prime: f64,
}

impl DotClosedFormParams {
    pub fn new(p: &DotParams) -> Self {
        DotClosedFormParams {
            delta0: 0.5 * (p.eps_a_up + p.eps_b_up + p.eps_a_down + p.eps_b_down),
            delta3: 0.5 * (p.eps_a_up + p.eps_b_up - p.eps_a_down - p.eps_b_down),
            delta0_prime: 0.5 * (p.eps_a_up + p.eps_b_down + p.eps_a_down + p.eps_b_up),
            delta3_prime: 0.5 * (p.eps_a_up + p.eps_b_down - p.eps_a_down - p.eps_b_up),
        }
    }
}

/// How the hopping amplitude enters the square roots of the dot closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaScaling {
    /// `√((λ sinθ + δ)² + g²)`, exact for every λ.
    #[default]
    Consistent,
    /// `√((sinθ + δ)² + g²)`, which agrees with the above only at λ = 1.
    Strict,
}

fn dot_pair(p: &DotParams, theta: f64, delta0: f64, delta3: f64, coupling: f64, scaling: LambdaScaling) -> [Complex64; 2] {
    let s = match scaling {
        LambdaScaling::Consistent => p.lambda * theta.sin(),
        LambdaScaling::Strict => theta.sin(),
    };
    let mean = real(p.lambda * theta.cos()) + I * delta0;
    let root = ((s + delta3).powi(2) + (coupling / 2.0).powi(2)).sqrt();
    [mean + I * root, mean - I * root]
}

/// `(E₊, E₋)` of the dot's two-particle sector with `P = +1`.
pub fn dot_sector21_eigenvalues(p: &DotParams, theta: f64, scaling: LambdaScaling) -> [Complex64; 2] {
    let d = DotClosedFormParams::new(p);
    dot_pair(p, theta, d.delta0, d.delta3, p.v, scaling)
}

/// `(E₊, E₋, E′, E″)` of the dot's two-particle sector with `P = -1`.
pub fn dot_sector2m1_eigenvalues(p: &DotParams, theta: f64, scaling: LambdaScaling) -> [Complex64; 4] {
    let d = DotClosedFormParams::new(p);
    let [ep, em] = dot_pair(p, theta, d.delta0_prime, d.delta3_prime, p.j, scaling);
    let e1 = real(2.0 * p.lambda * theta.cos()) + I * (p.eps_a_up + p.eps_a_down);
    let e2 = I * (p.eps_b_up + p.eps_b_down);
    [ep, em, e1, e2]
}

/// Which rendering of the first-order quadruplet formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstOrderForm {
    /// `C²_{p,m} = [(V² - J²) ± √(V⁴ + J⁴ - 2V²J² Re ω⁴ⁿ)] / (tωⁿL)²` as written.
    #[default]
    Literal,
    /// Exact diagonalization of the first-order 4×4 block for this crate's
    /// Hamiltonian: `C² → -C²` and `J` replaced by the exchange coefficient.
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationParams {
    pub n: usize,
    pub omega: Complex64,
    pub cp2: Complex64,
    pub cm2: Complex64,
}

/// `e^{2πik/L}` with `k` reduced modulo `L` first.
fn root_of_unity(k: usize, l: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (k % l) as f64 / l as f64)
}

pub fn perturbation_params(p: &ChainParams, n: usize, form: FirstOrderForm) -> Result<PerturbationParams> {
    p.validate()?;
    let l = p.sites;
    if n >= l {
        return Err(Error::InvalidParameter(format!("mode index {n} out of range for {l} sites")));
    }
    let omega = root_of_unity(1, l);
    let omega_n = root_of_unity(n, l);
    let (j, v, sign) = match form {
        FirstOrderForm::Literal => (p.j, p.v, 1.0),
        FirstOrderForm::Effective => (p.exchange.factor() * p.j, p.v, -1.0),
    };
    let re4 = root_of_unity(4 * n, l).re;
    let disc = real(v.powi(4) + j.powi(4) - 2.0 * v * v * j * j * re4).sqrt();
    let pre = (omega_n * p.hopping * l as f64).powi(2).inv() * sign;
    let base = real(v * v - j * j);
    Ok(PerturbationParams { n, omega, cp2: pre * (base + disc), cm2: pre * (base - disc) })
}

/// `[E_{p,+}, E_{p,-}, E_{m,+}, E_{m,-}]` for the quadruplet at mode `n`.
pub fn chain_first_order_eigenvalues(p: &ChainParams, n: usize, theta: f64, form: FirstOrderForm) -> Result<[Complex64; 4]> {
    let pp = perturbation_params(p, n, form)?;
    let l = p.sites as f64;
    let lead = root_of_unity(n, p.sites) * p.hopping;
    let (c, s) = ((theta / l).cos(), (theta / l).sin());
    let branch = |c2: Complex64| (c2 - s * s).sqrt();
    let (rp, rm) = (branch(pp.cp2), branch(pp.cm2));
    Ok([lead * (c + rp), lead * (c - rp), lead * (c + rm), lead * (c - rm)])
}

/// All `4L` first-order eigenvalues, quadruplet by quadruplet.
pub fn chain_first_order_spectrum(p: &ChainParams, theta: f64, form: FirstOrderForm) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(4 * p.sites);
    for n in 0..p.sites {
        out.extend(chain_first_order_eigenvalues(p, n, theta, form)?);
    }
    Ok(out)
}

/// Scalar flow `c + α e^{iθ} + β e^{-iθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowEntry {
    pub constant: Complex64,
    pub forward: Complex64,
    pub backward: Complex64,
}

impl FlowEntry {
    pub const ZERO: FlowEntry = FlowEntry {
        constant: Complex64::new(0.0, 0.0),
        forward: Complex64::new(0.0, 0.0),
        backward: Complex64::new(0.0, 0.0),
    };

    pub fn constant(c: Complex64) -> Self {
        FlowEntry { constant: c, ..Self::ZERO }
    }

    /// `λ e^{±iθ} + c`.
    pub fn circle(lambda: f64, orientation: i8, center: Complex64) -> Self {
        let mut e = Self::constant(center);
        if orientation >= 0 {
            e.forward = real(lambda);
        } else {
            e.backward = real(lambda);
        }
        e
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.constant + self.forward * Complex64::from_polar(1.0, theta) + self.backward * Complex64::from_polar(1.0, -theta)
    }

    /// Winding of `entry(θ) - reference` about the origin.
    ///
    /// `e^{iθ}(f(θ) - r)` is the quadratic `αz² + (c - r)z + β` on the unit
    /// circle, so the winding is its number of roots inside the disk minus one.
    pub fn winding(&self, reference: Complex64) -> Result<i64> {
        let (a, b, c) = (self.forward, self.constant - reference, self.backward);
        let scale = a.norm().max(b.norm()).max(c.norm());
        let on_ref = || Error::ReferenceOnSpectrum { re: reference.re, im: reference.im, theta: None };
        if scale == 0.0 {
            return Err(on_ref());
        }
        let tiny = 1e-14 * scale;
        let roots: Vec<Complex64> = if a.norm() > tiny {
            let disc = (b * b - a * c * 4.0).sqrt();
            // pick the sign that avoids cancellation, then use Vieta for the other
            let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) / 2.0 } else { -(b - disc) / 2.0 };
            if q.norm() == 0.0 {
                vec![Complex64::new(0.0, 0.0); 2]
            } else {
                vec![q / a, c / q]
            }
        } else if b.norm() > tiny {
            vec![-c / b]
        } else {
            // |f - r| = |β| on the whole circle
            return Ok(-1);
        };
        let mut inside = 0;
        for z in roots {
            let r = z.norm();
            if (r - 1.0).abs() < 1e-9 {
                return Err(on_ref());
            }
            if r < 1.0 {
                inside += 1;
            }
        }
        Ok(inside - 1)
    }
}

impl std::ops::Add for FlowEntry {
    type Output = FlowEntry;

    fn add(self, o: FlowEntry) -> FlowEntry {
        FlowEntry {
            constant: self.constant + o.constant,
            forward: self.forward + o.forward,
            backward: self.backward + o.backward,
        }
    }
}

/// Winding of `Π_k (entry_k(θ) - reference)`, the sum of per-entry windings.
pub fn diagonal_flow_winding(entries: &[FlowEntry], reference: Complex64) -> Result<i64> {
    entries.iter().map(|e| e.winding(reference)).sum()
}

/// The four diagonal one-body entries of the dot, in mode order.
pub fn dot_one_body_entries(p: &DotParams) -> [FlowEntry; 4] {
    [
        FlowEntry::circle(p.lambda, 1, I * p.eps_a_up),
        FlowEntry::circle(p.lambda, -1, I * p.eps_a_down),
        FlowEntry::constant(I * p.eps_b_up),
        FlowEntry::constant(I * p.eps_b_down),
    ]
}

/// Energy flows of each Fock state of a noninteracting dot sector: the sum of
/// the occupied modes' one-body entries.
pub fn dot_fock_entries(p: &DotParams, basis: &SectorBasis) -> Result<Vec<FlowEntry>> {
    if p.j != 0.0 || p.v != 0.0 {
        return Err(Error::InvalidParameter("Fock-state flows are diagonal only for J = V = 0".into()));
    }
    let one = dot_one_body_entries(p);
    Ok(basis
        .states()
        .iter()
        .map(|s| (0..4).filter(|&m| s.is_occupied(ModeIndex(m))).fold(FlowEntry::ZERO, |acc, m| acc + one[m]))
        .collect())
}

/// Minimum-total-cost pairing of two equally sized point sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    /// `pairing[i]` is the index in the second set matched to `a[i]`.
    pub pairing: Vec<usize>,
    pub total: f64,
    /// Largest distance within a matched pair.
    pub max: f64,
}

/// Hungarian algorithm on the `|a_i - b_j|` cost matrix.
pub fn optimal_assignment(a: &[Complex64], b: &[Complex64]) -> Result<Assignment> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::InvalidParameter(format!("cannot pair {} points with {}", n, b.len())));
    }
    let cost = |i: usize, j: usize| (a[i - 1] - b[j - 1]).norm();
    // 1-based potentials; column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairing = vec![0; n];
    for j in 1..=n {
        pairing[owner[j] - 1] = j - 1;
    }
    let dists: Vec<f64> = (0..n).map(|i| (a[i] - b[pairing[i]]).norm()).collect();
    Ok(Assignment { pairing, total: dists.iter().sum(), max: dists.iter().copied().fold(0.0, f64::max) })
}

/// Largest pair distance under the optimal assignment.
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    optimal_assignment(a, b).map(|x| x.max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig1() -> DotParams {
        DotParams { lambda: 1.0, eps_a_up: 0.2, eps_a_down: -0.1, eps_b_up: 0.35, eps_b_down: -0.25, j: 0.0, v: 0.0 }
    }

    #[test]
    fn strict_closed_form_at_quarter_turn() {
        let p = fig1().with_interaction(1.0, 1.0);
        let d = DotClosedFormParams::new(&p);
        assert!((d.delta0 - 0.1).abs() < 1e-15 && (d.delta3 - 0.45).abs() < 1e-15);
        let [ep, em] = dot_sector21_eigenvalues(&p, PI / 2.0, LambdaScaling::Strict);
        assert!(ep.re.abs() < 1e-15 && em.re.abs() < 1e-15);
        assert!(((ep.im - 0.1) * 1e5).round() / 1e5 == 1.53379);
        assert!(((0.1 - em.im) * 1e5).round() / 1e5 == 1.53379);
    }

    #[test]
    fn noninteracting_pair_is_diagonal() {
        let p = DotParams { lambda: 0.7, ..fig1() };
        for th in [0.0, 0.7, 2.0, 4.0] {
            let e = dot_sector21_eigenvalues(&p, th, LambdaScaling::Consistent);
            let diag = [
                Complex64::from_polar(0.7, th) + I * (p.eps_a_up + p.eps_b_up),
                Complex64::from_polar(0.7, -th) + I * (p.eps_a_down + p.eps_b_down),
            ];
            let d = matching_distance(&e, &diag).unwrap();
            assert!(d < 1e-14, "theta {th}: {d}");
        }
    }

    #[test]
    fn line_gap_bounded_by_v() {
        let p = fig1().with_interaction(1.0, 1.0);
        for k in 0..64 {
            let [ep, em] = dot_sector21_eigenvalues(&p, 2.0 * PI * k as f64 / 64.0, LambdaScaling::Consistent);
            assert!((ep - em).im >= p.v - 1e-12);
        }
    }

    #[test]
    fn e_double_prime_ignores_theta() {
        let p = fig1().with_interaction(0.8, 0.0);
        let a = dot_sector2m1_eigenvalues(&p, 0.1, LambdaScaling::Consistent)[3];
        let b = dot_sector2m1_eigenvalues(&p, 5.0, LambdaScaling::Consistent)[3];
        assert_eq!(a, b);
    }

    #[test]
    fn equal_couplings_leave_mode_zero_unsplit() {
        let p = ChainParams::new(7, 1.0).with_interaction(0.3, 0.3);
        let pp = perturbation_params(&p, 0, FirstOrderForm::Literal).unwrap();
        assert!(pp.cp2.norm() < 1e-15 && pp.cm2.norm() < 1e-15);
        let e = chain_first_order_eigenvalues(&p, 0, 0.9, FirstOrderForm::Literal).unwrap();
        let up = Complex64::from_polar(1.0, 0.9 / 7.0);
        let down = Complex64::from_polar(1.0, -0.9 / 7.0);
        for z in e {
            assert!((z - up).norm() < 1e-14 || (z - down).norm() < 1e-14);
        }
    }

    #[test]
    fn free_first_order_spectrum() {
        let p = ChainParams::new(5, 1.3);
        let spec = chain_first_order_spectrum(&p, 0.4, FirstOrderForm::Effective).unwrap();
        assert_eq!(spec.len(), 20);
        for n in 0..5 {
            let w = Complex64::from_polar(1.3, 2.0 * PI * n as f64 / 5.0);
            let targets = [w * Complex64::from_polar(1.0, 0.08), w * Complex64::from_polar(1.0, -0.08)];
            for z in &spec[4 * n..4 * n + 4] {
                assert!(targets.iter().any(|t| (z - t).norm() < 1e-14));
            }
        }
        assert!(chain_first_order_eigenvalues(&p, 5, 0.0, FirstOrderForm::Literal).is_err());
    }

    #[test]
    fn circle_windings() {
        assert_eq!(diagonal_flow_winding(&[FlowEntry::circle(1.0, 1, c(0.0, 0.2))], c(0.0, 0.0)).unwrap(), 1);
        let pair = [FlowEntry::circle(1.0, 1, c(0.0, 0.2)), FlowEntry::circle(1.0, -1, c(0.0, -0.1))];
        assert_eq!(diagonal_flow_winding(&pair, c(0.0, 0.0)).unwrap(), 0);
        assert_eq!(diagonal_flow_winding(&[FlowEntry::constant(c(0.0, 0.35))], c(0.0, 0.0)).unwrap(), 0);
        assert_eq!(FlowEntry::circle(1.0, -1, c(3.0, 0.0)).winding(c(0.0, 0.0)).unwrap(), 0);
        assert_eq!(FlowEntry::circle(-2.0, 1, c(0.5, 0.0)).winding(c(0.0, 0.0)).unwrap(), 1);
    }

    #[test]
    fn entry_through_reference_is_an_error() {
        assert!(FlowEntry::circle(1.0, 1, c(0.0, 0.0)).winding(c(1.0, 0.0)).is_err());
        assert!(FlowEntry::constant(c(0.5, 0.5)).winding(c(0.5, 0.5)).is_err());
    }

    #[test]
    fn cosine_flow_does_not_wind() {
        // 2cosθ + 0.1i is a segment
        let e = FlowEntry { constant: c(0.0, 0.1), forward: real(1.0), backward: real(1.0) };
        assert_eq!(e.winding(c(0.0, 0.0)).unwrap(), 0);
        assert!(FlowEntry { constant: c(0.0, 0.0), ..e }.winding(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn hungarian_beats_greedy() {
        let a = [c(0.0, 0.0), c(1.0, 0.0)];
        let b = [c(0.9, 0.0), c(2.0, 0.0)];
        let asg = optimal_assignment(&a, &b).unwrap();
        assert_eq!(asg.pairing, vec![0, 1]);
        assert!((asg.total - 1.9).abs() < 1e-15);
        assert!((asg.max - 1.0).abs() < 1e-15);
        assert!(optimal_assignment(&a, &b[..1]).is_err());
        assert_eq!(optimal_assignment(&[], &[]).unwrap().total, 0.0);
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let pts = |seed: u64, n: usize| -> Vec<Complex64> {
            let mut x = seed;
            (0..n)
                .map(|_| {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let a = (x >> 11) as f64 / (1u64 << 53) as f64;
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let b = (x >> 11) as f64 / (1u64 << 53) as f64;
                    c(a, b)
                })
                .collect()
        };
        fn perms(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
            if k == v.len() {
                out.push(v.clone());
                return;
            }
            for i in k..v.len() {
                v.swap(k, i);
                perms(v, k + 1, out);
                v.swap(k, i);
            }
        }
        for seed in 0..20 {
            let (a, b) = (pts(seed, 6), pts(seed + 100, 6));
            let mut all = Vec::new();
            perms(&mut (0..6).collect(), 0, &mut all);
            let best = all
                .iter()
                .map(|p| (0..6).map(|i| (a[i] - b[p[i]]).norm()).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            assert!((optimal_assignment(&a, &b).unwrap().total - best).abs() < 1e-12);
        }
    }
}
