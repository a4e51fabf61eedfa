use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use pointgap::fock::{enumerate_sector, ModeLayout, Sector, SectorBasis};
use pointgap::model::{CMatrix, DotParams, Model};
use pointgap::oracles::{diagonal_flow_winding, matching_distance, FlowEntry};
use pointgap::spectral::eigenvalues;
use pointgap::topology::winding_of_family;

fn entry() -> impl Strategy<Value = FlowEntry> {
    (-2.0..2.0f64, -2.0..2.0f64, -1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64).prop_map(
        |(cr, ci, fr, fi, br, bi)| FlowEntry {
            constant: Complex64::new(cr, ci),
            forward: Complex64::new(fr, fi),
            backward: Complex64::new(br, bi),
        },
    )
}

/// Smallest `|f(θ) - r|` on a fine grid.
fn clearance(e: &FlowEntry, r: Complex64) -> f64 {
    (0..2048).map(|k| (e.eval(k as f64 * std::f64::consts::TAU / 2048.0) - r).norm()).fold(f64::INFINITY, f64::min)
}

fn dot_params() -> impl Strategy<Value = DotParams> {
    (0.3..2.0f64, prop::array::uniform4(-1.0..1.0f64)).prop_map(|(lambda, e)| DotParams {
        lambda,
        eps_a_up: e[0],
        eps_a_down: e[1],
        eps_b_up: e[2],
        eps_b_down: e[3],
        j: 0.0,
        v: 0.0,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn determinant_winding_matches_root_count(entries in prop::collection::vec(entry(), 1..5)) {
        let zero = Complex64::new(0.0, 0.0);
        prop_assume!(entries.iter().all(|e| clearance(e, zero) > 0.05));
        let oracle = diagonal_flow_winding(&entries, zero).unwrap();
        let h = |th: f64| Ok(CMatrix::from_diagonal(&DVector::from_iterator(entries.len(), entries.iter().map(|e| e.eval(th)))));
        let ed = winding_of_family(h, zero, 64).unwrap();
        prop_assert_eq!(ed.value, oracle);
        // additivity over blocks
        let parts: i64 = entries.iter().map(|e| e.winding(zero).unwrap()).sum();
        prop_assert_eq!(ed.value, parts);
    }

    #[test]
    fn free_dot_spectrum_is_sums_of_levels(p in dot_params(), theta in 0.0..std::f64::consts::TAU) {
        let model = Model::Dot(p);
        let h1 = model.one_body(theta);
        for (n, parity) in [(1u32, 1i8), (1, -1), (2, 1), (2, -1), (3, 1), (3, -1)] {
            let sector = Sector::new(n, parity).unwrap();
            let basis = model.sector_basis(sector).unwrap();
            let ed = eigenvalues(&model.many_body(theta, sector).unwrap().matrix).unwrap();
            // the one-body matrix is diagonal, so level k belongs to mode k
            let sums: Vec<Complex64> = basis
                .states()
                .iter()
                .map(|s| s.occupied_modes().map(|m| h1[(m.0, m.0)]).sum())
                .collect();
            prop_assert!(matching_distance(&ed, &sums).unwrap() < 1e-10);
        }
    }

    #[test]
    fn sectors_partition_fock_space(sites in 2usize..5) {
        let layout = ModeLayout::chain(sites).unwrap();
        let full = SectorBasis::full_space(layout).unwrap();
        let mut seen = vec![false; full.dim()];
        for n in 0..=layout.num_modes() as u32 {
            for parity in [1i8, -1] {
                let basis = enumerate_sector(layout, Sector::new(n, parity).unwrap(), &[]).unwrap();
                for s in basis.states() {
                    prop_assert_eq!(s.particle_number(), n);
                    prop_assert_eq!(s.spin_parity(&layout), parity);
                    let i = full.index_of(*s).unwrap();
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
            }
        }
        prop_assert!(seen.iter().all(|&x| x));
    }
}
