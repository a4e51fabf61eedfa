//! Regenerates `tests/fixtures/skin_thresholds.json`.
//!
//! The up-spin edge fraction is fixed from the 7 × 7 open one-body block: a
//! single up electron on the nilpotent chain sits in `ker h`, and the
//! threshold is set below that value with room for the b-orbital spectators.
//! The interacting bounds are relative to the noninteracting run of the same
//! sector, so both runs are recorded.
//!
//! cargo run --release --example skin_thresholds [-- <output path>]

use std::path::PathBuf;

use pointgap::fock::{Sector, Spin};
use pointgap::model::{chain_spin_block, Boundary, ChainParams, Model};
use pointgap::observables::skin_analysis;
use serde_json::json;

fn main() -> pointgap::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/skin_thresholds.json"));
    let sites = 7;
    let base = ChainParams::new(sites, 1.0);
    let sector = Sector::new(3, -1)?;
    let n_grid = 256;

    // one-body: kernel of the open up block, share on the two rightmost sites
    let h = chain_spin_block(&base.with_boundary(Boundary::Open), 0.0, Spin::Up);
    let svd = h.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
    let kernel: Vec<f64> = (0..sites).map(|j| v_t[(k, j)].norm_sqr()).collect();
    let one_body_right = kernel[sites - 2] + kernel[sites - 1];

    let free = skin_analysis(&Model::Chain(base), sector, n_grid)?.sensitivity;
    let inter = skin_analysis(&Model::Chain(base.with_interaction(1.0, 1.0)), sector, n_grid)?.sensitivity;
    let free_max_site = free.product_state.map_or(free.raw.max_site_occupation, |s| s.max_site_occupation);

    let fixture = json!({
        "generator": "crates/core/examples/skin_thresholds.rs",
        "chain": {"sites": sites, "hopping": 1.0},
        "sector": [3, -1],
        "n_grid": n_grid,
        "one_body_kernel_density": kernel,
        "one_body_up_right_fraction": one_body_right,
        "up_right_fraction_min": 0.6,
        "free": {
            "hausdorff": free.hausdorff_obc_pbc,
            "obc_to_pbc": free.obc_to_pbc,
            "pbc_to_obc": free.pbc_to_obc,
            "obc_spectral_radius": free.obc_spectral_radius,
            "product_up_right_fraction": free.product_state.and_then(|s| s.up_right_fraction),
            "max_site_occupation": free_max_site,
        },
        "interacting": {
            "j": 1.0,
            "v": 1.0,
            "hausdorff": inter.hausdorff_obc_pbc,
            "obc_to_pbc": inter.obc_to_pbc,
            "pbc_to_obc": inter.pbc_to_obc,
            "max_site_occupation": inter.raw.max_site_occupation,
        },
        "hausdorff_ratio_max": 0.2,
        "max_site_occupation_below": free_max_site,
    });
    if let Some(dir) = out.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&out, serde_json::to_string_pretty(&fixture)? + "\n")?;
    println!("{}", serde_json::to_string_pretty(&fixture)?);
    Ok(())
}
