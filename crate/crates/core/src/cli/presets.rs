//! Named experiment presets.

use std::path::Path;

use crate::error::Result;
use crate::model::{ChainParams, DotParams, Model};
use crate::spectral::DeformationPath;

use super::config::{DeformSpec, ExperimentConfig, Task};

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub heavy: bool,
    pub config: ExperimentConfig,
}

/// Dot parameters used by every dot preset.
pub fn reference_dot() -> DotParams {
    DotParams { lambda: 1.0, eps_a_up: 0.2, eps_a_down: -0.1, eps_b_up: 0.35, eps_b_down: -0.25, j: 0.0, v: 0.0 }
}

/// Seven-site chain with unit hopping.
pub fn reference_chain() -> ChainParams {
    ChainParams::new(7, 1.0)
}

struct Builder {
    name: &'static str,
    description: &'static str,
    model: Model,
    task: Task,
    sector: Option<[i64; 2]>,
    e_ref: [f64; 2],
    deform: Option<DeformSpec>,
    heavy: bool,
}

impl Builder {
    fn new(name: &'static str, description: &'static str, model: Model, task: Task) -> Self {
        Builder { name, description, model, task, sector: None, e_ref: [0.0, 0.0], deform: None, heavy: false }
    }

    fn sector(mut self, n: i64, p: i64) -> Self {
        self.sector = Some([n, p]);
        self
    }

    fn e_ref(mut self, re: f64, im: f64) -> Self {
        self.e_ref = [re, im];
        self
    }

    fn deform(mut self, path: DeformationPath) -> Self {
        self.deform = Some(DeformSpec { path, points: 33 });
        self
    }

    fn heavy(mut self) -> Self {
        self.heavy = true;
        self
    }

    fn build(self) -> Preset {
        let mut config = ExperimentConfig::for_model(&self.model, self.task, format!("runs/{}", self.name));
        config.name = Some(self.name.to_string());
        config.sector = self.sector;
        config.e_ref = self.e_ref;
        config.deform = self.deform;
        if self.deform.is_some() {
            config.n_grid = 64;
        }
        Preset { name: self.name, description: self.description, heavy: self.heavy, config }
    }
}

pub fn catalog() -> Vec<Preset> {
    let dot = Model::Dot(reference_dot());
    let dot_int = Model::Dot(reference_dot().with_interaction(1.0, 1.0));
    let chain = Model::Chain(reference_chain());
    let chain_int = Model::Chain(reference_chain().with_interaction(1.0, 1.0));
    let chain_weak = Model::Chain(reference_chain().with_interaction(0.02, 0.03));
    use DeformationPath::{HoppingRamp, InteractionRamp};
    use Task::*;
    vec![
        Builder::new("dot-one-body-flow", "one-body spectral flow of the dot, both spin blocks", dot, Flow).build(),
        Builder::new("dot-one-body-winding", "(w, w_s) of the dot at reference 0", dot, Winding).build(),
        Builder::new("dot-n2-even-free-flow", "sector (2,1) flow without interactions", dot, Flow).sector(2, 1).build(),
        Builder::new("dot-n2-even-interacting-flow", "sector (2,1) flow at J = V = lambda = 1", dot_int, Flow)
            .sector(2, 1)
            .build(),
        Builder::new("dot-n2-even-interaction-ramp", "sector (2,1) while J = V grows from 0 to 1", dot, Deform)
            .sector(2, 1)
            .deform(InteractionRamp)
            .build(),
        Builder::new("dot-n2-even-hopping-ramp", "sector (2,1) while lambda falls to 0 with J = V = sqrt(lambda)", dot, Deform)
            .sector(2, 1)
            .deform(HoppingRamp)
            .build(),
        Builder::new("dot-n2-even-winding", "W of sector (2,1) at J = V = 1", dot_int, Winding).sector(2, 1).build(),
        Builder::new("dot-n2-odd-free-flow", "sector (2,-1) flow without interactions", dot, Flow).sector(2, -1).build(),
        Builder::new("dot-n2-odd-interacting-flow", "sector (2,-1) flow at J = V = lambda = 1", dot_int, Flow)
            .sector(2, -1)
            .build(),
        Builder::new("dot-n2-odd-interaction-ramp", "sector (2,-1) while J = V grows from 0 to 1", dot, Deform)
            .sector(2, -1)
            .deform(InteractionRamp)
            .build(),
        Builder::new("dot-n2-odd-hopping-ramp", "sector (2,-1) while lambda falls to 0 with J = V = sqrt(lambda)", dot, Deform)
            .sector(2, -1)
            .deform(HoppingRamp)
            .build(),
        Builder::new("dot-closed-form-check", "ED against the closed-form two-particle spectra", dot_int, OracleCheck).build(),
        Builder::new("chain-one-body-winding", "(w, w_s) of the seven-site chain", chain, Winding).build(),
        Builder::new("chain-n3-free-skin", "sector (3,-1), open vs twisted boundaries, J = V = 0", chain, Skin)
            .sector(3, -1)
            .build(),
        Builder::new("chain-n3-interacting-skin", "sector (3,-1), open vs twisted boundaries, J = V = 1", chain_int, Skin)
            .sector(3, -1)
            .build(),
        Builder::new("chain-n3-free-winding", "W of sector (3,-1) at reference 0, J = V = 0", chain, Winding)
            .sector(3, -1)
            .build(),
        Builder::new("chain-n3-interacting-winding", "W of sector (3,-1) at reference 0, J = V = 1", chain_int, Winding)
            .sector(3, -1)
            .build(),
        Builder::new("chain-n3-first-order-check", "first-order quadruplets against ED at J = 0.02, V = 0.03", chain_weak, OracleCheck)
            .sector(3, -1)
            .build(),
        Builder::new("chain-n4-free-skin", "sector (4,1), open vs twisted boundaries, J = V = 0", chain, Skin)
            .sector(4, 1)
            .build(),
        Builder::new("chain-n4-interacting-skin", "sector (4,1), open vs twisted boundaries, J = V = 1", chain_int, Skin)
            .sector(4, 1)
            .build(),
        Builder::new("chain-n4-free-winding", "W of sector (4,1) at reference 0.3i, J = V = 0", chain, Winding)
            .sector(4, 1)
            .e_ref(0.0, 0.3)
            .build(),
        Builder::new("chain-n4-interacting-winding", "W of sector (4,1) at reference 0.3i, J = V = 1", chain_int, Winding)
            .sector(4, 1)
            .e_ref(0.0, 0.3)
            .build(),
        Builder::new("chain-n9-free-winding", "W of sector (9,-1) at reference -0.04, J = V = 0", chain, Winding)
            .sector(9, -1)
            .e_ref(-0.04, 0.0)
            .heavy()
            .build(),
        Builder::new("chain-n9-interacting-winding", "W of sector (9,-1) at reference -0.04, J = V = 1", chain_int, Winding)
            .sector(9, -1)
            .e_ref(-0.04, 0.0)
            .heavy()
            .build(),
        Builder::new("chain-n9-free-skin", "sector (9,-1), open vs twisted boundaries, J = V = 0", chain, Skin)
            .sector(9, -1)
            .heavy()
            .build(),
        Builder::new("chain-n9-interacting-skin", "sector (9,-1), open vs twisted boundaries, J = V = 1", chain_int, Skin)
            .sector(9, -1)
            .heavy()
            .build(),
    ]
}

pub fn find(name: &str) -> Option<Preset> {
    catalog().into_iter().find(|p| p.name == name)
}

/// Writes `<name>.json` for every preset into `dir`.
pub fn write_all(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    catalog()
        .into_iter()
        .map(|p| {
            let path = dir.join(format!("{}.json", p.name));
            std::fs::write(&path, p.config.to_json())?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn catalog_is_complete_and_valid() {
        let all = catalog();
        assert!(all.len() >= 16);
        let names: HashSet<_> = all.iter().map(|p| p.name).collect();
        assert_eq!(names.len(), all.len());
        for p in &all {
            let round = ExperimentConfig::from_json(&p.config.to_json()).unwrap();
            assert_eq!(round, p.config);
            round.validate(p.heavy).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            if p.heavy {
                assert!(round.validate(false).is_err(), "{} should need --allow-heavy", p.name);
            }
        }
    }

    #[test]
    fn interacting_dot_flow_has_unit_couplings() {
        let p = find("dot-n2-even-interacting-flow").unwrap();
        match p.config.typed_model().unwrap() {
            Model::Dot(d) => assert_eq!((d.lambda, d.j, d.v), (1.0, 1.0, 1.0)),
            Model::Chain(_) => panic!("expected a dot"),
        }
    }
}
