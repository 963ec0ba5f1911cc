//! Fixtures shared by the benchmarks.

use fdmimo_core::rng::{cn_matrix, seeded};
use fdmimo_core::{ComplexMatrix, ScenarioConfig};

const SCENARIO_A: &str = include_str!("../../cli/configs/scenario_a.json");
const SCENARIO_B: &str = include_str!("../../cli/configs/scenario_b.json");
const SCENARIO_C: &str = include_str!("../../cli/configs/scenario_c.json");
const SCENARIO_D: &str = include_str!("../../cli/configs/scenario_d.json");

/// Bundled scenario config by letter.
pub fn scenario(id: char) -> ScenarioConfig {
    let text = match id {
        'a' => SCENARIO_A,
        'b' => SCENARIO_B,
        'c' => SCENARIO_C,
        'd' => SCENARIO_D,
        _ => panic!("no bundled scenario `{id}`"),
    };
    ScenarioConfig::from_json(text).expect("bundled config is valid")
}

/// A TX burst and the SI it produces through a random coupling.
pub fn si_burst(chains: usize, samples: usize, seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    let mut rng = seeded(seed);
    let x = cn_matrix(chains, samples, 1e-3, &mut rng);
    let coupling = cn_matrix(chains, chains, 1.0, &mut rng);
    let y = &coupling * &x;
    (x, y)
}
