use ethiplan::PlanningModel;
use ethiplan_oracles::{random_model, ModelShape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[allow(dead_code)]
pub fn model(seed: u64) -> PlanningModel {
    random_model(&mut rng(seed), ModelShape::default())
}
