//! Bundled example domains.
//!
//! Each fixture exists twice: as source text under `fixtures/` and as a
//! model built directly in code. Parser tests check the two agree.

use std::collections::BTreeMap;

use crate::model::{Action, Fact, IntrinsicValue, PlanningModel, UtilityFunction};

pub const ROBOT_AND_FRANK_DOMAIN: &str = include_str!("../fixtures/robot_and_frank.dom");
pub const ROBOT_AND_FRANK_PROBLEM: &str = include_str!("../fixtures/robot_and_frank.prob");
pub const MEDICINE_DOMAIN: &str = include_str!("../fixtures/medicine.dom");
pub const MEDICINE_PROBLEM: &str = include_str!("../fixtures/medicine.prob");
pub const SHIELD_DOMAIN: &str = include_str!("../fixtures/shield.dom");
pub const SHIELD_PROBLEM: &str = include_str!("../fixtures/shield.prob");

fn facts<const N: usize>(names: [&str; N]) -> std::collections::BTreeSet<Fact> {
    names.into_iter().map(Fact::from).collect()
}

fn display<const N: usize>(pairs: [(&str, &str); N]) -> BTreeMap<String, String> {
    pairs
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Lying to Frank is intrinsically bad but cheaper than begging, so a
/// cost-optimal planner lies.
pub fn robot_and_frank() -> PlanningModel {
    let mut m = PlanningModel {
        domain_name: "robot_and_frank".into(),
        problem_name: "frank_exercises".into(),
        facts: facts(["motivated", "healthy", "unhealthy"]),
        init: facts(["unhealthy"]),
        goal: facts(["healthy"]),
        utility: [("healthy", 10), ("unhealthy", -10)].into_iter().collect(),
        display: display([
            ("lie_frank", "lying to Frank"),
            ("beg_frank", "begging Frank"),
            ("exercise", "Frank exercising"),
            ("healthy", "Frank being healthy"),
            ("unhealthy", "Frank being unhealthy"),
            ("motivated", "Frank being motivated"),
        ]),
        ..Default::default()
    };
    m.insert_action(
        Action::new("lie_frank")
            .with_add(["motivated"])
            .with_cost(1)
            .with_intrinsic(IntrinsicValue::Bad),
    );
    m.insert_action(Action::new("beg_frank").with_add(["motivated"]).with_cost(2));
    m.insert_action(
        Action::new("exercise")
            .with_pre(["motivated"])
            .with_add(["healthy"])
            .with_del(["unhealthy"]),
    );
    m
}

/// Treating the patient cures them and causes pain as a side effect.
pub fn medicine() -> PlanningModel {
    let mut m = PlanningModel {
        domain_name: "medicine".into(),
        problem_name: "cure_patient".into(),
        facts: facts(["cured", "side_pain"]),
        goal: facts(["cured"]),
        utility: [("cured", 10), ("side_pain", -3)].into_iter().collect(),
        display: display([
            ("treat", "treating the patient"),
            ("side_pain", "the patient's pain"),
            ("cured", "the patient being cured"),
        ]),
        ..Default::default()
    };
    m.insert_action(Action::new("treat").with_add(["cured", "side_pain"]));
    m
}

/// Harming a bystander is the means to reach safety.
pub fn shield() -> PlanningModel {
    let mut m = PlanningModel {
        domain_name: "shield".into(),
        problem_name: "stop_threat".into(),
        facts: facts(["threatened", "bystander_hurt", "safe"]),
        init: facts(["threatened"]),
        goal: facts(["safe"]),
        utility: UtilityFunction::from_iter([
            ("safe", 10),
            ("threatened", -5),
            ("bystander_hurt", -5),
        ]),
        display: display([
            ("push_bystander", "pushing the bystander"),
            ("block_threat", "blocking the threat"),
            ("bystander_hurt", "the bystander being hurt"),
        ]),
        ..Default::default()
    };
    m.insert_action(Action::new("push_bystander").with_add(["bystander_hurt"]));
    m.insert_action(
        Action::new("block_threat")
            .with_pre(["bystander_hurt"])
            .with_add(["safe"])
            .with_del(["threatened"]),
    );
    m
}
