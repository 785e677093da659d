use super::{Planner, PlannerRequest, PlannerResponse, PlannerSource};
use crate::error::Result;
use crate::gridworld::{EnvKind, DOOR_LOCKED};
use crate::options::{OptionSpec, Plan, TargetObject};
use crate::translator::FactList;

/// Deterministic decision list standing in for a language-model planner.
pub fn oracle_plan(facts: &FactList, _env_kind: EnvKind) -> Plan {
    use TargetObject::*;
    let door = facts.door();

    if let (Some(c), Some(d)) = (facts.carrying, door) {
        if d.color == c && d.state == DOOR_LOCKED {
            return Plan::new(vec![OptionSpec::go_to(Door, d.color), OptionSpec::toggle(Door, d.color)]);
        }
    }
    if facts.carrying.is_some() && door.is_none() {
        return Plan::new(vec![OptionSpec::explore()]);
    }
    // From here a carried key is the wrong one; picking up handles the drop.
    let key = match door {
        Some(d) => facts.find(Key).find(|k| k.color == d.color),
        None => facts.find(Key).next(),
    };
    if let Some(k) = key {
        return Plan::new(vec![OptionSpec::go_to(Key, k.color), OptionSpec::pickup(Key, k.color)]);
    }
    if let Some(b) = facts.find(Box).next() {
        return Plan::new(vec![OptionSpec::go_to(Box, b.color), OptionSpec::toggle(Box, b.color)]);
    }
    Plan::new(vec![OptionSpec::explore()])
}

#[derive(Debug, Clone, Default)]
pub struct OraclePlanner;

impl Planner for OraclePlanner {
    fn plan(&mut self, req: &PlannerRequest) -> Result<PlannerResponse> {
        let plan = oracle_plan(req.facts, req.env_kind);
        Ok(PlannerResponse {
            raw_text: plan.text(),
            plan,
            source: PlannerSource::Oracle,
        })
    }
}
