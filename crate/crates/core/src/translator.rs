//! Observation → facts → fixed-format planner text.
//!
//! Facts come from the whole explored map and carry no positions, so two
//! observations with the same objects and carried key translate identically.

use serde::{Deserialize, Serialize};

use crate::gridworld::{Color, Observation};
use crate::options::TargetObject;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fact {
    pub object: TargetObject,
    pub color: Color,
    pub state: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactList {
    /// Sorted by object (key, box, door) then color; one entry per pair.
    pub observed: Vec<Fact>,
    pub carrying: Option<Color>,
}

impl FactList {
    pub fn find(&self, object: TargetObject) -> impl Iterator<Item = &Fact> {
        self.observed.iter().filter(move |f| f.object == object)
    }

    pub fn door(&self) -> Option<&Fact> {
        self.find(TargetObject::Door).next()
    }
}

pub fn extract_facts(obs: &Observation, carried: Option<Color>) -> FactList {
    let mut observed: Vec<Fact> = vec![];
    for x in 0..obs.width {
        for y in 0..obs.height {
            let Some(cell) = obs.cell(x, y) else { continue };
            let (Some(object), Some(color)) = (TargetObject::from_object_kind(cell.object), cell.color) else {
                continue;
            };
            if !observed.iter().any(|f| f.object == object && f.color == color) {
                observed.push(Fact {
                    object,
                    color,
                    state: cell.state,
                });
            }
        }
    }
    observed.sort();
    FactList {
        observed,
        carrying: carried,
    }
}

/// `"observed yellow key, observed yellow door, carrying purple key"`.
/// Door lock state is not rendered.
pub fn render_text(facts: &FactList) -> String {
    let mut clauses: Vec<String> = facts
        .observed
        .iter()
        .map(|f| format!("observed {} {}", f.color.name(), f.object.name()))
        .collect();
    if clauses.is_empty() {
        clauses.push("observed nothing".to_string());
    }
    if let Some(c) = facts.carrying {
        clauses.push(format!("carrying {} key", c.name()));
    }
    clauses.join(", ")
}

pub fn translate(obs: &Observation, carried: Option<Color>) -> String {
    render_text(&extract_facts(obs, carried))
}
