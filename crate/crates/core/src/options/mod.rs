//! Hard-coded option policies over the agent's explored map.

mod nav;
mod policy;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworld::{Color, Direction, ObjectKind, Observation, WorldState, NO_AGENT};

pub use nav::{facing_direction, shortest_path, turn_toward};
pub use policy::{has_frontier, initiable, option_action, option_terminated};

pub const DEFAULT_STEP_BUDGET: usize = 100;

/// Size of the color-abstracted option vocabulary.
pub const NUM_OPTIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TargetObject {
    Key,
    Box,
    Door,
}

impl TargetObject {
    pub const ALL: [TargetObject; 3] = [TargetObject::Key, TargetObject::Box, TargetObject::Door];

    pub fn object_kind(self) -> ObjectKind {
        match self {
            TargetObject::Key => ObjectKind::Key,
            TargetObject::Box => ObjectKind::Box,
            TargetObject::Door => ObjectKind::Door,
        }
    }

    pub fn from_object_kind(k: ObjectKind) -> Option<Self> {
        match k {
            ObjectKind::Key => Some(TargetObject::Key),
            ObjectKind::Box => Some(TargetObject::Box),
            ObjectKind::Door => Some(TargetObject::Door),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        self.object_kind().name()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Target {
    pub object: TargetObject,
    pub color: Color,
}

impl Target {
    pub fn new(object: TargetObject, color: Color) -> Self {
        Self { object, color }
    }

    pub fn matches(&self, x: usize, y: usize, obs: &Observation) -> bool {
        obs.cell(x, y)
            .is_some_and(|c| c.object == self.object.object_kind() && c.color == Some(self.color))
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.color.name(), self.object.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptionKind {
    Explore,
    GoTo(Target),
    Pickup(Target),
    Toggle(Target),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OptionSpec {
    pub kind: OptionKind,
    pub step_budget: usize,
}

impl OptionSpec {
    pub fn new(kind: OptionKind) -> Self {
        Self {
            kind,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn explore() -> Self {
        Self::new(OptionKind::Explore)
    }

    pub fn go_to(object: TargetObject, color: Color) -> Self {
        Self::new(OptionKind::GoTo(Target::new(object, color)))
    }

    pub fn pickup(object: TargetObject, color: Color) -> Self {
        Self::new(OptionKind::Pickup(Target::new(object, color)))
    }

    pub fn toggle(object: TargetObject, color: Color) -> Self {
        Self::new(OptionKind::Toggle(Target::new(object, color)))
    }

    pub fn target(&self) -> Option<Target> {
        match self.kind {
            OptionKind::Explore => None,
            OptionKind::GoTo(t) | OptionKind::Pickup(t) | OptionKind::Toggle(t) => Some(t),
        }
    }

    /// Canonical wire text, e.g. `"pick up the yellow key"`.
    pub fn text(&self) -> String {
        match self.kind {
            OptionKind::Explore => "explore".to_string(),
            OptionKind::GoTo(t) => format!("go to the {t}"),
            OptionKind::Pickup(t) => format!("pick up the {t}"),
            OptionKind::Toggle(t) => format!("toggle the {t}"),
        }
    }

    /// Position in the color-abstracted vocabulary: explore, then
    /// go to / pick up / toggle crossed with key, box, door.
    pub fn index(&self) -> usize {
        let (verb, t) = match self.kind {
            OptionKind::Explore => return 0,
            OptionKind::GoTo(t) => (0, t),
            OptionKind::Pickup(t) => (1, t),
            OptionKind::Toggle(t) => (2, t),
        };
        1 + verb * 3 + t.object as usize
    }

    /// Inverse of [`OptionSpec::index`] for a given color.
    pub fn from_index(index: usize, color: Color) -> Result<Self> {
        if index == 0 {
            return Ok(Self::explore());
        }
        if index >= NUM_OPTIONS {
            return Err(Error::Usage(format!("option index {index} out of range")));
        }
        let object = TargetObject::ALL[(index - 1) % 3];
        let t = Target::new(object, color);
        Ok(Self::new(match (index - 1) / 3 {
            0 => OptionKind::GoTo(t),
            1 => OptionKind::Pickup(t),
            _ => OptionKind::Toggle(t),
        }))
    }
}

impl std::fmt::Display for OptionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text())
    }
}

/// Every option over every color, in index-then-color order.
pub fn vocabulary() -> Vec<OptionSpec> {
    let mut out = vec![OptionSpec::explore()];
    for i in 1..NUM_OPTIONS {
        for c in Color::ALL {
            out.push(OptionSpec::from_index(i, c).unwrap());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub options: Vec<OptionSpec>,
    pub cursor: usize,
}

impl Plan {
    pub fn new(options: Vec<OptionSpec>) -> Self {
        Self { options, cursor: 0 }
    }

    pub fn current(&self) -> Option<&OptionSpec> {
        self.options.get(self.cursor)
    }

    pub fn is_exhausted(&self) -> bool {
        self.cursor >= self.options.len()
    }

    pub fn advance(&mut self) {
        if self.cursor < self.options.len() {
            self.cursor += 1;
        }
    }

    pub fn text(&self) -> String {
        self.options.iter().map(|o| o.text()).collect::<Vec<_>>().join(", then ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminationReason {
    GoalReached,
    BudgetExhausted,
    Inapplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ExplorePhase {
    /// Heading for the top-left reachable cell.
    #[default]
    Corner,
    /// Sweeping row `row`, eastward or westward.
    Sweep { row: usize, eastward: bool },
    /// Rows done; visiting leftover frontier cells.
    Frontier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OptionProgress {
    pub steps_taken: usize,
    pub reason: Option<TerminationReason>,
    pub explore: ExplorePhase,
    /// Cell a Toggle option acted on, and that cell's state before.
    pub toggled: Option<((usize, usize), [i32; 3])>,
}

impl OptionProgress {
    pub fn terminated(&self) -> bool {
        self.reason.is_some()
    }
}

/// What the actor knows: the observation, its own pose and what it carries.
#[derive(Debug, Clone, Copy)]
pub struct AgentView<'a> {
    pub obs: &'a Observation,
    pub pos: (usize, usize),
    pub dir: Direction,
    pub carried: Option<Color>,
}

impl<'a> AgentView<'a> {
    /// Locate the agent from the direction channel.
    pub fn new(obs: &'a Observation, carried: Option<Color>) -> Self {
        for x in 0..obs.width {
            for y in 0..obs.height {
                let d = obs.get(x, y)[3];
                if (0..NO_AGENT).contains(&d) {
                    return Self {
                        obs,
                        pos: (x, y),
                        dir: Direction::from_id(d).unwrap(),
                        carried,
                    };
                }
            }
        }
        panic!("observation has no agent cell");
    }

    pub fn from_state(state: &WorldState, obs: &'a Observation) -> Self {
        Self {
            obs,
            pos: state.agent_pos,
            dir: state.agent_dir,
            carried: state.carried,
        }
    }

    pub fn front(&self) -> Option<(usize, usize)> {
        let (dx, dy) = self.dir.delta();
        let (x, y) = (self.pos.0 as isize + dx, self.pos.1 as isize + dy);
        self.obs.in_bounds(x, y).then_some((x as usize, y as usize))
    }
}

#[cfg(test)]
mod tests;
