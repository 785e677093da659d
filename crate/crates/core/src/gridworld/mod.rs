//! Single-room door/key gridworlds with cumulative partial observability.
//!
//! The agent sees a 7×7 square in front of it. Everything it has ever seen
//! stays visible in the observation ("fog of war"); cells it has never seen
//! read `[-1, -1, -1, -1]`.

mod generate;
mod render;
mod snapshot;
mod view;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate, INTERIOR_MAX, INTERIOR_MIN};
pub use render::render_ascii;
pub use snapshot::{Snapshot, SNAPSHOT_VERSION};
pub use view::{field_of_view, VIEW_SIZE};

/// Largest grid side including the wall border.
pub const GRID_MAX: usize = INTERIOR_MAX + 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectKind {
    Empty = 0,
    Wall = 1,
    Door = 2,
    Key = 3,
    Box = 4,
    Obstacle = 5,
}

impl ObjectKind {
    pub fn from_id(id: i32) -> Option<Self> {
        Some(match id {
            0 => Self::Empty,
            1 => Self::Wall,
            2 => Self::Door,
            3 => Self::Key,
            4 => Self::Box,
            5 => Self::Obstacle,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Empty => "empty",
            Self::Wall => "wall",
            Self::Door => "door",
            Self::Key => "key",
            Self::Box => "box",
            Self::Obstacle => "obstacle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Red = 0,
    Green = 1,
    Blue = 2,
    Purple = 3,
    Yellow = 4,
    Grey = 5,
}

impl Color {
    pub const ALL: [Color; 6] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Purple,
        Color::Yellow,
        Color::Grey,
    ];

    pub fn from_id(id: i32) -> Option<Self> {
        Self::ALL.get(usize::try_from(id).ok()?).copied()
    }

    pub fn id(self) -> i32 {
        self as i32
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Red => "red",
            Self::Green => "green",
            Self::Blue => "blue",
            Self::Purple => "purple",
            Self::Yellow => "yellow",
            Self::Grey => "grey",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == s)
    }
}

pub const DOOR_OPEN: u8 = 0;
pub const DOOR_CLOSED: u8 = 1;
pub const DOOR_LOCKED: u8 = 2;

/// One grid cell. `contents` is the key hidden inside a box; it is not part
/// of the observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub object: ObjectKind,
    pub color: Option<Color>,
    pub state: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contents: Option<Color>,
}

impl Cell {
    pub const EMPTY: Cell = Cell {
        object: ObjectKind::Empty,
        color: None,
        state: 0,
        contents: None,
    };
    pub const WALL: Cell = Cell {
        object: ObjectKind::Wall,
        color: None,
        state: 0,
        contents: None,
    };

    pub fn key(color: Color) -> Self {
        Cell {
            object: ObjectKind::Key,
            color: Some(color),
            ..Self::EMPTY
        }
    }

    pub fn door(color: Color, state: u8) -> Self {
        Cell {
            object: ObjectKind::Door,
            color: Some(color),
            state,
            contents: None,
        }
    }

    pub fn boxed(color: Color, contents: Option<Color>) -> Self {
        Cell {
            object: ObjectKind::Box,
            color: Some(color),
            state: 0,
            contents,
        }
    }

    pub fn obstacle() -> Self {
        Cell {
            object: ObjectKind::Obstacle,
            color: Some(Color::Blue),
            ..Self::EMPTY
        }
    }

    /// Whether the agent may stand here.
    pub fn is_traversable(&self) -> bool {
        match self.object {
            ObjectKind::Empty => true,
            ObjectKind::Door => self.state == DOOR_OPEN,
            _ => false,
        }
    }

    /// Whether sight passes through this cell.
    pub fn is_transparent(&self) -> bool {
        match self.object {
            ObjectKind::Wall => false,
            ObjectKind::Door => self.state == DOOR_OPEN,
            _ => true,
        }
    }

    /// The three object channels of the observation encoding. Cells without
    /// a color encode color 0.
    pub fn encode(&self) -> [i32; 3] {
        [
            self.object as i32,
            self.color.map_or(0, Color::id),
            self.state as i32,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    East = 0,
    South = 1,
    West = 2,
    North = 3,
}

impl Direction {
    /// Tie-break order used everywhere a search expands neighbours.
    pub const ALL: [Direction; 4] = [
        Direction::East,
        Direction::South,
        Direction::West,
        Direction::North,
    ];

    pub fn from_id(id: i32) -> Option<Self> {
        Self::ALL.get(usize::try_from(id).ok()?).copied()
    }

    pub fn id(self) -> i32 {
        self as i32
    }

    pub fn left(self) -> Self {
        Self::ALL[(self as usize + 3) % 4]
    }

    pub fn right(self) -> Self {
        Self::ALL[(self as usize + 1) % 4]
    }

    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
            Direction::North => (0, -1),
        }
    }

    pub fn glyph(self) -> char {
        match self {
            Direction::East => '>',
            Direction::South => 'v',
            Direction::West => '<',
            Direction::North => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvKind {
    SimpleDoorKey,
    KeyInBox,
    RandomBoxKey,
    ColoredDoorKey,
    MovingObstacle,
}

impl EnvKind {
    pub const ALL: [EnvKind; 5] = [
        EnvKind::SimpleDoorKey,
        EnvKind::KeyInBox,
        EnvKind::RandomBoxKey,
        EnvKind::ColoredDoorKey,
        EnvKind::MovingObstacle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::SimpleDoorKey => "SimpleDoorKey",
            EnvKind::KeyInBox => "KeyInBox",
            EnvKind::RandomBoxKey => "RandomBoxKey",
            EnvKind::ColoredDoorKey => "ColoredDoorKey",
            EnvKind::MovingObstacle => "MovingObstacle",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::str::FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnvKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown env_kind {s:?}")))
    }
}

impl std::fmt::Display for EnvKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    TurnLeft,
    TurnRight,
    Forward,
    Pickup,
    Drop,
    Toggle,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::TurnLeft => "turn_left",
            Action::TurnRight => "turn_right",
            Action::Forward => "forward",
            Action::Pickup => "pickup",
            Action::Drop => "drop",
            Action::Toggle => "toggle",
        }
    }
}

/// The `W×H×4` observation. Channel order: object, color, state, direction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub width: usize,
    pub height: usize,
    data: Vec<i32>,
}

/// Direction channel value at explored cells the agent is not on.
pub const NO_AGENT: i32 = 4;
pub const UNEXPLORED: [i32; 4] = [-1, -1, -1, -1];

impl Observation {
    pub fn unexplored(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![-1; width * height * 4],
        }
    }

    fn offset(&self, x: usize, y: usize) -> usize {
        (x * self.height + y) * 4
    }

    pub fn get(&self, x: usize, y: usize) -> [i32; 4] {
        let o = self.offset(x, y);
        [self.data[o], self.data[o + 1], self.data[o + 2], self.data[o + 3]]
    }

    pub fn set(&mut self, x: usize, y: usize, v: [i32; 4]) {
        let o = self.offset(x, y);
        self.data[o..o + 4].copy_from_slice(&v);
    }

    pub fn is_explored(&self, x: usize, y: usize) -> bool {
        self.get(x, y) != UNEXPLORED
    }

    /// The cell as the agent knows it; `None` if unexplored.
    pub fn cell(&self, x: usize, y: usize) -> Option<Cell> {
        let [o, c, s, _] = self.get(x, y);
        let object = ObjectKind::from_id(o)?;
        let color = match object {
            ObjectKind::Door | ObjectKind::Key | ObjectKind::Box | ObjectKind::Obstacle => {
                Color::from_id(c)
            }
            _ => None,
        };
        Some(Cell {
            object,
            color,
            state: s as u8,
            contents: None,
        })
    }

    /// Raw `x`-major data, `(x * height + y) * 4 + channel`.
    pub fn data(&self) -> &[i32] {
        &self.data
    }

    pub fn in_bounds(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub success: bool,
}

/// Full simulator state. Fields are public for fixtures and tests; the
/// dynamics only change through [`WorldState::step`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub env_kind: EnvKind,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub grid: Vec<Cell>,
    pub agent_pos: (usize, usize),
    pub agent_dir: Direction,
    pub carried: Option<Color>,
    pub explored: Vec<bool>,
    pub step_count: usize,
    pub max_steps: usize,
    pub target_door: (usize, usize),
    pub done: bool,
    pub success: bool,
    pub rng: ChaCha8Rng,
}

impl WorldState {
    /// Hand-built fixture: a walled room with one locked target door and
    /// nothing else. Place objects with [`WorldState::set_cell`], then call
    /// [`WorldState::refresh_view`].
    pub fn room(
        env_kind: EnvKind,
        width: usize,
        height: usize,
        door: (usize, usize),
        door_color: Color,
        agent_pos: (usize, usize),
        agent_dir: Direction,
    ) -> Self {
        use rand::SeedableRng;
        let mut grid = vec![Cell::EMPTY; width * height];
        for y in 0..height {
            for x in 0..width {
                if x == 0 || y == 0 || x == width - 1 || y == height - 1 {
                    grid[y * width + x] = Cell::WALL;
                }
            }
        }
        grid[door.1 * width + door.0] = Cell::door(door_color, DOOR_LOCKED);
        let mut s = Self {
            env_kind,
            seed: 0,
            width,
            height,
            grid,
            agent_pos,
            agent_dir,
            carried: None,
            explored: vec![false; width * height],
            step_count: 0,
            max_steps: Self::episode_cap(width, height),
            target_door: door,
            done: false,
            success: false,
            rng: ChaCha8Rng::seed_from_u64(0),
        };
        s.reveal_view();
        s
    }

    /// Union the current view into the explored mask.
    pub fn refresh_view(&mut self) {
        self.reveal_view();
    }

    pub fn idx(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn cell(&self, x: usize, y: usize) -> Cell {
        self.grid[self.idx(x, y)]
    }

    pub fn set_cell(&mut self, x: usize, y: usize, c: Cell) {
        let i = self.idx(x, y);
        self.grid[i] = c;
    }

    pub fn in_bounds(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn front_pos(&self) -> Option<(usize, usize)> {
        let (dx, dy) = self.agent_dir.delta();
        let (x, y) = (self.agent_pos.0 as isize + dx, self.agent_pos.1 as isize + dy);
        self.in_bounds(x, y).then_some((x as usize, y as usize))
    }

    /// Episode cap: four steps per grid cell.
    pub fn episode_cap(width: usize, height: usize) -> usize {
        4 * width * height
    }

    pub fn is_explored(&self, x: usize, y: usize) -> bool {
        self.explored[self.idx(x, y)]
    }

    pub(crate) fn reveal_view(&mut self) {
        for (x, y) in field_of_view(self) {
            let i = self.idx(x, y);
            self.explored[i] = true;
        }
    }

    pub fn observation(&self) -> Observation {
        let mut obs = Observation::unexplored(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.is_explored(x, y) {
                    continue;
                }
                let [o, c, s] = self.cell(x, y).encode();
                let d = if (x, y) == self.agent_pos {
                    self.agent_dir.id()
                } else {
                    NO_AGENT
                };
                obs.set(x, y, [o, c, s, d]);
            }
        }
        obs
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.done {
            return Err(Error::Usage("step called on a finished episode".into()));
        }
        self.step_count += 1;
        let mut reward = 0.0;
        let front = self.front_pos();
        match action {
            Action::TurnLeft => self.agent_dir = self.agent_dir.left(),
            Action::TurnRight => self.agent_dir = self.agent_dir.right(),
            Action::Forward => {
                if let Some((fx, fy)) = front {
                    if self.cell(fx, fy).is_traversable() {
                        self.agent_pos = (fx, fy);
                    }
                }
            }
            Action::Pickup => {
                if let Some((fx, fy)) = front {
                    let c = self.cell(fx, fy);
                    if self.carried.is_none() && c.object == ObjectKind::Key {
                        self.carried = c.color;
                        self.set_cell(fx, fy, Cell::EMPTY);
                    }
                }
            }
            Action::Drop => {
                if let (Some((fx, fy)), Some(color)) = (front, self.carried) {
                    if self.cell(fx, fy).object == ObjectKind::Empty {
                        self.set_cell(fx, fy, Cell::key(color));
                        self.carried = None;
                    }
                }
            }
            Action::Toggle => {
                if let Some((fx, fy)) = front {
                    let c = self.cell(fx, fy);
                    match c.object {
                        ObjectKind::Box => {
                            let inside = c.contents.map_or(Cell::EMPTY, Cell::key);
                            self.set_cell(fx, fy, inside);
                        }
                        ObjectKind::Door if c.state == DOOR_LOCKED => {
                            if self.carried.is_some() && self.carried == c.color {
                                self.set_cell(fx, fy, Cell::door(c.color.unwrap(), DOOR_OPEN));
                                if (fx, fy) == self.target_door {
                                    self.success = true;
                                    reward = 1.0 - 0.9 * (self.step_count as f64 / self.max_steps as f64);
                                }
                            }
                        }
                        ObjectKind::Door if c.state == DOOR_CLOSED => {
                            self.set_cell(fx, fy, Cell::door(c.color.unwrap(), DOOR_OPEN));
                        }
                        ObjectKind::Door => {
                            self.set_cell(fx, fy, Cell::door(c.color.unwrap(), DOOR_CLOSED));
                        }
                        _ => {}
                    }
                }
            }
        }
        if self.env_kind == EnvKind::MovingObstacle && !self.success {
            self.move_obstacles();
        }
        self.reveal_view();
        self.done = self.success || self.step_count >= self.max_steps;
        Ok(StepResult {
            observation: self.observation(),
            reward,
            done: self.done,
            success: self.success,
        })
    }

    /// Each obstacle, in row-major order, moves to a uniformly chosen cell
    /// among staying put and its free orthogonal neighbours.
    fn move_obstacles(&mut self) {
        let positions: Vec<(usize, usize)> = (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| (x, y)))
            .filter(|&(x, y)| self.cell(x, y).object == ObjectKind::Obstacle)
            .collect();
        for (x, y) in positions {
            let mut options = vec![(x, y)];
            for d in Direction::ALL {
                let (dx, dy) = d.delta();
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if !self.in_bounds(nx, ny) {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if self.cell(nx, ny).object == ObjectKind::Empty && (nx, ny) != self.agent_pos {
                    options.push((nx, ny));
                }
            }
            let (tx, ty) = options[self.rng.gen_range(0..options.len())];
            if (tx, ty) != (x, y) {
                let c = self.cell(x, y);
                self.set_cell(x, y, Cell::EMPTY);
                self.set_cell(tx, ty, c);
            }
        }
    }

    /// Number of keys on the grid, inside boxes, or carried.
    pub fn key_count(&self) -> usize {
        let on_grid = self
            .grid
            .iter()
            .filter(|c| c.object == ObjectKind::Key || c.contents.is_some())
            .count();
        on_grid + usize::from(self.carried.is_some())
    }
}

/// Generate a layout and reveal the initial view.
pub fn reset(env_kind: EnvKind, seed: u64) -> (WorldState, Observation) {
    let state = generate(env_kind, seed);
    let obs = state.observation();
    (state, obs)
}

#[cfg(test)]
mod tests;
