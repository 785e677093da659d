use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Cell, Color, Direction, EnvKind, ObjectKind, WorldState, DOOR_LOCKED};

pub const INTERIOR_MIN: usize = 5;
pub const INTERIOR_MAX: usize = 10;

const N_OBSTACLES: usize = 2;
const N_COLORED_KEYS: usize = 2;

fn mix_seed(kind: EnvKind, seed: u64) -> u64 {
    // splitmix64 finalizer so neighbouring seeds and kinds decorrelate
    let mut z = seed
        .wrapping_add((kind.index() as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Build a solvable layout for `(kind, seed)`. Deterministic in both inputs.
pub fn generate(kind: EnvKind, seed: u64) -> WorldState {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(kind, seed));
    loop {
        if let Some(mut state) = try_generate(kind, seed, &mut rng) {
            state.reveal_view();
            return state;
        }
    }
}

fn try_generate(kind: EnvKind, seed: u64, rng: &mut ChaCha8Rng) -> Option<WorldState> {
    let width = rng.gen_range(INTERIOR_MIN..=INTERIOR_MAX) + 2;
    let height = rng.gen_range(INTERIOR_MIN..=INTERIOR_MAX) + 2;
    let mut grid = vec![Cell::EMPTY; width * height];
    for y in 0..height {
        for x in 0..width {
            if x == 0 || y == 0 || x == width - 1 || y == height - 1 {
                grid[y * width + x] = Cell::WALL;
            }
        }
    }

    // Door on a non-corner border cell; `front` is the interior cell before it.
    let (door, front) = match rng.gen_range(0..4) {
        0 => {
            let y = rng.gen_range(1..height - 1);
            ((width - 1, y), (width - 2, y))
        }
        1 => {
            let x = rng.gen_range(1..width - 1);
            ((x, height - 1), (x, height - 2))
        }
        2 => {
            let y = rng.gen_range(1..height - 1);
            ((0, y), (1, y))
        }
        _ => {
            let x = rng.gen_range(1..width - 1);
            ((x, 0), (x, 1))
        }
    };
    let door_color = *Color::ALL.choose(rng).unwrap();
    grid[door.1 * width + door.0] = Cell::door(door_color, DOOR_LOCKED);

    let mut free: Vec<(usize, usize)> = (1..height - 1)
        .flat_map(|y| (1..width - 1).map(move |x| (x, y)))
        .filter(|&p| p != front)
        .collect();
    free.shuffle(rng);
    let mut take = || free.pop().unwrap();

    let agent_pos = take();
    let agent_dir = Direction::ALL[rng.gen_range(0..4)];

    let mut objects: Vec<((usize, usize), Cell)> = Vec::new();
    match kind {
        EnvKind::SimpleDoorKey => objects.push((take(), Cell::key(door_color))),
        EnvKind::KeyInBox => {
            let box_color = *Color::ALL.choose(rng).unwrap();
            objects.push((take(), Cell::boxed(box_color, Some(door_color))));
        }
        EnvKind::RandomBoxKey => {
            if rng.gen_bool(0.5) {
                let box_color = *Color::ALL.choose(rng).unwrap();
                objects.push((take(), Cell::boxed(box_color, Some(door_color))));
            } else {
                objects.push((take(), Cell::key(door_color)));
            }
        }
        EnvKind::ColoredDoorKey => {
            let mut others: Vec<Color> = Color::ALL.iter().copied().filter(|&c| c != door_color).collect();
            others.shuffle(rng);
            let mut colors = vec![door_color];
            colors.extend(others.into_iter().take(N_COLORED_KEYS - 1));
            colors.shuffle(rng);
            for c in colors {
                objects.push((take(), Cell::key(c)));
            }
        }
        EnvKind::MovingObstacle => {
            objects.push((take(), Cell::key(door_color)));
            for _ in 0..N_OBSTACLES {
                objects.push((take(), Cell::obstacle()));
            }
        }
    }
    for &((x, y), c) in &objects {
        grid[y * width + x] = c;
    }

    let state = WorldState {
        env_kind: kind,
        seed,
        width,
        height,
        grid,
        agent_pos,
        agent_dir,
        carried: None,
        explored: vec![false; width * height],
        step_count: 0,
        max_steps: WorldState::episode_cap(width, height),
        target_door: door,
        done: false,
        success: false,
        rng: ChaCha8Rng::seed_from_u64(rng.gen()),
    };
    valid_layout(&state, front, &objects).then_some(state)
}

/// The door front and every key/box must be reachable from the agent.
fn valid_layout(
    state: &WorldState,
    front: (usize, usize),
    objects: &[((usize, usize), Cell)],
) -> bool {
    let reach = reachable(state);
    if !reach[state.idx(front.0, front.1)] {
        return false;
    }
    objects
        .iter()
        .filter(|(_, c)| matches!(c.object, ObjectKind::Key | ObjectKind::Box))
        .all(|&((x, y), _)| {
            Direction::ALL.iter().any(|d| {
                let (dx, dy) = d.delta();
                let (nx, ny) = ((x as isize + dx) as usize, (y as isize + dy) as usize);
                reach[state.idx(nx, ny)]
            })
        })
}

fn reachable(state: &WorldState) -> Vec<bool> {
    let mut seen = vec![false; state.grid.len()];
    let mut queue = VecDeque::from([state.agent_pos]);
    seen[state.idx(state.agent_pos.0, state.agent_pos.1)] = true;
    while let Some((x, y)) = queue.pop_front() {
        for d in Direction::ALL {
            let (dx, dy) = d.delta();
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if !state.in_bounds(nx, ny) {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            let i = state.idx(nx, ny);
            if !seen[i] && state.grid[i].is_traversable() {
                seen[i] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    seen
}
