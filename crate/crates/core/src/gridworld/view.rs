use std::collections::{BTreeSet, VecDeque};

use super::WorldState;

/// Side of the square view cone.
pub const VIEW_SIZE: usize = 7;

/// Cells visible from the agent: the `VIEW_SIZE` square in front of it (agent
/// at the centre of the rear edge), clipped to the grid, keeping only cells an
/// 8-connected flood fill from the agent reaches. Opaque cells are seen but
/// do not pass sight on.
pub fn field_of_view(state: &WorldState) -> BTreeSet<(usize, usize)> {
    let half = (VIEW_SIZE / 2) as isize;
    let (fx, fy) = state.agent_dir.delta();
    let (rx, ry) = state.agent_dir.right().delta();
    let (ax, ay) = (state.agent_pos.0 as isize, state.agent_pos.1 as isize);

    let mut in_cone = vec![false; state.grid.len()];
    for i in 0..VIEW_SIZE as isize {
        for j in -half..=half {
            let (x, y) = (ax + i * fx + j * rx, ay + i * fy + j * ry);
            if state.in_bounds(x, y) {
                in_cone[state.idx(x as usize, y as usize)] = true;
            }
        }
    }

    let mut visible = BTreeSet::new();
    let mut seen = vec![false; state.grid.len()];
    let mut queue = VecDeque::from([state.agent_pos]);
    seen[state.idx(state.agent_pos.0, state.agent_pos.1)] = true;
    while let Some((x, y)) = queue.pop_front() {
        visible.insert((x, y));
        if (x, y) != state.agent_pos && !state.cell(x, y).is_transparent() {
            continue;
        }
        for dx in -1..=1isize {
            for dy in -1..=1isize {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if !state.in_bounds(nx, ny) {
                    continue;
                }
                let i = state.idx(nx as usize, ny as usize);
                if in_cone[i] && !seen[i] {
                    seen[i] = true;
                    queue.push_back((nx as usize, ny as usize));
                }
            }
        }
    }
    visible
}
