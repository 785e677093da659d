use std::collections::VecDeque;

use super::AgentView;
use crate::gridworld::{Action, Direction};

pub(crate) fn passable(view: &AgentView, x: usize, y: usize) -> bool {
    (x, y) == view.pos || view.obs.cell(x, y).is_some_and(|c| c.is_traversable())
}

pub(crate) fn neighbours<'a>(
    view: &AgentView<'a>,
    (x, y): (usize, usize),
) -> impl Iterator<Item = (Direction, (usize, usize))> + 'a {
    let view = *view;
    Direction::ALL.into_iter().filter_map(move |d| {
        let (dx, dy) = d.delta();
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        view.obs
            .in_bounds(nx, ny)
            .then_some((d, (nx as usize, ny as usize)))
    })
}

/// Breadth-first distances from the agent over known traversable cells.
pub(crate) fn distances(view: &AgentView) -> Vec<Option<usize>> {
    let h = view.obs.height;
    let mut dist = vec![None; view.obs.width * h];
    let mut queue = VecDeque::from([view.pos]);
    dist[view.pos.0 * h + view.pos.1] = Some(0);
    while let Some(p) = queue.pop_front() {
        let d = dist[p.0 * h + p.1].unwrap();
        for (_, n) in neighbours(view, p) {
            let i = n.0 * h + n.1;
            if dist[i].is_none() && passable(view, n.0, n.1) {
                dist[i] = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Shortest path over known traversable cells to the first goal cell found,
/// expanding neighbours east, south, west, north. The path excludes the
/// agent's cell; it is empty when the agent already stands on a goal.
pub fn shortest_path(
    view: &AgentView,
    is_goal: impl Fn(usize, usize) -> bool,
) -> Option<Vec<(usize, usize)>> {
    let h = view.obs.height;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; view.obs.width * h];
    let mut seen = vec![false; view.obs.width * h];
    let mut queue = VecDeque::from([view.pos]);
    seen[view.pos.0 * h + view.pos.1] = true;
    while let Some(p) = queue.pop_front() {
        if is_goal(p.0, p.1) {
            let mut path = vec![];
            let mut cur = p;
            while cur != view.pos {
                path.push(cur);
                cur = parent[cur.0 * h + cur.1].unwrap();
            }
            path.reverse();
            return Some(path);
        }
        for (_, n) in neighbours(view, p) {
            let i = n.0 * h + n.1;
            if !seen[i] && passable(view, n.0, n.1) {
                seen[i] = true;
                parent[i] = Some(p);
                queue.push_back(n);
            }
        }
    }
    None
}

/// Direction from `from` to an orthogonally adjacent `to`.
pub fn facing_direction(from: (usize, usize), to: (usize, usize)) -> Option<Direction> {
    Direction::ALL.into_iter().find(|d| {
        let (dx, dy) = d.delta();
        from.0 as isize + dx == to.0 as isize && from.1 as isize + dy == to.1 as isize
    })
}

/// Single rotation toward `desired`; a half turn starts to the right.
pub fn turn_toward(current: Direction, desired: Direction) -> Action {
    if desired == current.left() {
        Action::TurnLeft
    } else {
        Action::TurnRight
    }
}

/// Next action to follow a non-empty path.
pub(crate) fn step_along(view: &AgentView, path: &[(usize, usize)]) -> Action {
    let want = facing_direction(view.pos, path[0]).expect("path starts next to the agent");
    if want == view.dir {
        Action::Forward
    } else {
        turn_toward(view.dir, want)
    }
}
