use super::nav::{distances, facing_direction, neighbours, shortest_path, step_along, turn_toward};
use super::{AgentView, ExplorePhase, OptionKind, OptionProgress, OptionSpec, Target, TargetObject, TerminationReason};
use crate::gridworld::{Action, ObjectKind, DOOR_OPEN};

fn target_cells(view: &AgentView, t: Target) -> Vec<(usize, usize)> {
    let mut out = vec![];
    for x in 0..view.obs.width {
        for y in 0..view.obs.height {
            if t.matches(x, y, view.obs) {
                out.push((x, y));
            }
        }
    }
    out
}

fn adjacent_to_any(p: (usize, usize), cells: &[(usize, usize)]) -> bool {
    cells.iter().any(|&c| facing_direction(p, c).is_some())
}

fn path_to_target(view: &AgentView, cells: &[(usize, usize)]) -> Option<Vec<(usize, usize)>> {
    if cells.is_empty() {
        return None;
    }
    shortest_path(view, |x, y| adjacent_to_any((x, y), cells))
}

fn unexplored_near(view: &AgentView, x: usize, y: usize) -> bool {
    for dx in -1..=1isize {
        for dy in -1..=1isize {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if view.obs.in_bounds(nx, ny) && !view.obs.is_explored(nx as usize, ny as usize) {
                return true;
            }
        }
    }
    false
}

/// A reachable cell from which unexplored space can still come into view:
/// it borders an unexplored cell, or borders a see-through cell the agent
/// cannot stand on (a key, a box, enclosed floor) that does.
fn lookout(view: &AgentView, dist: &[Option<usize>], x: usize, y: usize) -> bool {
    let h = view.obs.height;
    if dist[x * h + y].is_none() {
        return false;
    }
    if unexplored_near(view, x, y) {
        return true;
    }
    for dx in -1..=1isize {
        for dy in -1..=1isize {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if !view.obs.in_bounds(nx, ny) {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            let see_through = view.obs.cell(nx, ny).is_some_and(|c| c.is_transparent());
            if see_through && dist[nx * h + ny].is_none() && unexplored_near(view, nx, ny) {
                return true;
            }
        }
    }
    false
}

/// Whether some reachable cell can still reveal unexplored space.
pub fn has_frontier(view: &AgentView) -> bool {
    let h = view.obs.height;
    let dist = distances(view);
    (0..dist.len()).any(|i| lookout(view, &dist, i / h, i % h))
}

pub fn initiable(option: &OptionSpec, view: &AgentView) -> bool {
    match option.kind {
        OptionKind::Explore => has_frontier(view),
        OptionKind::GoTo(t) | OptionKind::Toggle(t) => {
            path_to_target(view, &target_cells(view, t)).is_some()
        }
        OptionKind::Pickup(t) => {
            t.object == TargetObject::Key
                && (view.carried == Some(t.color)
                    || path_to_target(view, &target_cells(view, t)).is_some())
        }
    }
}

fn goal_reached(option: &OptionSpec, view: &AgentView, progress: &OptionProgress) -> bool {
    match option.kind {
        OptionKind::Explore => !has_frontier(view),
        OptionKind::GoTo(t) => view.front().is_some_and(|(x, y)| t.matches(x, y, view.obs)),
        OptionKind::Pickup(t) => t.object == TargetObject::Key && view.carried == Some(t.color),
        OptionKind::Toggle(t) => match progress.toggled {
            Some(((x, y), _)) => toggle_succeeded(view, t, (x, y)),
            None => {
                t.object == TargetObject::Door
                    && target_cells(view, t)
                        .iter()
                        .any(|&(x, y)| view.obs.get(x, y)[2] == DOOR_OPEN as i32)
            }
        },
    }
}

fn toggle_succeeded(view: &AgentView, t: Target, (x, y): (usize, usize)) -> bool {
    let cell = view.obs.cell(x, y);
    match t.object {
        TargetObject::Door => cell.is_some_and(|c| c.object == ObjectKind::Door && c.state == DOOR_OPEN),
        _ => cell.is_some_and(|c| c.object != t.object.object_kind()),
    }
}

/// Termination in priority order: goal, budget, inapplicable.
pub fn option_terminated(
    option: &OptionSpec,
    view: &AgentView,
    progress: &OptionProgress,
) -> OptionProgress {
    let mut out = *progress;
    if out.reason.is_some() {
        return out;
    }
    out.reason = if goal_reached(option, view, progress) {
        Some(TerminationReason::GoalReached)
    } else if progress.steps_taken >= option.step_budget {
        Some(TerminationReason::BudgetExhausted)
    } else if progress.toggled.is_some() || !initiable(option, view) {
        // a toggle that changed nothing will not change anything next time
        Some(TerminationReason::Inapplicable)
    } else {
        None
    };
    out
}

/// One primitive action for a running option. Counts against the budget.
pub fn option_action(option: &OptionSpec, view: &AgentView, progress: &mut OptionProgress) -> Action {
    progress.steps_taken += 1;
    match option.kind {
        OptionKind::Explore => explore_action(view, &mut progress.explore),
        OptionKind::GoTo(t) => go_to_action(view, t),
        OptionKind::Pickup(t) => {
            if view.carried.is_some_and(|c| c != t.color) {
                drop_action(view)
            } else if view.front().is_some_and(|(x, y)| t.matches(x, y, view.obs)) {
                Action::Pickup
            } else {
                go_to_action(view, t)
            }
        }
        OptionKind::Toggle(t) => match view.front() {
            Some((x, y)) if t.matches(x, y, view.obs) => {
                let [o, c, s, _] = view.obs.get(x, y);
                progress.toggled = Some(((x, y), [o, c, s]));
                Action::Toggle
            }
            _ => go_to_action(view, t),
        },
    }
}

fn go_to_action(view: &AgentView, t: Target) -> Action {
    let cells = target_cells(view, t);
    match path_to_target(view, &cells) {
        Some(path) if path.is_empty() => {
            let want = neighbours(view, view.pos)
                .find(|(_, n)| cells.contains(n))
                .map(|(d, _)| d)
                .expect("goal cell borders the target");
            if want == view.dir {
                Action::TurnLeft
            } else {
                turn_toward(view.dir, want)
            }
        }
        Some(path) => step_along(view, &path),
        None => Action::TurnLeft,
    }
}

/// Where a carried key may be put down: known empty floor that does not
/// border a door.
fn drop_spot(view: &AgentView, (x, y): (usize, usize)) -> bool {
    (x, y) != view.pos
        && view.obs.cell(x, y).is_some_and(|c| c.object == ObjectKind::Empty)
        && !neighbours(view, (x, y)).any(|(_, n)| {
            view.obs.cell(n.0, n.1).is_some_and(|c| c.object == ObjectKind::Door)
        })
}

fn drop_action(view: &AgentView) -> Action {
    if view.front().is_some_and(|f| drop_spot(view, f)) {
        return Action::Drop;
    }
    if neighbours(view, view.pos).any(|(_, n)| drop_spot(view, n)) {
        return Action::TurnLeft;
    }
    match shortest_path(view, |x, y| neighbours(view, (x, y)).any(|(_, n)| drop_spot(view, n))) {
        Some(path) if !path.is_empty() => step_along(view, &path),
        _ => Action::TurnLeft,
    }
}

fn explore_action(view: &AgentView, phase: &mut ExplorePhase) -> Action {
    let h = view.obs.height;
    let dist = distances(view);
    let reachable = |x: usize, y: usize| dist[x * h + y].is_some();
    let go = |target: (usize, usize)| match shortest_path(view, |x, y| (x, y) == target) {
        Some(path) if !path.is_empty() => step_along(view, &path),
        _ => Action::TurnLeft,
    };
    let nearest_frontier = || match shortest_path(view, |x, y| lookout(view, &dist, x, y)) {
        Some(path) if !path.is_empty() => step_along(view, &path),
        _ => Action::TurnLeft,
    };

    for _ in 0..=2 * h + 2 {
        match *phase {
            ExplorePhase::Corner => {
                let corner = (0..view.obs.width)
                    .flat_map(|x| (0..h).map(move |y| (x, y)))
                    .filter(|&(x, y)| reachable(x, y))
                    .min_by_key(|&(x, y)| (x + y, y))
                    .expect("agent cell is reachable");
                if corner == view.pos {
                    *phase = ExplorePhase::Sweep { row: corner.1, eastward: true };
                    continue;
                }
                return go(corner);
            }
            ExplorePhase::Sweep { row, eastward } => {
                if row >= h {
                    *phase = ExplorePhase::Frontier;
                    continue;
                }
                let in_row: Vec<usize> = (0..view.obs.width).filter(|&x| reachable(x, row)).collect();
                let next = ExplorePhase::Sweep { row: row + 1, eastward: !eastward };
                let Some(&end) = (if eastward { in_row.last() } else { in_row.first() }) else {
                    let unseen = (0..view.obs.width).any(|x| !view.obs.is_explored(x, row));
                    if unseen && has_frontier(view) {
                        return nearest_frontier();
                    }
                    *phase = next;
                    continue;
                };
                if view.pos == (end, row) {
                    *phase = next;
                    continue;
                }
                return go((end, row));
            }
            ExplorePhase::Frontier => return nearest_frontier(),
        }
    }
    Action::TurnLeft
}
