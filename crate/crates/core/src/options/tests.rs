use proptest::prelude::*;

use super::*;
use crate::gridworld::{generate, Action, Cell, Color, Direction, EnvKind, ObjectKind, WorldState};

fn room(w: usize, h: usize, pos: (usize, usize), dir: Direction) -> WorldState {
    WorldState::room(EnvKind::SimpleDoorKey, w, h, (w - 1, 2), Color::Green, pos, dir)
}

fn explore_all(s: &mut WorldState) {
    s.explored.iter_mut().for_each(|e| *e = true);
}

/// Drive one option to termination on the real environment.
fn run(s: &mut WorldState, opt: &OptionSpec) -> (Vec<Action>, OptionProgress) {
    let mut progress = OptionProgress::default();
    let mut actions = vec![];
    loop {
        let obs = s.observation();
        let view = AgentView::from_state(s, &obs);
        progress = option_terminated(opt, &view, &progress);
        if progress.terminated() || s.done {
            return (actions, progress);
        }
        let a = option_action(opt, &view, &mut progress);
        actions.push(a);
        s.step(a).unwrap();
    }
}

#[test]
fn vocabulary_indices_are_a_bijection_per_color() {
    assert_eq!(OptionSpec::explore().index(), 0);
    for c in Color::ALL {
        let idx: Vec<usize> = (0..NUM_OPTIONS)
            .map(|i| OptionSpec::from_index(i, c).unwrap().index())
            .collect();
        assert_eq!(idx, (0..NUM_OPTIONS).collect::<Vec<_>>());
    }
    assert!(OptionSpec::from_index(NUM_OPTIONS, Color::Red).is_err());
    assert_eq!(vocabulary().len(), 1 + 9 * 6);
    assert_eq!(OptionSpec::go_to(TargetObject::Key, Color::Red).index(), 1);
    assert_eq!(OptionSpec::toggle(TargetObject::Door, Color::Red).index(), 9);
}

#[test]
fn canonical_text() {
    assert_eq!(OptionSpec::explore().text(), "explore");
    assert_eq!(OptionSpec::go_to(TargetObject::Door, Color::Green).text(), "go to the green door");
    assert_eq!(OptionSpec::pickup(TargetObject::Key, Color::Yellow).text(), "pick up the yellow key");
    assert_eq!(OptionSpec::toggle(TargetObject::Box, Color::Purple).text(), "toggle the purple box");
}

#[test]
fn go_to_unseen_door_is_not_initiable() {
    let s = room(12, 12, (2, 5), Direction::West);
    let obs = s.observation();
    let view = AgentView::from_state(&s, &obs);
    assert!(!initiable(&OptionSpec::go_to(TargetObject::Door, Color::Green), &view));
    assert!(initiable(&OptionSpec::explore(), &view));
}

#[test]
fn explore_in_fully_explored_room_is_not_initiable() {
    let mut s = room(8, 8, (3, 3), Direction::East);
    explore_all(&mut s);
    let obs = s.observation();
    let view = AgentView::from_state(&s, &obs);
    assert!(!initiable(&OptionSpec::explore(), &view));
    let p = option_terminated(&OptionSpec::explore(), &view, &OptionProgress::default());
    assert_eq!(p.reason, Some(TerminationReason::GoalReached));
}

#[test]
fn pickup_while_carrying_another_key_is_initiable_and_drops_once() {
    let mut s = room(9, 9, (2, 4), Direction::East);
    s.set_cell(5, 4, Cell::key(Color::Yellow));
    s.carried = Some(Color::Purple);
    explore_all(&mut s);
    let opt = OptionSpec::pickup(TargetObject::Key, Color::Yellow);
    let obs = s.observation();
    assert!(initiable(&opt, &AgentView::from_state(&s, &obs)));
    let (actions, progress) = run(&mut s, &opt);
    assert_eq!(progress.reason, Some(TerminationReason::GoalReached));
    assert_eq!(actions.iter().filter(|a| **a == Action::Drop).count(), 1);
    let drop_at = actions.iter().position(|a| *a == Action::Drop).unwrap();
    let pick_at = actions.iter().position(|a| *a == Action::Pickup).unwrap();
    assert!(drop_at < pick_at);
    assert_eq!(s.carried, Some(Color::Yellow));
    assert!(!s.grid.iter().any(|c| *c == Cell::key(Color::Yellow)));
    assert!(s.grid.iter().any(|c| *c == Cell::key(Color::Purple)));
}

#[test]
fn pickup_of_a_door_is_never_initiable() {
    let mut s = room(8, 8, (3, 3), Direction::East);
    explore_all(&mut s);
    let obs = s.observation();
    let view = AgentView::from_state(&s, &obs);
    assert!(!initiable(&OptionSpec::pickup(TargetObject::Door, Color::Green), &view));
}

#[test]
fn go_to_terminates_when_adjacent_and_facing() {
    let mut s = room(9, 9, (2, 2), Direction::South);
    s.set_cell(6, 6, Cell::key(Color::Green));
    explore_all(&mut s);
    let opt = OptionSpec::go_to(TargetObject::Key, Color::Green);
    let (actions, progress) = run(&mut s, &opt);
    assert_eq!(progress.reason, Some(TerminationReason::GoalReached));
    assert_eq!(s.front_pos(), Some((6, 6)));
    assert!(!actions.is_empty());
    // goal already holds: nothing more to do
    let (again, p2) = run(&mut s, &opt);
    assert!(again.is_empty());
    assert_eq!(p2.reason, Some(TerminationReason::GoalReached));
}

#[test]
fn identical_states_give_identical_actions() {
    for seed in 0..20 {
        let s = generate(EnvKind::ColoredDoorKey, seed);
        let obs = s.observation();
        let view = AgentView::from_state(&s, &obs);
        for opt in vocabulary().iter().take(12) {
            let mut p1 = OptionProgress::default();
            let mut p2 = OptionProgress::default();
            assert_eq!(option_action(opt, &view, &mut p1), option_action(opt, &view, &mut p2));
            assert_eq!(p1, p2);
        }
    }
}

#[test]
fn agent_view_recovers_pose_from_observation() {
    let s = generate(EnvKind::KeyInBox, 4);
    let obs = s.observation();
    let v = AgentView::new(&obs, None);
    assert_eq!((v.pos, v.dir), (s.agent_pos, s.agent_dir));
}

#[test]
fn budget_exhaustion_terminates() {
    let s = room(12, 12, (2, 5), Direction::West);
    let obs = s.observation();
    let view = AgentView::from_state(&s, &obs);
    let p = OptionProgress {
        steps_taken: 100,
        ..Default::default()
    };
    let out = option_terminated(&OptionSpec::explore(), &view, &p);
    assert_eq!(out.reason, Some(TerminationReason::BudgetExhausted));
    let p40 = OptionProgress {
        steps_taken: 40,
        ..Default::default()
    };
    assert!(!option_terminated(&OptionSpec::explore(), &view, &p40).terminated());
}

#[test]
fn toggle_door_reaches_goal_once_open() {
    let mut s = room(8, 8, (2, 2), Direction::East);
    s.carried = Some(Color::Green);
    explore_all(&mut s);
    let (actions, progress) = run(&mut s, &OptionSpec::toggle(TargetObject::Door, Color::Green));
    assert_eq!(actions.last(), Some(&Action::Toggle));
    assert!(s.success);
    assert_eq!(progress.reason, Some(TerminationReason::GoalReached));
    let obs = s.observation();
    let view = AgentView::from_state(&s, &obs);
    let fresh = option_terminated(&OptionSpec::toggle(TargetObject::Door, Color::Green), &view, &OptionProgress::default());
    assert_eq!(fresh.reason, Some(TerminationReason::GoalReached));
}

#[test]
fn toggle_without_key_is_inapplicable_after_one_try() {
    let mut s = room(8, 8, (2, 2), Direction::East);
    explore_all(&mut s);
    let (actions, progress) = run(&mut s, &OptionSpec::toggle(TargetObject::Door, Color::Green));
    assert_eq!(actions.iter().filter(|a| **a == Action::Toggle).count(), 1);
    assert_eq!(progress.reason, Some(TerminationReason::Inapplicable));
}

#[test]
fn toggle_box_reveals_key() {
    let mut s = room(8, 8, (2, 2), Direction::East);
    s.set_cell(4, 4, Cell::boxed(Color::Red, Some(Color::Green)));
    explore_all(&mut s);
    let (_, progress) = run(&mut s, &OptionSpec::toggle(TargetObject::Box, Color::Red));
    assert_eq!(progress.reason, Some(TerminationReason::GoalReached));
    assert_eq!(s.cell(4, 4), Cell::key(Color::Green));
}

#[test]
fn blocked_path_waits_with_turn_left() {
    let mut s = room(8, 8, (1, 1), Direction::North);
    s.set_cell(5, 5, Cell::key(Color::Green));
    s.set_cell(2, 1, Cell::obstacle());
    s.set_cell(1, 2, Cell::obstacle());
    explore_all(&mut s);
    let obs = s.observation();
    let view = AgentView::from_state(&s, &obs);
    let mut p = OptionProgress::default();
    let a = option_action(&OptionSpec::go_to(TargetObject::Key, Color::Green), &view, &mut p);
    assert_eq!(a, Action::TurnLeft);
    assert_eq!(p.steps_taken, 1);
}

#[test]
fn half_turns_start_to_the_right() {
    assert_eq!(turn_toward(Direction::East, Direction::West), Action::TurnRight);
    assert_eq!(turn_toward(Direction::East, Direction::North), Action::TurnLeft);
    assert_eq!(turn_toward(Direction::East, Direction::South), Action::TurnRight);
}

#[test]
fn explore_alone_reveals_static_rooms_completely() {
    for kind in [EnvKind::SimpleDoorKey, EnvKind::KeyInBox, EnvKind::RandomBoxKey, EnvKind::ColoredDoorKey] {
        for seed in 0..200 {
            let mut s = generate(kind, seed);
            s.max_steps = usize::MAX;
            let mut opt = OptionSpec::explore();
            opt.step_budget = usize::MAX;
            let (actions, progress) = run(&mut s, &opt);
            assert_eq!(progress.reason, Some(TerminationReason::GoalReached));
            assert!(
                s.explored.iter().all(|e| *e),
                "{kind} seed {seed}: unexplored cells after {} steps\n{}",
                actions.len(),
                crate::gridworld::render_ascii(&s)
            );
        }
    }
}

#[test]
fn no_option_emits_more_than_its_budget() {
    for seed in 0..30 {
        for opt in [
            OptionSpec::explore(),
            OptionSpec::go_to(TargetObject::Door, Color::Red),
            OptionSpec::toggle(TargetObject::Door, Color::Red),
        ] {
            let mut s = generate(EnvKind::MovingObstacle, seed);
            let mut opt = opt;
            opt.step_budget = 17;
            if let OptionKind::GoTo(t) | OptionKind::Toggle(t) = &mut opt.kind {
                t.color = s.cell(s.target_door.0, s.target_door.1).color.unwrap();
            }
            explore_all(&mut s);
            let (actions, _) = run(&mut s, &opt);
            assert!(actions.len() <= 17);
        }
    }
}

/// Independent oracle: Bellman-Ford style relaxation until fixpoint.
fn relaxation_distance(free: &[Vec<bool>], from: (usize, usize), goal: (usize, usize)) -> Option<usize> {
    let (w, h) = (free.len(), free[0].len());
    let mut d = vec![vec![usize::MAX; h]; w];
    d[from.0][from.1] = 0;
    let mut changed = true;
    while changed {
        changed = false;
        for x in 0..w {
            for y in 0..h {
                if !free[x][y] && (x, y) != from {
                    continue;
                }
                let mut best = d[x][y];
                for (dx, dy) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                        continue;
                    }
                    let nd = d[nx as usize][ny as usize];
                    if nd != usize::MAX && nd + 1 < best {
                        best = nd + 1;
                    }
                }
                if best < d[x][y] {
                    d[x][y] = best;
                    changed = true;
                }
            }
        }
    }
    (d[goal.0][goal.1] != usize::MAX).then_some(d[goal.0][goal.1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bfs_paths_are_shortest(
        w in 7usize..=12,
        h in 7usize..=12,
        walls in proptest::collection::vec((1usize..11, 1usize..11), 0..30),
        start in (1usize..11, 1usize..11),
        goal in (1usize..11, 1usize..11),
    ) {
        let clamp = |(x, y): (usize, usize)| (x.min(w - 2), y.min(h - 2));
        let (start, goal) = (clamp(start), clamp(goal));
        let mut s = room(w, h, start, Direction::East);
        for p in walls {
            let p = clamp(p);
            if p != start && p != goal {
                s.set_cell(p.0, p.1, Cell::WALL);
            }
        }
        explore_all(&mut s);
        let obs = s.observation();
        let view = AgentView::from_state(&s, &obs);
        let free: Vec<Vec<bool>> = (0..w)
            .map(|x| (0..h).map(|y| s.cell(x, y).object == ObjectKind::Empty).collect())
            .collect();
        let path = shortest_path(&view, |x, y| (x, y) == goal);
        let oracle = relaxation_distance(&free, start, goal);
        prop_assert_eq!(path.as_ref().map(|p| p.len()), oracle);
        if let Some(p) = path {
            let mut prev = start;
            for c in p {
                prop_assert!(facing_direction(prev, c).is_some());
                prop_assert!(free[c.0][c.1]);
                prev = c;
            }
        }
    }
}
