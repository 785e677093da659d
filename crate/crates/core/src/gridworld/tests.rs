use std::collections::VecDeque;

use proptest::prelude::*;

use super::*;

fn open_room(w: usize, h: usize) -> WorldState {
    let mut s = generate(EnvKind::SimpleDoorKey, 0);
    s.width = w;
    s.height = h;
    s.grid = vec![Cell::EMPTY; w * h];
    for y in 0..h {
        for x in 0..w {
            if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                s.grid[y * w + x] = Cell::WALL;
            }
        }
    }
    s.explored = vec![false; w * h];
    s.target_door = (w - 1, 1);
    s.grid[w + w - 1] = Cell::door(Color::Green, DOOR_LOCKED);
    s.max_steps = WorldState::episode_cap(w, h);
    s
}

#[test]
fn generate_is_deterministic() {
    for kind in EnvKind::ALL {
        for seed in [0, 1, 77, 1_234_567] {
            assert_eq!(generate(kind, seed), generate(kind, seed));
        }
    }
}

#[test]
fn unknown_env_kind_is_a_config_error() {
    let e = "FourRooms".parse::<EnvKind>().unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert_eq!("keyinbox".parse::<EnvKind>().unwrap(), EnvKind::KeyInBox);
}

#[test]
fn random_box_key_flips_a_fair_coin() {
    let boxed = (0..1000u64)
        .filter(|&s| {
            generate(EnvKind::RandomBoxKey, s)
                .grid
                .iter()
                .any(|c| c.object == ObjectKind::Box)
        })
        .count();
    let frac = boxed as f64 / 1000.0;
    assert!((0.42..=0.58).contains(&frac), "boxed fraction {frac}");
}

#[test]
fn colored_door_key_has_exactly_one_matching_key() {
    for seed in 0..300 {
        let s = generate(EnvKind::ColoredDoorKey, seed);
        let door = s.cell(s.target_door.0, s.target_door.1).color.unwrap();
        let keys: Vec<Color> = s
            .grid
            .iter()
            .filter(|c| c.object == ObjectKind::Key)
            .map(|c| c.color.unwrap())
            .collect();
        assert!(keys.len() >= 2);
        assert_eq!(keys.iter().filter(|&&c| c == door).count(), 1);
        let mut uniq = keys.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), keys.len());
    }
}

#[test]
fn layouts_satisfy_structural_invariants() {
    for kind in EnvKind::ALL {
        for seed in 0..200 {
            let s = generate(kind, seed);
            assert!((7..=GRID_MAX).contains(&s.width) && (7..=GRID_MAX).contains(&s.height));
            for y in 0..s.height {
                for x in 0..s.width {
                    let border = x == 0 || y == 0 || x == s.width - 1 || y == s.height - 1;
                    let c = s.cell(x, y);
                    if border && (x, y) != s.target_door {
                        assert_eq!(c.object, ObjectKind::Wall);
                    }
                }
            }
            let locked: Vec<_> = s
                .grid
                .iter()
                .filter(|c| c.object == ObjectKind::Door && c.state == DOOR_LOCKED)
                .collect();
            assert_eq!(locked.len(), 1);
            assert!(s.cell(s.agent_pos.0, s.agent_pos.1).is_traversable());
            let obstacles = s.grid.iter().filter(|c| c.object == ObjectKind::Obstacle).count();
            assert_eq!(obstacles, if kind == EnvKind::MovingObstacle { 2 } else { 0 });
        }
    }
}

#[test]
fn reset_hides_everything_outside_the_view() {
    for seed in 0..50 {
        let (s, obs) = reset(EnvKind::KeyInBox, seed);
        assert_eq!(s.step_count, 0);
        assert!(!s.success && !s.done);
        let view = field_of_view(&s);
        for y in 0..s.height {
            for x in 0..s.width {
                if view.contains(&(x, y)) {
                    assert_ne!(obs.get(x, y), UNEXPLORED);
                } else {
                    assert_eq!(obs.get(x, y), UNEXPLORED);
                }
            }
        }
        assert_eq!(obs.get(s.agent_pos.0, s.agent_pos.1)[3], s.agent_dir.id());
    }
}

#[test]
fn forward_into_wall_is_a_no_op() {
    let mut s = open_room(7, 7);
    s.agent_pos = (1, 3);
    s.agent_dir = Direction::West;
    let r = s.step(Action::Forward).unwrap();
    assert_eq!(s.agent_pos, (1, 3));
    assert_eq!(r.reward, 0.0);
    assert_eq!(s.step_count, 1);
}

#[test]
fn toggling_locked_door_with_matching_key_succeeds() {
    let mut s = open_room(7, 7);
    s.agent_pos = (5, 1);
    s.agent_dir = Direction::East;
    s.carried = Some(Color::Green);
    s.step_count = 9;
    let r = s.step(Action::Toggle).unwrap();
    assert!(r.success && r.done);
    let expected = 1.0 - 0.9 * 10.0 / s.max_steps as f64;
    assert!((r.reward - expected).abs() < 1e-15);
    assert!(matches!(s.step(Action::TurnLeft), Err(Error::Usage(_))));
}

#[test]
fn wrong_key_does_not_open_the_door() {
    let mut s = open_room(7, 7);
    s.agent_pos = (5, 1);
    s.agent_dir = Direction::East;
    s.carried = Some(Color::Red);
    let r = s.step(Action::Toggle).unwrap();
    assert!(!r.success);
    assert_eq!(s.cell(6, 1).state, DOOR_LOCKED);
}

#[test]
fn toggling_a_box_reveals_its_key() {
    let mut s = open_room(7, 7);
    s.agent_pos = (2, 2);
    s.agent_dir = Direction::South;
    s.set_cell(2, 3, Cell::boxed(Color::Purple, Some(Color::Green)));
    s.step(Action::Toggle).unwrap();
    assert_eq!(s.cell(2, 3), Cell::key(Color::Green));
    s.step(Action::Pickup).unwrap();
    assert_eq!(s.carried, Some(Color::Green));
    assert_eq!(s.cell(2, 3), Cell::EMPTY);
    s.step(Action::Drop).unwrap();
    assert_eq!(s.carried, None);
    assert_eq!(s.cell(2, 3), Cell::key(Color::Green));
}

#[test]
fn pickup_needs_free_hands_and_drop_needs_empty_floor() {
    let mut s = open_room(7, 7);
    s.agent_pos = (2, 2);
    s.agent_dir = Direction::South;
    s.carried = Some(Color::Red);
    s.set_cell(2, 3, Cell::key(Color::Green));
    s.step(Action::Pickup).unwrap();
    assert_eq!(s.carried, Some(Color::Red));
    s.step(Action::Drop).unwrap();
    assert_eq!(s.carried, Some(Color::Red));
    assert_eq!(s.cell(2, 3), Cell::key(Color::Green));
}

#[test]
fn turns_rotate_direction() {
    let mut s = open_room(7, 7);
    s.agent_pos = (3, 3);
    s.agent_dir = Direction::East;
    s.step(Action::TurnLeft).unwrap();
    assert_eq!(s.agent_dir, Direction::North);
    s.step(Action::TurnRight).unwrap();
    s.step(Action::TurnRight).unwrap();
    assert_eq!(s.agent_dir, Direction::South);
}

#[test]
fn view_in_open_room_is_the_full_square() {
    let mut s = open_room(12, 12);
    s.grid = vec![Cell::EMPTY; 144];
    s.agent_pos = (2, 5);
    s.agent_dir = Direction::East;
    let v = field_of_view(&s);
    assert_eq!(v.len(), 49);
    assert!(v.contains(&(8, 2)) && v.contains(&(8, 8)) && !v.contains(&(9, 5)));
    assert_eq!(v, field_of_view(&s));

    s.agent_pos = (0, 0);
    s.agent_dir = Direction::North;
    assert_eq!(field_of_view(&s).len(), 4);
}

#[test]
fn walls_block_sight() {
    let mut s = open_room(12, 12);
    for y in 0..12 {
        s.set_cell(5, y, Cell::WALL);
    }
    s.agent_pos = (3, 5);
    s.agent_dir = Direction::East;
    let v = field_of_view(&s);
    assert!(v.contains(&(4, 5)) && v.contains(&(5, 5)));
    assert!(v.iter().all(|&(x, _)| x <= 5));

    s.agent_pos = (4, 5);
    let v = field_of_view(&s);
    assert!(v.contains(&(5, 5)) && !v.contains(&(6, 5)));
}

#[test]
fn snapshot_round_trips() {
    let (mut s, _) = reset(EnvKind::MovingObstacle, 5);
    s.step(Action::Forward).unwrap();
    let json = Snapshot::new(&s).to_json();
    let back = Snapshot::from_json(&json).unwrap();
    assert_eq!(back.state, s);
    // the restored rng continues the same obstacle walk
    let mut a = s.clone();
    let mut b = back.state;
    for _ in 0..10 {
        a.step(Action::TurnLeft).unwrap();
        b.step(Action::TurnLeft).unwrap();
    }
    assert_eq!(a, b);
    let bad = json.replacen("\"version\": 1", "\"version\": 9", 1);
    assert!(Snapshot::from_json(&bad).is_err());
}

#[test]
fn ascii_render_marks_agent_and_fog() {
    let (s, _) = reset(EnvKind::SimpleDoorKey, 3);
    let text = render_ascii(&s);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), s.height);
    assert!(lines.iter().all(|l| l.chars().count() == s.width));
    let (ax, ay) = s.agent_pos;
    assert_eq!(lines[ay].chars().nth(ax), Some(s.agent_dir.glyph()));
    let unexplored = s.explored.iter().filter(|e| !**e).count();
    let fog = text.chars().filter(|c| matches!(c, '+' | ',' | 'k' | 'b' | 'd' | 'o')).count();
    assert_eq!(fog, unexplored);
}

fn bfs_to_face(s: &WorldState, target: (usize, usize)) -> Option<Action> {
    let (tx, ty) = target;
    if s.front_pos() == Some(target) {
        return None;
    }
    let goals: Vec<((usize, usize), Direction)> = Direction::ALL
        .iter()
        .filter_map(|d| {
            let (dx, dy) = d.delta();
            let (x, y) = (tx as isize - dx, ty as isize - dy);
            (s.in_bounds(x, y) && s.cell(x as usize, y as usize).is_traversable())
                .then_some(((x as usize, y as usize), *d))
        })
        .collect();
    // BFS over (pos, dir) states so turns cost a step.
    let start = (s.agent_pos, s.agent_dir);
    let mut prev = std::collections::HashMap::new();
    let mut queue = VecDeque::from([start]);
    prev.insert(start, None);
    while let Some(node) = queue.pop_front() {
        if goals.contains(&node) {
            let mut cur = node;
            let mut first = None;
            while let Some(Some((p, a))) = prev.get(&cur).copied() {
                first = Some(a);
                cur = p;
            }
            return first;
        }
        let (pos, dir) = node;
        let (dx, dy) = dir.delta();
        let ahead = (pos.0 as isize + dx, pos.1 as isize + dy);
        let mut next = vec![((pos, dir.left()), Action::TurnLeft), ((pos, dir.right()), Action::TurnRight)];
        if s.in_bounds(ahead.0, ahead.1)
            && s.cell(ahead.0 as usize, ahead.1 as usize).is_traversable()
        {
            next.push((((ahead.0 as usize, ahead.1 as usize), dir), Action::Forward));
        }
        for (n, a) in next {
            if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(n) {
                e.insert(Some((node, a)));
                queue.push_back(n);
            }
        }
    }
    Some(Action::TurnLeft)
}

fn find(s: &WorldState, pred: impl Fn(&Cell) -> bool) -> Option<(usize, usize)> {
    (0..s.height)
        .flat_map(|y| (0..s.width).map(move |x| (x, y)))
        .find(|&(x, y)| pred(&s.cell(x, y)))
}

/// Full-knowledge scripted solver.
fn oracle_action(s: &WorldState) -> Action {
    let door = s.cell(s.target_door.0, s.target_door.1);
    if s.carried == door.color {
        return bfs_to_face(s, s.target_door).unwrap_or(Action::Toggle);
    }
    if let Some(k) = find(s, |c| c.object == ObjectKind::Key && c.color == door.color) {
        if s.carried.is_some() {
            let front_free = s
                .front_pos()
                .is_some_and(|(x, y)| s.cell(x, y).object == ObjectKind::Empty);
            return if front_free { Action::Drop } else { Action::TurnLeft };
        }
        return bfs_to_face(s, k).unwrap_or(Action::Pickup);
    }
    let b = find(s, |c| c.object == ObjectKind::Box && c.contents == door.color).unwrap();
    bfs_to_face(s, b).unwrap_or(Action::Toggle)
}

#[test]
fn every_layout_is_solvable_by_a_full_knowledge_agent() {
    for kind in EnvKind::ALL {
        for seed in 0..1000 {
            let mut s = generate(kind, seed);
            let keys = s.key_count();
            while !s.done {
                let a = oracle_action(&s);
                s.step(a).unwrap();
                assert_eq!(s.key_count(), keys, "{kind} seed {seed}: key conservation");
            }
            assert!(s.success, "{kind} seed {seed} not solved in {} steps", s.max_steps);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_play_keeps_observation_sound(
        kind_idx in 0usize..5,
        seed in 0u64..1_000_000,
        actions in proptest::collection::vec(0usize..6, 1..120),
    ) {
        const ACTIONS: [Action; 6] = [
            Action::TurnLeft, Action::TurnRight, Action::Forward,
            Action::Pickup, Action::Drop, Action::Toggle,
        ];
        let (mut s, _) = reset(EnvKind::ALL[kind_idx], seed);
        let keys = s.key_count();
        let mut twin = s.clone();
        for a in actions {
            if s.done { break; }
            let before = s.explored.clone();
            let r = s.step(ACTIONS[a]).unwrap();
            let r2 = twin.step(ACTIONS[a]).unwrap();
            prop_assert_eq!(&r, &r2);
            prop_assert!(before.iter().zip(&s.explored).all(|(b, a)| !*b || *a));
            prop_assert!(!r.success || r.done);
            prop_assert!((0.0..=1.0).contains(&r.reward));
            prop_assert_eq!(s.key_count(), keys);
            prop_assert!(s.cell(s.agent_pos.0, s.agent_pos.1).is_traversable());
            for y in 0..s.height {
                for x in 0..s.width {
                    let v = r.observation.get(x, y);
                    if s.is_explored(x, y) {
                        let [o, c, st] = s.cell(x, y).encode();
                        let d = if (x, y) == s.agent_pos { s.agent_dir.id() } else { NO_AGENT };
                        prop_assert_eq!(v, [o, c, st, d]);
                    } else {
                        prop_assert_eq!(v, UNEXPLORED);
                    }
                }
            }
        }
    }
}
