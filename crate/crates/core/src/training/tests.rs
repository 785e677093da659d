use super::*;
use crate::gridworld::EnvKind;
use crate::mediator::{Mediator, PolicyKind};
use crate::planner::OraclePlanner;

#[test]
fn shaped_reward_cases() {
    assert_eq!(shaped_reward(0.0, true, true, 0.05), -0.05);
    assert_eq!(shaped_reward(0.0, false, false, 0.05), 0.0);
    assert_eq!(shaped_reward(1.0, true, false, 0.05), 1.0);
}

#[test]
fn config_validation_names_the_field() {
    let e = PpoConfig { gamma: 0.0, ..Default::default() }.validate().unwrap_err();
    assert!(e.to_string().contains("gamma"));
    assert!(PpoConfig { penalty: -1.0, ..Default::default() }.validate().is_err());
    PpoConfig::default().validate().unwrap();
}

#[test]
fn always_asks_exactly_once_per_step() {
    let mut m = Mediator::new(PolicyKind::Always, None, 0).unwrap();
    for seed in 0..20 {
        let ep = run_episode(EnvKind::SimpleDoorKey, seed, &mut m, &mut OraclePlanner, LoopConfig::default()).unwrap();
        assert!(ep.success, "seed {seed}");
        assert_eq!(ep.interactions, ep.timesteps);
        assert_eq!(ep.forced_asks, 0);
    }
}
