use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use w2a::gridworld::EnvKind;
use w2a::harness::test_seeds;
use w2a::mediator::PolicyKind;
use w2a::planner::OraclePlanner;
use w2a::training::{evaluate, evaluate_selector, selector_net_config, summarize, train_selector, LoopConfig, PpoConfig};
use w2a_neural::AskNet;

#[test]
fn trained_selector_beats_its_initialisation_and_trails_the_oracle() {
    let env = EnvKind::SimpleDoorKey;
    let seeds = &test_seeds(env)[..40];
    let net_cfg = selector_net_config([4, 8, 8], [32, 16]);
    let cfg = PpoConfig {
        lr: 1e-3,
        iterations: 30,
        steps_per_iteration: 256,
        eval_interval: 0,
        ..Default::default()
    };
    let run = train_selector(env, &cfg, net_cfg.clone(), 0, test_seeds(env), &mut |_| {}).unwrap();
    let untrained = AskNet::new(net_cfg, &mut ChaCha8Rng::seed_from_u64(0));
    let lc = LoopConfig::default();
    let before = summarize(&evaluate_selector(env, &untrained, seeds, lc).unwrap());
    let after = summarize(&evaluate_selector(env, &run.final_net, seeds, lc).unwrap());
    let oracle = summarize(&evaluate(env, PolicyKind::HardCoded, None, &mut OraclePlanner, seeds, 0, lc).unwrap());
    println!("untrained {before:?}\ntrained {after:?}\noracle {oracle:?}");
    assert!(after.mean_return > before.mean_return, "{after:?} vs {before:?}");
    assert!(after.success_rate >= before.success_rate);
    assert!(oracle.mean_return >= after.mean_return);
    assert_eq!(oracle.success_rate, 1.0);
}
