//! Asking policies: each timestep, ask the planner for a new plan or not.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use w2a_neural::{AskNet, Categorical, NetConfig};

use crate::encode::frame_diff;
use crate::error::{Error, Result};
use crate::gridworld::{Observation, GRID_MAX};
use crate::options::{OptionSpec, NUM_OPTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Learned,
    HardCoded,
    Always,
    Random,
    Never,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Learned,
        PolicyKind::HardCoded,
        PolicyKind::Always,
        PolicyKind::Random,
        PolicyKind::Never,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Learned => "learned",
            PolicyKind::HardCoded => "hard_coded",
            PolicyKind::Always => "always",
            PolicyKind::Random => "random",
            PolicyKind::Never => "never",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mediator policy {s:?}")))
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AskChoice {
    Ask,
    NotAsk,
}

impl AskChoice {
    /// Column within an option's logit pair.
    pub fn action(self) -> usize {
        match self {
            AskChoice::Ask => 0,
            AskChoice::NotAsk => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AskDecision {
    pub choice: AskChoice,
    pub log_prob: Option<f64>,
    pub value_estimate: Option<f64>,
}

impl AskDecision {
    fn fixed(choice: AskChoice) -> Self {
        Self {
            choice,
            log_prob: None,
            value_estimate: None,
        }
    }
}

/// Stable position of an option in the asking network's output pairs.
pub fn option_index(option: &OptionSpec) -> usize {
    option.index()
}

/// Logit columns `(ask, not ask)` for option index `k`.
pub fn pair_columns(k: usize) -> (usize, usize) {
    (2 * k, 2 * k + 1)
}

/// Asking-network architecture for a given trunk width.
pub fn ask_net_config(conv: [usize; 3], hidden: [usize; 2]) -> NetConfig {
    NetConfig::new(GRID_MAX, GRID_MAX, 2 * NUM_OPTIONS).with_widths(conv, hidden)
}

pub struct Mediator {
    kind: PolicyKind,
    net: Option<AskNet>,
    sample: bool,
    rng: ChaCha8Rng,
    last_input: Option<Vec<f64>>,
}

impl Mediator {
    pub fn new(kind: PolicyKind, net: Option<AskNet>, seed: u64) -> Result<Self> {
        if kind == PolicyKind::Learned {
            let Some(n) = &net else {
                return Err(Error::Config("mediator policy 'learned' needs a network".into()));
            };
            let c = n.config();
            if c.policy_outputs != 2 * NUM_OPTIONS || c.in_channels != 4 || c.width < GRID_MAX || c.height < GRID_MAX {
                return Err(Error::Checkpoint(format!(
                    "asking network must take 4×{GRID_MAX}×{GRID_MAX} input and give {} logits; got {}×{}×{} → {}",
                    2 * NUM_OPTIONS,
                    c.in_channels,
                    c.height,
                    c.width,
                    c.policy_outputs
                )));
            }
        }
        Ok(Self {
            kind,
            net,
            sample: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_input: None,
        })
    }

    /// Sample decisions (training) rather than take the argmax (evaluation).
    pub fn sampling(mut self, on: bool) -> Self {
        self.sample = on;
        self
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn net(&self) -> Option<&AskNet> {
        self.net.as_ref()
    }

    pub fn into_net(self) -> Option<AskNet> {
        self.net
    }

    /// The frame difference fed to the network on the last learned decision.
    pub fn take_input(&mut self) -> Option<Vec<f64>> {
        self.last_input.take()
    }

    pub fn decide(
        &mut self,
        prev_obs: &Observation,
        obs: &Observation,
        option_index: usize,
        option_terminated: bool,
    ) -> Result<AskDecision> {
        Ok(match self.kind {
            PolicyKind::Always => AskDecision::fixed(AskChoice::Ask),
            PolicyKind::Never => AskDecision::fixed(AskChoice::NotAsk),
            PolicyKind::HardCoded => AskDecision::fixed(if option_terminated {
                AskChoice::Ask
            } else {
                AskChoice::NotAsk
            }),
            PolicyKind::Random => AskDecision::fixed(if self.rng.gen_bool(0.5) {
                AskChoice::Ask
            } else {
                AskChoice::NotAsk
            }),
            PolicyKind::Learned => {
                let net = self.net.as_ref().expect("checked in new");
                if option_index >= NUM_OPTIONS {
                    return Err(Error::Usage(format!("option index {option_index} out of range")));
                }
                let cfg = net.config();
                let input = frame_diff(obs, prev_obs, cfg.width, cfg.height)?;
                let (logits, value) = net.infer(input.clone(), 1)?;
                let (a, n) = pair_columns(option_index);
                let dist = Categorical::pair(logits[a], logits[n]);
                let action = if self.sample { dist.sample(&mut self.rng) } else { dist.argmax() };
                self.last_input = Some(input);
                AskDecision {
                    choice: if action == 0 { AskChoice::Ask } else { AskChoice::NotAsk },
                    log_prob: Some(dist.log_prob(action)),
                    value_estimate: Some(value[0]),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{reset, Action, EnvKind};
    use crate::options::{vocabulary, TargetObject};
    use crate::gridworld::Color;
    use proptest::prelude::*;

    fn small_net(seed: u64) -> AskNet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AskNet::new(ask_net_config([2, 2, 2], [4, 4]), &mut rng)
    }

    #[test]
    fn fixed_policies() {
        let (_, obs) = reset(EnvKind::SimpleDoorKey, 0);
        let mut always = Mediator::new(PolicyKind::Always, None, 0).unwrap();
        let mut never = Mediator::new(PolicyKind::Never, None, 0).unwrap();
        let mut hard = Mediator::new(PolicyKind::HardCoded, None, 0).unwrap();
        for term in [false, true] {
            assert_eq!(always.decide(&obs, &obs, 0, term).unwrap().choice, AskChoice::Ask);
            assert_eq!(never.decide(&obs, &obs, 0, term).unwrap().choice, AskChoice::NotAsk);
        }
        assert_eq!(hard.decide(&obs, &obs, 3, false).unwrap().choice, AskChoice::NotAsk);
        assert_eq!(hard.decide(&obs, &obs, 3, true).unwrap().choice, AskChoice::Ask);
    }

    #[test]
    fn random_asks_half_the_time() {
        let (_, obs) = reset(EnvKind::SimpleDoorKey, 0);
        let mut m = Mediator::new(PolicyKind::Random, None, 11).unwrap();
        let asks = (0..10_000)
            .filter(|_| m.decide(&obs, &obs, 0, false).unwrap().choice == AskChoice::Ask)
            .count();
        let frac = asks as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&frac), "{frac}");
    }

    #[test]
    fn learned_without_network_is_a_config_error() {
        let e = Mediator::new(PolicyKind::Learned, None, 0).err().unwrap();
        assert_eq!(e.exit_code(), 2);
        let wrong = AskNet::zeros(NetConfig::new(12, 12, 6).with_widths([2, 2, 2], [4, 4]));
        assert_eq!(Mediator::new(PolicyKind::Learned, Some(wrong), 0).err().unwrap().exit_code(), 3);
    }

    #[test]
    fn option_indices_are_stable_and_distinct() {
        assert_eq!(option_index(&OptionSpec::explore()), 0);
        let mut seen = std::collections::BTreeSet::new();
        for o in vocabulary() {
            seen.insert(option_index(&o));
            assert_eq!(option_index(&o), option_index(&o.clone()));
        }
        assert_eq!(seen.len(), NUM_OPTIONS);
        assert_eq!(
            option_index(&OptionSpec::go_to(TargetObject::Key, Color::Red)),
            option_index(&OptionSpec::go_to(TargetObject::Key, Color::Blue))
        );
    }

    #[test]
    fn identical_frames_feed_zero_input() {
        let (_, obs) = reset(EnvKind::SimpleDoorKey, 3);
        let mut m = Mediator::new(PolicyKind::Learned, Some(small_net(1)), 0).unwrap();
        m.decide(&obs, &obs, 2, false).unwrap();
        assert!(m.take_input().unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn argmax_mode_is_deterministic() {
        let (mut s, prev) = reset(EnvKind::KeyInBox, 3);
        let obs = s.step(Action::Forward).unwrap().observation;
        let mut a = Mediator::new(PolicyKind::Learned, Some(small_net(5)), 0).unwrap();
        let mut b = Mediator::new(PolicyKind::Learned, Some(small_net(5)), 99).unwrap();
        for k in 0..NUM_OPTIONS {
            assert_eq!(a.decide(&prev, &obs, k, false).unwrap(), b.decide(&prev, &obs, k, false).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pair_selection_ignores_other_logits(
            k in 0usize..NUM_OPTIONS,
            logits in proptest::collection::vec(-5.0f64..5.0, 2 * NUM_OPTIONS),
            noise in proptest::collection::vec(-5.0f64..5.0, 2 * NUM_OPTIONS),
        ) {
            let (a, n) = pair_columns(k);
            let mut other = logits.clone();
            for (i, v) in other.iter_mut().enumerate() {
                if i != a && i != n {
                    *v += noise[i];
                }
            }
            let p1 = Categorical::pair(logits[a], logits[n]).probs();
            let p2 = Categorical::pair(other[a], other[n]).probs();
            prop_assert_eq!(p1, p2);
        }
    }
}
