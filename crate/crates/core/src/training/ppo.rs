use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use w2a_neural::{Adam, AskNet, Graph};

use super::PpoConfig;
use crate::error::{Error, Result};

/// Which logits form a sample's action distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Head {
    /// Columns `(2k, 2k + 1)`: the asking pair of option `k`.
    Pair(usize),
    /// All columns, invalid ones masked out.
    Masked(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoSample {
    pub input: Vec<f64>,
    pub head: Head,
    pub action: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub ret: f64,
}

/// Samples plus the parameter version that generated them.
#[derive(Debug, Clone, Default)]
pub struct Batch {
    pub version: u64,
    pub samples: Vec<PpoSample>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PpoStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
    pub minibatches: usize,
}

const MASKED_LOGIT: f64 = -1e9;

/// Network, optimizer and a version counter bumped on every update.
pub struct Learner {
    pub net: AskNet,
    pub adam: Adam,
    pub version: u64,
}

impl Learner {
    pub fn new(net: AskNet, cfg: &PpoConfig) -> Self {
        let adam = Adam::new(cfg.adam(), &net.params);
        Self { net, adam, version: 0 }
    }

    pub fn update<R: Rng + ?Sized>(&mut self, batch: &Batch, cfg: &PpoConfig, rng: &mut R) -> Result<PpoStats> {
        if batch.version != self.version {
            return Err(Error::Training(format!(
                "batch from parameter version {} but learner is at {}",
                batch.version, self.version
            )));
        }
        let stats = ppo_update(&mut self.net, &mut self.adam, &batch.samples, cfg, rng)?;
        self.version += 1;
        Ok(stats)
    }
}

/// Clipped-surrogate PPO over `epochs` shuffled passes. On a non-finite
/// loss or parameter the network and optimizer are restored and a
/// training error is returned.
pub fn ppo_update<R: Rng + ?Sized>(
    net: &mut AskNet,
    adam: &mut Adam,
    samples: &[PpoSample],
    cfg: &PpoConfig,
    rng: &mut R,
) -> Result<PpoStats> {
    if samples.is_empty() {
        return Ok(PpoStats::default());
    }
    let saved = (net.clone(), adam.clone());
    let restore = |net: &mut AskNet, adam: &mut Adam, msg: String| {
        *net = saved.0.clone();
        *adam = saved.1.clone();
        Err(Error::Training(msg))
    };
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut stats = PpoStats::default();
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(cfg.minibatch_size.max(1)) {
            let mb: Vec<&PpoSample> = chunk.iter().map(|&i| &samples[i]).collect();
            let s = match minibatch_step(net, adam, &mb, cfg) {
                Ok(s) => s,
                Err(e) => return restore(net, adam, e.to_string()),
            };
            if !s.policy_loss.is_finite() || !s.value_loss.is_finite() || !s.entropy.is_finite() {
                return restore(net, adam, format!("non-finite loss {s:?}"));
            }
            if !net.is_finite() {
                return restore(net, adam, "non-finite parameters after update".into());
            }
            stats.policy_loss += s.policy_loss;
            stats.value_loss += s.value_loss;
            stats.entropy += s.entropy;
            stats.clip_fraction += s.clip_fraction;
            stats.approx_kl += s.approx_kl;
            stats.minibatches += 1;
        }
    }
    let n = stats.minibatches.max(1) as f64;
    stats.policy_loss /= n;
    stats.value_loss /= n;
    stats.entropy /= n;
    stats.clip_fraction /= n;
    stats.approx_kl /= n;
    Ok(stats)
}

fn minibatch_step(net: &mut AskNet, adam: &mut Adam, mb: &[&PpoSample], cfg: &PpoConfig) -> Result<PpoStats> {
    let b = mb.len();
    let input: Vec<f64> = mb.iter().flat_map(|s| s.input.iter().copied()).collect();
    let mut g = Graph::new();
    let fv = net.forward(&mut g, input, b)?;
    let outputs = net.config().policy_outputs;

    let logits = if mb.iter().all(|s| matches!(s.head, Head::Pair(_))) {
        let idx = mb
            .iter()
            .flat_map(|s| match s.head {
                Head::Pair(k) => [2 * k, 2 * k + 1],
                Head::Masked(_) => unreachable!(),
            })
            .collect();
        g.gather(fv.logits, idx, 2)
    } else {
        let mut bias = Vec::with_capacity(b * outputs);
        for s in mb {
            let Head::Masked(mask) = &s.head else {
                return Err(Error::Training("minibatch mixes pair and masked heads".into()));
            };
            bias.extend(mask.iter().map(|&ok| if ok { 0.0 } else { MASKED_LOGIT }));
        }
        let bias = g.input(&[b, outputs], bias);
        g.add(fv.logits, bias)
    };
    let logp = g.log_softmax(logits);
    let new_lp = g.pick(logp, mb.iter().map(|s| s.action).collect());
    let old_lp = g.input(&[b], mb.iter().map(|s| s.old_log_prob).collect());
    let adv = g.input(&[b], mb.iter().map(|s| s.advantage).collect());
    let ret = g.input(&[b], mb.iter().map(|s| s.ret).collect());

    let diff = g.sub(new_lp, old_lp);
    let ratio = g.exp(diff);
    let s1 = g.mul(ratio, adv);
    let clipped = g.clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    let s2 = g.mul(clipped, adv);
    let surr = g.min(s1, s2);
    let surr = g.mean(surr);
    let policy_loss = g.scale(surr, -1.0);

    let verr = g.sub(fv.value, ret);
    let verr = g.square(verr);
    let value_loss = g.mean(verr);

    let probs = g.exp(logp);
    let plogp = g.mul(probs, logp);
    let neg_ent = g.row_sum(plogp);
    let neg_ent = g.mean(neg_ent);

    let v_term = g.scale(value_loss, cfg.value_coef);
    let e_term = g.scale(neg_ent, cfg.entropy_coef);
    let loss = g.add(policy_loss, v_term);
    let loss = g.add(loss, e_term);

    let ratios = g.value(ratio).to_vec();
    let diffs = g.value(diff).to_vec();
    let stats = PpoStats {
        policy_loss: g.value(policy_loss)[0],
        value_loss: g.value(value_loss)[0],
        entropy: -g.value(neg_ent)[0],
        clip_fraction: ratios.iter().filter(|r| (*r - 1.0).abs() > cfg.clip).count() as f64 / b as f64,
        approx_kl: -diffs.iter().sum::<f64>() / b as f64,
        minibatches: 1,
    };
    if !g.value(loss)[0].is_finite() {
        return Ok(stats);
    }
    g.backward(loss)?;
    net.zero_grad();
    net.accumulate_grads(&g, &fv);
    adam.step(&mut net.params);
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use w2a_neural::{Categorical, NetConfig};

    fn tiny_net(outputs: usize, seed: u64) -> AskNet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AskNet::new(NetConfig::new(3, 3, outputs).with_widths([2, 2, 2], [4, 4]), &mut rng)
    }

    fn samples_for(net: &AskNet, n: usize, adv: f64) -> Vec<PpoSample> {
        let input: Vec<f64> = (0..36).map(|i| (i % 5) as f64 * 0.3 - 0.5).collect();
        let (logits, _) = net.infer(input.clone(), 1).unwrap();
        let d = Categorical::pair(logits[0], logits[1]);
        (0..n)
            .map(|i| PpoSample {
                input: input.clone(),
                head: Head::Pair(0),
                action: i % 2,
                old_log_prob: d.log_prob(i % 2),
                advantage: adv,
                ret: 0.0,
            })
            .collect()
    }

    #[test]
    fn first_minibatch_has_unit_ratios() {
        let mut net = tiny_net(2, 1);
        let mut adam = Adam::new(Default::default(), &net.params);
        let s = samples_for(&net, 8, 1.0);
        let cfg = PpoConfig { epochs: 1, minibatch_size: 8, ..PpoConfig::default() };
        let stats = ppo_update(&mut net, &mut adam, &s, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(stats.clip_fraction, 0.0);
        assert!(stats.approx_kl.abs() < 1e-12);
    }

    #[test]
    fn zero_advantages_give_no_policy_gradient() {
        let net = tiny_net(2, 2);
        let s = samples_for(&net, 4, 0.0);
        let cfg = PpoConfig { value_coef: 0.0, entropy_coef: 0.0, ..PpoConfig::default() };
        let mb: Vec<&PpoSample> = s.iter().collect();
        let mut probe = net.clone();
        let mut adam = Adam::new(Default::default(), &probe.params);
        minibatch_step(&mut probe, &mut adam, &mb, &cfg).unwrap();
        // Adam moves nothing when every gradient is zero
        assert_eq!(probe, net);
    }

    #[test]
    fn non_finite_loss_restores_parameters() {
        let mut net = tiny_net(2, 3);
        let before = net.clone();
        let mut adam = Adam::new(Default::default(), &net.params);
        let mut s = samples_for(&net, 8, 1.0);
        s[5].advantage = f64::NAN;
        let err = ppo_update(&mut net, &mut adam, &s, &PpoConfig::default(), &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(Error::Training(_))));
        assert_eq!(net, before);
    }

    #[test]
    fn stale_batches_are_rejected() {
        let net = tiny_net(2, 4);
        let cfg = PpoConfig::default();
        let mut learner = Learner::new(net, &cfg);
        let batch = Batch { version: 3, samples: vec![] };
        assert!(learner.update(&batch, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        let batch = Batch { version: 0, samples: vec![] };
        learner.update(&batch, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(learner.version, 1);
    }

    #[test]
    fn masked_actions_keep_zero_probability() {
        let mut net = tiny_net(3, 5);
        let mut adam = Adam::new(Default::default(), &net.params);
        let input: Vec<f64> = vec![0.1; 36];
        let mask = vec![true, false, true];
        let (logits, _) = net.infer(input.clone(), 1).unwrap();
        let d = Categorical::masked(&logits, &mask);
        let s: Vec<PpoSample> = [0, 2]
            .iter()
            .map(|&a| PpoSample {
                input: input.clone(),
                head: Head::Masked(mask.clone()),
                action: a,
                old_log_prob: d.log_prob(a),
                advantage: if a == 0 { 1.0 } else { -1.0 },
                ret: 0.5,
            })
            .collect();
        let stats = ppo_update(&mut net, &mut adam, &s, &PpoConfig::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(stats.entropy.is_finite() && stats.entropy <= 2f64.ln() + 1e-9);
        assert!(net.is_finite());
    }
}
