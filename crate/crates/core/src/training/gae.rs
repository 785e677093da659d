/// Generalized advantage estimation over concatenated episodes. A `done`
/// step bootstraps from 0; the final step bootstraps from `last_value`
/// unless it is done. Returns `(advantages, returns)`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(values.len() == n && dones.len() == n, "gae inputs must align");
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let (next_value, carry) = if dones[t] {
            (0.0, 0.0)
        } else if t + 1 == n {
            (last_value, 0.0)
        } else {
            (values[t + 1], running)
        };
        let delta = rewards[t] + gamma * next_value - values[t];
        running = delta + gamma * lambda * carry;
        adv[t] = running;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// Direct definition, O(T²): `A_t = Σ_l (γλ)^l δ_{t+l}` up to the end of
/// the episode containing `t`.
pub fn gae_reference(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> Vec<f64> {
    let n = rewards.len();
    let delta = |s: usize| {
        let next = if dones[s] {
            0.0
        } else if s + 1 == n {
            last_value
        } else {
            values[s + 1]
        };
        rewards[s] + gamma * next - values[s]
    };
    (0..n)
        .map(|t| {
            let mut total = 0.0;
            for s in t..n {
                total += (gamma * lambda).powi((s - t) as i32) * delta(s);
                if dones[s] {
                    break;
                }
            }
            total
        })
        .collect()
}

/// Zero mean, unit variance (left centred only when the spread is ~0).
pub fn normalize(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    for x in xs.iter_mut() {
        *x -= mean;
        if sd > 1e-8 {
            *x /= sd;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_rewards_and_values_give_zero_advantages() {
        let (a, r) = compute_gae(&[0.0; 6], &[0.0; 6], &[false, false, true, false, false, true], 0.0, 0.99, 0.95);
        assert!(a.iter().chain(&r).all(|v| *v == 0.0));
    }

    #[test]
    fn undiscounted_advantage_is_the_sum_of_future_rewards() {
        let rewards = [1.0, 0.0, 2.0, 0.5, 3.0];
        let dones = [false, false, true, false, true];
        let (a, _) = compute_gae(&rewards, &[0.0; 5], &dones, 0.0, 1.0, 1.0);
        assert_eq!(a, vec![3.0, 2.0, 2.0, 3.5, 3.0]);
    }

    #[test]
    fn bootstraps_from_last_value_when_cut() {
        let (a, r) = compute_gae(&[0.0], &[0.0], &[false], 2.0, 0.5, 1.0);
        assert_eq!(a, vec![1.0]);
        assert_eq!(r, vec![1.0]);
    }

    #[test]
    fn normalize_gives_zero_mean_unit_variance() {
        let mut xs = vec![1.0, 2.0, 3.0, 10.0];
        normalize(&mut xs);
        let mean: f64 = xs.iter().sum::<f64>() / 4.0;
        let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        let mut flat = vec![2.0; 3];
        normalize(&mut flat);
        assert_eq!(flat, vec![0.0; 3]);
    }

    proptest! {
        #[test]
        fn matches_definition(
            steps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, proptest::bool::weighted(0.1)), 1..60),
            last in -1.0f64..1.0,
            gamma in 0.5f64..=1.0,
            lambda in 0.0f64..=1.0,
        ) {
            let r: Vec<f64> = steps.iter().map(|s| s.0).collect();
            let v: Vec<f64> = steps.iter().map(|s| s.1).collect();
            let d: Vec<bool> = steps.iter().map(|s| s.2).collect();
            let (a, _) = compute_gae(&r, &v, &d, last, gamma, lambda);
            let o = gae_reference(&r, &v, &d, last, gamma, lambda);
            for (x, y) in a.iter().zip(&o) {
                prop_assert!((x - y).abs() <= 1e-10, "{} vs {}", x, y);
            }
        }
    }
}
