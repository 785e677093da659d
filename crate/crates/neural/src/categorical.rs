use rand::Rng;

/// A categorical distribution over a small set of logits, optionally masked.
///
/// Masked entries get probability exactly zero. The asking head uses it on
/// one `(ask, not-ask)` logit pair; the option selector on the full head.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    log_probs: Vec<f64>,
}

impl Categorical {
    pub fn new(logits: &[f64]) -> Self {
        Self::masked(logits, &vec![true; logits.len()])
    }

    pub fn pair(first: f64, second: f64) -> Self {
        Self::new(&[first, second])
    }

    /// # Panics
    /// If every entry is masked out or the lengths differ.
    pub fn masked(logits: &[f64], mask: &[bool]) -> Self {
        assert_eq!(logits.len(), mask.len());
        assert!(mask.iter().any(|&m| m), "categorical with every entry masked");
        let m = logits
            .iter()
            .zip(mask)
            .filter(|(_, &ok)| ok)
            .map(|(l, _)| *l)
            .fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logits
            .iter()
            .zip(mask)
            .filter(|(_, &ok)| ok)
            .map(|(l, _)| (l - m).exp())
            .sum::<f64>()
            .ln();
        let log_probs = logits
            .iter()
            .zip(mask)
            .map(|(l, &ok)| if ok { l - lse } else { f64::NEG_INFINITY })
            .collect();
        Self { log_probs }
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|l| l.exp()).collect()
    }

    pub fn log_prob(&self, action: usize) -> f64 {
        self.log_probs[action]
    }

    pub fn entropy(&self) -> f64 {
        -self
            .log_probs
            .iter()
            .filter(|l| l.is_finite())
            .map(|l| l.exp() * l)
            .sum::<f64>()
    }

    /// Highest-probability entry; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, l) in self.log_probs.iter().enumerate() {
            if *l > self.log_probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, l) in self.log_probs.iter().enumerate() {
            if !l.is_finite() {
                continue;
            }
            acc += l.exp();
            last = i;
            if u < acc {
                return i;
            }
        }
        last
    }
}
