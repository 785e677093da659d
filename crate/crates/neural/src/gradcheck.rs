//! Central finite-difference gradient checking.
//!
//! Only forward values are used to form the numeric estimate, so the check
//! is independent of the backward rules it validates.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::asknet::{AskNet, NetConfig};
use crate::graph::{Graph, Var};

/// Relative error with a floor on the denominator so gradients that are
/// numerically zero compare on an absolute scale.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub entries: usize,
}

/// Compare the tape gradient of a scalar function against central
/// differences with step `eps` for every entry of every leaf.
///
/// `build` receives fresh leaves (same order and shapes as `leaves`) and must
/// return a scalar node.
pub fn check<F>(leaves: &[(Vec<usize>, Vec<f64>)], eps: f64, build: F) -> GradCheckReport
where
    F: Fn(&mut Graph, &[Var]) -> Var,
{
    let eval = |vals: &[Vec<f64>]| -> f64 {
        let mut g = Graph::new();
        let vars: Vec<Var> = leaves
            .iter()
            .zip(vals)
            .map(|((shape, _), v)| g.leaf(shape, v.clone()))
            .collect();
        let out = build(&mut g, &vars);
        g.value(out)[0]
    };

    let mut g = Graph::new();
    let vars: Vec<Var> = leaves.iter().map(|(s, v)| g.leaf(s, v.clone())).collect();
    let out = build(&mut g, &vars);
    g.backward(out).expect("gradcheck target must be scalar");
    let analytic: Vec<Vec<f64>> = vars.iter().map(|v| g.grad(*v)).collect();

    let mut vals: Vec<Vec<f64>> = leaves.iter().map(|(_, v)| v.clone()).collect();
    let mut max_rel_err: f64 = 0.0;
    let mut entries = 0;
    for i in 0..vals.len() {
        for j in 0..vals[i].len() {
            let orig = vals[i][j];
            vals[i][j] = orig + eps;
            let up = eval(&vals);
            vals[i][j] = orig - eps;
            let down = eval(&vals);
            vals[i][j] = orig;
            let numeric = (up - down) / (2.0 * eps);
            max_rel_err = max_rel_err.max(relative_error(analytic[i][j], numeric));
            entries += 1;
        }
    }
    GradCheckReport {
        max_rel_err,
        entries,
    }
}

fn uniform(rng: &mut StdRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Values bounded away from `kink` by at least `gap`, so a step of `eps`
/// never crosses a non-differentiable point.
fn away_from(rng: &mut StdRng, n: usize, kink: f64, gap: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let m = rng.gen_range(gap..2.0);
            if rng.gen::<bool>() {
                kink + m
            } else {
                kink - m
            }
        })
        .collect()
}

/// Contract a node against a fixed random projection to get a scalar whose
/// upstream gradient is not uniform.
fn project(g: &mut Graph, v: Var, rng_seed: u64) -> Var {
    let shape = g.shape(v).to_vec();
    let n = g.value(v).len();
    let mut rng = StdRng::seed_from_u64(rng_seed);
    let r = g.input(&shape, uniform(&mut rng, n, -1.0, 1.0));
    let p = g.mul(v, r);
    g.sum(p)
}

/// Run `cases` randomized finite-difference checks for every layer type and
/// return the worst relative error seen per layer.
pub fn layer_suite(cases: usize, seed: u64, eps: f64) -> Vec<(&'static str, GradCheckReport)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out: Vec<(&'static str, GradCheckReport)> = Vec::new();
    let mut record = |name: &'static str, r: GradCheckReport| {
        if let Some((_, acc)) = out.iter_mut().find(|(n, _)| *n == name) {
            acc.max_rel_err = acc.max_rel_err.max(r.max_rel_err);
            acc.entries += r.entries;
        } else {
            out.push((name, r));
        }
    };

    for case in 0..cases {
        let ps = rng.gen::<u64>();
        let b = rng.gen_range(1..4);
        let fin = rng.gen_range(1..6);
        let fout = rng.gen_range(1..5);
        let leaves = vec![
            (vec![b, fin], uniform(&mut rng, b * fin, -2.0, 2.0)),
            (vec![fin, fout], uniform(&mut rng, fin * fout, -1.0, 1.0)),
            (vec![fout], uniform(&mut rng, fout, -1.0, 1.0)),
        ];
        record(
            "linear",
            check(&leaves, eps, |g, v| {
                let y = g.linear(v[0], v[1], v[2]);
                project(g, y, ps)
            }),
        );

        let (ci, co, h, w) = (
            rng.gen_range(1..3),
            rng.gen_range(1..3),
            rng.gen_range(1..5),
            rng.gen_range(1..5),
        );
        let leaves = vec![
            (vec![b, ci, h, w], uniform(&mut rng, b * ci * h * w, -2.0, 2.0)),
            (vec![co, ci, 3, 3], uniform(&mut rng, co * ci * 9, -1.0, 1.0)),
            (vec![co], uniform(&mut rng, co, -1.0, 1.0)),
        ];
        record(
            "conv3x3",
            check(&leaves, eps, |g, v| {
                let y = g.conv3x3(v[0], v[1], v[2]);
                project(g, y, ps)
            }),
        );

        let n = rng.gen_range(1..8);
        let leaves = vec![(vec![n], away_from(&mut rng, n, 0.0, 1e-2))];
        record(
            "relu",
            check(&leaves, eps, |g, v| {
                let y = g.relu(v[0]);
                project(g, y, ps)
            }),
        );

        let cols = rng.gen_range(2..5);
        let leaves = vec![(vec![b, cols], uniform(&mut rng, b * cols, -3.0, 3.0))];
        record(
            "log_softmax",
            check(&leaves, eps, |g, v| {
                let y = g.log_softmax(v[0]);
                project(g, y, ps)
            }),
        );

        let idx: Vec<usize> = (0..b * 2).map(|_| rng.gen_range(0..cols)).collect();
        let pick: Vec<usize> = (0..b).map(|_| rng.gen_range(0..2)).collect();
        let leaves = vec![(vec![b, cols], uniform(&mut rng, b * cols, -3.0, 3.0))];
        record(
            "gather_pick",
            check(&leaves, eps, |g, v| {
                let y = g.gather(v[0], idx.clone(), 2);
                let y = g.pick(y, pick.clone());
                project(g, y, ps)
            }),
        );

        let leaves = vec![
            (vec![n], uniform(&mut rng, n, -2.0, 2.0)),
            (vec![n], uniform(&mut rng, n, -2.0, 2.0)),
        ];
        record(
            "elementwise",
            check(&leaves, eps, |g, v| {
                let a = g.add(v[0], v[1]);
                let s = g.sub(v[0], v[1]);
                let m = g.mul(a, s);
                let e = g.exp(m);
                let q = g.square(v[1]);
                let k = g.scale(q, -0.7);
                let t = g.add(e, k);
                let mean = g.mean(t);
                let y = project(g, t, ps);
                g.add(y, mean)
            }),
        );

        // min and clamp are only differentiable away from ties and bounds.
        let a = away_from(&mut rng, n, 0.0, 0.05);
        let bvals: Vec<f64> = a
            .iter()
            .map(|x| x + if rng.gen::<bool>() { 0.5 } else { -0.5 })
            .collect();
        let c = away_from(&mut rng, n, 1.0, 0.05);
        let leaves = vec![(vec![n], a), (vec![n], bvals), (vec![n], c)];
        record(
            "min_clamp",
            check(&leaves, eps, |g, v| {
                let m = g.min(v[0], v[1]);
                let c = g.clamp(v[2], -5.0, 1.0);
                let y = g.add(m, c);
                project(g, y, ps)
            }),
        );

        let leaves = vec![(vec![b, cols], uniform(&mut rng, b * cols, -2.0, 2.0))];
        record(
            "row_sum",
            check(&leaves, eps, |g, v| {
                let y = g.row_sum(v[0]);
                project(g, y, ps)
            }),
        );

        // Clipped-surrogate style composite on top of a categorical pair.
        let old: Vec<f64> = uniform(&mut rng, b, -1.5, -0.2);
        let adv: Vec<f64> = uniform(&mut rng, b, -1.0, 1.0);
        let leaves = vec![(vec![b, cols], uniform(&mut rng, b * cols, -1.0, 1.0))];
        record(
            "clipped_surrogate",
            check(&leaves, eps, |g, v| {
                let pair = g.gather(v[0], idx.clone(), 2);
                let lp = g.log_softmax(pair);
                let chosen = g.pick(lp, pick.clone());
                let old_v = g.input(&[b], old.clone());
                let diff = g.sub(chosen, old_v);
                let ratio = g.exp(diff);
                let adv_v = g.input(&[b], adv.clone());
                let s1 = g.mul(ratio, adv_v);
                // wide clip keeps the check away from the clip boundary
                let clipped = g.clamp(ratio, 1e-3, 1e3);
                let s2 = g.mul(clipped, adv_v);
                let m = g.min(s1, s2);
                let probs = g.exp(lp);
                let plogp = g.mul(probs, lp);
                let ent = g.row_sum(plogp);
                let t = g.add(m, ent);
                g.mean(t)
            }),
        );

        if case % 10 == 0 {
            let cfg = NetConfig::new(rng.gen_range(2..4), rng.gen_range(2..4), 4)
                .with_widths([2, 2, 2], [3, 3]);
            let net = AskNet::new(cfg.clone(), &mut rng);
            // Shift biases so ReLU pre-activations are not pinned at zero.
            let mut leaves: Vec<(Vec<usize>, Vec<f64>)> = net
                .params
                .iter()
                .map(|t| {
                    let vals = if t.shape().len() == 1 {
                        uniform(&mut rng, t.len(), 0.1, 0.5)
                    } else {
                        t.values.clone()
                    };
                    (t.shape().to_vec(), vals)
                })
                .collect();
            leaves.insert(0, (vec![1, 4, cfg.height, cfg.width], uniform(&mut rng, cfg.input_len(), -1.0, 1.0)));
            record(
                "asknet",
                check(&leaves, eps, |g, v| {
                    let (logits, value) = net.forward_with_params(g, v[0], &v[1..]);
                    let a = project(g, logits, ps);
                    let b = project(g, value, ps ^ 1);
                    g.add(a, b)
                }),
            );
        }
    }
    out
}
