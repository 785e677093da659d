//! Per-sample forward/backward and inference timing for a few network widths.

use std::time::Instant;
use rand::SeedableRng;
use w2a_neural::{AskNet, Graph, NetConfig};

fn main() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0);
    for (conv, hidden) in [([16, 32, 32], [128, 64]), ([8, 16, 16], [64, 32]), ([8, 8, 8], [32, 32])] {
        let cfg = NetConfig::new(12, 12, 20).with_widths(conv, hidden);
        let net = AskNet::new(cfg.clone(), &mut rng);
        let x: Vec<f64> = (0..cfg.input_len() * 64).map(|i| (i % 7) as f64 - 3.0).collect();
        let t = Instant::now();
        for _ in 0..5 {
            let mut g = Graph::new();
            let fv = net.forward(&mut g, x.clone(), 64).unwrap();
            let s = g.sum(fv.logits);
            g.backward(s).unwrap();
        }
        let train = t.elapsed().as_secs_f64() / (5.0 * 64.0);
        let one: Vec<f64> = x[..cfg.input_len()].to_vec();
        let t = Instant::now();
        for _ in 0..200 {
            net.infer(one.clone(), 1).unwrap();
        }
        let inf = t.elapsed().as_secs_f64() / 200.0;
        println!("{conv:?} {hidden:?}: fwd+bwd/sample {:.3} ms, infer {:.3} ms, params {}", train * 1e3, inf * 1e3, net.num_params());
    }
}
