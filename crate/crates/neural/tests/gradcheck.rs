use w2a_neural::gradcheck::layer_suite;

#[test]
fn every_layer_matches_central_differences() {
    let report = layer_suite(20, 7, 1e-5);
    for (layer, r) in &report {
        assert!(
            r.max_rel_err <= 1e-4,
            "{layer}: max relative error {:.3e} over {} entries",
            r.max_rel_err,
            r.entries
        );
    }
    let names: Vec<_> = report.iter().map(|(n, _)| *n).collect();
    for want in ["linear", "conv3x3", "relu", "log_softmax", "asknet", "clipped_surrogate"] {
        assert!(names.contains(&want), "{want} not exercised");
    }
}
