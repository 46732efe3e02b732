mod common;

use common::{
    finite_difference, forward, quantile, random_instance, relative_error, to_layer, Spike,
};
use snnff::neuron::SpikeFn;
use snnff::Mode;

#[test]
fn backward_matches_finite_differences() {
    let mut errs = Vec::new();
    for seed in 0..20 {
        let inst = random_instance(seed);
        let (mut layer, input) = to_layer(&inst);
        let trace = layer
            .forward_with(&input, Mode::Train, SpikeFn::Smooth)
            .unwrap();
        let analytic = layer.backward(&trace, &inst.weights_b).unwrap().flatten();
        let numeric = finite_difference(&inst, 1e-5);
        assert_eq!(analytic.len(), numeric.len());
        let e: Vec<f64> = analytic
            .iter()
            .zip(&numeric)
            .map(|(&a, &f)| relative_error(a, f))
            .collect();
        let worst = e.iter().cloned().fold(0.0, f64::max);
        assert!(worst <= 1e-2, "seed {seed}: max relative error {worst}");
        errs.extend(e);
    }
    let p90 = quantile(errs, 0.9);
    assert!(p90 <= 1e-4, "90th percentile relative error {p90}");
}

#[test]
fn forward_matches_scalar_oracle() {
    for seed in 100..150 {
        let inst = random_instance(seed);
        let (mut layer, input) = to_layer(&inst);
        let trace = layer.forward(&input, Mode::Train).unwrap();
        let oracle = forward(&inst.params, &inst.x, Spike::Step, None);
        for t in 0..inst.x.len() {
            for (r, row) in oracle.u[t].iter().enumerate() {
                for (i, &u) in row.iter().enumerate() {
                    assert!(
                        (trace.membranes[t].get(r, i) - u).abs() <= 1e-10,
                        "seed {seed} U[{t}]"
                    );
                    assert_eq!(trace.spikes[t].get(r, i), oracle.s[t][r][i]);
                    assert!(
                        (trace.normalized[t].get(r, i) - oracle.normed[t][r][i]).abs() <= 1e-10
                    );
                }
            }
        }
        let g = snnff::layer::goodness(&trace).per_sample;
        for (a, b) in g.iter().zip(&oracle.g) {
            assert!((a - b).abs() <= 1e-10);
        }
    }
}
