// scratch experiment runner (not part of the deliverable test suite):
// prints classifier accuracy and pooled gradient-variance trajectories to
// pick synthetic-data difficulty.

use blockinit::ansatz::{build_identity_block, IdentityBlockPlan};
use blockinit::data::synth_dataset;
use blockinit::train::{qnn_train, TrainConfig};
use rayon::prelude::*;

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

fn main() {
    let n = 8;
    let dataset = synth_dataset(200, n, 90_000).unwrap();

    let results: Vec<(f64, Vec<Vec<f64>>, Vec<(usize, f64)>)> = (0..6u64)
        .into_par_iter()
        .map(|seed| {
            let (template, params) =
                build_identity_block(n, &IdentityBlockPlan::new(2, 16, 92_000 + seed)).unwrap();
            let mut config = TrainConfig::classifier(seed);
            config.iterations = 2000;
            config.snapshot_every = 100;
            config.accuracy_every = 400;
            let records = qnn_train(&template, &params, &dataset, &config).unwrap();
            let acc = records.last().unwrap().accuracy.unwrap();
            let group: Vec<usize> = (0..template.n_params())
                .filter(|&slot| template.rotation_for_slot(slot).unwrap().1 < 3)
                .collect();
            let snaps: Vec<Vec<f64>> = records
                .iter()
                .filter_map(|r| r.grad_snapshot.as_ref())
                .map(|g| group.iter().map(|&s| g[s]).collect())
                .collect();
            let accs: Vec<(usize, f64)> = records
                .iter()
                .filter_map(|r| r.accuracy.map(|a| (r.iteration, a)))
                .collect();
            (acc, snaps, accs)
        })
        .collect();

    println!("final accuracies: {:?}", results.iter().map(|r| r.0).collect::<Vec<_>>());
    println!("accuracy trajectory (seed 0): {:?}", results[0].2);
    let n_snapshots = results[0].1.len();
    let n_group = results[0].1[0].len();
    for s in 0..n_snapshots {
        let pooled: Vec<f64> = results
            .iter()
            .flat_map(|(_, snaps, _)| snaps[s].iter().copied())
            .collect();
        // per-param variance across trials, max over the group
        let envelope = (0..n_group)
            .map(|k| {
                let per_param: Vec<f64> = results.iter().map(|(_, snaps, _)| snaps[s][k]).collect();
                sample_variance(&per_param)
            })
            .fold(0.0f64, f64::max);
        println!(
            "iter {:>5}: pooled {:.6}  envelope {:.6}",
            s * 100,
            sample_variance(&pooled),
            envelope
        );
    }
}
