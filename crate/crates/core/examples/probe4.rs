//! Bipolar-drive check for the temporal XOR task.

use mbqrc_core::readout::{
    accuracy, fit_logistic, predict_logistic, DesignMatrix, LogisticOptions, Standardizer,
    WeightInit,
};
use mbqrc_core::reservoir::run_sequence;
use mbqrc_core::tasks::{
    derive_seed, gen_temporal_xor, seed_purpose, temporal_xor_benchmark_config, SplitSizes,
    TaskInputs,
};

fn main() {
    let splits = SplitSizes { washout: 100, train: 3000, test: 500 };
    for seed in 0..8u64 {
        let ds =
            gen_temporal_xor(splits.total(), derive_seed(seed, seed_purpose::DATA, 0)).unwrap();
        let TaskInputs::Scalars(logical) = &ds.inputs else { panic!() };
        // Drive the measurement basis with the bipolar coding 2s − 1.
        let drive: Vec<f64> = logical.iter().map(|s| 2.0 * s - 1.0).collect();
        let config = temporal_xor_benchmark_config();
        let records = run_sequence(&config, &drive, splits.washout).unwrap();
        let design = DesignMatrix::from_records(&records).unwrap();
        let targets: Vec<f64> =
            records.iter().map(|r| ds.target(r.step_index).unwrap()).collect();

        let train_design = design.slice_rows(0, splits.train).unwrap();
        let test_design = design.slice_rows(splits.train, splits.test).unwrap();
        let std = Standardizer::fit(&train_design);
        let train_design = std.transform(&train_design).unwrap();
        let test_design = std.transform(&test_design).unwrap();

        let opts = LogisticOptions {
            learn_rate: 1.0,
            max_epochs: 20_000,
            loss_tol: 1e-12,
            init: WeightInit::Zero,
        };
        let t0 = std::time::Instant::now();
        let (w, report) = fit_logistic(&train_design, &targets[..splits.train], None, &opts).unwrap();
        let to_u8 = |v: &[f64]| -> Vec<u8> { v.iter().map(|y| *y as u8).collect() };
        let train_acc = accuracy(
            &predict_logistic(&w, &train_design).unwrap(),
            &to_u8(&targets[..splits.train]),
        )
        .unwrap();
        let test_acc = accuracy(
            &predict_logistic(&w, &test_design).unwrap(),
            &to_u8(&targets[splits.train..]),
        )
        .unwrap();
        println!(
            "seed {seed}: train {train_acc:.4} test {test_acc:.4} epochs {} loss {:.6} ({:.2?})",
            report.loss_trace.len(),
            report.final_loss,
            t0.elapsed()
        );
    }
}
