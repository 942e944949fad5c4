//! Deeper probes: temporal-XOR class separability and static-XOR stability.

use mbqrc_core::readout::{
    accuracy, fit_logistic, predict_logistic, DesignMatrix, LogisticOptions, Standardizer,
    WeightInit,
};
use mbqrc_core::reservoir::{run_sequence, InitialState};
use mbqrc_core::tasks::{
    derive_seed, gen_temporal_xor, run_static_xor, seed_purpose, temporal_xor_benchmark_config,
    SplitSizes, TaskInputs,
};

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "sep".into());

    if which == "sep" {
        // Collect per-class feature stats and test separability with a long fit.
        let splits = SplitSizes { washout: 100, train: 3000, test: 500 };
        let ds = gen_temporal_xor(splits.total(), derive_seed(0, seed_purpose::DATA, 0)).unwrap();
        let TaskInputs::Scalars(inputs) = &ds.inputs else { panic!() };
        let config = temporal_xor_benchmark_config();
        let records = run_sequence(&config, inputs, splits.washout).unwrap();

        let mut class_stats: Vec<Vec<[f64; 3]>> = vec![Vec::new(); 4];
        for r in &records {
            let k = r.step_index;
            let class = (inputs[k] as usize) * 2 + (inputs[k - 1] as usize);
            class_stats[class].push([r.values[0], r.values[1], r.values[2]]);
        }
        for (c, rows) in class_stats.iter().enumerate() {
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for row in rows {
                for j in 0..3 {
                    lo[j] = lo[j].min(row[j]);
                    hi[j] = hi[j].max(row[j]);
                }
            }
            println!(
                "class (s_k={}, s_k-1={}): n={:4}  O11 [{:.5},{:.5}]  O12 [{:.5},{:.5}]  O22 [{:.5},{:.5}]",
                c / 2, c % 2, rows.len(), lo[0], hi[0], lo[1], hi[1], lo[2], hi[2]
            );
        }

        // Long aggressive fit on the whole collected set: does train accuracy hit 1?
        let design = DesignMatrix::from_records(&records).unwrap();
        let std = Standardizer::fit(&design);
        let design = std.transform(&design).unwrap();
        let targets: Vec<f64> = records.iter().map(|r| ds.target(r.step_index).unwrap()).collect();
        for (rate, epochs) in [(1.0, 50_000usize), (5.0, 200_000), (20.0, 500_000)] {
            let opts = LogisticOptions {
                learn_rate: rate,
                max_epochs: epochs,
                loss_tol: 0.0,
                init: WeightInit::Zero,
            };
            let (w, report) = fit_logistic(&design, &targets, None, &opts).unwrap();
            let pred = predict_logistic(&w, &design).unwrap();
            let truth: Vec<u8> = targets.iter().map(|y| *y as u8).collect();
            println!(
                "rate {rate:5}, epochs {epochs}: train acc {:.4}, loss {:.6}",
                accuracy(&pred, &truth).unwrap(),
                report.final_loss
            );
        }
    }

    if which == "stability" {
        // Do the 3/4 seeds stay 3/4 across epoch budgets?
        for master in [7u64, 9, 13, 21, 42] {
            for epochs in [20_000usize, 50_000, 100_000, 200_000] {
                let opts = LogisticOptions {
                    learn_rate: 0.1,
                    max_epochs: epochs,
                    loss_tol: 0.0,
                    init: WeightInit::Seeded {
                        seed: derive_seed(master, seed_purpose::READOUT, 0),
                        scale: 0.01,
                    },
                };
                let vac = run_static_xor(InitialState::Vacuum, 250, &opts).unwrap();
                print!(
                    "  master {master} epochs {epochs}: acc {:.2} {:?}",
                    vac.pattern_accuracy, vac.pattern_predictions
                );
            }
            println!();
        }
    }
}
