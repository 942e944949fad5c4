//! Scratch probe for pinning acceptance expectations (not part of the API).

use mbqrc_core::reservoir::InitialState;
use mbqrc_core::tasks::{
    run_narma, run_static_xor, run_temporal_xor, static_xor_logistic_options,
    temporal_xor_default_splits, temporal_xor_logistic_options,
};

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "xor".into());

    if which == "xor" {
        println!("== temporal XOR, defaults, seeds 0..7 ==");
        for seed in 0..8u64 {
            let t0 = std::time::Instant::now();
            let out = run_temporal_xor(
                seed,
                temporal_xor_default_splits(),
                &temporal_xor_logistic_options(),
            )
            .unwrap();
            println!(
                "seed {seed}: test acc {:.4}, train acc {:.4}, lambda {:.4}, epochs {} ({:.2?})",
                out.test_accuracy,
                out.train_accuracy,
                out.lambda,
                out.report.loss_trace.len(),
                t0.elapsed()
            );
        }

        println!("== static XOR, seeded long descent, seeds 0..10 ==");
        for seed in 0..10u64 {
            let opts = static_xor_logistic_options(seed);
            let t0 = std::time::Instant::now();
            let vac = run_static_xor(InitialState::Vacuum, 250, &opts).unwrap();
            let coh = run_static_xor(InitialState::CoherentX(1.0), 250, &opts).unwrap();
            println!(
                "seed {seed}: vacuum acc {:.2} preds {:?} | coherent acc {:.2} preds {:?} ({:.2?})",
                vac.pattern_accuracy,
                vac.pattern_predictions,
                coh.pattern_accuracy,
                coh.pattern_predictions,
                t0.elapsed()
            );
        }
    }

    if which == "narma" {
        println!("== NARMA medians over 10 realizations ==");
        let splits = mbqrc_core::tasks::narma_default_splits();
        for n in [4usize, 8, 12, 14] {
            for d in [2usize, 5, 7] {
                let mut errs: Vec<f64> = (0..10u64)
                    .map(|r| run_narma(n, &[d], r, splits, 0.0).unwrap()[0].test_nmse)
                    .collect();
                errs.sort_by(f64::total_cmp);
                let median = 0.5 * (errs[4] + errs[5]);
                println!(
                    "N={n:2} d={d}: median {median:.4}  (min {:.4} max {:.4})",
                    errs[0], errs[9]
                );
            }
        }
    }
}
