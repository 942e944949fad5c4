//! Variant hunt: which sequence-level interpretation makes temporal XOR
//! linearly separable? Self-contained step loop so variants can be hacked.

use mbqrc_core::readout::{
    accuracy, fit_logistic, predict_logistic, DesignMatrix, LogisticOptions, Standardizer,
    WeightInit,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fourier(sign: f64) -> DMatrix<f64> {
    // sign=+1: [[0,-1],[1,0]] per block; sign=-1 the transpose.
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..2 {
        m[(2 * i, 2 * i + 1)] = -sign;
        m[(2 * i + 1, 2 * i)] = sign;
    }
    m
}

fn cz() -> DMatrix<f64> {
    let mut m = DMatrix::identity(4, 4);
    m[(1, 2)] = 1.0;
    m[(3, 0)] = 1.0;
    m
}

fn shear(d1: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(4, 4);
    m[(1, 0)] = d1;
    m
}

fn run_variant(order: &str, f_sign: f64, pair_shift: usize, inputs: &[f64]) -> (f64, f64) {
    let t = 0.4;
    let washout = 100usize;
    let mut gamma = DMatrix::<f64>::identity(4, 4);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut targets: Vec<f64> = Vec::new();
    for (k, &s) in inputs.iter().enumerate() {
        let u = match order {
            "czfd" => cz() * fourier(f_sign) * shear(s / 3.0),
            "dfcz" => shear(s / 3.0) * fourier(f_sign) * cz(),
            "fdcz" => fourier(f_sign) * shear(s / 3.0) * cz(),
            _ => unreachable!(),
        };
        let transported = &u * &gamma * u.transpose();
        let meas = [
            (1.0 - t) * transported[(0, 0)] + t,
            (1.0 - t) * transported[(0, 2)],
            (1.0 - t) * transported[(2, 2)] + t,
        ];
        gamma = &transported * t + DMatrix::identity(4, 4) * (1.0 - t);
        if k >= washout && k >= pair_shift {
            rows.push(meas.to_vec());
            let a = inputs[k - pair_shift];
            let b = inputs[k - pair_shift - 1];
            targets.push(f64::from(a != b));
        }
    }
    let design = DesignMatrix::from_feature_rows(&rows).unwrap();
    let std = Standardizer::fit(&design);
    let design = std.transform(&design).unwrap();
    let opts = LogisticOptions {
        learn_rate: 1.0,
        max_epochs: 30_000,
        loss_tol: 0.0,
        init: WeightInit::Zero,
    };
    let (w, report) = fit_logistic(&design, &targets, None, &opts).unwrap();
    let pred = predict_logistic(&w, &design).unwrap();
    let truth: Vec<u8> = targets.iter().map(|y| *y as u8).collect();
    (accuracy(&pred, &truth).unwrap(), report.final_loss)
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inputs: Vec<f64> = (0..2000).map(|_| f64::from(rng.gen_bool(0.5))).collect();

    for order in ["czfd", "dfcz", "fdcz"] {
        for f_sign in [1.0, -1.0] {
            for pair_shift in [0usize, 1] {
                let (acc, loss) = run_variant(order, f_sign, pair_shift, &inputs);
                println!(
                    "order {order:5} f_sign {f_sign:+} pair_shift {pair_shift}: train acc {acc:.4} loss {loss:.5}"
                );
            }
        }
    }
}
