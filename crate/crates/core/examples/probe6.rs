//! MNIST diagnosis: linear baseline vs softmax on raw/standardized features.

use std::path::PathBuf;

use mbqrc_core::readout::{
    accuracy, fit_linear, fit_softmax, predict_linear, predict_softmax, DesignMatrix,
    SoftmaxOptions, Standardizer, WeightSet,
};
use mbqrc_core::tasks::{
    find_idx_file, mnist_benchmark_config, mnist_image_features, mnist_load, MnistTopology,
    MNIST_FILES,
};

fn main() {
    let data_dir = PathBuf::from(
        std::env::var("MBQRC_MNIST_DIR").unwrap_or_else(|_| "data/mnist".into()),
    );
    let config = mnist_benchmark_config(MnistTopology::Ring);
    let mut train = mnist_load(
        find_idx_file(&data_dir, MNIST_FILES[0].0).unwrap(),
        find_idx_file(&data_dir, MNIST_FILES[0].1).unwrap(),
    )
    .unwrap();
    let mut test = mnist_load(
        find_idx_file(&data_dir, MNIST_FILES[1].0).unwrap(),
        find_idx_file(&data_dir, MNIST_FILES[1].1).unwrap(),
    )
    .unwrap();
    train.truncate(10_000);
    test.truncate(2_000);

    let t0 = std::time::Instant::now();
    let featurize = |images: &[mbqrc_core::MnistImage]| -> (DesignMatrix, Vec<usize>) {
        let rows: Vec<Vec<f64>> = images
            .iter()
            .map(|img| mnist_image_features(&config, img).unwrap())
            .collect();
        let labels: Vec<usize> = images.iter().map(|i| usize::from(i.label)).collect();
        (DesignMatrix::from_feature_rows(&rows).unwrap(), labels)
    };
    let (train_d, train_l) = featurize(&train);
    let (test_d, test_l) = featurize(&test);
    println!("featurized in {:.1?}", t0.elapsed());

    // One-vs-rest least squares baseline (ridge for speed), argmax decision.
    let t0 = std::time::Instant::now();
    let mut per_class: Vec<Vec<f64>> = Vec::new();
    for class in 0..10usize {
        let targets: Vec<f64> = train_l.iter().map(|l| f64::from(*l == class)).collect();
        let WeightSet::Single(w) = fit_linear(&train_d, &targets, 1e-6).unwrap() else {
            panic!()
        };
        per_class.push(w.iter().copied().collect());
    }
    let argmax_acc = |d: &DesignMatrix, labels: &[usize]| -> f64 {
        let scores: Vec<Vec<f64>> = per_class
            .iter()
            .map(|w| {
                let ws = WeightSet::Single(nalgebra::DVector::from_row_slice(w));
                predict_linear(&ws, d).unwrap()
            })
            .collect();
        let mut hits = 0usize;
        for i in 0..labels.len() {
            let mut best = 0;
            for c in 1..10 {
                if scores[c][i] > scores[best][i] {
                    best = c;
                }
            }
            hits += usize::from(best == labels[i]);
        }
        hits as f64 / labels.len() as f64
    };
    println!(
        "LS one-vs-rest: train {:.4} test {:.4} ({:.1?})",
        argmax_acc(&train_d, &train_l),
        argmax_acc(&test_d, &test_l),
        t0.elapsed()
    );

    // Softmax on standardized features.
    let std = Standardizer::fit(&train_d);
    let train_s = std.transform(&train_d).unwrap();
    let test_s = std.transform(&test_d).unwrap();
    for (epochs, lr) in [(15usize, 1e-3), (15, 1e-2), (50, 1e-3)] {
        let opts = SoftmaxOptions {
            epochs,
            seed: 1,
            adam: mbqrc_core::AdamParams { learn_rate: lr, ..Default::default() },
            ..Default::default()
        };
        let t0 = std::time::Instant::now();
        let (w, report) =
            fit_softmax(&train_s, &train_l, 10, Some((&test_s, &test_l)), &opts).unwrap();
        let pred = predict_softmax(&w, &test_s).unwrap();
        println!(
            "softmax std epochs {epochs} lr {lr}: test {:.4} best_epoch {} ({:.1?})",
            accuracy(&pred, &test_l).unwrap(),
            report.best_epoch,
            t0.elapsed()
        );
    }
}
