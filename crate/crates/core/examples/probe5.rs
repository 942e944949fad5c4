//! MNIST desk-scale probe with timing.

use std::path::PathBuf;

use mbqrc_core::tasks::{run_mnist, MnistRunSpec, MnistTopology};

fn main() {
    let data_dir = PathBuf::from(
        std::env::var("MBQRC_MNIST_DIR").unwrap_or_else(|_| "data/mnist".into()),
    );
    let topologies = [MnistTopology::Ring, MnistTopology::Chain, MnistTopology::TwoNn];
    for topology in topologies {
        let spec = MnistRunSpec::desk_scale(topology, data_dir.clone(), 0);
        let t0 = std::time::Instant::now();
        let out = run_mnist(&spec).unwrap();
        println!(
            "{:>5}: test acc {:.4} (best epoch {:2}) lambda {:.4} features {} ({:.1?})",
            topology.as_str(),
            out.test_accuracy,
            out.best_epoch,
            out.lambda,
            out.n_features,
            t0.elapsed()
        );
    }
}
