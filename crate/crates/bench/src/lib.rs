//! Shared fixtures for the benchmark suite: a small synthetic corpus and a
//! model trained on it, built once per process.

use logsphere_core::{
    build_training_set, gen_synthetic, train, Dataset, SyntheticSpec, TrainConfig, TrainedModel,
};

pub fn bench_spec() -> SyntheticSpec {
    SyntheticSpec {
        n_train: 1000,
        n_test: 400,
        n_auxiliary: 800,
        ..SyntheticSpec::default()
    }
}

pub fn bench_train_config() -> TrainConfig {
    let mut cfg = TrainConfig::default();
    cfg.model.embed_dim = 16;
    cfg.model.ffn_width = 16;
    cfg.model.num_layers = 2;
    cfg.optim.batch_size = 64;
    cfg.optim.max_epochs = 1;
    cfg.optim.seed = 5;
    cfg
}

pub fn bench_dataset() -> Dataset {
    let corpus = gen_synthetic(&bench_spec()).expect("corpus");
    build_training_set(&corpus.train, &corpus.test, &corpus.auxiliary, 200, 5).expect("dataset")
}

pub fn bench_model() -> (TrainedModel, Dataset) {
    let dataset = bench_dataset();
    let mut cfg = bench_train_config();
    cfg.optim.max_epochs = 2;
    let (model, _) = train(&dataset, &cfg).expect("train");
    (model, dataset)
}
