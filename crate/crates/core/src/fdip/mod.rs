//! Offline 4x4 frequency-domain intra predictor trainer: spatial-mode
//! derivation, SATD classification, least-squares refinement, budgeted
//! sparsification, and gain metrics, plus predictor-file serialization.

pub mod derive;
pub mod gains;
pub mod io;
pub mod modes;
pub mod train;

pub use derive::{block_dct_operator, context_dct_operator, derive_f, derive_f_dct};
pub use gains::{coding_gain_db, prediction_gain_db, GainReport};
pub use io::{read_predictors, write_predictors};
pub use modes::{vp8_modes, BLK_DIM, CTX_DIM, MODE_NAMES, NUM_MODES};
pub use train::{
    classify, corpus_gains, mode_stats, sparsify_round, train_mode, train_predictors,
    ModeStats, Sample, SparsePredictor, SparsifyStrategy, TrainedPredictors, TrainingCorpus,
    TrainOptions, TrainOutcome,
};
