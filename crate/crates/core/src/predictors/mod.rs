//! Branch prediction structures: bimodal, private-history two-level and
//! hybrid direction predictors, BTBs, return address stack and loop buffer.

mod btb;
mod direction;
mod eval;
mod loop_buffer;
mod ras;
mod suite;

pub use btb::{Btb, BtbConfig, BtbReplacement};
pub use direction::{
    saturate, BimodalBht, DirectionPredict, DirectionPredictor, HybridBht, HybridGeometry, TwoLevelBht, COUNTER_INIT,
};
pub use eval::{
    evaluate, format_branch_trace, mispredict_rate, parse_branch_trace, BranchEvent, EvalStats, PredictorError,
};
pub use loop_buffer::LoopBuffer;
pub use ras::Ras;
pub use suite::{
    BranchResolution, DirectionKind, PredSource, Prediction, PredictorConfig, PredictorStats, PredictorSuite,
};
