pub mod config;
pub mod golden;
pub mod harness;
pub mod inorder;
pub mod isa;
pub mod memhier;
pub mod ooo;
pub mod predictors;
pub mod timing;
pub mod workloads;
