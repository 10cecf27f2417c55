pub mod config;
pub mod decomp;
pub mod emit;
pub mod gates;
pub mod ir;
pub mod numerics;
pub mod optimize;
pub mod pipeline;
pub mod qspace;
pub mod sknet;
pub use pipeline::{build_pipeline, Pipeline};
