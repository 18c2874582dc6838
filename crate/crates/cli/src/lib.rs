//! Batch front end for the saliency engine: dataset scanning, map files,
//! metric evaluation and the stimulus experiments.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod formats;
pub mod imageio;
pub mod pool;
pub mod runlog;
