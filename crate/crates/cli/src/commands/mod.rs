//! The five subcommands.

pub mod ablation;
pub mod evaluate;
pub mod psychophysics;
pub mod saliency;
pub mod stimgen;
