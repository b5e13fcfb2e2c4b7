//! Near-field Airy beam training for partially blocked THz links.
//!
//! The crate models a linear Tx array talking to a linear Rx array across a
//! near-field LoS region that may contain thin blockages. It designs
//! self-bending (Airy) beams that route around an obstacle, builds beam
//! training codebooks from them, and evaluates them through a per-element
//! free-space channel with ray-level occlusion.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod channel;
pub mod codebooks;
pub mod config;
pub mod error;
pub mod experiments;
pub mod feasibility;
pub mod geometry;
pub mod training;

pub use airy::{AiryParams, Codeword, CodewordMeta, Sigma};
pub use channel::{ChannelMatrix, LinkBudget};
pub use codebooks::{Codebook, CodebookKind};
pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use geometry::{ArrayGeometry, Blockage, HeightConvention, Point, Scene};
pub use training::{Strategy, Trainer, TrainingConfig, TrainingReport};
