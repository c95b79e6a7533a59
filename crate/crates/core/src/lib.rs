//! Core library for sentence-pair semantic relatedness regression.
//!
//! Provides the pieces needed to train and evaluate two model families over
//! scored sentence pairs: a Siamese bi-encoder trained to match cosine
//! similarity against gold relatedness scores, and a cross-encoder that reads
//! the joint pair through a scalar regression head. Around them sit the
//! dataset model, a pluggable translation layer with caching and training-set
//! augmentation, AdamW optimization with gradient accumulation, checkpoint
//! snapshots with best-on-dev selection, and a tie-aware Spearman metric.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the CLI
//! live in the companion `semrel-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod biencoder;
pub mod checkpoint;
pub mod corpus;
pub mod crossenc;
pub mod encoder;
pub mod mat;
pub mod metrics;
pub mod optim;
pub mod rng;
pub mod translate;
