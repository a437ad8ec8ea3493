//! Core of the navigation workbench: procedural worlds, simulated LiDAR and
//! camera, the fusion network with hand-written backpropagation, the
//! imitation-learning session and Monte Carlo evaluation.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, networking
//! and the command line live in the `navsim` crate.

#![no_std]
extern crate alloc;

pub mod config;
pub mod eval;
pub mod nn;
pub mod seed;
pub mod sensors;
pub mod trainer;
pub mod world;

pub use config::SimConfig;
