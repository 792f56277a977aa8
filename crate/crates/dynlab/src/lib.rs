//! Desk-scale numerical laboratory for one-dimensional dynamics.
//!
//! The crate implements, for concrete real multimodal polynomials and
//! complex polynomials: pull-back component enumeration, nice sets and
//! nice couples, the canonical induced Markov map with its tail
//! statistics, badness and shrinking exponent estimators, conformal and
//! absolutely continuous invariant measures, Poincare series, correlation
//! decay measurement, and fractal-dimension estimators.

pub mod config;
pub mod dimension;
pub mod experiments;
pub mod fitting;
pub mod geometry;
pub mod inducing;
pub mod maps;
pub mod measures;
pub mod nice;
pub mod pullback;
pub mod report;
