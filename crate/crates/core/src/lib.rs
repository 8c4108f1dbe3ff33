//! Quantum-like (QL) states generated by classical graph topologies.
//!
//! A QL bit is a pair of weakly coupled `d`-regular random subgraphs whose two
//! hybridized emergent eigenvectors behave like a two-level system. Cartesian
//! products (or their contracted form) of QL bits yield emergent eigenvectors
//! that live in a `2^q`-dimensional tensor product basis. This crate builds
//! those graphs, diagonalizes them, projects eigenvectors to effective states
//! and analyses the result: purity, concurrence, expansion, synchronization.
//!
//! Module map:
//!
//! * [`graph`]: complex-biased graphs, random generators, disorder, JSON I/O
//! * [`spectral`]: dense Hermitian eigendecomposition and spectral diagnostics
//! * [`qlbit`]: QL bit assembly, bias topologies and two-state projection
//! * [`product`]: Cartesian and contracted products, product-basis projection
//! * [`state`]: density matrices, concurrence, Bell states, symmetrizers
//! * [`expander`]: exact isoperimetric constants and Cheeger bounds
//! * [`kuramoto`]: phase-oscillator dynamics on QL graphs
//! * [`witness`]: witness QL bits attached to product graphs

pub mod error;
pub mod expander;
pub mod fmt;
pub mod graph;
pub mod kuramoto;
pub mod product;
pub mod qlbit;
pub mod rng;
pub mod spectral;
pub mod state;
pub mod witness;

pub use error::{Error, Result};
pub use graph::{BiasedGraph, Edge, GraphBuilder, GraphGenSpec, Labels};
pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
pub use product::{DetuningRule, EffectiveProductState, ProductBasis, ProductMode, ProductSpec};
pub use qlbit::{Bias, ConnectPolicy, EffectiveTwoState, QlBitSpec, TableOneRow};
pub use spectral::{EmergentPolicy, EnsembleSpectrum, Spectrum};
pub use state::DensityMatrix;
