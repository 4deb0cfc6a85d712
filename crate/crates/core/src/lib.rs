//! Decoherence and two-qubit entanglement dynamics of qubits driven by
//! classical random telegraph noise (RTN).
//!
//! Three independent engines compute the same physics:
//!
//! * closed-form dephasing/relaxation functions and the concurrence formulas
//!   built on them ([`single_qubit`], [`entanglement`]),
//! * the quasi-Hamiltonian route, an exact matrix exponential of the
//!   noise-averaged generator on (fluctuator ⊗ Bloch) space ([`noise`]),
//! * explicit Monte Carlo averaging over sampled switching histories
//!   ([`montecarlo`]).
//!
//! [`phase`] classifies parameter space into revival and single-death
//! regions and [`experiment`] drives configuration files, presets and CSV
//! output for the `rtnsim` binary.

pub mod bloch;
pub mod entanglement;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod linalg;
pub mod montecarlo;
pub mod noise;
pub mod phase;
pub mod single_qubit;

pub use bloch::{BlochVector2Q, DensityMatrix, GeneratorBasis};
pub use entanglement::{
    concurrence_wootters, BellFamily, ConcurrenceCurve, InitialState, LambdaSpectrum, QubitDecay,
    ZetaSource,
};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use noise::{QubitPair, QubitSpec, RtnSource, TransferMatrix};
