//! Protein backbone structure prediction on a tetrahedral lattice, driven by
//! a variational quantum eigensolver (VQE) pipeline.
//!
//! The pipeline takes an amino-acid sequence, encodes each backbone turn into
//! two qubits, builds a diagonal Pauli-Z Hamiltonian whose penalties enforce
//! chain geometry and whose couplings score residue contacts, minimizes the
//! energy with a two-stage variational loop (derivative-free optimization of
//! a hardware-efficient ansatz, then fixed-parameter sampling), decodes the
//! best measured bitstring into a self-avoiding lattice walk, and exports the
//! backbone as a C-alpha trace in PDB format.
//!
//! | module        | role                                                    |
//! |---------------|---------------------------------------------------------|
//! | `lattice`     | diamond-lattice geometry: directions, walks, contacts   |
//! | `pauli`       | sparse diagonal Z-string algebra                        |
//! | `hamiltonian` | sequence to penalty/interaction operator builders       |
//! | `qsim`        | statevector ansatz simulation, sampling, readout noise  |
//! | `vqe`         | optimization loop, measurement stage, run records       |
//! | `decode`      | bitstring to turns/backbone, brute-force oracle         |
//! | `assemble`    | sliding-window prediction and fusion for long chains    |
//! | `evalio`      | Kabsch RMSD, PDB export, report serialization           |
//! | `data`        | shipped interaction matrix and fragment manifest        |
//! | `cli`         | command-line front end configuration and commands       |
//!
//! Chains of length L use 2(L-1) qubits. All energies are in model units; no
//! physical unit is implied.

pub mod assemble;
pub mod cli;
pub mod data;
pub mod decode;
pub mod error;
pub mod evalio;
pub mod hamiltonian;
pub mod lattice;
pub mod pauli;
pub mod qsim;
pub mod vqe;

pub use error::{Error, Result};
