//! Workbench for generating, protecting, and attacking constant-multiplier
//! FIR filter hardware.
//!
//! The crate is organized around a gate-level netlist IR:
//!
//! * [`netlist`] — circuit IR, simulation, constant propagation, BENCH and
//!   structural Verilog interchange.
//! * [`arith`] — combinational arithmetic builders (adders, multipliers,
//!   comparators, MUX trees, digit-based-recoding constant multiplication).
//! * [`filters`] — FIR filter generators (direct, transposed, folded) and
//!   golden software oracles (convolution, zero-phase frequency response).
//! * [`obfuscate`] — decoy-based obfuscation of CAVM/MCM/TMCM multiplier
//!   blocks and the constant-replaced-by-key variant.
//! * [`lock`] — point-function logic locking, random logic locking, and the
//!   hybrid composition with XOR/XNOR key hiding.
//! * [`sat`] — Tseitin encoding, attack miters, DIMACS export, and a small
//!   embedded CDCL solver with incremental assumptions.
//! * [`attacks`] — oracle-guided key-recovery attacks (SAT-based and
//!   query-based) plus key verification.
//! * [`cli`] — command-line front end used by the `firlock` binary.
//!
//! The `examples/` directory contains one runnable walkthrough per major
//! capability; start there.

pub mod arith;
pub mod attacks;
pub mod cli;
pub mod filters;
pub mod lock;
pub mod netlist;
pub mod obfuscate;
pub mod sat;

pub use netlist::{Assignment, GateKind, Netlist, NetlistBuilder};
