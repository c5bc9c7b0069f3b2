//! Exact symbolic calculus for graded contact geometry.
//!
//! The crate provides, over exact rational coefficients:
//!
//! - graded-commutative polynomial arithmetic with Koszul sign normal
//!   ordering ([`poly`]);
//! - graded vector fields, the graded commutator, and the Cartan
//!   operators `d`, `i_X`, `L_X` on bigraded forms ([`cartan`]);
//! - contact charts with flat map, Reeb field, contact Hamiltonian
//!   vector fields, Jacobi/Cartan brackets, and master-equation
//!   checking ([`contact`]);
//! - symplectization, which doubles as an independent oracle for the
//!   Jacobi bracket ([`symplectization`]);
//! - the degree-1 (Jacobi) and degree-2 (Courant-Jacobi) model
//!   constructions with their own oracles ([`models`]);
//! - symbolic sigma-model action integrands ([`action`]) and their
//!   exact evaluation on discrete field configurations ([`lattice`]).
//!
//! The crate is `no_std` (with `alloc`); IO, parsing, and the CLI live
//! in the companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod action;
pub mod cartan;
pub mod chart;
pub mod contact;
pub mod corpus;
pub mod error;
pub mod lattice;
pub mod models;
pub mod poly;
pub mod solver;
pub mod symplectization;

pub use cartan::{commutator, contract, d, is_homological, lie, BigradedForm, Derivation};
pub use chart::{Chart, ChartRef, GenKind, Generator};
pub use contact::{ContactChart, ContactVerdict};
pub use error::{CalcError, Result};
pub use poly::{normalize, rat, ratio, Degree, GradedPoly, Rat};
pub use symplectization::Symplectization;
