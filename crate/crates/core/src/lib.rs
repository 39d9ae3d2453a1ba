//! Divergence of 2-dimensional right-angled Coxeter groups.
//!
//! A right-angled Coxeter group is presented by a finite simplicial graph:
//! vertices are involutive generators, edges are commuting pairs.  This crate
//! decides the divergence class of such a group from its defining graph,
//! measures divergence empirically by searching the Cayley graph, generates
//! the graph family `gamma_d` with polynomial divergence of degree `d`, and
//! verifies the covering-theoretic constructions that witness (for d = 2) and
//! obstruct (for d > 2) a common finite cover with the corresponding
//! one-relator-style square complexes.

pub mod classify;
pub mod covering;
pub mod csv;
pub mod explorer;
pub mod graph;
pub mod words;

pub use graph::{gamma_d, parse_graph, DefiningGraph, FourCycle, FourCycleGraph, ValidationReport};
pub use words::{is_geodesic, multiply, reduce, NormalForm, RaySpec, Wall, Word};
