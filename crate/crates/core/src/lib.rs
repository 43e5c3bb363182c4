//! Simulation and checking toolkit for the random greedy process that builds
//! an r-uniform linear hypergraph of high linear girth by repeatedly choosing
//! a uniformly random available r-clique of the host graph.

pub mod availability;
pub mod error;
pub mod harness;
pub mod hypergraph;
pub mod oracle;
pub mod par;
pub mod process;
pub mod rng;
pub mod rset;
pub mod trajectory;

pub use error::{Error, Result};
pub use hypergraph::{Girth, HostGraph, LinearHypergraph};
pub use rset::{RSet, Vertex};
