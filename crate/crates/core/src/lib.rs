//! Decision-network optimization by cavity expansion, with exact oracles,
//! a maximum-weight independent set engine, random instance models and a
//! Monte-Carlo experiment harness.

pub mod cavity;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod ext;
pub mod graph;
pub mod models;
pub mod mwis;
pub mod network;
pub mod rng;
pub mod view;

pub use cavity::{BoundaryCondition, CavityVector, CeResult, Depth};
pub use error::{Error, Result};
pub use exact::ExactSolution;
pub use ext::ExtReal;
pub use graph::{Graph, WeightedGraph};
pub use network::{Assignment, DecisionNetwork};
pub use view::SubnetworkView;
