// SPDX-License-Identifier: Apache-2.0

//! Densest-subgraph discovery on layer-weighted multiplex graphs under the
//! p-mean degree density family.
//!
//! * [`graph`]: the multiplex data model and its text formats.
//! * [`density`]: per-layer p-mean density, the multiplex objective `rho`,
//!   and the node-removal delta.
//! * [`firmcore`]: generalized FirmCore decomposition for a fixed threshold.
//! * [`approx`]: the candidate-threshold approximation driver and its
//!   guarantee calculators.
//! * [`oracle`]: exhaustive ground truth for small instances.
//! * [`synth`]: planted-instance generators.

// `!(x > 0.0)` deliberately treats NaN as invalid
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod density;
pub mod error;
pub mod firmcore;
pub mod graph;
pub mod oracle;
pub mod params;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{GraphBuilder, LayerId, MultiplexGraph, NodeId, NodeSet};
pub use params::{PValue, Params};
