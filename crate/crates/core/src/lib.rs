//! Signed relation inference from repeated, unsigned interactions.
//!
//! The pipeline has four stages:
//!
//! 1. [`interaction`] ingests interaction events into a directed multigraph
//!    of counts `A[v][w]`.
//! 2. [`ensemble`] builds the hypergeometric null model. Each dyad's urn
//!    capacity is `k_out(v) * k_in(w)` and each dyad gets the probabilities of
//!    observing fewer, exactly as many, or more interactions than it did.
//! 3. [`phi`] combines the two tails into a weighted sign
//!    `phi = a * P(X < A) + b * P(X > A)`.
//! 4. [`models`] and [`regression`] calibrate `(a, b)` against surveyed
//!    relations. [`evaluation`] scores the result against two baselines,
//!    and [`social`] runs homophily and triad analyses on the signed network.
//!
//! [`synth`] generates communities with planted relations so that every stage
//! can be checked against a known ground truth.
//!
//! ```
//! use phinet::interaction::{ingest_interactions, IngestOptions, InteractionRecord};
//! use phinet::ensemble::{all_marginals, PossibilityMatrix};
//! use phinet::phi::{build_signed_network, PhiCoefficients};
//!
//! let records = vec![
//!     InteractionRecord::new("ann", "bob"),
//!     InteractionRecord::new("ann", "bob"),
//!     InteractionRecord::new("ann", "bob"),
//!     InteractionRecord::new("bob", "cat"),
//!     InteractionRecord::new("cat", "dan"),
//!     InteractionRecord::new("ann", "dan"),
//! ];
//! let graph = ingest_interactions(records, &IngestOptions::undirected()).unwrap();
//! let xi = PossibilityMatrix::new(&graph, false).unwrap();
//! let marginals = all_marginals(&xi, &graph).unwrap();
//! assert_eq!(marginals.len(), 4 * 3);
//!
//! let signed = build_signed_network(&graph, &xi, PhiCoefficients::default()).unwrap();
//! let ann_bob = signed.weight("ann", "bob").unwrap();
//! let bob_dan = signed.weight("bob", "dan").unwrap();
//! assert!(ann_bob > 0.0 && bob_dan < 0.0);
//! ```

pub mod digest;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod hypergeom;
pub mod interaction;
pub mod models;
pub mod phi;
pub mod regression;
pub mod social;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
