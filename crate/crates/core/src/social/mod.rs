//! Analyses on an inferred signed network: homophily and triad importance.

pub mod binomial;
pub mod homophily;
pub mod triads;

pub use binomial::binomial_upper_tail;
pub use homophily::{homophily, HomophilyReport};
pub use triads::{triad_importance, TriadFilter, TriadOptions, TriadReport, TriadType};
