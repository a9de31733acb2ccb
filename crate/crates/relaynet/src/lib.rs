//! Capacity analysis and simulation of large fading interference relay networks.
//!
//! The crate covers coherent matched-filter relaying (protocols P1 and P2, with and
//! without relay cooperation), the associated SINR concentration, outage and ergodic
//! capacity bounds, a large-deviations toolkit, and the random-matrix spectrum engine
//! for noncoherent amplify-and-forward networks.
//!
//! ```
//! use relaynet::model::NetworkConfig;
//! use relaynet::coherent::{sinr, Protocol};
//! use relaynet::model::sample_channels;
//!
//! let cfg = NetworkConfig::uniform(2, 8, 0.01, 1.0, 7).unwrap();
//! let ch = sample_channels(&cfg, 0);
//! let s = sinr(&cfg, &ch, 0, Protocol::P1).unwrap();
//! assert!(s.value >= 0.0);
//! ```

pub mod acceptance;
pub mod af;
pub mod capacity;
pub mod coherent;
pub mod concentration;
pub mod error;
pub mod ldp;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod poly;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64;
