//! Best-k-arm pure exploration: identify the k arms with the largest means
//! from noisy samples. Provides the bilateral elimination algorithm with its
//! PAC partition / mean estimation / threshold elimination subroutines, the
//! instance-hardness analytics its guarantees are phrased in, and a seeded
//! Monte Carlo harness for verifying correctness rates and sample counts.

pub mod algorithm;
pub mod arm;
pub mod complexity;
pub mod error;
pub mod harness;
pub mod instance;
pub mod output;
pub mod params;
pub mod rng;
pub mod subroutines;

pub use error::{Error, Result};
