//! Monte Carlo Physarum Machine.
//!
//! A population of agents forages over a deposit field. Every step each
//! agent proposes a handful of directions inside a cone around its heading,
//! probes the deposit a fixed distance ahead along each, picks one at random
//! with probability rising with the probed value, moves, and leaves a mark.
//! Between moves the deposit field diffuses and decays, and food sources keep
//! re-injecting attractant. A second, undiffused trace field accumulates
//! where agents went; its dense filaments form the transport network.
//!
//! Each agent draws from a private random stream keyed by
//! `(seed, agent, step)`, and deposits are applied in agent order after all
//! moves, so results are bit-identical across thread counts.

mod connectivity;
mod params;
mod sampling;
mod sim;

use thiserror::Error;

pub use connectivity::connectivity;
pub use params::{BoundaryPolicy, McpmParams};
pub use sampling::{agent_rng, sample_cone, select_direction, uniform_direction, Cone, ConeFrame, PROBE_EPSILON};
pub use sim::{run, run_with, Agent, FoodSources, SimState};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error("no food sources")]
    EmptyFood,
    #[error("invalid food sources: {0}")]
    InvalidFood(String),
    #[error("grid dimensions {0:?} must all be positive")]
    InvalidDims([usize; 3]),
}
