use std::fmt;
use std::str::FromStr;

use super::SimError;

/// What happens to an agent that steps outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Re-place it uniformly in the food bounding box with a fresh heading.
    #[default]
    Respawn,
    /// Mirror the position back inside and flip the offending heading component.
    Reflect,
}

impl fmt::Display for BoundaryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryPolicy::Respawn => "respawn",
            BoundaryPolicy::Reflect => "reflect",
        })
    }
}

impl FromStr for BoundaryPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "respawn" => Ok(BoundaryPolicy::Respawn),
            "reflect" => Ok(BoundaryPolicy::Reflect),
            _ => Err(format!("expected respawn or reflect, got {s:?}")),
        }
    }
}

/// Full configuration of one simulation run. Distances are in voxels.
#[derive(Debug, Clone, PartialEq)]
pub struct McpmParams {
    pub num_agents: usize,
    pub num_steps: usize,
    pub sense_distance: f64,
    /// Half-angle of the sensing cone, in degrees.
    pub sense_spread: f64,
    pub move_distance: f64,
    /// Candidate directions probed per agent per step.
    pub num_samples: usize,
    pub sharpness: f64,
    pub agent_deposit: f64,
    /// Deposit per step per unit of food weight.
    pub food_deposit: f64,
    pub deposit_decay: f64,
    pub trace_decay: f64,
    pub boundary_policy: BoundaryPolicy,
    pub seed: u64,
}

impl Default for McpmParams {
    fn default() -> Self {
        McpmParams {
            num_agents: 100_000,
            num_steps: 500,
            sense_distance: 4.0,
            sense_spread: 30.0,
            move_distance: 1.0,
            num_samples: 4,
            sharpness: 2.0,
            agent_deposit: 1.0,
            food_deposit: 10.0,
            deposit_decay: 0.9,
            trace_decay: 0.995,
            boundary_policy: BoundaryPolicy::Respawn,
            seed: 0,
        }
    }
}

impl McpmParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |name: &'static str, message: String| Err(SimError::InvalidParameter { name, message });
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.sense_distance) {
            return fail(
                "sense_distance",
                format!("must be positive, got {}", self.sense_distance),
            );
        }
        if !positive(self.move_distance) {
            return fail("move_distance", format!("must be positive, got {}", self.move_distance));
        }
        if !(self.sense_spread > 0.0 && self.sense_spread <= 180.0) {
            return fail(
                "sense_spread",
                format!("must be in (0, 180] degrees, got {}", self.sense_spread),
            );
        }
        if self.num_samples < 1 {
            return fail("num_samples", "must be at least 1".into());
        }
        if !(self.sharpness >= 0.0 && self.sharpness.is_finite()) {
            return fail("sharpness", format!("must be non-negative, got {}", self.sharpness));
        }
        if !(self.agent_deposit >= 0.0 && self.agent_deposit.is_finite()) {
            return fail(
                "agent_deposit",
                format!("must be non-negative, got {}", self.agent_deposit),
            );
        }
        if !(self.food_deposit >= 0.0 && self.food_deposit.is_finite()) {
            return fail(
                "food_deposit",
                format!("must be non-negative, got {}", self.food_deposit),
            );
        }
        if !(self.deposit_decay > 0.0 && self.deposit_decay < 1.0) {
            return fail(
                "deposit_decay",
                format!("must be in (0, 1), got {}", self.deposit_decay),
            );
        }
        if !(self.trace_decay > 0.0 && self.trace_decay < 1.0) {
            return fail("trace_decay", format!("must be in (0, 1), got {}", self.trace_decay));
        }
        Ok(())
    }
}
