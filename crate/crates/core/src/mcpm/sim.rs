use nalgebra::Vector3;
use rayon::prelude::*;

use super::sampling::{agent_rng, uniform_direction, Cone, Selector, INIT_STREAM};
use super::{BoundaryPolicy, McpmParams, SimError};
use crate::field::{GridTransform, ScalarField3D, Stencil};
use crate::geometry::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agent {
    /// Grid-space position.
    pub position: Vector3<f64>,
    /// Unit heading.
    pub heading: Vector3<f64>,
}

/// Persistent attractors in grid space.
#[derive(Debug, Clone, PartialEq)]
pub struct FoodSources {
    pub positions: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
}

impl FoodSources {
    pub fn new(positions: Vec<Vector3<f64>>, weights: Vec<f64>) -> Result<Self, SimError> {
        if positions.len() != weights.len() {
            return Err(SimError::InvalidFood(format!(
                "{} positions but {} weights",
                positions.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(SimError::InvalidFood(format!(
                "weight {w} is not a non-negative number"
            )));
        }
        Ok(FoodSources { positions, weights })
    }

    /// Unit-weight sources.
    pub fn from_positions(positions: Vec<Vector3<f64>>) -> Self {
        let weights = vec![1.0; positions.len()];
        FoodSources { positions, weights }
    }

    /// Maps a model-space cloud into grid space.
    pub fn from_cloud(cloud: &PointCloud, transform: &GridTransform) -> Self {
        FoodSources {
            positions: cloud.points.iter().map(|p| transform.to_grid(p)).collect(),
            weights: cloud.weights.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    fn bounds(&self) -> Option<(Vector3<f64>, Vector3<f64>)> {
        let first = *self.positions.first()?;
        Some(
            self.positions
                .iter()
                .fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))),
        )
    }
}

/// Everything a run carries between steps.
#[derive(Debug, Clone)]
pub struct SimState {
    /// Smoothed attractant the agents sense.
    pub deposit: ScalarField3D,
    /// Undiffused record of agent trajectories; this is the field that gets meshed.
    pub trace: ScalarField3D,
    pub agents: Vec<Agent>,
    /// Completed iterations.
    pub step: usize,
    pub params: McpmParams,
    pub food: FoodSources,
    /// Food bounding box, where escaped agents re-enter.
    respawn_lo: Vector3<f64>,
    respawn_hi: Vector3<f64>,
    scratch: Vec<f32>,
}

impl PartialEq for SimState {
    fn eq(&self, other: &Self) -> bool {
        self.deposit == other.deposit
            && self.trace == other.trace
            && self.agents == other.agents
            && self.step == other.step
            && self.params == other.params
            && self.food == other.food
    }
}

fn grid_max(dims: [usize; 3]) -> Vector3<f64> {
    Vector3::new(dims[0] as f64 - 1.0, dims[1] as f64 - 1.0, dims[2] as f64 - 1.0)
}

fn inside(p: &Vector3<f64>, max: &Vector3<f64>) -> bool {
    (0..3).all(|a| p[a] >= 0.0 && p[a] <= max[a])
}

impl SimState {
    /// Validates inputs and scatters agents uniformly through the food
    /// bounding box, grown by twice the sensing distance and clipped to the grid.
    pub fn new(params: McpmParams, food: FoodSources, dims: [usize; 3]) -> Result<Self, SimError> {
        params.validate()?;
        if dims.contains(&0) {
            return Err(SimError::InvalidDims(dims));
        }
        let food = FoodSources::new(food.positions, food.weights)?;
        let max = grid_max(dims);
        if let Some(p) = food.positions.iter().find(|p| !inside(p, &max)) {
            return Err(SimError::InvalidFood(format!("food at {p:?} lies outside the grid")));
        }
        let (lo, hi) = food.bounds().ok_or(SimError::EmptyFood)?;
        let pad = Vector3::repeat(2.0 * params.sense_distance);
        let spawn_lo = (lo - pad).sup(&Vector3::zeros());
        let spawn_hi = (hi + pad).inf(&max);

        let seed = params.seed;
        let agents = (0..params.num_agents as u64)
            .into_par_iter()
            .map(|id| {
                let mut rng = agent_rng(seed, id, INIT_STREAM);
                spawn(&spawn_lo, &spawn_hi, &mut rng)
            })
            .collect();

        Ok(SimState {
            deposit: ScalarField3D::zeros(dims),
            trace: ScalarField3D::zeros(dims),
            agents,
            step: 0,
            params,
            food,
            respawn_lo: lo,
            respawn_hi: hi,
            scratch: Vec::new(),
        })
    }

    /// Attaches a grid transform to both fields.
    pub fn with_transform(mut self, t: GridTransform) -> Self {
        self.deposit = self.deposit.with_transform(t);
        self.trace = self.trace.with_transform(t);
        self
    }

    pub fn dims(&self) -> [usize; 3] {
        self.deposit.dims()
    }

    /// Injects `food_deposit · weight` at every food source.
    pub fn seed_food(&mut self) {
        let amount = self.params.food_deposit;
        for (p, w) in self.food.positions.iter().zip(&self.food.weights) {
            if *w > 0.0 {
                self.deposit.splat_trilinear(*p, amount * w);
            }
        }
    }

    /// Moves every agent once, then deposits at the new positions.
    pub fn propagation_step(&mut self) {
        self.move_agents();
        self.deposit_agents();
    }

    /// Sense, select and move for every agent, in parallel.
    ///
    /// All agents read the deposit field as it stands on entry and nothing
    /// is written to it here, so the outcome is independent of thread count
    /// and scheduling.
    pub fn move_agents(&mut self) {
        let p = &self.params;
        let cone = Cone::new(p.sense_spread);
        let selector = Selector::new(p.sharpness);
        let step = self.step as u64;
        let max = grid_max(self.dims());
        let deposit = &self.deposit;
        let (lo, hi) = (&self.respawn_lo, &self.respawn_hi);

        self.agents.par_iter_mut().enumerate().with_min_len(1024).for_each_init(
            || {
                (
                    Vec::with_capacity(p.num_samples),
                    Vec::with_capacity(p.num_samples),
                    Vec::new(),
                )
            },
            |(dirs, probes, weights), (id, agent)| {
                let mut rng = agent_rng(p.seed, id as u64, step);
                let frame = cone.frame(&agent.heading);
                dirs.clear();
                probes.clear();
                for _ in 0..p.num_samples {
                    dirs.push(frame.sample(&mut rng));
                }
                // all probe positions first, so the field loads can overlap
                let dims = deposit.dims();
                probes.extend(dirs.iter().map(|d| {
                    Stencil::new(dims, agent.position + d * p.sense_distance).map_or(0.0, |st| st.sample(deposit))
                }));
                agent.heading = dirs[selector.select(probes, weights, &mut rng)];
                agent.position += agent.heading * p.move_distance;
                if !inside(&agent.position, &max) {
                    match p.boundary_policy {
                        BoundaryPolicy::Respawn => *agent = spawn(lo, hi, &mut rng),
                        BoundaryPolicy::Reflect => reflect(agent, &max),
                    }
                }
            },
        );
    }

    /// Splats `agent_deposit` into the deposit and 1 into the trace at every
    /// agent, sequentially in agent order.
    pub fn deposit_agents(&mut self) {
        let amount = self.params.agent_deposit;
        let dims = self.dims();
        for a in &self.agents {
            let Some(st) = Stencil::new(dims, a.position) else {
                continue;
            };
            if amount > 0.0 {
                st.splat(&mut self.deposit, amount);
            }
            st.splat(&mut self.trace, 1.0);
        }
    }

    /// Diffuses and decays the deposit field; only decays the trace.
    pub fn relaxation_step(&mut self) {
        let rho = self.params.deposit_decay as f32;
        self.deposit.diffuse_scaled(rho, &mut self.scratch);
        self.trace.decay(self.params.trace_decay as f32);
    }

    /// One full iteration: food, propagation, relaxation.
    ///
    /// Agents sense the deposit exactly as the previous relaxation left it;
    /// this step's food and agent deposits are applied after they move.
    pub fn advance(&mut self) {
        self.move_agents();
        self.seed_food();
        self.deposit_agents();
        self.relaxation_step();
        self.step += 1;
    }
}

fn spawn<R: rand::Rng + ?Sized>(lo: &Vector3<f64>, hi: &Vector3<f64>, rng: &mut R) -> Agent {
    use rand::RngExt;
    let u = Vector3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
    Agent {
        position: lo + (hi - lo).component_mul(&u),
        heading: uniform_direction(rng),
    }
}

fn reflect(agent: &mut Agent, max: &Vector3<f64>) {
    for a in 0..3 {
        let p = &mut agent.position[a];
        if *p < 0.0 {
            *p = -*p;
            agent.heading[a] = -agent.heading[a];
        } else if *p > max[a] {
            *p = 2.0 * max[a] - *p;
            agent.heading[a] = -agent.heading[a];
        }
        // a move longer than the grid can overshoot the mirror too
        *p = p.clamp(0.0, max[a]);
    }
}

/// Initializes a state and advances it `num_steps` times.
pub fn run(params: McpmParams, food: FoodSources, dims: [usize; 3]) -> Result<SimState, SimError> {
    run_with(params, food, dims, |_| {})
}

/// Like [`run`], calling `observe` after every completed step.
pub fn run_with(
    params: McpmParams,
    food: FoodSources,
    dims: [usize; 3],
    mut observe: impl FnMut(&SimState),
) -> Result<SimState, SimError> {
    let mut state = SimState::new(params, food, dims)?;
    for _ in 0..state.params.num_steps {
        state.advance();
        observe(&state);
    }
    Ok(state)
}
