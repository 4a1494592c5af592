//! Random direction proposals and the stochastic choice between them.

use nalgebra::Vector3;
use rand::{Rng, RngExt, SeedableRng};
use rand_pcg::Pcg64Mcg;

/// Probability floor added to every probe before weighting.
pub const PROBE_EPSILON: f64 = 1e-6;

/// Stream id used for initial placement, distinct from every step index.
pub(crate) const INIT_STREAM: u64 = u64::MAX;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Private generator for one agent during one step. The stream depends only
/// on `(seed, agent, step)`, never on scheduling.
#[inline]
pub fn agent_rng(seed: u64, agent: u64, step: u64) -> Pcg64Mcg {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let s = mix64(seed ^ GOLDEN);
    let hi = mix64(s ^ mix64(agent.wrapping_add(GOLDEN)));
    let lo = mix64(hi ^ mix64(step.wrapping_mul(GOLDEN) ^ s.rotate_left(29)));
    Pcg64Mcg::from_seed(((hi as u128) << 64 | lo as u128).to_le_bytes())
}

/// Orthonormal tangents `(t, b)` with `t × b = n`, branch-stable near every
/// axis (Duff et al. construction).
#[inline]
fn tangent_frame(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let sign = 1.0f64.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    (
        Vector3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x),
        Vector3::new(b, sign + n.y * n.y * a, -n.y),
    )
}

/// Uniform sampler over a spherical cap of fixed half-angle.
#[derive(Debug, Clone, Copy)]
pub struct Cone {
    cos_spread: f64,
}

impl Cone {
    /// `spread` is the half-angle in degrees, in `(0, 180]`.
    pub fn new(spread: f64) -> Self {
        Cone {
            cos_spread: spread.to_radians().cos(),
        }
    }

    /// Direction with `cos θ` uniform in `[cos spread, 1]` and azimuth uniform
    /// in `[0, 2π)`, expressed in the frame of `heading`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, heading: &Vector3<f64>, rng: &mut R) -> Vector3<f64> {
        self.frame(heading).sample(rng)
    }

    /// Precomputes the tangent frame of `heading` for repeated draws.
    #[inline]
    pub fn frame(&self, heading: &Vector3<f64>) -> ConeFrame {
        let (t, b) = tangent_frame(heading);
        ConeFrame {
            cos_spread: self.cos_spread,
            axis: *heading,
            t,
            b,
        }
    }
}

/// A [`Cone`] oriented around one fixed heading.
#[derive(Debug, Clone, Copy)]
pub struct ConeFrame {
    cos_spread: f64,
    axis: Vector3<f64>,
    t: Vector3<f64>,
    b: Vector3<f64>,
}

impl ConeFrame {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector3<f64> {
        let u: f64 = rng.random();
        let cos_t = 1.0 - u * (1.0 - self.cos_spread);
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let (cos_p, sin_p) = unit_circle(rng);
        self.t * (sin_t * cos_p) + self.b * (sin_t * sin_p) + self.axis * cos_t
    }
}

/// Uniform point on the unit circle by rejection from the square, avoiding
/// trigonometric calls; the angle of `(a, b)` is uniform, hence so is twice it.
#[inline]
fn unit_circle<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    // both coordinates from one draw; 32 bits each is ample for an angle
    const SCALE: f64 = 2.0 / 4_294_967_296.0;
    loop {
        let bits = rng.next_u64();
        let a = (bits >> 32) as f64 * SCALE - 1.0;
        let b = (bits & 0xffff_ffff) as f64 * SCALE - 1.0;
        let r2 = a * a + b * b;
        if r2 > 1e-12 && r2 <= 1.0 {
            return ((a * a - b * b) / r2, 2.0 * a * b / r2);
        }
    }
}

/// One draw from the cap of half-angle `spread` degrees around `heading`.
pub fn sample_cone<R: Rng + ?Sized>(heading: &Vector3<f64>, spread: f64, rng: &mut R) -> Vector3<f64> {
    Cone::new(spread).sample(heading, rng)
}

/// Uniform direction on the unit sphere.
#[inline]
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    Cone { cos_spread: -1.0 }.sample(&Vector3::z(), rng)
}

/// Picks index `i` with probability proportional to `(probes[i] + ε)^sharpness`.
///
/// Weights are formed relative to the largest probe so large sharpness
/// values cannot overflow. `weights` is scratch space.
pub fn select_direction<R: Rng + ?Sized>(probes: &[f64], sharpness: f64, weights: &mut Vec<f64>, rng: &mut R) -> usize {
    Selector::new(sharpness).select(probes, weights, rng)
}

/// [`select_direction`] with the exponent analysed once up front.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Selector {
    power: Power,
}

#[derive(Debug, Clone, Copy)]
enum Power {
    Uniform,
    One,
    Two,
    Int(i32),
    Real(f64),
}

impl Selector {
    pub(crate) fn new(sharpness: f64) -> Self {
        let power = match sharpness {
            0.0 => Power::Uniform,
            1.0 => Power::One,
            2.0 => Power::Two,
            s if s.fract() == 0.0 && s <= i32::MAX as f64 => Power::Int(s as i32),
            s => Power::Real(s),
        };
        Selector { power }
    }

    #[inline]
    pub(crate) fn select<R: Rng + ?Sized>(&self, probes: &[f64], weights: &mut Vec<f64>, rng: &mut R) -> usize {
        let k = probes.len();
        debug_assert!(k >= 1);
        let u: f64 = rng.random();
        if k == 1 || matches!(self.power, Power::Uniform) {
            return ((u * k as f64) as usize).min(k - 1);
        }
        let inv_top = 1.0 / (probes.iter().fold(0.0f64, |m, &p| m.max(p)) + PROBE_EPSILON);
        weights.clear();
        let mut total = 0.0;
        for &p in probes {
            let r = (p + PROBE_EPSILON) * inv_top;
            total += match self.power {
                Power::Uniform | Power::One => r,
                Power::Two => r * r,
                Power::Int(n) => r.powi(n),
                Power::Real(s) => r.powf(s),
            };
            weights.push(total);
        }
        let target = u * total;
        weights.iter().position(|&c| target < c).unwrap_or(k - 1)
    }
}
