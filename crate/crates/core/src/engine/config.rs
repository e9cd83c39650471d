use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AgentParams;
use crate::planner::{AgentKind, BehaviorProfile};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid config field `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// A scalar parameter drawn per agent: a bare number or `{ uniform_int = [lo, hi] }`
/// / `{ uniform = [lo, hi] }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dist {
    Fixed(f64),
    Ranged(Range),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Range {
    /// Integers in `[lo, hi]`, inclusive.
    UniformInt([i64; 2]),
    /// Reals in `[lo, hi)`.
    Uniform([f64; 2]),
}

impl Dist {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Fixed(v) => v,
            Dist::Ranged(Range::UniformInt([lo, hi])) => rng.random_range(lo..=hi) as f64,
            Dist::Ranged(Range::Uniform([lo, hi])) if lo == hi => lo,
            Dist::Ranged(Range::Uniform([lo, hi])) => rng.random_range(lo..hi),
        }
    }

    /// Smallest and largest values the distribution can produce.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Dist::Fixed(v) => (v, v),
            Dist::Ranged(Range::UniformInt([lo, hi])) => (lo as f64, hi as f64),
            Dist::Ranged(Range::Uniform([lo, hi])) => (lo, hi),
        }
    }

    fn validate(&self, field: &str, min: f64) -> Result<(), ConfigError> {
        let (lo, hi) = self.bounds();
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(ConfigError::new(field, format!("empty or non-finite range [{lo}, {hi}]")));
        }
        if lo < min {
            return Err(ConfigError::new(field, format!("values must be >= {min}, got {lo}")));
        }
        Ok(())
    }
}

/// Distribution of behavior profiles for one agent kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDist {
    pub w: Dist,
    #[serde(default = "zero")]
    pub alpha: Dist,
    pub max_speed: f64,
}

fn zero() -> Dist {
    Dist::Fixed(0.0)
}

impl ProfileDist {
    pub fn walkers() -> Self {
        ProfileDist {
            w: Dist::Ranged(Range::UniformInt([1, 3])),
            alpha: Dist::Fixed(0.0),
            max_speed: 1.0,
        }
    }

    pub fn drivers() -> Self {
        ProfileDist {
            w: Dist::Ranged(Range::UniformInt([1, 5])),
            alpha: Dist::Fixed(1.0),
            max_speed: 2.0,
        }
    }

    pub fn fixed(w: f64, alpha: f64, max_speed: f64) -> Self {
        ProfileDist {
            w: Dist::Fixed(w),
            alpha: Dist::Fixed(alpha),
            max_speed,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, kind: AgentKind, rng: &mut R) -> BehaviorProfile {
        BehaviorProfile {
            kind,
            w: self.w.sample(rng),
            alpha: self.alpha.sample(rng),
            max_speed: self.max_speed,
        }
    }

    fn validate(&self, prefix: &str) -> Result<(), ConfigError> {
        self.w.validate(&format!("{prefix}.w"), 1.0)?;
        self.alpha.validate(&format!("{prefix}.alpha"), 0.0)?;
        if !(self.max_speed > 0.0) || !self.max_speed.is_finite() {
            return Err(ConfigError::new(
                format!("{prefix}.max_speed"),
                format!("must be > 0, got {}", self.max_speed),
            ));
        }
        Ok(())
    }
}

/// How new agents enter the world.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpawnMode {
    /// Top up to the population targets every step.
    Replenish,
    /// Poisson arrivals per step and kind, capped by the population targets.
    Poisson { walker_rate: f64, driver_rate: f64 },
}

/// Parameters of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub steps: usize,
    /// Walker population target.
    pub walkers: usize,
    /// Driver population target.
    pub drivers: usize,
    /// Fraction of candidate sidewalk cells turned into obstacles, in `[0, 1]`.
    pub obstruction: f64,
    /// Restricts obstacle sampling to the sidewalks of these block indices
    /// (row-major); all sidewalks when absent. Needs a generated layout.
    pub obstruction_blocks: Option<Vec<usize>>,
    pub spawn: SpawnMode,
    pub walker_profile: ProfileDist,
    pub driver_profile: ProfileDist,
    /// Steps a collided agent stays in place before removal.
    pub collision_countdown: u32,
    /// Per-step probability that a parked driver receives a new goal.
    pub reactivation_probability: f64,
    pub agents: AgentParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            steps: 1000,
            walkers: 100,
            drivers: 60,
            obstruction: 0.0,
            obstruction_blocks: None,
            spawn: SpawnMode::Replenish,
            walker_profile: ProfileDist::walkers(),
            driver_profile: ProfileDist::drivers(),
            collision_countdown: 10,
            reactivation_probability: 0.0,
            agents: AgentParams::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.steps == 0 {
            return Err(ConfigError::new("steps", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.obstruction) {
            return Err(ConfigError::new(
                "obstruction",
                format!("must be a fraction in [0, 1], got {}", self.obstruction),
            ));
        }
        if let SpawnMode::Poisson {
            walker_rate,
            driver_rate,
        } = self.spawn
        {
            for (f, r) in [("spawn.walker_rate", walker_rate), ("spawn.driver_rate", driver_rate)] {
                if !(r >= 0.0) || !r.is_finite() {
                    return Err(ConfigError::new(f, format!("must be >= 0, got {r}")));
                }
            }
        }
        self.walker_profile.validate("walker_profile")?;
        self.driver_profile.validate("driver_profile")?;
        if self.collision_countdown == 0 {
            return Err(ConfigError::new("collision_countdown", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.reactivation_probability) {
            return Err(ConfigError::new(
                "reactivation_probability",
                format!("must be in [0, 1], got {}", self.reactivation_probability),
            ));
        }
        self.agents
            .validate()
            .map_err(|reason| ConfigError::new("agents", reason))
    }

    pub fn target(&self, kind: AgentKind) -> usize {
        match kind {
            AgentKind::Walker => self.walkers,
            AgentKind::Driver => self.drivers,
        }
    }

    pub fn profile_dist(&self, kind: AgentKind) -> &ProfileDist {
        match kind {
            AgentKind::Walker => &self.walker_profile,
            AgentKind::Driver => &self.driver_profile,
        }
    }
}
