use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::GpError;
use crate::expr::OperatorKind;

/// Number of threads used for breeding and fitness evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WorkerCount {
    #[default]
    Auto,
    Fixed(usize),
}

impl WorkerCount {
    pub fn resolve(self) -> usize {
        match self {
            WorkerCount::Auto => std::thread::available_parallelism().map_or(1, |n| n.get()),
            WorkerCount::Fixed(n) => n.max(1),
        }
    }
}

impl Serialize for WorkerCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            WorkerCount::Auto => s.serialize_str("auto"),
            WorkerCount::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for WorkerCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(WorkerCount::Fixed(n as usize)),
            Raw::Name(s) if s == "auto" => Ok(WorkerCount::Auto),
            Raw::Name(s) => Err(serde::de::Error::custom(format!(
                "worker_count must be an integer or \"auto\", got {s:?}"
            ))),
        }
    }
}

/// Evolutionary hyperparameters. `Default` is the large published
/// configuration; [`GpConfig::small`] is the desk-scale profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub parsimony_lambda: f64,
    pub crossover_prob: f64,
    pub subtree_mutation_prob: f64,
    pub point_mutation_prob: f64,
    pub hoist_mutation_prob: f64,
    pub reproduction_prob: f64,
    pub init_depth_min: usize,
    pub init_depth_max: usize,
    pub max_depth: usize,
    pub max_nodes: usize,
    /// Ephemeral constants are drawn uniformly from `[low, high)`.
    pub constant_range: [f64; 2],
    pub seed: u64,
    pub elitism_count: usize,
    pub worker_count: WorkerCount,
    /// Attempts at producing an in-bounds child before copying the parent.
    pub max_retries: usize,
    pub function_set: Vec<OperatorKind>,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            population_size: 20_000,
            generations: 300,
            tournament_size: 35,
            parsimony_lambda: 0.002,
            crossover_prob: 0.85,
            subtree_mutation_prob: 0.08,
            point_mutation_prob: 0.04,
            hoist_mutation_prob: 0.02,
            reproduction_prob: 0.01,
            init_depth_min: 2,
            init_depth_max: 6,
            max_depth: 17,
            max_nodes: 300,
            constant_range: [-1.0, 1.0],
            seed: 0,
            elitism_count: 10,
            worker_count: WorkerCount::Auto,
            max_retries: 3,
            function_set: OperatorKind::ALL.to_vec(),
        }
    }
}

impl GpConfig {
    pub fn paper() -> Self {
        Self::default()
    }

    /// Population 500 for 50 generations.
    pub fn small() -> Self {
        GpConfig {
            population_size: 500,
            generations: 50,
            ..Self::default()
        }
    }

    pub fn profile(name: &str) -> Option<Self> {
        match name {
            "small" => Some(Self::small()),
            "paper" => Some(Self::paper()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), GpError> {
        let bad = |m: String| Err(GpError::Config(m));
        if self.population_size == 0 {
            return bad("population_size must be positive".into());
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return bad(format!(
                "tournament_size {} must be in 1..={}",
                self.tournament_size, self.population_size
            ));
        }
        if !(self.parsimony_lambda.is_finite() && self.parsimony_lambda >= 0.0) {
            return bad(format!(
                "parsimony_lambda {} must be finite and nonnegative",
                self.parsimony_lambda
            ));
        }
        let probs = self.probabilities();
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return bad("variation probabilities must be nonnegative".into());
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("variation probabilities sum to {sum}, expected 1"));
        }
        if self.init_depth_min == 0
            || self.init_depth_min > self.init_depth_max
            || self.init_depth_max > self.max_depth
        {
            return bad(format!(
                "depth bounds must satisfy 1 <= init_depth_min ({}) <= init_depth_max ({}) <= max_depth ({})",
                self.init_depth_min, self.init_depth_max, self.max_depth
            ));
        }
        if self.max_nodes == 0 {
            return bad("max_nodes must be positive".into());
        }
        let [lo, hi] = self.constant_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!(
                "constant_range [{lo}, {hi}] must be finite with low < high"
            ));
        }
        if self.elitism_count > self.population_size {
            return bad("elitism_count exceeds population_size".into());
        }
        if self.function_set.is_empty() {
            return bad("function_set is empty".into());
        }
        if self.max_retries == 0 {
            return bad("max_retries must be positive".into());
        }
        if matches!(self.worker_count, WorkerCount::Fixed(0)) {
            return bad("worker_count must be positive".into());
        }
        Ok(())
    }

    /// Crossover, subtree, point, hoist, reproduction.
    pub fn probabilities(&self) -> [f64; 5] {
        [
            self.crossover_prob,
            self.subtree_mutation_prob,
            self.point_mutation_prob,
            self.hoist_mutation_prob,
            self.reproduction_prob,
        ]
    }
}
