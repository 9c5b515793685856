use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::variation::{crossover, hoist_mutation, point_mutation, subtree_mutation, SizeLimits};
use super::{
    compare_individuals, tournament_select_index, GpConfig, GpError, Individual, TreeBuilder,
};
use crate::data::Dataset;
use crate::expr::{serialize, ExpressionTree};
use crate::Scalar;

/// Generator for individual `index` of `generation`. Generation 0 is the
/// initial population.
fn stream_rng(seed: u64, generation: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub best_mse: f64,
    pub best_nodes: usize,
    pub mean_nodes: f64,
    /// Largest node count and depth anywhere in the population.
    pub max_nodes: usize,
    pub max_depth: usize,
    pub best_expr: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolutionLog {
    pub records: Vec<GenerationRecord>,
}

impl EvolutionLog {
    /// CSV with one column per [`GenerationRecord`] field.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "generation",
            "best_fitness",
            "best_mse",
            "best_nodes",
            "mean_nodes",
            "max_nodes",
            "max_depth",
            "best_expr",
        ])
        .expect("in-memory write");
        for r in &self.records {
            w.write_record([
                r.generation.to_string(),
                r.best_fitness.to_string(),
                r.best_mse.to_string(),
                r.best_nodes.to_string(),
                r.mean_nodes.to_string(),
                r.max_nodes.to_string(),
                r.max_depth.to_string(),
                r.best_expr.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

struct Context<'a, T> {
    config: &'a GpConfig,
    data: &'a Dataset<T>,
    builder: TreeBuilder<'a>,
    limits: SizeLimits,
}

impl<'a, T: Scalar> Context<'a, T> {
    fn new(config: &'a GpConfig, data: &'a Dataset<T>) -> Result<Self, GpError> {
        config.validate()?;
        if data.is_empty() {
            return Err(GpError::EmptyDataset);
        }
        Ok(Context {
            config,
            data,
            builder: TreeBuilder::new(
                &config.function_set,
                data.feature_count(),
                config.constant_range,
            ),
            limits: SizeLimits {
                max_depth: config.max_depth,
                max_nodes: config.max_nodes,
                max_retries: config.max_retries,
            },
        })
    }

    fn wrap(&self, root: crate::expr::ExprNode<T>) -> ExpressionTree<T> {
        ExpressionTree::new(root, self.data.feature_names.clone())
            .expect("generated trees are valid")
    }

    fn evaluate(&self, tree: ExpressionTree<T>) -> Individual<T> {
        Individual::evaluate(tree, self.data, self.config.parsimony_lambda).expect("schema checked")
    }

    /// Ramped half-and-half: even indices use `full`, odd use `grow`; the
    /// target depth cycles through `init_depth_min..=init_depth_max`.
    fn initial(&self, index: usize) -> Individual<T> {
        let c = self.config;
        let mut rng = stream_rng(c.seed, 0, index);
        let levels = c.init_depth_max - c.init_depth_min + 1;
        let depth = c.init_depth_min + (index / 2) % levels;
        let full = index.is_multiple_of(2);
        let mut tree = None;
        for _ in 0..c.max_retries.max(8) {
            let root = if full {
                self.builder.full(depth, &mut rng)
            } else {
                self.builder.grow(c.init_depth_min, depth, &mut rng)
            };
            let t = self.wrap(root);
            if self.limits.admits(&t) {
                tree = Some(t);
                break;
            }
        }
        // Oversized full trees fall back to the shallowest admissible shape.
        let tree = tree.unwrap_or_else(|| self.wrap(self.builder.full(c.init_depth_min, &mut rng)));
        self.evaluate(tree)
    }

    fn offspring(
        &self,
        population: &[Individual<T>],
        generation: usize,
        index: usize,
    ) -> Individual<T> {
        let c = self.config;
        let mut rng = stream_rng(c.seed, generation, index);
        let k = c.tournament_size;
        let parent =
            &population[tournament_select_index(population, k, &mut rng).expect("nonempty")].tree;
        let probs = c.probabilities();
        let r: f64 = rng.random();
        let mut acc = 0.0;
        let mut op = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if r < acc {
                op = i;
                break;
            }
        }
        let child = match op {
            0 => {
                let donor = &population
                    [tournament_select_index(population, k, &mut rng).expect("nonempty")]
                .tree;
                crossover(parent, donor, self.limits, &mut rng)
            }
            1 => subtree_mutation(
                parent,
                &self.builder,
                c.init_depth_max,
                self.limits,
                &mut rng,
            ),
            2 => point_mutation(parent, &self.builder, &mut rng),
            3 => hoist_mutation(parent, &mut rng),
            _ => parent.clone(),
        };
        self.evaluate(child)
    }
}

fn with_pool<R: Send>(config: &GpConfig, f: impl FnOnce() -> R + Send) -> Result<R, GpError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count.resolve())
        .build()
        .map_err(|e| GpError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Generates and evaluates the initial population.
pub fn init_population<T: Scalar>(
    config: &GpConfig,
    data: &Dataset<T>,
) -> Result<Vec<Individual<T>>, GpError> {
    let ctx = Context::new(config, data)?;
    with_pool(config, || {
        (0..config.population_size)
            .into_par_iter()
            .map(|i| ctx.initial(i))
            .collect()
    })
}

fn best_index<T: Scalar>(population: &[Individual<T>]) -> usize {
    (0..population.len())
        .min_by(|&a, &b| compare_individuals((a, &population[a]), (b, &population[b])))
        .expect("nonempty population")
}

fn record<T: Scalar>(generation: usize, population: &[Individual<T>]) -> GenerationRecord {
    let best = &population[best_index(population)];
    let mean_nodes =
        population.iter().map(|i| i.node_count as f64).sum::<f64>() / population.len() as f64;
    GenerationRecord {
        generation,
        best_fitness: best.fitness.as_f64(),
        best_mse: best.mse.as_f64(),
        best_nodes: best.node_count,
        mean_nodes,
        max_nodes: population.iter().map(|i| i.node_count).max().unwrap_or(0),
        max_depth: population.iter().map(|i| i.tree.depth()).max().unwrap_or(0),
        best_expr: serialize(&best.tree),
    }
}

/// Runs the full search and returns the best individual seen in any
/// generation together with a per-generation log (generation 0 is the
/// initial population).
pub fn evolve<T: Scalar>(
    config: &GpConfig,
    data: &Dataset<T>,
) -> Result<(Individual<T>, EvolutionLog), GpError> {
    let ctx = Context::new(config, data)?;
    with_pool(config, || {
        let mut population: Vec<Individual<T>> = (0..config.population_size)
            .into_par_iter()
            .map(|i| ctx.initial(i))
            .collect();
        let mut log = EvolutionLog::default();
        log.records.push(record(0, &population));
        let mut best = population[best_index(&population)].clone();

        for generation in 1..=config.generations {
            let mut order: Vec<usize> = (0..population.len()).collect();
            order.sort_by(|&a, &b| compare_individuals((a, &population[a]), (b, &population[b])));
            let elites = config.elitism_count.min(population.len());
            let mut next: Vec<Individual<T>> = order[..elites]
                .iter()
                .map(|&i| population[i].clone())
                .collect();
            let children: Vec<Individual<T>> = (elites..config.population_size)
                .into_par_iter()
                .map(|i| ctx.offspring(&population, generation, i))
                .collect();
            next.extend(children);
            population = next;

            let gen_best = &population[best_index(&population)];
            if compare_individuals((0, gen_best), (1, &best)).is_lt() {
                best = gen_best.clone();
            }
            log.records.push(record(generation, &population));
        }
        (best, log)
    })
}

/// Human-readable one-line summary of an individual.
pub fn describe<T: Scalar>(ind: &Individual<T>) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "fitness={} mse={} nodes={} expr={}",
        ind.fitness,
        ind.mse,
        ind.node_count,
        serialize(&ind.tree)
    );
    s
}
