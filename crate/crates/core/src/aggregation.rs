//! Random contiguous aggregation and multi-scale index summaries.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::data::{AdjacencyGraph, FlowData, FlowMatrix, MigrationSystem, Zone, ZoneSet};
use crate::error::{Error, Result};
use crate::indices::{system_indices, SystemIndices};
use crate::rng;
use crate::scalar::Scalar;

pub const DEFAULT_SAMPLES_PER_SCALE: usize = 30;
pub const DEFAULT_LADDER_STEPS: usize = 8;
/// Smallest number of units at which MEI is treated as scale-stable.
pub const DEFAULT_MIN_UNITS: usize = 20;

/// Assignment of every base zone to one of `target_count` connected groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    target_count: usize,
}

impl Partition {
    /// Validates coverage, non-empty groups and group contiguity.
    pub fn new(
        assignment: Vec<usize>,
        target_count: usize,
        graph: &AdjacencyGraph,
    ) -> Result<Self> {
        if assignment.len() != graph.zone_count() {
            return Err(Error::invalid(format!(
                "partition covers {} zones, graph has {}",
                assignment.len(),
                graph.zone_count()
            )));
        }
        let p = Partition {
            assignment,
            target_count,
        };
        p.validate(graph)?;
        Ok(p)
    }

    /// One group per zone.
    pub fn identity(n: usize) -> Self {
        Partition {
            assignment: (0..n).collect(),
            target_count: n,
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn target_count(&self) -> usize {
        self.target_count
    }

    pub fn group_of(&self, zone: usize) -> usize {
        self.assignment[zone]
    }

    /// Members of each group, in zone order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut g = vec![Vec::new(); self.target_count];
        for (z, &k) in self.assignment.iter().enumerate() {
            g[k].push(z);
        }
        g
    }

    pub fn is_identity(&self) -> bool {
        self.target_count == self.assignment.len()
    }

    fn validate(&self, graph: &AdjacencyGraph) -> Result<()> {
        let k = self.target_count;
        if self.assignment.iter().any(|&g| g >= k) {
            return Err(Error::invalid("group index out of range"));
        }
        let groups = self.groups();
        if let Some(empty) = groups.iter().position(|g| g.is_empty()) {
            return Err(Error::invalid(format!("group {empty} is empty")));
        }
        // Flood fill restricted to same-group neighbours.
        let mut seen = vec![false; self.assignment.len()];
        for (gi, members) in groups.iter().enumerate() {
            let mut stack = vec![members[0]];
            seen[members[0]] = true;
            let mut reached = 0;
            while let Some(v) = stack.pop() {
                reached += 1;
                for &u in graph.neighbors(v) {
                    if !seen[u] && self.assignment[u] == gi {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            if reached != members.len() {
                return Err(Error::invalid(format!("group {gi} is not contiguous")));
            }
        }
        Ok(())
    }
}

/// Seeded region growing.
///
/// Draws `target_count` distinct seed zones, then repeatedly picks a frontier
/// edge (assigned zone, unassigned neighbour) uniformly at random and hands the
/// neighbour to that zone's group until every zone is assigned.
pub fn random_contiguous_partition(
    graph: &AdjacencyGraph,
    target_count: usize,
    seed: u64,
) -> Result<Partition> {
    let n = graph.zone_count();
    if target_count < 2 || target_count > n {
        return Err(Error::invalid(format!(
            "target count {target_count} outside [2, {n}]"
        )));
    }
    if target_count == n {
        return Ok(Partition::identity(n));
    }
    let mut rng = rng::stream(seed, &[]);
    const UNASSIGNED: usize = usize::MAX;
    let mut assignment = vec![UNASSIGNED; n];
    // Frontier entries may go stale once their target is assigned; stale
    // entries are discarded on draw, which keeps the draw uniform over live ones.
    let mut frontier: Vec<(usize, usize)> = Vec::new();
    for (g, z) in sample(&mut rng, n, target_count).into_iter().enumerate() {
        assignment[z] = g;
    }
    for z in 0..n {
        if assignment[z] != UNASSIGNED {
            let g = assignment[z];
            frontier.extend(
                graph
                    .neighbors(z)
                    .iter()
                    .filter(|&&u| assignment[u] == UNASSIGNED)
                    .map(|&u| (g, u)),
            );
        }
    }
    let mut remaining = n - target_count;
    while remaining > 0 {
        let pick = rng.random_range(0..frontier.len());
        let (g, v) = frontier.swap_remove(pick);
        if assignment[v] != UNASSIGNED {
            continue;
        }
        assignment[v] = g;
        remaining -= 1;
        frontier.extend(
            graph
                .neighbors(v)
                .iter()
                .filter(|&&u| assignment[u] == UNASSIGNED)
                .map(|&u| (g, u)),
        );
    }
    Ok(Partition {
        assignment,
        target_count,
    })
}

/// Merges zones into partition groups.
///
/// Populations and areas are summed, between-group flows are summed and
/// within-group flows disappear. Group ids are `g0`, `g1`, ...
pub fn aggregate_system(
    system: &MigrationSystem,
    partition: &Partition,
) -> Result<MigrationSystem> {
    let matrix = system.flows.matrix().ok_or(Error::MatrixRequired {
        operation: "aggregation",
    })?;
    if partition.assignment.len() != system.len() {
        return Err(Error::invalid(format!(
            "partition covers {} zones, system has {}",
            partition.assignment.len(),
            system.len()
        )));
    }
    let k = partition.target_count;
    let mut pop = vec![0.0f64; k];
    let mut area = vec![0.0f64; k];
    for (z, &g) in system.zones.zones().iter().zip(&partition.assignment) {
        pop[g] += z.population;
        area[g] += z.area;
    }
    let mut merged = FlowMatrix::zeros(k);
    for (o, d, c) in matrix.nonzero() {
        merged.add(partition.assignment[o], partition.assignment[d], c);
    }
    let zones = ZoneSet::new(
        (0..k)
            .map(|g| Zone {
                id: format!("g{g}"),
                name: None,
                population: pop[g],
                area: area[g],
            })
            .collect(),
    )?;
    MigrationSystem::new(zones, FlowData::FullMatrix(merged), system.meta())
}

/// Geometric ladder of unit counts from `min_n` to `base_n` inclusive.
pub fn scale_ladder(base_n: usize, min_n: usize, steps: usize) -> Result<Vec<usize>> {
    if min_n < 2 || min_n >= base_n {
        return Err(Error::invalid(format!(
            "ladder bounds need 2 <= min_n < base_n, got min_n={min_n}, base_n={base_n}"
        )));
    }
    if steps < 2 {
        return Err(Error::invalid(format!(
            "ladder needs at least 2 steps, got {steps}"
        )));
    }
    let ratio = base_n as f64 / min_n as f64;
    let mut ladder: Vec<usize> = (0..steps)
        .map(|k| {
            if k == 0 {
                min_n
            } else if k == steps - 1 {
                base_n
            } else {
                (min_n as f64 * ratio.powf(k as f64 / (steps - 1) as f64)).round() as usize
            }
        })
        .collect();
    ladder.dedup();
    Ok(ladder)
}

/// Default ladder: 8 geometric steps from max(20, ⌈n/20⌉) to n.
///
/// Systems with 20 or fewer zones start the ladder at 2 units instead.
pub fn default_ladder(base_n: usize) -> Result<Vec<usize>> {
    if base_n < 2 {
        return Err(Error::invalid("need at least 2 zones"));
    }
    if base_n == 2 {
        return Ok(vec![2]);
    }
    let mut min_n = DEFAULT_MIN_UNITS.max(base_n.div_ceil(20));
    if min_n >= base_n {
        min_n = 2;
    }
    scale_ladder(base_n, min_n, DEFAULT_LADDER_STEPS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalePoint<T> {
    pub n_units: usize,
    pub samples: usize,
    pub mean_cmi: T,
    pub sd_cmi: T,
    pub mean_mei: T,
    pub sd_mei: T,
    pub mean_anmr: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleProfile<T> {
    pub points: Vec<ScalePoint<T>>,
    pub base_n: usize,
    pub master_seed: u64,
}

/// Mean and sample standard deviation (n − 1); the deviation is 0 for one value.
fn mean_sd<T: Scalar>(xs: impl Iterator<Item = T> + Clone) -> (T, T) {
    let n = xs.clone().count();
    let first = xs.clone().next().unwrap_or_else(T::nan);
    if xs.clone().all(|x| x == first) {
        return (first, T::zero());
    }
    let mean = xs.clone().sum::<T>() / T::of_usize(n);
    if n < 2 {
        return (mean, T::zero());
    }
    let ss: T = xs.map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / T::of_usize(n - 1)).sqrt())
}

/// Seed used for one (scale, sample) draw.
pub fn sample_seed(master_seed: u64, scale_index: usize, sample_index: usize) -> u64 {
    rng::derive_seed(master_seed, &[scale_index as u64, sample_index as u64])
}

/// Monte Carlo summaries of CMI, MEI and ANMR across the ladder.
///
/// Draws are keyed by (scale index, sample index) and recombined by index, so
/// the profile does not depend on the thread schedule.
pub fn scale_profile<T: Scalar>(
    system: &MigrationSystem,
    graph: &AdjacencyGraph,
    ladder: &[usize],
    samples_per_scale: usize,
    master_seed: u64,
) -> Result<ScaleProfile<T>> {
    if !system.is_full_matrix() {
        return Err(Error::MatrixRequired {
            operation: "scale profiling",
        });
    }
    if samples_per_scale == 0 {
        return Err(Error::invalid("samples_per_scale must be >= 1"));
    }
    if graph.zone_count() != system.len() {
        return Err(Error::invalid(
            "adjacency graph and system have different zone counts",
        ));
    }
    let base_n = system.len();
    if ladder.is_empty() {
        return Err(Error::invalid("empty scale ladder"));
    }
    for w in ladder.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid("scale ladder must be strictly increasing"));
        }
    }
    if ladder[0] < 2 || *ladder.last().unwrap() > base_n {
        return Err(Error::invalid(format!(
            "scale ladder must lie within [2, {base_n}]"
        )));
    }

    let tasks: Vec<(usize, usize)> = (0..ladder.len())
        .flat_map(|s| (0..samples_per_scale).map(move |j| (s, j)))
        .collect();
    let draws: Vec<SystemIndices<T>> = tasks
        .par_iter()
        .map(|&(s, j)| {
            let n = ladder[s];
            if n == base_n {
                return system_indices(system);
            }
            let part = random_contiguous_partition(graph, n, sample_seed(master_seed, s, j))?;
            system_indices(&aggregate_system(system, &part)?)
        })
        .collect::<Result<_>>()?;

    let points = ladder
        .iter()
        .zip(draws.chunks(samples_per_scale))
        .map(|(&n, chunk)| {
            let (mean_cmi, sd_cmi) = mean_sd(chunk.iter().map(|d| d.cmi));
            let (mean_mei, sd_mei) = mean_sd(chunk.iter().map(|d| d.mei));
            let (mean_anmr, _) = mean_sd(chunk.iter().map(|d| d.anmr));
            ScalePoint {
                n_units: n,
                samples: chunk.len(),
                mean_cmi,
                sd_cmi,
                mean_mei,
                sd_mei,
                mean_anmr,
            }
        })
        .collect();
    Ok(ScaleProfile {
        points,
        base_n,
        master_seed,
    })
}

/// CMI slope against log₁₀ of the unit count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CourgeauFit<T> {
    /// Percent per log₁₀ unit.
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

/// Unweighted least squares of mean CMI on log₁₀(n_units).
///
/// When the CMI is constant across scales the line fits exactly and
/// `r_squared` is reported as 1.
pub fn fit_cmi_slope<T: Scalar>(profile: &ScaleProfile<T>) -> Result<CourgeauFit<T>> {
    let pts = &profile.points;
    if pts.len() < 2 {
        return Err(Error::invalid("CMI slope needs at least 2 scale points"));
    }
    let xs: Vec<T> = pts.iter().map(|p| T::of_usize(p.n_units).log10()).collect();
    let ys: Vec<T> = pts.iter().map(|p| p.mean_cmi).collect();
    let n = T::of_usize(pts.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if sxx <= T::zero() {
        return Err(Error::Degenerate(
            "all scale points share one unit count".into(),
        ));
    }
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let syy: T = ys.iter().map(|&y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy <= T::zero() {
        T::one()
    } else {
        (sxy * sxy / (sxx * syy)).min(T::one()).max(T::zero())
    };
    Ok(CourgeauFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Unweighted mean of per-scale mean MEI over scales with at least `min_units` units.
pub fn mean_mei<T: Scalar>(profile: &ScaleProfile<T>, min_units: usize) -> Result<T> {
    let q: Vec<T> = profile
        .points
        .iter()
        .filter(|p| p.n_units >= min_units)
        .map(|p| p.mean_mei)
        .collect();
    if q.is_empty() {
        return Err(Error::invalid(format!(
            "no scale point has at least {min_units} units"
        )));
    }
    Ok(q.iter().copied().sum::<T>() / T::of_usize(q.len()))
}

impl<T: Scalar> ScaleProfile<T> {
    /// Builds a profile from precomputed points, checking the ladder invariants.
    pub fn from_points(
        points: Vec<ScalePoint<T>>,
        base_n: usize,
        master_seed: u64,
    ) -> Result<Self> {
        for w in points.windows(2) {
            if w[1].n_units <= w[0].n_units {
                return Err(Error::invalid("n_units must be strictly increasing"));
            }
        }
        if points.iter().any(|p| p.n_units < 2 || p.n_units > base_n) {
            return Err(Error::invalid(format!(
                "n_units must lie within [2, {base_n}]"
            )));
        }
        Ok(ScaleProfile {
            points,
            base_n,
            master_seed,
        })
    }
}
