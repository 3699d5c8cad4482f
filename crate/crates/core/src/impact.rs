//! Index of net migration impact and clustering in the (C, R) plane.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

pub const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct CountrySummary<T> {
    pub label: String,
    /// CMI slope, percent per log₁₀ unit count.
    pub cmi_slope: T,
    /// Percent.
    pub mean_mei: T,
}

impl<T: Scalar> CountrySummary<T> {
    pub fn new(label: impl Into<String>, cmi_slope: T, mean_mei: T) -> Result<Self> {
        if !(mean_mei >= T::zero() && mean_mei <= T::hundred()) {
            return Err(Error::invalid(format!(
                "mean MEI {mean_mei} outside [0, 100]"
            )));
        }
        if !(cmi_slope.is_finite()) {
            return Err(Error::invalid("CMI slope must be finite"));
        }
        Ok(CountrySummary {
            label: label.into(),
            cmi_slope,
            mean_mei,
        })
    }
}

/// Reference means that standardise a country's CMI slope and MEI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    pub avg_cmi_slope: f64,
    pub avg_mei: f64,
    pub sample_size: u32,
    #[serde(default)]
    pub note: String,
}

impl Benchmark {
    pub fn validate(&self) -> Result<()> {
        if !(self.avg_cmi_slope > 0.0 && self.avg_cmi_slope.is_finite()) {
            return Err(Error::invalid(format!(
                "benchmark avg_cmi_slope must be > 0, got {}",
                self.avg_cmi_slope
            )));
        }
        if !(self.avg_mei > 0.0 && self.avg_mei <= 100.0) {
            return Err(Error::invalid(format!(
                "benchmark avg_mei must lie in (0, 100], got {}",
                self.avg_mei
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: Benchmark = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("benchmark.json: {e}")))?;
        b.validate()?;
        Ok(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InmiResult<T> {
    /// Standardised intensity, cmi_slope / avg_cmi_slope.
    pub c_ratio: T,
    /// Standardised effectiveness, mean_mei / avg_mei.
    pub r_ratio: T,
    /// c_ratio × r_ratio; 1 is benchmark-average impact.
    pub inmi: T,
}

pub fn compute_inmi<T: Scalar>(
    summary: &CountrySummary<T>,
    benchmark: &Benchmark,
) -> Result<InmiResult<T>> {
    benchmark.validate()?;
    let c_ratio = summary.cmi_slope / T::of(benchmark.avg_cmi_slope);
    let r_ratio = summary.mean_mei / T::of(benchmark.avg_mei);
    if c_ratio < T::zero() {
        return Err(Error::invalid(format!(
            "{}: negative CMI slope gives a negative intensity ratio",
            summary.label
        )));
    }
    Ok(InmiResult {
        c_ratio,
        r_ratio,
        inmi: c_ratio * r_ratio,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint<T> {
    pub label: String,
    pub coords: [T; 2],
}

impl<T> LabeledPoint<T> {
    pub fn new(label: impl Into<String>, c: T, r: T) -> Self {
        LabeledPoint {
            label: label.into(),
            coords: [c, r],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult<T> {
    /// (label, cluster) in label order.
    pub assignments: Vec<(String, usize)>,
    pub centroids: Vec<[T; 2]>,
    pub inertia: T,
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    /// Restart that produced this solution.
    pub best_restart: usize,
    /// Inertia after every assignment step of the selected restart.
    pub inertia_trace: Vec<T>,
    pub iterations: usize,
}

impl<T: Scalar> ClusterResult<T> {
    pub fn cluster_of(&self, label: &str) -> Option<usize> {
        self.assignments
            .binary_search_by(|(l, _)| l.as_str().cmp(label))
            .ok()
            .map(|i| self.assignments[i].1)
    }

    /// Cluster indices aligned with the label-sorted point order.
    pub fn labels(&self) -> Vec<usize> {
        self.assignments.iter().map(|(_, c)| *c).collect()
    }
}

#[inline]
fn dist2<T: Scalar>(a: &[T; 2], b: &[T; 2]) -> T {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

fn nearest<T: Scalar>(p: &[T; 2], centroids: &[[T; 2]]) -> (usize, T) {
    let mut best = (0, dist2(p, &centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = dist2(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Points in canonical order (sorted by label); rejects duplicate labels.
fn canonical<T: Scalar>(points: &[LabeledPoint<T>]) -> Result<Vec<&LabeledPoint<T>>> {
    if points.is_empty() {
        return Err(Error::invalid("no points to cluster"));
    }
    let mut sorted: Vec<&LabeledPoint<T>> = points.iter().collect();
    sorted.sort_by(|a, b| a.label.cmp(&b.label));
    if let Some(w) = sorted.windows(2).find(|w| w[0].label == w[1].label) {
        return Err(Error::invalid(format!(
            "duplicate point label `{}`",
            w[0].label
        )));
    }
    if sorted
        .iter()
        .any(|p| !(p.coords[0].is_finite() && p.coords[1].is_finite()))
    {
        return Err(Error::invalid("point coordinates must be finite"));
    }
    Ok(sorted)
}

/// D²-weighted seeding: first centre uniform, then each next centre drawn
/// with probability proportional to squared distance to the nearest chosen one.
fn seed_centroids<T: Scalar, R: Rng>(pts: &[[T; 2]], k: usize, rng: &mut R) -> Vec<[T; 2]> {
    let n = pts.len();
    let mut centroids = vec![pts[rng.random_range(0..n)]];
    let mut d2: Vec<T> = pts.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: T = d2.iter().copied().sum();
        let idx = if total > T::zero() {
            let target = T::of(rng.random::<f64>()) * total;
            let mut acc = T::zero();
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc = acc + d;
                if acc > target && d > T::zero() {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = pts[idx];
        for (d, p) in d2.iter_mut().zip(pts) {
            *d = d.min(dist2(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

struct Run<T> {
    assignment: Vec<usize>,
    centroids: Vec<[T; 2]>,
    inertia: T,
    trace: Vec<T>,
    iterations: usize,
}

fn lloyd<T: Scalar>(pts: &[[T; 2]], mut centroids: Vec<[T; 2]>) -> Run<T> {
    let k = centroids.len();
    let mut assignment: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let mut inertia = T::zero();
        let next: Vec<usize> = pts
            .iter()
            .map(|p| {
                let (j, d) = nearest(p, &centroids);
                inertia = inertia + d;
                j
            })
            .collect();
        trace.push(inertia);
        let converged = next == assignment;
        assignment = next;
        if converged || iterations == MAX_LLOYD_ITERATIONS {
            return Run {
                assignment,
                centroids,
                inertia,
                trace,
                iterations,
            };
        }
        iterations += 1;
        let mut sums = vec![[T::zero(); 2]; k];
        let mut counts = vec![0usize; k];
        for (p, &j) in pts.iter().zip(&assignment) {
            sums[j][0] = sums[j][0] + p[0];
            sums[j][1] = sums[j][1] + p[1];
            counts[j] += 1;
        }
        for j in 0..k {
            // Empty clusters keep their previous centre.
            if counts[j] > 0 {
                let c = T::of_usize(counts[j]);
                centroids[j] = [sums[j][0] / c, sums[j][1] / c];
            }
        }
    }
}

/// Best-of-`restarts` Lloyd k-means in two dimensions.
///
/// Restart `r` draws from its own stream keyed by (seed, r); the solution with
/// the lowest inertia wins, ties going to the lowest restart index.
pub fn kmeans_cluster<T: Scalar>(
    points: &[LabeledPoint<T>],
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusterResult<T>> {
    let sorted = canonical(points)?;
    if k == 0 || k > sorted.len() {
        return Err(Error::invalid(format!(
            "k = {k} must lie in [1, {}]",
            sorted.len()
        )));
    }
    if restarts == 0 {
        return Err(Error::invalid("restarts must be >= 1"));
    }
    let pts: Vec<[T; 2]> = sorted.iter().map(|p| p.coords).collect();
    let mut best: Option<(usize, Run<T>)> = None;
    for r in 0..restarts {
        let mut stream = rng::stream(seed, &[r as u64]);
        let run = lloyd(&pts, seed_centroids(&pts, k, &mut stream));
        if best.as_ref().is_none_or(|(_, b)| run.inertia < b.inertia) {
            best = Some((r, run));
        }
    }
    let (best_restart, run) = best.expect("restarts >= 1");
    Ok(ClusterResult {
        assignments: sorted
            .iter()
            .zip(&run.assignment)
            .map(|(p, &c)| (p.label.clone(), c))
            .collect(),
        centroids: run.centroids,
        inertia: run.inertia,
        k,
        seed,
        restarts,
        best_restart,
        inertia_trace: run.trace,
        iterations: run.iterations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KDiagnostics<T> {
    pub k: usize,
    pub inertia: T,
    /// Mean silhouette; absent when k < 2 or k equals the number of points.
    pub silhouette: Option<T>,
}

/// Mean silhouette width. Singleton clusters contribute 0.
fn mean_silhouette<T: Scalar>(pts: &[[T; 2]], labels: &[usize], k: usize) -> Option<T> {
    let n = pts.len();
    if k < 2 || k >= n {
        return None;
    }
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    let mut total = T::zero();
    for i in 0..n {
        let mut sum_d = vec![T::zero(); k];
        for j in 0..n {
            if i != j {
                sum_d[labels[j]] = sum_d[labels[j]] + dist2(&pts[i], &pts[j]).sqrt();
            }
        }
        let own = labels[i];
        if sizes[own] <= 1 {
            continue;
        }
        let a = sum_d[own] / T::of_usize(sizes[own] - 1);
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sum_d[c] / T::of_usize(sizes[c]))
            .fold(T::infinity(), T::min);
        if !b.is_finite() {
            continue;
        }
        let m = a.max(b);
        if m > T::zero() {
            total = total + (b - a) / m;
        }
    }
    Some(total / T::of_usize(n))
}

/// Inertia and mean silhouette for each candidate k; no k is chosen.
pub fn evaluate_k<T: Scalar>(
    points: &[LabeledPoint<T>],
    candidate_ks: &[usize],
    restarts: usize,
    seed: u64,
) -> Result<Vec<KDiagnostics<T>>> {
    let sorted = canonical(points)?;
    let pts: Vec<[T; 2]> = sorted.iter().map(|p| p.coords).collect();
    let mut ks = candidate_ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    ks.iter()
        .map(|&k| {
            let res = kmeans_cluster(points, k, restarts, seed)?;
            Ok(KDiagnostics {
                k,
                inertia: res.inertia,
                silhouette: mean_silhouette(&pts, &res.labels(), k),
            })
        })
        .collect()
}

/// Adjusted Rand index between two labelings of the same points.
///
/// Returns 1 when both labelings are trivially identical in structure
/// (the index is 0/0 there).
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must have equal length");
    let n = a.len();
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let c2 = |x: u64| (x * x.saturating_sub(1) / 2) as f64;
    let sum_ij: f64 = table.iter().flatten().map(|&v| c2(v)).sum();
    let sum_a: f64 = table.iter().map(|row| c2(row.iter().sum())).sum();
    let sum_b: f64 = (0..kb)
        .map(|j| c2(table.iter().map(|row| row[j]).sum()))
        .sum();
    let total = c2(n as u64);
    if total == 0.0 {
        return 1.0;
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return 1.0;
    }
    (sum_ij - expected) / (max - expected)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Mean pairwise adjusted Rand index across seeds.
    pub agreement: f64,
    /// All points coincide, so every partition is equivalent.
    pub degenerate: bool,
}

/// Agreement of k-means solutions across seeds.
pub fn seed_stability<T: Scalar>(
    points: &[LabeledPoint<T>],
    k: usize,
    restarts: usize,
    seeds: &[u64],
) -> Result<StabilityReport> {
    if seeds.len() < 2 {
        return Err(Error::invalid("seed stability needs at least 2 seeds"));
    }
    let sorted = canonical(points)?;
    let first = sorted[0].coords;
    if sorted.iter().all(|p| p.coords == first) {
        return Ok(StabilityReport {
            agreement: 1.0,
            degenerate: true,
        });
    }
    let labelings = seeds
        .iter()
        .map(|&s| Ok(kmeans_cluster(points, k, restarts, s)?.labels()))
        .collect::<Result<Vec<_>>>()?;
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..labelings.len() {
        for j in i + 1..labelings.len() {
            sum += adjusted_rand_index(&labelings[i], &labelings[j]);
            pairs += 1;
        }
    }
    Ok(StabilityReport {
        agreement: sum / pairs as f64,
        degenerate: false,
    })
}
