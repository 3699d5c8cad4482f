//! Seeded synthetic systems for experiments, fixtures and tests.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{
    AdjacencyGraph, FlowData, FlowMatrix, MigrationSystem, SystemMeta, Zone, ZoneSet,
};
use crate::error::Result;
use crate::rng;

fn zone(id: String, population: f64, area: f64) -> Zone {
    Zone {
        id,
        name: None,
        population,
        area,
    }
}

fn meta(label: &str) -> SystemMeta {
    SystemMeta {
        label: label.into(),
        ..SystemMeta::default()
    }
}

/// `n` zones with random populations and areas and every off-diagonal flow
/// drawn uniformly from `0..=max_flow`.
pub fn uniform_system(n: usize, max_flow: u64, seed: u64) -> Result<MigrationSystem> {
    let mut rng = rng::stream(seed, &[0x5eed]);
    let zones = ZoneSet::new(
        (0..n)
            .map(|i| {
                zone(
                    format!("z{i}"),
                    rng.random_range(1_000..=100_000) as f64,
                    rng.random_range(1..=500) as f64,
                )
            })
            .collect(),
    )?;
    let mut m = FlowMatrix::zeros(n);
    for o in 0..n {
        for d in 0..n {
            if o != d {
                m.set(o, d, rng.random_range(0..=max_flow));
            }
        }
    }
    MigrationSystem::new(zones, FlowData::FullMatrix(m), meta("SYN"))
}

/// Rook grid whose zones exchange uniform random flows on every pair.
pub fn uniform_grid(
    rows: usize,
    cols: usize,
    max_flow: u64,
    seed: u64,
) -> Result<(MigrationSystem, AdjacencyGraph)> {
    let system = uniform_system(rows * cols, max_flow, seed)?;
    Ok((system, AdjacencyGraph::rook_grid(rows, cols)?))
}

/// Rook grid with distance-decaying flows and a smooth attractiveness gradient.
///
/// The flow from `o` to `d` is `round(u · scale · dist^(−exponent) · a_d)` with
/// `u ~ U[0, 1]`, grid distance `dist` and attractiveness `a` increasing from
/// one corner of the grid to the other. Net gains therefore form a smooth
/// spatial field and most moves are short, the structure real migration
/// systems show.
pub fn gravity_grid(
    rows: usize,
    cols: usize,
    exponent: f64,
    scale: f64,
    seed: u64,
) -> Result<(MigrationSystem, AdjacencyGraph)> {
    let n = rows * cols;
    let mut rng = rng::stream(seed, &[0x9a1]);
    let pos = |i: usize| ((i / cols) as f64, (i % cols) as f64);
    let span = ((rows + cols).max(2) - 2).max(1) as f64;
    let attract: Vec<f64> = (0..n)
        .map(|i| {
            let (r, c) = pos(i);
            0.5 + (r + c) / span
        })
        .collect();
    let zones = ZoneSet::new(
        (0..n)
            .map(|i| {
                zone(
                    format!("z{i}"),
                    rng.random_range(5_000..=50_000) as f64,
                    rng.random_range(10..=200) as f64,
                )
            })
            .collect(),
    )?;
    let mut m = FlowMatrix::zeros(n);
    for o in 0..n {
        let (ro, co) = pos(o);
        for (d, &a_d) in attract.iter().enumerate() {
            if o == d {
                continue;
            }
            let (rd, cd) = pos(d);
            let dist = ((ro - rd).powi(2) + (co - cd).powi(2)).sqrt();
            let u: f64 = rng.random();
            m.set(
                o,
                d,
                (u * scale * dist.powf(-exponent) * a_d).round() as u64,
            );
        }
    }
    Ok((
        MigrationSystem::new(zones, FlowData::FullMatrix(m), meta("GRAV"))?,
        AdjacencyGraph::rook_grid(rows, cols)?,
    ))
}

/// Grid system whose zone net migration rates follow
/// `beta · log10(density) + noise + c`, with `c` chosen so the system is closed.
///
/// Log density rises smoothly across the grid. Net balances are realised
/// exactly as integer flows on top of reciprocal background flows between
/// rook neighbours.
pub fn planted_density_grid(
    rows: usize,
    cols: usize,
    beta: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<(MigrationSystem, AdjacencyGraph)> {
    let n = rows * cols;
    let graph = AdjacencyGraph::rook_grid(rows, cols)?;
    let mut rng = rng::stream(seed, &[0xde5]);
    let noise = Normal::new(0.0, noise_sd).expect("finite sd");
    let mut pops = Vec::with_capacity(n);
    let mut log_den = Vec::with_capacity(n);
    for i in 0..n {
        let (r, c) = ((i / cols) as f64, (i % cols) as f64);
        let gradient = 2.5 * (r + c) / ((rows + cols).max(3) - 2) as f64;
        pops.push(rng.random_range(20_000..=200_000) as f64);
        log_den.push(0.5 + gradient + rng.random_range(-0.4..0.4));
    }
    let target: Vec<f64> = log_den
        .iter()
        .map(|&x| beta * x + noise.sample(&mut rng))
        .collect();
    let total_pop: f64 = pops.iter().sum();
    let centre = target.iter().zip(&pops).map(|(t, p)| t * p).sum::<f64>() / total_pop;
    let mut net: Vec<i64> = target
        .iter()
        .zip(&pops)
        .map(|(t, p)| ((t - centre) * p / 100.0).round() as i64)
        .collect();
    // Close the system: push the rounding residue onto the most populous zone.
    let residue: i64 = net.iter().sum();
    let biggest = (0..n)
        .max_by(|&a, &b| pops[a].total_cmp(&pops[b]))
        .expect("non-empty");
    net[biggest] -= residue;

    let zones = ZoneSet::new(
        (0..n)
            .map(|i| zone(format!("z{i}"), pops[i], pops[i] / 10f64.powf(log_den[i])))
            .collect(),
    )?;
    let mut m = FlowMatrix::zeros(n);
    for &(a, b) in graph.edges() {
        let base = rng.random_range(50..=150);
        m.add(a, b, base);
        m.add(b, a, base);
    }
    // Losers send to gainers in index order until every balance is met.
    let mut gainers: Vec<(usize, i64)> = (0..n)
        .filter(|&i| net[i] > 0)
        .map(|i| (i, net[i]))
        .collect();
    let mut losers: Vec<(usize, i64)> = (0..n)
        .filter(|&i| net[i] < 0)
        .map(|i| (i, -net[i]))
        .collect();
    let (mut gi, mut li) = (0, 0);
    while gi < gainers.len() && li < losers.len() {
        let moved = gainers[gi].1.min(losers[li].1);
        m.add(losers[li].0, gainers[gi].0, moved as u64);
        gainers[gi].1 -= moved;
        losers[li].1 -= moved;
        if gainers[gi].1 == 0 {
            gi += 1;
        }
        if losers[li].1 == 0 {
            li += 1;
        }
    }
    Ok((
        MigrationSystem::new(zones, FlowData::FullMatrix(m), meta("PLANT"))?,
        graph,
    ))
}
