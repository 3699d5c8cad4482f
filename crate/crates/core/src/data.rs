//! Zones, flows and contiguity graphs.
//!
//! Zones are indexed by their position in the input file; string ids only
//! appear at the I/O boundary. Flow counts are integers.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub id: String,
    pub name: Option<String>,
    /// Persons.
    pub population: f64,
    /// Square kilometres.
    pub area: f64,
}

/// Ordered, validated collection of zones.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneSet {
    zones: Vec<Zone>,
    index: HashMap<String, usize>,
}

impl ZoneSet {
    pub fn new(zones: Vec<Zone>) -> Result<Self> {
        if zones.len() < 2 {
            return Err(Error::invalid(format!(
                "a zone set needs at least 2 zones, got {}",
                zones.len()
            )));
        }
        let mut index = HashMap::with_capacity(zones.len());
        for (pos, z) in zones.iter().enumerate() {
            check_zone(z).map_err(Error::invalid)?;
            if index.insert(z.id.clone(), pos).is_some() {
                return Err(Error::invalid(format!("duplicate zone id `{}`", z.id)));
            }
        }
        let set = ZoneSet { zones, index };
        if set.total_population() <= 0.0 {
            return Err(Error::invalid("total population must be positive"));
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn get(&self, pos: usize) -> &Zone {
        &self.zones[pos]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.zones.iter().map(|z| z.id.as_str())
    }

    /// System population at risk, P.
    pub fn total_population(&self) -> f64 {
        self.zones.iter().map(|z| z.population).sum()
    }

    pub fn total_area(&self) -> f64 {
        self.zones.iter().map(|z| z.area).sum()
    }
}

fn check_zone(z: &Zone) -> std::result::Result<(), String> {
    if z.id.is_empty() {
        return Err("empty zone id".into());
    }
    if !(z.population.is_finite() && z.population >= 0.0) {
        return Err(format!("zone `{}`: population must be >= 0", z.id));
    }
    if !(z.area.is_finite() && z.area > 0.0) {
        return Err(format!("zone `{}`: area must be > 0", z.id));
    }
    Ok(())
}

/// Per-zone density in persons per km².
pub fn densities(zones: &ZoneSet) -> Vec<f64> {
    zones.zones.iter().map(|z| z.population / z.area).collect()
}

/// Square origin-destination count matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl FlowMatrix {
    pub fn zeros(n: usize) -> Self {
        FlowMatrix {
            n,
            counts: vec![0; n * n],
        }
    }

    /// Builds a matrix from row-major counts; diagonal entries are discarded.
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let n = rows.len();
        let mut m = FlowMatrix::zeros(n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid("flow matrix must be square"));
            }
            for (j, c) in row.into_iter().enumerate() {
                if i != j {
                    m.counts[i * n + j] = c;
                }
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, origin: usize, destination: usize) -> u64 {
        self.counts[origin * self.n + destination]
    }

    /// Sets an off-diagonal cell. Diagonal writes are ignored.
    #[inline]
    pub fn set(&mut self, origin: usize, destination: usize, count: u64) {
        if origin != destination {
            self.counts[origin * self.n + destination] = count;
        }
    }

    #[inline]
    pub fn add(&mut self, origin: usize, destination: usize, count: u64) {
        if origin != destination {
            self.counts[origin * self.n + destination] += count;
        }
    }

    /// Column sums, D_i.
    pub fn inflows(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.n];
        for row in self.counts.chunks_exact(self.n) {
            for (acc, &c) in d.iter_mut().zip(row) {
                *acc += c;
            }
        }
        d
    }

    /// Row sums, O_i.
    pub fn outflows(&self) -> Vec<u64> {
        self.counts
            .chunks_exact(self.n)
            .map(|row| row.iter().sum())
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn transposed(&self) -> FlowMatrix {
        let mut t = FlowMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.counts[j * self.n + i] = self.counts[i * self.n + j];
            }
        }
        t
    }

    /// Non-zero off-diagonal cells in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(k, &c)| (k / self.n, k % self.n, c))
    }
}

/// Per-zone inflow and outflow totals without the underlying matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marginals {
    inflow: Vec<u64>,
    outflow: Vec<u64>,
}

impl Marginals {
    /// Closed-system check: the inflow and outflow totals must agree exactly.
    pub fn new(inflow: Vec<u64>, outflow: Vec<u64>) -> Result<Self> {
        if inflow.len() != outflow.len() {
            return Err(Error::invalid("inflow and outflow lengths differ"));
        }
        let (si, so): (u64, u64) = (inflow.iter().sum(), outflow.iter().sum());
        if si != so {
            return Err(Error::invalid(format!(
                "marginal imbalance: sum of inflows {si} != sum of outflows {so}"
            )));
        }
        Ok(Marginals { inflow, outflow })
    }

    pub fn inflows(&self) -> &[u64] {
        &self.inflow
    }

    pub fn outflows(&self) -> &[u64] {
        &self.outflow
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowData {
    FullMatrix(FlowMatrix),
    MarginalsOnly(Marginals),
}

impl FlowData {
    pub fn dim(&self) -> usize {
        match self {
            FlowData::FullMatrix(m) => m.dim(),
            FlowData::MarginalsOnly(m) => m.inflow.len(),
        }
    }

    pub fn inflows(&self) -> Vec<u64> {
        match self {
            FlowData::FullMatrix(m) => m.inflows(),
            FlowData::MarginalsOnly(m) => m.inflow.clone(),
        }
    }

    pub fn outflows(&self) -> Vec<u64> {
        match self {
            FlowData::FullMatrix(m) => m.outflows(),
            FlowData::MarginalsOnly(m) => m.outflow.clone(),
        }
    }

    /// Total inter-zone migrants, M.
    pub fn total(&self) -> u64 {
        match self {
            FlowData::FullMatrix(m) => m.total(),
            FlowData::MarginalsOnly(m) => m.inflow.iter().sum(),
        }
    }

    /// Signed per-zone balances D_i − O_i.
    pub fn net_balances(&self) -> Vec<i64> {
        self.inflows()
            .into_iter()
            .zip(self.outflows())
            .map(|(d, o)| d as i64 - o as i64)
            .collect()
    }

    pub fn matrix(&self) -> Option<&FlowMatrix> {
        match self {
            FlowData::FullMatrix(m) => Some(m),
            FlowData::MarginalsOnly(_) => None,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            FlowData::FullMatrix(_) => "full_matrix",
            FlowData::MarginalsOnly(_) => "marginals_only",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemMeta {
    pub label: String,
    pub year: i32,
    /// Measurement interval in years, 1 or 5.
    pub interval: u8,
}

impl Default for SystemMeta {
    fn default() -> Self {
        SystemMeta {
            label: "XX".into(),
            year: 0,
            interval: 1,
        }
    }
}

/// One country-year: zones plus flows.
#[derive(Debug, Clone, PartialEq)]
pub struct MigrationSystem {
    pub zones: ZoneSet,
    pub flows: FlowData,
    pub label: String,
    pub year: i32,
    pub interval: u8,
}

impl MigrationSystem {
    pub fn new(zones: ZoneSet, flows: FlowData, meta: SystemMeta) -> Result<Self> {
        if flows.dim() != zones.len() {
            return Err(Error::invalid(format!(
                "flow dimension {} does not match zone count {}",
                flows.dim(),
                zones.len()
            )));
        }
        if !matches!(meta.interval, 1 | 5) {
            return Err(Error::invalid(format!(
                "interval must be 1 or 5 years, got {}",
                meta.interval
            )));
        }
        Ok(MigrationSystem {
            zones,
            flows,
            label: meta.label,
            year: meta.year,
            interval: meta.interval,
        })
    }

    pub fn meta(&self) -> SystemMeta {
        SystemMeta {
            label: self.label.clone(),
            year: self.year,
            interval: self.interval,
        }
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn population(&self) -> f64 {
        self.zones.total_population()
    }

    pub fn migrants(&self) -> u64 {
        self.flows.total()
    }

    pub fn is_full_matrix(&self) -> bool {
        matches!(self.flows, FlowData::FullMatrix(_))
    }

    /// Writes `zones.csv` content.
    pub fn write_zones<W: Write>(&self, w: W) -> Result<()> {
        write_zones(&self.zones, w)
    }

    /// Writes the flows in the CSV schema matching the variant.
    pub fn write_flows<W: Write>(&self, w: W) -> Result<()> {
        match &self.flows {
            FlowData::FullMatrix(m) => write_flow_matrix(&self.zones, m, w),
            FlowData::MarginalsOnly(m) => write_marginals(&self.zones, m, w),
        }
    }
}

/// Named CSV input; the name is used in error messages.
pub struct CsvInput<R> {
    pub name: String,
    pub reader: R,
}

impl<R: Read> CsvInput<R> {
    pub fn new(name: impl Into<String>, reader: R) -> Self {
        CsvInput {
            name: name.into(),
            reader,
        }
    }
}

pub enum FlowSource<R> {
    /// `origin,destination,count`
    Matrix(CsvInput<R>),
    /// `zone_id,inflow,outflow`
    Marginals(CsvInput<R>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSystem {
    pub system: MigrationSystem,
    /// Number of within-zone flow records that were dropped.
    pub diagonal_dropped: usize,
}

pub const ZONES_HEADER: [&str; 4] = ["zone_id", "name", "population", "area_km2"];
pub const FLOWS_HEADER: [&str; 3] = ["origin", "destination", "count"];
pub const MARGINALS_HEADER: [&str; 3] = ["zone_id", "inflow", "outflow"];
pub const ADJACENCY_HEADER: [&str; 2] = ["zone_a", "zone_b"];

struct Records<R> {
    name: String,
    reader: csv::Reader<R>,
}

impl<R: Read> Records<R> {
    fn open(input: CsvInput<R>, header: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(input.reader);
        let found = reader.headers().map_err(|e| Error::Csv {
            source_name: input.name.clone(),
            message: e.to_string(),
        })?;
        let found: Vec<&str> = found
            .iter()
            .map(|h| h.trim_start_matches('\u{feff}'))
            .collect();
        if found != header {
            return Err(Error::validation(
                &input.name,
                1,
                format!(
                    "expected header `{}`, found `{}`",
                    header.join(","),
                    found.join(",")
                ),
            ));
        }
        Ok(Records {
            name: input.name,
            reader,
        })
    }

    /// Calls `f(line, record)` for each data row.
    fn for_each(
        &mut self,
        mut f: impl FnMut(&str, u64, &csv::StringRecord) -> Result<()>,
    ) -> Result<()> {
        let mut rec = csv::StringRecord::new();
        loop {
            match self.reader.read_record(&mut rec) {
                Ok(true) => {
                    let line = rec.position().map(|p| p.line()).unwrap_or(0);
                    f(&self.name, line, &rec)?;
                }
                Ok(false) => return Ok(()),
                Err(e) => {
                    return Err(Error::Csv {
                        source_name: self.name.clone(),
                        message: e.to_string(),
                    })
                }
            }
        }
    }
}

fn parse_f64(src: &str, line: u64, field: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::validation(src, line, format!("{field}: `{raw}` is not a number")))
}

fn parse_count(src: &str, line: u64, field: &str, raw: &str) -> Result<u64> {
    if let Ok(v) = raw.parse::<u64>() {
        return Ok(v);
    }
    match raw.parse::<f64>() {
        Ok(v) if v < 0.0 => Err(Error::validation(
            src,
            line,
            format!("{field}: negative count {raw}"),
        )),
        Ok(v) if v.is_finite() && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(Error::validation(
            src,
            line,
            format!("{field}: `{raw}` is not a non-negative integer count"),
        )),
    }
}

/// Reads `zones.csv`.
pub fn read_zones<R: Read>(input: CsvInput<R>) -> Result<ZoneSet> {
    let mut recs = Records::open(input, &ZONES_HEADER)?;
    let mut zones: Vec<Zone> = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    recs.for_each(|src, line, r| {
        let id = r[0].to_string();
        if id.is_empty() {
            return Err(Error::validation(src, line, "empty zone_id"));
        }
        if let Some(first) = seen.insert(id.clone(), line) {
            return Err(Error::validation(
                src,
                line,
                format!("duplicate zone id `{id}` (first seen on line {first})"),
            ));
        }
        let population = parse_f64(src, line, "population", &r[2])?;
        if population < 0.0 {
            return Err(Error::validation(
                src,
                line,
                format!("zone `{id}`: negative population"),
            ));
        }
        let area = parse_f64(src, line, "area_km2", &r[3])?;
        if area <= 0.0 {
            return Err(Error::validation(
                src,
                line,
                format!("zone `{id}`: area must be > 0"),
            ));
        }
        let name = (!r[1].is_empty()).then(|| r[1].to_string());
        zones.push(Zone {
            id,
            name,
            population,
            area,
        });
        Ok(())
    })?;
    let name = recs.name;
    ZoneSet::new(zones).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::validation(&name, 0, msg),
        other => other,
    })
}

fn lookup(zones: &ZoneSet, src: &str, line: u64, field: &str, id: &str) -> Result<usize> {
    zones
        .position(id)
        .ok_or_else(|| Error::validation(src, line, format!("{field}: unknown zone id `{id}`")))
}

/// Reads `flows.csv`. Returns the matrix and the number of diagonal records dropped.
pub fn read_flow_matrix<R: Read>(
    input: CsvInput<R>,
    zones: &ZoneSet,
) -> Result<(FlowMatrix, usize)> {
    let mut recs = Records::open(input, &FLOWS_HEADER)?;
    let mut matrix = FlowMatrix::zeros(zones.len());
    let mut seen: HashMap<(usize, usize), u64> = HashMap::new();
    let mut dropped = 0usize;
    recs.for_each(|src, line, r| {
        let o = lookup(zones, src, line, "origin", &r[0])?;
        let d = lookup(zones, src, line, "destination", &r[1])?;
        let count = parse_count(src, line, "count", &r[2])?;
        if let Some(first) = seen.insert((o, d), line) {
            return Err(Error::validation(
                src,
                line,
                format!(
                    "duplicate pair ({},{}) (first seen on line {first})",
                    &r[0], &r[1]
                ),
            ));
        }
        if o == d {
            dropped += 1;
        } else {
            matrix.set(o, d, count);
        }
        Ok(())
    })?;
    Ok((matrix, dropped))
}

/// Reads `flows_marginal.csv`. Zones absent from the file get zero inflow and outflow.
pub fn read_marginals<R: Read>(input: CsvInput<R>, zones: &ZoneSet) -> Result<Marginals> {
    let mut recs = Records::open(input, &MARGINALS_HEADER)?;
    let mut inflow = vec![0u64; zones.len()];
    let mut outflow = vec![0u64; zones.len()];
    let mut seen: HashMap<usize, u64> = HashMap::new();
    recs.for_each(|src, line, r| {
        let z = lookup(zones, src, line, "zone_id", &r[0])?;
        if let Some(first) = seen.insert(z, line) {
            return Err(Error::validation(
                src,
                line,
                format!("duplicate zone id `{}` (first seen on line {first})", &r[0]),
            ));
        }
        inflow[z] = parse_count(src, line, "inflow", &r[1])?;
        outflow[z] = parse_count(src, line, "outflow", &r[2])?;
        Ok(())
    })?;
    let name = recs.name;
    Marginals::new(inflow, outflow).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::validation(&name, 0, msg),
        other => other,
    })
}

/// Loads and validates a migration system from its CSV sources.
pub fn load_system<R1: Read, R2: Read>(
    zones: CsvInput<R1>,
    flows: FlowSource<R2>,
    meta: SystemMeta,
) -> Result<LoadedSystem> {
    let zone_set = read_zones(zones)?;
    let (flow_data, diagonal_dropped) = match flows {
        FlowSource::Matrix(input) => {
            let (m, dropped) = read_flow_matrix(input, &zone_set)?;
            (FlowData::FullMatrix(m), dropped)
        }
        FlowSource::Marginals(input) => (
            FlowData::MarginalsOnly(read_marginals(input, &zone_set)?),
            0,
        ),
    };
    Ok(LoadedSystem {
        system: MigrationSystem::new(zone_set, flow_data, meta)?,
        diagonal_dropped,
    })
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Csv {
        source_name: "<output>".into(),
        message: e.to_string(),
    }
}

pub fn write_zones<W: Write>(zones: &ZoneSet, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(ZONES_HEADER).map_err(csv_err)?;
    for z in zones.zones() {
        wtr.write_record([
            z.id.as_str(),
            z.name.as_deref().unwrap_or(""),
            &z.population.to_string(),
            &z.area.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(csv_err)
}

pub fn write_flow_matrix<W: Write>(zones: &ZoneSet, m: &FlowMatrix, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(FLOWS_HEADER).map_err(csv_err)?;
    for (o, d, c) in m.nonzero() {
        wtr.write_record([
            zones.get(o).id.as_str(),
            zones.get(d).id.as_str(),
            &c.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(csv_err)
}

pub fn write_marginals<W: Write>(zones: &ZoneSet, m: &Marginals, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(MARGINALS_HEADER).map_err(csv_err)?;
    for (pos, z) in zones.zones().iter().enumerate() {
        wtr.write_record([
            z.id.as_str(),
            &m.inflow[pos].to_string(),
            &m.outflow[pos].to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(csv_err)
}

/// Undirected contiguity graph over zone positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    /// Sorted, deduplicated pairs with `a < b`.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl AdjacencyGraph {
    /// Builds a connected graph over `n` vertices.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!(
                    "edge ({a},{b}) out of range for {n} zones"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop on zone {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let graph = Self::from_sorted(n, set.into_iter().collect());
        let sizes = graph.component_sizes();
        if sizes.len() > 1 {
            return Err(Error::Disconnected { sizes });
        }
        Ok(graph)
    }

    fn from_sorted(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        AdjacencyGraph { edges, neighbors }
    }

    /// Rook-contiguity grid, zones numbered row-major.
    pub fn rook_grid(rows: usize, cols: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Self::new(rows * cols, edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn zone_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Sizes of connected components, largest first.
    pub fn component_sizes(&self) -> Vec<usize> {
        let n = self.zone_count();
        let mut seen = vec![false; n];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for &u in &self.neighbors[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// Writes `adjacency.csv` content.
    pub fn write_csv<W: Write>(&self, zones: &ZoneSet, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(ADJACENCY_HEADER).map_err(csv_err)?;
        for &(a, b) in &self.edges {
            wtr.write_record([zones.get(a).id.as_str(), zones.get(b).id.as_str()])
                .map_err(csv_err)?;
        }
        wtr.flush().map_err(csv_err)
    }
}

/// Reads `adjacency.csv` and verifies connectivity.
pub fn load_adjacency<R: Read>(input: CsvInput<R>, zones: &ZoneSet) -> Result<AdjacencyGraph> {
    let mut recs = Records::open(input, &ADJACENCY_HEADER)?;
    let mut edges = Vec::new();
    recs.for_each(|src, line, r| {
        let a = lookup(zones, src, line, "zone_a", &r[0])?;
        let b = lookup(zones, src, line, "zone_b", &r[1])?;
        if a == b {
            return Err(Error::validation(
                src,
                line,
                format!("self-loop on zone `{}`", &r[0]),
            ));
        }
        edges.push((a, b));
        Ok(())
    })?;
    AdjacencyGraph::new(zones.len(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(name: &str, s: &'static str) -> CsvInput<&'static [u8]> {
        CsvInput::new(name, s.as_bytes())
    }

    const TWO_ZONES: &str = "zone_id,name,population,area_km2\nA,Alpha,100,50\nB,,100,10\n";

    fn two_zone_set() -> ZoneSet {
        read_zones(input("zones.csv", TWO_ZONES)).unwrap()
    }

    #[test]
    fn two_zone_full_matrix() {
        let loaded = load_system(
            input("zones.csv", TWO_ZONES),
            FlowSource::Matrix(input(
                "flows.csv",
                "origin,destination,count\nA,B,10\nB,A,4\n",
            )),
            SystemMeta::default(),
        )
        .unwrap();
        assert_eq!(loaded.system.migrants(), 14);
        assert_eq!(loaded.system.population(), 200.0);
        assert_eq!(loaded.diagonal_dropped, 0);
        assert!(loaded.system.is_full_matrix());
        assert_eq!(loaded.system.zones.get(0).name.as_deref(), Some("Alpha"));
        assert_eq!(loaded.system.zones.get(1).name, None);
    }

    #[test]
    fn diagonal_rows_are_dropped_with_warning() {
        let loaded = load_system(
            input("zones.csv", TWO_ZONES),
            FlowSource::Matrix(input(
                "flows.csv",
                "origin,destination,count\nA,B,10\nA,A,7\nB,A,4\n",
            )),
            SystemMeta::default(),
        )
        .unwrap();
        assert_eq!(loaded.diagonal_dropped, 1);
        assert_eq!(loaded.system.migrants(), 14);
        assert_eq!(loaded.system.flows.inflows(), vec![4, 10]);
    }

    #[test]
    fn marginal_imbalance_is_rejected() {
        let err = load_system(
            input("zones.csv", TWO_ZONES),
            FlowSource::Marginals(input("m.csv", "zone_id,inflow,outflow\nA,5,4\nB,3,3\n")),
            SystemMeta::default(),
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("marginal imbalance"), "{msg}");
        assert!(msg.contains("8") && msg.contains("7"), "{msg}");
    }

    #[test]
    fn flow_errors_cite_line_and_rule() {
        let zones = two_zone_set();
        let cases = [
            ("origin,destination,count\nA,C,1\n", "unknown zone id `C`"),
            ("origin,destination,count\nA,B,-3\n", "negative count"),
            ("origin,destination,count\nA,B,1\nA,B,2\n", "duplicate pair"),
            (
                "origin,destination,count\nA,B,1.5\n",
                "not a non-negative integer",
            ),
        ];
        for (body, needle) in cases {
            let err =
                read_flow_matrix(CsvInput::new("flows.csv", body.as_bytes()), &zones).unwrap_err();
            let msg = err.to_string();
            assert!(msg.starts_with("flows.csv:"), "{msg}");
            assert!(msg.contains(needle), "{msg}");
        }
        let err = read_flow_matrix(
            CsvInput::new(
                "flows.csv",
                "origin,destination,count\nA,B,1\nA,B,2\n".as_bytes(),
            ),
            &zones,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn zone_errors() {
        let cases = [
            (
                "zone_id,name,population,area_km2\nA,,1,0\nB,,1,1\n",
                "area must be > 0",
            ),
            (
                "zone_id,name,population,area_km2\nA,,1,-2\nB,,1,1\n",
                "area must be > 0",
            ),
            (
                "zone_id,name,population,area_km2\nA,,1,1\nA,,1,1\n",
                "duplicate zone id",
            ),
            (
                "zone_id,name,population,area_km2\nA,,-1,1\nB,,1,1\n",
                "negative population",
            ),
            (
                "zone_id,name,population,area_km2\nA,,1,1\n",
                "at least 2 zones",
            ),
            (
                "zone_id,name,population,area_km2\nA,,0,1\nB,,0,1\n",
                "total population",
            ),
            ("id,name,population,area\nA,,1,1\n", "expected header"),
        ];
        for (body, needle) in cases {
            let err = read_zones(CsvInput::new("zones.csv", body.as_bytes())).unwrap_err();
            assert!(err.to_string().contains(needle), "{err}");
        }
    }

    #[test]
    fn adjacency_dedup_and_connectivity() {
        let zones = two_zone_set();
        let g = load_adjacency(input("adj.csv", "zone_a,zone_b\nA,B\n"), &zones).unwrap();
        assert_eq!(g.edge_count(), 1);
        let g = load_adjacency(input("adj.csv", "zone_a,zone_b\nA,B\nB,A\n"), &zones).unwrap();
        assert_eq!(g.edge_count(), 1);

        let three = read_zones(input(
            "zones.csv",
            "zone_id,name,population,area_km2\nA,,1,1\nB,,1,1\nC,,1,1\n",
        ))
        .unwrap();
        let err = load_adjacency(input("adj.csv", "zone_a,zone_b\nA,B\n"), &three).unwrap_err();
        assert_eq!(err, Error::Disconnected { sizes: vec![2, 1] });
        let err = load_adjacency(input("adj.csv", "zone_a,zone_b\nA,A\n"), &three).unwrap_err();
        assert!(err.to_string().contains("self-loop"));
        let err = load_adjacency(input("adj.csv", "zone_a,zone_b\nA,Z\n"), &three).unwrap_err();
        assert!(err.to_string().contains("unknown zone id `Z`"));
    }

    #[test]
    fn density_examples() {
        let zones = ZoneSet::new(vec![
            Zone {
                id: "a".into(),
                name: None,
                population: 1000.0,
                area: 50.0,
            },
            Zone {
                id: "b".into(),
                name: None,
                population: 0.0,
                area: 10.0,
            },
            Zone {
                id: "c".into(),
                name: None,
                population: 100.0,
                area: 100.0,
            },
        ])
        .unwrap();
        let d = densities(&zones);
        assert_eq!(d, vec![20.0, 0.0, 1.0]);
        assert_eq!(d[2].log10(), 0.0);
    }

    #[test]
    fn write_then_reload_is_identity() {
        let loaded = load_system(
            input("zones.csv", TWO_ZONES),
            FlowSource::Matrix(input(
                "flows.csv",
                "origin,destination,count\nA,B,10\nB,A,4\n",
            )),
            SystemMeta::default(),
        )
        .unwrap();
        let (mut zbuf, mut fbuf) = (Vec::new(), Vec::new());
        loaded.system.write_zones(&mut zbuf).unwrap();
        loaded.system.write_flows(&mut fbuf).unwrap();
        let again = load_system(
            CsvInput::new("zones.csv", zbuf.as_slice()),
            FlowSource::Matrix(CsvInput::new("flows.csv", fbuf.as_slice())),
            SystemMeta::default(),
        )
        .unwrap();
        assert_eq!(again.system, loaded.system);
    }
}
