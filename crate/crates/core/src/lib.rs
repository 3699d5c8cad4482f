//! Redistributive impact of internal migration from zone-level flow data.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`] loads and validates zones, flows and contiguity graphs.
//! * [`indices`] computes the system-wide CMI, MEI and ANMR plus per-zone net
//!   migration rates.
//! * [`aggregation`] draws random contiguous partitions, merges systems and
//!   summarises indices across a ladder of scales.
//! * [`impact`] turns scale summaries into the INMI against a benchmark and
//!   clusters countries in the (C, R) plane.
//! * [`regression`] fits population-weighted NMR-on-log-density regressions
//!   with sandwich standard errors and classifies redistribution regimes.
//! * [`report`] serialises results to the CSV/JSON export formats.
//!
//! Numerical routines are generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` aliases below name the usual double-precision instantiations.

pub mod aggregation;
pub mod data;
pub mod error;
pub mod impact;
pub mod indices;
pub mod regression;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod synthetic;

pub use aggregation::{
    aggregate_system, default_ladder, fit_cmi_slope, mean_mei, random_contiguous_partition,
    sample_seed, scale_ladder, scale_profile, CourgeauFit, Partition, ScalePoint, ScaleProfile,
};
pub use data::{
    densities, load_adjacency, load_system, AdjacencyGraph, CsvInput, FlowData, FlowMatrix,
    FlowSource, LoadedSystem, Marginals, MigrationSystem, SystemMeta, Zone, ZoneSet,
};
pub use error::{Error, Result};
pub use impact::{
    adjusted_rand_index, compute_inmi, evaluate_k, kmeans_cluster, seed_stability, Benchmark,
    ClusterResult, CountrySummary, InmiResult, KDiagnostics, LabeledPoint, StabilityReport,
};
pub use indices::{
    aggregate_net_migration_rate, crude_migration_intensity, migration_effectiveness_index,
    net_migration_rates, system_indices, NetMigrationRates, SystemIndices,
};
pub use regression::{
    classify_redistribution, classify_slope, density_regression, time_series_slopes,
    two_sided_p_value, weighted_ols, zscore_table, DensityRegressionResult, RedistributionRegime,
    Regime, RegimeFlag, RegressionVariant, WeightedOlsFit, YearFit, ZBin, ZScoreTable,
};
pub use scalar::Scalar;

pub type SystemIndicesF64 = SystemIndices<f64>;
pub type NetMigrationRatesF64 = NetMigrationRates<f64>;
pub type ScaleProfileF64 = ScaleProfile<f64>;
pub type CourgeauFitF64 = CourgeauFit<f64>;
pub type WeightedOlsFitF64 = WeightedOlsFit<f64>;
pub type DensityRegressionResultF64 = DensityRegressionResult<f64>;
pub type ZScoreTableF64 = ZScoreTable<f64>;
pub type InmiResultF64 = InmiResult<f64>;
pub type ClusterResultF64 = ClusterResult<f64>;
pub type SystemIndicesF32 = SystemIndices<f32>;
pub type WeightedOlsFitF32 = WeightedOlsFit<f32>;
