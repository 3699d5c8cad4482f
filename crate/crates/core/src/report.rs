//! CSV and JSON export formats.
//!
//! CSV floats are printed with 6 significant digits; JSON carries full
//! precision. Field order is fixed by the struct definitions.

use std::fmt::Write as _;

use serde::Serialize;

use crate::aggregation::{CourgeauFit, ScaleProfile};
use crate::impact::{ClusterResult, InmiResult, KDiagnostics};
use crate::indices::{NetMigrationRates, SystemIndices};
use crate::regression::{DensityRegressionResult, RedistributionRegime, YearFit, ZScoreTable};
use crate::scalar::Scalar;

/// Formats like C's `%.6g`.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.5e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_sig6(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

/// Replaces non-finite values so the JSON stays valid (they become `null`).
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub zone_id: String,
    pub nmr_percent: f64,
    pub net_persons: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndicesReport {
    pub cmi: f64,
    pub mei: f64,
    pub anmr: f64,
    pub m: u64,
    pub p: f64,
    pub rates: Vec<RateRow>,
}

impl IndicesReport {
    pub fn new<T: Scalar>(idx: &SystemIndices<T>, rates: &NetMigrationRates<T>) -> Self {
        IndicesReport {
            cmi: idx.cmi.as_f64(),
            mei: idx.mei.as_f64(),
            anmr: idx.anmr.as_f64(),
            m: idx.m,
            p: idx.p,
            rates: rates
                .zone_ids
                .iter()
                .zip(&rates.rates)
                .zip(&rates.net)
                .map(|((id, &r), &n)| RateRow {
                    zone_id: id.clone(),
                    nmr_percent: r.as_f64(),
                    net_persons: n,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressionReport {
    pub variant: String,
    pub slope: f64,
    pub intercept: f64,
    pub robust_se_slope: Option<f64>,
    pub t_slope: Option<f64>,
    pub p_slope: Option<f64>,
    pub adj_r2: f64,
    pub n: usize,
    pub regime: String,
    pub flags: Vec<String>,
}

impl RegressionReport {
    pub fn new<T: Scalar>(
        result: &DensityRegressionResult<T>,
        regime: &RedistributionRegime,
    ) -> Self {
        let f = &result.fit;
        let mut flags: Vec<String> = regime
            .flags
            .iter()
            .map(|f| f.as_str().to_string())
            .collect();
        if result.small_sample {
            flags.push("small sample: fewer than 30 zones".into());
        }
        RegressionReport {
            variant: result.variant.as_str().into(),
            slope: f.slope.as_f64(),
            intercept: f.intercept.as_f64(),
            robust_se_slope: finite(f.robust_se_slope.as_f64()),
            t_slope: finite(f.t_slope.as_f64()),
            p_slope: finite(f.p_slope.as_f64()),
            adj_r2: f.adj_r_squared.as_f64(),
            n: f.n,
            regime: regime.label.as_str().into(),
            flags,
        }
    }
}

/// `zone_id,nmr_percent,z,bin`
pub fn zscore_csv<T: Scalar>(table: &ZScoreTable<T>) -> String {
    let mut out = String::from("zone_id,nmr_percent,z,bin\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            csv_field(&r.zone_id),
            sig6(r.nmr.as_f64()),
            sig6(r.z.as_f64()),
            r.bin.label()
        );
    }
    out
}

/// Plot-ready regression points: `zone_id,log10_density,nmr_percent,z,weight`
pub fn regression_points_csv<T: Scalar>(result: &DensityRegressionResult<T>) -> String {
    let mut out = String::from("zone_id,log10_density,nmr_percent,z,weight\n");
    for r in &result.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&r.zone_id),
            sig6(r.log10_density.as_f64()),
            sig6(r.nmr.as_f64()),
            sig6(r.z_nmr.as_f64()),
            sig6(r.weight.as_f64())
        );
    }
    out
}

/// `n_units,samples,mean_cmi,sd_cmi,mean_mei,sd_mei,mean_anmr`
pub fn profile_csv<T: Scalar>(profile: &ScaleProfile<T>) -> String {
    let mut out = String::from("n_units,samples,mean_cmi,sd_cmi,mean_mei,sd_mei,mean_anmr\n");
    for p in &profile.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.n_units,
            p.samples,
            sig6(p.mean_cmi.as_f64()),
            sig6(p.sd_cmi.as_f64()),
            sig6(p.mean_mei.as_f64()),
            sig6(p.sd_mei.as_f64()),
            sig6(p.mean_anmr.as_f64())
        );
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub label: String,
    pub base_n: usize,
    pub master_seed: u64,
    pub ladder: Vec<usize>,
    pub samples_per_scale: usize,
    pub cmi_slope: f64,
    pub cmi_intercept: f64,
    pub cmi_r_squared: f64,
    pub min_units: usize,
    pub mean_mei: f64,
}

impl ProfileSummary {
    pub fn new<T: Scalar>(
        label: &str,
        profile: &ScaleProfile<T>,
        fit: &CourgeauFit<T>,
        min_units: usize,
        mean_mei: T,
    ) -> Self {
        ProfileSummary {
            label: label.to_string(),
            base_n: profile.base_n,
            master_seed: profile.master_seed,
            ladder: profile.points.iter().map(|p| p.n_units).collect(),
            samples_per_scale: profile.points.first().map_or(0, |p| p.samples),
            cmi_slope: fit.slope.as_f64(),
            cmi_intercept: fit.intercept.as_f64(),
            cmi_r_squared: fit.r_squared.as_f64(),
            min_units,
            mean_mei: mean_mei.as_f64(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InmiReport {
    pub label: String,
    pub cmi_slope: f64,
    pub mean_mei: f64,
    #[serde(rename = "C")]
    pub c_ratio: f64,
    #[serde(rename = "R")]
    pub r_ratio: f64,
    pub inmi: f64,
    pub benchmark: crate::impact::Benchmark,
}

impl InmiReport {
    pub fn new<T: Scalar>(
        label: &str,
        cmi_slope: T,
        mean_mei: T,
        inmi: &InmiResult<T>,
        benchmark: &crate::impact::Benchmark,
    ) -> Self {
        InmiReport {
            label: label.to_string(),
            cmi_slope: cmi_slope.as_f64(),
            mean_mei: mean_mei.as_f64(),
            c_ratio: inmi.c_ratio.as_f64(),
            r_ratio: inmi.r_ratio.as_f64(),
            inmi: inmi.inmi.as_f64(),
            benchmark: benchmark.clone(),
        }
    }
}

/// `label,C,R,inmi,cluster`; rows in label order.
pub fn cluster_csv<T: Scalar>(
    rows: &[(String, InmiResult<T>)],
    clusters: &ClusterResult<T>,
) -> String {
    let mut sorted: Vec<&(String, InmiResult<T>)> = rows.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = String::from("label,C,R,inmi,cluster\n");
    for (label, r) in sorted {
        let cluster = clusters
            .cluster_of(label)
            .map(|c| c.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(label),
            sig6(r.c_ratio.as_f64()),
            sig6(r.r_ratio.as_f64()),
            sig6(r.inmi.as_f64()),
            cluster
        );
    }
    out
}

/// `k,inertia,silhouette`; silhouette is empty when undefined.
pub fn k_diagnostics_csv<T: Scalar>(diags: &[KDiagnostics<T>]) -> String {
    let mut out = String::from("k,inertia,silhouette\n");
    for d in diags {
        let _ = writeln!(
            out,
            "{},{},{}",
            d.k,
            sig6(d.inertia.as_f64()),
            opt_sig6(d.silhouette.map(|s| s.as_f64()))
        );
    }
    out
}

/// `year,slope,robust_se,p,adj_r2,regime`
pub fn timeseries_csv<T: Scalar>(fits: &[YearFit<T>], alpha: f64) -> String {
    let mut out = String::from("year,slope,robust_se,p,adj_r2,regime\n");
    for yf in fits {
        let f = &yf.fit;
        let regime = crate::regression::classify_redistribution(f, alpha);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            yf.year,
            sig6(f.slope.as_f64()),
            sig6(f.robust_se_slope.as_f64()),
            sig6(f.p_slope.as_f64()),
            sig6(f.adj_r_squared.as_f64()),
            regime.label
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
