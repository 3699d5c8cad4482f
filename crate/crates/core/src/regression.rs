//! Population-weighted regression of net migration rates on log density.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::{densities, MigrationSystem};
use crate::error::{Error, Result};
use crate::indices::{net_migration_rates, NetMigrationRates};
use crate::scalar::Scalar;

pub const DEFAULT_ALPHA: f64 = 0.05;
/// Below this many zones the density slope is no longer scale-robust.
pub const RECOMMENDED_MIN_ZONES: usize = 30;
/// |β| above which an insignificant slope is flagged as unusual.
pub const UNUSUAL_SLOPE: f64 = 0.5;

/// Weighted least-squares line with HC0 sandwich standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedOlsFit<T> {
    pub slope: T,
    pub intercept: T,
    pub robust_se_slope: T,
    pub robust_se_intercept: T,
    pub t_slope: T,
    pub t_intercept: T,
    pub p_slope: T,
    pub p_intercept: T,
    pub adj_r_squared: T,
    pub n: usize,
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
pub fn two_sided_p_value(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// t statistic; a zero standard error gives 0 for a zero coefficient and ±∞ otherwise.
fn t_stat<T: Scalar>(coef: T, se: T) -> T {
    if se > T::zero() {
        coef / se
    } else if coef == T::zero() {
        T::zero()
    } else {
        coef.signum() * T::infinity()
    }
}

/// Minimises Σ w_i (y_i − α − β x_i)².
///
/// The covariance is (XᵀWX)⁻¹ XᵀW diag(e²) WX (XᵀWX)⁻¹ with raw residuals e,
/// evaluated in centred coordinates. p-values use Student t with n − 2 df.
pub fn weighted_ols<T: Scalar>(x: &[T], y: &[T], w: &[T]) -> Result<WeightedOlsFit<T>> {
    let n = x.len();
    if y.len() != n || w.len() != n {
        return Err(Error::invalid("x, y and w must have equal lengths"));
    }
    if n < 3 {
        return Err(Error::Degenerate(format!(
            "need at least 3 observations, got {n}"
        )));
    }
    if let Some(i) = w.iter().position(|&wi| !(wi > T::zero() && wi.is_finite())) {
        return Err(Error::invalid(format!("weight {i} is not positive")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("x and y must be finite"));
    }

    let sw: T = w.iter().copied().sum();
    let xbar = x.iter().zip(w).map(|(&xi, &wi)| wi * xi).sum::<T>() / sw;
    let ybar = y.iter().zip(w).map(|(&yi, &wi)| wi * yi).sum::<T>() / sw;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for i in 0..n {
        let (dx, dy) = (x[i] - xbar, y[i] - ybar);
        sxx = sxx + w[i] * dx * dx;
        sxy = sxy + w[i] * dx * dy;
        syy = syy + w[i] * dy * dy;
    }
    if sxx.is_nan() || sxx <= T::zero() || x.iter().all(|&xi| xi == x[0]) {
        return Err(Error::Degenerate("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;

    // Centred design [1, x − x̄] makes XᵀWX diagonal: diag(Σw, Sxx).
    let mut m00 = T::zero();
    let mut m01 = T::zero();
    let mut m11 = T::zero();
    let mut ssr = T::zero();
    for i in 0..n {
        let e = y[i] - intercept - slope * x[i];
        let dx = x[i] - xbar;
        let we2 = w[i] * w[i] * e * e;
        m00 = m00 + we2;
        m01 = m01 + we2 * dx;
        m11 = m11 + we2 * dx * dx;
        ssr = ssr + w[i] * e * e;
    }
    let var_level = m00 / (sw * sw);
    let cov_level_slope = m01 / (sw * sxx);
    let var_slope = m11 / (sxx * sxx);
    // α = level − β·x̄
    let var_intercept = var_level + xbar * xbar * var_slope - T::of(2.0) * xbar * cov_level_slope;
    let robust_se_slope = var_slope.max(T::zero()).sqrt();
    let robust_se_intercept = var_intercept.max(T::zero()).sqrt();

    let t_slope = t_stat(slope, robust_se_slope);
    let t_intercept = t_stat(intercept, robust_se_intercept);
    let df = (n - 2) as f64;
    let p_of = |t: T| {
        if t == T::zero() {
            T::one()
        } else {
            T::of(two_sided_p_value(t.as_f64(), df))
        }
    };

    let adj_r_squared = if syy > T::zero() {
        let r2 = T::one() - ssr / syy;
        T::one() - (T::one() - r2) * T::of_usize(n - 1) / T::of_usize(n - 2)
    } else {
        T::zero()
    };

    Ok(WeightedOlsFit {
        slope,
        intercept,
        robust_se_slope,
        robust_se_intercept,
        t_slope,
        t_intercept,
        p_slope: p_of(t_slope),
        p_intercept: p_of(t_intercept),
        adj_r_squared,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegressionVariant {
    RawRate,
    ZScore,
}

impl RegressionVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            RegressionVariant::RawRate => "raw",
            RegressionVariant::ZScore => "zscore",
        }
    }
}

impl std::str::FromStr for RegressionVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(RegressionVariant::RawRate),
            "zscore" => Ok(RegressionVariant::ZScore),
            other => Err(Error::invalid(format!(
                "unknown variant `{other}` (raw|zscore)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZonePoint<T> {
    pub zone_id: String,
    /// Percent of local population.
    pub nmr: T,
    pub z_nmr: T,
    pub log10_density: T,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRegressionResult<T> {
    pub fit: WeightedOlsFit<T>,
    pub variant: RegressionVariant,
    pub records: Vec<ZonePoint<T>>,
    /// Set when the system has fewer than the recommended 30 zones.
    pub small_sample: bool,
}

/// Regresses NMR (or its z-score) on log₁₀ density, weighted by population.
pub fn density_regression<T: Scalar>(
    system: &MigrationSystem,
    variant: RegressionVariant,
) -> Result<DensityRegressionResult<T>> {
    let n = system.len();
    if n < 3 {
        return Err(Error::Degenerate(format!(
            "density regression needs at least 3 zones, got {n}"
        )));
    }
    let rates: NetMigrationRates<T> = net_migration_rates(system)?;
    let (mean, sd) = mean_and_sample_sd(&rates.rates);
    let z: Vec<T> = rates
        .rates
        .iter()
        .map(|&r| {
            if sd > T::zero() {
                (r - mean) / sd
            } else {
                T::zero()
            }
        })
        .collect();
    let x: Vec<T> = densities(&system.zones)
        .into_iter()
        .map(|d| T::of(d.log10()))
        .collect();
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::Degenerate("all zones have the same density".into()));
    }
    let w: Vec<T> = rates.populations.iter().map(|&p| T::of(p)).collect();
    let y = match variant {
        RegressionVariant::RawRate => &rates.rates,
        RegressionVariant::ZScore => &z,
    };
    let fit = weighted_ols(&x, y, &w)?;
    let records = (0..n)
        .map(|i| ZonePoint {
            zone_id: rates.zone_ids[i].clone(),
            nmr: rates.rates[i],
            z_nmr: z[i],
            log10_density: x[i],
            weight: w[i],
        })
        .collect();
    Ok(DensityRegressionResult {
        fit,
        variant,
        records,
        small_sample: n < RECOMMENDED_MIN_ZONES,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Concentration,
    SpatialEquilibrium,
    Deconcentration,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Concentration => "Concentration",
            Regime::SpatialEquilibrium => "SpatialEquilibrium",
            Regime::Deconcentration => "Deconcentration",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeFlag {
    /// |β| is large but the slope is not significant.
    UnusualLargeInsignificant,
}

impl RegimeFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeFlag::UnusualLargeInsignificant => "unusual: |slope| large but insignificant",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedistributionRegime {
    pub label: Regime,
    pub slope: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub flags: Vec<RegimeFlag>,
}

/// Regime from slope sign and significance.
pub fn classify_slope(slope: f64, p_value: f64, alpha: f64) -> RedistributionRegime {
    let significant = p_value < alpha;
    let label = if !significant {
        Regime::SpatialEquilibrium
    } else if slope > 0.0 {
        Regime::Concentration
    } else if slope < 0.0 {
        Regime::Deconcentration
    } else {
        Regime::SpatialEquilibrium
    };
    let mut flags = Vec::new();
    if !significant && slope.abs() > UNUSUAL_SLOPE {
        flags.push(RegimeFlag::UnusualLargeInsignificant);
    }
    RedistributionRegime {
        label,
        slope,
        p_value,
        alpha,
        flags,
    }
}

pub fn classify_redistribution<T: Scalar>(
    fit: &WeightedOlsFit<T>,
    alpha: f64,
) -> RedistributionRegime {
    classify_slope(fit.slope.as_f64(), fit.p_slope.as_f64(), alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZBin {
    BelowMinus2,
    Minus2To0,
    ZeroTo2,
    Above2,
}

impl ZBin {
    /// z = 0 and z = ±2 fall into the bins nearer the centre, with 0 on the negative side.
    pub fn of<T: Scalar>(z: T) -> Self {
        let two = T::of(2.0);
        if z < -two {
            ZBin::BelowMinus2
        } else if z <= T::zero() {
            ZBin::Minus2To0
        } else if z <= two {
            ZBin::ZeroTo2
        } else {
            ZBin::Above2
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ZBin::BelowMinus2 => "<-2.0",
            ZBin::Minus2To0 => "-2.0–0.0",
            ZBin::ZeroTo2 => "0.0–2.0",
            ZBin::Above2 => ">2.0",
        }
    }

    /// Outer bins mark zones more than two standard deviations from the mean.
    pub fn flag(self) -> Option<&'static str> {
        match self {
            ZBin::BelowMinus2 => Some("unusually high net migration loss"),
            ZBin::Above2 => Some("unusually high net migration gain"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZScoreRow<T> {
    pub zone_id: String,
    pub nmr: T,
    pub z: T,
    pub bin: ZBin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZScoreTable<T> {
    pub rows: Vec<ZScoreRow<T>>,
    pub mean: T,
    /// Sample standard deviation (n − 1).
    pub sd: T,
}

fn mean_and_sample_sd<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::of_usize(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - T::one())).sqrt())
}

/// Standardises zone rates by the country mean and sample standard deviation.
pub fn zscore_table<T: Scalar>(rates: &NetMigrationRates<T>) -> Result<ZScoreTable<T>> {
    if rates.len() < 2 {
        return Err(Error::invalid("z-scores need at least 2 zones"));
    }
    let (mean, sd) = mean_and_sample_sd(&rates.rates);
    if sd.is_nan() || sd <= T::zero() {
        return Err(Error::Degenerate(
            "all zones have the same net migration rate".into(),
        ));
    }
    let rows = rates
        .zone_ids
        .iter()
        .zip(&rates.rates)
        .map(|(id, &nmr)| {
            let z = (nmr - mean) / sd;
            ZScoreRow {
                zone_id: id.clone(),
                nmr,
                z,
                bin: ZBin::of(z),
            }
        })
        .collect();
    Ok(ZScoreTable { rows, mean, sd })
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearFit<T> {
    pub year: i32,
    pub fit: WeightedOlsFit<T>,
}

/// One density regression per system, ordered by year.
///
/// All systems must carry the same set of zone ids.
pub fn time_series_slopes<T: Scalar>(
    systems: &[MigrationSystem],
    variant: RegressionVariant,
) -> Result<Vec<YearFit<T>>> {
    let first = systems
        .first()
        .ok_or_else(|| Error::invalid("time series needs at least one system"))?;
    for s in &systems[1..] {
        let missing = first
            .zones
            .ids()
            .find(|id| s.zones.position(id).is_none())
            .map(|id| (id, s.year))
            .or_else(|| {
                s.zones
                    .ids()
                    .find(|id| first.zones.position(id).is_none())
                    .map(|id| (id, first.year))
            });
        if let Some((id, year)) = missing {
            return Err(Error::ZoneSetMismatch {
                zone_id: id.to_string(),
                context: format!("absent from year {year}"),
            });
        }
    }
    let mut out = systems
        .iter()
        .map(|s| {
            Ok(YearFit {
                year: s.year,
                fit: density_regression(s, variant)?.fit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|f| f.year);
    Ok(out)
}
