//! System-wide migration indices and per-zone net migration rates.
//!
//! All rates are percentages (per 100 persons or per 100 migrants).

use crate::data::MigrationSystem;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemIndices<T> {
    /// Crude migration intensity, migrants per 100 population.
    pub cmi: T,
    /// Migration effectiveness index, net redistribution per 100 migrants.
    pub mei: T,
    /// Aggregate net migration rate, net redistribution per 100 population.
    pub anmr: T,
    /// Inter-zone migrants, M.
    pub m: u64,
    /// Population at risk, P.
    pub p: f64,
    /// Half the sum of absolute net balances, in persons.
    pub half_abs_net: u64,
}

impl<T: Scalar> SystemIndices<T> {
    /// Absolute gap between ANMR and CMI·MEI/100.
    pub fn identity_gap(&self) -> T {
        (self.anmr - self.cmi * self.mei / T::hundred()).abs()
    }
}

/// Per-zone net migration, in percent of local population and in persons.
#[derive(Debug, Clone, PartialEq)]
pub struct NetMigrationRates<T> {
    pub zone_ids: Vec<String>,
    pub rates: Vec<T>,
    pub net: Vec<i64>,
    pub populations: Vec<f64>,
}

impl<T: Scalar> NetMigrationRates<T> {
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Population-weighted mean of the rates; zero for a closed system.
    pub fn weighted_mean(&self) -> T {
        let p: f64 = self.populations.iter().sum();
        let s: T = self
            .rates
            .iter()
            .zip(&self.populations)
            .map(|(&r, &w)| r * T::of(w))
            .sum();
        s / T::of(p)
    }
}

/// Σ|D_i − O_i| / 2. Exact: for a closed system the absolute balances sum to an even number.
fn half_abs_net(system: &MigrationSystem) -> u64 {
    let total: u64 = system
        .flows
        .net_balances()
        .iter()
        .map(|b| b.unsigned_abs())
        .sum();
    total / 2
}

/// CMI = 100 · M / P.
pub fn crude_migration_intensity<T: Scalar>(system: &MigrationSystem) -> T {
    T::hundred() * T::of_u64(system.migrants()) / T::of(system.population())
}

/// MEI = 100 · ½Σ|D_i − O_i| / M. Undefined when nobody migrates.
pub fn migration_effectiveness_index<T: Scalar>(system: &MigrationSystem) -> Result<T> {
    let m = system.migrants();
    if m == 0 {
        return Err(Error::UndefinedIndex {
            index: "MEI",
            reason: "system has no inter-zone migration (M = 0)",
        });
    }
    Ok(T::hundred() * T::of_u64(half_abs_net(system)) / T::of_u64(m))
}

/// ANMR = 100 · ½Σ|D_i − O_i| / P.
pub fn aggregate_net_migration_rate<T: Scalar>(system: &MigrationSystem) -> T {
    T::hundred() * T::of_u64(half_abs_net(system)) / T::of(system.population())
}

/// Net migration rate of every zone. Fails on a zone with zero population.
pub fn net_migration_rates<T: Scalar>(system: &MigrationSystem) -> Result<NetMigrationRates<T>> {
    let net = system.flows.net_balances();
    let zones = system.zones.zones();
    let mut rates = Vec::with_capacity(net.len());
    for (z, &b) in zones.iter().zip(&net) {
        if z.population <= 0.0 {
            return Err(Error::ZeroPopulation {
                zone_id: z.id.clone(),
            });
        }
        rates.push(T::hundred() * T::of(b as f64) / T::of(z.population));
    }
    Ok(NetMigrationRates {
        zone_ids: zones.iter().map(|z| z.id.clone()).collect(),
        rates,
        net,
        populations: zones.iter().map(|z| z.population).collect(),
    })
}

/// CMI, MEI and ANMR from a single pass over the marginals.
pub fn system_indices<T: Scalar>(system: &MigrationSystem) -> Result<SystemIndices<T>> {
    let m = system.migrants();
    if m == 0 {
        return Err(Error::UndefinedIndex {
            index: "MEI",
            reason: "system has no inter-zone migration (M = 0)",
        });
    }
    let p = system.population();
    let h = half_abs_net(system);
    let (tm, tp, th) = (T::of_u64(m), T::of(p), T::of_u64(h));
    let idx = SystemIndices {
        cmi: T::hundred() * tm / tp,
        mei: T::hundred() * th / tm,
        anmr: T::hundred() * th / tp,
        m,
        p,
        half_abs_net: h,
    };
    debug_assert!(
        idx.identity_gap() <= T::epsilon() * T::of(8.0) * idx.anmr.max(T::min_positive_value()),
        "ANMR != CMI*MEI/100: {idx:?}"
    );
    Ok(idx)
}
