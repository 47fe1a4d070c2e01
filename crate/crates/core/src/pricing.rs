//! Provider tariffs and the baseline (no view) cloud cost functions.
//!
//! Money is plain `f64` USD, sizes are GB, durations are hours for compute
//! and months for storage.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

/// Relative tolerance used when checking that adjacent segments meet.
const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("quantity must be a finite non-negative number, got {0}")]
    InvalidQuantity(f64),
    #[error("tariff has no segments")]
    EmptyTariff,
    #[error("first breakpoint must be 0 GB, got {0}")]
    FirstBreakpointNotZero(f64),
    #[error("breakpoints must be finite and strictly increasing (segment {0})")]
    BreakpointsNotIncreasing(usize),
    #[error("segment {0} has a negative or non-finite gradient")]
    InvalidGradient(usize),
    #[error("segment {0} has a negative or non-finite base cost")]
    InvalidBase(usize),
    #[error("tariff is discontinuous at segment {index}: expected base {expected}, got {actual}")]
    Discontinuous {
        index: usize,
        expected: f64,
        actual: f64,
    },
    #[error("instance type `{0}` has a negative or non-finite hourly price")]
    InvalidHourlyPrice(String),
    #[error("duplicate instance type `{0}`")]
    DuplicateInstanceType(String),
    #[error("catalog must list at least one instance type")]
    NoInstanceTypes,
    #[error("fleet needs at least one instance")]
    EmptyFleet,
    #[error("billed inbound transfer is not supported; inbound data is free in this model")]
    InboundTransferBilled,
    #[error("storage period must have finite non-negative size and length")]
    InvalidPeriod,
}

/// One piece of a tariff: from `start` GB onwards the cost grows by
/// `gradient` USD per GB, starting at `base` USD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub gradient: f64,
    pub base: f64,
}

impl Segment {
    #[inline]
    fn cost(&self, x: f64) -> f64 {
        self.gradient * (x - self.start) + self.base
    }
}

/// Continuous, non-decreasing piecewise-linear price of a volume.
///
/// Segment `e` covers `[start_e, start_{e+1})`; the last one is unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePrice {
    segments: Vec<Segment>,
}

impl PiecewisePrice {
    /// Validates explicit segments, including the base costs.
    pub fn new(segments: Vec<Segment>) -> Result<Self, PricingError> {
        let first = segments.first().ok_or(PricingError::EmptyTariff)?;
        if first.start != 0.0 {
            return Err(PricingError::FirstBreakpointNotZero(first.start));
        }
        for (i, s) in segments.iter().enumerate() {
            if !s.start.is_finite() {
                return Err(PricingError::BreakpointsNotIncreasing(i));
            }
            if !(s.gradient.is_finite() && s.gradient >= 0.0) {
                return Err(PricingError::InvalidGradient(i));
            }
            if !(s.base.is_finite() && s.base >= 0.0) {
                return Err(PricingError::InvalidBase(i));
            }
        }
        for (i, pair) in segments.windows(2).enumerate() {
            let (prev, next) = (&pair[0], &pair[1]);
            if next.start <= prev.start {
                return Err(PricingError::BreakpointsNotIncreasing(i + 1));
            }
            let expected = prev.cost(next.start);
            if (expected - next.base).abs() > CONTINUITY_TOL * expected.abs().max(1.0) {
                return Err(PricingError::Discontinuous {
                    index: i + 1,
                    expected,
                    actual: next.base,
                });
            }
        }
        Ok(Self { segments })
    }

    /// Builds a tariff from `(from_gb, usd_per_gb)` pairs. The first base
    /// cost is 0 and the others follow from continuity.
    pub fn from_rates(rates: &[(f64, f64)]) -> Result<Self, PricingError> {
        let mut segments: Vec<Segment> = Vec::with_capacity(rates.len());
        for &(start, gradient) in rates {
            let base = match segments.last() {
                Some(prev) => prev.cost(start),
                None => 0.0,
            };
            segments.push(Segment {
                start,
                gradient,
                base,
            });
        }
        Self::new(segments)
    }

    /// Single segment tariff: `rate` USD per GB from zero.
    pub fn flat(rate: f64) -> Result<Self, PricingError> {
        Self::from_rates(&[(0.0, rate)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Index of the segment that prices `x` (`x` must be non-negative).
    pub fn segment_index(&self, x: f64) -> usize {
        self.segments.partition_point(|s| s.start <= x).saturating_sub(1)
    }

    /// Price of `x` GB.
    pub fn eval(&self, x: f64) -> Result<f64, PricingError> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(PricingError::InvalidQuantity(x));
        }
        Ok(self.at(x))
    }

    /// Unchecked evaluation for quantities already known to be valid.
    #[inline]
    pub(crate) fn at(&self, x: f64) -> f64 {
        self.segments[self.segment_index(x)].cost(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceType {
    pub name: String,
    /// USD per hour.
    pub hourly_price: f64,
}

impl InstanceType {
    pub fn new(name: impl Into<String>, hourly_price: f64) -> Result<Self, PricingError> {
        let name = name.into();
        if !(hourly_price.is_finite() && hourly_price >= 0.0) {
            return Err(PricingError::InvalidHourlyPrice(name));
        }
        Ok(Self { name, hourly_price })
    }
}

/// `count` identical instances of one type.
#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    instance: InstanceType,
    count: u32,
}

impl Fleet {
    pub fn new(instance: InstanceType, count: u32) -> Result<Self, PricingError> {
        if count == 0 {
            return Err(PricingError::EmptyFleet);
        }
        Ok(Self { instance, count })
    }

    pub fn instance(&self) -> &InstanceType {
        &self.instance
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    /// USD for one hour of the whole fleet.
    pub fn hourly_rate(&self) -> f64 {
        self.instance.hourly_price * f64::from(self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StorageMode {
    /// Every instance holds its own volume (EBS): cost scales with the fleet.
    PerInstance,
    /// One shared store (S3, Azure storage): billed once.
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageTariff {
    /// USD per GB-month, as a function of stored GB.
    pub price: PiecewisePrice,
    pub mode: StorageMode,
}

impl StorageTariff {
    /// Number of times the stored volume is billed for this fleet.
    pub fn billed_copies(&self, fleet: &Fleet) -> f64 {
        match self.mode {
            StorageMode::PerInstance => f64::from(fleet.count()),
            StorageMode::Global => 1.0,
        }
    }
}

/// Compute, transfer and storage tariffs of one provider.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderCatalog {
    name: String,
    compute: Vec<InstanceType>,
    transfer_out: PiecewisePrice,
    storage: StorageTariff,
}

impl ProviderCatalog {
    pub fn new(
        name: impl Into<String>,
        compute: Vec<InstanceType>,
        transfer_out: PiecewisePrice,
        transfer_in_free: bool,
        storage: StorageTariff,
    ) -> Result<Self, PricingError> {
        if !transfer_in_free {
            return Err(PricingError::InboundTransferBilled);
        }
        if compute.is_empty() {
            return Err(PricingError::NoInstanceTypes);
        }
        for (i, it) in compute.iter().enumerate() {
            if compute[..i].iter().any(|o| o.name == it.name) {
                return Err(PricingError::DuplicateInstanceType(it.name.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            compute,
            transfer_out,
            storage,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn compute(&self) -> &[InstanceType] {
        &self.compute
    }

    pub fn instance_type(&self, name: &str) -> Option<&InstanceType> {
        self.compute.iter().find(|it| it.name == name)
    }

    pub fn transfer_out(&self) -> &PiecewisePrice {
        &self.transfer_out
    }

    /// Always true: inbound transfers are free in every supported catalog.
    pub fn transfer_in_free(&self) -> bool {
        true
    }

    pub fn storage(&self) -> &StorageTariff {
        &self.storage
    }
}

/// Storage held at a constant size for some months.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoragePeriod {
    pub size: f64,
    pub months: f64,
}

impl StoragePeriod {
    pub fn new(size: f64, months: f64) -> Result<Self, PricingError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(ok(size) && ok(months)) {
            return Err(PricingError::InvalidPeriod);
        }
        Ok(Self { size, months })
    }
}

/// Outbound transfer cost of `download_total` GB; uploads are free.
pub fn transfer_cost(download_total: f64, catalog: &ProviderCatalog) -> Result<f64, PricingError> {
    catalog.transfer_out.eval(download_total)
}

/// Cost of running every instance of `fleet` for `total_hours`.
pub fn compute_cost(total_hours: f64, fleet: &Fleet) -> Result<f64, PricingError> {
    if !(total_hours.is_finite() && total_hours >= 0.0) {
        return Err(PricingError::InvalidQuantity(total_hours));
    }
    Ok(total_hours * fleet.hourly_rate())
}

/// Storage cost summed over `periods`.
pub fn storage_cost(
    periods: &[StoragePeriod],
    fleet: &Fleet,
    catalog: &ProviderCatalog,
) -> Result<f64, PricingError> {
    let tariff = &catalog.storage;
    let copies = tariff.billed_copies(fleet);
    let mut total = 0.0;
    for p in periods {
        let p = StoragePeriod::new(p.size, p.months)?;
        total += tariff.price.eval(p.size)? * p.months * copies;
    }
    Ok(total)
}
