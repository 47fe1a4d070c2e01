//! Bundled provider catalogs (2013 list prices for EC2, EBS, S3 and Azure).

use alloc::vec::Vec;

use crate::pricing::{InstanceType, PiecewisePrice, ProviderCatalog, StorageMode, StorageTariff};

/// Names accepted by [`bundled`].
pub const BUNDLED: [&str; 3] = ["ec2-ebs", "ec2-s3", "azure"];

const TB: f64 = 1024.0;

const EC2_COMPUTE: [(&str, f64); 5] = [
    ("t1.micro", 0.02),
    ("m1.small", 0.06),
    ("m1.medium", 0.12),
    ("m1.large", 0.24),
    ("m1.xlarge", 0.48),
];

const AZURE_COMPUTE: [(&str, f64); 5] = [
    ("extra-small", 0.02),
    ("small", 0.09),
    ("medium", 0.18),
    ("large", 0.36),
    ("extra-large", 0.72),
];

// Outbound bandwidth, identical for Amazon and Azure. Breakpoints are
// cumulative monthly volume.
const TRANSFER_OUT: [(f64, f64); 5] = [
    (0.0, 0.0),
    (5.0, 0.12),
    (10.0 * TB, 0.09),
    (50.0 * TB, 0.07),
    (150.0 * TB, 0.05),
];

const S3_STORAGE: [(f64, f64); 3] = [(0.0, 0.095), (TB, 0.08), (50.0 * TB, 0.07)];
const AZURE_STORAGE: [(f64, f64); 3] = [(0.0, 0.053), (TB, 0.049), (50.0 * TB, 0.045)];
const EBS_RATE: f64 = 0.10;

fn instances(table: &[(&str, f64)]) -> Vec<InstanceType> {
    table
        .iter()
        .map(|&(name, price)| InstanceType::new(name, price).expect("bundled price"))
        .collect()
}

fn tariff(rates: &[(f64, f64)]) -> PiecewisePrice {
    PiecewisePrice::from_rates(rates).expect("bundled tariff")
}

fn build(name: &str, compute: &[(&str, f64)], storage: StorageTariff) -> ProviderCatalog {
    ProviderCatalog::new(name, instances(compute), tariff(&TRANSFER_OUT), true, storage)
        .expect("bundled catalog")
}

/// EC2 compute with per-instance EBS volumes at a flat rate.
pub fn ec2_ebs() -> ProviderCatalog {
    build(
        "ec2-ebs",
        &EC2_COMPUTE,
        StorageTariff {
            price: tariff(&[(0.0, EBS_RATE)]),
            mode: StorageMode::PerInstance,
        },
    )
}

/// EC2 compute with tiered, globally billed S3 storage.
pub fn ec2_s3() -> ProviderCatalog {
    build(
        "ec2-s3",
        &EC2_COMPUTE,
        StorageTariff {
            price: tariff(&S3_STORAGE),
            mode: StorageMode::Global,
        },
    )
}

/// Azure compute with tiered, globally billed Azure storage.
pub fn azure() -> ProviderCatalog {
    build(
        "azure",
        &AZURE_COMPUTE,
        StorageTariff {
            price: tariff(&AZURE_STORAGE),
            mode: StorageMode::Global,
        },
    )
}

pub fn bundled(name: &str) -> Option<ProviderCatalog> {
    match name {
        "ec2-ebs" => Some(ec2_ebs()),
        "ec2-s3" => Some(ec2_s3()),
        "azure" => Some(azure()),
        _ => None,
    }
}

pub fn all() -> Vec<ProviderCatalog> {
    BUNDLED.iter().filter_map(|n| bundled(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        for name in BUNDLED {
            assert_eq!(bundled(name).unwrap().name(), name);
        }
        assert!(bundled("gcp").is_none());
    }

    #[test]
    fn derived_bases() {
        let s3 = ec2_s3();
        let seg = s3.storage().price.segments();
        assert!((seg[1].base - 97.28).abs() < 1e-9);
        let out = s3.transfer_out().segments();
        assert_eq!(out[1].base, 0.0);
        assert!((out[2].base - 0.12 * (10240.0 - 5.0)).abs() < 1e-9);
    }

    #[test]
    fn azure_small_price() {
        assert_eq!(azure().instance_type("small").unwrap().hourly_price, 0.09);
    }
}
