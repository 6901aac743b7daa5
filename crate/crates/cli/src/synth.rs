//! Reproducible synthetic catalogs and shipment histories.
//!
//! A *universe* fixes product ids, dimensions and long-run shipment rates.
//! Each period (training, validation, test, extra training draws) is an
//! independent draw from that universe on its own random stream, so
//! different periods share products but not counts.
//!
//! Profiles:
//!
//! * `skewed`: dims come from a three-mode log-normal mixture.
//!   Small mode: weight 0.60, medians 20 x 14 x 7 cm.
//!   Medium mode: weight 0.28, medians 38 x 28 x 16 cm.
//!   Large mode: weight 0.12, medians 70 x 50 x 35 cm.
//!   Each dim is `median * exp(0.30 * z)`. Rates are Pareto(scale 1, shape
//!   1.3) multiplied by `(V_small / v)^0.9`, where `V_small` is the small
//!   mode's median volume, so small products ship far more often.
//! * `uniform`: a single log-normal mode with medians 35 x 25 x 15 cm and
//!   sigma 0.5, rates Pareto(1, 1.5) independent of size.
//!
//! Dims are rounded to 0.1 cm with a 0.5 cm floor and sorted so that
//! length >= width >= height. Per-period counts are
//! `Poisson(total * rate_j * noise_j / sum(rate))` with period noise
//! `noise_j = exp(0.25 * z)`. Training velocities are the training-period
//! counts, so a catalog velocity is an integer and may be zero.

use std::fmt;
use std::str::FromStr;

use boxsize::{Catalog, Dims, Product, ShipmentRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Pareto, Poisson, StandardNormal};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Skewed,
    Uniform,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown profile `{0}` (expected skewed or uniform)")]
pub struct UnknownProfile(pub String);

impl FromStr for Profile {
    type Err = UnknownProfile;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "skewed" => Ok(Profile::Skewed),
            "uniform" => Ok(Profile::Uniform),
            other => Err(UnknownProfile(other.to_string())),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Skewed => "skewed",
            Profile::Uniform => "uniform",
        })
    }
}

struct Mode {
    weight: f64,
    median: [f64; 3],
    sigma: f64,
}

const SKEWED: [Mode; 3] = [
    Mode { weight: 0.60, median: [20.0, 14.0, 7.0], sigma: 0.30 },
    Mode { weight: 0.28, median: [38.0, 28.0, 16.0], sigma: 0.30 },
    Mode { weight: 0.12, median: [70.0, 50.0, 35.0], sigma: 0.30 },
];
const UNIFORM: [Mode; 1] = [Mode { weight: 1.0, median: [35.0, 25.0, 15.0], sigma: 0.5 }];

const PERIOD_NOISE: f64 = 0.25;

/// Random streams within one seed.
pub const STREAM_UNIVERSE: u64 = 0;
pub const STREAM_TRAIN: u64 = 1;
pub const STREAM_VALIDATION: u64 = 2;
pub const STREAM_TEST: u64 = 3;
/// Extra training draws use `STREAM_EXTRA_TRAIN + i`.
pub const STREAM_EXTRA_TRAIN: u64 = 100;

/// Products and their long-run relative shipment rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Universe {
    pub seed: u64,
    pub products: Vec<(String, Dims)>,
    pub rates: Vec<f64>,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn round_dim(x: f64) -> f64 {
    ((x * 10.0).round() / 10.0).max(0.5)
}

pub fn universe(n: usize, seed: u64, profile: Profile) -> Universe {
    let modes: &[Mode] = match profile {
        Profile::Skewed => &SKEWED,
        Profile::Uniform => &UNIFORM,
    };
    let (shape, size_exp) = match profile {
        Profile::Skewed => (1.3, 0.9),
        Profile::Uniform => (1.5, 0.0),
    };
    let small_volume: f64 = modes[0].median.iter().product();
    let pareto = Pareto::new(1.0, shape).expect("valid pareto");
    let mut r = rng(seed, STREAM_UNIVERSE);
    let width = n.to_string().len().max(5);
    let mut products = Vec::with_capacity(n);
    let mut rates = Vec::with_capacity(n);
    for i in 0..n {
        let mut u: f64 = r.random();
        let mode = modes
            .iter()
            .find(|m| {
                u -= m.weight;
                u < 0.0
            })
            .unwrap_or(&modes[modes.len() - 1]);
        let mut d = [0.0; 3];
        for (a, x) in d.iter_mut().enumerate() {
            let z: f64 = r.sample(StandardNormal);
            *x = round_dim(mode.median[a] * (mode.sigma * z).exp());
        }
        d.sort_by(|a, b| b.total_cmp(a));
        let dims = Dims::new(d[0], d[1], d[2]).expect("positive by construction");
        let base: f64 = pareto.sample(&mut r);
        rates.push(base * (small_volume / dims.volume()).powf(size_exp));
        products.push((format!("P{i:0width$}"), dims));
    }
    Universe { seed, products, rates }
}

/// Shipment counts for one period, one entry per product (zeros included).
pub fn draw_counts(u: &Universe, stream: u64, total: f64) -> Vec<u64> {
    let sum: f64 = u.rates.iter().sum();
    let noise = LogNormal::new(0.0, PERIOD_NOISE).expect("valid lognormal");
    let mut r = rng(u.seed, stream);
    u.rates
        .iter()
        .map(|&rate| {
            let lambda = total * rate * noise.sample(&mut r) / sum;
            if lambda > 0.0 && lambda.is_finite() {
                Poisson::new(lambda).expect("positive lambda").sample(&mut r) as u64
            } else {
                0
            }
        })
        .collect()
}

/// Catalog whose velocities are the counts drawn on `stream`.
pub fn catalog_for(u: &Universe, stream: u64, total: f64) -> Catalog {
    let counts = draw_counts(u, stream, total);
    let products = u
        .products
        .iter()
        .zip(counts)
        .map(|((id, d), c)| Product::new(id.clone(), *d, c as f64).expect("non-negative count"))
        .collect();
    Catalog::new(products).expect("ids are unique")
}

/// Shipment records (products with at least one shipment) drawn on `stream`.
pub fn shipments_for(u: &Universe, stream: u64, total: f64) -> Vec<ShipmentRecord> {
    u.products
        .iter()
        .zip(draw_counts(u, stream, total))
        .filter(|&(_, c)| c > 0)
        .map(|((id, _), c)| ShipmentRecord::new(id.clone(), c))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub universe: Universe,
    /// Velocities are training-period counts.
    pub catalog: Catalog,
    pub validation: Vec<ShipmentRecord>,
    pub test: Vec<ShipmentRecord>,
}

/// Catalog plus validation and test histories, each period drawing about
/// `shipments` shipments in expectation.
pub fn gen_synthetic(n: usize, seed: u64, profile: Profile, shipments: f64) -> Synthetic {
    assert!(n >= 1, "need at least one product");
    let u = universe(n, seed, profile);
    Synthetic {
        catalog: catalog_for(&u, STREAM_TRAIN, shipments),
        validation: shipments_for(&u, STREAM_VALIDATION, shipments),
        test: shipments_for(&u, STREAM_TEST, shipments),
        universe: u,
    }
}

/// Fraction of shipments whose product volume is at or below the median
/// product volume of the catalog.
pub fn small_share(catalog: &Catalog, shipments: &[ShipmentRecord]) -> f64 {
    let mut vols: Vec<f64> = catalog.products().iter().map(|p| p.dims.volume()).collect();
    vols.sort_by(f64::total_cmp);
    let median = vols[(vols.len() - 1) / 2];
    let (mut small, mut all) = (0u64, 0u64);
    for s in shipments {
        let j = catalog.index_of(&s.product_id).expect("shipment of a catalog product");
        all += s.count;
        if catalog.dims(j).volume() <= median {
            small += s.count;
        }
    }
    small as f64 / all.max(1) as f64
}
