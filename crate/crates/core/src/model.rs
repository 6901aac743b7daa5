//! Domain types: product dimensions, catalogs, clusters and partitions.
//!
//! A [`Cluster`] always carries its tight box (the per-axis maximum over its
//! members) and its velocity sum, so the shipped volume of a cluster is an
//! O(1) lookup. Members are kept sorted by catalog index, and the catalog is
//! sorted by product id, so every derived quantity is computed in the same
//! order no matter how the cluster was assembled.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the three box axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Length,
    Width,
    Height,
}

impl Axis {
    /// Axes in tie-break order.
    pub const ALL: [Axis; 3] = [Axis::Length, Axis::Width, Axis::Height];

    pub fn index(self) -> usize {
        match self {
            Axis::Length => 0,
            Axis::Width => 1,
            Axis::Height => 2,
        }
    }

    /// The two remaining axes, in tie-break order.
    pub fn others(self) -> [Axis; 2] {
        match self {
            Axis::Length => [Axis::Width, Axis::Height],
            Axis::Width => [Axis::Length, Axis::Height],
            Axis::Height => [Axis::Length, Axis::Width],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Length => "length",
            Axis::Width => "width",
            Axis::Height => "height",
        })
    }
}

/// Length, width and height of a product or a box, in centimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl Dims {
    /// Validated constructor: every component must be finite and strictly positive.
    pub fn new(length: f64, width: f64, height: f64) -> Result<Self> {
        for (field, value) in [("length", length), ("width", width), ("height", height)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidDimension { field, value });
            }
        }
        Ok(Dims { length, width, height })
    }

    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Length => self.length,
            Axis::Width => self.width,
            Axis::Height => self.height,
        }
    }

    pub fn set(&mut self, axis: Axis, value: f64) {
        match axis {
            Axis::Length => self.length = value,
            Axis::Width => self.width = value,
            Axis::Height => self.height = value,
        }
    }

    /// `length * width * height`, always multiplied in that order.
    #[inline]
    pub fn volume(&self) -> f64 {
        self.length * self.width * self.height
    }

    /// Component-wise maximum.
    #[inline]
    pub fn max(&self, other: &Dims) -> Dims {
        Dims {
            length: self.length.max(other.length),
            width: self.width.max(other.width),
            height: self.height.max(other.height),
        }
    }

    /// Components sorted so that `length >= width >= height`.
    pub fn canonical(&self) -> Dims {
        let mut v = [self.length, self.width, self.height];
        v.sort_by(|a, b| b.total_cmp(a));
        Dims { length: v[0], width: v[1], height: v[2] }
    }

    pub fn is_canonical(&self) -> bool {
        self.length >= self.width && self.width >= self.height
    }

    /// Per-axis containment without rotation.
    #[inline]
    pub fn fits_in(&self, bx: &Dims) -> bool {
        self.length <= bx.length && self.width <= bx.width && self.height <= bx.height
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.length, self.width, self.height)
    }
}

/// Whether a product with dims `p` fits into `bx`. With `canonicalize` both
/// operands are sorted descending first, i.e. the product may be rotated.
pub fn fits(p: &Dims, bx: &Dims, canonicalize: bool) -> bool {
    if canonicalize {
        p.canonical().fits_in(&bx.canonical())
    } else {
        p.fits_in(bx)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub id: String,
    pub dims: Dims,
    /// Expected shipments per period. Zero is allowed.
    pub velocity: f64,
}

impl Product {
    pub fn new(id: impl Into<String>, dims: Dims, velocity: f64) -> Result<Self> {
        let id = id.into();
        if !(velocity.is_finite() && velocity >= 0.0) {
            return Err(Error::InvalidVelocity { id, value: velocity });
        }
        Ok(Product { id, dims, velocity })
    }
}

/// Per-axis maximum over the given products.
pub fn tight_box(products: &[Product]) -> Result<Dims> {
    let (first, rest) = products.split_first().ok_or(Error::EmptyCluster)?;
    Ok(rest.iter().fold(first.dims, |acc, p| acc.max(&p.dims)))
}

/// The product universe, stored sorted by id. Catalog indices are therefore
/// ordered by id, and "lower product id" tie rules compare indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    products: Vec<Product>,
    index: HashMap<String, usize>,
}

impl Catalog {
    pub fn new(mut products: Vec<Product>) -> Result<Self> {
        if products.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        products.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = products.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateId(w[0].id.clone()));
        }
        for p in &products {
            Dims::new(p.dims.length, p.dims.width, p.dims.height)?;
            if !(p.velocity.is_finite() && p.velocity >= 0.0) {
                return Err(Error::InvalidVelocity { id: p.id.clone(), value: p.velocity });
            }
        }
        let index = products.iter().enumerate().map(|(i, p)| (p.id.clone(), i)).collect();
        Ok(Catalog { products, index })
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn get(&self, idx: usize) -> &Product {
        &self.products[idx]
    }

    #[inline]
    pub fn dims(&self, idx: usize) -> &Dims {
        &self.products[idx].dims
    }

    #[inline]
    pub fn velocity(&self, idx: usize) -> f64 {
        self.products[idx].velocity
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Copy of the catalog with every product rotated so `length >= width >= height`.
    pub fn canonicalized(&self) -> Catalog {
        let products = self
            .products
            .iter()
            .map(|p| Product { id: p.id.clone(), dims: p.dims.canonical(), velocity: p.velocity })
            .collect();
        Catalog { products, index: self.index.clone() }
    }

    /// Merge products with bit-identical dims into one entry (the lowest id
    /// survives) carrying the summed velocity. Tight boxes and volumes of any
    /// partition that keeps duplicates together are unchanged.
    pub fn dedup_dims(&self) -> Catalog {
        let key = |d: &Dims| (d.length.to_bits(), d.width.to_bits(), d.height.to_bits());
        let mut first: HashMap<(u64, u64, u64), usize> = HashMap::new();
        let mut out: Vec<Product> = Vec::new();
        for p in &self.products {
            match first.get(&key(&p.dims)) {
                Some(&at) => out[at].velocity += p.velocity,
                None => {
                    first.insert(key(&p.dims), out.len());
                    out.push(p.clone());
                }
            }
        }
        // ids were already sorted and unique, so this cannot fail
        Catalog::new(out).expect("dedup of a valid catalog")
    }

    /// Number of distinct (length, width, height) triples.
    pub fn distinct_dims(&self) -> usize {
        self.dedup_dims().len()
    }

    pub fn total_velocity(&self) -> f64 {
        self.products.iter().map(|p| p.velocity).sum()
    }
}

/// Tight box and velocity sum over `members`, accumulated in slice order.
pub(crate) fn summarize(catalog: &Catalog, members: &[usize]) -> (Dims, f64) {
    let mut bx = *catalog.dims(members[0]);
    let mut velocity = 0.0;
    for &m in members {
        bx = bx.max(catalog.dims(m));
        velocity += catalog.velocity(m);
    }
    (bx, velocity)
}

/// A group of products shipped in the same box size.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    members: Vec<usize>,
    bounding: Dims,
    velocity_sum: f64,
}

impl Cluster {
    /// Build a cluster from catalog indices. Members are sorted and the tight
    /// box and velocity sum are computed from scratch.
    pub fn new(catalog: &Catalog, mut members: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyCluster);
        }
        members.sort_unstable();
        members.dedup();
        if let Some(&m) = members.iter().find(|&&m| m >= catalog.len()) {
            return Err(Error::InvalidSolution(format!("member index {m} outside catalog")));
        }
        Ok(Self::from_sorted(catalog, members))
    }

    /// `members` must be non-empty, sorted and unique.
    pub(crate) fn from_sorted(catalog: &Catalog, members: Vec<usize>) -> Self {
        debug_assert!(!members.is_empty());
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        let (bounding, velocity_sum) = summarize(catalog, &members);
        Cluster { members, bounding, velocity_sum }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The tight box.
    pub fn bounding(&self) -> Dims {
        self.bounding
    }

    pub fn velocity_sum(&self) -> f64 {
        self.velocity_sum
    }

    /// Box volume times velocity sum.
    #[inline]
    pub fn volume(&self) -> f64 {
        self.bounding.volume() * self.velocity_sum
    }
}

/// Shipped volume of one cluster: tight-box volume times total velocity.
pub fn cluster_volume(c: &Cluster) -> f64 {
    c.volume()
}

/// A partition of the whole catalog into clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    clusters: Vec<Cluster>,
    assignment: Vec<usize>,
}

impl Solution {
    /// Everything in one cluster.
    pub fn single(catalog: &Catalog) -> Self {
        let members: Vec<usize> = (0..catalog.len()).collect();
        Solution {
            assignment: vec![0; catalog.len()],
            clusters: vec![Cluster::from_sorted(catalog, members)],
        }
    }

    /// Assemble a solution, checking that the clusters partition the catalog.
    pub fn from_clusters(catalog: &Catalog, clusters: Vec<Cluster>) -> Result<Self> {
        let mut assignment = vec![usize::MAX; catalog.len()];
        for (k, c) in clusters.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::EmptyCluster);
            }
            for &m in c.members() {
                if m >= catalog.len() {
                    return Err(Error::InvalidSolution(format!("member index {m} outside catalog")));
                }
                if assignment[m] != usize::MAX {
                    return Err(Error::InvalidSolution(format!(
                        "product {} appears in more than one cluster",
                        catalog.get(m).id
                    )));
                }
                assignment[m] = k;
            }
        }
        if let Some(j) = assignment.iter().position(|&a| a == usize::MAX) {
            return Err(Error::InvalidSolution(format!("product {} is unassigned", catalog.get(j).id)));
        }
        Ok(Solution { clusters, assignment })
    }

    /// Build from a product → cluster label vector. Labels need not be
    /// contiguous; clusters are ordered by first appearance.
    pub fn from_labels(catalog: &Catalog, labels: &[usize]) -> Result<Self> {
        if labels.len() != catalog.len() {
            return Err(Error::InvalidSolution(format!(
                "{} labels for {} products",
                labels.len(),
                catalog.len()
            )));
        }
        let mut order: Vec<usize> = Vec::new();
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for (j, &l) in labels.iter().enumerate() {
            groups
                .entry(l)
                .or_insert_with(|| {
                    order.push(l);
                    Vec::new()
                })
                .push(j);
        }
        let clusters = order
            .iter()
            .map(|l| Cluster::from_sorted(catalog, groups.remove(l).unwrap()))
            .collect();
        Solution::from_clusters(catalog, clusters)
    }

    /// Internal constructor for clusters already known to partition `n` products.
    pub(crate) fn from_parts(n: usize, clusters: Vec<Cluster>) -> Self {
        let mut assignment = vec![usize::MAX; n];
        for (k, c) in clusters.iter().enumerate() {
            for &m in c.members() {
                assignment[m] = k;
            }
        }
        debug_assert!(assignment.iter().all(|&a| a != usize::MAX));
        Solution { clusters, assignment }
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster(&self, k: usize) -> &Cluster {
        &self.clusters[k]
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Cluster index of every product, by catalog index.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Tight boxes in cluster order.
    pub fn boxes(&self) -> Vec<Dims> {
        self.clusters.iter().map(Cluster::bounding).collect()
    }

    pub fn total_volume(&self) -> f64 {
        total_volume(self)
    }

    /// Check every structural invariant against `catalog`.
    pub fn validate(&self, catalog: &Catalog) -> Result<()> {
        if self.assignment.len() != catalog.len() {
            return Err(Error::InvalidSolution("assignment length differs from catalog".into()));
        }
        let mut seen = vec![false; catalog.len()];
        for (k, c) in self.clusters.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::EmptyCluster);
            }
            if !c.members.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidSolution(format!("cluster {k} members not sorted")));
            }
            for &m in c.members() {
                if seen[m] || self.assignment[m] != k {
                    return Err(Error::InvalidSolution(format!("membership of product {m} is inconsistent")));
                }
                seen[m] = true;
            }
            let (bx, vel) = summarize(catalog, &c.members);
            if bx != c.bounding {
                return Err(Error::InvalidSolution(format!("cluster {k} box is not tight")));
            }
            let tol = 1e-9 * vel.abs().max(c.velocity_sum.abs()).max(1.0);
            if (vel - c.velocity_sum).abs() > tol {
                return Err(Error::InvalidSolution(format!("cluster {k} velocity sum is stale")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidSolution("some product is unassigned".into()));
        }
        Ok(())
    }
}

/// Total shipped volume: the sum of cluster volumes, in cluster order.
pub fn total_volume(s: &Solution) -> f64 {
    s.clusters.iter().map(Cluster::volume).sum()
}

/// Solver parameters. `reassign` and `refine` switch off the corresponding
/// steps to reproduce the ablation variants; running with `k_tilde == k` is
/// the forward-only variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub k: usize,
    pub k_tilde: usize,
    pub t_max: usize,
    pub canonicalize: bool,
    pub seed: u64,
    pub reassign: bool,
    pub refine: bool,
}

impl SolverConfig {
    pub fn new(k: usize, k_tilde: usize, t_max: usize) -> Self {
        SolverConfig { k, k_tilde, t_max, canonicalize: false, seed: 0, reassign: true, refine: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig("K must be >= 1".into()));
        }
        if self.k_tilde < self.k {
            return Err(Error::InvalidConfig(format!("K-tilde ({}) must be >= K ({})", self.k_tilde, self.k)));
        }
        if self.t_max < 1 {
            return Err(Error::InvalidConfig("T_max must be >= 1".into()));
        }
        Ok(())
    }
}
