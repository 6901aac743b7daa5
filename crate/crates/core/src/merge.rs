//! Cluster combination for the backward pass.

use crate::error::{Error, Result};
use crate::model::{Catalog, Cluster, Solution};

/// The pair whose union costs the least extra shipped volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergePair {
    pub first: usize,
    pub second: usize,
    /// `V(first ∪ second) - V(first) - V(second)`, never negative in exact arithmetic.
    pub delta: f64,
}

/// Scan all C-choose-2 pairs using the cached boxes and velocity sums. Ties
/// go to the lexicographically smallest pair.
pub fn best_merge_pair(solution: &Solution) -> Result<MergePair> {
    let clusters = solution.clusters();
    if clusters.len() < 2 {
        return Err(Error::NothingToMerge);
    }
    let mut best: Option<MergePair> = None;
    for (a, ca) in clusters.iter().enumerate() {
        for (b, cb) in clusters.iter().enumerate().skip(a + 1) {
            let merged = ca.bounding().max(&cb.bounding()).volume() * (ca.velocity_sum() + cb.velocity_sum());
            let delta = merged - ca.volume() - cb.volume();
            if best.is_none_or(|p| delta < p.delta) {
                best = Some(MergePair { first: a, second: b, delta });
            }
        }
    }
    Ok(best.expect("at least one pair"))
}

/// Replace the best pair by its union. The union takes the lower index.
pub fn combine_clusters(solution: &Solution, catalog: &Catalog) -> Result<(Solution, MergePair)> {
    let pair = best_merge_pair(solution)?;
    let a = solution.cluster(pair.first).members();
    let b = solution.cluster(pair.second).members();
    let mut members = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            members.push(a[i]);
            i += 1;
        } else {
            members.push(b[j]);
            j += 1;
        }
    }
    members.extend_from_slice(&a[i..]);
    members.extend_from_slice(&b[j..]);

    let mut clusters = solution.clusters().to_vec();
    clusters[pair.first] = Cluster::from_sorted(catalog, members);
    clusters.remove(pair.second);
    Ok((Solution::from_parts(catalog.len(), clusters), pair))
}
