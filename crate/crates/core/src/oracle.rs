//! Brute-force ground truth for small instances.
//!
//! Everything here recomputes boxes and volumes from raw product dims with
//! its own loops. Only the container types are shared with the algorithms
//! being checked. Guard rails refuse inputs whose enumeration would blow up.

use crate::error::{Error, Result};
use crate::model::{Axis, Catalog, Cluster, Solution};
use crate::split::SplitPlan;

pub const MAX_PARTITION_PRODUCTS: usize = 10;
pub const MAX_PARTITION_GROUPS: usize = 4;
pub const MAX_SPLIT_MEMBERS: usize = 500;
pub const MAX_1D_PRODUCTS: usize = 12;

fn raw(catalog: &Catalog, j: usize) -> [f64; 3] {
    let d = catalog.dims(j);
    [d.length, d.width, d.height]
}

/// Shipped volume of a group recomputed from scratch, velocities summed in slice order.
fn group_volume(catalog: &Catalog, group: &[usize]) -> f64 {
    if group.is_empty() {
        return 0.0;
    }
    let mut mx = [f64::NEG_INFINITY; 3];
    let mut vel = 0.0;
    for &j in group {
        let d = raw(catalog, j);
        for a in 0..3 {
            if d[a] > mx[a] {
                mx[a] = d[a];
            }
        }
        vel += catalog.velocity(j);
    }
    mx[0] * mx[1] * mx[2] * vel
}

/// Minimum total shipped volume over every partition of the catalog into at
/// most `k` non-empty groups (restricted-growth-string enumeration).
pub fn exhaustive_partition(catalog: &Catalog, k: usize) -> Result<(f64, Solution)> {
    let n = catalog.len();
    if n > MAX_PARTITION_PRODUCTS || k > MAX_PARTITION_GROUPS || k == 0 {
        return Err(Error::GuardRail(format!(
            "exhaustive_partition needs N <= {MAX_PARTITION_PRODUCTS} and 1 <= K <= {MAX_PARTITION_GROUPS}, got N={n}, K={k}"
        )));
    }
    let mut labels = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];

    // labels[i] <= max(labels[..i]) + 1 and < k
    fn recurse(
        i: usize,
        used: usize,
        labels: &mut Vec<usize>,
        k: usize,
        catalog: &Catalog,
        groups: &mut Vec<Vec<usize>>,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if i == labels.len() {
            for g in groups.iter_mut() {
                g.clear();
            }
            for (j, &l) in labels.iter().enumerate() {
                groups[l].push(j);
            }
            let v: f64 = groups.iter().map(|g| group_volume(catalog, g)).sum();
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                *best = Some((v, labels.clone()));
            }
            return;
        }
        for l in 0..(used + 1).min(k) {
            labels[i] = l;
            recurse(i + 1, used.max(l + 1), labels, k, catalog, groups, best);
        }
    }
    recurse(0, 0, &mut labels, k, catalog, &mut groups, &mut best);
    let (v, labels) = best.expect("at least one partition");
    Ok((v, Solution::from_labels(catalog, &labels)?))
}

/// Every axis and every cut between distinct values, both children rebuilt
/// from scratch. Same tie rules as the sweep: smallest cut, then axis order.
pub fn exhaustive_split(cluster: &Cluster, catalog: &Catalog) -> Result<Option<SplitPlan>> {
    let members = cluster.members();
    if members.len() > MAX_SPLIT_MEMBERS {
        return Err(Error::GuardRail(format!(
            "exhaustive_split needs N_k <= {MAX_SPLIT_MEMBERS}, got {}",
            members.len()
        )));
    }
    let parent = group_volume(catalog, members);
    let mut best: Option<SplitPlan> = None;
    for axis in Axis::ALL {
        let a = axis.index();
        let mut cuts: Vec<f64> = members.iter().map(|&j| raw(catalog, j)[a]).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.pop();
        for tau in cuts {
            let (left, right): (Vec<usize>, Vec<usize>) =
                members.iter().partition(|&&j| raw(catalog, j)[a] <= tau);
            let gain = (parent - (group_volume(catalog, &left) + group_volume(catalog, &right))).max(0.0);
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(SplitPlan { cluster_index: 0, axis, cut: tau, gain, left, right });
            }
        }
    }
    Ok(best)
}

/// Minimum of the one-dimensional objective (max volume in group times group
/// velocity) over every contiguous partition of the products sorted by
/// (volume, id) into exactly `k` groups.
pub fn exhaustive_1d(catalog: &Catalog, k: usize) -> Result<f64> {
    let n = catalog.len();
    if n > MAX_1D_PRODUCTS || k == 0 || k > n {
        return Err(Error::GuardRail(format!(
            "exhaustive_1d needs N <= {MAX_1D_PRODUCTS} and 1 <= K <= N, got N={n}, K={k}"
        )));
    }
    let vol = |j: usize| {
        let d = raw(catalog, j);
        d[0] * d[1] * d[2]
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vol(a).total_cmp(&vol(b)).then(a.cmp(&b)));

    let mut best = f64::INFINITY;
    // bit i set: boundary after sorted position i
    for mask in 0u32..(1u32 << (n - 1)) {
        if mask.count_ones() as usize != k - 1 {
            continue;
        }
        let mut total = 0.0;
        let mut start = 0;
        for end in 0..n {
            if end == n - 1 || mask & (1 << end) != 0 {
                let group = &order[start..=end];
                let vmax = group.iter().map(|&j| vol(j)).fold(f64::NEG_INFINITY, f64::max);
                let mut s = 0.0;
                for &j in group {
                    s += catalog.velocity(j);
                }
                total += vmax * s;
                start = end + 1;
            }
        }
        if total < best {
            best = total;
        }
    }
    Ok(best)
}
