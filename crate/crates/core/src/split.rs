//! Binary axis-aligned cluster splitting.
//!
//! For one axis the members are sorted by that axis and every boundary
//! between distinct values is a candidate cut. A left-to-right sweep keeps
//! running maxima of the other two axes for the left child; suffix maxima
//! computed once from the right give the right child's box. Each cut is then
//! evaluated in O(1), so one axis costs O(N_k log N_k).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Axis, Catalog, Cluster, Dims, Solution};

/// The best cut found for a cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub cluster_index: usize,
    pub axis: Axis,
    /// Largest axis value that goes left.
    pub cut: f64,
    pub gain: f64,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// Best cut of `cluster` along `axis`, or `None` when every member has the
/// same value on that axis. Equal-gain cuts resolve to the smallest cut.
pub fn best_split_for_axis(cluster: &Cluster, catalog: &Catalog, axis: Axis) -> Option<SplitPlan> {
    let members = cluster.members();
    let n = members.len();
    if n < 2 {
        return None;
    }
    let mut order = members.to_vec();
    order.sort_by(|&a, &b| {
        catalog.dims(a).get(axis).total_cmp(&catalog.dims(b).get(axis)).then(a.cmp(&b))
    });
    let value = |i: usize| catalog.dims(order[i]).get(axis);
    if value(0) == value(n - 1) {
        return None;
    }

    let [o1, o2] = axis.others();
    let mut suf_o1 = vec![0.0; n];
    let mut suf_o2 = vec![0.0; n];
    let mut suf_v = vec![0.0; n];
    let (mut m1, mut m2, mut v) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0);
    for i in (0..n).rev() {
        let d = catalog.dims(order[i]);
        m1 = m1.max(d.get(o1));
        m2 = m2.max(d.get(o2));
        v += catalog.velocity(order[i]);
        suf_o1[i] = m1;
        suf_o2[i] = m2;
        suf_v[i] = v;
    }

    let parent = cluster.volume();
    let right_axis_max = value(n - 1);
    let (mut l1, mut l2, mut lv) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0);
    let mut best: Option<(usize, f64)> = None;
    for i in 0..n - 1 {
        let d = catalog.dims(order[i]);
        l1 = l1.max(d.get(o1));
        l2 = l2.max(d.get(o2));
        lv += catalog.velocity(order[i]);
        if value(i) == value(i + 1) {
            continue;
        }
        let left_box = box_from(axis, value(i), o1, l1, o2, l2);
        let right_box = box_from(axis, right_axis_max, o1, suf_o1[i + 1], o2, suf_o2[i + 1]);
        let children = left_box.volume() * lv + right_box.volume() * suf_v[i + 1];
        let gain = (parent - children).max(0.0);
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((i, gain));
        }
    }

    let (i, gain) = best?;
    let mut left = order[..=i].to_vec();
    let mut right = order[i + 1..].to_vec();
    left.sort_unstable();
    right.sort_unstable();
    Some(SplitPlan { cluster_index: 0, axis, cut: value(i), gain, left, right })
}

fn box_from(axis: Axis, a: f64, o1: Axis, b: f64, o2: Axis, c: f64) -> Dims {
    let mut d = Dims { length: 0.0, width: 0.0, height: 0.0 };
    d.set(axis, a);
    d.set(o1, b);
    d.set(o2, c);
    d
}

/// Best cut over all three axes; ties resolve in length, width, height order.
pub fn best_split(cluster: &Cluster, catalog: &Catalog) -> Option<SplitPlan> {
    let mut best: Option<SplitPlan> = None;
    for axis in Axis::ALL {
        if let Some(plan) = best_split_for_axis(cluster, catalog, axis) {
            if best.as_ref().is_none_or(|b| plan.gain > b.gain) {
                best = Some(plan);
            }
        }
    }
    best
}

/// Split the cluster with the globally largest gain (lowest index on ties).
/// The left child takes the parent's slot and the right child is appended.
pub fn apply_best_split(solution: &Solution, catalog: &Catalog) -> Result<(Solution, SplitPlan)> {
    let mut best: Option<SplitPlan> = None;
    for (k, c) in solution.clusters().iter().enumerate() {
        if let Some(mut plan) = best_split(c, catalog) {
            if best.as_ref().is_none_or(|b| plan.gain > b.gain) {
                plan.cluster_index = k;
                best = Some(plan);
            }
        }
    }
    let plan = best.ok_or(Error::NoSplittableCluster)?;
    let mut clusters = solution.clusters().to_vec();
    clusters[plan.cluster_index] = Cluster::from_sorted(catalog, plan.left.clone());
    clusters.push(Cluster::from_sorted(catalog, plan.right.clone()));
    Ok((Solution::from_parts(catalog.len(), clusters), plan))
}
