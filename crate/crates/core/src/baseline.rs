//! One-dimensional baseline: cluster products by volume alone.
//!
//! Products are sorted by (volume, id) and split into `K` contiguous groups
//! minimising `sum_k max_volume(k) * velocity(k)`. Contiguity loses nothing:
//! if a group holds a product larger than some product of a later group, the
//! two can be swapped without raising either group's maximum, and every
//! partition can be reached from a contiguous one by such exchanges.
//!
//! Each group is then shipped in its tight 3D box.

use crate::error::{Error, Result};
use crate::model::{Catalog, Dims, Solution};

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    /// Tight boxes of the groups, smallest volume group first.
    pub boxes: Vec<Dims>,
    pub solution: Solution,
    /// Optimal one-dimensional objective.
    pub v_tilde: f64,
}

/// Optimal contiguous K-grouping by dynamic programming, O(N^2 K).
pub fn dp_1d(catalog: &Catalog, k: usize) -> Result<BaselineOutcome> {
    Ok(dp_1d_upto(catalog, k)?.pop().expect("k >= 1"))
}

/// [`dp_1d`] for every group count `1..=k_max`, sharing one table.
pub fn dp_1d_upto(catalog: &Catalog, k_max: usize) -> Result<Vec<BaselineOutcome>> {
    let n = catalog.len();
    if k_max == 0 {
        return Err(Error::InvalidConfig("K must be >= 1".into()));
    }
    if k_max > n {
        return Err(Error::TooManyGroups { k: k_max, n });
    }
    let vol: Vec<f64> = (0..n).map(|j| catalog.dims(j).volume()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vol[a].total_cmp(&vol[b]).then(a.cmp(&b)));
    let v: Vec<f64> = order.iter().map(|&j| vol[j]).collect();
    let s: Vec<f64> = order.iter().map(|&j| catalog.velocity(j)).collect();

    // layer g, entry j: best objective for the first j sorted products in g groups
    let mut prev = vec![f64::INFINITY; n + 1];
    prev[0] = 0.0;
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(k_max);
    let mut best: Vec<f64> = Vec::with_capacity(k_max);
    for g in 1..=k_max {
        let mut cur = vec![f64::INFINITY; n + 1];
        let mut arg = vec![usize::MAX; n + 1];
        // group g covers sorted positions i..j; velocity is accumulated left
        // to right so the group sum matches a direct sum
        for (i, &base) in prev.iter().enumerate().take(n).skip(g - 1) {
            if !base.is_finite() {
                continue;
            }
            let mut acc = 0.0;
            for j in (i + 1)..=n {
                acc += s[j - 1];
                let cand = base + v[j - 1] * acc;
                if cand < cur[j] {
                    cur[j] = cand;
                    arg[j] = i;
                }
            }
        }
        back.push(arg);
        best.push(cur[n]);
        prev = cur;
    }

    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut labels = vec![0usize; n];
        let mut end = n;
        for g in (0..k).rev() {
            let start = back[g][end];
            for &j in &order[start..end] {
                labels[j] = g;
            }
            end = start;
        }
        let solution = Solution::from_labels(catalog, &labels)?;
        out.push(BaselineOutcome { boxes: solution.boxes(), solution, v_tilde: best[k - 1] });
    }
    Ok(out)
}
