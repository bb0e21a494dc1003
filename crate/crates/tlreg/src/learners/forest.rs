//! Random-forest regressor (CART trees, variance-reduction splits).
//!
//! Determinism contract: trees are seeded by (root seed, tree index), so the
//! forest is reproducible and independent of build order or thread schedule.
//! Rows are canonicalized (lexicographic sort) before bootstrap sampling, so a
//! permutation of the training rows yields the identical forest.

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::rng::{derive_rng, SeedStream};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ForestParams {
    pub n_tree: usize,
    /// Features tried per split; defaults to max(1, p/3) when unset.
    pub m_try: Option<usize>,
    /// Minimum rows (bootstrap multiplicity) per leaf; nodes below twice this
    /// size are not split.
    pub min_leaf: usize,
    /// Size-n bootstrap resampling per tree; when off every tree sees all rows.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_tree: 200,
            m_try: None,
            min_leaf: 5,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn resolved_m_try(&self, p: usize) -> usize {
        self.m_try.unwrap_or_else(|| (p / 3).max(1))
    }
}

/// Flattened tree node. `left == 0` marks a leaf (the root occupies index 0,
/// so no real child can live there); `value` holds the node's response mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature: u32,
    pub threshold: f64,
    pub left: u32,
    pub right: u32,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        let mut idx = 0usize;
        loop {
            let node = &self.nodes[idx];
            if node.left == 0 {
                return node.value;
            }
            idx = if x[node.feature as usize] <= node.threshold {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<Tree>,
    n_features: usize,
    params: ForestParams,
}

impl ForestModel {
    pub fn params(&self) -> ForestParams {
        self.params
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn from_parts(trees: Vec<Tree>, n_features: usize, params: ForestParams) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self {
            trees,
            n_features,
            params,
        })
    }

    /// Mean of the per-tree leaf values; always a convex combination of the
    /// training responses.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                what: "prediction input",
                expected: self.n_features,
                actual: x.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    pub fn predict_batch(&self, xs: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        if xs.ncols() != self.n_features {
            return Err(Error::DimensionMismatch {
                what: "prediction input",
                expected: self.n_features,
                actual: xs.ncols(),
            });
        }
        Ok(Array1::from_iter(
            xs.rows().into_iter().map(|r| {
                let sum: f64 = self.trees.iter().map(|t| t.predict(r)).sum();
                sum / self.trees.len() as f64
            }),
        ))
    }
}

struct TreeBuilder<'a> {
    x: &'a Array2<f64>,
    z: &'a [f64],
    /// Per feature: row indices sorted by feature value (ties by index).
    presorted: &'a [Vec<u32>],
    min_leaf: u32,
    m_try: usize,
}

impl TreeBuilder<'_> {
    fn build(&self, rng: &mut rand_chacha::ChaCha8Rng, counts: Vec<u32>, n_node: u32) -> Tree {
        let mut nodes = Vec::new();
        let mut scratch: Vec<u32> = (0..self.x.ncols() as u32).collect();
        self.grow(&mut nodes, rng, &mut scratch, counts, n_node);
        Tree { nodes }
    }

    fn node_value(&self, counts: &[u32], n_node: u32) -> (f64, bool) {
        let mut sum = 0.0;
        let mut first = f64::NAN;
        let mut constant = true;
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let zi = self.z[i];
            if first.is_nan() {
                first = zi;
            } else if zi != first {
                constant = false;
            }
            sum += c as f64 * zi;
        }
        if constant {
            // Exact value, immune to averaging roundoff.
            (first, true)
        } else {
            (sum / n_node as f64, false)
        }
    }

    fn grow(
        &self,
        nodes: &mut Vec<TreeNode>,
        rng: &mut rand_chacha::ChaCha8Rng,
        scratch: &mut [u32],
        counts: Vec<u32>,
        n_node: u32,
    ) -> u32 {
        let (value, constant) = self.node_value(&counts, n_node);
        let idx = nodes.len() as u32;
        nodes.push(TreeNode {
            feature: 0,
            threshold: 0.0,
            left: 0,
            right: 0,
            value,
        });
        if n_node < 2 * self.min_leaf || constant {
            return idx;
        }

        let p = self.x.ncols();
        // Sampled feature subset, ascending so the lowest index wins ties.
        let chosen: Vec<u32> = if self.m_try >= p {
            (0..p as u32).collect()
        } else {
            for j in 0..self.m_try {
                let k = rng.gen_range(j..p);
                scratch.swap(j, k);
            }
            let mut sel = scratch[..self.m_try].to_vec();
            sel.sort_unstable();
            sel
        };

        let total: f64 = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 * self.z[i])
            .sum();

        let mut best: Option<(f64, u32, f64)> = None; // (gain, feature, threshold)
        for &f in &chosen {
            let col = self.x.column(f as usize);
            let mut nl = 0u32;
            let mut sl = 0.0f64;
            let mut prev: Option<f64> = None;
            for &i in &self.presorted[f as usize] {
                let c = counts[i as usize];
                if c == 0 {
                    continue;
                }
                let v = col[i as usize];
                if let Some(pv) = prev {
                    if v > pv && nl >= self.min_leaf && n_node - nl >= self.min_leaf {
                        let nr = n_node - nl;
                        let sr = total - sl;
                        let gain = sl * sl / nl as f64 + sr * sr / nr as f64;
                        let better = match best {
                            Some((g, _, _)) => gain > g,
                            None => true,
                        };
                        if better {
                            // Midpoint, nudged down when rounding would land on
                            // the right value and break the partition.
                            let mut thr = pv + (v - pv) / 2.0;
                            if thr >= v {
                                thr = pv;
                            }
                            best = Some((gain, f, thr));
                        }
                    }
                }
                nl += c;
                sl += c as f64 * self.z[i as usize];
                prev = Some(v);
            }
        }

        let Some((_, feature, threshold)) = best else {
            return idx; // No admissible boundary among the sampled features.
        };

        let col = self.x.column(feature as usize);
        let mut left_counts = vec![0u32; counts.len()];
        let mut right_counts = vec![0u32; counts.len()];
        let mut n_left = 0u32;
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if col[i] <= threshold {
                left_counts[i] = c;
                n_left += c;
            } else {
                right_counts[i] = c;
            }
        }
        let n_right = n_node - n_left;
        debug_assert!(n_left >= self.min_leaf && n_right >= self.min_leaf);

        let left = self.grow(nodes, rng, scratch, left_counts, n_left);
        let right = self.grow(nodes, rng, scratch, right_counts, n_right);
        nodes[idx as usize].feature = feature;
        nodes[idx as usize].threshold = threshold;
        nodes[idx as usize].left = left;
        nodes[idx as usize].right = right;
        idx
    }
}

pub fn fit_forest(
    x: ArrayView2<'_, f64>,
    z: ArrayView1<'_, f64>,
    params: &ForestParams,
) -> Result<ForestModel> {
    let (n, p) = (x.nrows(), x.ncols());
    if n == 0 || p == 0 {
        return Err(Error::InsufficientData(format!(
            "forest needs at least one row and one feature, got {n}x{p}"
        )));
    }
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            what: "responses",
            expected: n,
            actual: z.len(),
        });
    }
    if params.n_tree == 0 {
        return Err(Error::InvalidParams("n_tree must be >= 1".to_string()));
    }
    if params.min_leaf == 0 {
        return Err(Error::InvalidParams("min_leaf must be >= 1".to_string()));
    }
    let m_try = params.resolved_m_try(p);
    if m_try == 0 || m_try > p {
        return Err(Error::InvalidParams(format!(
            "m_try must lie in 1..={p}, got {m_try}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("features"));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("responses"));
    }
    if n > u32::MAX as usize / 2 {
        return Err(Error::InvalidParams("too many rows".to_string()));
    }

    // Canonical row order: trees depend on row content, not presentation order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        for j in 0..p {
            match x[[a, j]].total_cmp(&x[[b, j]]) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            }
        }
        z[a].total_cmp(&z[b])
    });
    let xc_owned = x.select(ndarray::Axis(0), &order);
    let zc: Vec<f64> = order.iter().map(|&i| z[i]).collect();

    let mut presorted: Vec<Vec<u32>> = Vec::with_capacity(p);
    for f in 0..p {
        let col = xc_owned.column(f);
        let mut idx: Vec<u32> = (0..n as u32).collect();
        idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
        presorted.push(idx);
    }

    let builder = TreeBuilder {
        x: &xc_owned,
        z: &zc,
        presorted: &presorted,
        min_leaf: params.min_leaf as u32,
        m_try,
    };

    let trees = map_indexed(params.n_tree, |t| {
        let mut rng = derive_rng(params.seed, SeedStream::Tree, t as u64);
        let counts = if params.bootstrap {
            let mut c = vec![0u32; n];
            for _ in 0..n {
                c[rng.gen_range(0..n)] += 1;
            }
            c
        } else {
            vec![1u32; n]
        };
        builder.build(&mut rng, counts, n as u32)
    });

    Ok(ForestModel {
        trees,
        n_features: p,
        params: *params,
    })
}
