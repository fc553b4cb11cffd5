//! Ball tree for exact k-nearest-neighbor search.
//!
//! The tree is an accelerator only: queries must return exactly the same
//! neighbor sets as a brute-force scan, with distance ties broken toward
//! the lower training index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Manhattan,
    Euclidean,
}

impl Distance {
    pub fn compute(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Distance::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Node {
    center: Vec<f64>,
    radius: f64,
    /// Range into `idx`; leaves own their range, internal nodes delegate.
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallTree {
    points: Vec<Vec<f64>>,
    idx: Vec<usize>,
    nodes: Vec<Node>,
    distance: Distance,
    leaf_size: usize,
}

/// (distance, training index) ordered so a max-heap's peek is the worst
/// kept neighbor under the (distance, index) lexicographic order.
#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    index: usize,
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.index.cmp(&other.index))
    }
}

impl BallTree {
    pub fn build(points: Vec<Vec<f64>>, distance: Distance, leaf_size: usize) -> BallTree {
        let n = points.len();
        let mut tree = BallTree {
            points,
            idx: (0..n).collect(),
            nodes: Vec::new(),
            distance,
            leaf_size: leaf_size.max(1),
        };
        if n > 0 {
            tree.build_node(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let center = self.centroid(start, end);
        let radius = self.idx[start..end]
            .iter()
            .map(|&i| self.distance.compute(&center, &self.points[i]))
            .fold(0.0, f64::max);

        let node_pos = self.nodes.len();
        self.nodes.push(Node {
            center,
            radius,
            start,
            end,
            children: None,
        });

        if end - start > self.leaf_size {
            let dim = self.spread_dimension(start, end);
            let mid = start + (end - start) / 2;
            let points = &self.points;
            self.idx[start..end]
                .select_nth_unstable_by(mid - start, |&a, &b| {
                    points[a][dim].total_cmp(&points[b][dim]).then(a.cmp(&b))
                });
            let left = self.build_node(start, mid);
            let right = self.build_node(mid, end);
            self.nodes[node_pos].children = Some((left, right));
        }
        node_pos
    }

    fn centroid(&self, start: usize, end: usize) -> Vec<f64> {
        let d = self.points[self.idx[start]].len();
        let mut center = vec![0.0; d];
        for &i in &self.idx[start..end] {
            for (c, v) in center.iter_mut().zip(&self.points[i]) {
                *c += v;
            }
        }
        let n = (end - start) as f64;
        center.iter_mut().for_each(|c| *c /= n);
        center
    }

    fn spread_dimension(&self, start: usize, end: usize) -> usize {
        let d = self.points[self.idx[start]].len();
        let mut best = 0;
        let mut best_spread = f64::NEG_INFINITY;
        for dim in 0..d {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for &i in &self.idx[start..end] {
                min = min.min(self.points[i][dim]);
                max = max.max(self.points[i][dim]);
            }
            if max - min > best_spread {
                best_spread = max - min;
                best = dim;
            }
        }
        best
    }

    /// The `k` nearest training points to `query`, sorted ascending by
    /// (distance, index).
    pub fn query(&self, query: &[f64], k: usize) -> Vec<(usize, f64)> {
        let k = k.min(self.points.len());
        if k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, &mut heap);
        let mut out: Vec<(usize, f64)> = heap
            .into_sorted_vec()
            .into_iter()
            .map(|e| (e.index, e.dist))
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    fn search(&self, node: usize, query: &[f64], k: usize, heap: &mut BinaryHeap<HeapEntry>) {
        let n = &self.nodes[node];
        let center_dist = self.distance.compute(query, &n.center);
        let lower_bound = (center_dist - n.radius).max(0.0);
        // an equal bound may still hide a lower-index tie, so prune only
        // on a strictly worse bound
        if heap.len() == k && lower_bound > heap.peek().unwrap().dist {
            return;
        }
        match n.children {
            Some((left, right)) => {
                let lb = |c: usize| {
                    let child = &self.nodes[c];
                    (self.distance.compute(query, &child.center) - child.radius).max(0.0)
                };
                let (first, second) = if lb(left) <= lb(right) {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(first, query, k, heap);
                self.search(second, query, k, heap);
            }
            None => {
                for &i in &self.idx[n.start..n.end] {
                    let dist = self.distance.compute(query, &self.points[i]);
                    let entry = HeapEntry { dist, index: i };
                    if heap.len() < k {
                        heap.push(entry);
                    } else if entry < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(entry);
                    }
                }
            }
        }
    }
}

/// Reference scan used to validate the tree: the same (distance, index)
/// ordering without any spatial pruning.
pub fn brute_force_knn(
    points: &[Vec<f64>],
    query: &[f64],
    k: usize,
    distance: Distance,
) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, distance.compute(query, p)))
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let points: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let tree = BallTree::build(points.clone(), Distance::Manhattan, 10);
        for _ in 0..100 {
            let q: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let got = tree.query(&q, 5);
            let expect = brute_force_knn(&points, &q, 5, Distance::Manhattan);
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn distance_ties_break_toward_lower_index() {
        // duplicated points force exact ties
        let points = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0], vec![5.0, 5.0]];
        let tree = BallTree::build(points.clone(), Distance::Manhattan, 1);
        let got = tree.query(&[1.0, 1.0], 2);
        assert_eq!(got[0].0, 0);
        assert_eq!(got[1].0, 1);
    }

    #[test]
    fn k_larger_than_n_returns_everything() {
        let points = vec![vec![0.0], vec![1.0]];
        let tree = BallTree::build(points, Distance::Euclidean, 10);
        assert_eq!(tree.query(&[0.2], 99).len(), 2);
    }
}
