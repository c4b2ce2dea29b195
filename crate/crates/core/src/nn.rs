//! Nearest-neighbour distance queries.
//!
//! [`NearestIndex`] is a kd-tree over a [`PointCloud`]. Its answers are
//! identical to the brute-force minimum: candidate distances are computed by
//! the same [`NormSpec::dist`] call, and a subtree is skipped only when its
//! bounding-box lower bound is strictly larger than the best distance found.

use crate::cloud::PointCloud;
use crate::norm::NormSpec;

const LEAF_SIZE: usize = 16;

#[derive(Debug)]
struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    kind: NodeKind,
}

#[derive(Debug)]
enum NodeKind {
    Leaf { start: usize, end: usize },
    Split { left: usize, right: usize },
}

/// kd-tree over the points of a cloud.
#[derive(Debug)]
pub struct NearestIndex<'a> {
    cloud: &'a PointCloud,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> NearestIndex<'a> {
    pub fn build(cloud: &'a PointCloud) -> Self {
        let mut index = NearestIndex { cloud, order: (0..cloud.len()).collect(), nodes: Vec::new() };
        if !cloud.is_empty() {
            index.build_node(0, cloud.len());
        }
        index
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let dim = self.cloud.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &self.order[start..end] {
            let p = self.cloud.point(i);
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node { lo, hi, kind: NodeKind::Leaf { start, end } });
            return id;
        }
        let axis = (0..dim).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap_or(0);
        if hi[axis] <= lo[axis] {
            // All points coincide.
            self.nodes.push(Node { lo, hi, kind: NodeKind::Leaf { start, end } });
            return id;
        }
        let mid = start + (end - start) / 2;
        let cloud = self.cloud;
        self.order[start..end]
            .select_nth_unstable_by(mid - start, |&a, &b| cloud.point(a)[axis].total_cmp(&cloud.point(b)[axis]));
        self.nodes.push(Node { lo, hi, kind: NodeKind::Leaf { start, end } });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id].kind = NodeKind::Split { left, right };
        id
    }

    pub fn cloud(&self) -> &PointCloud {
        self.cloud
    }

    /// Distance from `x` to the nearest point, `+inf` for an empty cloud.
    pub fn nearest_distance(&self, x: &[f64], norm: &NormSpec) -> f64 {
        self.nearest_within(x, norm, f64::INFINITY)
    }

    /// Like [`nearest_distance`](Self::nearest_distance) but the search may stop
    /// once a point within `stop_below` is found; the returned value is then an
    /// upper bound that is `<= stop_below`.
    pub fn nearest_within(&self, x: &[f64], norm: &NormSpec, stop_below: f64) -> f64 {
        if self.nodes.is_empty() {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if norm.dist_to_box(x, &node.lo, &node.hi) > best {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, end } => {
                    for &i in &self.order[start..end] {
                        let d = norm.dist(x, self.cloud.point(i));
                        if d < best {
                            best = d;
                        }
                    }
                    if best <= stop_below && stop_below.is_finite() {
                        return best;
                    }
                }
                NodeKind::Split { left, right } => {
                    let dl = norm.dist_to_box(x, &self.nodes[left].lo, &self.nodes[left].hi);
                    let dr = norm.dist_to_box(x, &self.nodes[right].lo, &self.nodes[right].hi);
                    // Visit the closer child first: push it last.
                    if dl <= dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        best
    }
}

/// Brute-force reference: `min_c |x - c|`, `+inf` for an empty cloud.
pub fn brute_force_distance(x: &[f64], cloud: &PointCloud, norm: &NormSpec) -> f64 {
    let mut best = f64::INFINITY;
    for c in cloud.iter() {
        let d = norm.dist(x, c);
        if d < best {
            best = d;
        }
    }
    best
}
