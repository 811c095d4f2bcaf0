//! Static 3-D k-d tree for exact nearest-neighbor queries.

use nalgebra::Point3;

#[derive(Clone, Debug)]
pub struct KdTree {
    points: Vec<Point3<f64>>,
    /// Permutation of point indices; each subtree occupies a contiguous range
    /// whose middle element is the split node.
    order: Vec<usize>,
    axes: Vec<u8>,
}

const LEAF: usize = 8;

impl KdTree {
    pub fn new(points: &[Point3<f64>]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut axes = vec![0u8; points.len()];
        build(points, &mut order, &mut axes, 0);
        KdTree {
            points: points.to_vec(),
            order,
            axes,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &Point3<f64> {
        &self.points[i]
    }

    /// Index and squared distance of the nearest point; the lowest index
    /// wins among equidistant points.
    pub fn nearest(&self, q: &Point3<f64>) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(q, 0, self.order.len(), &mut best);
        Some(best)
    }

    /// The `k` nearest points as (index, squared distance), closest first.
    pub fn k_nearest(&self, q: &Point3<f64>, k: usize) -> Vec<(usize, f64)> {
        let mut best = Vec::with_capacity(k + 1);
        if k > 0 {
            self.search_k(q, 0, self.order.len(), k, &mut best);
        }
        best
    }

    fn offer(&self, q: &Point3<f64>, idx: usize, k: usize, best: &mut Vec<(usize, f64)>) {
        let d = (self.points[idx] - q).norm_squared();
        if best.len() == k && d >= best[k - 1].1 {
            return;
        }
        let at = best.partition_point(|&(i, e)| e < d || (e == d && i < idx));
        best.insert(at, (idx, d));
        best.truncate(k);
    }

    fn search_k(
        &self,
        q: &Point3<f64>,
        lo: usize,
        hi: usize,
        k: usize,
        best: &mut Vec<(usize, f64)>,
    ) {
        if hi - lo <= LEAF {
            for &idx in &self.order[lo..hi] {
                self.offer(q, idx, k, best);
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.order[mid];
        let axis = self.axes[mid] as usize;
        self.offer(q, idx, k, best);
        let diff = q[axis] - self.points[idx][axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search_k(q, near.0, near.1, k, best);
        if best.len() < k || diff * diff <= best[k - 1].1 {
            self.search_k(q, far.0, far.1, k, best);
        }
    }

    fn consider(&self, q: &Point3<f64>, idx: usize, best: &mut (usize, f64)) {
        let d = (self.points[idx] - q).norm_squared();
        if d < best.1 || (d == best.1 && idx < best.0) {
            *best = (idx, d);
        }
    }

    fn search(&self, q: &Point3<f64>, lo: usize, hi: usize, best: &mut (usize, f64)) {
        if hi - lo <= LEAF {
            for &idx in &self.order[lo..hi] {
                self.consider(q, idx, best);
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.order[mid];
        let axis = self.axes[mid] as usize;
        self.consider(q, idx, best);
        let diff = q[axis] - self.points[idx][axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, near.0, near.1, best);
        if diff * diff <= best.1 {
            self.search(q, far.0, far.1, best);
        }
    }
}

fn build(points: &[Point3<f64>], order: &mut [usize], axes: &mut [u8], depth: usize) {
    let n = order.len();
    if n <= LEAF {
        return;
    }
    // split on the axis of largest spread
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in order.iter() {
        for a in 0..3 {
            lo[a] = lo[a].min(points[i][a]);
            hi[a] = hi[a].max(points[i][a]);
        }
    }
    let axis = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap_or(depth % 3);
    let mid = n / 2;
    order.select_nth_unstable_by(mid, |&a, &b| points[a][axis].total_cmp(&points[b][axis]));
    axes[mid] = axis as u8;
    let (left, right) = order.split_at_mut(mid);
    let (left_axes, right_axes) = axes.split_at_mut(mid);
    build(points, left, left_axes, depth + 1);
    build(points, &mut right[1..], &mut right_axes[1..], depth + 1);
}
