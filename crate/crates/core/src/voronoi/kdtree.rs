//! Static k-d tree over points in `R^D` with Euclidean queries.

/// Implicit balanced tree: the median of each index range is the node.
#[derive(Clone, Debug)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    order: Vec<usize>,
}

impl KdTree {
    /// `points` must all have the same length.
    pub fn new(points: &[Vec<f64>]) -> Self {
        let dim = points.first().map_or(0, Vec::len);
        let coords: Vec<f64> = points.iter().flat_map(|p| p.iter().copied()).collect();
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut tree = KdTree {
            dim,
            coords,
            order: Vec::new(),
        };
        tree.build(&mut order, 0);
        tree.order = order;
        tree
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&self, idx: &mut [usize], depth: usize) {
        if idx.len() <= 1 {
            return;
        }
        let axis = depth % self.dim;
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| self.point(a)[axis].total_cmp(&self.point(b)[axis]));
        let (lo, hi) = idx.split_at_mut(mid);
        self.build(lo, depth + 1);
        self.build(&mut hi[1..], depth + 1);
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn dist2(&self, i: usize, q: &[f64]) -> f64 {
        self.point(i).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Index and squared distance of the point nearest to `q`.
    pub fn nearest(&self, q: &[f64]) -> Option<(usize, f64)> {
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_in(0, self.order.len(), 0, q, &mut best);
        (best.0 != usize::MAX).then_some(best)
    }

    fn nearest_in(&self, lo: usize, hi: usize, depth: usize, q: &[f64], best: &mut (usize, f64)) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let node = self.order[mid];
        let d = self.dist2(node, q);
        if d < best.1 {
            *best = (node, d);
        }
        if hi - lo == 1 {
            return;
        }
        let axis = depth % self.dim;
        let diff = q[axis] - self.point(node)[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.nearest_in(near.0, near.1, depth + 1, q, best);
        if diff * diff < best.1 {
            self.nearest_in(far.0, far.1, depth + 1, q, best);
        }
    }

    /// All indices within Euclidean distance `r` of `q`.
    pub fn within(&self, q: &[f64], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.within_in(0, self.order.len(), 0, q, r, &mut out);
        out
    }

    fn within_in(&self, lo: usize, hi: usize, depth: usize, q: &[f64], r: f64, out: &mut Vec<usize>) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let node = self.order[mid];
        if self.dist2(node, q) <= r * r {
            out.push(node);
        }
        let axis = depth % self.dim;
        let diff = q[axis] - self.point(node)[axis];
        if diff <= r {
            self.within_in(lo, mid, depth + 1, q, r, out);
        }
        if diff >= -r {
            self.within_in(mid + 1, hi, depth + 1, q, r, out);
        }
    }
}
