use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub type Point = [f64; 4];

/// Static 4-d tree over a point set, stored as an implicit balanced tree:
/// the median of each subslice sits at its midpoint.
#[derive(Debug, Clone)]
pub struct KdTree {
    /// Permutation of point ids arranged as the implicit tree.
    order: Vec<usize>,
    /// Split axis per slot of `order`.
    axes: Vec<u8>,
    points: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist2: f64,
    id: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.id.cmp(&other.id))
    }
}

fn dist2(a: &Point, b: &Point) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KdTree {
    pub fn build(points: Vec<Point>) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut axes = vec![0u8; points.len()];
        Self::build_rec(&points, &mut order, &mut axes, 0);
        KdTree {
            order,
            axes,
            points,
        }
    }

    fn build_rec(points: &[Point], ids: &mut [usize], axes: &mut [u8], offset: usize) {
        if ids.is_empty() {
            return;
        }
        // Split on the axis of widest spread.
        let axis = (0..4)
            .max_by(|&a, &b| {
                let spread = |k: usize| {
                    let (lo, hi) = ids
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                            (lo.min(points[i][k]), hi.max(points[i][k]))
                        });
                    hi - lo
                };
                spread(a).total_cmp(&spread(b))
            })
            .unwrap();
        let mid = ids.len() / 2;
        ids.select_nth_unstable_by(mid, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
        });
        axes[offset + mid] = axis as u8;
        let (left, rest) = ids.split_at_mut(mid);
        Self::build_rec(points, left, axes, offset);
        Self::build_rec(points, &mut rest[1..], axes, offset + mid + 1);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: usize) -> &Point {
        &self.points[id]
    }

    /// The `k` nearest point ids to `q` by Euclidean distance, closest first.
    pub fn nearest_k(&self, q: &Point, k: usize) -> Vec<(usize, f64)> {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        if k > 0 {
            self.search(q, k, 0, self.order.len(), &mut heap);
        }
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.id, c.dist2.sqrt())).collect()
    }

    fn search(&self, q: &Point, k: usize, lo: usize, hi: usize, heap: &mut BinaryHeap<Candidate>) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let id = self.order[mid];
        let p = &self.points[id];
        let cand = Candidate {
            dist2: dist2(p, q),
            id,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if cand < *heap.peek().unwrap() {
            heap.pop();
            heap.push(cand);
        }
        let axis = self.axes[mid] as usize;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, k, near.0, near.1, heap);
        if heap.len() < k || diff * diff <= heap.peek().unwrap().dist2 {
            self.search(q, k, far.0, far.1, heap);
        }
    }
}
