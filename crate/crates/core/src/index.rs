//! Exact Euclidean neighbor search.
//!
//! The k-NN radius of a query `x` is the smallest `r` such that the closed
//! ball `B(x, r)` holds at least `k` sample points, and the k-NN set is every
//! sample inside that ball. Ties at the k-th distance are all kept, so a
//! neighbor set can be larger than `k`.
//!
//! Two implementations answer the same queries: [`KdTree`] for speed and
//! [`brute_force_knn`] as the oracle. Both compare squared distances produced
//! by the same [`squared_distance`] routine, and the tie test is exact float
//! equality, so their answers agree bit for bit.

use crate::error::{Error, Result};

/// Sum of squared coordinate differences, accumulated in axis order.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// An ordered, index-addressable set of points in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// Builds a point set from row-major coordinates (`coords.len() == n * dim`).
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "dimension must be positive"));
        }
        if coords.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::invalid(
                "coords",
                format!("length {} is not a multiple of dim {}", coords.len(), dim),
            ));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate {
                index: pos / dim,
                axis: pos % dim,
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyPointSet)?;
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    /// One-dimensional point set from scalar coordinates.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(1, values.to_vec())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false for a constructed point set; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// New point set holding the points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Self::new(self.dim, coords)
    }
}

/// Tie-inclusive k-NN answer.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    /// `r_k(x)`, the distance to the k-th nearest sample.
    pub radius: f64,
    /// Squared radius exactly as compared during the search.
    pub radius_sq: f64,
    /// Every sample at distance `<= radius`, ascending by index.
    pub members: Vec<usize>,
}

impl NeighborSet {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

fn check_query(dim: usize, query: &[f64]) -> Result<()> {
    if query.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: query.len(),
        });
    }
    if let Some(axis) = query.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFiniteCoordinate { index: 0, axis });
    }
    Ok(())
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    Ok(())
}

/// Full scan oracle for [`KdTree::knn`].
pub fn brute_force_knn(points: &PointSet, query: &[f64], k: usize) -> Result<NeighborSet> {
    check_query(points.dim(), query)?;
    check_k(k, points.len())?;
    let mut dists: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (squared_distance(p, query), i))
        .collect();
    // stable: equal distances keep index order
    dists.sort_by(|a, b| a.0.total_cmp(&b.0));
    let radius_sq = dists[k - 1].0;
    let mut members: Vec<usize> = dists
        .iter()
        .take_while(|(d, _)| *d <= radius_sq)
        .map(|&(_, i)| i)
        .collect();
    members.sort_unstable();
    Ok(NeighborSet {
        radius: radius_sq.sqrt(),
        radius_sq,
        members,
    })
}

/// Full scan oracle for [`KdTree::range`].
pub fn brute_force_range(points: &PointSet, query: &[f64], r: f64) -> Result<Vec<usize>> {
    check_query(points.dim(), query)?;
    check_radius(r)?;
    Ok(points
        .iter()
        .enumerate()
        .filter(|(_, p)| squared_distance(p, query).sqrt() <= r)
        .map(|(i, _)| i)
        .collect())
}

const LEAF_SIZE: usize = 16;
const NO_CHILD: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    end: usize,
    left: u32,
    right: u32,
    split_axis: usize,
    split_value: f64,
}

/// Static kd-tree over a [`PointSet`].
///
/// Points are copied into leaf order at build time, so the tree does not
/// borrow its source. Splits are on the axis of widest bounding-box spread at
/// the median, ties broken by index, which makes construction deterministic.
#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    ids: Vec<usize>,
    nodes: Vec<Node>,
    // per node: dim mins then dim maxs
    bounds: Vec<f64>,
}

impl KdTree {
    pub fn build(points: &PointSet) -> Self {
        let dim = points.dim();
        let mut ids: Vec<usize> = (0..points.len()).collect();
        let mut tree = KdTree {
            dim,
            coords: Vec::new(),
            ids: Vec::new(),
            nodes: Vec::new(),
            bounds: Vec::new(),
        };
        tree.build_node(points, &mut ids, 0);
        tree.coords = Vec::with_capacity(points.coords().len());
        for &i in &ids {
            tree.coords.extend_from_slice(points.point(i));
        }
        tree.ids = ids;
        tree
    }

    fn build_node(&mut self, points: &PointSet, ids: &mut [usize], offset: usize) -> u32 {
        let dim = self.dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in ids.iter() {
            for (a, &c) in points.point(i).iter().enumerate() {
                lo[a] = lo[a].min(c);
                hi[a] = hi[a].max(c);
            }
        }
        let node_id = self.nodes.len() as u32;
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);
        self.nodes.push(Node {
            start: offset,
            end: offset + ids.len(),
            left: NO_CHILD,
            right: NO_CHILD,
            split_axis: 0,
            split_value: 0.0,
        });
        if ids.len() <= LEAF_SIZE {
            return node_id;
        }
        let axis = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        if hi[axis] <= lo[axis] {
            // all points coincide
            return node_id;
        }
        let mid = ids.len() / 2;
        let key = |i: &usize| (points.point(*i)[axis], *i);
        ids.select_nth_unstable_by(mid, |a, b| {
            let (ca, ia) = key(a);
            let (cb, ib) = key(b);
            ca.total_cmp(&cb).then(ia.cmp(&ib))
        });
        let split_value = points.point(ids[mid])[axis];
        let (left_ids, right_ids) = ids.split_at_mut(mid);
        let left = self.build_node(points, left_ids, offset);
        let right = self.build_node(points, right_ids, offset + mid);
        let node = &mut self.nodes[node_id as usize];
        node.left = left;
        node.right = right;
        node.split_axis = axis;
        node.split_value = split_value;
        node_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn box_distance_sq(&self, node: usize, query: &[f64]) -> f64 {
        let base = node * 2 * self.dim;
        let lo = &self.bounds[base..base + self.dim];
        let hi = &self.bounds[base + self.dim..base + 2 * self.dim];
        let mut acc = 0.0;
        for a in 0..self.dim {
            let q = query[a];
            let d = if q < lo[a] {
                lo[a] - q
            } else if q > hi[a] {
                q - hi[a]
            } else {
                0.0
            };
            acc += d * d;
        }
        acc
    }

    #[inline]
    fn slot(&self, pos: usize) -> &[f64] {
        &self.coords[pos * self.dim..(pos + 1) * self.dim]
    }

    /// Tie-inclusive k nearest neighbors of `query`.
    pub fn knn(&self, query: &[f64], k: usize) -> Result<NeighborSet> {
        check_query(self.dim, query)?;
        check_k(k, self.len())?;
        let mut search = KnnSearch {
            k,
            threshold: f64::INFINITY,
            buf: Vec::with_capacity(2 * k + LEAF_SIZE),
        };
        self.knn_node(0, query, &mut search);
        let buf = &mut search.buf;
        let (_, kth, _) = buf.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
        let radius_sq = kth.0;
        let mut members: Vec<usize> = buf
            .iter()
            .filter(|(d, _)| *d <= radius_sq)
            .map(|&(_, pos)| self.ids[pos])
            .collect();
        members.sort_unstable();
        Ok(NeighborSet {
            radius: radius_sq.sqrt(),
            radius_sq,
            members,
        })
    }

    fn knn_node(&self, node: usize, query: &[f64], search: &mut KnnSearch) {
        if self.box_distance_sq(node, query) > search.threshold {
            return;
        }
        let n = &self.nodes[node];
        if n.left == NO_CHILD {
            for pos in n.start..n.end {
                let d = squared_distance(self.slot(pos), query);
                if d <= search.threshold {
                    search.push(d, pos);
                }
            }
            return;
        }
        let (near, far) = if query[n.split_axis] < n.split_value {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.knn_node(near as usize, query, search);
        self.knn_node(far as usize, query, search);
    }

    /// Indices of all points at distance `<= r`, ascending.
    ///
    /// Distances are compared as `sqrt(d^2) <= r`, so passing the `radius` of
    /// a [`NeighborSet`] always recovers at least its members.
    pub fn range(&self, query: &[f64], r: f64) -> Result<Vec<usize>> {
        check_query(self.dim, query)?;
        check_radius(r)?;
        let mut out = Vec::new();
        self.range_node(0, query, r, &mut out);
        out.sort_unstable();
        Ok(out)
    }

    fn range_node(&self, node: usize, query: &[f64], r: f64, out: &mut Vec<usize>) {
        if self.box_distance_sq(node, query).sqrt() > r {
            return;
        }
        let n = &self.nodes[node];
        if n.left == NO_CHILD {
            for pos in n.start..n.end {
                if squared_distance(self.slot(pos), query).sqrt() <= r {
                    out.push(self.ids[pos]);
                }
            }
            return;
        }
        self.range_node(n.left as usize, query, r, out);
        self.range_node(n.right as usize, query, r, out);
    }

    /// Distance from `query` to its nearest point.
    pub fn nearest_distance(&self, query: &[f64]) -> Result<f64> {
        Ok(self.knn(query, 1)?.radius)
    }
}

struct KnnSearch {
    k: usize,
    threshold: f64,
    buf: Vec<(f64, usize)>,
}

impl KnnSearch {
    #[inline]
    fn push(&mut self, d: f64, pos: usize) {
        self.buf.push((d, pos));
        let len = self.buf.len();
        if len >= self.k && (self.threshold == f64::INFINITY || len >= 2 * self.k + LEAF_SIZE) {
            self.shrink();
        }
    }

    // Keeps everything at or below the current k-th smallest distance.
    fn shrink(&mut self) {
        let k = self.k;
        let (_, kth, _) = self
            .buf
            .select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
        let t = kth.0;
        self.buf.retain(|(d, _)| *d <= t);
        self.threshold = t;
    }
}

/// Points on a line, sorted, for one-dimensional k-NN queries.
///
/// Squared distances to a query do not increase toward it from either side,
/// so every k-NN set is a contiguous run of the sorted order, found by binary
/// search over window starts and then widened over ties. The squared
/// distances are those [`brute_force_knn`] uses, so the answers agree exactly.
#[derive(Debug, Clone)]
pub struct SortedLine {
    xs: Vec<f64>,
    ids: Vec<usize>,
}

impl SortedLine {
    /// Fails unless `points` is one-dimensional.
    pub fn build(points: &PointSet) -> Result<Self> {
        if points.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: points.dim(),
            });
        }
        let mut ids: Vec<usize> = (0..points.len()).collect();
        let c = points.coords();
        ids.sort_by(|&a, &b| c[a].total_cmp(&c[b]).then(a.cmp(&b)));
        let xs = ids.iter().map(|&i| c[i]).collect();
        Ok(Self { xs, ids })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Original index of the point at sorted position `pos`.
    pub fn id(&self, pos: usize) -> usize {
        self.ids[pos]
    }

    /// Sorted positions `start..end` of the tie-inclusive k-NN set of `q`,
    /// and the squared radius.
    pub fn window(&self, q: f64, k: usize) -> Result<(usize, usize, f64)> {
        check_query(1, &[q])?;
        check_k(k, self.len())?;
        let d2 = |pos: usize| {
            let d = self.xs[pos] - q;
            d * d
        };
        let n = self.len();
        // leftmost start of a k-window that is not beaten by shifting right;
        // `q - x` is the exact negation of `x - q`, so these comparisons agree
        // with the squared distances
        let (mut a, mut b) = (0, n - k);
        while a < b {
            let mid = (a + b) / 2;
            if q - self.xs[mid] > self.xs[mid + k] - q {
                a = mid + 1;
            } else {
                b = mid;
            }
        }
        let (mut lo, mut hi) = (a, a + k);
        let radius_sq = d2(lo).max(d2(hi - 1));
        while lo > 0 && d2(lo - 1) <= radius_sq {
            lo -= 1;
        }
        while hi < n && d2(hi) <= radius_sq {
            hi += 1;
        }
        Ok((lo, hi, radius_sq))
    }

    pub fn knn(&self, q: f64, k: usize) -> Result<NeighborSet> {
        let (lo, hi, radius_sq) = self.window(q, k)?;
        let mut members = self.ids[lo..hi].to_vec();
        members.sort_unstable();
        Ok(NeighborSet {
            radius: radius_sq.sqrt(),
            radius_sq,
            members,
        })
    }
}

/// Builds the spatial index used throughout the crate.
pub fn build_index(points: &PointSet) -> KdTree {
    KdTree::build(points)
}
