//! Octree summation of Σ_l G(S_l − y) over a cloud of lattice points.

use rustc_hash::FxHashMap;

use crate::green::GreenTable;
use crate::lattice::LatticePoint;

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
struct Node {
    com: [f64; 3],
    count: f64,
    /// Largest distance from `com` to a point of the node.
    radius: f64,
    start: usize,
    end: usize,
    children: Vec<usize>,
}

/// Barnes–Hut tree over a multiset of lattice points.
///
/// Repeated points are stored once with their multiplicity.
#[derive(Debug, Clone)]
pub struct Octree {
    points: Vec<LatticePoint>,
    weights: Vec<f64>,
    nodes: Vec<Node>,
}

impl Octree {
    pub fn new(points: &[LatticePoint]) -> Octree {
        let mut index: FxHashMap<LatticePoint, usize> = FxHashMap::default();
        let mut pw: Vec<(LatticePoint, f64)> = Vec::new();
        for p in points {
            let i = *index.entry(*p).or_insert_with(|| {
                pw.push((*p, 0.0));
                pw.len() - 1
            });
            pw[i].1 += 1.0;
        }
        let (points, weights) = pw.into_iter().unzip();
        let mut t = Octree { points, weights, nodes: Vec::new() };
        if !t.points.is_empty() {
            t.build(0, t.points.len());
        }
        t
    }

    /// Number of distinct points.
    pub fn distinct(&self) -> usize {
        self.points.len()
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let pts = &self.points[start..end];
        let ws = &self.weights[start..end];
        let count: f64 = ws.iter().sum();
        let mut com = [0.0; 3];
        let (mut lo, mut hi) = ([i32::MAX; 3], [i32::MIN; 3]);
        for (p, w) in pts.iter().zip(ws) {
            let c = p.coords();
            for k in 0..3 {
                com[k] += w * c[k] as f64;
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        com.iter_mut().for_each(|v| *v /= count);
        let radius = pts
            .iter()
            .map(|p| {
                let c = p.as_f64();
                ((c[0] - com[0]).powi(2) + (c[1] - com[1]).powi(2) + (c[2] - com[2]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        let id = self.nodes.len();
        self.nodes.push(Node { com, count, radius, start, end, children: Vec::new() });
        if pts.len() <= LEAF_SIZE || lo == hi {
            return id;
        }
        // split at the box midpoint into up to eight octants
        let mid: [i64; 3] = std::array::from_fn(|k| (lo[k] as i64 + hi[k] as i64).div_euclid(2));
        let octant = |p: &LatticePoint| -> usize {
            let c = p.coords();
            (0..3).map(|k| ((c[k] as i64 > mid[k]) as usize) << k).sum()
        };
        let mut pairs: Vec<(LatticePoint, f64)> =
            self.points[start..end].iter().copied().zip(self.weights[start..end].iter().copied()).collect();
        pairs.sort_unstable_by_key(|(p, _)| octant(p));
        for (k, (p, w)) in pairs.into_iter().enumerate() {
            self.points[start + k] = p;
            self.weights[start + k] = w;
        }
        let mut bounds = Vec::with_capacity(9);
        bounds.push(start);
        let mut i = start;
        for o in 0..8 {
            while i < end && octant(&self.points[i]) == o {
                i += 1;
            }
            bounds.push(i);
        }
        let mut children = Vec::new();
        for o in 0..8 {
            if bounds[o + 1] > bounds[o] {
                children.push(self.build(bounds[o], bounds[o + 1]));
            }
        }
        self.nodes[id].children = children;
        id
    }

    /// Σ_p G(p − y) with far nodes replaced by their monopole.
    ///
    /// A node is summarized when its radius is below θ times its distance to y
    /// and every point in it lies outside the tabulated cube around y, where G
    /// equals the smooth far-field expansion.
    pub fn sum_at(&self, y: &LatticePoint, table: &GreenTable, theta: f64) -> f64 {
        if self.nodes.is_empty() {
            return 0.0;
        }
        let far = table.far_field();
        // a point at Euclidean distance > √3·R lies outside the table cube
        let cutoff = 3f64.sqrt() * table.r_table() as f64 + 1.0;
        let yf = y.as_f64();
        let mut acc = 0.0;
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            let dv = [n.com[0] - yf[0], n.com[1] - yf[1], n.com[2] - yf[2]];
            let d = (dv[0] * dv[0] + dv[1] * dv[1] + dv[2] * dv[2]).sqrt();
            if n.radius < theta * d && d - n.radius > cutoff {
                acc += n.count * far.eval_at(dv);
            } else if n.children.is_empty() {
                for (p, w) in self.points[n.start..n.end].iter().zip(&self.weights[n.start..n.end]) {
                    acc += w * table.get(&(*p - *y));
                }
            } else {
                stack.extend(n.children.iter().copied());
            }
        }
        acc
    }
}
