use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// All-pairs shortest paths by repeated Dijkstra.
///
/// The pair (a, b) with a <= b owns the canonical path; (b, a) is its
/// reverse, so distances are exactly symmetric.
#[derive(Debug, Clone)]
pub(crate) struct AllPairs {
    n: usize,
    dist: Vec<f64>,
    pred: Vec<u32>,
}

const NO_PRED: u32 = u32::MAX;

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, ties on node index.
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl AllPairs {
    pub(crate) fn compute(adjacency: &[Vec<(usize, f64)>]) -> Self {
        let n = adjacency.len();
        let mut dist = vec![f64::INFINITY; n * n];
        let mut pred = vec![NO_PRED; n * n];
        let mut heap = BinaryHeap::new();
        for src in 0..n {
            let row = src * n;
            dist[row + src] = 0.0;
            heap.push(Entry(0.0, src));
            while let Some(Entry(d, u)) = heap.pop() {
                if d > dist[row + u] {
                    continue;
                }
                for &(v, w) in &adjacency[u] {
                    let nd = d + w;
                    if nd < dist[row + v] {
                        dist[row + v] = nd;
                        pred[row + v] = u as u32;
                        heap.push(Entry(nd, v));
                    }
                }
            }
        }
        for a in 0..n {
            for b in (a + 1)..n {
                dist[b * n + a] = dist[a * n + b];
            }
        }
        Self { n, dist, pred }
    }

    pub(crate) fn connected(&self) -> bool {
        self.dist.iter().all(|d| d.is_finite())
    }

    pub(crate) fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }

    pub(crate) fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let (src, dst) = if a <= b { (a, b) } else { (b, a) };
        let row = src * self.n;
        let mut nodes = vec![dst];
        let mut cur = dst;
        while cur != src {
            cur = self.pred[row + cur] as usize;
            nodes.push(cur);
        }
        if a <= b {
            nodes.reverse();
        }
        nodes
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            components: n,
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
            self.components -= 1;
        }
    }

    pub(crate) fn components(&self) -> usize {
        self.components
    }
}
