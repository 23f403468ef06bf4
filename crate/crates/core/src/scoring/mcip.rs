use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Image pixels as a 4-connected graph. Entering a traversable pixel costs
/// `1 / (T_vis + eps)`; other pixels are not part of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelGraph {
    pub width: usize,
    pub height: usize,
    weights: Vec<f64>,
    traversable: Vec<bool>,
}

impl PixelGraph {
    pub fn new(t_vis: &[f64], width: usize, height: usize, tau_trav: f64, eps: f64) -> Self {
        assert_eq!(t_vis.len(), width * height);
        Self {
            width,
            height,
            weights: t_vis.iter().map(|t| 1.0 / (t.max(0.0) + eps)).collect(),
            traversable: t_vis.iter().map(|t| *t > tau_trav).collect(),
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn is_traversable(&self, i: usize) -> bool {
        self.traversable[i]
    }

    /// Nearest traversable pixel within `radius` (Euclidean, ties by lowest
    /// row-major index).
    pub fn snap(&self, u: usize, v: usize, radius: usize) -> Option<usize> {
        let i = v * self.width + u;
        if self.traversable[i] {
            return Some(i);
        }
        let r = radius as i64;
        let mut best: Option<(i64, usize)> = None;
        for dv in -r..=r {
            for du in -r..=r {
                let d2 = du * du + dv * dv;
                if d2 > r * r {
                    continue;
                }
                let (x, y) = (u as i64 + du, v as i64 + dv);
                if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
                    continue;
                }
                let j = y as usize * self.width + x as usize;
                if self.traversable[j] && best.map_or(true, |(bd, bj)| d2 < bd || (d2 == bd && j < bj)) {
                    best = Some((d2, j));
                }
            }
        }
        best.map(|(_, j)| j)
    }

    fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let (u, v) = (i % self.width, i / self.width);
        let w = self.width;
        [
            (u > 0).then(|| i - 1),
            (u + 1 < w).then(|| i + 1),
            (v > 0).then(|| i - w),
            (v + 1 < self.height).then(|| i + w),
        ]
        .into_iter()
        .flatten()
        .filter(|j| self.traversable[*j])
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost image path from `source` to every pixel. When `targets` is
/// given the search stops once all reachable targets are settled; costs of
/// other pixels are then upper bounds.
pub fn mcip(graph: &PixelGraph, source: usize, targets: Option<&[bool]>) -> Vec<f64> {
    let n = graph.width * graph.height;
    let mut dist = vec![f64::INFINITY; n];
    if !graph.traversable[source] {
        return dist;
    }
    let mut remaining = targets.map(|t| t.iter().filter(|b| **b).count());
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry {
        cost: 0.0,
        index: source,
    });
    while let Some(Entry { cost, index }) = heap.pop() {
        if done[index] {
            continue;
        }
        done[index] = true;
        if let (Some(t), Some(r)) = (targets, remaining.as_mut()) {
            if t[index] {
                *r -= 1;
                if *r == 0 {
                    break;
                }
            }
        }
        for j in graph.neighbors(index) {
            let c = cost + graph.weights[j];
            if c < dist[j] {
                dist[j] = c;
                heap.push(Entry { cost: c, index: j });
            }
        }
    }
    dist
}
