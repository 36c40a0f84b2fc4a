//! The order-3 triangular chandelier lattice.
//!
//! Every vertex has three direct successors on the next level; the three
//! siblings under a common parent form a triangle of same-level edges.
//! Vertices are identified by `(level, index)` where `index` is the base-3
//! path from the root, so parent, children and grandchildren are arithmetic.
//! Flat ids enumerate vertices level by level.

use std::fmt;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// Number of successors of every vertex.
pub const BRANCHING: usize = 3;

/// Largest depth [`TclLattice::build`] accepts.
pub const MAX_DEPTH: usize = 10;

/// Flat vertex id, level-major.
pub type VertexId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Vertex {
    pub level: usize,
    pub index: usize,
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.index)
    }
}

/// Pair class of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairClass {
    /// Parent/child edge.
    Nn,
    /// Sibling edge.
    Slnn,
    /// Grandparent/grandchild pair.
    Pnnn,
}

impl PairClass {
    pub fn label(self) -> &'static str {
        match self {
            PairClass::Nn => "NN",
            PairClass::Slnn => "SLNN",
            PairClass::Pnnn => "PNNN",
        }
    }
}

/// A vertex together with its three direct successors, in ascending index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitSemiBall {
    pub center: VertexId,
    pub children: [VertexId; 3],
}

#[derive(Debug, Clone)]
pub struct TclLattice {
    depth: usize,
    /// `level_start[m]` is the flat id of `(m, 0)`; one extra entry at the end.
    level_start: Vec<usize>,
    nn_edges: Vec<(VertexId, VertexId)>,
    slnn_edges: Vec<(VertexId, VertexId)>,
    pnnn_pairs: Vec<(VertexId, VertexId)>,
}

fn pow3(m: usize) -> usize {
    BRANCHING.pow(m as u32)
}

impl TclLattice {
    /// Builds the ball of radius `depth` around the root.
    pub fn build(depth: i64) -> Result<Self> {
        if depth < 0 {
            return Err(Error::domain(format!("depth must be non-negative, got {depth}")));
        }
        let depth = depth as usize;
        if depth > MAX_DEPTH {
            return Err(Error::capacity(format!(
                "depth {depth} exceeds the lattice cap of {MAX_DEPTH}"
            )));
        }

        let mut level_start = Vec::with_capacity(depth + 2);
        let mut acc = 0;
        for m in 0..=depth {
            level_start.push(acc);
            acc += pow3(m);
        }
        level_start.push(acc);

        let mut lattice = TclLattice {
            depth,
            level_start,
            nn_edges: Vec::new(),
            slnn_edges: Vec::new(),
            pnnn_pairs: Vec::new(),
        };

        for m in 1..=depth {
            for i in 0..pow3(m) {
                let child = lattice.id(Vertex { level: m, index: i });
                let parent = lattice.id(Vertex { level: m - 1, index: i / BRANCHING });
                lattice.nn_edges.push((parent, child));
            }
            for group in 0..pow3(m - 1) {
                let base = lattice.id(Vertex { level: m, index: BRANCHING * group });
                lattice.slnn_edges.extend([(base, base + 1), (base, base + 2), (base + 1, base + 2)]);
            }
        }
        for m in 2..=depth {
            for i in 0..pow3(m) {
                let grandchild = lattice.id(Vertex { level: m, index: i });
                let ancestor = lattice.id(Vertex { level: m - 2, index: i / (BRANCHING * BRANCHING) });
                lattice.pnnn_pairs.push((ancestor, grandchild));
            }
        }
        lattice.nn_edges.sort_unstable();
        lattice.slnn_edges.sort_unstable();
        lattice.pnnn_pairs.sort_unstable();
        Ok(lattice)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_vertices(&self) -> usize {
        self.level_start[self.depth + 1]
    }

    pub fn id(&self, v: Vertex) -> VertexId {
        debug_assert!(v.level <= self.depth && v.index < pow3(v.level));
        self.level_start[v.level] + v.index
    }

    pub fn vertex(&self, id: VertexId) -> Vertex {
        debug_assert!(id < self.num_vertices());
        let level = self.level_start.partition_point(|&s| s <= id) - 1;
        Vertex { level, index: id - self.level_start[level] }
    }

    pub fn level(&self, id: VertexId) -> usize {
        self.vertex(id).level
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.num_vertices()).map(|id| self.vertex(id))
    }

    pub fn nn_edges(&self) -> &[(VertexId, VertexId)] {
        &self.nn_edges
    }

    pub fn slnn_edges(&self) -> &[(VertexId, VertexId)] {
        &self.slnn_edges
    }

    pub fn pnnn_pairs(&self) -> &[(VertexId, VertexId)] {
        &self.pnnn_pairs
    }

    pub fn pairs(&self, class: PairClass) -> &[(VertexId, VertexId)] {
        match class {
            PairClass::Nn => &self.nn_edges,
            PairClass::Slnn => &self.slnn_edges,
            PairClass::Pnnn => &self.pnnn_pairs,
        }
    }

    pub fn parent(&self, id: VertexId) -> Option<VertexId> {
        let v = self.vertex(id);
        (v.level > 0).then(|| self.id(Vertex { level: v.level - 1, index: v.index / BRANCHING }))
    }

    /// Direct prolonged successors, `None` on the outermost level.
    pub fn successors(&self, id: VertexId) -> Option<[VertexId; 3]> {
        let v = self.vertex(id);
        if v.level >= self.depth {
            return None;
        }
        let first = self.id(Vertex { level: v.level + 1, index: BRANCHING * v.index });
        Some([first, first + 1, first + 2])
    }

    /// Same-level nearest neighbours: the two siblings. Empty for the root.
    pub fn siblings(&self, id: VertexId) -> Vec<VertexId> {
        let v = self.vertex(id);
        if v.level == 0 {
            return Vec::new();
        }
        let base = id - v.index % BRANCHING;
        (base..base + BRANCHING).filter(|&s| s != id).collect()
    }

    /// Neighbours in the graph whose edges are NN ∪ SLNN.
    pub fn neighbours(&self, id: VertexId) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self.parent(id).into_iter().collect();
        out.extend(self.siblings(id));
        if let Some(children) = self.successors(id) {
            out.extend(children);
        }
        out
    }

    /// Sphere `W_m`.
    pub fn sphere(&self, m: usize) -> Result<Vec<VertexId>> {
        if m > self.depth {
            return Err(Error::domain(format!("sphere radius {m} exceeds depth {}", self.depth)));
        }
        Ok((self.level_start[m]..self.level_start[m + 1]).collect())
    }

    /// One semi-ball per vertex of `W_m`; requires `m < depth`.
    pub fn semi_balls(&self, m: usize) -> Result<Vec<UnitSemiBall>> {
        if m >= self.depth {
            return Err(Error::domain(format!(
                "semi-balls need a centre level below the depth ({m} >= {})",
                self.depth
            )));
        }
        Ok(self
            .sphere(m)?
            .into_iter()
            .map(|center| UnitSemiBall {
                center,
                children: self.successors(center).expect("centre below outer level"),
            })
            .collect())
    }

    /// Breadth-first distances from `source` in the NN ∪ SLNN graph.
    pub fn distances_from(&self, source: VertexId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_vertices()];
        let mut queue = std::collections::VecDeque::from([source]);
        dist[source] = 0;
        while let Some(u) = queue.pop_front() {
            for w in self.neighbours(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Plain-text edge list: one `TYPE u v` line per pair, flat ids.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for class in [PairClass::Nn, PairClass::Slnn, PairClass::Pnnn] {
            for &(u, v) in self.pairs(class) {
                writeln!(out, "{} {} {}", class.label(), u, v)?;
            }
        }
        Ok(())
    }

    pub fn stats(&self) -> LatticeStats {
        LatticeStats {
            depth: self.depth,
            vertices: self.num_vertices(),
            nn_edges: self.nn_edges.len(),
            slnn_edges: self.slnn_edges.len(),
            pnnn_pairs: self.pnnn_pairs.len(),
            sphere_sizes: (0..=self.depth).map(pow3).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeStats {
    pub depth: usize,
    pub vertices: usize,
    pub nn_edges: usize,
    pub slnn_edges: usize,
    pub pnnn_pairs: usize,
    pub sphere_sizes: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn counts(depth: i64) -> (usize, usize, usize, usize) {
        let l = TclLattice::build(depth).unwrap();
        (l.num_vertices(), l.nn_edges().len(), l.slnn_edges().len(), l.pnnn_pairs().len())
    }

    #[test]
    fn small_depth_counts() {
        assert_eq!(counts(0), (1, 0, 0, 0));
        assert_eq!(counts(2), (13, 12, 12, 9));
        assert_eq!(counts(3), (40, 39, 39, 36));
    }

    #[test]
    fn counting_laws() {
        for n in 1..=7usize {
            let l = TclLattice::build(n as i64).unwrap();
            let nn = (pow3(n + 1) - 3) / 2;
            let pnnn: usize = (0..n.saturating_sub(1)).map(|m| 9 * pow3(m)).sum();
            assert_eq!(l.nn_edges().len(), nn);
            assert_eq!(l.slnn_edges().len(), nn);
            assert_eq!(l.pnnn_pairs().len(), pnnn);
            for m in 0..=n {
                assert_eq!(l.sphere(m).unwrap().len(), pow3(m));
            }
        }
    }

    #[test]
    fn negative_and_oversized_depth() {
        assert!(matches!(TclLattice::build(-1), Err(Error::Domain(_))));
        assert!(matches!(TclLattice::build(MAX_DEPTH as i64 + 1), Err(Error::Capacity(_))));
        assert!(TclLattice::build(6).is_ok());
    }

    #[test]
    fn sphere_and_semi_ball_sizes() {
        let l2 = TclLattice::build(2).unwrap();
        assert_eq!(l2.sphere(1).unwrap().len(), 3);
        assert_eq!(l2.sphere(2).unwrap().len(), 9);
        assert!(l2.sphere(3).is_err());
        assert_eq!(l2.semi_balls(0).unwrap().len(), 1);
        assert_eq!(l2.semi_balls(1).unwrap().len(), 3);
        assert!(l2.semi_balls(2).is_err());
        let l3 = TclLattice::build(3).unwrap();
        assert_eq!(l3.sphere(3).unwrap().len(), 27);
        assert_eq!(l3.semi_balls(2).unwrap().len(), 9);
    }

    #[test]
    fn semi_ball_children_are_successors_in_order() {
        let l = TclLattice::build(3).unwrap();
        for m in 0..3 {
            for ball in l.semi_balls(m).unwrap() {
                assert_eq!(Some(ball.children), l.successors(ball.center));
                assert!(ball.children.windows(2).all(|w| w[0] < w[1]));
                for c in ball.children {
                    assert_eq!(l.parent(c), Some(ball.center));
                }
            }
        }
    }

    #[test]
    fn degrees() {
        let l = TclLattice::build(4).unwrap();
        assert_eq!(l.neighbours(0).len(), 3);
        for id in 1..l.num_vertices() {
            let v = l.vertex(id);
            assert_eq!(l.siblings(id).len(), 2);
            if v.level < l.depth() {
                assert_eq!(l.neighbours(id).len(), 6, "vertex {v}");
                assert_eq!(l.successors(id).unwrap().len(), 3);
            } else {
                assert!(l.successors(id).is_none());
            }
        }
    }

    #[test]
    fn pair_geometry() {
        let l = TclLattice::build(4).unwrap();
        for &(x, y) in l.slnn_edges() {
            assert_eq!(l.level(x), l.level(y));
            assert_eq!(l.distances_from(x)[y], 1);
            assert_eq!(l.parent(x), l.parent(y));
        }
        for &(x, y) in l.pnnn_pairs() {
            assert_eq!(l.level(y), l.level(x) + 2);
            assert_eq!(l.parent(y).and_then(|p| l.parent(p)), Some(x));
            assert_eq!(l.distances_from(x)[y], 2);
        }
        for &(x, y) in l.nn_edges() {
            assert_eq!(l.parent(y), Some(x));
        }
    }

    #[test]
    fn classes_are_disjoint_and_duplicate_free() {
        let l = TclLattice::build(4).unwrap();
        let sets: Vec<HashSet<(usize, usize)>> = [PairClass::Nn, PairClass::Slnn, PairClass::Pnnn]
            .iter()
            .map(|&c| l.pairs(c).iter().copied().collect())
            .collect();
        for (set, class) in sets.iter().zip([PairClass::Nn, PairClass::Slnn, PairClass::Pnnn]) {
            assert_eq!(set.len(), l.pairs(class).len());
            assert!(l.pairs(class).windows(2).all(|w| w[0] < w[1]));
        }
        assert!(sets[0].is_disjoint(&sets[1]));
        assert!(sets[0].is_disjoint(&sets[2]));
        assert!(sets[1].is_disjoint(&sets[2]));
    }

    #[test]
    fn vertex_id_round_trip() {
        let l = TclLattice::build(5).unwrap();
        for id in 0..l.num_vertices() {
            assert_eq!(l.id(l.vertex(id)), id);
        }
    }

    #[test]
    fn edge_list_format() {
        let l = TclLattice::build(1).unwrap();
        let mut buf = Vec::new();
        l.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, ["NN 0 1", "NN 0 2", "NN 0 3", "SLNN 1 2", "SLNN 1 3", "SLNN 2 3"]);
    }
}
