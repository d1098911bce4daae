//! Seeded random generators for connected, properly colored EC and PO
//! multigraphs.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Color, ColoredMultigraph, GraphBuilder, Model, NodeId};

/// Shape of a random graph. Nodes are 0..nodes; a random spanning tree comes
/// first, then `min_loops` loops per node, then each node gets one more loop
/// with probability `loop_chance`, then up to `extra_edges` further edges.
/// Every addition uses a color free at its endpoints, so the maximum degree
/// is at most `k` (EC) or `2k` (PO).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomGraph {
    pub model: Model,
    pub nodes: usize,
    pub k: Color,
    pub extra_edges: usize,
    pub min_loops: usize,
    pub loop_chance: f64,
}

impl RandomGraph {
    pub fn ec(nodes: usize, k: Color) -> RandomGraph {
        RandomGraph {
            model: Model::EC,
            nodes,
            k,
            extra_edges: 0,
            min_loops: 0,
            loop_chance: 0.0,
        }
    }

    pub fn po(nodes: usize, k: Color) -> RandomGraph {
        RandomGraph {
            model: Model::PO,
            ..RandomGraph::ec(nodes, k)
        }
    }

    pub fn extra_edges(self, extra_edges: usize) -> RandomGraph {
        RandomGraph {
            extra_edges,
            ..self
        }
    }

    pub fn min_loops(self, min_loops: usize) -> RandomGraph {
        RandomGraph { min_loops, ..self }
    }

    pub fn loop_chance(self, loop_chance: f64) -> RandomGraph {
        RandomGraph {
            loop_chance,
            ..self
        }
    }

    /// # Panics
    /// If the model is neither EC nor PO, if `nodes` is 0, or if a tree with
    /// room for `min_loops` loops per node cannot be built
    /// (`k < min_loops + 2` with more than one node).
    pub fn generate(&self, seed: u64) -> ColoredMultigraph {
        assert!(matches!(self.model, Model::EC | Model::PO));
        assert!(self.nodes > 0);
        assert!(self.nodes == 1 || self.k as usize >= self.min_loops + 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = Palette::new(self.model, self.nodes, self.k);
        let mut b = GraphBuilder::new(self.model, self.k).nodes(0..self.nodes as NodeId);

        for v in 1..self.nodes {
            let parents: Vec<usize> = (0..v)
                .filter(|&u| state.spare(u) > self.min_loops && state.can_join(u, v))
                .collect();
            let u = parents[rng.random_range(0..parents.len())];
            b = state
                .join(b, &mut rng, u, v)
                .expect("parent has a free color");
        }
        for v in 0..self.nodes {
            for _ in 0..self.min_loops {
                b = state.join(b, &mut rng, v, v).unwrap_or_else(|b| b);
            }
            if self.loop_chance > 0.0 && rng.random_bool(self.loop_chance) {
                b = state.join(b, &mut rng, v, v).unwrap_or_else(|b| b);
            }
        }
        for _ in 0..self.extra_edges {
            let u = rng.random_range(0..self.nodes);
            let v = rng.random_range(0..self.nodes);
            b = state.join(b, &mut rng, u, v).unwrap_or_else(|b| b);
        }
        b.build().expect("generator respects the coloring rules")
    }
}

/// Free colors per node: one set for EC, out and in sets for PO.
struct Palette {
    model: Model,
    out: Vec<BTreeSet<Color>>,
    inc: Vec<BTreeSet<Color>>,
}

impl Palette {
    fn new(model: Model, n: usize, k: Color) -> Palette {
        let all: BTreeSet<Color> = (1..=k).collect();
        Palette {
            model,
            out: vec![all.clone(); n],
            inc: vec![all; n],
        }
    }

    fn common(&self, u: usize, v: usize) -> Vec<Color> {
        match self.model {
            Model::EC => self.out[u].intersection(&self.out[v]).copied().collect(),
            _ => self.out[u].intersection(&self.inc[v]).copied().collect(),
        }
    }

    /// Colors still usable for a loop at u.
    fn spare(&self, u: usize) -> usize {
        self.common(u, u).len()
    }

    fn can_join(&self, u: usize, v: usize) -> bool {
        !self.common(u, v).is_empty() || !self.common(v, u).is_empty()
    }

    /// Adds an edge (or arc, in either direction) between u and v with a
    /// random common free color. Hands the builder back unchanged if none.
    fn join(
        &mut self,
        b: GraphBuilder,
        rng: &mut ChaCha8Rng,
        u: usize,
        v: usize,
    ) -> Result<GraphBuilder, GraphBuilder> {
        let (u, v) = if self.model == Model::PO && rng.random_bool(0.5) {
            (v, u)
        } else {
            (u, v)
        };
        let mut options = self.common(u, v);
        let (mut tail, mut head) = (u, v);
        if options.is_empty() && self.model == Model::PO {
            options = self.common(v, u);
            (tail, head) = (v, u);
        }
        if options.is_empty() {
            return Err(b);
        }
        let c = options[rng.random_range(0..options.len())];
        Ok(match self.model {
            Model::EC => {
                self.out[tail].remove(&c);
                self.out[head].remove(&c);
                b.edge(tail as NodeId, head as NodeId, c)
            }
            _ => {
                self.out[tail].remove(&c);
                self.inc[head].remove(&c);
                b.arc(tail as NodeId, head as NodeId, c)
            }
        })
    }
}

/// A random EC graph in which every node carries at least one loop.
pub fn random_loopy_ec(nodes: usize, k: Color, seed: u64) -> ColoredMultigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RandomGraph::ec(nodes, k)
        .min_loops(1)
        .loop_chance(0.3)
        .extra_edges(rng.random_range(0..=nodes))
        .generate(rng.random())
}

/// A random PO tree: oriented, properly colored, no loops.
pub fn random_po_tree(nodes: usize, k: Color, seed: u64) -> ColoredMultigraph {
    RandomGraph::po(nodes, k).generate(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        for seed in 0..40 {
            let g = RandomGraph::ec(12, 4)
                .extra_edges(6)
                .loop_chance(0.5)
                .generate(seed);
            assert!(g.is_connected());
            assert!(g.max_degree() <= 4);
            assert_eq!(g.node_count(), 12);

            let t = random_po_tree(30, 3, seed);
            assert!(t.is_tree_ignoring_loops());
            assert_eq!(t.edge_count(), 29);

            let l = random_loopy_ec(6, 4, seed);
            assert!(l.node_ids().all(|v| !l.loops_at(v).unwrap().is_empty()));
        }
    }

    #[test]
    fn deterministic() {
        let shape = RandomGraph::po(20, 3).extra_edges(10).loop_chance(0.4);
        assert_eq!(shape.generate(7), shape.generate(7));
        assert_ne!(shape.generate(7), shape.generate(8));
    }
}
