//! Solvability check: no variable may depend nonlinearly on itself, directly
//! or through other variables.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::strongly_connected_components;
use crate::poly::PolyMap;

#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord)]
pub enum EdgeKind {
    Linear,
    Nonlinear,
}

/// `u -> v` when the image of `u` mentions `v`; `Nonlinear` when `v`
/// occurs in a monomial of degree two or more.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DepGraph {
    edges: Vec<Vec<(usize, EdgeKind)>>,
}

impl DepGraph {
    pub fn nvars(&self) -> usize {
        self.edges.len()
    }

    pub fn edges_from(&self, u: usize) -> &[(usize, EdgeKind)] {
        &self.edges[u]
    }

    pub fn edge(&self, u: usize, v: usize) -> Option<EdgeKind> {
        self.edges[u].iter().find(|(w, _)| *w == v).map(|(_, k)| *k)
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        self.edges
            .iter()
            .map(|es| es.iter().map(|(v, _)| *v).collect())
            .collect()
    }
}

pub fn build_dep_graph(g: &PolyMap) -> DepGraph {
    let n = g.nvars();
    let edges = (0..n)
        .map(|u| {
            let mut kinds: Vec<Option<EdgeKind>> = vec![None; n];
            for (m, _) in g.component(u).terms() {
                let kind = if m.degree() >= 2 {
                    EdgeKind::Nonlinear
                } else {
                    EdgeKind::Linear
                };
                for v in m.support() {
                    kinds[v] = kinds[v].max(Some(kind));
                }
            }
            kinds
                .into_iter()
                .enumerate()
                .filter_map(|(v, k)| k.map(|k| (v, k)))
                .collect()
        })
        .collect();
    DepGraph { edges }
}

/// Ordered variable blocks: each block's image is linear in itself plus a
/// polynomial of earlier blocks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SolvablePartition {
    pub blocks: Vec<Vec<usize>>,
}

impl SolvablePartition {
    pub fn render(&self, vars: &[String]) -> String {
        self.blocks
            .iter()
            .map(|b| {
                let names: Vec<&str> = b.iter().map(|&i| vars[i].as_str()).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect::<Vec<_>>()
            .join(" < ")
    }
}

impl fmt::Display for SolvablePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = (0..self.blocks.iter().map(Vec::len).sum())
            .map(|i| format!("x{i}"))
            .collect();
        f.write_str(&self.render(&vars))
    }
}

/// Variable indices of a cycle through a nonlinear edge inside `block`.
fn witness_cycle(graph: &DepGraph, block: &[usize]) -> Vec<usize> {
    let inside = |v: usize| block.contains(&v);
    for &u in block {
        for &(v, kind) in graph.edges_from(u) {
            if kind != EdgeKind::Nonlinear || !inside(v) {
                continue;
            }
            // u -> v nonlinear; close the cycle with a BFS path v ~> u.
            let mut prev = vec![None; graph.nvars()];
            let mut queue = std::collections::VecDeque::from([v]);
            let mut seen = vec![false; graph.nvars()];
            seen[v] = true;
            while let Some(w) = queue.pop_front() {
                if w == u {
                    break;
                }
                for &(x, _) in graph.edges_from(w) {
                    if inside(x) && !seen[x] {
                        seen[x] = true;
                        prev[x] = Some(w);
                        queue.push_back(x);
                    }
                }
            }
            let mut path = vec![u];
            let mut cur = u;
            while cur != v {
                cur = prev[cur].expect("block is strongly connected");
                path.push(cur);
            }
            path.reverse();
            // path runs v ~> u; rotate so the cycle starts at u.
            path.rotate_right(1);
            path.dedup();
            return path;
        }
    }
    Vec::new()
}

pub fn check_solvable_indices(g: &PolyMap) -> std::result::Result<SolvablePartition, Vec<usize>> {
    let graph = build_dep_graph(g);
    let blocks = strongly_connected_components(&graph.adjacency());
    for block in &blocks {
        let nonlinear_inside = block.iter().any(|&u| {
            graph
                .edges_from(u)
                .iter()
                .any(|&(v, k)| k == EdgeKind::Nonlinear && block.contains(&v))
        });
        if nonlinear_inside {
            return Err(witness_cycle(&graph, block));
        }
    }
    Ok(SolvablePartition { blocks })
}

/// Partition into strongly connected components in dependency order, or
/// `NotSolvable` with a witness cycle through a nonlinear edge.
pub fn check_solvable(g: &PolyMap, vars: &[String]) -> Result<SolvablePartition> {
    check_solvable_indices(g).map_err(|cycle| Error::NotSolvable {
        cycle: cycle.into_iter().map(|i| vars[i].clone()).collect(),
    })
}

/// Direct check of the block-triangular shape against a partition.
pub fn verify_partition(g: &PolyMap, partition: &SolvablePartition) -> bool {
    let n = g.nvars();
    let mut block_of = vec![usize::MAX; n];
    for (b, vars) in partition.blocks.iter().enumerate() {
        for &v in vars {
            if block_of[v] != usize::MAX {
                return false;
            }
            block_of[v] = b;
        }
    }
    if block_of.contains(&usize::MAX) {
        return false;
    }
    for u in 0..n {
        for (m, _) in g.component(u).terms() {
            let own = m.support().filter(|&v| block_of[v] == block_of[u]).count();
            let later = m.support().any(|v| block_of[v] > block_of[u]);
            if later {
                return false;
            }
            // Same-block variables may only appear in degree-one terms.
            if own > 0 && m.degree() > 1 {
                return false;
            }
        }
    }
    true
}
