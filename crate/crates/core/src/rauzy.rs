//! Extended Rauzy classes and diagrams.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::IntMatrix;
use crate::perm::PermutationPair;

/// Which letter names an arrow of type `ε`.
///
/// `FirstLetter` takes the letter in first position of row `ε` and
/// `Winner` the letter in last position of row `ε` (the letter whose
/// interval is shortened by the induction step). Under `FirstLetter` the
/// names never change along a path, since neither move alters the first
/// position of a row; with more than two letters the accelerated grouping
/// then never completes a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NameConvention {
    #[default]
    FirstLetter,
    Winner,
}

impl fmt::Display for NameConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameConvention::FirstLetter => "first_letter",
            NameConvention::Winner => "winner",
        })
    }
}

/// Name of the arrow of type `e` leaving `pair`.
pub fn arrow_name(pair: &PermutationPair, e: usize, conv: NameConvention) -> usize {
    match conv {
        NameConvention::FirstLetter => pair.first(e),
        NameConvention::Winner => pair.last(e),
    }
}

/// Elementary matrix of the step of type `e` from `pair`: `I + e_{w,l}` with
/// `w` the last letter of row `e` and `l` the last letter of the other row.
pub fn elementary_matrix(pair: &PermutationPair, e: usize) -> IntMatrix {
    IntMatrix::elementary(pair.d(), pair.last(e), pair.last(1 - e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RauzyArrow {
    pub source: usize,
    pub eps: usize,
    pub target: usize,
    pub name: usize,
}

/// Vertices are pairs, keyed by the pair itself; every vertex has exactly
/// one arrow of each type.
#[derive(Debug, Clone)]
pub struct RauzyDiagram {
    vertices: Vec<PermutationPair>,
    index: HashMap<PermutationPair, usize>,
    arrows: Vec<RauzyArrow>,
    convention: NameConvention,
}

#[derive(Serialize)]
struct VertexJson {
    id: usize,
    alphabet: Vec<String>,
    pi0: Vec<usize>,
    pi1: Vec<usize>,
    rows: String,
}

#[derive(Serialize)]
struct ArrowJson {
    src: usize,
    eps: usize,
    name: String,
    dst: usize,
}

#[derive(Serialize)]
struct DiagramJson {
    convention: NameConvention,
    vertices: Vec<VertexJson>,
    arrows: Vec<ArrowJson>,
}

impl RauzyDiagram {
    /// Breadth-first saturation of `pair` under both moves.
    pub fn extended_class(pair: &PermutationPair, convention: NameConvention) -> Result<Self> {
        pair.require_admissible()?;
        let mut vertices = vec![pair.clone()];
        let mut index = HashMap::from([(pair.clone(), 0usize)]);
        let mut arrows = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for e in 0..2 {
                let src = vertices[v].clone();
                let dst = src.rauzy_move(e)?;
                let t = match index.get(&dst) {
                    Some(&t) => t,
                    None => {
                        let t = vertices.len();
                        index.insert(dst.clone(), t);
                        vertices.push(dst);
                        queue.push_back(t);
                        t
                    }
                };
                arrows.push(RauzyArrow {
                    source: v,
                    eps: e,
                    target: t,
                    name: arrow_name(&src, e, convention),
                });
            }
        }
        Ok(RauzyDiagram {
            vertices,
            index,
            arrows,
            convention,
        })
    }

    pub fn vertices(&self) -> &[PermutationPair] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[RauzyArrow] {
        &self.arrows
    }

    pub fn convention(&self) -> NameConvention {
        self.convention
    }

    pub fn index_of(&self, pair: &PermutationPair) -> Option<usize> {
        self.index.get(pair).copied()
    }

    /// Arrow of type `e` leaving vertex `v`.
    pub fn arrow(&self, v: usize, e: usize) -> &RauzyArrow {
        &self.arrows[2 * v + e]
    }

    /// Every vertex reaches every other vertex.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.vertices.len();
        let reach = |rev: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for a in &self.arrows {
                    let (from, to) = if rev { (a.target, a.source) } else { (a.source, a.target) };
                    if from == v && !seen[to] {
                        seen[to] = true;
                        stack.push(to);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(false) && reach(true)
    }

    /// Vertex reached by following the types in `path` from `start`.
    pub fn follow(&self, start: usize, path: &[usize]) -> usize {
        path.iter().fold(start, |v, &e| self.arrow(v, e).target)
    }

    /// Graphviz rendering; arrows are labelled `ε/name`.
    pub fn export_dot(&self) -> String {
        let mut out = String::from("digraph rauzy {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            out.push_str(&format!("  v{i} [label=\"{v}\"];\n"));
        }
        for a in &self.arrows {
            let name = self.vertices[a.source].name(a.name);
            out.push_str(&format!(
                "  v{} -> v{} [label=\"{}/{}\"];\n",
                a.source, a.target, a.eps, name
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = DiagramJson {
            convention: self.convention,
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(id, p)| VertexJson {
                    id,
                    alphabet: p.names().to_vec(),
                    pi0: p.positions(0),
                    pi1: p.positions(1),
                    rows: p.to_string(),
                })
                .collect(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ArrowJson {
                    src: a.source,
                    eps: a.eps,
                    name: self.vertices[a.source].name(a.name).to_string(),
                    dst: a.target,
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("diagram serializes")
    }
}

/// Product `E_1 ⋯ E_k` of the elementary matrices along the path of types
/// `path` starting at `pair`, and the pair reached at the end.
pub fn path_matrix(pair: &PermutationPair, path: &[usize]) -> Result<(IntMatrix, PermutationPair)> {
    let mut m = IntMatrix::identity(pair.d());
    let mut cur = pair.clone();
    for &e in path {
        m.mul_elementary_right(cur.last(e), cur.last(1 - e));
        cur = cur.rauzy_move(e)?;
    }
    Ok((m, cur))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_letters_give_one_vertex() {
        let p = PermutationPair::symmetric(2);
        let g = RauzyDiagram::extended_class(&p, NameConvention::FirstLetter).unwrap();
        assert_eq!(g.vertices().len(), 1);
        assert_eq!(g.arrows().len(), 2);
        assert!(g.arrows().iter().all(|a| a.source == 0 && a.target == 0));
        let dot = g.export_dot();
        assert_eq!(dot.matches("->").count(), 2);
        assert!(dot.contains("0/A") && dot.contains("1/B"));
    }

    #[test]
    fn names_under_both_conventions() {
        let p = PermutationPair::symmetric(3);
        assert_eq!(arrow_name(&p, 0, NameConvention::FirstLetter), 0);
        assert_eq!(arrow_name(&p, 1, NameConvention::FirstLetter), 2);
        assert_eq!(arrow_name(&p, 0, NameConvention::Winner), 2);
        assert_eq!(arrow_name(&p, 1, NameConvention::Winner), 0);
    }

    #[test]
    fn path_matrix_of_swap_loop() {
        let p = PermutationPair::symmetric(2);
        let (m, end) = path_matrix(&p, &[0, 1]).unwrap();
        assert_eq!(end, p);
        assert_eq!(m, IntMatrix::from_rows(&[vec![1, 1], vec![1, 2]]));
    }
}
