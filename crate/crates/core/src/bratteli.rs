//! Leveled Bratteli diagrams and their DOT rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    /// Position along the chain, e.g. the index vector for core diagrams.
    pub index: Vec<usize>,
    pub labels: Vec<String>,
    pub sizes: Vec<usize>,
}

/// `edges[m][i][j]` is the multiplicity of block `i` of level `m` inside
/// block `j` of level `m + 1`, so `sizes[m+1][j] = Σ_i sizes[m][i]·edges[m][i][j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BratteliDiagram {
    pub levels: Vec<Level>,
    pub edges: Vec<Vec<Vec<usize>>>,
}

impl BratteliDiagram {
    /// Checks the size recursion with integer exactness.
    pub fn check_recursion(&self) -> Result<()> {
        if self.edges.len() + 1 != self.levels.len() && !self.levels.is_empty() {
            return Err(Error::Domain(format!(
                "{} levels need {} edge matrices, found {}",
                self.levels.len(),
                self.levels.len() - 1,
                self.edges.len()
            )));
        }
        for (m, e) in self.edges.iter().enumerate() {
            let (lo, hi) = (&self.levels[m], &self.levels[m + 1]);
            if e.len() != lo.sizes.len() || e.iter().any(|row| row.len() != hi.sizes.len()) {
                return Err(Error::Domain(format!("edge matrix {m} has the wrong shape")));
            }
            for (j, &target) in hi.sizes.iter().enumerate() {
                let got: usize = (0..lo.sizes.len()).map(|i| lo.sizes[i] * e[i][j]).sum();
                if got != target {
                    return Err(Error::Numerical(format!(
                        "level {} block {j}: size {target} but embedded blocks account for {got}",
                        m + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// One cluster per level, edges labeled with their multiplicities.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", escape(name));
        let _ = writeln!(out, "  rankdir=TB;");
        let _ = writeln!(out, "  node [shape=circle];");
        for (m, level) in self.levels.iter().enumerate() {
            let _ = writeln!(out, "  subgraph cluster_level{m} {{");
            let _ = writeln!(out, "    label=\"level {m} {:?}\";", level.index);
            let _ = writeln!(out, "    rank=same;");
            for (i, (label, size)) in level.labels.iter().zip(&level.sizes).enumerate() {
                let _ = writeln!(
                    out,
                    "    n{m}_{i} [label=\"{}\\n{size}\"];",
                    escape(label)
                );
            }
            let _ = writeln!(out, "  }}");
        }
        for (m, e) in self.edges.iter().enumerate() {
            for (i, row) in e.iter().enumerate() {
                for (j, &mult) in row.iter().enumerate() {
                    if mult > 0 {
                        let _ = writeln!(out, "  n{m}_{i} -> n{}_{j} [label=\"{mult}\"];", m + 1);
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
