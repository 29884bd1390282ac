//! Graphviz export of the message graph.

use crate::graph::build_message_graph;
use crate::model::TopologyMatrix;

/// Alignment edges are solid and undirected; conflict edges are dashed, red
/// and point from a message to the source interfering at its receiver.
pub fn to_dot(t: &TopologyMatrix) -> String {
    let g = build_message_graph(t);
    let mut out = String::from("digraph messages {\n    node [shape=circle];\n");
    for i in 0..t.k() {
        out.push_str(&format!("    W{};\n", i + 1));
    }
    for (i, j) in g.alignment_edges() {
        out.push_str(&format!("    W{} -> W{} [dir=none];\n", i + 1, j + 1));
    }
    for (i, j) in g.conflict_edges() {
        out.push_str(&format!(
            "    W{} -> W{} [style=dashed, color=red];\n",
            i + 1,
            j + 1
        ));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::paired4_matrix;

    #[test]
    fn paired4_dot() {
        let dot = to_dot(&paired4_matrix());
        assert!(dot.contains("W1 -> W2 [dir=none];"));
        assert!(dot.contains("W1 -> W3 [style=dashed, color=red];"));
        assert_eq!(dot.matches("dashed").count(), 8);
        assert_eq!(dot.matches("dir=none").count(), 2);
    }
}
