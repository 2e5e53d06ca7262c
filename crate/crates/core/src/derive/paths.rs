use std::fmt;

use crate::model::{Edge, Expr, FieldId, MessageGraph};

/// Edge indices from the initial node to some node, in traversal order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(Vec<usize>);

impl Path {
    pub fn new(edges: Vec<usize>) -> Path {
        Path(edges)
    }

    pub fn edges(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// The path without its last edge, i.e. the path to the predecessor.
    pub fn init(&self) -> Path {
        Path(self.0[..self.0.len().saturating_sub(1)].to_vec())
    }

    pub fn extended(&self, edge: usize) -> Path {
        let mut v = self.0.clone();
        v.push(edge);
        Path(v)
    }

    /// Node the path ends at; the initial node for the empty path.
    pub fn end<'g>(&self, graph: &'g MessageGraph) -> &'g FieldId {
        match self.last() {
            Some(i) => &graph.edge(i).target,
            None => &FieldId::Initial,
        }
    }

    /// Compact identifier, e.g. `0_1_2`.
    pub fn key(&self) -> String {
        self.0.iter().map(ToString::to_string).collect::<Vec<_>>().join("_")
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
    }
}

/// All paths from the initial node to `node`, ordered lexicographically by
/// edge index. The initial node itself is reached by the empty path.
pub fn paths_to(graph: &MessageGraph, node: &FieldId) -> Vec<Path> {
    if *node == FieldId::Initial {
        return vec![Path::default()];
    }
    let mut out: Vec<Path> = graph
        .incoming(node)
        .flat_map(|e| {
            paths_to(graph, &graph.edge(e).source).into_iter().map(move |p| p.extended(e))
        })
        .collect();
    out.sort();
    out
}

pub fn path_edges<'g>(graph: &'g MessageGraph, path: &Path) -> Vec<&'g Edge> {
    path.edges().iter().map(|&i| graph.edge(i)).collect()
}

/// Replaces every reference to a field on `prefix` by that field's location
/// on `prefix`, recursively, so the result only depends on the buffer.
/// A field value becomes a read of the field's bits.
pub fn subs(graph: &MessageGraph, prefix: &[usize], expr: &Expr) -> Expr {
    let locate = |field: &FieldId| -> Option<(Expr, Expr)> {
        let pos = prefix.iter().rposition(|&i| &graph.edge(i).target == field)?;
        let edge = graph.edge(prefix[pos]);
        let earlier = &prefix[..pos];
        Some((subs(graph, earlier, &edge.first), subs(graph, earlier, &edge.length)))
    };
    expr.map(&mut |e| match &e {
        Expr::FieldValue(f) => match locate(f) {
            Some((first, length)) => Expr::read(first, length),
            None => e,
        },
        Expr::FieldFirst(f) => locate(f).map_or(e, |(first, _)| first),
        Expr::FieldLength(f) => locate(f).map_or(e, |(_, length)| length),
        _ => e,
    })
    .fold()
}
