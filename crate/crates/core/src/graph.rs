//! Arc-indexed symmetric digraphs with tail attachments and cycle bases.
//!
//! Arcs come in inverse pairs `(2e, 2e+1)` for edge `e`, so `inv(a) = a ^ 1`
//! and `edge(a) = a >> 1`. [`build_graph`] fixes a canonical edge order, which
//! makes every downstream matrix and report byte-reproducible.

use thiserror::Error;

pub type VertexId = usize;
pub type ArcId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loops unsupported: edge ({0},{0})")]
    SelfLoop(VertexId),
    #[error("vertex id {vertex} out of range (graph has {count} vertices)")]
    VertexOutOfRange { vertex: VertexId, count: usize },
    #[error("at least one tail attachment is required")]
    NoTails,
    #[error("truncation length must be >= 1")]
    ZeroTruncation,
}

/// Directed arc between two vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub origin: VertexId,
    pub terminus: VertexId,
}

/// Finite symmetric digraph: every arc is paired with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricDigraph {
    vertex_count: usize,
    arcs: Vec<Arc>,
    /// Outgoing arc ids per vertex, ascending.
    out_arcs: Vec<Vec<ArcId>>,
}

impl SymmetricDigraph {
    /// Builds from an ordered edge list; edge `e` becomes arcs `2e: u->v`
    /// and `2e+1: v->u` in the given orientation. No reordering is applied.
    pub fn from_edge_pairs(
        vertex_count: usize,
        edges: &[(VertexId, VertexId)],
    ) -> Result<Self, GraphError> {
        let mut arcs = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: w,
                        count: vertex_count,
                    });
                }
            }
            arcs.push(Arc {
                origin: u,
                terminus: v,
            });
            arcs.push(Arc {
                origin: v,
                terminus: u,
            });
        }
        let mut out_arcs = vec![Vec::new(); vertex_count];
        for (id, arc) in arcs.iter().enumerate() {
            out_arcs[arc.origin].push(id);
        }
        Ok(Self {
            vertex_count,
            arcs,
            out_arcs,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn edge_count(&self) -> usize {
        self.arcs.len() / 2
    }

    pub fn arc(&self, a: ArcId) -> Arc {
        self.arcs[a]
    }

    pub fn origin(&self, a: ArcId) -> VertexId {
        self.arcs[a].origin
    }

    pub fn terminus(&self, a: ArcId) -> VertexId {
        self.arcs[a].terminus
    }

    /// Inverse arc; an involution without fixed points.
    pub fn inv(&self, a: ArcId) -> ArcId {
        a ^ 1
    }

    /// Unoriented edge index carrying arc `a`.
    pub fn edge_of(&self, a: ArcId) -> EdgeId {
        a >> 1
    }

    /// Outgoing arcs at `u`, ascending by arc id.
    pub fn out_arcs(&self, u: VertexId) -> &[ArcId] {
        &self.out_arcs[u]
    }

    pub fn arc_ids(&self) -> impl Iterator<Item = ArcId> {
        0..self.arcs.len()
    }

    pub fn degree(&self, u: VertexId) -> usize {
        self.out_arcs[u].len()
    }

    /// Arc oriented `u -> v` on the `multiplicity`-th edge between `u` and `v`.
    pub fn arc_by_endpoints(
        &self,
        u: VertexId,
        v: VertexId,
        multiplicity: usize,
    ) -> Option<ArcId> {
        let mut seen = 0;
        for e in 0..self.edge_count() {
            let a = self.arcs[2 * e];
            let same = (a.origin == u && a.terminus == v) || (a.origin == v && a.terminus == u);
            if same {
                if seen == multiplicity {
                    return Some(if a.origin == u { 2 * e } else { 2 * e + 1 });
                }
                seen += 1;
            }
        }
        None
    }

    /// Number of connected components (isolated vertices count).
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.vertex_count];
        let mut components = 0;
        for root in 0..self.vertex_count {
            if seen[root] {
                continue;
            }
            components += 1;
            let mut stack = vec![root];
            seen[root] = true;
            while let Some(u) = stack.pop() {
                for &a in &self.out_arcs[u] {
                    let v = self.arcs[a].terminus;
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count <= 1 || self.component_count() == 1
    }
}

/// Builds the canonical symmetric digraph from an unordered edge list.
///
/// Edges are sorted by `(min endpoint, max endpoint)`, parallel copies keep
/// their input order, and the forward arc of each pair starts at the lower
/// endpoint.
pub fn build_graph(
    vertex_count: usize,
    edges: &[(VertexId, VertexId)],
) -> Result<SymmetricDigraph, GraphError> {
    let mut normalized: Vec<(VertexId, VertexId)> = Vec::with_capacity(edges.len());
    for &(u, v) in edges {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        normalized.push((u.min(v), u.max(v)));
    }
    normalized.sort(); // stable: parallel copies keep input order
    SymmetricDigraph::from_edge_pairs(vertex_count, &normalized)
}

/// One semi-infinite tail, stored as boundary data only.
///
/// `inbound_arc` is the tail arc pointing into the internal graph (the inflow
/// carrier), `outbound_arc` its inverse. The ids live after all internal arc
/// ids and are used for addressing, not for indexing internal state vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailAttachment {
    pub attach: VertexId,
    pub inbound_arc: ArcId,
    pub outbound_arc: ArcId,
}

/// Finite internal graph plus `r` tail attachments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailedGraph {
    internal: SymmetricDigraph,
    tails: Vec<TailAttachment>,
}

impl TailedGraph {
    pub fn internal(&self) -> &SymmetricDigraph {
        &self.internal
    }

    pub fn tails(&self) -> &[TailAttachment] {
        &self.tails
    }

    pub fn tail_count(&self) -> usize {
        self.tails.len()
    }

    /// Tail indices attached at `u`, ascending.
    pub fn tails_at(&self, u: VertexId) -> impl Iterator<Item = usize> + '_ {
        self.tails
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.attach == u)
            .map(|(j, _)| j)
    }

    /// Boundary edge index of tail `j` (continues the internal edge indices).
    pub fn boundary_edge(&self, j: usize) -> EdgeId {
        self.internal.edge_count() + j
    }
}

/// Attaches `r` tails at the given internal vertices.
pub fn attach_tails(
    internal: SymmetricDigraph,
    attach_vertices: &[VertexId],
) -> Result<TailedGraph, GraphError> {
    if attach_vertices.is_empty() {
        return Err(GraphError::NoTails);
    }
    let base = internal.arc_count();
    let mut tails = Vec::with_capacity(attach_vertices.len());
    for (j, &u) in attach_vertices.iter().enumerate() {
        if u >= internal.vertex_count() {
            return Err(GraphError::VertexOutOfRange {
                vertex: u,
                count: internal.vertex_count(),
            });
        }
        tails.push(TailAttachment {
            attach: u,
            inbound_arc: base + 2 * j,
            outbound_arc: base + 2 * j + 1,
        });
    }
    Ok(TailedGraph { internal, tails })
}

/// A tailed graph with every tail replaced by a finite path of `L` vertices.
#[derive(Debug, Clone)]
pub struct TruncatedGraph {
    pub graph: SymmetricDigraph,
    pub tail_len: usize,
    /// Per tail, per segment `i` (0 = nearest the internal graph): the arc
    /// pointing toward the internal graph. Segment 0 realizes `e_j`.
    pub inbound_arcs: Vec<Vec<ArcId>>,
}

impl TruncatedGraph {
    /// Truncated arc realizing the boundary arc `e_j`.
    pub fn e_arc(&self, j: usize) -> ArcId {
        self.inbound_arcs[j][0]
    }

    /// Truncated arc realizing `ē_j`.
    pub fn e_bar_arc(&self, j: usize) -> ArcId {
        self.e_arc(j) ^ 1
    }
}

/// Replaces each tail by a path of `L` vertices (oracle support).
///
/// Internal vertices and arcs keep their ids; tail arcs are appended in tail
/// order so per-vertex gather order matches the induced system's.
pub fn truncate(tg: &TailedGraph, len: usize) -> Result<TruncatedGraph, GraphError> {
    if len == 0 {
        return Err(GraphError::ZeroTruncation);
    }
    let g0 = tg.internal();
    let n0 = g0.vertex_count();
    let mut edges: Vec<(VertexId, VertexId)> = (0..g0.edge_count())
        .map(|e| {
            let a = g0.arc(2 * e);
            (a.origin, a.terminus)
        })
        .collect();
    let mut inbound_arcs = Vec::with_capacity(tg.tail_count());
    for (j, tail) in tg.tails().iter().enumerate() {
        let mut segs = Vec::with_capacity(len);
        let mut prev = tail.attach;
        for i in 0..len {
            let w = n0 + j * len + i;
            // orient (w, prev) so the even arc points inward
            segs.push(2 * edges.len());
            edges.push((w, prev));
            prev = w;
        }
        inbound_arcs.push(segs);
    }
    let graph = SymmetricDigraph::from_edge_pairs(n0 + tg.tail_count() * len, &edges)?;
    Ok(TruncatedGraph {
        graph,
        tail_len: len,
        inbound_arcs,
    })
}

/// Fundamental cycles of a spanning forest, one per non-tree edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleBasis {
    /// Each cycle is an arc sequence with `t(a_k) = o(a_{k+1})` cyclically.
    pub cycles: Vec<Vec<ArcId>>,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// The basis cycle through the given edge, if that edge is non-tree.
    pub fn cycle_through_edge(&self, g: &SymmetricDigraph, e: EdgeId) -> Option<&[ArcId]> {
        self.cycles
            .iter()
            .find(|c| c.iter().any(|&a| g.edge_of(a) == e))
            .map(|c| c.as_slice())
    }
}

/// BFS spanning forest of `g`; `parent_arc[v]` points from the parent to `v`.
pub(crate) struct SpanningForest {
    pub(crate) parent_arc: Vec<Option<ArcId>>,
    pub(crate) depth: Vec<usize>,
    tree_edge: Vec<bool>,
}

fn spanning_forest(g: &SymmetricDigraph) -> SpanningForest {
    let n = g.vertex_count();
    let mut parent_arc = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut seen = vec![false; n];
    let mut tree_edge = vec![false; g.edge_count()];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &a in g.out_arcs(u) {
                let v = g.terminus(a);
                if !seen[v] {
                    seen[v] = true;
                    parent_arc[v] = Some(a);
                    depth[v] = depth[u] + 1;
                    tree_edge[g.edge_of(a)] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    SpanningForest {
        parent_arc,
        depth,
        tree_edge,
    }
}

/// Fundamental cycle closed by the non-tree arc `a`: `a` followed by the tree
/// path from `t(a)` back to `o(a)`. Any forest over `g` works.
pub(crate) fn fundamental_cycle_from_parents(
    g: &SymmetricDigraph,
    parent_arc: &[Option<ArcId>],
    depth: &[usize],
    a: ArcId,
) -> Vec<ArcId> {
    let mut up = Vec::new(); // arcs walking t(a) -> lca
    let mut down = Vec::new(); // arcs walking o(a) -> lca, reversed later
    let (mut x, mut y) = (g.terminus(a), g.origin(a));
    while depth[x] > depth[y] {
        let pa = parent_arc[x].expect("non-root has parent");
        up.push(g.inv(pa));
        x = g.origin(pa);
    }
    while depth[y] > depth[x] {
        let pa = parent_arc[y].expect("non-root has parent");
        down.push(pa);
        y = g.origin(pa);
    }
    while x != y {
        let pa = parent_arc[x].expect("non-root has parent");
        up.push(g.inv(pa));
        x = g.origin(pa);
        let pb = parent_arc[y].expect("non-root has parent");
        down.push(pb);
        y = g.origin(pb);
    }
    let mut cycle = vec![a];
    cycle.extend(up);
    cycle.extend(down.into_iter().rev());
    cycle
}

fn fundamental_cycle(g: &SymmetricDigraph, forest: &SpanningForest, a: ArcId) -> Vec<ArcId> {
    fundamental_cycle_from_parents(g, &forest.parent_arc, &forest.depth, a)
}

/// Fundamental cycle basis from a BFS spanning forest.
pub fn cycle_basis(g: &SymmetricDigraph) -> CycleBasis {
    let forest = spanning_forest(g);
    let mut cycles = Vec::new();
    for e in 0..g.edge_count() {
        if !forest.tree_edge[e] {
            cycles.push(fundamental_cycle(g, &forest, 2 * e));
        }
    }
    CycleBasis { cycles }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> SymmetricDigraph {
        build_graph(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn triangle_construction() {
        let g = triangle();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.arc_count(), 6);
        for a in [0, 2, 4] {
            assert_eq!(g.inv(a), a + 1);
            assert_eq!(g.inv(a + 1), a);
        }
        // canonical order: (0,1), (0,2), (1,2); forward arc starts low
        assert_eq!(g.arc(0), Arc { origin: 0, terminus: 1 });
        assert_eq!(g.arc(2), Arc { origin: 0, terminus: 2 });
        assert_eq!(g.arc(4), Arc { origin: 1, terminus: 2 });
    }

    #[test]
    fn degenerate_and_errors() {
        let g = build_graph(1, &[]).unwrap();
        assert_eq!(g.arc_count(), 0);
        assert_eq!(build_graph(2, &[(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert!(matches!(
            build_graph(2, &[(0, 5)]),
            Err(GraphError::VertexOutOfRange { vertex: 5, .. })
        ));
    }

    #[test]
    fn inverse_arc_geometry() {
        let g = triangle();
        for a in g.arc_ids() {
            assert_ne!(g.inv(a), a);
            assert_eq!(g.inv(g.inv(a)), a);
            assert_eq!(g.origin(g.inv(a)), g.terminus(a));
            assert_eq!(g.terminus(g.inv(a)), g.origin(a));
        }
    }

    #[test]
    fn tails_attach_and_reject() {
        let g = triangle();
        let tg = attach_tails(g.clone(), &[0, 1]).unwrap();
        assert_eq!(tg.tail_count(), 2);
        assert_eq!(tg.tails()[0].inbound_arc, 6);
        assert_eq!(tg.tails()[1].inbound_arc, 8);
        // two tails on one vertex
        let tg2 = attach_tails(g.clone(), &[0, 0]).unwrap();
        assert_eq!(tg2.tails_at(0).count(), 2);
        assert_eq!(attach_tails(g.clone(), &[]), Err(GraphError::NoTails));
        assert!(attach_tails(g, &[99]).is_err());
    }

    #[test]
    fn truncate_counts() {
        let g = triangle();
        let tg = attach_tails(g, &[0]).unwrap();
        let tr = truncate(&tg, 3).unwrap();
        assert_eq!(tr.graph.vertex_count(), 6);
        assert_eq!(tr.graph.arc_count(), 12);
        assert_eq!(tr.inbound_arcs[0].len(), 3);
        // segment 0 points into the attach vertex
        assert_eq!(tr.graph.terminus(tr.e_arc(0)), 0);
        assert_eq!(tr.graph.origin(tr.e_bar_arc(0)), 0);

        let tr1 = truncate(&truncate_input(), 1).unwrap();
        assert_eq!(tr1.graph.vertex_count(), 4);
        assert!(truncate(&truncate_input(), 0).is_err());
    }

    fn truncate_input() -> TailedGraph {
        attach_tails(triangle(), &[0]).unwrap()
    }

    #[test]
    fn cycle_basis_counts() {
        let g = triangle();
        let basis = cycle_basis(&g);
        assert_eq!(basis.len(), 1);
        assert_eq!(basis.cycles[0].len(), 3);

        let tree = build_graph(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        assert!(cycle_basis(&tree).is_empty());

        // triangle with a doubled edge: two independent cycles, one of length 2
        let dbl = build_graph(3, &[(0, 1), (0, 1), (1, 2), (2, 0)]).unwrap();
        let basis = cycle_basis(&dbl);
        assert_eq!(basis.len(), 2);
        assert!(basis.cycles.iter().any(|c| c.len() == 2));
    }

    #[test]
    fn cycles_are_closed_walks() {
        let g = build_graph(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2), (0, 3)]).unwrap();
        let basis = cycle_basis(&g);
        assert_eq!(basis.len(), g.edge_count() - g.vertex_count() + 1);
        for cycle in &basis.cycles {
            for w in 0..cycle.len() {
                let a = cycle[w];
                let b = cycle[(w + 1) % cycle.len()];
                assert_eq!(g.terminus(a), g.origin(b));
            }
        }
    }

    #[test]
    fn arc_lookup_with_parallels() {
        let g = build_graph(3, &[(0, 1), (1, 0), (1, 2)]).unwrap();
        let a0 = g.arc_by_endpoints(0, 1, 0).unwrap();
        let a1 = g.arc_by_endpoints(0, 1, 1).unwrap();
        assert_ne!(g.edge_of(a0), g.edge_of(a1));
        assert_eq!(g.origin(a0), 0);
        assert_eq!(g.origin(g.arc_by_endpoints(1, 0, 0).unwrap()), 1);
        assert!(g.arc_by_endpoints(0, 2, 0).is_none());
    }
}
