//! Undirected simple graphs, square lattices and autoregressive parent sets.
//!
//! Node ids are 0-based everywhere. For a variable ordering σ, the parent set
//! of σ(i) is the set of already visited nodes that can be reached from σ(i)
//! along a path whose internal nodes are all still unvisited. Conditioning on
//! these parents screens σ(i) from every other visited node, so the
//! autoregressive factorization along σ loses nothing by dropping the rest.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ordering::Ordering;

/// Undirected simple graph on nodes `0..n`.
///
/// Edges are stored canonically as `(i, j)` with `i < j`, sorted; adjacency
/// lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Edge orientation does not matter.
    /// Self-loops and duplicate edges are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon = Vec::new();
        for (a, b) in edges {
            if a >= n {
                return Err(Error::NodeOutOfRange { node: a, n });
            }
            if b >= n {
                return Err(Error::NodeOutOfRange { node: b, n });
            }
            if a == b {
                return Err(Error::InvalidEdge(a, b));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidEdge(w[0].0, w[0].1));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &canon {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: canon,
            adjacency,
        })
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Graph::new(n, edges).expect("complete graph is simple")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical sorted edge list, `i < j` in every pair.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_index(a, b).is_some()
    }

    /// Position of the edge `{a, b}` in [`Graph::edges`].
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.reach(0, &vec![false; self.n]).len() == self.n
    }

    /// Nodes reachable from `start` in the subgraph induced by the nodes not
    /// marked in `blocked`. `start` itself must not be blocked.
    fn reach(&self, start: usize, blocked: &[bool]) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut out = Vec::new();
        while let Some(v) = queue.pop_front() {
            out.push(v);
            for &w in &self.adjacency[v] {
                if !seen[w] && !blocked[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Connected component of `start` in the subgraph induced on
    /// `V \ excluded`, returned sorted and including `start`.
    pub fn connected_component(&self, start: usize, excluded: &[usize]) -> Result<Vec<usize>> {
        if start >= self.n {
            return Err(Error::NodeOutOfRange {
                node: start,
                n: self.n,
            });
        }
        let mut blocked = vec![false; self.n];
        for &v in excluded {
            if v >= self.n {
                return Err(Error::NodeOutOfRange { node: v, n: self.n });
            }
            blocked[v] = true;
        }
        if blocked[start] {
            return Err(Error::InvalidArgument(format!(
                "start node {start} is in the excluded set"
            )));
        }
        Ok(self.reach(start, &blocked))
    }

    /// Serializes to the text format: `n <N>` then one `e <i> <j>` per edge.
    pub fn to_text(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for &(i, j) in &self.edges {
            writeln!(s, "e {i} {j}").unwrap();
        }
        s
    }
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: &str| Error::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            let mut tok = line.split_whitespace();
            let head = tok.next().unwrap();
            let mut next_int = || -> Result<usize> {
                tok.next()
                    .ok_or_else(|| parse_err("missing integer"))?
                    .parse()
                    .map_err(|_| parse_err("expected a non-negative integer"))
            };
            match head {
                "n" => {
                    if n.is_some() {
                        return Err(parse_err("duplicate node count line"));
                    }
                    n = Some(next_int()?);
                }
                "e" => {
                    if n.is_none() {
                        return Err(parse_err("edge before node count"));
                    }
                    let i = next_int()?;
                    let j = next_int()?;
                    edges.push((i, j));
                }
                other => return Err(parse_err(&format!("unknown record `{other}`"))),
            }
            if tok.next().is_some() {
                return Err(parse_err("trailing tokens"));
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "missing `n <N>` line".into(),
        })?;
        Graph::new(n, edges)
    }
}

/// L×L grid graph; node id `row * L + col`.
pub fn build_lattice(side: usize) -> Graph {
    let mut edges = Vec::with_capacity(2 * side * side.saturating_sub(1));
    for r in 0..side {
        for c in 0..side {
            let v = r * side + c;
            if c + 1 < side {
                edges.push((v, v + 1));
            }
            if r + 1 < side {
                edges.push((v, v + side));
            }
        }
    }
    Graph::new(side * side, edges).expect("lattice edges are valid")
}

/// Parent set of every node under an ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentSets {
    ordering: Ordering,
    parents: Vec<Vec<usize>>,
}

impl ParentSets {
    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    /// Sorted parents of node `v` (indexed by node id, not position).
    pub fn of(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    /// Parent lists indexed by node id.
    pub fn as_slice(&self) -> &[Vec<usize>] {
        &self.parents
    }

    /// Assembles parent sets from explicit lists, checking that every parent
    /// precedes its child in the ordering.
    pub fn from_lists(ordering: Ordering, parents: Vec<Vec<usize>>) -> Result<Self> {
        let n = ordering.len();
        if parents.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: parents.len(),
            });
        }
        let pos = ordering.positions();
        for (v, list) in parents.iter().enumerate() {
            for (k, &p) in list.iter().enumerate() {
                if p >= n {
                    return Err(Error::NodeOutOfRange { node: p, n });
                }
                if p == v {
                    return Err(Error::SelfParent(v));
                }
                if pos[p] >= pos[v] {
                    return Err(Error::InvalidArgument(format!(
                        "parent {p} of node {v} does not precede it in the ordering"
                    )));
                }
                if k > 0 && list[k - 1] >= p {
                    return Err(Error::InvalidArgument(format!(
                        "parent list of node {v} is not sorted and duplicate-free"
                    )));
                }
            }
        }
        Ok(ParentSets { ordering, parents })
    }
}

fn check_sizes(g: &Graph, sigma: &Ordering) -> Result<()> {
    if sigma.len() != g.node_count() {
        return Err(Error::NotAPermutation {
            n: g.node_count(),
            reason: format!("ordering has {} entries", sigma.len()),
        });
    }
    Ok(())
}

/// Parent sets by component adjacency: one BFS per step over the unvisited
/// nodes, collecting the visited nodes that border the component of σ(i).
/// O(N·(N+E)) overall.
pub fn parent_sets(g: &Graph, sigma: &Ordering) -> Result<ParentSets> {
    check_sizes(g, sigma)?;
    let n = g.node_count();
    let mut visited = vec![false; n];
    let mut parents = vec![Vec::new(); n];
    // Generation stamps avoid clearing the per-step marks.
    let mut seen = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for (step, &v) in sigma.as_slice().iter().enumerate() {
        let mut par = Vec::new();
        seen[v] = step;
        queue.push_back(v);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if seen[w] == step {
                    continue;
                }
                seen[w] = step;
                if visited[w] {
                    par.push(w);
                } else {
                    queue.push_back(w);
                }
            }
        }
        par.sort_unstable();
        parents[v] = par;
        visited[v] = true;
    }
    Ok(ParentSets {
        ordering: sigma.clone(),
        parents,
    })
}

/// Literal per-candidate parent sets: σ(j) is a parent of σ(i) iff σ(j) is
/// reachable from σ(i) once every other visited node is removed. Cubic;
/// kept as a cross-check for [`parent_sets`].
pub fn parent_sets_naive(g: &Graph, sigma: &Ordering) -> Result<ParentSets> {
    check_sizes(g, sigma)?;
    let n = g.node_count();
    let order = sigma.as_slice();
    let mut parents = vec![Vec::new(); n];
    for i in 1..n {
        let v = order[i];
        let mut par = Vec::new();
        for &cand in &order[..i] {
            let mut blocked = vec![false; n];
            for &u in &order[..i] {
                blocked[u] = u != cand;
            }
            if g.reach(v, &blocked).binary_search(&cand).is_ok() {
                par.push(cand);
            }
        }
        par.sort_unstable();
        parents[v] = par;
    }
    Ok(ParentSets {
        ordering: sigma.clone(),
        parents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The five-node example graph, relabelled 0-based (1–2,1–3,2–4,3–4,4–5).
    fn example_graph() -> Graph {
        Graph::new(5, [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)]).unwrap()
    }

    fn path3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn lattice_sizes() {
        let g1 = build_lattice(1);
        assert_eq!((g1.node_count(), g1.edge_count()), (1, 0));
        let g2 = build_lattice(2);
        assert_eq!(g2.edges(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let g5 = build_lattice(5);
        assert_eq!((g5.node_count(), g5.edge_count()), (25, 40));
        assert!(g5.has_edge(7, 12) && g5.has_edge(7, 8) && !g5.has_edge(4, 5));
    }

    #[test]
    fn rejects_loops_and_duplicates() {
        assert!(matches!(
            Graph::new(3, [(1, 1)]),
            Err(Error::InvalidEdge(1, 1))
        ));
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn adjacency_is_sorted_and_symmetric() {
        let g = Graph::new(5, [(4, 0), (2, 0), (0, 1), (3, 2)]).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2, 4]);
        for v in 0..5 {
            for &w in g.neighbors(v) {
                assert!(g.neighbors(w).contains(&v));
            }
        }
    }

    #[test]
    fn component_examples() {
        assert_eq!(path3().connected_component(0, &[1]).unwrap(), vec![0]);
        assert_eq!(path3().connected_component(2, &[]).unwrap(), vec![0, 1, 2]);
        // Node 2 (1-based) with {1,4,5} removed is isolated.
        let g = example_graph();
        assert_eq!(g.connected_component(1, &[0, 3, 4]).unwrap(), vec![1]);
        assert!(g.connected_component(9, &[]).is_err());
        assert!(g.connected_component(1, &[1]).is_err());
    }

    #[test]
    fn worked_example_parent_sets() {
        let g = example_graph();
        // σ = (5,1,4,2,3) in 1-based labels.
        let sigma = Ordering::from_list(vec![4, 0, 3, 1, 2]).unwrap();
        for ps in [parent_sets(&g, &sigma).unwrap(), parent_sets_naive(&g, &sigma).unwrap()] {
            assert_eq!(ps.of(4), &[] as &[usize]);
            assert_eq!(ps.of(0), &[4]);
            assert_eq!(ps.of(3), &[0, 4]);
            assert_eq!(ps.of(1), &[0, 3]);
            assert_eq!(ps.of(2), &[0, 3]);
        }
    }

    #[test]
    fn chain_and_square_parent_sets() {
        let sigma = Ordering::from_list(vec![0, 1, 2]).unwrap();
        let ps = parent_sets(&path3(), &sigma).unwrap();
        assert_eq!(ps.as_slice(), &[vec![], vec![0], vec![1]]);

        let sq = build_lattice(2);
        let sigma = Ordering::from_list(vec![0, 1, 2, 3]).unwrap();
        let expected = vec![vec![], vec![0], vec![0, 1], vec![1, 2]];
        assert_eq!(parent_sets(&sq, &sigma).unwrap().as_slice(), &expected);
        assert_eq!(parent_sets_naive(&sq, &sigma).unwrap().as_slice(), &expected);
    }

    #[test]
    fn disconnected_components_restart() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let sigma = Ordering::from_list(vec![0, 2, 1, 3]).unwrap();
        let ps = parent_sets(&g, &sigma).unwrap();
        assert_eq!(ps.as_slice(), &[vec![], vec![0], vec![], vec![2]]);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let sigma = Ordering::from_list(vec![0, 1]).unwrap();
        assert!(parent_sets(&path3(), &sigma).is_err());
        assert!(parent_sets_naive(&path3(), &sigma).is_err());
    }

    #[test]
    fn text_format_roundtrip_and_comments() {
        let g = example_graph();
        assert_eq!(g.to_text().parse::<Graph>().unwrap(), g);
        let parsed: Graph = "# header\nn 3\ne 0 1 # edge\n\ne 2 1\n".parse().unwrap();
        assert_eq!(parsed.edges(), &[(0, 1), (1, 2)]);
        assert!("e 0 1\n".parse::<Graph>().is_err());
        assert!("n 2\ne 0 x\n".parse::<Graph>().is_err());
        assert!("n 2\nq\n".parse::<Graph>().is_err());
    }
}
