//! Simple undirected graphs, test families, self-avoiding-walk trees and
//! connected components.

use std::collections::{BTreeSet, HashMap, VecDeque};

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph. Edges are stored as `(u, v)` with `u < v` in the
/// order given at construction; edge `e` owns oriented indices `2e` for
/// `(u, v)` and `2e + 1` for `(v, u)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    incident: Vec<Vec<(usize, usize)>>,
    edge_ids: HashMap<(usize, usize), usize>,
    max_degree: usize,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    pub fn new(n: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut edge_ids = HashMap::with_capacity(edge_list.len());
        let mut adjacency = vec![Vec::new(); n];
        let mut incident = vec![Vec::new(); n];
        for &(a, b) in edge_list {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let key = (a.min(b), a.max(b));
            if edge_ids.contains_key(&key) {
                return Err(Error::DuplicateEdge(key.0, key.1));
            }
            let id = edges.len();
            edge_ids.insert(key, id);
            edges.push(key);
            adjacency[a].push(b);
            adjacency[b].push(a);
            incident[a].push((b, id));
            incident[b].push((a, id));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        for list in &mut incident {
            list.sort_unstable();
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Graph { n, edges, adjacency, incident, edge_ids, max_degree })
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, &[]).expect("empty graph is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// `(neighbor, edge id)` pairs sorted by neighbor.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn is_regular(&self) -> bool {
        self.adjacency.iter().all(|a| a.len() == self.max_degree)
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_ids.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn num_oriented(&self) -> usize {
        2 * self.edges.len()
    }

    /// Oriented edge `i` as `(tail, head)`.
    pub fn oriented(&self, i: usize) -> (usize, usize) {
        let (u, v) = self.edges[i / 2];
        if i % 2 == 0 {
            (u, v)
        } else {
            (v, u)
        }
    }

    pub fn oriented_edges(&self) -> Vec<(usize, usize)> {
        (0..self.num_oriented()).map(|i| self.oriented(i)).collect()
    }

    /// Length of a shortest cycle, `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for s in 0..self.n {
            let mut dist = vec![usize::MAX; self.n];
            let mut parent = vec![usize::MAX; self.n];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adjacency[v] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        parent[w] = v;
                        queue.push_back(w);
                    } else if parent[v] != w {
                        let len = dist[v] + dist[w] + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
        best
    }

    /// BFS distances from `s` (`usize::MAX` when unreachable).
    pub fn distances_from(&self, s: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Two-coloring if the graph is bipartite.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let mut side: Vec<Option<bool>> = vec![None; self.n];
        for s in 0..self.n {
            if side[s].is_some() {
                continue;
            }
            side[s] = Some(false);
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                let sv = side[v].unwrap();
                for &w in &self.adjacency[v] {
                    match side[w] {
                        None => {
                            side[w] = Some(!sv);
                            queue.push_back(w);
                        }
                        Some(sw) if sw == sv => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(side.into_iter().map(|s| s.unwrap()).collect())
    }

    pub fn is_tree(&self) -> bool {
        self.n > 0
            && self.edges.len() + 1 == self.n
            && self.distances_from(0).iter().all(|&d| d != usize::MAX)
    }

    /// Connected components of `(V, edge_subset)` where edges are given by id.
    /// Components are sorted by smallest vertex, vertices ascending.
    pub fn components(&self, edge_subset: &[usize]) -> Result<Vec<Vec<usize>>> {
        let mut uf = UnionFind::<usize>::new(self.n);
        for &e in edge_subset {
            let &(u, v) = self
                .edges
                .get(e)
                .ok_or(Error::EdgeNotInGraph(e, e))?;
            uf.union(u, v);
        }
        Ok(group_labels(&uf.into_labeling()))
    }

    /// Components for an edge set given as vertex pairs.
    pub fn components_of_pairs(&self, pairs: &[(usize, usize)]) -> Result<Vec<Vec<usize>>> {
        let ids = pairs
            .iter()
            .map(|&(u, v)| self.edge_id(u, v).ok_or(Error::EdgeNotInGraph(u, v)))
            .collect::<Result<Vec<_>>>()?;
        self.components(&ids)
    }

    /// Component label per vertex for an edge set given as a bitmask over
    /// edge ids. Labels are component representatives.
    pub fn component_labels_mask(&self, mask: u64) -> Vec<usize> {
        let mut uf = UnionFind::<usize>::new(self.n);
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if mask >> e & 1 == 1 {
                uf.union(u, v);
            }
        }
        uf.into_labeling()
    }

    pub fn to_json(&self) -> String {
        let doc = GraphJson { n: self.n, edges: self.edges.iter().map(|&(u, v)| [u, v]).collect() };
        serde_json::to_string(&doc).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let edges: Vec<_> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::new(doc.n, &edges)
    }

    /// Parses one edge per line (`u v`); blank lines and `#` comments are
    /// skipped. The vertex count is one more than the largest id unless `n`
    /// is given.
    pub fn from_edge_lines(text: &str, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => return Err(Error::Parse(format!("line {}: expected `u v`", lineno + 1))),
            }
        }
        let n = n.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
        Graph::new(n, &edges)
    }
}

fn group_labels(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (v, &l) in labels.iter().enumerate() {
        let idx = *slot.entry(l).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[idx].push(v);
    }
    groups
}

/// Deterministic graph families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum Family {
    Path { n: usize },
    Cycle { n: usize },
    Complete { n: usize },
    CompleteBipartite { a: usize, b: usize },
    /// `n` vertices in total: center 0 joined to `n - 1` leaves.
    Star { n: usize },
    BalancedTree { branching: usize, depth: usize },
    Heawood,
    /// Two `k`-cycles joined by a perfect matching (3-regular on `2k` vertices).
    Prism { k: usize },
    RandomRegular { n: usize, degree: usize, seed: u64 },
}

impl Family {
    pub fn build(&self) -> Result<Graph> {
        match *self {
            Family::Path { n } => {
                let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
                Graph::new(n, &edges)
            }
            Family::Cycle { n } => {
                if n < 3 {
                    return Err(Error::InfeasibleFamily(format!("cycle needs n >= 3, got {n}")));
                }
                let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
                Graph::new(n, &edges)
            }
            Family::Complete { n } => {
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        edges.push((u, v));
                    }
                }
                Graph::new(n, &edges)
            }
            Family::CompleteBipartite { a, b } => {
                let mut edges = Vec::new();
                for u in 0..a {
                    for v in 0..b {
                        edges.push((u, a + v));
                    }
                }
                Graph::new(a + b, &edges)
            }
            Family::Star { n } => {
                if n == 0 {
                    return Err(Error::InfeasibleFamily("star needs a center".into()));
                }
                let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
                Graph::new(n, &edges)
            }
            Family::BalancedTree { branching, depth } => {
                let mut edges = Vec::new();
                let mut frontier = vec![0usize];
                let mut next_id = 1;
                for _ in 0..depth {
                    let mut next = Vec::new();
                    for &p in &frontier {
                        for _ in 0..branching {
                            edges.push((p, next_id));
                            next.push(next_id);
                            next_id += 1;
                        }
                    }
                    frontier = next;
                }
                Graph::new(next_id, &edges)
            }
            Family::Heawood => {
                let mut edges: Vec<_> = (0..14).map(|i| (i, (i + 1) % 14)).collect();
                for i in (0..14).step_by(2) {
                    edges.push((i, (i + 5) % 14));
                }
                Graph::new(14, &edges)
            }
            Family::Prism { k } => {
                if k < 3 {
                    return Err(Error::InfeasibleFamily(format!("prism needs k >= 3, got {k}")));
                }
                let mut edges = Vec::new();
                for i in 0..k {
                    edges.push((i, (i + 1) % k));
                    edges.push((k + i, k + (i + 1) % k));
                    edges.push((i, k + i));
                }
                Graph::new(2 * k, &edges)
            }
            Family::RandomRegular { n, degree, seed } => random_regular(n, degree, seed),
        }
    }
}

fn random_regular(n: usize, degree: usize, seed: u64) -> Result<Graph> {
    if (n * degree) % 2 == 1 {
        return Err(Error::InfeasibleFamily(format!("n * degree must be even ({n} * {degree})")));
    }
    if degree >= n && !(n == 0 || degree == 0) {
        return Err(Error::InfeasibleFamily(format!("degree {degree} needs more than {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    for _attempt in 0..100_000 {
        stubs.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        let mut ok = true;
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                ok = false;
                break;
            }
        }
        if ok {
            let edges: Vec<_> = seen.into_iter().collect();
            return Graph::new(n, &edges);
        }
    }
    Err(Error::InfeasibleFamily(format!("no simple {degree}-regular graph found on {n} vertices")))
}

/// Rooted tree with pinned vertices, produced by [`saw_tree`].
#[derive(Debug, Clone)]
pub struct PinnedTree {
    pub tree: Graph,
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub pinning: Vec<Option<bool>>,
    pub origin: Vec<usize>,
    /// Free leaves cut off by the depth cap.
    pub truncated: Vec<bool>,
}

impl PinnedTree {
    pub fn len(&self) -> usize {
        self.origin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }

    /// Vertices ordered so that every child precedes its parent.
    pub fn bottom_up(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.children[v].iter().copied());
        }
        order.reverse();
        order
    }

    pub fn has_truncation(&self) -> bool {
        self.truncated.iter().any(|&t| t)
    }

    /// Wraps an ordinary tree rooted at `root` with the given pinning.
    pub fn from_tree(tree: &Graph, root: usize, pinning: &[Option<bool>]) -> Result<Self> {
        if !tree.is_tree() {
            return Err(Error::InfeasibleFamily("input is not a tree".into()));
        }
        let n = tree.n();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in tree.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    children[v].push(w);
                    queue.push_back(w);
                }
            }
        }
        Ok(PinnedTree {
            tree: tree.clone(),
            root,
            parent,
            children,
            pinning: pinning.to_vec(),
            origin: (0..n).collect(),
            truncated: vec![false; n],
        })
    }
}

/// Default node budget for [`saw_tree`].
pub const SAW_NODE_LIMIT: usize = 1_000_000;

/// Options for [`saw_tree`].
#[derive(Debug, Clone, Default)]
pub struct SawOptions {
    /// Vertex order used for cycle-closing pins; `order[i]` is the rank of
    /// vertex `i`. Defaults to index order.
    pub rank: Option<Vec<usize>>,
    pub depth_cap: Option<usize>,
    pub node_limit: Option<usize>,
}

/// Self-avoiding walk tree rooted at `root`.
///
/// Walking `root = v_0, ..., v_l`, a neighbor `w = v_i` (`i < l - 1`) closes a
/// cycle; its copy becomes a leaf pinned to 0 if `v_{i+1}` ranks above `v_l`
/// and to 1 otherwise. Vertices pinned in `pinning` become pinned leaves.
pub fn saw_tree(
    g: &Graph,
    root: usize,
    pinning: &[Option<bool>],
    opts: &SawOptions,
) -> Result<PinnedTree> {
    let n = g.n();
    if root >= n {
        return Err(Error::VertexOutOfRange { vertex: root, n });
    }
    if pinning.get(root).copied().flatten().is_some() {
        return Err(Error::RootPinned);
    }
    let rank: Vec<usize> = match &opts.rank {
        Some(r) => {
            let mut check = r.clone();
            check.sort_unstable();
            if r.len() != n || check.iter().enumerate().any(|(i, &x)| i != x) {
                return Err(Error::InvalidParams("ordering must be a permutation of V".into()));
            }
            r.clone()
        }
        None => (0..n).collect(),
    };
    let limit = opts.node_limit.unwrap_or(SAW_NODE_LIMIT);
    let pinned = |v: usize| pinning.get(v).copied().flatten();

    let mut b = SawBuilder {
        origin: vec![root],
        parent: vec![None],
        children: vec![Vec::new()],
        pin: vec![None],
        truncated: vec![false],
        limit,
    };
    // Explicit DFS: each frame holds (tree node, next neighbor index).
    let mut walk: Vec<usize> = vec![root];
    let mut on_walk = vec![usize::MAX; n];
    on_walk[root] = 0;
    let mut frames: Vec<(usize, usize)> = vec![(0, 0)];
    while let Some(&mut (node, ref mut next)) = frames.last_mut() {
        let v = *walk.last().unwrap();
        let nbrs = g.neighbors(v);
        if *next >= nbrs.len() {
            frames.pop();
            walk.pop();
            on_walk[v] = usize::MAX;
            continue;
        }
        let w = nbrs[*next];
        *next += 1;
        let l = walk.len() - 1;
        if l >= 1 && walk[l - 1] == w {
            continue;
        }
        let depth = l + 1;
        if on_walk[w] != usize::MAX {
            let i = on_walk[w];
            let after = walk[i + 1];
            let spin = rank[after] < rank[v];
            b.push(node, w, Some(spin), false)?;
        } else if let Some(s) = pinned(w) {
            b.push(node, w, Some(s), false)?;
        } else if opts.depth_cap.is_some_and(|cap| depth >= cap) {
            let is_leaf_anyway = g.neighbors(w).len() == 1;
            b.push(node, w, None, !is_leaf_anyway)?;
        } else {
            let child = b.push(node, w, None, false)?;
            on_walk[w] = walk.len();
            walk.push(w);
            frames.push((child, 0));
        }
    }

    let count = b.origin.len();
    let mut edges = Vec::with_capacity(count.saturating_sub(1));
    for (c, p) in b.parent.iter().enumerate() {
        if let Some(p) = *p {
            edges.push((p, c));
        }
    }
    Ok(PinnedTree {
        tree: Graph::new(count, &edges)?,
        root: 0,
        parent: b.parent,
        children: b.children,
        pinning: b.pin,
        origin: b.origin,
        truncated: b.truncated,
    })
}

struct SawBuilder {
    origin: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    pin: Vec<Option<bool>>,
    truncated: Vec<bool>,
    limit: usize,
}

impl SawBuilder {
    fn push(&mut self, parent: usize, origin: usize, pin: Option<bool>, truncated: bool) -> Result<usize> {
        if self.origin.len() >= self.limit {
            return Err(Error::TreeTooLarge { limit: self.limit });
        }
        let id = self.origin.len();
        self.origin.push(origin);
        self.parent.push(Some(parent));
        self.children.push(Vec::new());
        self.children[parent].push(id);
        self.pin.push(pin);
        self.truncated.push(truncated);
        Ok(id)
    }
}

/// Canonical form of a small graph: lexicographically smallest sorted edge
/// list over all vertex relabelings. Exponential; meant for n <= 8.
pub fn canonical_edges(g: &Graph) -> Vec<(usize, usize)> {
    let n = g.n();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    loop {
        let mut relabeled: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u], perm[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        relabeled.sort_unstable();
        if best.as_ref().is_none_or(|b| relabeled < *b) {
            best = Some(relabeled);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap_or_default()
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Every graph without isolated vertices having between 1 and `max_edges`
/// edges, one per isomorphism class, plus the single vertex.
pub fn small_graph_catalog(max_edges: usize) -> Vec<Graph> {
    let mut out = vec![Graph::empty(1)];
    let mut layer: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for _ in 0..max_edges {
        let mut next: BTreeSet<(usize, Vec<(usize, usize)>)> = BTreeSet::new();
        for edges in &layer {
            let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
            // New edge between existing vertices, one new vertex, or two.
            let mut candidates = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    candidates.push((n, (u, v)));
                }
                candidates.push((n + 1, (u, n)));
            }
            candidates.push((n + 2, (n, n + 1)));
            for (m, e) in candidates {
                if edges.contains(&e) {
                    continue;
                }
                let mut list = edges.clone();
                list.push(e);
                let g = Graph::new(m, &list).expect("valid extension");
                next.insert((m, canonical_edges(&g)));
            }
        }
        layer = next.iter().map(|(_, e)| e.clone()).collect();
        for (m, e) in next {
            out.push(Graph::new(m, &e).expect("canonical graph"));
        }
    }
    out
}

/// All unlabeled trees with `1..=max_n` vertices.
pub fn all_trees(max_n: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    if max_n == 0 {
        return out;
    }
    let mut layer: Vec<Graph> = vec![Graph::empty(1)];
    out.push(Graph::empty(1));
    for size in 2..=max_n {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut next = Vec::new();
        for t in &layer {
            for v in 0..t.n() {
                let mut edges = t.edges().to_vec();
                edges.push((v, size - 1));
                let g = Graph::new(size, &edges).expect("leaf extension");
                if seen.insert(tree_code(&g)) {
                    next.push(g);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Isomorphism-invariant code of an unrooted tree (minimum rooted AHU string).
pub fn tree_code(t: &Graph) -> String {
    fn rooted(t: &Graph, v: usize, parent: usize) -> String {
        let mut parts: Vec<String> =
            t.neighbors(v).iter().filter(|&&w| w != parent).map(|&w| rooted(t, w, v)).collect();
        parts.sort();
        format!("({})", parts.concat())
    }
    (0..t.n()).map(|r| rooted(t, r, usize::MAX)).min().unwrap_or_default()
}
