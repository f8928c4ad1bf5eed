//! Grading graphs: who grades which submission in one assignment.
//!
//! Agent `i` authors submission `i`. A grading task is an edge
//! `(grader, submission)`; edges are numbered submission-major, so the
//! graders of submission `s` occupy edges `s * degree .. (s + 1) * degree`.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Graders per submission and submissions per grader.
pub const DEGREE: usize = 4;
/// Size of a grading cluster.
pub const CLUSTER_SIZE: usize = 4;
/// Attempts of the configuration model before giving up.
pub const REGULAR_GRAPH_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    /// Each agent grades its neighbours in a random regular graph.
    Regular,
    /// Agents are split into clusters of 4; each cluster grades all
    /// submissions of another cluster.
    Clusters,
}

/// Cluster structure of a clique assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clusters {
    pub members: Vec<[usize; CLUSTER_SIZE]>,
    /// `target[c]` is the cluster whose submissions cluster `c` grades.
    pub target: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradingGraph {
    n: usize,
    degree: usize,
    graders: Vec<usize>,
    tasks: Vec<usize>,
    clusters: Option<Clusters>,
}

impl GradingGraph {
    /// Builds a graph from the grader lists of every submission
    /// (`graders[s * degree + slot]`). Every agent must grade exactly
    /// `degree` distinct submissions, none of them its own.
    pub fn from_graders(n: usize, degree: usize, graders: Vec<usize>) -> Result<Self> {
        if degree == 0 || graders.len() != n * degree {
            return Err(Error::InvalidArgument("grader list does not match n * degree"));
        }
        let mut tasks: Vec<Vec<usize>> = vec![Vec::with_capacity(degree); n];
        for (edge, &grader) in graders.iter().enumerate() {
            let submission = edge / degree;
            if grader >= n {
                return Err(Error::InvalidArgument("grader index out of range"));
            }
            if grader == submission {
                return Err(Error::InvalidArgument("agent grades own submission"));
            }
            if tasks[grader].iter().any(|&e| e / degree == submission) {
                return Err(Error::InvalidArgument("agent grades a submission twice"));
            }
            tasks[grader].push(edge);
        }
        if tasks.iter().any(|t| t.len() != degree) {
            return Err(Error::InvalidArgument("every agent must grade exactly `degree` submissions"));
        }
        Ok(GradingGraph { n, degree, graders, tasks: tasks.concat(), clusters: None })
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_edges(&self) -> usize {
        self.graders.len()
    }

    pub fn grader(&self, edge: usize) -> usize {
        self.graders[edge]
    }

    pub fn submission(&self, edge: usize) -> usize {
        edge / self.degree
    }

    /// Graders of submission `s`, in slot order.
    pub fn graders_of(&self, s: usize) -> &[usize] {
        &self.graders[s * self.degree..(s + 1) * self.degree]
    }

    /// Edges graded by agent `k`.
    pub fn tasks_of(&self, k: usize) -> &[usize] {
        &self.tasks[k * self.degree..(k + 1) * self.degree]
    }

    /// The edge on which agent `k` grades submission `s`, if any.
    pub fn edge_of(&self, k: usize, s: usize) -> Option<usize> {
        self.graders_of(s).iter().position(|&g| g == k).map(|slot| s * self.degree + slot)
    }

    pub fn clusters(&self) -> Option<&Clusters> {
        self.clusters.as_ref()
    }

    /// The same graph with agent `i` renamed `perm[i]` (and its submission
    /// with it). Slot order within each submission and task order within
    /// each agent are preserved.
    pub fn relabel(&self, perm: &[usize]) -> GradingGraph {
        let d = self.degree;
        let mut graders = vec![0; self.graders.len()];
        let mut tasks = vec![0; self.tasks.len()];
        for (edge, &g) in self.graders.iter().enumerate() {
            graders[relabel_edge(edge, d, perm)] = perm[g];
        }
        for k in 0..self.n {
            for (t, &edge) in self.tasks_of(k).iter().enumerate() {
                tasks[perm[k] * d + t] = relabel_edge(edge, d, perm);
            }
        }
        let clusters = self.clusters.as_ref().map(|c| Clusters {
            members: c.members.iter().map(|m| m.map(|a| perm[a])).collect(),
            target: c.target.clone(),
        });
        GradingGraph { n: self.n, degree: d, graders, tasks, clusters }
    }
}

/// Edge index after renaming agents by `perm`.
pub fn relabel_edge(edge: usize, degree: usize, perm: &[usize]) -> usize {
    perm[edge / degree] * degree + edge % degree
}

/// Random simple `degree`-regular graph on `n` vertices by the configuration
/// model, rejecting pairings with self-loops or multi-edges. Returns sorted
/// adjacency lists.
pub fn random_regular_graph(rng: &RngStream, n: usize, degree: usize) -> Result<Vec<Vec<usize>>> {
    if n <= degree || !(n * degree).is_multiple_of(2) {
        return Err(Error::InvalidArgument("need n > degree and n * degree even"));
    }
    let mut gen = rng.rng();
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| core::iter::repeat_n(v, degree)).collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::with_capacity(degree); n];
    'attempt: for _ in 0..REGULAR_GRAPH_ATTEMPTS {
        stubs.shuffle(&mut gen);
        adjacency.iter_mut().for_each(Vec::clear);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || adjacency[u].contains(&v) {
                continue 'attempt;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        adjacency.iter_mut().for_each(|a| a.sort_unstable());
        return Ok(adjacency);
    }
    Err(Error::GraphGeneration { n, degree, attempts: REGULAR_GRAPH_ATTEMPTS })
}

/// Each agent grades the submissions of its neighbours in a random
/// `degree`-regular graph.
pub fn build_regular_grading_graph(rng: &RngStream, n: usize, degree: usize) -> Result<GradingGraph> {
    let adjacency = random_regular_graph(rng, n, degree)?;
    GradingGraph::from_graders(n, degree, adjacency.concat())
}

/// Partitions the agents into random clusters of 4 and has cluster `c` grade
/// every submission of cluster `target[c]`, where `target` is a uniformly
/// random cyclic permutation of the clusters.
pub fn build_clique_assignment(rng: &RngStream, n: usize) -> Result<GradingGraph> {
    if !n.is_multiple_of(CLUSTER_SIZE) || n < 2 * CLUSTER_SIZE {
        return Err(Error::ClusterSize { n });
    }
    let mut gen = rng.rng();
    let mut agents: Vec<usize> = (0..n).collect();
    agents.shuffle(&mut gen);
    let members: Vec<[usize; CLUSTER_SIZE]> = agents
        .chunks_exact(CLUSTER_SIZE)
        .map(|c| c.try_into().expect("chunk of cluster size"))
        .collect();
    let m = members.len();
    let mut cycle: Vec<usize> = (0..m).collect();
    cycle.shuffle(&mut gen);
    let mut target = vec![0; m];
    for i in 0..m {
        target[cycle[i]] = cycle[(i + 1) % m];
    }
    let mut graders = vec![0; n * CLUSTER_SIZE];
    for (c, &t) in target.iter().enumerate() {
        for &submission in &members[t] {
            graders[submission * CLUSTER_SIZE..(submission + 1) * CLUSTER_SIZE].copy_from_slice(&members[c]);
        }
    }
    let mut graph = GradingGraph::from_graders(n, CLUSTER_SIZE, graders)?;
    graph.clusters = Some(Clusters { members, target });
    Ok(graph)
}

/// Builds the grading graph of the requested kind with the default degree.
pub fn build_grading_graph(rng: &RngStream, n: usize, kind: GraphKind) -> Result<GradingGraph> {
    match kind {
        GraphKind::Regular => build_regular_grading_graph(rng, n, DEGREE),
        GraphKind::Clusters => build_clique_assignment(rng, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_regular(g: &GradingGraph) {
        let d = g.degree();
        let mut in_degree = vec![0; g.n_agents()];
        for s in 0..g.n_agents() {
            let graders = g.graders_of(s);
            assert_eq!(graders.len(), d);
            for (i, &k) in graders.iter().enumerate() {
                assert_ne!(k, s, "self grading");
                assert!(!graders[..i].contains(&k), "duplicate grader");
                in_degree[k] += 1;
            }
        }
        assert!(in_degree.iter().all(|&c| c == d));
        for k in 0..g.n_agents() {
            for &e in g.tasks_of(k) {
                assert_eq!(g.grader(e), k);
            }
        }
    }

    #[test]
    fn regular_graph_over_many_seeds() {
        for seed in 0..100 {
            let g = build_regular_grading_graph(&RngStream::new(seed), 100, 4).unwrap();
            assert_regular(&g);
            // undirected: k grades s iff s grades k
            for s in 0..100 {
                for &k in g.graders_of(s) {
                    assert!(g.edge_of(s, k).is_some());
                }
            }
        }
    }

    #[test]
    fn five_vertices_give_complete_graph() {
        let adjacency = random_regular_graph(&RngStream::new(9), 5, 4).unwrap();
        for (v, adj) in adjacency.iter().enumerate() {
            let expected: Vec<usize> = (0..5).filter(|&u| u != v).collect();
            assert_eq!(adj, &expected);
        }
    }

    #[test]
    fn regular_graph_rejects_bad_sizes() {
        assert!(random_regular_graph(&RngStream::new(0), 4, 4).is_err());
        assert!(random_regular_graph(&RngStream::new(0), 7, 3).is_err());
    }

    #[test]
    fn clique_assignment_structure() {
        let g = build_clique_assignment(&RngStream::new(5), 100).unwrap();
        assert_regular(&g);
        let clusters = g.clusters().unwrap();
        assert_eq!(clusters.members.len(), 25);
        // the target map is a single cycle covering every cluster
        let mut seen = vec![false; 25];
        let mut c = 0;
        for _ in 0..25 {
            assert!(!seen[c]);
            seen[c] = true;
            c = clusters.target[c];
        }
        assert_eq!(c, 0);
        for (c, members) in clusters.members.iter().enumerate() {
            assert_ne!(clusters.target[c], c);
            for &s in &clusters.members[clusters.target[c]] {
                let mut graders = g.graders_of(s).to_vec();
                graders.sort_unstable();
                let mut expected = members.to_vec();
                expected.sort_unstable();
                assert_eq!(graders, expected);
                assert!(!members.contains(&s));
            }
        }
    }

    #[test]
    fn clique_assignment_rejects_bad_sizes() {
        assert_eq!(build_clique_assignment(&RngStream::new(0), 10), Err(Error::ClusterSize { n: 10 }));
        assert_eq!(build_clique_assignment(&RngStream::new(0), 4), Err(Error::ClusterSize { n: 4 }));
    }

    #[test]
    fn relabel_preserves_structure() {
        let g = build_regular_grading_graph(&RngStream::new(1), 12, 4).unwrap();
        let perm: Vec<usize> = (0..12).map(|i| (i * 5) % 12).collect();
        let h = g.relabel(&perm);
        assert_regular(&h);
        for e in 0..g.n_edges() {
            let e2 = relabel_edge(e, 4, &perm);
            assert_eq!(h.grader(e2), perm[g.grader(e)]);
            assert_eq!(h.submission(e2), perm[g.submission(e)]);
        }
    }
}
