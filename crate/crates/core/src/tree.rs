//! Rooted labeled trees on `{0, …, p-1}` with root `0`, stored as parent arrays.

use rand::Rng;

use crate::error::{Error, Result};

/// Largest `p` for which [`enumerate_trees`] runs exhaustively by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 5;

/// A spanning tree on `{0, …, p-1}` rooted at `0`.
///
/// `parent[0] == 0` is the root sentinel; every other vertex points at its parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootedTree {
    parent: Vec<usize>,
}

impl RootedTree {
    /// Validates a parent array of length `p`.
    pub fn validate(parent: &[usize], p: usize) -> Result<Self> {
        if parent.len() != p {
            return Err(Error::WrongLength { got: parent.len(), expected: p });
        }
        if p == 0 {
            return Err(Error::WrongLength { got: 0, expected: 1 });
        }
        if parent[0] != 0 {
            return Err(Error::RootParent(parent[0]));
        }
        for (v, &u) in parent.iter().enumerate().skip(1) {
            if u >= p {
                return Err(Error::VertexOutOfRange { vertex: v, parent: u, p });
            }
        }
        // 0 = unvisited, 1 = on current walk, 2 = known to reach the root.
        let mut state = vec![0u8; p];
        state[0] = 2;
        let mut walk = Vec::with_capacity(p);
        for start in 1..p {
            walk.clear();
            let mut v = start;
            while state[v] == 0 {
                state[v] = 1;
                walk.push(v);
                v = parent[v];
            }
            if state[v] == 1 {
                let at = walk.iter().position(|&w| w == v).expect("vertex on walk");
                return Err(Error::Cycle(walk[at..].to_vec()));
            }
            for &w in &walk {
                state[w] = 2;
            }
        }
        Ok(RootedTree { parent: parent.to_vec() })
    }

    /// Star tree: every vertex hangs off the root.
    pub fn star(p: usize) -> Self {
        RootedTree { parent: vec![0; p] }
    }

    /// Chain `0 → 1 → … → p-1`.
    pub fn chain(p: usize) -> Self {
        RootedTree { parent: (0..p).map(|v| v.saturating_sub(1)).collect() }
    }

    /// Number of vertices.
    pub fn p(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self) -> &[usize] {
        &self.parent
    }

    pub fn parent_of(&self, v: usize) -> usize {
        self.parent[v]
    }

    /// Parent-to-child edges, ordered by child.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().skip(1).map(|(v, &u)| (u, v))
    }

    pub fn is_edge(&self, parent: usize, child: usize) -> bool {
        child != 0 && child < self.p() && self.parent[child] == parent
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.edges().filter(|&(u, _)| u == v).map(|(_, c)| c).collect()
    }

    /// Children of the root.
    pub fn first_level(&self) -> Vec<usize> {
        self.children(0)
    }

    /// Root path `(0, u_j, …, v)`.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut w = v;
        while w != 0 {
            w = self.parent[w];
            path.push(w);
        }
        path.reverse();
        path
    }

    /// Number of edges between `v` and the root.
    pub fn depth(&self, v: usize) -> usize {
        self.path_to(v).len() - 1
    }

    /// Vertex count of the longest root path.
    pub fn height(&self) -> usize {
        (0..self.p()).map(|v| self.depth(v) + 1).max().unwrap_or(1)
    }

    /// Support exponent `M = height - 2` of the generated refinable function.
    pub fn support_exponent(&self) -> usize {
        self.height().saturating_sub(2)
    }
}

/// Decodes a Prüfer sequence over `{0, …, p-1}` (length `p-2`) and roots the result at 0.
pub fn from_prufer(seq: &[usize], p: usize) -> Result<RootedTree> {
    if p < 2 || seq.len() + 2 != p {
        return Err(Error::WrongLength { got: seq.len(), expected: p.saturating_sub(2) });
    }
    if let Some(&bad) = seq.iter().find(|&&v| v >= p) {
        return Err(Error::VertexOutOfRange { vertex: 0, parent: bad, p });
    }
    let mut degree = vec![1usize; p];
    for &v in seq {
        degree[v] += 1;
    }
    let mut adj = vec![Vec::new(); p];
    for &v in seq {
        let leaf = (0..p).find(|&u| degree[u] == 1).expect("leaf exists");
        adj[leaf].push(v);
        adj[v].push(leaf);
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..p).filter(|&u| degree[u] == 1).collect();
    adj[rest[0]].push(rest[1]);
    adj[rest[1]].push(rest[0]);

    let mut parent = vec![usize::MAX; p];
    parent[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if parent[w] == usize::MAX {
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    RootedTree::validate(&parent, p)
}

/// Every rooted labeled tree on `{0, …, p-1}`, in Prüfer-sequence order.
pub struct TreeEnumeration {
    p: usize,
    seq: Vec<usize>,
    done: bool,
}

impl Iterator for TreeEnumeration {
    type Item = RootedTree;

    fn next(&mut self) -> Option<RootedTree> {
        if self.done {
            return None;
        }
        let tree = from_prufer(&self.seq, self.p).expect("Prüfer sequences decode to trees");
        // Odometer increment, last slot fastest.
        self.done = true;
        for slot in self.seq.iter_mut().rev() {
            *slot += 1;
            if *slot < self.p {
                self.done = false;
                break;
            }
            *slot = 0;
        }
        Some(tree)
    }
}

/// Enumerates all `p^(p-2)` trees, refusing `p` above [`DEFAULT_ENUMERATION_CAP`].
pub fn enumerate_trees(p: usize) -> Result<TreeEnumeration> {
    enumerate_trees_with_cap(p, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_trees_with_cap(p: usize, cap: usize) -> Result<TreeEnumeration> {
    if p > cap {
        return Err(Error::EnumerationCap { p, cap });
    }
    if p < 2 {
        return Err(Error::WrongLength { got: p, expected: 2 });
    }
    Ok(TreeEnumeration { p, seq: vec![0; p - 2], done: false })
}

/// A uniformly random labeled tree (uniform Prüfer sequence).
pub fn sample_tree<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<RootedTree> {
    let seq: Vec<usize> = (0..p.saturating_sub(2)).map(|_| rng.gen_range(0..p)).collect();
    from_prufer(&seq, p)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    const FIGURE_1: [usize; 7] = [0, 3, 3, 0, 5, 0, 4];
    const FIGURE_2: [usize; 7] = [0, 3, 3, 0, 5, 0, 2];

    #[test]
    fn figure_trees_validate() {
        let t1 = RootedTree::validate(&FIGURE_1, 7).unwrap();
        assert_eq!(t1.height(), 4);
        assert_eq!(t1.path_to(6), vec![0, 5, 4, 6]);
        let t2 = RootedTree::validate(&FIGURE_2, 7).unwrap();
        assert_eq!(t2.height(), 4);
        assert_eq!(t2.support_exponent(), 2);
        assert_eq!(t2.first_level(), vec![3, 5]);
    }

    #[test]
    fn figure_two_paths() {
        let t = RootedTree::validate(&FIGURE_2, 7).unwrap();
        assert_eq!(t.path_to(6), vec![0, 3, 2, 6]);
        assert_eq!(t.path_to(1), vec![0, 3, 1]);
        assert_eq!(t.path_to(0), vec![0]);
    }

    #[test]
    fn validation_errors() {
        assert_eq!(RootedTree::validate(&[0, 2, 1], 3), Err(Error::Cycle(vec![1, 2])));
        assert_eq!(RootedTree::validate(&[1, 0, 0], 3), Err(Error::RootParent(1)));
        assert_eq!(
            RootedTree::validate(&[0, 3, 0], 3),
            Err(Error::VertexOutOfRange { vertex: 1, parent: 3, p: 3 })
        );
        assert_eq!(RootedTree::validate(&[0, 0], 3), Err(Error::WrongLength { got: 2, expected: 3 }));
        assert_eq!(RootedTree::validate(&[0, 1, 0], 3), Err(Error::Cycle(vec![1])));
    }

    #[test]
    fn cycle_message_names_vertices() {
        let err = RootedTree::validate(&[0, 2, 1], 3).unwrap_err().to_string();
        assert!(err.contains("cycle: 1\u{2192}2\u{2192}1"), "{err}");
        assert!(err.contains("{1,2}"), "{err}");
    }

    #[test]
    fn heights() {
        for p in 2..8 {
            assert_eq!(RootedTree::star(p).height(), 2);
            assert_eq!(RootedTree::chain(p).height(), p);
        }
        assert_eq!(RootedTree::validate(&[0, 0, 1], 3).unwrap().height(), 3);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_trees(2).unwrap().count(), 1);
        let p3: Vec<_> = enumerate_trees(3).unwrap().collect();
        assert_eq!(p3.len(), 3);
        let set: HashSet<Vec<usize>> = p3.iter().map(|t| t.parent().to_vec()).collect();
        let want: HashSet<Vec<usize>> = [vec![0, 0, 0], vec![0, 0, 1], vec![0, 2, 0]].into_iter().collect();
        assert_eq!(set, want);
        assert_eq!(enumerate_trees(4).unwrap().count(), 16);
        let p5: HashSet<_> = enumerate_trees(5).unwrap().map(|t| t.parent().to_vec()).collect();
        assert_eq!(p5.len(), 125);
        assert!(matches!(enumerate_trees(7), Err(Error::EnumerationCap { p: 7, cap: 5 })));
        assert_eq!(enumerate_trees_with_cap(6, 6).unwrap().count(), 1296);
    }

    #[test]
    fn enumerated_tree_properties() {
        for p in 2..=5 {
            for t in enumerate_trees(p).unwrap() {
                assert_eq!(t.edges().count(), p - 1);
                let h = t.height();
                assert!((2..=p).contains(&h));
                // Each non-root vertex ends exactly one root path.
                let mut ends = vec![0; p];
                for v in 0..p {
                    let path = t.path_to(v);
                    ends[*path.last().unwrap()] += 1;
                    for pair in path.windows(2) {
                        assert!(t.is_edge(pair[0], pair[1]));
                    }
                }
                assert!(ends.iter().all(|&c| c == 1));
            }
        }
    }

    #[test]
    fn sampling_yields_valid_trees() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let t = sample_tree(7, &mut rng).unwrap();
            assert_eq!(t.p(), 7);
            assert!(t.height() >= 2);
        }
    }
}
