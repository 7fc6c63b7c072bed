use std::cmp::Ordering;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::distance::DistanceMatrix;
use super::{PersistenceDiagram, PersistencePair};
use crate::error::{Error, Result};
use crate::scalar::Real;

const NONE: u32 = u32::MAX;

/// A simplex of the Rips filtration with its entry scale.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredSimplex<T> {
    /// Sorted vertex indices, 1 to 3 of them.
    pub vertices: Vec<usize>,
    pub value: T,
}

impl<T: Real> FilteredSimplex<T> {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Every vertex, edge and triangle with value `<= eps_max`, ordered by
/// `(value, dimension, vertex tuple)`.
pub fn rips_filtration<T: Real>(dist: &DistanceMatrix<T>, eps_max: T) -> Vec<FilteredSimplex<T>> {
    let n = dist.len();
    let mut out: Vec<FilteredSimplex<T>> = (0..n)
        .map(|i| FilteredSimplex {
            vertices: vec![i],
            value: T::zero(),
        })
        .collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist.get(i, j);
            if d <= eps_max {
                out.push(FilteredSimplex {
                    vertices: vec![i, j],
                    value: d,
                });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let v = dist.get(i, j).max(dist.get(i, k)).max(dist.get(j, k));
                if v <= eps_max {
                    out.push(FilteredSimplex {
                        vertices: vec![i, j, k],
                        value: v,
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .unwrap_or(Ordering::Equal)
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    out
}

struct Edge<T> {
    value: T,
    i: u32,
    j: u32,
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Returns `false` if already connected.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (ra, rb) = (ra as usize, rb as usize);
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb as u32,
            Ordering::Greater => self.parent[rb] = ra as u32,
            Ordering::Equal => {
                self.parent[rb] = ra as u32;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Working column over Z/2 as a lazy min-heap: duplicate entries cancel
/// when they surface, so adding a column costs its length, not ours.
#[derive(Default)]
struct WorkingColumn {
    heap: BinaryHeap<Reverse<u64>>,
}

impl WorkingColumn {
    fn reset(&mut self, entries: &[u64]) {
        self.heap.clear();
        self.heap.extend(entries.iter().map(|&x| Reverse(x)));
    }

    fn add(&mut self, entries: &[u64]) {
        self.heap.extend(entries.iter().map(|&x| Reverse(x)));
    }

    fn pivot(&mut self) -> Option<u64> {
        while let Some(Reverse(top)) = self.heap.pop() {
            if self.heap.peek() == Some(&Reverse(top)) {
                self.heap.pop();
            } else {
                self.heap.push(Reverse(top));
                return Some(top);
            }
        }
        None
    }

    /// Canonical sorted contents; empties the heap.
    fn drain_sorted(&mut self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.heap.len());
        while let Some(x) = self.pivot() {
            self.heap.pop();
            out.push(x);
        }
        out
    }
}

/// Triangles are keyed by `(rank of longest edge) * n + opposite vertex`,
/// which orders them compatibly with the filtration.
struct Cofaces<'a> {
    n: usize,
    rank: &'a [u32],
}

impl Cofaces<'_> {
    fn of(&self, i: usize, j: usize, out: &mut Vec<u64>) {
        out.clear();
        let n = self.n;
        let r = self.rank[i * n + j];
        let (row_i, row_j) = (&self.rank[i * n..(i + 1) * n], &self.rank[j * n..(j + 1) * n]);
        for k in 0..n {
            let (a, b) = (row_i[k], row_j[k]);
            if a == NONE || b == NONE || k == i || k == j {
                continue;
            }
            let opposite = if r > a && r > b {
                k
            } else if a > b {
                j
            } else {
                i
            };
            out.push(r.max(a).max(b) as u64 * n as u64 + opposite as u64);
        }
        out.sort_unstable();
    }
}

/// H0 and H1 persistence of the Rips filtration capped at `eps_max`.
///
/// H0 comes from Kruskal union-find over the sorted edges. H1 reduces the
/// coboundary matrix (edges against triangles) in reverse filtration order,
/// skipping spanning-tree edges, which can never start a 1-cocycle. Columns
/// that were never added to are regenerated instead of stored. Rips diagrams
/// do not depend on how ties are broken, apart from zero-length pairs, which
/// are dropped, so this gives the same diagram as reducing the boundary
/// matrix of [`rips_filtration`].
pub fn rips_persistence<T: Real>(dist: &DistanceMatrix<T>, eps_max: T) -> Result<PersistenceDiagram<T>> {
    if eps_max.is_nan() || eps_max < T::zero() {
        return Err(Error::InvalidParameter("eps_max must be >= 0".into()));
    }
    let n = dist.len();
    if n >= NONE as usize {
        return Err(Error::InvalidInput(format!("{n} points is too many")));
    }

    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let value = dist.get(i, j);
            if value <= eps_max {
                edges.push(Edge {
                    value,
                    i: i as u32,
                    j: j as u32,
                });
            }
        }
    }
    edges.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .unwrap_or(Ordering::Equal)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    if edges.len() >= NONE as usize {
        return Err(Error::InvalidInput("too many edges".into()));
    }

    let mut pairs = Vec::new();

    let mut uf = UnionFind::new(n);
    let mut tree = vec![false; edges.len()];
    let mut components = n;
    for (r, e) in edges.iter().enumerate() {
        if uf.union(e.i, e.j) {
            tree[r] = true;
            components -= 1;
            if e.value > T::zero() {
                pairs.push(PersistencePair {
                    dim: 0,
                    birth: T::zero(),
                    death: e.value,
                });
            }
        }
    }
    for _ in 0..components {
        pairs.push(PersistencePair {
            dim: 0,
            birth: T::zero(),
            death: T::infinity(),
        });
    }

    let mut rank = vec![NONE; n * n];
    for (r, e) in edges.iter().enumerate() {
        let (i, j) = (e.i as usize, e.j as usize);
        rank[i * n + j] = r as u32;
        rank[j * n + i] = r as u32;
    }
    let cofaces = Cofaces { n, rank: &rank };

    // pivot triangle -> edge whose reduced column ends there
    let mut owner: HashMap<u64, u32> = HashMap::new();
    // reduced columns that differ from the plain coboundary
    let mut stored: HashMap<u32, Vec<u64>> = HashMap::new();
    let mut col = WorkingColumn::default();
    let mut buf = Vec::new();

    for (r, e) in edges.iter().enumerate().rev() {
        if tree[r] {
            continue;
        }
        cofaces.of(e.i as usize, e.j as usize, &mut buf);
        col.reset(&buf);
        let mut modified = false;
        loop {
            let Some(pivot) = col.pivot() else {
                pairs.push(PersistencePair {
                    dim: 1,
                    birth: e.value,
                    death: T::infinity(),
                });
                break;
            };
            match owner.get(&pivot) {
                Some(&o) => {
                    match stored.get(&o) {
                        Some(c) => col.add(c),
                        None => {
                            let oe = &edges[o as usize];
                            cofaces.of(oe.i as usize, oe.j as usize, &mut buf);
                            col.add(&buf);
                        }
                    }
                    modified = true;
                }
                None => {
                    owner.insert(pivot, r as u32);
                    if modified {
                        stored.insert(r as u32, col.drain_sorted());
                    }
                    let death = edges[(pivot / n as u64) as usize].value;
                    if death > e.value {
                        pairs.push(PersistencePair {
                            dim: 1,
                            birth: e.value,
                            death,
                        });
                    }
                    break;
                }
            }
        }
    }

    Ok(PersistenceDiagram::new(pairs))
}
