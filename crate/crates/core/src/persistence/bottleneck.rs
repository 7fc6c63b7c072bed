use std::collections::VecDeque;

use super::PersistenceDiagram;
use crate::scalar::Real;

/// Exact bottleneck distance between the `dim`-dimensional parts of two diagrams.
///
/// Finite points may be matched to each other at L-infinity cost or to the
/// diagonal at half their persistence. Infinite points must pair up one to
/// one (sorted by birth); otherwise the distance is `+inf`.
pub fn bottleneck_distance<T: Real>(d1: &PersistenceDiagram<T>, d2: &PersistenceDiagram<T>, dim: usize) -> T {
    let split = |d: &PersistenceDiagram<T>| {
        let mut fin = Vec::new();
        let mut inf = Vec::new();
        for p in d.in_dim(dim) {
            if p.is_finite() {
                fin.push((p.birth, p.death));
            } else {
                inf.push(p.birth);
            }
        }
        inf.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (fin, inf)
    };
    let (a, inf_a) = split(d1);
    let (b, inf_b) = split(d2);
    if inf_a.len() != inf_b.len() {
        return T::infinity();
    }
    let inf_cost = inf_a
        .iter()
        .zip(&inf_b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(T::zero(), T::max);
    inf_cost.max(finite_bottleneck(&a, &b))
}

fn finite_bottleneck<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> T {
    if a.is_empty() && b.is_empty() {
        return T::zero();
    }
    let half = T::lit(0.5);
    let linf = |p: (T, T), q: (T, T)| (p.0 - q.0).abs().max((p.1 - q.1).abs());
    let diag = |p: (T, T)| (p.1 - p.0) * half;

    let mut candidates: Vec<T> = Vec::with_capacity(a.len() * b.len() + a.len() + b.len() + 1);
    candidates.push(T::zero());
    for &p in a {
        candidates.push(diag(p));
        for &q in b {
            candidates.push(linf(p, q));
        }
    }
    candidates.extend(b.iter().map(|&q| diag(q)));
    candidates.sort_by(|x, y| x.partial_cmp(y).unwrap());
    candidates.dedup();

    // Left: points of `a`, then diagonal images of `b`.
    // Right: points of `b`, then diagonal images of `a`.
    let (na, nb) = (a.len(), b.len());
    let size = na + nb;
    let feasible = |t: T| {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
        for (u, &p) in a.iter().enumerate() {
            for (v, &q) in b.iter().enumerate() {
                if linf(p, q) <= t {
                    adj[u].push(v);
                }
            }
            if diag(p) <= t {
                adj[u].push(nb + u);
            }
        }
        for (w, &q) in b.iter().enumerate() {
            let u = na + w;
            if diag(q) <= t {
                adj[u].push(w);
            }
            adj[u].extend(nb..nb + na);
        }
        max_matching(&adj, size) == size
    };

    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Hopcroft-Karp maximum bipartite matching; `adj[u]` lists right vertices of left `u`.
fn max_matching(adj: &[Vec<usize>], n_right: usize) -> usize {
    const FREE: usize = usize::MAX;
    let n_left = adj.len();
    let mut match_l = vec![FREE; n_left];
    let mut match_r = vec![FREE; n_right];
    let mut layer = vec![0usize; n_left];
    let mut matched = 0;
    loop {
        // BFS from free left vertices
        let mut queue = VecDeque::new();
        let mut found = false;
        for u in 0..n_left {
            if match_l[u] == FREE {
                layer[u] = 0;
                queue.push_back(u);
            } else {
                layer[u] = usize::MAX;
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == FREE {
                    found = true;
                } else if layer[w] == usize::MAX {
                    layer[w] = layer[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            return matched;
        }
        let mut next = vec![0usize; n_left];
        for u in 0..n_left {
            if match_l[u] == FREE && augment(u, adj, &mut match_l, &mut match_r, &mut layer, &mut next) {
                matched += 1;
            }
        }
    }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    layer: &mut [usize],
    next: &mut [usize],
) -> bool {
    while next[u] < adj[u].len() {
        let v = adj[u][next[u]];
        next[u] += 1;
        let w = match_r[v];
        let ok = w == usize::MAX || (layer[w] == layer[u] + 1 && augment(w, adj, match_l, match_r, layer, next));
        if ok {
            match_l[u] = v;
            match_r[v] = u;
            return true;
        }
    }
    layer[u] = usize::MAX;
    false
}
