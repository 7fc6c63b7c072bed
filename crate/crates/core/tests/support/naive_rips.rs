//! Textbook dense boundary-matrix reduction of the full Rips 2-skeleton.
//! Slow and simple on purpose: it is the reference for the fast path.

/// `(dim, birth, death)` triples, zero-length pairs removed, sorted.
pub fn naive_rips(dist: &[Vec<f64>], eps_max: f64) -> Vec<(usize, f64, f64)> {
    let n = dist.len();
    let mut simplices: Vec<(f64, Vec<usize>)> = (0..n).map(|i| (0.0, vec![i])).collect();
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] <= eps_max {
                simplices.push((dist[i][j], vec![i, j]));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let v = dist[i][j].max(dist[i][k]).max(dist[j][k]);
                if v <= eps_max {
                    simplices.push((v, vec![i, j, k]));
                }
            }
        }
    }
    simplices.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.len().cmp(&b.1.len()))
            .then(a.1.cmp(&b.1))
    });

    let index_of = |v: &[usize]| simplices.iter().position(|s| s.1 == v).unwrap();
    let m = simplices.len();
    let mut columns: Vec<Vec<bool>> = vec![vec![false; m]; m];
    for (c, (_, v)) in simplices.iter().enumerate() {
        if v.len() > 1 {
            for skip in 0..v.len() {
                let face: Vec<usize> = v
                    .iter()
                    .enumerate()
                    .filter(|&(p, _)| p != skip)
                    .map(|(_, &x)| x)
                    .collect();
                columns[c][index_of(&face)] = true;
            }
        }
    }

    let low = |col: &[bool]| col.iter().rposition(|&b| b);
    let mut low_owner: Vec<Option<usize>> = vec![None; m];
    for c in 0..m {
        while let Some(l) = low(&columns[c]) {
            match low_owner[l] {
                Some(o) => {
                    let other = columns[o].clone();
                    for (x, y) in columns[c].iter_mut().zip(other) {
                        *x ^= y;
                    }
                }
                None => {
                    low_owner[l] = Some(c);
                    break;
                }
            }
        }
    }

    let mut out = Vec::new();
    for s in 0..m {
        let dim = simplices[s].1.len() - 1;
        if dim > 1 || low(&columns[s]).is_some() {
            continue;
        }
        let birth = simplices[s].0;
        match low_owner[s] {
            Some(killer) => {
                let death = simplices[killer].0;
                if death > birth {
                    out.push((dim, birth, death));
                }
            }
            None => out.push((dim, birth, f64::INFINITY)),
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}
