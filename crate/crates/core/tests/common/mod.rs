//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls into the code paths it is used to check.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use rand::Rng;

/// Breadth-first check that every group of `assignment` induces a connected
/// subgraph of the undirected graph given by `edges`.
pub fn groups_connected(n: usize, edges: &[(usize, usize)], assignment: &[usize]) -> bool {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (v, &g) in assignment.iter().enumerate().take(n) {
        groups.entry(g).or_default().push(v);
    }
    for members in groups.values() {
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([members[0]]);
        visited[members[0]] = true;
        let mut count = 0;
        while let Some(v) = queue.pop_front() {
            count += 1;
            for &u in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                if !visited[u] && assignment[u] == assignment[v] {
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }
        if count != members.len() {
            return false;
        }
    }
    true
}

/// Random connected graph: a random spanning tree plus `extra` random edges.
pub fn random_connected_edges<R: Rng>(n: usize, extra: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            edges.push((a, b));
        }
    }
    edges
}

pub fn grid_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                e.push((v, v + 1));
            }
            if r + 1 < rows {
                e.push((v, v + cols));
            }
        }
    }
    e
}

type Mat = Vec<Vec<f64>>;

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; p]; n];
    for i in 0..n {
        for j in 0..p {
            for k in 0..m {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn transpose(a: &Mat) -> Mat {
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

fn diag(v: &[f64]) -> Mat {
    let n = v.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        d[i][i] = v[i];
    }
    d
}

/// Gauss–Jordan inverse with partial pivoting.
fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut aug: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs()))
            .unwrap();
        aug.swap(col, piv);
        let p = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                let pivot_row = aug[col].clone();
                for (cell, p) in aug[r].iter_mut().zip(&pivot_row) {
                    *cell -= f * p;
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct OracleFit {
    pub intercept: f64,
    pub slope: f64,
    pub se_intercept: f64,
    pub se_slope: f64,
    pub t_intercept: f64,
    pub t_slope: f64,
    pub adj_r2: f64,
}

/// Weighted least squares by explicit normal equations with the full n×n
/// weight matrix, and the HC0 sandwich as a literal matrix product.
pub fn wls_oracle(x: &[f64], y: &[f64], w: &[f64]) -> OracleFit {
    let n = x.len();
    let xm: Mat = x.iter().map(|&v| vec![1.0, v]).collect();
    let ym: Mat = y.iter().map(|&v| vec![v]).collect();
    let wm = diag(w);
    let xt = transpose(&xm);
    let xtw = matmul(&xt, &wm);
    let bread = inverse(&matmul(&xtw, &xm));
    let beta = matmul(&bread, &matmul(&xtw, &ym));
    let (a, b) = (beta[0][0], beta[1][0]);
    let e: Vec<f64> = (0..n).map(|i| y[i] - a - b * x[i]).collect();
    let e2 = diag(&e.iter().map(|v| v * v).collect::<Vec<_>>());
    let meat = matmul(&matmul(&xtw, &e2), &transpose(&xtw));
    let cov = matmul(&matmul(&bread, &meat), &bread);
    let (se_a, se_b) = (cov[0][0].sqrt(), cov[1][1].sqrt());
    let sw: f64 = w.iter().sum();
    let ybar = (0..n).map(|i| w[i] * y[i]).sum::<f64>() / sw;
    let sst: f64 = (0..n).map(|i| w[i] * (y[i] - ybar).powi(2)).sum();
    let ssr: f64 = (0..n).map(|i| w[i] * e[i] * e[i]).sum();
    let r2 = 1.0 - ssr / sst;
    OracleFit {
        intercept: a,
        slope: b,
        se_intercept: se_a,
        se_slope: se_b,
        t_intercept: a / se_a,
        t_slope: b / se_b,
        adj_r2: 1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - 2.0),
    }
}

/// |a − b| ≤ tol · max(|a|, |b|, floor).
pub fn rel_close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}

/// Random WLS instance: n in 3..=12, positive weights, non-degenerate x.
pub fn random_wls_instance<R: Rng>(rng: &mut R) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    loop {
        let n = rng.random_range(3..=12);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..3.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&xi| 0.7 * xi - 0.3 + rng.random_range(-1.0..1.0))
            .collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let spread =
            x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
        if spread > 0.1 {
            return (x, y, w);
        }
    }
}
