#![allow(dead_code)]

use infinitewalk::generators::random_walkable;
use infinitewalk::Graph;
use ndarray::{Array2, ArrayView2};

pub fn k3() -> Graph {
    Graph::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
}

pub fn k3_pendant() -> Graph {
    Graph::unweighted(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap()
}

pub fn frob(a: ArrayView2<'_, f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn rel_frob(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    let diff = &a - &b;
    frob(diff.view()) / frob(b).max(f64::MIN_POSITIVE)
}

pub fn max_abs_diff(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// The 25-graph suite: n from 5 to 50, sparse and dense, half weighted.
pub fn graph_suite() -> Vec<Graph> {
    (0..25u64)
        .map(|k| {
            let n = 5 + (k as usize * 45) / 24;
            let p = if k % 3 == 0 { 0.5 } else { (3.0 / n as f64).clamp(0.1, 0.6) };
            random_walkable(n, p, k % 2 == 1, 1000 + k).unwrap()
        })
        .collect()
}

/// Brute-force window-`T` PMI argument, straight from the definition with
/// the asymmetric `P = D^{-1}A`: `v_G (T⁻¹ Σ Pᵏ) D^{-1}`.
pub fn naive_pmi_argument(g: &Graph, window: usize) -> Array2<f64> {
    let n = g.n();
    let a = g.dense_adjacency();
    let deg = g.degree();
    let p = Array2::from_shape_fn((n, n), |(i, j)| a[[i, j]] / deg[i]);
    let mut power = Array2::<f64>::eye(n);
    let mut acc = Array2::<f64>::zeros((n, n));
    for _ in 0..window {
        power = power.dot(&p);
        acc += &power;
    }
    let v = g.volume();
    Array2::from_shape_fn((n, n), |(i, j)| v * acc[[i, j]] / window as f64 / deg[j])
}

/// Moore–Penrose pseudoinverse by Gauss–Jordan on `L + J/n`, then
/// subtracting `J/n`. Valid for the Laplacian of a connected graph.
pub fn naive_laplacian_pinv(g: &Graph) -> Array2<f64> {
    let n = g.n();
    let shift = 1.0 / n as f64;
    let m = g.laplacian().mapv(|x| x + shift);
    let inv = gauss_jordan_inverse(&m);
    inv.mapv(|x| x - shift)
}

pub fn gauss_jordan_inverse(m: &Array2<f64>) -> Array2<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut inv = Array2::<f64>::eye(n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[[x, col]].abs().total_cmp(&a[[y, col]].abs())).unwrap();
        for k in 0..n {
            a.swap([col, k], [pivot, k]);
            inv.swap([col, k], [pivot, k]);
        }
        let p = a[[col, col]];
        for k in 0..n {
            a[[col, k]] /= p;
            inv[[col, k]] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[[r, col]];
                if f != 0.0 {
                    for k in 0..n {
                        a[[r, k]] -= f * a[[col, k]];
                        inv[[r, k]] -= f * inv[[col, k]];
                    }
                }
            }
        }
    }
    inv
}
