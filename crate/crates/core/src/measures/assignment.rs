//! Optimal assignment for equal-size uniform clouds.

use crate::{Error, Result};

/// Minimum-cost perfect matching of a dense `n × n` cost matrix (row-major),
/// by the Hungarian method with potentials, `O(n^3)`. Returns the column
/// assigned to each row.
pub fn hungarian(n: usize, cost: &[f64]) -> Vec<usize> {
    assert_eq!(cost.len(), n * n);
    // 1-based arrays; column 0 is a virtual source
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Exact `W_1` between two uniform clouds of equal size, given as flat
/// row-major coordinate arrays in dimension `dim`.
pub fn w1_assignment_points(dim: usize, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len() / dim.max(1), found: b.len() / dim.max(1) });
    }
    let n = a.len() / dim;
    if n == 0 {
        return Ok(0.0);
    }
    if dim == 1 {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        x.sort_by(|p, q| p.total_cmp(q));
        y.sort_by(|p, q| p.total_cmp(q));
        let total: f64 = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).sum();
        return Ok(total / n as f64);
    }
    let mut cost = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..dim {
                let t = a[i * dim + k] - b[j * dim + k];
                s += t * t;
            }
            cost[i * n + j] = s.sqrt();
        }
    }
    let perm = hungarian(n, &cost);
    let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n: usize, cost: &[f64]) -> f64 {
        fn rec(row: usize, n: usize, used: &mut Vec<bool>, cost: &[f64]) -> f64 {
            if row == n {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row * n + j] + rec(row + 1, n, used, cost));
                    used[j] = false;
                }
            }
            best
        }
        rec(0, n, &mut vec![false; n], cost)
    }

    #[test]
    fn test_hungarian_matches_brute_force() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..=6 {
            for _ in 0..20 {
                let cost: Vec<f64> = (0..n * n).map(|_| next() * 10.0).collect();
                let perm = hungarian(n, &cost);
                let val: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
                assert!((val - brute(n, &cost)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn test_small_examples() {
        assert_eq!(w1_assignment_points(1, &[0.0, 1.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(w1_assignment_points(2, &[0.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(w1_assignment_points(1, &[0.0], &[3.0]).unwrap(), 3.0);
        assert!(w1_assignment_points(1, &[0.0], &[3.0, 1.0]).is_err());
    }
}
