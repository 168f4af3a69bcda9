//! Balanced transportation problem solved by the primal simplex on the
//! spanning-tree basis: north-west corner start, row/column potentials,
//! most-negative reduced cost entering, and Bland's rule while pivots stay
//! degenerate.

use std::collections::VecDeque;

use crate::error::{Error, Result};

const REDUCED_COST_TOL: f64 = 1e-12;

/// Minimizes `sum c_ij x_ij` subject to row sums `supply`, column sums
/// `demand` and `x >= 0`. `cost` and the returned flows are row-major.
pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (supply.len(), demand.len());
    debug_assert_eq!(cost.len(), m * n);
    let mut flow = vec![0.0; m * n];
    let mut basis = north_west(supply, demand, &mut flow);
    let mut in_basis = vec![usize::MAX; m * n];
    for (b, &(i, j)) in basis.iter().enumerate() {
        in_basis[i * n + j] = b;
    }

    let nodes = m + n;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut parent = vec![(usize::MAX, usize::MAX); nodes];
    let mut queue = VecDeque::with_capacity(nodes);
    let mut degenerate_run = 0usize;
    let max_iter = 50 * m * n + 1000;

    for _ in 0..max_iter {
        for a in &mut adj {
            a.clear();
        }
        for (b, &(i, j)) in basis.iter().enumerate() {
            adj[i].push((m + j, b));
            adj[m + j].push((i, b));
        }
        // Potentials: u_i + v_j = c_ij on basic cells, u_0 = 0.
        bfs(&adj, 0, &mut parent, &mut queue);
        for &node in queue.iter() {
            let (p, b) = parent[node];
            if p == usize::MAX {
                continue;
            }
            let (i, j) = basis[b];
            if node < m {
                u[i] = cost[i * n + j] - v[j];
            } else {
                v[j] = cost[i * n + j] - u[i];
            }
        }

        let bland = degenerate_run > nodes;
        let mut entering: Option<(usize, usize, f64)> = None;
        'scan: for i in 0..m {
            for j in 0..n {
                if in_basis[i * n + j] != usize::MAX {
                    continue;
                }
                let d = cost[i * n + j] - u[i] - v[j];
                if d < -REDUCED_COST_TOL && entering.is_none_or(|(_, _, best)| d < best) {
                    entering = Some((i, j, d));
                    if bland {
                        break 'scan;
                    }
                }
            }
        }
        let Some((ei, ej, _)) = entering else {
            return Ok(flow);
        };

        // Tree path from column ej to row ei; its edges alternate -, +, -, ..
        bfs(&adj, m + ej, &mut parent, &mut queue);
        let mut path = Vec::new();
        let mut node = ei;
        while node != m + ej {
            let (p, b) = parent[node];
            path.push(b);
            node = p;
        }
        path.reverse();
        let mut leave = usize::MAX;
        let mut theta = f64::INFINITY;
        for &b in path.iter().step_by(2) {
            let (i, j) = basis[b];
            let x = flow[i * n + j];
            let better = x < theta || (x == theta && bland && cell_index(basis[b], n) < cell_index(basis[leave], n));
            if better {
                theta = x;
                leave = b;
            }
        }
        degenerate_run = if theta == 0.0 { degenerate_run + 1 } else { 0 };
        for (k, &b) in path.iter().enumerate() {
            let (i, j) = basis[b];
            let x = &mut flow[i * n + j];
            if k % 2 == 0 {
                *x -= theta;
            } else {
                *x += theta;
            }
        }
        let (li, lj) = basis[leave];
        flow[li * n + lj] = 0.0;
        in_basis[li * n + lj] = usize::MAX;
        flow[ei * n + ej] = theta;
        basis[leave] = (ei, ej);
        in_basis[ei * n + ej] = leave;
    }
    Err(Error::ResourceLimit(format!(
        "transportation simplex did not converge within {max_iter} pivots"
    )))
}

fn cell_index((i, j): (usize, usize), n: usize) -> usize {
    i * n + j
}

fn north_west(supply: &[f64], demand: &[f64], flow: &mut [f64]) -> Vec<(usize, usize)> {
    let (m, n) = (supply.len(), demand.len());
    let mut a = supply.to_vec();
    let mut b = demand.to_vec();
    let mut basis = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let q = a[i].min(b[j]);
        flow[i * n + j] = q;
        basis.push((i, j));
        a[i] -= q;
        b[j] -= q;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && a[i] <= b[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    basis
}

/// Breadth-first order from `root`; `parent[x] = (node, basis index)`.
fn bfs(adj: &[Vec<(usize, usize)>], root: usize, parent: &mut [(usize, usize)], queue: &mut VecDeque<usize>) {
    parent.fill((usize::MAX, usize::MAX));
    queue.clear();
    queue.push_back(root);
    let mut seen = vec![false; adj.len()];
    seen[root] = true;
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        for &(y, b) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = (x, b);
                queue.push_back(y);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(flow: &[f64], cost: &[f64]) -> f64 {
        flow.iter().zip(cost).map(|(x, c)| x * c).sum()
    }

    #[test]
    fn textbook_instance() {
        // Supplies 20/30/25, demands 10/35/30, costs with known optimum 340.
        let supply = [20.0, 30.0, 25.0];
        let demand = [10.0, 35.0, 30.0];
        let cost = [8.0, 6.0, 10.0, 9.0, 12.0, 13.0, 14.0, 9.0, 16.0];
        let flow = solve(&supply, &demand, &cost).unwrap();
        for i in 0..3 {
            let r: f64 = flow[i * 3..i * 3 + 3].iter().sum();
            assert!((r - supply[i]).abs() < 1e-12);
        }
        // Brute force over the integer polytope.
        let mut best = f64::INFINITY;
        for x00 in 0..=20 {
            for x01 in 0..=20 - x00 {
                for x10 in 0..=30 {
                    for x11 in 0..=30 - x10 {
                        let x02 = 20 - x00 - x01;
                        let x12 = 30 - x10 - x11;
                        let x20 = 10 - x00 - x10;
                        let x21 = 35 - x01 - x11;
                        let x22 = 30 - x02 - x12;
                        if x20 < 0 || x21 < 0 || x22 < 0 || x20 + x21 + x22 != 25 {
                            continue;
                        }
                        let xs = [x00, x01, x02, x10, x11, x12, x20, x21, x22].map(|x| x as f64);
                        best = best.min(value(&xs, &cost));
                    }
                }
            }
        }
        assert!((value(&flow, &cost) - best).abs() < 1e-9);
    }

    #[test]
    fn single_row_and_column() {
        let flow = solve(&[1.0], &[0.25, 0.75], &[3.0, 1.0]).unwrap();
        assert_eq!(flow, vec![0.25, 0.75]);
        let flow = solve(&[0.4, 0.6], &[1.0], &[1.0, 2.0]).unwrap();
        assert_eq!(flow, vec![0.4, 0.6]);
    }

    #[test]
    fn degenerate_identical_marginals() {
        let a = [0.25; 4];
        let cost: Vec<f64> = (0..16).map(|c| ((c / 4) as f64 - (c % 4) as f64).abs()).collect();
        let flow = solve(&a, &a, &cost).unwrap();
        assert_eq!(value(&flow, &cost), 0.0);
    }
}
