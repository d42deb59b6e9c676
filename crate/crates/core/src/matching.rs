//! Bipartite matching: maximum cardinality (Hopcroft–Karp) and minimum-cost
//! perfect assignment (Hungarian algorithm with potentials).

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

const FREE: usize = usize::MAX;

/// Size of a maximum matching of the bipartite graph whose left vertex `i`
/// is adjacent to the right vertices `adj[i]`.
pub fn hopcroft_karp(n_right: usize, adj: &[Vec<usize>]) -> usize {
    let n_left = adj.len();
    let mut match_l = vec![FREE; n_left];
    let mut match_r = vec![FREE; n_right];
    let mut dist = vec![0usize; n_left];
    let mut queue = VecDeque::with_capacity(n_left);
    let mut matched = 0;

    loop {
        // BFS layering from free left vertices
        queue.clear();
        let mut found = false;
        for i in 0..n_left {
            if match_l[i] == FREE {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = FREE;
            }
        }
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                let k = match_r[j];
                if k == FREE {
                    found = true;
                } else if dist[k] == FREE {
                    dist[k] = dist[i] + 1;
                    queue.push_back(k);
                }
            }
        }
        if !found {
            return matched;
        }
        let mut cursor = vec![0usize; n_left];
        for i in 0..n_left {
            if match_l[i] == FREE
                && augment(i, adj, &mut match_l, &mut match_r, &mut dist, &mut cursor)
            {
                matched += 1;
            }
        }
    }
}

/// DFS along the BFS layers; flips the path when it reaches a free right
/// vertex. Recursion depth is bounded by the matching size.
fn augment(
    i: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
    cursor: &mut [usize],
) -> bool {
    while cursor[i] < adj[i].len() {
        let j = adj[i][cursor[i]];
        cursor[i] += 1;
        let k = match_r[j];
        let extends = k == FREE
            || (dist[k] != FREE
                && dist[k] == dist[i] + 1
                && augment(k, adj, match_l, match_r, dist, cursor));
        if extends {
            match_l[i] = j;
            match_r[j] = i;
            return true;
        }
    }
    dist[i] = FREE;
    false
}

/// Minimum-cost perfect assignment on a square `n × n` row-major cost matrix.
///
/// Returns `col_of_row`. Costs must be finite.
pub fn hungarian(n: usize, cost: &[f64]) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return Vec::new();
    }
    // 1-based potentials; column 0 is a virtual source
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
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
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0usize; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    col_of
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_max_matching(n_right: usize, adj: &[Vec<usize>]) -> usize {
        fn go(i: usize, adj: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
            if i == adj.len() {
                return 0;
            }
            let mut best = go(i + 1, adj, used);
            for &j in &adj[i] {
                if !used[j] {
                    used[j] = true;
                    best = best.max(1 + go(i + 1, adj, used));
                    used[j] = false;
                }
            }
            best
        }
        go(0, adj, &mut vec![false; n_right])
    }

    fn brute_assignment(n: usize, cost: &[f64]) -> f64 {
        fn go(i: usize, n: usize, cost: &[f64], used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if i == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    go(i + 1, n, cost, used, acc + cost[i * n + j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        go(0, n, cost, &mut vec![false; n], 0.0, &mut best);
        best
    }

    struct Lcg(u64);
    impl Lcg {
        fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            self.0 >> 33
        }
    }

    #[test]
    fn hopcroft_karp_matches_brute_force() {
        let mut rng = Lcg(7);
        for _ in 0..300 {
            let nl = 1 + (rng.next() % 7) as usize;
            let nr = 1 + (rng.next() % 7) as usize;
            let adj: Vec<Vec<usize>> = (0..nl)
                .map(|_| (0..nr).filter(|_| rng.next().is_multiple_of(3)).collect())
                .collect();
            assert_eq!(hopcroft_karp(nr, &adj), brute_max_matching(nr, &adj));
        }
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let mut rng = Lcg(11);
        for _ in 0..200 {
            let n = 1 + (rng.next() % 6) as usize;
            let cost: Vec<f64> = (0..n * n).map(|_| (rng.next() % 1000) as f64 / 7.0).collect();
            let a = hungarian(n, &cost);
            let mut seen = vec![false; n];
            for &j in &a {
                assert!(!seen[j]);
                seen[j] = true;
            }
            let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
            assert!((total - brute_assignment(n, &cost)).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(hopcroft_karp(0, &[]), 0);
        assert!(hungarian(0, &[]).is_empty());
    }
}
