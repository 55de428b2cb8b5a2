//! Exact transport between uniform empirical measures of different sizes.
//!
//! With `n` sources of mass `m` and `m` sinks of mass `n` all supplies are
//! integers, so successive shortest paths on the bipartite residual graph
//! terminate with an optimal integral flow. Costs are kept in `f64`; the
//! reduced costs are clamped at zero to absorb rounding.

use ndarray::ArrayView2;

/// Optimal flow matrix (`n × m`, row-major) for uniform marginals, scaled
/// so that row sums are `m` and column sums are `n`.
pub fn uniform_transport_flow(cost: ArrayView2<'_, f64>) -> Vec<u64> {
    let (n, m) = cost.dim();
    let nodes = n + m;
    let mut supply = vec![m as u64; n];
    let mut demand = vec![n as u64; m];
    let mut flow = vec![0u64; n * m];
    let mut potential = vec![0.0f64; nodes];
    let mut dist = vec![f64::INFINITY; nodes];
    let mut prev = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];
    let mut remaining = (n * m) as u64;
    while remaining > 0 {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        prev.iter_mut().for_each(|p| *p = usize::MAX);
        done.iter_mut().for_each(|d| *d = false);
        for i in 0..n {
            if supply[i] > 0 {
                dist[i] = 0.0;
            }
        }
        let target = loop {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for v in 0..nodes {
                if !done[v] && dist[v] < best_d {
                    best_d = dist[v];
                    best = v;
                }
            }
            assert!(best != usize::MAX, "transport network disconnected");
            done[best] = true;
            if best >= n && demand[best - n] > 0 {
                break best;
            }
            if best < n {
                let i = best;
                for j in 0..m {
                    let v = n + j;
                    if done[v] {
                        continue;
                    }
                    let reduced = (cost[[i, j]] + potential[i] - potential[v]).max(0.0);
                    if best_d + reduced < dist[v] {
                        dist[v] = best_d + reduced;
                        prev[v] = i;
                    }
                }
            } else {
                let j = best - n;
                for i in 0..n {
                    if done[i] || flow[i * m + j] == 0 {
                        continue;
                    }
                    let reduced = (-cost[[i, j]] + potential[best] - potential[i]).max(0.0);
                    if best_d + reduced < dist[i] {
                        dist[i] = best_d + reduced;
                        prev[i] = best;
                    }
                }
            }
        };
        let cap = dist[target];
        for v in 0..nodes {
            potential[v] += dist[v].min(cap);
        }
        // bottleneck along the path back to a source with spare supply
        let mut bottleneck = demand[target - n];
        let mut v = target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u >= n {
                bottleneck = bottleneck.min(flow[v * m + (u - n)]);
            }
            v = u;
        }
        bottleneck = bottleneck.min(supply[v]);
        supply[v] -= bottleneck;
        demand[target - n] -= bottleneck;
        let mut v = target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u < n {
                flow[u * m + (v - n)] += bottleneck;
            } else {
                flow[v * m + (u - n)] -= bottleneck;
            }
            v = u;
        }
        remaining -= bottleneck;
    }
    flow
}
