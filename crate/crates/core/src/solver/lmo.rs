//! Exact linear minimization over row-stochastic matrices with one linear budget:
//! minimize `<g, s>` over `s >= 0`, rows summing to one, `<c, s> <= budget`.
//!
//! Each row picks a single column except at the budget boundary, where the
//! solution mixes two assignments that are both optimal for the Lagrangian
//! `g + lambda c` at the critical multiplier.

/// Per-row choices at a fixed multiplier: `(lo, hi)` break ties toward the smallest
/// and the largest cost respectively.
fn assignments(g: &[f64], c: &[f64], nz: usize, lambda: f64) -> (Vec<usize>, Vec<usize>) {
    let rows = g.len() / nz;
    let mut lo = Vec::with_capacity(rows);
    let mut hi = Vec::with_capacity(rows);
    for w in 0..rows {
        let val = |z: usize| g[w * nz + z] + lambda * c[w * nz + z];
        let best = (0..nz).map(val).fold(f64::INFINITY, f64::min);
        let tie = 1e-12 * (1.0 + best.abs());
        let ties = (0..nz).filter(|&z| val(z) <= best + tie);
        let (mut l, mut h) = (usize::MAX, usize::MAX);
        for z in ties {
            let cz = c[w * nz + z];
            if l == usize::MAX || cz < c[w * nz + l] || (cz == c[w * nz + l] && g[w * nz + z] < g[w * nz + l]) {
                l = z;
            }
            if h == usize::MAX || cz > c[w * nz + h] || (cz == c[w * nz + h] && g[w * nz + z] < g[w * nz + h]) {
                h = z;
            }
        }
        lo.push(l);
        hi.push(h);
    }
    (lo, hi)
}

fn assignment_cost(c: &[f64], nz: usize, a: &[usize]) -> f64 {
    a.iter().enumerate().map(|(w, &z)| c[w * nz + z]).sum()
}

fn vertex(a: &[usize], nz: usize) -> Vec<f64> {
    let mut s = vec![0.0; a.len() * nz];
    for (w, &z) in a.iter().enumerate() {
        s[w * nz + z] = 1.0;
    }
    s
}

/// A minimizer of `<g, s>` over the budgeted polytope. `budget` must be at least the
/// minimum achievable cost.
pub(crate) fn minimize(g: &[f64], c: &[f64], nz: usize, budget: f64) -> Vec<f64> {
    let (lo, _) = assignments(g, c, nz, 0.0);
    if assignment_cost(c, nz, &lo) <= budget {
        return vertex(&lo, nz);
    }

    let rows = g.len() / nz;
    let mut breaks = Vec::new();
    for w in 0..rows {
        for a in 0..nz {
            for b in 0..nz {
                let (ga, gb, ca, cb) = (g[w * nz + a], g[w * nz + b], c[w * nz + a], c[w * nz + b]);
                if cb > ca && gb < ga {
                    // Beyond this multiplier the cheaper column `a` beats `b`.
                    breaks.push((ga - gb) / (cb - ca));
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    // cost of the lo assignment is nonincreasing in lambda.
    let feasible = |lambda: f64| assignment_cost(c, nz, &assignments(g, c, nz, lambda).0) <= budget;
    let idx = breaks.partition_point(|&l| !feasible(l));
    let lambda = match breaks.get(idx) {
        Some(&l) => l,
        None => breaks.last().map_or(1.0, |l| 2.0 * l + 1.0),
    };
    let (lo, hi) = assignments(g, c, nz, lambda);
    let cost_lo = assignment_cost(c, nz, &lo);
    let cost_hi = assignment_cost(c, nz, &hi);
    if cost_hi <= budget {
        return vertex(&hi, nz);
    }
    if cost_lo > budget || cost_hi <= cost_lo {
        // Only reachable through round-off; fall back to the cheapest choice per row.
        let cheapest: Vec<usize> = (0..rows)
            .map(|w| {
                (0..nz)
                    .min_by(|&a, &b| c[w * nz + a].total_cmp(&c[w * nz + b]).then(g[w * nz + a].total_cmp(&g[w * nz + b])))
                    .expect("nonempty row")
            })
            .collect();
        return vertex(&cheapest, nz);
    }
    let alpha = (cost_hi - budget) / (cost_hi - cost_lo);
    let mut s = vec![0.0; rows * nz];
    for w in 0..rows {
        s[w * nz + lo[w]] += alpha;
        s[w * nz + hi[w]] += 1.0 - alpha;
    }
    s
}
