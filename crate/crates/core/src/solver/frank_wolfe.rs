//! Away-step conditional gradient for `min I(X; Z)` over `P_{Z|W}` under a linear budget.
//!
//! The channel is a dense row-major `|W| x |Z|` vector `q`. The objective only sees
//! `P_{X,Z} = P_{X,W} q`, so values, gradients and line searches are all computed
//! in the `|X| x |Z|` space.

use super::lmo;

const FLOOR: f64 = 1e-300;

pub(crate) struct Problem<'a> {
    /// `P_{X,W}`, row-major `|X| x |W|`.
    pub p_xw: &'a [f64],
    /// Cost `c(w, z)`, row-major `|W| x |Z|`.
    pub cost: &'a [f64],
    pub nx: usize,
    pub nw: usize,
    pub nz: usize,
    pub budget: f64,
}

pub(crate) struct Run {
    pub q: Vec<f64>,
    pub value: f64,
    pub gap: f64,
}

impl Problem<'_> {
    fn p_x(&self) -> Vec<f64> {
        self.p_xw.chunks(self.nw).map(|r| r.iter().sum()).collect()
    }

    fn push(&self, q: &[f64]) -> Vec<f64> {
        let (nw, nz) = (self.nw, self.nz);
        let mut pxz = vec![0.0; self.nx * nz];
        for x in 0..self.nx {
            for w in 0..nw {
                let p = self.p_xw[x * nw + w];
                if p == 0.0 {
                    continue;
                }
                for z in 0..nz {
                    pxz[x * nz + z] += p * q[w * nz + z];
                }
            }
        }
        pxz
    }

    fn p_z(&self, pxz: &[f64]) -> Vec<f64> {
        let mut pz = vec![0.0; self.nz];
        for row in pxz.chunks(self.nz) {
            for (acc, v) in pz.iter_mut().zip(row) {
                *acc += v;
            }
        }
        pz
    }

    pub fn objective(&self, q: &[f64]) -> f64 {
        let pxz = self.push(q);
        mi(&pxz, &self.p_x(), &self.p_z(&pxz), self.nz)
    }

    pub fn cost_of(&self, q: &[f64]) -> f64 {
        self.cost.iter().zip(q).map(|(c, v)| c * v).sum()
    }

    /// `G(w, z) = sum_x P_{X,W}(x, w) ln(P_{X,Z}(x, z) / (P_X(x) P_Z(z)))`.
    fn gradient(&self, pxz: &[f64], px: &[f64], pz: &[f64]) -> Vec<f64> {
        let (nw, nz) = (self.nw, self.nz);
        let mut g = vec![0.0; nw * nz];
        for x in 0..self.nx {
            if px[x] == 0.0 {
                continue;
            }
            let logs: Vec<f64> = (0..nz)
                .map(|z| (pxz[x * nz + z].max(FLOOR) / (px[x] * pz[z].max(FLOOR))).ln())
                .collect();
            for w in 0..nw {
                let p = self.p_xw[x * nw + w];
                if p == 0.0 {
                    continue;
                }
                for z in 0..nz {
                    g[w * nz + z] += p * logs[z];
                }
            }
        }
        g
    }

    /// Exact-enough minimizer of `gamma -> I(q + gamma d)` on `[0, gmax]`.
    fn line_search(&self, q: &[f64], d: &[f64], gmax: f64, px: &[f64]) -> f64 {
        let nz = self.nz;
        let base = self.push(q);
        let delta = self.push(d);
        let mut delta_z = vec![0.0; nz];
        for row in delta.chunks(nz) {
            for (acc, v) in delta_z.iter_mut().zip(row) {
                *acc += v;
            }
        }
        let derivs = |g: f64| -> (f64, f64) {
            let pz: Vec<f64> = {
                let mut pz = vec![0.0; nz];
                for (i, (&b, &dd)) in base.iter().zip(&delta).enumerate() {
                    pz[i % nz] += b + g * dd;
                }
                pz
            };
            let (mut d1, mut d2) = (0.0, 0.0);
            for (i, (&b, &dd)) in base.iter().zip(&delta).enumerate() {
                if dd == 0.0 {
                    continue;
                }
                let x = i / nz;
                let p = (b + g * dd).max(FLOOR);
                d1 += dd * (p / (px[x] * pz[i % nz].max(FLOOR))).ln();
                d2 += dd * dd / p;
            }
            for (z, &dz) in delta_z.iter().enumerate() {
                if dz != 0.0 {
                    d2 -= dz * dz / pz[z].max(FLOOR);
                }
            }
            (d1, d2.max(0.0))
        };
        if derivs(0.0).0 >= 0.0 {
            return 0.0;
        }
        if derivs(gmax).0 <= 0.0 {
            return gmax;
        }
        let (mut lo, mut hi) = (0.0, gmax);
        let mut g = 0.5 * gmax;
        for _ in 0..100 {
            let (d1, d2) = derivs(g);
            if d1 == 0.0 {
                return g;
            }
            if d1 < 0.0 {
                lo = g;
            } else {
                hi = g;
            }
            if hi - lo <= 1e-15 * gmax.max(1.0) {
                break;
            }
            let newton = g - d1 / d2;
            g = if d2 > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        0.5 * (lo + hi)
    }

    /// Runs from a feasible start given as weighted atoms.
    pub fn run(&self, start: Vec<(Vec<f64>, f64)>, max_iters: usize, gap_tol: f64) -> Run {
        let px = self.p_x();
        let mut atoms = start;
        let mut q = combine(&atoms, self.nw * self.nz);
        let mut value = self.objective(&q);
        let mut gap = f64::INFINITY;
        for _ in 0..max_iters {
            let pxz = self.push(&q);
            let pz = self.p_z(&pxz);
            let g = self.gradient(&pxz, &px, &pz);
            let s = lmo::minimize(&g, self.cost, self.nz, self.budget);
            let gq = dot(&g, &q);
            gap = (gq - dot(&g, &s)).max(0.0);
            if gap <= gap_tol {
                break;
            }

            let (away_idx, away_val) = atoms
                .iter()
                .enumerate()
                .map(|(i, (a, _))| (i, dot(&g, a)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("active set is nonempty");
            let fw_gain = gq - dot(&g, &s);
            let away_gain = away_val - gq;
            let (dir, gmax, is_fw) = if fw_gain >= away_gain || atoms.len() == 1 {
                (sub(&s, &q), 1.0, true)
            } else {
                let w = atoms[away_idx].1;
                (sub(&q, &atoms[away_idx].0), w / (1.0 - w), false)
            };
            let gamma = self.line_search(&q, &dir, gmax, &px);
            if gamma <= 0.0 {
                break;
            }
            // Clamp round-off below zero; a negative cell makes the logarithms undefined.
            let candidate: Vec<f64> = q.iter().zip(&dir).map(|(a, b)| (a + gamma * b).max(0.0)).collect();
            let new_value = self.objective(&candidate);
            if new_value > value {
                break;
            }
            if is_fw {
                for a in atoms.iter_mut() {
                    a.1 *= 1.0 - gamma;
                }
                match atoms.iter().position(|(a, _)| *a == s) {
                    Some(i) => atoms[i].1 += gamma,
                    None => atoms.push((s, gamma)),
                }
                if gamma >= 1.0 {
                    atoms.retain(|(_, w)| *w > 0.0);
                }
            } else {
                for a in atoms.iter_mut() {
                    a.1 *= 1.0 + gamma;
                }
                atoms[away_idx].1 -= gamma;
                if gamma >= gmax {
                    atoms.swap_remove(away_idx);
                }
            }
            atoms.retain(|(_, w)| *w > 1e-15);
            let total: f64 = atoms.iter().map(|(_, w)| w).sum();
            for a in atoms.iter_mut() {
                a.1 /= total;
            }
            q = candidate;
            value = new_value;
        }
        Run { q, value, gap }
    }
}

fn mi(pxz: &[f64], px: &[f64], pz: &[f64], nz: usize) -> f64 {
    let mut acc = 0.0;
    for (i, &p) in pxz.iter().enumerate() {
        if p > 0.0 {
            acc += p * (p / (px[i / nz] * pz[i % nz])).ln();
        }
    }
    debug_assert!(!acc.is_nan());
    if acc < 0.0 {
        0.0
    } else {
        acc
    }
}

fn combine(atoms: &[(Vec<f64>, f64)], n: usize) -> Vec<f64> {
    let mut q = vec![0.0; n];
    for (a, w) in atoms {
        for (acc, v) in q.iter_mut().zip(a) {
            *acc += w * v;
        }
    }
    q
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
