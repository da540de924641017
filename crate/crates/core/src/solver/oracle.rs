//! Exhaustive grid search over channels, for any privacy and distortion measure.

use super::scenario::{Mechanism, Scenario};
use super::{Status, TradeoffPoint};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::measures::{distortion, leakage, DistortionMeasure, PrivacyMeasure};

/// Most free channel parameters the oracle accepts.
pub const MAX_PARAMETERS: usize = 8;
/// Most grid points the oracle will visit.
pub const MAX_GRID_POINTS: u128 = 50_000_000;

const FEASIBILITY_SLACK: f64 = 1e-12;

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// All compositions of `n` into `parts` nonnegative integers, in lexicographic order.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

struct Evaluator<'a> {
    scenario: &'a Scenario,
    privacy: &'a PrivacyMeasure,
    dist: &'a DistortionMeasure,
    delta: f64,
}

impl Evaluator<'_> {
    /// `Some(leakage)` when `q` is feasible.
    fn eval(&self, q: &[f64]) -> Result<Option<ExtReal>> {
        let mech = Mechanism::from_dense(self.scenario, q);
        let xyz = self.scenario.joint_xyz(&mech)?;
        let d = distortion(self.dist, &xyz.marginal(&[1, 2])?)?;
        if d > self.delta + FEASIBILITY_SLACK {
            return Ok(None);
        }
        let j = match self.privacy {
            PrivacyMeasure::DifferentialPrivacy(_) => {
                super::scenario::evaluate(self.scenario, &mech, self.privacy, self.dist)?.0
            }
            _ => leakage(self.privacy, &xyz.marginal(&[0, 2])?)?,
        };
        Ok(Some(j))
    }
}

/// Best feasible channel on a grid of step `resolution` per row, followed by one pass of
/// pairwise mass moves at step sizes `h/2, h/4, ..., h/64`. The result upper-bounds the
/// true infimum; its status is `Approximate` with an unknown (infinite) gap.
pub fn brute_force_oracle(
    scenario: &Scenario,
    privacy: &PrivacyMeasure,
    dist: &DistortionMeasure,
    delta: f64,
    resolution: f64,
) -> Result<TradeoffPoint> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "grid resolution must lie in (0, 1], got {resolution}"
        )));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be finite and >= 0, got {delta}")));
    }
    let (nw, nz) = (scenario.w_alphabet().len(), scenario.z_alphabet().len());
    let count = nw * (nz - 1);
    if count > MAX_PARAMETERS {
        return Err(Error::TooManyParameters {
            count,
            limit: MAX_PARAMETERS,
        });
    }
    let n = (1.0 / resolution).round().max(1.0) as usize;
    let per_row = binomial((n + nz - 1) as u128, (nz - 1) as u128);
    let total = (0..nw).try_fold(1u128, |acc, _| acc.checked_mul(per_row));
    match total {
        Some(t) if t <= MAX_GRID_POINTS => {}
        Some(t) => return Err(Error::GridTooLarge(t)),
        None => return Err(Error::GridTooLarge(u128::MAX)),
    }

    let ev = Evaluator {
        scenario,
        privacy,
        dist,
        delta,
    };
    let rows: Vec<Vec<f64>> = compositions(n, nz)
        .into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / n as f64).collect())
        .collect();
    let mut idx = vec![0usize; nw];
    let mut q = vec![0.0; nw * nz];
    let mut best: Option<(ExtReal, Vec<f64>)> = None;
    'grid: loop {
        for (w, &i) in idx.iter().enumerate() {
            q[w * nz..(w + 1) * nz].copy_from_slice(&rows[i]);
        }
        if let Some(j) = ev.eval(&q)? {
            if best.as_ref().is_none_or(|(b, _)| j < *b) {
                best = Some((j, q.clone()));
            }
        }
        for w in (0..nw).rev() {
            idx[w] += 1;
            if idx[w] < rows.len() {
                continue 'grid;
            }
            idx[w] = 0;
        }
        break;
    }

    let Some((mut value, mut q)) = best else {
        return Ok(TradeoffPoint::infeasible(delta));
    };
    let h = 1.0 / n as f64;
    for k in 1..=6 {
        let step = h / f64::from(1u32 << k);
        let mut improved = true;
        let mut sweeps = 0;
        while improved && sweeps < 1000 {
            improved = false;
            sweeps += 1;
            for w in 0..nw {
                for a in 0..nz {
                    for b in 0..nz {
                        let moved = step.min(q[w * nz + a]);
                        if a == b || moved <= 0.0 {
                            continue;
                        }
                        let mut trial = q.clone();
                        trial[w * nz + a] -= moved;
                        trial[w * nz + b] += moved;
                        if let Some(j) = ev.eval(&trial)? {
                            if j < value {
                                value = j;
                                q = trial;
                                improved = true;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(TradeoffPoint {
        delta,
        pi: value,
        status: Status::Approximate(f64::INFINITY),
        gap: f64::INFINITY,
        mechanism: Some(Mechanism::from_dense(scenario, &q)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_count_matches_binomial() {
        for (n, parts) in [(4, 2), (5, 3), (10, 4)] {
            let c = compositions(n, parts);
            assert_eq!(c.len() as u128, binomial((n + parts - 1) as u128, (parts - 1) as u128));
            assert!(c.iter().all(|v| v.iter().sum::<usize>() == n));
        }
    }
}
