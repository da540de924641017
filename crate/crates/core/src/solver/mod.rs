//! The tradeoff problem `pi(delta) = min J(X; Z) s.t. D(P_{Y,Z}) <= delta` over release
//! channels `P_{Z|W}`.
//!
//! [`solve_point`] handles mutual information under a linear distortion, which is a
//! convex problem. [`brute_force_oracle`] handles everything else on small alphabets.

mod frank_wolfe;
mod lmo;
mod oracle;
mod projection;
mod scenario;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::measures::{DistortionMeasure, PrivacyMeasure};
use crate::probability::{Channel, Pmf};
use crate::random::dirichlet;

pub use oracle::{brute_force_oracle, MAX_GRID_POINTS, MAX_PARAMETERS};
pub use projection::{project_fd_to_op, project_inf_to_op};
pub use scenario::{evaluate, min_distortion, Mechanism, Scenario, ScenarioKind};

/// Slack on `delta` below the minimum distortion before a point is declared infeasible.
const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Status {
    Optimal,
    Approximate(f64),
    Infeasible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Approximate(_) => "approximate",
            Status::Infeasible => "infeasible",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TradeoffPoint {
    pub delta: f64,
    /// Leakage in nats; infinite exactly when infeasible.
    pub pi: ExtReal,
    pub status: Status,
    /// Certified bound on `pi - optimum`; infinite when no certificate exists.
    pub gap: f64,
    pub mechanism: Option<Mechanism>,
}

impl TradeoffPoint {
    pub fn infeasible(delta: f64) -> Self {
        TradeoffPoint {
            delta,
            pi: ExtReal::INFINITY,
            status: Status::Infeasible,
            gap: 0.0,
            mechanism: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Duality gap (nats) at which a run counts as optimal.
    pub gap_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 50_000,
            gap_tol: 1e-6,
            restarts: 8,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.restarts == 0 || self.gap_tol.is_nan() || self.gap_tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "solver options must be positive, got {self:?}"
            )));
        }
        Ok(())
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be finite and >= 0, got {delta}"
        )));
    }
    Ok(())
}

/// Minimizes `I(X; Z)` subject to a linear distortion budget.
pub fn solve_point(
    scenario: &Scenario,
    privacy: &PrivacyMeasure,
    dist: &DistortionMeasure,
    delta: f64,
    opts: &SolverOptions,
) -> Result<TradeoffPoint> {
    solve_point_from(scenario, privacy, dist, delta, opts, None)
}

/// As [`solve_point`], using `warm` as the first start when it is feasible.
pub fn solve_point_from(
    scenario: &Scenario,
    privacy: &PrivacyMeasure,
    dist: &DistortionMeasure,
    delta: f64,
    opts: &SolverOptions,
    warm: Option<&Mechanism>,
) -> Result<TradeoffPoint> {
    if *privacy != PrivacyMeasure::MutualInformation {
        return Err(Error::Unsupported(format!(
            "solve_point handles mutual information only; use brute_force_oracle for `{privacy}`"
        )));
    }
    if !dist.is_linear() {
        return Err(Error::Unsupported(format!(
            "solve_point needs a linear distortion; use brute_force_oracle for `{}`",
            dist.name()
        )));
    }
    check_delta(delta)?;
    opts.validate()?;

    let cost = scenario.cost(dist)?;
    let (nx, nw, nz) = (
        scenario.data().axis(0).len(),
        scenario.w_alphabet().len(),
        scenario.z_alphabet().len(),
    );
    let cheapest: Vec<usize> = cost
        .chunks(nz)
        .map(|r| (0..nz).min_by(|&a, &b| r[a].total_cmp(&r[b])).expect("nonempty"))
        .collect();
    let dmin: f64 = cheapest.iter().enumerate().map(|(w, &z)| cost[w * nz + z]).sum();
    if delta < dmin - FEASIBILITY_TOL {
        return Ok(TradeoffPoint::infeasible(delta));
    }
    let budget = delta.max(dmin);

    // A constant release is independent of X; if one fits the budget, pi = 0.
    let (best_z, const_cost) = (0..nz)
        .map(|z| (z, (0..nw).map(|w| cost[w * nz + z]).sum::<f64>()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty release alphabet");
    if const_cost <= budget {
        let q = Pmf::point_mass(scenario.z_alphabet().clone(), best_z);
        let mech = Mechanism::new(scenario, Channel::constant(scenario.w_alphabet().clone(), &q))?;
        return Ok(TradeoffPoint {
            delta,
            pi: ExtReal::ZERO,
            status: Status::Optimal,
            gap: 0.0,
            mechanism: Some(mech),
        });
    }

    let problem = frank_wolfe::Problem {
        p_xw: scenario.p_xw(),
        cost: &cost,
        nx,
        nw,
        nz,
        budget,
    };
    let mut min_vertex = vec![0.0; nw * nz];
    for (w, &z) in cheapest.iter().enumerate() {
        min_vertex[w * nz + z] = 1.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<frank_wolfe::Run> = None;
    let mut lower = f64::NEG_INFINITY;
    for r in 0..opts.restarts {
        let start = match warm {
            Some(m) if r == 0 && problem.cost_of(&m.dense()) <= budget => vec![(m.dense(), 1.0)],
            _ => {
                let q: Vec<f64> = (0..nw).flat_map(|_| dirichlet(&mut rng, nz)).collect();
                let cq = problem.cost_of(&q);
                if cq <= budget {
                    vec![(q, 1.0)]
                } else {
                    // One atom: away steps must not lead back toward the infeasible draw.
                    let theta = (cq - budget) / (cq - dmin);
                    let mixed = min_vertex.iter().zip(&q).map(|(m, v)| theta * m + (1.0 - theta) * v).collect();
                    vec![(mixed, 1.0)]
                }
            }
        };
        let run = problem.run(start, opts.max_iters, opts.gap_tol);
        lower = lower.max(run.value - run.gap);
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let run = best.expect("at least one restart");
    let gap = (run.value - lower).max(0.0);
    Ok(TradeoffPoint {
        delta,
        pi: ExtReal::finite(run.value),
        status: if gap <= opts.gap_tol {
            Status::Optimal
        } else {
            Status::Approximate(gap)
        },
        gap,
        mechanism: Some(Mechanism::from_dense(scenario, &run.q)),
    })
}

/// Points of a tradeoff curve plus notes about post-hoc monotonicity repairs.
#[derive(Clone, Debug, PartialEq)]
pub struct TradeoffCurve {
    pub points: Vec<TradeoffPoint>,
    pub warnings: Vec<String>,
}

fn check_grid(deltas: &[f64]) -> Result<()> {
    for &d in deltas {
        check_delta(d)?;
    }
    if deltas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("delta grid must be sorted ascending".into()));
    }
    Ok(())
}

/// Replaces a value that rose above its predecessor with the predecessor's solution,
/// which stays feasible at the larger budget.
fn enforce_monotone(curve: &mut TradeoffCurve, mut point: TradeoffPoint, tol: f64) {
    if let Some(prev) = curve.points.last() {
        if point.pi > prev.pi {
            let excess = point.pi.margin_over(prev.pi);
            if excess > tol {
                curve.warnings.push(format!(
                    "pi rose by {excess:.3e} nats from delta {} to {}; kept the smaller value",
                    prev.delta, point.delta
                ));
            }
            point = TradeoffPoint {
                delta: point.delta,
                ..prev.clone()
            };
        }
    }
    curve.points.push(point);
}

/// Solves every grid point, warm-starting each from its predecessor's mechanism.
pub fn tradeoff_curve(
    scenario: &Scenario,
    privacy: &PrivacyMeasure,
    dist: &DistortionMeasure,
    deltas: &[f64],
    opts: &SolverOptions,
) -> Result<TradeoffCurve> {
    check_grid(deltas)?;
    let mut curve = TradeoffCurve {
        points: Vec::with_capacity(deltas.len()),
        warnings: Vec::new(),
    };
    let mut warm: Option<Mechanism> = None;
    for &delta in deltas {
        let point = solve_point_from(scenario, privacy, dist, delta, opts, warm.as_ref())?;
        if point.mechanism.is_some() {
            warm.clone_from(&point.mechanism);
        }
        enforce_monotone(&mut curve, point, opts.gap_tol);
    }
    Ok(curve)
}

/// [`brute_force_oracle`] at every grid point.
pub fn tradeoff_curve_oracle(
    scenario: &Scenario,
    privacy: &PrivacyMeasure,
    dist: &DistortionMeasure,
    deltas: &[f64],
    resolution: f64,
) -> Result<TradeoffCurve> {
    check_grid(deltas)?;
    let mut curve = TradeoffCurve {
        points: Vec::with_capacity(deltas.len()),
        warnings: Vec::new(),
    };
    for &delta in deltas {
        let point = brute_force_oracle(scenario, privacy, dist, delta, resolution)?;
        enforce_monotone(&mut curve, point, 0.0);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{Alphabet, JointPmf};

    fn sp2() -> JointPmf {
        JointPmf::from_rows(
            Alphabet::indexed(2),
            Alphabet::indexed(2),
            &[vec![0.375, 0.125], vec![0.125, 0.375]],
        )
        .unwrap()
    }

    fn h2(t: f64) -> f64 {
        -t * t.ln() - (1.0 - t) * (1.0 - t).ln()
    }

    const MI: PrivacyMeasure = PrivacyMeasure::MutualInformation;
    const PE: DistortionMeasure = DistortionMeasure::ProbabilityOfError;

    #[test]
    fn output_perturbation_point() {
        let s = Scenario::new(sp2(), ScenarioKind::OutputPerturbation).unwrap();
        let p = solve_point(&s, &MI, &PE, 0.1, &SolverOptions::default()).unwrap();
        assert_eq!(p.status, Status::Optimal);
        assert!((p.pi.value() - (2f64.ln() - h2(0.3))).abs() < 1e-6);
        let (j, d) = evaluate(&s, p.mechanism.as_ref().unwrap(), &MI, &PE).unwrap();
        assert!((j.value() - p.pi.value()).abs() < 1e-12);
        assert!(d <= 0.1 + 1e-9);
    }

    #[test]
    fn infeasible_below_min_distortion() {
        let s = Scenario::new(sp2(), ScenarioKind::Inference).unwrap();
        let p = solve_point(&s, &MI, &PE, 0.2, &SolverOptions::default()).unwrap();
        assert_eq!(p.status, Status::Infeasible);
        assert!(p.pi.is_infinite());
        assert!(p.mechanism.is_none());
    }

    #[test]
    fn large_budget_gives_perfect_privacy() {
        let s = Scenario::new(sp2(), ScenarioKind::FullData).unwrap();
        let p = solve_point(&s, &MI, &PE, 0.5, &SolverOptions::default()).unwrap();
        assert_eq!(p.pi, ExtReal::ZERO);
        assert_eq!(p.status, Status::Optimal);
    }

    #[test]
    fn non_convex_combinations_are_rejected() {
        let s = Scenario::new(sp2(), ScenarioKind::FullData).unwrap();
        let opts = SolverOptions::default();
        assert!(solve_point(&s, &PrivacyMeasure::InformationPrivacy, &PE, 0.1, &opts).is_err());
        assert!(solve_point(&s, &MI, &DistortionMeasure::ConditionalEntropy, 0.1, &opts).is_err());
    }

    #[test]
    fn curve_is_nonincreasing_and_checks_grid() {
        let s = Scenario::new(sp2(), ScenarioKind::OutputPerturbation).unwrap();
        let opts = SolverOptions::default();
        let deltas: Vec<f64> = (0..=10).map(|k| k as f64 / 20.0).collect();
        let curve = tradeoff_curve(&s, &MI, &PE, &deltas, &opts).unwrap();
        for w in curve.points.windows(2) {
            assert!(w[1].pi <= w[0].pi);
        }
        assert!(tradeoff_curve(&s, &MI, &PE, &[0.2, 0.1], &opts).is_err());
    }

    #[test]
    fn oracle_agrees_with_solver_on_small_instance() {
        let s = Scenario::new(sp2(), ScenarioKind::OutputPerturbation).unwrap();
        let solved = solve_point(&s, &MI, &PE, 0.1, &SolverOptions::default()).unwrap();
        let grid = brute_force_oracle(&s, &MI, &PE, 0.1, 1.0 / 200.0).unwrap();
        assert!(grid.pi >= solved.pi);
        assert!(grid.pi.value() - solved.pi.value() < 2e-3 * std::f64::consts::LN_2);
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let j = JointPmf::from_rows(
            Alphabet::indexed(3),
            Alphabet::indexed(3),
            &[vec![1.0 / 9.0; 3], vec![1.0 / 9.0; 3], vec![1.0 / 9.0; 3]],
        )
        .unwrap();
        let s = Scenario::new(j, ScenarioKind::FullData).unwrap();
        assert!(matches!(
            brute_force_oracle(&s, &MI, &PE, 0.1, 0.1),
            Err(Error::TooManyParameters { .. })
        ));
    }
}
