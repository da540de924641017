//! The symmetric pair `SP(m, p)`: `X` uniform on `m` symbols and `Y = X + N mod m`
//! with `Pr(N != 0) = p` spread evenly over the nonzero shifts.
//!
//! For mutual-information leakage and probability-of-error distortion the tradeoff
//! frontier has a closed form in all three observation scenarios. Each closed form
//! comes with a mechanism achieving it, so the formulas can be checked by evaluation.

use std::fmt;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::measures::{distortion, DistortionMeasure};
use crate::probability::{Alphabet, Channel, JointPmf};
use crate::solver::{Mechanism, Scenario, ScenarioKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SPParams {
    pub m: usize,
    pub p: f64,
}

impl SPParams {
    pub fn new(m: usize, p: f64) -> Result<Self> {
        let params = SPParams { m, p };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidParameter(format!("m must be at least 2, got {}", self.m)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {}", self.p)));
        }
        Ok(())
    }

    fn mf(&self) -> f64 {
        self.m as f64
    }

    /// `1 - 1/m`, the error probability of a release independent of the data.
    pub fn blind_error(&self) -> f64 {
        1.0 - 1.0 / self.mf()
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::indexed(self.m)
    }
}

/// Which case of a closed form produced the value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Full data, `p <= 1 - 1/m`: noise is added to `Y` when `X = Y`.
    FdAddNoise,
    /// Full data, `p > 1 - 1/m`: `Y` is pulled toward `X` when they differ.
    FdRemoveNoise,
    /// Output perturbation with the `m`-ary symmetric channel on `Y`.
    OpNoise,
    /// Inference with the `m`-ary symmetric channel on `X`.
    InfTestChannel,
    /// No mechanism observing only `X` meets the budget.
    Infeasible,
    /// The budget admits a release independent of the data.
    PerfectPrivacy,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::FdAddNoise => "fd-add-noise",
            Branch::FdRemoveNoise => "fd-remove-noise",
            Branch::OpNoise => "op-noise",
            Branch::InfTestChannel => "inf-test-channel",
            Branch::Infeasible => "infeasible",
            Branch::PerfectPrivacy => "perfect-privacy",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormResult {
    /// Nats.
    pub value: ExtReal,
    pub branch: Branch,
}

/// Binary entropy in nats.
pub fn h2(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// `ln m - p ln(m - 1) - h2(p)`, the mutual information of `SP(m, p)`.
pub fn r_m(params: SPParams) -> f64 {
    let m = params.mf();
    (m.ln() - params.p * (m - 1.0).ln() - h2(params.p)).max(0.0)
}

fn r(m: usize, p: f64) -> f64 {
    r_m(SPParams { m, p: p.clamp(0.0, 1.0) })
}

pub fn sp_joint(params: SPParams) -> Result<JointPmf> {
    params.validate()?;
    let m = params.m;
    let mf = params.mf();
    let (on, off) = ((1.0 - params.p) / mf, params.p / (mf * (mf - 1.0)));
    let probs = (0..m * m)
        .map(|i| if i / m == i % m { on } else { off })
        .collect();
    JointPmf::new(vec![params.alphabet(), params.alphabet()], probs)
}

/// The `m`-ary symmetric channel: keep the symbol with probability `1 - t`, otherwise
/// move to each other symbol with probability `t / (m - 1)`.
pub fn symmetric_channel(m: usize, t: f64) -> Channel {
    let off = t / (m as f64 - 1.0);
    let rows = (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 - t } else { off }).collect())
        .collect();
    Channel::from_rows_unchecked(Alphabet::indexed(m), Alphabet::indexed(m), rows)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be finite and >= 0, got {delta}")));
    }
    Ok(())
}

/// Full-data frontier: `r_m(p + delta)` while `delta <= 1 - 1/m - p`, `r_m(p - delta)`
/// while `delta <= p - (1 - 1/m)`, and 0 beyond.
pub fn pi_fd_closed(params: SPParams, delta: f64) -> Result<ClosedFormResult> {
    params.validate()?;
    check_delta(delta)?;
    let (p, e) = (params.p, params.blind_error());
    Ok(if p <= e && delta <= e - p {
        ClosedFormResult {
            value: ExtReal::finite(r(params.m, p + delta)),
            branch: Branch::FdAddNoise,
        }
    } else if p > e && delta <= p - e {
        ClosedFormResult {
            value: ExtReal::finite(r(params.m, p - delta)),
            branch: Branch::FdRemoveNoise,
        }
    } else {
        ClosedFormResult {
            value: ExtReal::ZERO,
            branch: Branch::PerfectPrivacy,
        }
    })
}

/// A full-data mechanism `P_{Z|X,Y}` achieving [`pi_fd_closed`].
pub fn fd_optimal_mechanism(params: SPParams, delta: f64) -> Result<Channel> {
    params.validate()?;
    check_delta(delta)?;
    let (m, p, e) = (params.m, params.p, params.blind_error());
    let mf = params.mf();
    let mut rows = Vec::with_capacity(m * m);
    if p <= e {
        let t = (e - p).min(delta);
        // Only rows with x = y are randomized; there Z = Y + N with Pr(N != 0) = t / (1 - p).
        let flip = t / (1.0 - p);
        for x in 0..m {
            for y in 0..m {
                let row = if x == y {
                    (0..m)
                        .map(|z| if z == y { 1.0 - flip } else { flip / (mf - 1.0) })
                        .collect()
                } else {
                    unit(m, y)
                };
                rows.push(row);
            }
        }
    } else {
        let t = (p - delta).max(e);
        // When x != y, keep Y with probability t / p and release X otherwise.
        let keep = t / p;
        for x in 0..m {
            for y in 0..m {
                let row = if x == y {
                    unit(m, x)
                } else {
                    let mut r = vec![0.0; m];
                    r[y] = keep;
                    r[x] = 1.0 - keep;
                    r
                };
                rows.push(row);
            }
        }
    }
    Ok(Channel::from_rows_unchecked(
        Alphabet::product(&params.alphabet(), &params.alphabet()),
        params.alphabet(),
        rows,
    ))
}

fn unit(m: usize, i: usize) -> Vec<f64> {
    let mut r = vec![0.0; m];
    r[i] = 1.0;
    r
}

/// Output-perturbation frontier: `r_m(p + delta (1 - p m / (m - 1)))` for `delta < 1 - 1/m`,
/// and 0 beyond.
pub fn pi_op_closed(params: SPParams, delta: f64) -> Result<ClosedFormResult> {
    params.validate()?;
    check_delta(delta)?;
    let (p, e, mf) = (params.p, params.blind_error(), params.mf());
    Ok(if delta < e {
        ClosedFormResult {
            value: ExtReal::finite(r(params.m, p + delta * (1.0 - p * mf / (mf - 1.0)))),
            branch: Branch::OpNoise,
        }
    } else {
        ClosedFormResult {
            value: ExtReal::ZERO,
            branch: Branch::PerfectPrivacy,
        }
    })
}

/// `P_{Z|Y}`: the symmetric channel with `t = min(delta, 1 - 1/m)`. It does not depend on `p`.
pub fn op_optimal_mechanism(params: SPParams, delta: f64) -> Result<Channel> {
    params.validate()?;
    check_delta(delta)?;
    Ok(symmetric_channel(params.m, delta.min(params.blind_error())))
}

/// Inference frontier. With `h = (m - 1)(1 - delta)` and `delta < 1 - 1/m`, the value is
/// infinite for `p` in the open interval `(delta, h)`, and otherwise `r_m(t)` with
/// `t = (delta - p) / (1 - p m / (m - 1))`. For `delta >= 1 - 1/m` it is 0.
///
/// `p = 1 - 1/m` is also infeasible (X and Y are then independent), but it already
/// lies in `(delta, h)` whenever `delta < 1 - 1/m`.
pub fn pi_inf_closed(params: SPParams, delta: f64) -> Result<ClosedFormResult> {
    params.validate()?;
    check_delta(delta)?;
    Ok(match inf_noise(params, delta) {
        InfCase::Perfect => ClosedFormResult {
            value: ExtReal::ZERO,
            branch: Branch::PerfectPrivacy,
        },
        InfCase::Infeasible => ClosedFormResult {
            value: ExtReal::INFINITY,
            branch: Branch::Infeasible,
        },
        InfCase::Noise(t) => ClosedFormResult {
            value: ExtReal::finite(r(params.m, t)),
            branch: Branch::InfTestChannel,
        },
    })
}

enum InfCase {
    Perfect,
    Infeasible,
    Noise(f64),
}

fn inf_noise(params: SPParams, delta: f64) -> InfCase {
    let (p, e, mf) = (params.p, params.blind_error(), params.mf());
    if delta >= e {
        return InfCase::Perfect;
    }
    let h = (mf - 1.0) * (1.0 - delta);
    if p > delta && p < h {
        return InfCase::Infeasible;
    }
    let t = (delta - p) / (1.0 - p * mf / (mf - 1.0));
    InfCase::Noise(t.clamp(0.0, 1.0))
}

/// `P_{Z|X}` achieving [`pi_inf_closed`], or `None` where the frontier is infinite.
pub fn inf_optimal_mechanism(params: SPParams, delta: f64) -> Result<Option<Channel>> {
    params.validate()?;
    check_delta(delta)?;
    Ok(match inf_noise(params, delta) {
        InfCase::Perfect => Some(symmetric_channel(params.m, params.blind_error())),
        InfCase::Infeasible => None,
        InfCase::Noise(t) => Some(symmetric_channel(params.m, t)),
    })
}

/// Closed-form frontier for one of the three standard scenarios.
pub fn pi_closed(kind: &ScenarioKind, params: SPParams, delta: f64) -> Result<ClosedFormResult> {
    match kind {
        ScenarioKind::FullData => pi_fd_closed(params, delta),
        ScenarioKind::OutputPerturbation => pi_op_closed(params, delta),
        ScenarioKind::Inference => pi_inf_closed(params, delta),
        ScenarioKind::Custom(_) => Err(Error::Unsupported(
            "closed forms exist only for fd, op and inf".into(),
        )),
    }
}

/// `g(eps) = r_m(eps)` for `eps <= 1 - 1/m`, else 0. Nonincreasing.
pub fn fano_g(m: usize, eps: f64) -> Result<f64> {
    SPParams::new(m, 0.0)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be finite and >= 0, got {eps}")));
    }
    let e = 1.0 - 1.0 / m as f64;
    Ok(if eps <= e { r(m, eps) } else { 0.0 })
}

/// `g*(eps) = r_m(eps)` for `eps >= 1 - 1/m`, else 0. Nondecreasing on `[1 - 1/m, 1]`.
pub fn fano_g_star(m: usize, eps: f64) -> Result<f64> {
    SPParams::new(m, eps)?;
    let e = 1.0 - 1.0 / m as f64;
    Ok(if eps >= e { r(m, eps) } else { 0.0 })
}

fn error_probabilities(scenario: &Scenario, mech: Channel) -> Result<(f64, f64)> {
    let mech = Mechanism::new(scenario, mech)?;
    let xyz = scenario.joint_xyz(&mech)?;
    let pe = DistortionMeasure::ProbabilityOfError;
    Ok((
        distortion(&pe, &xyz.marginal(&[1, 2])?)?,
        distortion(&pe, &xyz.marginal(&[0, 2])?)?,
    ))
}

/// For a full-data mechanism on `SP(m, p)`: `Pr(Y != Z) - Pr(X != Z)` measured, and
/// `p / (m (m-1)) sum_{x != y} [P(x | x, y) - P(y | x, y)]` predicted.
pub fn error_relation_check(params: SPParams, mech_fd: &Channel) -> Result<(f64, f64)> {
    let scenario = Scenario::new(sp_joint(params)?, ScenarioKind::FullData)?;
    let (pe_y, pe_x) = error_probabilities(&scenario, mech_fd.clone())?;
    let (m, mf) = (params.m, params.mf());
    let mut sum = 0.0;
    for x in 0..m {
        for y in (0..m).filter(|&y| y != x) {
            let row = mech_fd
                .row(x * m + y)
                .ok_or_else(|| Error::MissingRow(mech_fd.input().label(x * m + y).to_string()))?;
            sum += row[x] - row[y];
        }
    }
    Ok((pe_y - pe_x, params.p / (mf * (mf - 1.0)) * sum))
}

/// For an inference mechanism `P_{Z|X}` on `SP(m, p)`: `Pr(Y != Z)` measured, and
/// `p + Pr(X != Z)(1 - p m / (m - 1))` predicted.
pub fn markov_error_relation(params: SPParams, mech: &Channel) -> Result<(f64, f64)> {
    let scenario = Scenario::new(sp_joint(params)?, ScenarioKind::Inference)?;
    let (pe_y, pe_x) = error_probabilities(&scenario, mech.clone())?;
    let mf = params.mf();
    Ok((pe_y, params.p + pe_x * (1.0 - params.p * mf / (mf - 1.0))))
}
