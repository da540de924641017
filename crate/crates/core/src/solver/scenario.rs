use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::measures::{distortion, leakage, DistortionMeasure, PrivacyMeasure};
use crate::probability::{push_mechanism, Alphabet, Channel, JointPmf};

/// What the mechanism is allowed to observe.
#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioKind {
    /// `W = (X, Y)`.
    FullData,
    /// `W = Y`.
    OutputPerturbation,
    /// `W = X`.
    Inference,
    /// An arbitrary `P_{W|X,Y}` over inputs `X x Y`.
    Custom(Channel),
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::FullData => "fd",
            ScenarioKind::OutputPerturbation => "op",
            ScenarioKind::Inference => "inf",
            ScenarioKind::Custom(_) => "custom",
        }
    }
}

/// A data model `P_{X,Y}` with an observation constraint and a release alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    data: JointPmf,
    kind: ScenarioKind,
    z_alphabet: Alphabet,
    obs: Channel,
    /// `P_{X,W}` row-major, `|X| x |W|`.
    p_xw: Vec<f64>,
    /// `P_{Y,W}` row-major, `|Y| x |W|`.
    p_yw: Vec<f64>,
}

impl Scenario {
    /// Scenario whose release alphabet copies the useful-data alphabet.
    pub fn new(data: JointPmf, kind: ScenarioKind) -> Result<Self> {
        if data.arity() != 2 {
            return Err(Error::UnsupportedArity(data.arity()));
        }
        let z = data.axis(1).clone();
        Self::with_z_alphabet(data, kind, z)
    }

    pub fn with_z_alphabet(data: JointPmf, kind: ScenarioKind, z_alphabet: Alphabet) -> Result<Self> {
        if data.arity() != 2 {
            return Err(Error::UnsupportedArity(data.arity()));
        }
        let (x, y) = (data.axis(0).clone(), data.axis(1).clone());
        let xy = Alphabet::product(&x, &y);
        let ny = y.len();
        let obs = match &kind {
            ScenarioKind::FullData => Channel::identity(xy),
            ScenarioKind::OutputPerturbation => Channel::deterministic(xy, y, |i| i % ny),
            ScenarioKind::Inference => Channel::deterministic(xy, x.clone(), |i| i / ny),
            ScenarioKind::Custom(c) => {
                if c.input().len() != xy.len() {
                    return Err(Error::AlphabetMismatch(format!(
                        "observation channel has {} inputs, expected |X||Y| = {}",
                        c.input().len(),
                        xy.len()
                    )));
                }
                c.clone()
            }
        };
        let (nx, nw) = (data.axis(0).len(), obs.output().len());
        let mut p_xw = vec![0.0; nx * nw];
        let mut p_yw = vec![0.0; ny * nw];
        for xi in 0..nx {
            for yi in 0..ny {
                let p = data.get2(xi, yi);
                if p == 0.0 {
                    continue;
                }
                let row = obs
                    .row(xi * ny + yi)
                    .ok_or_else(|| Error::MissingRow(obs.input().label(xi * ny + yi).to_string()))?;
                for (w, &q) in row.iter().enumerate() {
                    p_xw[xi * nw + w] += p * q;
                    p_yw[yi * nw + w] += p * q;
                }
            }
        }
        Ok(Scenario {
            data,
            kind,
            z_alphabet,
            obs,
            p_xw,
            p_yw,
        })
    }

    pub fn data(&self) -> &JointPmf {
        &self.data
    }

    pub fn kind(&self) -> &ScenarioKind {
        &self.kind
    }

    pub fn z_alphabet(&self) -> &Alphabet {
        &self.z_alphabet
    }

    pub fn observation(&self) -> &Channel {
        &self.obs
    }

    pub fn w_alphabet(&self) -> &Alphabet {
        self.obs.output()
    }

    pub(crate) fn p_xw(&self) -> &[f64] {
        &self.p_xw
    }

    /// `c(w, z) = sum_y d(y, z) P_{Y,W}(y, w)` for a linear distortion, row-major `|W| x |Z|`.
    pub(crate) fn cost(&self, d: &DistortionMeasure) -> Result<Vec<f64>> {
        let dm = d.cost_matrix(self.data.axis(1), &self.z_alphabet)?;
        let (nw, nz) = (self.w_alphabet().len(), self.z_alphabet.len());
        let mut c = vec![0.0; nw * nz];
        for (d_y, p_y) in dm.iter().zip(self.p_yw.chunks(nw)) {
            for (w, &p) in p_y.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (z, &d) in d_y.iter().enumerate() {
                    c[w * nz + z] += d * p;
                }
            }
        }
        Ok(c)
    }

    /// `P_{X,Y,Z}` induced by a mechanism on `W`.
    pub fn joint_xyz(&self, mech: &Mechanism) -> Result<JointPmf> {
        push_mechanism(&self.data, &self.obs, &mech.channel)
    }
}

/// A release channel `P_{Z|W}` bound to a scenario's observation alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    channel: Channel,
}

impl Mechanism {
    pub fn new(scenario: &Scenario, channel: Channel) -> Result<Self> {
        if channel.input() != scenario.w_alphabet() {
            return Err(Error::AlphabetMismatch(format!(
                "mechanism input {} differs from observation alphabet {}",
                channel.input(),
                scenario.w_alphabet()
            )));
        }
        if channel.output() != scenario.z_alphabet() {
            return Err(Error::AlphabetMismatch(format!(
                "mechanism output {} differs from release alphabet {}",
                channel.output(),
                scenario.z_alphabet()
            )));
        }
        if let Some(i) = channel.rows().iter().position(Option::is_none) {
            return Err(Error::MissingRow(channel.input().label(i).to_string()));
        }
        Ok(Mechanism { channel })
    }

    pub(crate) fn from_dense(scenario: &Scenario, q: &[f64]) -> Self {
        let nz = scenario.z_alphabet().len();
        let rows = q
            .chunks(nz)
            .map(|r| {
                let s: f64 = r.iter().map(|v| v.max(0.0)).sum();
                r.iter().map(|v| v.max(0.0) / s).collect()
            })
            .collect();
        Mechanism {
            channel: Channel::from_rows_unchecked(
                scenario.w_alphabet().clone(),
                scenario.z_alphabet().clone(),
                rows,
            ),
        }
    }

    pub(crate) fn dense(&self) -> Vec<f64> {
        self.channel.rows().iter().flatten().flatten().copied().collect()
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn into_channel(self) -> Channel {
        self.channel
    }
}

/// `(J(X; Z), D(P_{Y,Z}))` for the joint induced by `mech`.
pub fn evaluate(
    scenario: &Scenario,
    mech: &Mechanism,
    privacy: &PrivacyMeasure,
    dist: &DistortionMeasure,
) -> Result<(ExtReal, f64)> {
    let xyz = scenario.joint_xyz(mech)?;
    let j = match privacy {
        // Differential privacy depends on the channel, not on the prior over unseen inputs.
        PrivacyMeasure::DifferentialPrivacy(adj) => {
            let rel = adj.resolve(scenario.data().axis(0))?;
            let z_given_x = scenario.data().condition(0)?.then(&scenario.obs)?.then(&mech.channel)?;
            crate::measures::differential_privacy(&z_given_x, &rel)?
        }
        _ => leakage(privacy, &xyz.marginal(&[0, 2])?)?,
    };
    let d = distortion(dist, &xyz.marginal(&[1, 2])?)?;
    Ok((j, d))
}

/// Smallest achievable value of a linear distortion: `sum_w min_z c(w, z)`.
pub fn min_distortion(scenario: &Scenario, dist: &DistortionMeasure) -> Result<f64> {
    if !dist.is_linear() {
        return Err(Error::Unsupported(format!(
            "min_distortion needs a linear distortion, got `{}`",
            dist.name()
        )));
    }
    let c = scenario.cost(dist)?;
    let nz = scenario.z_alphabet().len();
    Ok(c.chunks(nz)
        .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{mutual_information, Pmf};

    fn sp2() -> JointPmf {
        JointPmf::from_rows(
            Alphabet::indexed(2),
            Alphabet::indexed(2),
            &[vec![0.375, 0.125], vec![0.125, 0.375]],
        )
        .unwrap()
    }

    #[test]
    fn observation_alphabets() {
        let fd = Scenario::new(sp2(), ScenarioKind::FullData).unwrap();
        assert_eq!(fd.w_alphabet().labels(), &["(0,0)", "(0,1)", "(1,0)", "(1,1)"]);
        let op = Scenario::new(sp2(), ScenarioKind::OutputPerturbation).unwrap();
        assert_eq!(op.w_alphabet(), &Alphabet::indexed(2));
        let inf = Scenario::new(sp2(), ScenarioKind::Inference).unwrap();
        assert_eq!(inf.p_xw(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn identity_release_of_y_leaks_i_xy() {
        let s = Scenario::new(sp2(), ScenarioKind::OutputPerturbation).unwrap();
        let m = Mechanism::new(&s, Channel::identity(Alphabet::indexed(2))).unwrap();
        let (j, d) = evaluate(
            &s,
            &m,
            &PrivacyMeasure::MutualInformation,
            &DistortionMeasure::ProbabilityOfError,
        )
        .unwrap();
        assert!((j.value() - mutual_information(&sp2())).abs() < 1e-15);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn constant_release_leaks_nothing() {
        let s = Scenario::new(sp2(), ScenarioKind::FullData).unwrap();
        let q = Pmf::new(Alphabet::indexed(2), vec![0.3, 0.7]).unwrap();
        let m = Mechanism::new(&s, Channel::constant(s.w_alphabet().clone(), &q)).unwrap();
        let (j, d) = evaluate(
            &s,
            &m,
            &PrivacyMeasure::MutualInformation,
            &DistortionMeasure::ProbabilityOfError,
        )
        .unwrap();
        assert!(j.value() < 1e-15);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn min_distortion_by_scenario() {
        let pe = DistortionMeasure::ProbabilityOfError;
        for kind in [ScenarioKind::FullData, ScenarioKind::OutputPerturbation] {
            let s = Scenario::new(sp2(), kind).unwrap();
            assert_eq!(min_distortion(&s, &pe).unwrap(), 0.0);
        }
        let s = Scenario::new(sp2(), ScenarioKind::Inference).unwrap();
        assert!((min_distortion(&s, &pe).unwrap() - 0.25).abs() < 1e-15);
        assert!(min_distortion(&s, &DistortionMeasure::ConditionalEntropy).is_err());
    }

    #[test]
    fn mechanism_alphabet_is_checked() {
        let s = Scenario::new(sp2(), ScenarioKind::FullData).unwrap();
        assert!(Mechanism::new(&s, Channel::identity(Alphabet::indexed(2))).is_err());
    }
}
