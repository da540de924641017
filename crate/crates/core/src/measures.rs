//! Privacy-leakage functionals `J(X; Z)` and distortion functionals `D(P_{Y,Z})`.
//!
//! Every functional takes a two-axis joint whose first axis is the sensitive
//! (resp. useful) variable and whose second axis is the release. Differential
//! privacy is prior-free, so it is defined on a [`Channel`] and the joint
//! wrapper conditions on the first axis.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::probability::{
    conditional_entropy, entropy, mutual_information, Alphabet, Channel, JointPmf, Tolerances,
};

/// Symmetric, irreflexive relation over the indices of an alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjacencyRelation {
    size: usize,
    pairs: Vec<(usize, usize)>,
}

impl AdjacencyRelation {
    /// Pairs are unordered; duplicates and reversed duplicates collapse.
    pub fn new(size: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for (a, b) in pairs {
            if a >= size || b >= size {
                return Err(Error::InvalidParameter(format!(
                    "adjacency pair ({a}, {b}) out of range for alphabet of size {size}"
                )));
            }
            if a == b {
                return Err(Error::InvalidParameter(format!(
                    "adjacency must be irreflexive, got ({a}, {a})"
                )));
            }
            let p = (a.min(b), a.max(b));
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out.sort_unstable();
        Ok(AdjacencyRelation { size, pairs: out })
    }

    /// Hamming-distance-one pairs over labels that are equal-length bit strings.
    pub fn hamming(alphabet: &Alphabet) -> Result<Self> {
        let labels = alphabet.labels();
        let width = labels[0].len();
        let is_bits = |l: &String| l.len() == width && l.bytes().all(|c| c == b'0' || c == b'1');
        if width == 0 || !labels.iter().all(is_bits) {
            return Err(Error::InvalidParameter(
                "default adjacency needs equal-length bit-string labels; supply pairs explicitly".into(),
            ));
        }
        let mut pairs = Vec::new();
        for i in 0..labels.len() {
            for j in i + 1..labels.len() {
                let diff = labels[i]
                    .bytes()
                    .zip(labels[j].bytes())
                    .filter(|(a, b)| a != b)
                    .count();
                if diff == 1 {
                    pairs.push((i, j));
                }
            }
        }
        AdjacencyRelation::new(labels.len(), pairs)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs.contains(&(a.min(b), a.max(b)))
    }

    /// The relation carried along a relabeling where new index `i` is old index `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        crate::probability::check_permutation(perm, self.size)?;
        let mut inverse = vec![0; self.size];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        AdjacencyRelation::new(
            self.size,
            self.pairs.iter().map(|&(a, b)| (inverse[a], inverse[b])),
        )
    }
}

/// Which pairs of inputs differential privacy compares.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Adjacency {
    /// Hamming distance one over bit-string labels, derived from whatever alphabet is measured.
    Hamming,
    Explicit(AdjacencyRelation),
}

impl Adjacency {
    pub fn resolve(&self, alphabet: &Alphabet) -> Result<AdjacencyRelation> {
        match self {
            Adjacency::Hamming => AdjacencyRelation::hamming(alphabet),
            Adjacency::Explicit(rel) if rel.size() == alphabet.len() => Ok(rel.clone()),
            Adjacency::Explicit(rel) => Err(Error::AlphabetMismatch(format!(
                "adjacency over {} symbols applied to alphabet of {}",
                rel.size(),
                alphabet.len()
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrivacyMeasure {
    MutualInformation,
    MaximalInformationLeakage,
    SibsonInfinity,
    InformationPrivacy,
    DifferentialPrivacy(Adjacency),
}

impl PrivacyMeasure {
    pub fn name(&self) -> &'static str {
        match self {
            PrivacyMeasure::MutualInformation => "mi",
            PrivacyMeasure::MaximalInformationLeakage => "max-info",
            PrivacyMeasure::SibsonInfinity => "sibson",
            PrivacyMeasure::InformationPrivacy => "ip",
            PrivacyMeasure::DifferentialPrivacy(_) => "dp",
        }
    }
}

impl fmt::Display for PrivacyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PrivacyMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mi" => PrivacyMeasure::MutualInformation,
            "max-info" | "maxinfo" => PrivacyMeasure::MaximalInformationLeakage,
            "sibson" | "maxleak" => PrivacyMeasure::SibsonInfinity,
            "ip" => PrivacyMeasure::InformationPrivacy,
            "dp" => PrivacyMeasure::DifferentialPrivacy(Adjacency::Hamming),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown privacy measure `{other}` (expected mi, max-info, sibson, ip or dp)"
                )))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DistortionMeasure {
    /// `E[d(Y, Z)]` for a nonnegative `|Y| x |Z|` matrix.
    ExpectedDistortion(Vec<Vec<f64>>),
    /// `Pr(Y != Z)`, matching symbols by label.
    ProbabilityOfError,
    /// `H(Y | Z)`.
    ConditionalEntropy,
    /// 1 when the `(Y, Z)` joint is within `tol` (max-abs) of `target`, 2 otherwise.
    WitnessIndicator { target: JointPmf, tol: f64 },
}

impl DistortionMeasure {
    pub const WITNESS_TOL: f64 = 1e-6;

    pub fn witness(target: JointPmf) -> Self {
        DistortionMeasure::WitnessIndicator {
            target,
            tol: Self::WITNESS_TOL,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(
            self,
            DistortionMeasure::ExpectedDistortion(_) | DistortionMeasure::ProbabilityOfError
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistortionMeasure::ExpectedDistortion(_) => "expected",
            DistortionMeasure::ProbabilityOfError => "prob-error",
            DistortionMeasure::ConditionalEntropy => "cond-entropy",
            DistortionMeasure::WitnessIndicator { .. } => "witness",
        }
    }

    /// The per-symbol cost `d(y, z)` of a linear measure.
    pub fn cost_matrix(&self, y: &Alphabet, z: &Alphabet) -> Result<Vec<Vec<f64>>> {
        match self {
            DistortionMeasure::ExpectedDistortion(d) => {
                if d.len() != y.len() || d.iter().any(|r| r.len() != z.len()) {
                    return Err(Error::AlphabetMismatch(format!(
                        "distortion matrix is not {} x {}",
                        y.len(),
                        z.len()
                    )));
                }
                if d.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidParameter(
                        "distortion entries must be finite and nonnegative".into(),
                    ));
                }
                Ok(d.clone())
            }
            DistortionMeasure::ProbabilityOfError => {
                check_same_labels(y, z)?;
                Ok(y.labels()
                    .iter()
                    .map(|ly| {
                        z.labels()
                            .iter()
                            .map(|lz| if ly == lz { 0.0 } else { 1.0 })
                            .collect()
                    })
                    .collect())
            }
            _ => Err(Error::Unsupported(format!(
                "distortion `{}` is not linear",
                self.name()
            ))),
        }
    }
}

fn check_same_labels(y: &Alphabet, z: &Alphabet) -> Result<()> {
    if y.len() != z.len() || y.labels().iter().any(|l| z.index_of(l).is_none()) {
        return Err(Error::AlphabetMismatch(
            "probability of error needs the release alphabet to carry the useful-data labels".into(),
        ));
    }
    Ok(())
}

fn require_two_axes(joint: &JointPmf) -> Result<()> {
    if joint.arity() != 2 {
        return Err(Error::UnsupportedArity(joint.arity()));
    }
    Ok(())
}

/// Values this close to zero are round-off from summing logs of near-equal ratios.
const ROUND_OFF: f64 = 1e-14;

/// Dispatches to the measure-specific functional.
pub fn leakage(measure: &PrivacyMeasure, joint: &JointPmf) -> Result<ExtReal> {
    require_two_axes(joint)?;
    let v = match measure {
        PrivacyMeasure::MutualInformation => ExtReal::finite(mutual_information(joint)),
        PrivacyMeasure::MaximalInformationLeakage => {
            ExtReal::finite(maximal_information_leakage(joint))
        }
        PrivacyMeasure::SibsonInfinity => ExtReal::finite(sibson_infinity(joint)),
        PrivacyMeasure::InformationPrivacy => information_privacy(joint),
        PrivacyMeasure::DifferentialPrivacy(adj) => {
            let rel = adj.resolve(joint.axis(0))?;
            differential_privacy_of_joint(joint, &rel)?
        }
    };
    Ok(if v.is_finite() && v.value().abs() < ROUND_OFF {
        ExtReal::ZERO
    } else {
        v
    })
}

/// `H(X) - min_z H(X | Z = z)` over release symbols of positive probability.
pub fn maximal_information_leakage(joint: &JointPmf) -> f64 {
    let s = Tolerances::DEFAULT.support;
    let hx = entropy(&joint.marginal_pmf(0).expect("two axes"));
    let by_z = joint.condition(1).expect("axis exists");
    let min_h = by_z
        .rows()
        .iter()
        .flatten()
        .map(|row| {
            crate::probability::plogp_sum(row.iter().copied().filter(|&p| p > s)).max(0.0)
        })
        .fold(f64::INFINITY, f64::min);
    (hx - min_h).max(0.0)
}

/// The same quantity with the roles of the two axes exchanged: `H(Z) - min_x H(Z | X = x)`.
pub fn maximal_information_leakage_swapped(joint: &JointPmf) -> f64 {
    maximal_information_leakage(&joint.transposed())
}

/// `log sum_z max_{x: P_X(x) > 0} P_{Z|X}(z|x)`.
pub fn sibson_infinity(joint: &JointPmf) -> f64 {
    let channel = joint.condition(0).expect("axis exists");
    sibson_infinity_channel(&channel)
}

/// Sibson's order-infinity information of a channel restricted to its present rows
/// (the rows of inputs in the support of the prior).
pub fn sibson_infinity_channel(channel: &Channel) -> f64 {
    let nz = channel.output().len();
    let mut col_max = vec![0.0f64; nz];
    for row in channel.rows().iter().flatten() {
        for (m, &p) in col_max.iter_mut().zip(row) {
            *m = m.max(p);
        }
    }
    col_max.iter().sum::<f64>().ln().max(0.0)
}

/// `max |ln P_{X,Z}(x,z) / (P_X(x) P_Z(z))|` over supported `x`, `z`; infinite when
/// a supported pair has zero joint mass.
pub fn information_privacy(joint: &JointPmf) -> ExtReal {
    let s = Tolerances::DEFAULT.support;
    let px = joint.marginal_pmf(0).expect("two axes");
    let pz = joint.marginal_pmf(1).expect("two axes");
    let mut worst = 0.0f64;
    for (x, row) in joint.rows().enumerate() {
        if px.prob(x) <= s {
            continue;
        }
        for (z, &pxz) in row.iter().enumerate() {
            if pz.prob(z) <= s {
                continue;
            }
            if pxz <= s {
                return ExtReal::INFINITY;
            }
            worst = worst.max((pxz / (px.prob(x) * pz.prob(z))).ln().abs());
        }
    }
    ExtReal::finite(worst)
}

/// Information privacy maximized over events `X in A`, `Z in B` instead of singletons.
/// Exhaustive, so limited to `|X| + |Z| <= 24`.
pub fn information_privacy_sets(joint: &JointPmf) -> Result<ExtReal> {
    require_two_axes(joint)?;
    let s = Tolerances::DEFAULT.support;
    let (nx, nz) = (joint.axis(0).len(), joint.axis(1).len());
    if nx + nz > 24 {
        return Err(Error::Unsupported(format!(
            "subset enumeration over {nx} x {nz} symbols"
        )));
    }
    let px = joint.marginal_pmf(0)?;
    let pz = joint.marginal_pmf(1)?;
    let mut worst = 0.0f64;
    let subset_mass = |probs: &[f64], mask: u32| -> f64 {
        probs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    };
    for amask in 1u32..(1 << nx) {
        let pa = subset_mass(px.probs(), amask);
        if pa <= s {
            continue;
        }
        let row_a: Vec<f64> = (0..nz)
            .map(|z| {
                (0..nx)
                    .filter(|x| amask >> x & 1 == 1)
                    .map(|x| joint.get2(x, z))
                    .sum()
            })
            .collect();
        for bmask in 1u32..(1 << nz) {
            let pb = subset_mass(pz.probs(), bmask);
            if pb <= s {
                continue;
            }
            let pab = subset_mass(&row_a, bmask);
            if pab <= s {
                return Ok(ExtReal::INFINITY);
            }
            worst = worst.max((pab / (pa * pb)).ln().abs());
        }
    }
    Ok(ExtReal::finite(worst))
}

/// `max |ln P_{Z|X}(z|x1) / P_{Z|X}(z|x2)|` over adjacent `x1, x2` and all `z`,
/// with `|ln(c/0)| = inf` and `|ln(0/0)| = 0`.
pub fn differential_privacy(channel: &Channel, adjacency: &AdjacencyRelation) -> Result<ExtReal> {
    if adjacency.pairs().is_empty() {
        return Err(Error::EmptyAdjacency);
    }
    if adjacency.size() != channel.input().len() {
        return Err(Error::AlphabetMismatch(format!(
            "adjacency over {} symbols applied to channel with {} inputs",
            adjacency.size(),
            channel.input().len()
        )));
    }
    let s = Tolerances::DEFAULT.support;
    let row = |i: usize| {
        channel
            .row(i)
            .ok_or_else(|| Error::MissingRow(channel.input().label(i).to_string()))
    };
    let mut worst = 0.0f64;
    for &(a, b) in adjacency.pairs() {
        let (ra, rb) = (row(a)?, row(b)?);
        for (&p, &q) in ra.iter().zip(rb) {
            match (p > s, q > s) {
                (false, false) => {}
                (true, true) => worst = worst.max((p / q).ln().abs()),
                _ => return Ok(ExtReal::INFINITY),
            }
        }
    }
    Ok(ExtReal::finite(worst))
}

/// Differential privacy of the channel `P_{Z|X}` extracted from a joint; every `x`
/// must have positive probability so the channel is fully determined.
pub fn differential_privacy_of_joint(
    joint: &JointPmf,
    adjacency: &AdjacencyRelation,
) -> Result<ExtReal> {
    let channel = joint.condition(0)?;
    if let Some(i) = channel.rows().iter().position(Option::is_none) {
        return Err(Error::MissingRow(joint.axis(0).label(i).to_string()));
    }
    differential_privacy(&channel, adjacency)
}

/// Evaluates a distortion functional on a `(Y, Z)` joint.
pub fn distortion(measure: &DistortionMeasure, joint: &JointPmf) -> Result<f64> {
    require_two_axes(joint)?;
    match measure {
        DistortionMeasure::ExpectedDistortion(_) | DistortionMeasure::ProbabilityOfError => {
            let d = measure.cost_matrix(joint.axis(0), joint.axis(1))?;
            Ok(joint
                .rows()
                .zip(&d)
                .map(|(row, drow)| row.iter().zip(drow).map(|(p, c)| p * c).sum::<f64>())
                .sum())
        }
        DistortionMeasure::ConditionalEntropy => Ok(conditional_entropy(joint)),
        DistortionMeasure::WitnessIndicator { target, tol } => {
            if target.axes() != joint.axes() {
                return Err(Error::AlphabetMismatch(
                    "witness target and (Y, Z) joint have different alphabets".into(),
                ));
            }
            let dev = target
                .probs()
                .iter()
                .zip(joint.probs())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok(if dev <= *tol { 1.0 } else { 2.0 })
        }
    }
}
