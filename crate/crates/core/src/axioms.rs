//! Post-processing (`J(A;B) >= J(A;C)`) and linkage (`J(B;C) >= J(A;C)`) checks on
//! Markov chains `A -> B -> C`, the standard counterexamples for maximal information
//! leakage and differential privacy, and a random chain generator.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::measures::{differential_privacy, leakage, Adjacency, PrivacyMeasure};
use crate::probability::{Alphabet, Channel, JointPmf, Pmf};
use crate::random::dirichlet;

/// Slack (nats) before an inequality counts as violated.
pub const EPS_AXIOM: f64 = 1e-9;

/// A chain `A -> B -> C` with the pieces it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovTriple {
    pub joint: JointPmf,
    pub p_ab: JointPmf,
    pub c_given_b: Channel,
}

impl MarkovTriple {
    pub fn new(p_ab: JointPmf, c_given_b: Channel) -> Result<Self> {
        if p_ab.arity() != 2 {
            return Err(Error::UnsupportedArity(p_ab.arity()));
        }
        if p_ab.axis(1) != c_given_b.input() {
            return Err(Error::AlphabetMismatch("B alphabet differs from channel input".into()));
        }
        let (na, nb, nc) = (p_ab.axis(0).len(), p_ab.axis(1).len(), c_given_b.output().len());
        let mut probs = vec![0.0; na * nb * nc];
        for a in 0..na {
            for b in 0..nb {
                let p = p_ab.get2(a, b);
                if p == 0.0 {
                    continue;
                }
                let row = c_given_b
                    .row(b)
                    .ok_or_else(|| Error::MissingRow(c_given_b.input().label(b).to_string()))?;
                for (c, &q) in row.iter().enumerate() {
                    probs[(a * nb + b) * nc + c] = p * q;
                }
            }
        }
        let joint = JointPmf::new(
            vec![p_ab.axis(0).clone(), p_ab.axis(1).clone(), c_given_b.output().clone()],
            probs,
        )?;
        Ok(MarkovTriple {
            joint,
            p_ab,
            c_given_b,
        })
    }

    /// `P_{B|A}`; rows for `a` outside the support are absent.
    pub fn b_given_a(&self) -> Result<Channel> {
        self.p_ab.condition(0)
    }

    /// The same chain with `perms[k]` applied to axis `k` (new index `i` is old `perms[k][i]`).
    pub fn relabeled(&self, perms: &[Vec<usize>; 3]) -> Result<Self> {
        let p_ab = self.p_ab.relabeled(&perms[..2])?;
        let (pb, pc) = (&perms[1], &perms[2]);
        let rows = pb
            .iter()
            .map(|&b| self.c_given_b.row(b).map(|r| pc.iter().map(|&c| r[c]).collect()))
            .collect();
        let c_given_b = Channel::with_absent_rows(
            self.c_given_b.input().permuted(pb)?,
            self.c_given_b.output().permuted(pc)?,
            rows,
        )?;
        MarkovTriple::new(p_ab, c_given_b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    PostProcessing,
    Linkage,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inequality::PostProcessing => "post-processing",
            Inequality::Linkage => "linkage",
        })
    }
}

/// Outcome of one inequality check: `holds` iff `rhs - lhs >= -EPS_AXIOM`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub measure: String,
    pub inequality: Inequality,
    /// `J(A; C)`.
    pub lhs: ExtReal,
    /// `J(A; B)` or `J(B; C)`.
    pub rhs: ExtReal,
    pub holds: bool,
    pub margin: f64,
}

impl AxiomReport {
    fn new(measure: &PrivacyMeasure, inequality: Inequality, lhs: ExtReal, rhs: ExtReal) -> Self {
        let margin = rhs.margin_over(lhs);
        AxiomReport {
            measure: measure.name().to_string(),
            inequality,
            lhs,
            rhs,
            holds: margin >= -EPS_AXIOM,
            margin,
        }
    }
}

/// Whether the inequality always holds for the measure, so that a failure is a bug.
pub fn guaranteed(measure: &PrivacyMeasure, inequality: Inequality) -> bool {
    match measure {
        PrivacyMeasure::MutualInformation
        | PrivacyMeasure::InformationPrivacy
        | PrivacyMeasure::SibsonInfinity => true,
        PrivacyMeasure::MaximalInformationLeakage | PrivacyMeasure::DifferentialPrivacy(_) => {
            inequality == Inequality::PostProcessing
        }
    }
}

fn dp(adj: &Adjacency, channel: &Channel) -> Result<ExtReal> {
    differential_privacy(channel, &adj.resolve(channel.input())?)
}

pub fn check_post_processing(measure: &PrivacyMeasure, t: &MarkovTriple) -> Result<AxiomReport> {
    let (lhs, rhs) = match measure {
        PrivacyMeasure::DifferentialPrivacy(adj) => {
            let b_given_a = t.b_given_a()?;
            (dp(adj, &b_given_a.then(&t.c_given_b)?)?, dp(adj, &b_given_a)?)
        }
        _ => (
            leakage(measure, &t.joint.marginal(&[0, 2])?)?,
            leakage(measure, &t.joint.marginal(&[0, 1])?)?,
        ),
    };
    Ok(AxiomReport::new(measure, Inequality::PostProcessing, lhs, rhs))
}

pub fn check_linkage(measure: &PrivacyMeasure, t: &MarkovTriple) -> Result<AxiomReport> {
    let (lhs, rhs) = match measure {
        PrivacyMeasure::DifferentialPrivacy(adj) => {
            let c_given_a = t.b_given_a()?.then(&t.c_given_b)?;
            (dp(adj, &c_given_a)?, dp(adj, &t.c_given_b)?)
        }
        _ => (
            leakage(measure, &t.joint.marginal(&[0, 2])?)?,
            leakage(measure, &t.joint.marginal(&[1, 2])?)?,
        ),
    };
    Ok(AxiomReport::new(measure, Inequality::Linkage, lhs, rhs))
}

/// `A` ternary with law `(1/2, 1/4, 1/4)`, `B = 1{A != 0}`, `C = B`.
pub fn max_info_counterexample() -> MarkovTriple {
    let a = Pmf::new(Alphabet::indexed(3), vec![0.5, 0.25, 0.25]).expect("valid pmf");
    let b_given_a = Channel::deterministic(Alphabet::indexed(3), Alphabet::indexed(2), |a| usize::from(a != 0));
    let p_ab = JointPmf::from_marginal_and_channel(&a, &b_given_a).expect("matching alphabets");
    MarkovTriple::new(p_ab, Channel::identity(Alphabet::indexed(2))).expect("valid chain")
}

/// Labels `"00", "01", "10", "11"`.
pub fn two_bit_alphabet() -> Alphabet {
    Alphabet::new(["00", "01", "10", "11"]).expect("distinct labels")
}

/// `A` uniform on two bits, `B = (A1 or A2, A1 or A2)`, and `P_{C|B}(1|b) = q, r, r, s`
/// for `b = 00, 01, 10, 11`. Requires `0 < q < r < s < 1`.
pub fn dp_counterexample(q: f64, r: f64, s: f64) -> Result<(Pmf, Channel, Channel)> {
    if !(0.0 < q && q < r && r < s && s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < q < r < s < 1, got ({q}, {r}, {s})"
        )));
    }
    let bits = two_bit_alphabet();
    let p_a = Pmf::uniform(bits.clone());
    let b_map = Channel::deterministic(bits.clone(), bits.clone(), |a| if a == 0 { 0 } else { 3 });
    let ones = [q, r, r, s];
    let mech = Channel::new(
        bits,
        Alphabet::indexed(2),
        ones.iter().map(|&o| vec![1.0 - o, o]).collect(),
    )?;
    Ok((p_a, b_map, mech))
}

/// The counterexample as a chain. `P_{C|B}` keeps the rows for `b = 01, 10`, which
/// have zero probability but enter the differential-privacy comparison.
pub fn dp_counterexample_triple(q: f64, r: f64, s: f64) -> Result<MarkovTriple> {
    let (p_a, b_map, mech) = dp_counterexample(q, r, s)?;
    MarkovTriple::new(JointPmf::from_marginal_and_channel(&p_a, &b_map)?, mech)
}

/// `P_{A,B}` and the rows of `P_{C|B}` drawn from flat Dirichlet laws over the given alphabets.
pub fn random_markov_triple_over(seed: u64, a: Alphabet, b: Alphabet, c: Alphabet) -> MarkovTriple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p_ab = dirichlet(&mut rng, a.len() * b.len());
    let rows = (0..b.len()).map(|_| dirichlet(&mut rng, c.len())).collect();
    let p_ab = JointPmf::new(vec![a, b.clone()], p_ab).expect("dirichlet draw is a pmf");
    let c_given_b = Channel::new(b, c, rows).expect("dirichlet rows are stochastic");
    MarkovTriple::new(p_ab, c_given_b).expect("alphabets chain")
}

/// Random chain over indexed alphabets of sizes `(|A|, |B|, |C|)`.
pub fn random_markov_triple(seed: u64, sizes: (usize, usize, usize)) -> Result<MarkovTriple> {
    let (na, nb, nc) = sizes;
    if na == 0 || nb == 0 || nc == 0 {
        return Err(Error::EmptyAlphabet);
    }
    Ok(random_markov_triple_over(
        seed,
        Alphabet::indexed(na),
        Alphabet::indexed(nb),
        Alphabet::indexed(nc),
    ))
}

/// Whether `J` takes the same value (within `1e-10`) on `joint` and on its relabeling by
/// `perms`. Hamming adjacency follows the labels; explicit adjacency is carried along.
pub fn check_isomorphism_invariance(
    measure: &PrivacyMeasure,
    joint: &JointPmf,
    perms: &[Vec<usize>],
) -> Result<bool> {
    let permuted = joint.relabeled(perms)?;
    let moved = match measure {
        PrivacyMeasure::DifferentialPrivacy(Adjacency::Explicit(rel)) => {
            PrivacyMeasure::DifferentialPrivacy(Adjacency::Explicit(rel.relabeled(&perms[0])?))
        }
        other => other.clone(),
    };
    let before = leakage(measure, joint)?;
    let after = leakage(&moved, &permuted)?;
    Ok(before.margin_over(after).abs() <= 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::AdjacencyRelation;
    use crate::probability::{is_markov, Tolerances};

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn max_info_counterexample_values() {
        let t = max_info_counterexample();
        assert!(is_markov(&t.joint, &Tolerances::DEFAULT));
        let m = PrivacyMeasure::MaximalInformationLeakage;
        let link = check_linkage(&m, &t).unwrap();
        assert!((link.rhs.value() / LN2 - 1.0).abs() < 1e-12);
        assert!((link.lhs.value() / LN2 - 1.5).abs() < 1e-12);
        assert!(!link.holds);
        assert!((link.margin / LN2 + 0.5).abs() < 1e-12);
        let post = check_post_processing(&m, &t).unwrap();
        assert!(post.holds);
        assert!((post.rhs.value() / LN2 - 1.5).abs() < 1e-12);
    }

    #[test]
    fn dp_counterexample_values() {
        let t = dp_counterexample_triple(0.1, 0.3, 0.6).unwrap();
        let m = PrivacyMeasure::DifferentialPrivacy(Adjacency::Hamming);
        let link = check_linkage(&m, &t).unwrap();
        assert!((link.rhs.value() - 3f64.ln()).abs() < 1e-12);
        assert!((link.lhs.value() - 6f64.ln()).abs() < 1e-12);
        assert!(!link.holds);
        assert!(dp_counterexample(0.3, 0.1, 0.6).is_err());
    }

    #[test]
    fn random_triples_are_markov_and_reproducible() {
        let a = random_markov_triple(5, (3, 2, 4)).unwrap();
        let b = random_markov_triple(5, (3, 2, 4)).unwrap();
        assert_eq!(a, b);
        assert!(is_markov(&a.joint, &Tolerances::DEFAULT));
        let t = random_markov_triple(9, (3, 1, 3)).unwrap();
        let ac = t.joint.marginal(&[0, 2]).unwrap();
        assert!(crate::probability::mutual_information(&ac) < 1e-15);
    }

    #[test]
    fn mutual_information_satisfies_both() {
        for seed in 0..50 {
            let t = random_markov_triple(seed, (3, 3, 3)).unwrap();
            let mi = PrivacyMeasure::MutualInformation;
            assert!(check_post_processing(&mi, &t).unwrap().holds);
            assert!(check_linkage(&mi, &t).unwrap().holds);
        }
    }

    #[test]
    fn relabeled_chain_gives_same_reports() {
        let t = random_markov_triple(3, (3, 2, 3)).unwrap();
        let u = t.relabeled(&[vec![2, 0, 1], vec![1, 0], vec![0, 2, 1]]).unwrap();
        for m in [PrivacyMeasure::InformationPrivacy, PrivacyMeasure::SibsonInfinity] {
            let (a, b) = (check_linkage(&m, &t).unwrap(), check_linkage(&m, &u).unwrap());
            assert!((a.margin - b.margin).abs() < 1e-12);
        }
    }

    #[test]
    fn isomorphism_invariance_with_explicit_adjacency() {
        let t = random_markov_triple_over(4, two_bit_alphabet(), Alphabet::indexed(2), Alphabet::indexed(3));
        let ac = t.joint.marginal(&[0, 2]).unwrap();
        let rel = AdjacencyRelation::new(4, [(0, 1), (1, 3)]).unwrap();
        let dp = PrivacyMeasure::DifferentialPrivacy(Adjacency::Explicit(rel));
        assert!(check_isomorphism_invariance(&dp, &ac, &[vec![3, 1, 0, 2], vec![2, 0, 1]]).unwrap());
        let hamming = PrivacyMeasure::DifferentialPrivacy(Adjacency::Hamming);
        assert!(check_isomorphism_invariance(&hamming, &ac, &[vec![3, 1, 0, 2], vec![0, 1, 2]]).unwrap());
        assert!(check_isomorphism_invariance(&hamming, &ac, &[vec![0, 0, 1, 2], vec![0, 1, 2]]).is_err());
    }
}
