//! Finite-alphabet distributions, channels and the information quantities built on them.
//!
//! All information quantities are in nats. Terms whose probability is at or below
//! [`Tolerances::support`] are treated as zero, so `0 log 0 = 0` throughout.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Numerical thresholds shared by the whole crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of a total mass from 1 before a distribution is rejected.
    pub pmf: f64,
    /// Probabilities at or below this value count as zero.
    pub support: f64,
    /// Mutual information at or below this value (nats) counts as zero.
    pub info: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        pmf: 1e-9,
        support: 1e-12,
        info: 1e-9,
    };

    pub fn validate(&self) -> Result<()> {
        let positive = self.pmf > 0.0 && self.support > 0.0 && self.info > 0.0;
        if !positive || self.support >= self.pmf {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be positive with support < pmf, got {self:?}"
            )));
        }
        Ok(())
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::DEFAULT
    }
}

/// An ordered set of distinct symbol labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut seen = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l.as_str(), i).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Alphabet { labels })
    }

    /// Labels `"0"`, `"1"`, ..., `"n-1"`.
    pub fn indexed(n: usize) -> Self {
        assert!(n > 0, "alphabet must be nonempty");
        Alphabet {
            labels: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    /// Cartesian product with labels `"(a,b)"`, first alphabet varying slowest.
    pub fn product(a: &Alphabet, b: &Alphabet) -> Self {
        let mut labels = Vec::with_capacity(a.len() * b.len());
        for la in &a.labels {
            for lb in &b.labels {
                labels.push(format!("({la},{lb})"));
            }
        }
        Alphabet { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Alphabet whose `i`th label is the `perm[i]`th label of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        Ok(Alphabet {
            labels: perm.iter().map(|&j| self.labels[j].clone()).collect(),
        })
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(", "))
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidParameter(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &j in perm {
        if j >= n || seen[j] {
            return Err(Error::InvalidParameter(
                "relabeling is not a bijection".into(),
            ));
        }
        seen[j] = true;
    }
    Ok(())
}

/// Checks nonnegativity and total mass, clamps sub-threshold negatives and renormalizes.
fn normalize(probs: &mut [f64], tol: &Tolerances) -> Result<()> {
    let mut total = 0.0;
    for (i, p) in probs.iter_mut().enumerate() {
        if !p.is_finite() {
            return Err(Error::NonFiniteProbability(i));
        }
        if *p < 0.0 {
            if *p < -tol.support {
                return Err(Error::NegativeProbability { index: i, value: *p });
            }
            *p = 0.0;
        }
        total += *p;
    }
    if (total - 1.0).abs() > tol.pmf {
        return Err(Error::NotNormalized(total));
    }
    if total != 1.0 {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    Ok(())
}

/// A probability mass function over one alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(alphabet: Alphabet, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != alphabet.len() {
            return Err(Error::ShapeMismatch {
                expected: alphabet.len(),
                got: probs.len(),
            });
        }
        normalize(&mut probs, &Tolerances::DEFAULT)?;
        Ok(Pmf { alphabet, probs })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        Pmf {
            alphabet,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(alphabet: Alphabet, index: usize) -> Self {
        let mut probs = vec![0.0; alphabet.len()];
        probs[index] = 1.0;
        Pmf { alphabet, probs }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// A dense joint distribution over two or three ordered axes, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf {
    axes: Vec<Alphabet>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(axes: Vec<Alphabet>, probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerances(axes, probs, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(axes: Vec<Alphabet>, mut probs: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if !(2..=3).contains(&axes.len()) {
            return Err(Error::UnsupportedArity(axes.len()));
        }
        let expected: usize = axes.iter().map(Alphabet::len).product();
        if probs.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: probs.len(),
            });
        }
        normalize(&mut probs, tol)?;
        Ok(JointPmf { axes, probs })
    }

    /// Two-axis joint from rows indexed by the first axis.
    pub fn from_rows(x: Alphabet, y: Alphabet, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != x.len() {
            return Err(Error::ShapeMismatch {
                expected: x.len(),
                got: rows.len(),
            });
        }
        let mut probs = Vec::with_capacity(x.len() * y.len());
        for row in rows {
            if row.len() != y.len() {
                return Err(Error::ShapeMismatch {
                    expected: y.len(),
                    got: row.len(),
                });
            }
            probs.extend_from_slice(row);
        }
        JointPmf::new(vec![x, y], probs)
    }

    pub fn product(a: &Pmf, b: &Pmf) -> Self {
        let mut probs = Vec::with_capacity(a.len() * b.len());
        for &pa in a.probs() {
            for &pb in b.probs() {
                probs.push(pa * pb);
            }
        }
        JointPmf {
            axes: vec![a.alphabet.clone(), b.alphabet.clone()],
            probs,
        }
    }

    /// `P_A(a) P_{B|A}(b|a)` with the input axis first.
    pub fn from_marginal_and_channel(input: &Pmf, channel: &Channel) -> Result<Self> {
        if input.alphabet() != channel.input() {
            return Err(Error::AlphabetMismatch(
                "marginal alphabet differs from channel input".into(),
            ));
        }
        let nb = channel.output().len();
        let mut probs = vec![0.0; input.len() * nb];
        for (a, &pa) in input.probs().iter().enumerate() {
            if pa <= Tolerances::DEFAULT.support {
                continue;
            }
            let row = channel
                .row(a)
                .ok_or_else(|| Error::MissingRow(input.alphabet().label(a).to_string()))?;
            for (b, &q) in row.iter().enumerate() {
                probs[a * nb + b] = pa * q;
            }
        }
        JointPmf::new(vec![input.alphabet.clone(), channel.output.clone()], probs)
    }

    /// Wraps already-normalized probabilities produced by internal arithmetic.
    pub(crate) fn from_parts_unchecked(axes: Vec<Alphabet>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), axes.iter().map(Alphabet::len).product::<usize>());
        JointPmf { axes, probs }
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Alphabet {
        &self.axes[i]
    }

    pub fn arity(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Alphabet::len).collect()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn strides(&self) -> Vec<usize> {
        let shape = self.shape();
        let mut strides = vec![1; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        strides
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let strides = self.strides();
        let flat: usize = index.iter().zip(&strides).map(|(i, s)| i * s).sum();
        self.probs[flat]
    }

    /// Entry of a two-axis joint.
    pub fn get2(&self, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.arity(), 2);
        self.probs[i * self.axes[1].len() + j]
    }

    /// Rows of a two-axis joint.
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        assert_eq!(self.arity(), 2, "rows() requires a two-axis joint");
        self.probs.chunks(self.axes[1].len())
    }

    fn multi_index(&self, mut flat: usize, shape: &[usize]) -> Vec<usize> {
        let mut idx = vec![0; shape.len()];
        for k in (0..shape.len()).rev() {
            idx[k] = flat % shape[k];
            flat /= shape[k];
        }
        idx
    }

    fn sum_onto(&self, keep: &[usize]) -> Result<Vec<f64>> {
        let mut seen = vec![false; self.arity()];
        for &k in keep {
            if k >= self.arity() || seen[k] {
                return Err(Error::InvalidAxis(k));
            }
            seen[k] = true;
        }
        let shape = self.shape();
        let out_shape: Vec<usize> = keep.iter().map(|&k| shape[k]).collect();
        let mut out = vec![0.0; out_shape.iter().product()];
        for (flat, &p) in self.probs.iter().enumerate() {
            let idx = self.multi_index(flat, &shape);
            let mut o = 0;
            for (&k, &n) in keep.iter().zip(&out_shape) {
                o = o * n + idx[k];
            }
            out[o] += p;
        }
        Ok(out)
    }

    /// Sums out every axis not in `keep`; the result's axes follow the order of `keep`.
    pub fn marginal(&self, keep: &[usize]) -> Result<JointPmf> {
        if !(2..=3).contains(&keep.len()) {
            return Err(Error::UnsupportedArity(keep.len()));
        }
        let probs = self.sum_onto(keep)?;
        let axes = keep.iter().map(|&k| self.axes[k].clone()).collect();
        Ok(JointPmf { axes, probs })
    }

    /// Single-axis marginal.
    pub fn marginal_pmf(&self, axis: usize) -> Result<Pmf> {
        let probs = self.sum_onto(&[axis])?;
        Ok(Pmf {
            alphabet: self.axes[axis].clone(),
            probs,
        })
    }

    /// Two-axis joint with the axes exchanged.
    pub fn transposed(&self) -> JointPmf {
        self.marginal(&[1, 0]).expect("two-axis joint")
    }

    /// The channel from `given_axis` to the remaining axes (flattened in order).
    ///
    /// Rows for given-symbols of (near) zero probability are absent.
    pub fn condition(&self, given_axis: usize) -> Result<Channel> {
        if given_axis >= self.arity() {
            return Err(Error::InvalidAxis(given_axis));
        }
        let rest: Vec<usize> = (0..self.arity()).filter(|&k| k != given_axis).collect();
        let mut order = vec![given_axis];
        order.extend(&rest);
        let flat = self.sum_onto(&order)?;
        let output = if rest.len() == 1 {
            self.axes[rest[0]].clone()
        } else {
            Alphabet::product(&self.axes[rest[0]], &self.axes[rest[1]])
        };
        let n_out = output.len();
        let tol = Tolerances::DEFAULT;
        let rows = flat
            .chunks(n_out)
            .map(|chunk| {
                let mass: f64 = chunk.iter().sum();
                (mass > tol.support).then(|| chunk.iter().map(|p| p / mass).collect())
            })
            .collect();
        Ok(Channel {
            input: self.axes[given_axis].clone(),
            output,
            rows,
        })
    }

    /// Applies `perms[k]` to axis `k`: entry `i` of the result is entry `perms[k][i]` of `self`.
    pub fn relabeled(&self, perms: &[Vec<usize>]) -> Result<JointPmf> {
        if perms.len() != self.arity() {
            return Err(Error::InvalidParameter(format!(
                "expected {} permutations, got {}",
                self.arity(),
                perms.len()
            )));
        }
        let axes = self
            .axes
            .iter()
            .zip(perms)
            .map(|(a, p)| a.permuted(p))
            .collect::<Result<Vec<_>>>()?;
        let shape = self.shape();
        let mut probs = vec![0.0; self.probs.len()];
        for (flat, slot) in probs.iter_mut().enumerate() {
            let idx = self.multi_index(flat, &shape);
            let src: Vec<usize> = idx.iter().zip(perms).map(|(&i, p)| p[i]).collect();
            *slot = self.get(&src);
        }
        Ok(JointPmf { axes, probs })
    }

    /// Largest probability strictly inside `(lo, hi]`, if any; used to flag near-threshold mass.
    pub fn mass_in_band(&self, lo: f64, hi: f64) -> Option<f64> {
        self.probs
            .iter()
            .copied()
            .filter(|&p| p > lo && p <= hi)
            .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.max(p))))
    }
}

/// A row-stochastic kernel. Rows may be absent for inputs outside the support
/// of whatever distribution the channel was conditioned from.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    input: Alphabet,
    output: Alphabet,
    rows: Vec<Option<Vec<f64>>>,
}

impl Channel {
    pub fn new(input: Alphabet, output: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_absent_rows(input, output, rows.into_iter().map(Some).collect())
    }

    pub fn with_absent_rows(
        input: Alphabet,
        output: Alphabet,
        rows: Vec<Option<Vec<f64>>>,
    ) -> Result<Self> {
        if rows.len() != input.len() {
            return Err(Error::ShapeMismatch {
                expected: input.len(),
                got: rows.len(),
            });
        }
        let tol = Tolerances::DEFAULT;
        let mut checked = Vec::with_capacity(rows.len());
        for row in rows {
            checked.push(match row {
                Some(mut r) => {
                    if r.len() != output.len() {
                        return Err(Error::ShapeMismatch {
                            expected: output.len(),
                            got: r.len(),
                        });
                    }
                    normalize(&mut r, &tol)?;
                    Some(r)
                }
                None => None,
            });
        }
        Ok(Channel {
            input,
            output,
            rows: checked,
        })
    }

    pub(crate) fn from_rows_unchecked(input: Alphabet, output: Alphabet, rows: Vec<Vec<f64>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == output.len()));
        Channel {
            input,
            output,
            rows: rows.into_iter().map(Some).collect(),
        }
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![0.0; n];
                r[i] = 1.0;
                r
            })
            .collect();
        Channel::from_rows_unchecked(alphabet.clone(), alphabet, rows)
    }

    /// Every row equal to `output`.
    pub fn constant(input: Alphabet, output: &Pmf) -> Self {
        let rows = vec![output.probs().to_vec(); input.len()];
        Channel::from_rows_unchecked(input, output.alphabet().clone(), rows)
    }

    pub fn deterministic(input: Alphabet, output: Alphabet, f: impl Fn(usize) -> usize) -> Self {
        let rows = (0..input.len())
            .map(|i| {
                let mut r = vec![0.0; output.len()];
                r[f(i)] = 1.0;
                r
            })
            .collect();
        Channel::from_rows_unchecked(input, output, rows)
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn row(&self, i: usize) -> Option<&[f64]> {
        self.rows[i].as_deref()
    }

    pub fn rows(&self) -> &[Option<Vec<f64>>] {
        &self.rows
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(Option::is_some)
    }

    /// Dense rows; absent rows are an error.
    pub fn dense_rows(&self) -> Result<Vec<Vec<f64>>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.clone()
                    .ok_or_else(|| Error::MissingRow(self.input.label(i).to_string()))
            })
            .collect()
    }

    /// `P_{C|A}(c|a) = sum_b P_{B|A}(b|a) P_{C|B}(c|b)`. A row of the result is absent
    /// when the corresponding row of `self` is absent.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if self.output != next.input {
            return Err(Error::AlphabetMismatch(
                "output of first channel differs from input of second".into(),
            ));
        }
        let tol = Tolerances::DEFAULT;
        let nc = next.output.len();
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let Some(row) = row else {
                rows.push(None);
                continue;
            };
            let mut out = vec![0.0; nc];
            for (b, &pb) in row.iter().enumerate() {
                if pb <= tol.support {
                    continue;
                }
                let nr = next
                    .row(b)
                    .ok_or_else(|| Error::MissingRow(next.input.label(b).to_string()))?;
                for (c, &q) in nr.iter().enumerate() {
                    out[c] += pb * q;
                }
            }
            rows.push(Some(out));
        }
        Ok(Channel {
            input: self.input.clone(),
            output: next.output.clone(),
            rows,
        })
    }
}

/// The joint law of `(X, Y, Z)` for `(X, Y) ~ data`, `W ~ obs(.|X,Y)`, `Z ~ mech(.|W)`,
/// with `W` summed out. `obs` takes inputs over the product alphabet `X x Y`.
pub fn push_mechanism(data: &JointPmf, obs: &Channel, mech: &Channel) -> Result<JointPmf> {
    if data.arity() != 2 {
        return Err(Error::UnsupportedArity(data.arity()));
    }
    let (nx, ny) = (data.axis(0).len(), data.axis(1).len());
    if obs.input().len() != nx * ny {
        return Err(Error::AlphabetMismatch(format!(
            "observation channel has {} inputs, expected |X||Y| = {}",
            obs.input().len(),
            nx * ny
        )));
    }
    if obs.output() != mech.input() {
        return Err(Error::AlphabetMismatch(
            "observation output differs from mechanism input".into(),
        ));
    }
    let tol = Tolerances::DEFAULT;
    let nz = mech.output().len();
    let mut probs = vec![0.0; nx * ny * nz];
    for x in 0..nx {
        for y in 0..ny {
            let pxy = data.get2(x, y);
            if pxy <= tol.support {
                continue;
            }
            let obs_row = obs
                .row(x * ny + y)
                .ok_or_else(|| Error::MissingRow(obs.input().label(x * ny + y).to_string()))?;
            let base = (x * ny + y) * nz;
            for (w, &pw) in obs_row.iter().enumerate() {
                if pw <= tol.support {
                    continue;
                }
                let mrow = mech
                    .row(w)
                    .ok_or_else(|| Error::MissingRow(mech.input().label(w).to_string()))?;
                for (z, &pz) in mrow.iter().enumerate() {
                    probs[base + z] += pxy * pw * pz;
                }
            }
        }
    }
    Ok(JointPmf::from_parts_unchecked(
        vec![data.axis(0).clone(), data.axis(1).clone(), mech.output().clone()],
        probs,
    ))
}

pub(crate) fn plogp_sum(probs: impl IntoIterator<Item = f64>) -> f64 {
    let s = Tolerances::DEFAULT.support;
    probs
        .into_iter()
        .filter(|&p| p > s)
        .map(|p| -p * p.ln())
        .sum()
}

/// Shannon entropy in nats.
pub fn entropy(p: &Pmf) -> f64 {
    plogp_sum(p.probs().iter().copied()).max(0.0)
}

/// Entropy of the full joint, in nats.
pub fn joint_entropy(joint: &JointPmf) -> f64 {
    plogp_sum(joint.probs().iter().copied()).max(0.0)
}

/// `H(A | B)` for a two-axis joint over `(A, B)`, in nats.
pub fn conditional_entropy(joint: &JointPmf) -> f64 {
    assert_eq!(joint.arity(), 2, "conditional_entropy requires a two-axis joint");
    let pb = joint.marginal_pmf(1).expect("axis 1 exists");
    (joint_entropy(joint) - entropy(&pb)).max(0.0)
}

/// `I(A; B)` for a two-axis joint, in nats.
pub fn mutual_information(joint: &JointPmf) -> f64 {
    assert_eq!(joint.arity(), 2, "mutual_information requires a two-axis joint");
    let s = Tolerances::DEFAULT.support;
    let pa = joint.marginal_pmf(0).expect("axis 0 exists");
    let pb = joint.marginal_pmf(1).expect("axis 1 exists");
    let mut acc = 0.0;
    for (a, row) in joint.rows().enumerate() {
        for (b, &p) in row.iter().enumerate() {
            if p > s {
                acc += p * (p / (pa.prob(a) * pb.prob(b))).ln();
            }
        }
    }
    acc.max(0.0)
}

/// `I(A; C | B)` for a three-axis joint over `(A, B, C)`, in nats.
pub fn conditional_mutual_information(joint: &JointPmf) -> f64 {
    assert_eq!(joint.arity(), 3, "conditional_mutual_information requires three axes");
    let s = Tolerances::DEFAULT.support;
    let (na, nb, nc) = (joint.axis(0).len(), joint.axis(1).len(), joint.axis(2).len());
    let pab = joint.marginal(&[0, 1]).expect("valid axes");
    let pbc = joint.marginal(&[1, 2]).expect("valid axes");
    let pb = joint.marginal_pmf(1).expect("valid axis");
    let mut acc = 0.0;
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let p = joint.probs()[(a * nb + b) * nc + c];
                if p > s {
                    acc += p * (p * pb.prob(b) / (pab.get2(a, b) * pbc.get2(b, c))).ln();
                }
            }
        }
    }
    acc.max(0.0)
}

/// Whether `A -> B -> C` is a Markov chain, i.e. `I(A; C | B) <= tol.info`.
pub fn is_markov(joint: &JointPmf, tol: &Tolerances) -> bool {
    conditional_mutual_information(joint) <= tol.info
}
