//! Gács–Körner common part of a pair `(X, Y)` and the constructive witnesses that
//! separate output perturbation from full-data release when `C(X;Y) < I(X;Y)`.

use crate::error::{Error, Result};
use crate::probability::{
    conditional_mutual_information, entropy, Alphabet, Channel, JointPmf, Pmf, Tolerances,
};

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Connected-component labeling of the support graph of `P_{X,Y}`.
///
/// Symbols with zero marginal probability belong to no component (`None`).
#[derive(Clone, Debug, PartialEq)]
pub struct CommonPart {
    pub u_alphabet: Alphabet,
    pub u_of_x: Vec<Option<usize>>,
    pub u_of_y: Vec<Option<usize>>,
    pub p_u: Pmf,
}

impl CommonPart {
    /// Number of components.
    pub fn len(&self) -> usize {
        self.u_alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_alphabet.is_empty()
    }
}

/// Components of the bipartite graph with an edge `x - y` whenever `P_{X,Y}(x, y) > eps_support`.
/// Components are numbered in order of their smallest `x` index.
pub fn common_part(joint: &JointPmf) -> CommonPart {
    assert_eq!(joint.arity(), 2, "common_part requires a two-axis joint");
    let s = Tolerances::DEFAULT.support;
    let (nx, ny) = (joint.axis(0).len(), joint.axis(1).len());
    let mut uf = UnionFind::new(nx + ny);
    for x in 0..nx {
        for y in 0..ny {
            if joint.get2(x, y) > s {
                uf.union(x, nx + y);
            }
        }
    }
    let px = joint.marginal_pmf(0).expect("two axes");
    let py = joint.marginal_pmf(1).expect("two axes");
    let mut root_to_u: Vec<Option<usize>> = vec![None; nx + ny];
    let mut masses: Vec<f64> = Vec::new();
    let mut u_of_x = vec![None; nx];
    for (x, slot) in u_of_x.iter_mut().enumerate() {
        if px.prob(x) <= s {
            continue;
        }
        let r = uf.find(x);
        let u = *root_to_u[r].get_or_insert_with(|| {
            masses.push(0.0);
            masses.len() - 1
        });
        masses[u] += px.prob(x);
        *slot = Some(u);
    }
    let u_of_y = (0..ny)
        .map(|y| {
            if py.prob(y) <= s {
                None
            } else {
                root_to_u[uf.find(nx + y)]
            }
        })
        .collect();
    let u_alphabet = Alphabet::new((0..masses.len()).map(|u| format!("u{u}")))
        .expect("at least one component carries mass");
    let p_u = Pmf::new(u_alphabet.clone(), masses).expect("component masses sum to one");
    CommonPart {
        u_alphabet,
        u_of_x,
        u_of_y,
        p_u,
    }
}

/// `C(X; Y) = H(U)` in nats.
pub fn gk_common_information(joint: &JointPmf) -> f64 {
    entropy(&common_part(joint).p_u)
}

/// `P_{X,U,Y}` with `U` the common part.
pub fn joint_with_common_part(joint: &JointPmf) -> JointPmf {
    let cp = common_part(joint);
    let (nx, ny, nu) = (joint.axis(0).len(), joint.axis(1).len(), cp.len());
    let mut probs = vec![0.0; nx * nu * ny];
    for x in 0..nx {
        for y in 0..ny {
            let p = joint.get2(x, y);
            if let Some(u) = cp.u_of_x[x] {
                probs[(x * nu + u) * ny + y] += p;
            }
        }
    }
    JointPmf::new(
        vec![joint.axis(0).clone(), cp.u_alphabet, joint.axis(1).clone()],
        probs,
    )
    .expect("mass is preserved")
}

/// Whether `C(X; Y) = I(X; Y)`, decided as `I(X; Y | U) <= eps_info`.
pub fn ci_equals_mi(joint: &JointPmf) -> bool {
    conditional_mutual_information(&joint_with_common_part(joint)) <= Tolerances::DEFAULT.info
}

/// Symbols `(x0, x1, y0, y1)` with `y0 != y1`, `P(x0, y0) > 0`, `P(x0, y1) > 0`
/// and `P_{X|Y}(x1|y0) != P_{X|Y}(x1|y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witness {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
}

/// Conditional probabilities closer than this are treated as equal in the witness search.
pub const WITNESS_GAP_TOL: f64 = 1e-9;

/// The lexicographically first witness over `(x0, x1, y0, y1)`, if any exists.
pub fn find_witness(joint: &JointPmf) -> Option<Witness> {
    assert_eq!(joint.arity(), 2, "witness search requires a two-axis joint");
    let s = Tolerances::DEFAULT.support;
    let (nx, ny) = (joint.axis(0).len(), joint.axis(1).len());
    let x_given_y = joint.condition(1).expect("axis exists");
    for x0 in 0..nx {
        for x1 in 0..nx {
            for y0 in 0..ny {
                if joint.get2(x0, y0) <= s {
                    continue;
                }
                for y1 in 0..ny {
                    if y1 == y0 || joint.get2(x0, y1) <= s {
                        continue;
                    }
                    // Both y0 and y1 have positive mass here, so their rows exist.
                    let a = x_given_y.row(y0).expect("supported")[x1];
                    let b = x_given_y.row(y1).expect("supported")[x1];
                    if (a - b).abs() > WITNESS_GAP_TOL {
                        return Some(Witness { x0, x1, y0, y1 });
                    }
                }
            }
        }
    }
    None
}

/// Parameters of the binary-release construction: any `s` in `(0, 1)` and
/// `t` in `(0, min{(1-s)/P_{Y|X}(y1|x0), s/P_{Y|X}(y0|x0)})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessReleaseParams {
    pub s: f64,
    pub t: f64,
    pub witness: Witness,
}

impl WitnessReleaseParams {
    /// Open upper end of the admissible `t` interval.
    pub fn t_upper_bound(joint: &JointPmf, s: f64, w: Witness) -> f64 {
        let px0: f64 = (0..joint.axis(1).len()).map(|y| joint.get2(w.x0, y)).sum();
        let y1_given_x0 = joint.get2(w.x0, w.y1) / px0;
        let y0_given_x0 = joint.get2(w.x0, w.y0) / px0;
        ((1.0 - s) / y1_given_x0).min(s / y0_given_x0)
    }

    /// `s = 1/2` and `t` at half its upper bound, using the first witness.
    pub fn default_for(joint: &JointPmf) -> Result<Self> {
        let witness = find_witness(joint).ok_or_else(|| {
            Error::InvalidParameter("C(X;Y) = I(X;Y): no witness exists".into())
        })?;
        let s = 0.5;
        let t = 0.5 * Self::t_upper_bound(joint, s, witness);
        Ok(WitnessReleaseParams { s, t, witness })
    }

    pub fn validate(&self, joint: &JointPmf) -> Result<()> {
        let (nx, ny) = (joint.axis(0).len(), joint.axis(1).len());
        let w = self.witness;
        if w.x0 >= nx || w.x1 >= nx || w.y0 >= ny || w.y1 >= ny {
            return Err(Error::InvalidParameter("witness index out of range".into()));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidParameter(format!("s = {} not in (0, 1)", self.s)));
        }
        let s = Tolerances::DEFAULT.support;
        if w.y0 == w.y1 || joint.get2(w.x0, w.y0) <= s || joint.get2(w.x0, w.y1) <= s {
            return Err(Error::InvalidParameter(
                "witness needs y0 != y1 with P(x0, y0), P(x0, y1) > 0".into(),
            ));
        }
        let hi = Self::t_upper_bound(joint, self.s, w);
        if !(self.t > 0.0 && self.t < hi) {
            return Err(Error::InvalidParameter(format!(
                "t = {} not in (0, {hi})",
                self.t
            )));
        }
        Ok(())
    }
}

/// Binary release alphabet `{"0", "1"}` used by the construction.
pub fn binary_alphabet() -> Alphabet {
    Alphabet::indexed(2)
}

/// Full-data mechanism `P_{Z|X,Y}` making `Z` independent of `X`, and the output-perturbation
/// mechanism `P_{Z'|Y} := P_{Z|Y}` that reproduces the same `(Y, Z)` law but leaks about `X`.
pub fn witness_release_pair(joint: &JointPmf, params: &WitnessReleaseParams) -> Result<(Channel, Channel)> {
    if ci_equals_mi(joint) {
        return Err(Error::InvalidParameter(
            "C(X;Y) = I(X;Y): the construction needs a joint with C < I".into(),
        ));
    }
    params.validate(joint)?;
    let (nx, ny) = (joint.axis(0).len(), joint.axis(1).len());
    let w = params.witness;
    let px0: f64 = (0..ny).map(|y| joint.get2(w.x0, y)).sum();
    let y1_given_x0 = joint.get2(w.x0, w.y1) / px0;
    let y0_given_x0 = joint.get2(w.x0, w.y0) / px0;
    let (s, t) = (params.s, params.t);

    let zero_prob = |x: usize, y: usize| -> f64 {
        if (x, y) == (w.x0, w.y0) {
            s + t * y1_given_x0
        } else if (x, y) == (w.x0, w.y1) {
            s - t * y0_given_x0
        } else {
            s
        }
    };
    let mut fd_rows = Vec::with_capacity(nx * ny);
    for x in 0..nx {
        for y in 0..ny {
            let p0 = zero_prob(x, y);
            fd_rows.push(vec![p0, 1.0 - p0]);
        }
    }
    let fd = Channel::new(
        Alphabet::product(joint.axis(0), joint.axis(1)),
        binary_alphabet(),
        fd_rows,
    )?;

    let x_given_y = joint.condition(1)?;
    let op_rows = (0..ny)
        .map(|y| match x_given_y.row(y) {
            Some(row) => {
                let p0: f64 = (0..nx).map(|x| zero_prob(x, y) * row[x]).sum();
                vec![p0, 1.0 - p0]
            }
            None => vec![s, 1.0 - s],
        })
        .collect();
    let op = Channel::new(joint.axis(1).clone(), binary_alphabet(), op_rows)?;
    Ok((fd, op))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::mutual_information;

    fn joint(rows: &[Vec<f64>]) -> JointPmf {
        JointPmf::from_rows(
            Alphabet::indexed(rows.len()),
            Alphabet::indexed(rows[0].len()),
            rows,
        )
        .unwrap()
    }

    fn floor_half() -> JointPmf {
        // X uniform on {0..3}, Y = floor(X / 2).
        joint(&[
            vec![0.25, 0.0],
            vec![0.25, 0.0],
            vec![0.0, 0.25],
            vec![0.0, 0.25],
        ])
    }

    #[test]
    fn full_support_has_one_component() {
        let j = joint(&[vec![0.375, 0.125], vec![0.125, 0.375]]);
        let cp = common_part(&j);
        assert_eq!(cp.len(), 1);
        assert_eq!(gk_common_information(&j), 0.0);
    }

    #[test]
    fn block_diagonal_has_two_components() {
        let j = joint(&[
            vec![0.125, 0.125, 0.0, 0.0],
            vec![0.125, 0.125, 0.0, 0.0],
            vec![0.0, 0.0, 0.125, 0.125],
            vec![0.0, 0.0, 0.125, 0.125],
        ]);
        let cp = common_part(&j);
        assert_eq!(cp.p_u.probs(), &[0.5, 0.5]);
        assert_eq!(cp.u_of_x, vec![Some(0), Some(0), Some(1), Some(1)]);
        assert_eq!(cp.u_of_y, vec![Some(0), Some(0), Some(1), Some(1)]);
    }

    #[test]
    fn copy_has_common_information_equal_to_mutual_information() {
        let m = 5;
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 0.2 } else { 0.0 }).collect())
            .collect();
        let j = joint(&rows);
        assert!((gk_common_information(&j) - 5f64.ln()).abs() < 1e-14);
        assert!((gk_common_information(&j) - mutual_information(&j)).abs() < 1e-14);
        assert!(ci_equals_mi(&j));
    }

    #[test]
    fn floor_half_example() {
        let j = floor_half();
        assert!((gk_common_information(&j) - 2f64.ln()).abs() < 1e-15);
        assert!(ci_equals_mi(&j));
        assert_eq!(find_witness(&j), None);
    }

    #[test]
    fn zero_marginal_symbols_are_unassigned() {
        let j = joint(&[vec![0.5, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.0]]);
        let cp = common_part(&j);
        assert_eq!(cp.u_of_x[2], None);
        assert_eq!(cp.u_of_y[2], None);
        assert_eq!(cp.len(), 2);
    }

    #[test]
    fn product_joint_has_no_witness() {
        let j = joint(&[vec![0.12, 0.18], vec![0.28, 0.42]]);
        assert!(ci_equals_mi(&j));
        assert_eq!(find_witness(&j), None);
    }

    #[test]
    fn binary_symmetric_pair_has_witness() {
        let j = joint(&[vec![0.375, 0.125], vec![0.125, 0.375]]);
        assert!(!ci_equals_mi(&j));
        let w = find_witness(&j).unwrap();
        assert_eq!(w, Witness { x0: 0, x1: 0, y0: 0, y1: 1 });
    }

    #[test]
    fn construction_rejects_bad_params() {
        let j = joint(&[vec![0.375, 0.125], vec![0.125, 0.375]]);
        let mut p = WitnessReleaseParams::default_for(&j).unwrap();
        p.t = WitnessReleaseParams::t_upper_bound(&j, p.s, p.witness);
        assert!(witness_release_pair(&j, &p).is_err());
        p.t = 0.1;
        p.s = 1.0;
        assert!(witness_release_pair(&j, &p).is_err());
        assert!(WitnessReleaseParams::default_for(&floor_half()).is_err());
    }

    #[test]
    fn union_find_merges_transitively() {
        let mut uf = UnionFind::new(5);
        uf.union(0, 1);
        uf.union(3, 4);
        uf.union(1, 4);
        assert_eq!(uf.find(0), uf.find(3));
        assert_ne!(uf.find(2), uf.find(0));
    }
}
