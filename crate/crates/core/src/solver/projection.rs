//! Turning inference and full-data mechanisms into output-perturbation mechanisms
//! with the same `(Y, Z)` law.

use crate::error::{Error, Result};
use crate::probability::{Alphabet, Channel, JointPmf};

/// Fills rows for `y` outside the support with the release marginal.
fn fill_absent(y: &Alphabet, z: &Alphabet, rows: Vec<Option<Vec<f64>>>, p_z: &[f64]) -> Channel {
    let rows = rows
        .into_iter()
        .map(|r| r.unwrap_or_else(|| p_z.to_vec()))
        .collect();
    Channel::from_rows_unchecked(y.clone(), z.clone(), rows)
}

fn release_marginal(rows: &[Option<Vec<f64>>], p_y: &[f64], nz: usize) -> Vec<f64> {
    let mut p_z = vec![0.0; nz];
    for (r, &py) in rows.iter().zip(p_y) {
        if let Some(r) = r {
            for (acc, v) in p_z.iter_mut().zip(r) {
                *acc += py * v;
            }
        }
    }
    p_z
}

/// `P_{Z'|Y}(z|y) = sum_x P_{Z|X}(z|x) P_{X|Y}(x|y)`.
pub fn project_inf_to_op(data: &JointPmf, mech_inf: &Channel) -> Result<Channel> {
    if mech_inf.input() != data.axis(0) {
        return Err(Error::AlphabetMismatch(
            "inference mechanism input must be the sensitive alphabet".into(),
        ));
    }
    let composed = data.condition(1)?.then(mech_inf)?;
    let p_y = data.marginal_pmf(1)?;
    let p_z = release_marginal(composed.rows(), p_y.probs(), mech_inf.output().len());
    Ok(fill_absent(data.axis(1), mech_inf.output(), composed.rows().to_vec(), &p_z))
}

/// `P_{Z'|Y}(z|y) = sum_x P_{Z|X,Y}(z|x,y) P_{X|Y}(x|y)`.
pub fn project_fd_to_op(data: &JointPmf, mech_fd: &Channel) -> Result<Channel> {
    let (x, y) = (data.axis(0), data.axis(1));
    if mech_fd.input() != &Alphabet::product(x, y) {
        return Err(Error::AlphabetMismatch(
            "full-data mechanism input must be the product alphabet X x Y".into(),
        ));
    }
    let (nx, ny, nz) = (x.len(), y.len(), mech_fd.output().len());
    let x_given_y = data.condition(1)?;
    let mut rows = Vec::with_capacity(ny);
    for yi in 0..ny {
        let Some(post) = x_given_y.row(yi) else {
            rows.push(None);
            continue;
        };
        let mut out = vec![0.0; nz];
        for (xi, &pxy) in post.iter().enumerate().take(nx) {
            if pxy == 0.0 {
                continue;
            }
            let r = mech_fd
                .row(xi * ny + yi)
                .ok_or_else(|| Error::MissingRow(mech_fd.input().label(xi * ny + yi).to_string()))?;
            for (acc, v) in out.iter_mut().zip(r) {
                *acc += pxy * v;
            }
        }
        rows.push(Some(out));
    }
    let p_y = data.marginal_pmf(1)?;
    let p_z = release_marginal(&rows, p_y.probs(), nz);
    Ok(fill_absent(y, mech_fd.output(), rows, &p_z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp2() -> JointPmf {
        JointPmf::from_rows(
            Alphabet::indexed(2),
            Alphabet::indexed(2),
            &[vec![0.375, 0.125], vec![0.125, 0.375]],
        )
        .unwrap()
    }

    #[test]
    fn identity_inference_mechanism_becomes_backward_channel() {
        let c = project_inf_to_op(&sp2(), &Channel::identity(Alphabet::indexed(2))).unwrap();
        assert_eq!(c.row(0).unwrap(), &[0.75, 0.25]);
        assert_eq!(c.row(1).unwrap(), &[0.25, 0.75]);
    }

    #[test]
    fn mechanism_ignoring_x_is_fixed() {
        let j = sp2();
        let xy = Alphabet::product(j.axis(0), j.axis(1));
        let op = Channel::new(
            Alphabet::indexed(2),
            Alphabet::indexed(2),
            vec![vec![0.9, 0.1], vec![0.3, 0.7]],
        )
        .unwrap();
        let fd = Channel::new(xy, Alphabet::indexed(2), (0..4).map(|i| op.row(i % 2).unwrap().to_vec()).collect()).unwrap();
        let back = project_fd_to_op(&j, &fd).unwrap();
        for y in 0..2 {
            for (a, b) in back.row(y).unwrap().iter().zip(op.row(y).unwrap()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unsupported_y_gets_release_marginal() {
        let j = JointPmf::from_rows(
            Alphabet::indexed(2),
            Alphabet::indexed(2),
            &[vec![0.5, 0.0], vec![0.5, 0.0]],
        )
        .unwrap();
        let mech = Channel::new(
            Alphabet::indexed(2),
            Alphabet::indexed(2),
            vec![vec![1.0, 0.0], vec![0.2, 0.8]],
        )
        .unwrap();
        let c = project_inf_to_op(&j, &mech).unwrap();
        assert_eq!(c.row(1).unwrap(), c.row(0).unwrap());
    }
}
