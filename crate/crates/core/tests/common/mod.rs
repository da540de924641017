#![allow(dead_code)]

use privtrade::{Alphabet, Channel, JointPmf};
use rand::Rng;
use rand_distr::Exp1;

pub const LN2: f64 = std::f64::consts::LN_2;

pub fn simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

pub fn random_channel<R: Rng>(rng: &mut R, input: Alphabet, output: Alphabet) -> Channel {
    let rows = (0..input.len()).map(|_| simplex(rng, output.len())).collect();
    Channel::new(input, output, rows).unwrap()
}

pub fn random_joint<R: Rng>(rng: &mut R, nx: usize, ny: usize) -> JointPmf {
    JointPmf::new(
        vec![Alphabet::indexed(nx), Alphabet::indexed(ny)],
        simplex(rng, nx * ny),
    )
    .unwrap()
}

/// `ln m - p ln(m-1) - h(p)` written out directly.
pub fn sp_information(m: usize, p: f64) -> f64 {
    let mf = m as f64;
    let xlogx = |v: f64| if v > 0.0 { v * v.ln() } else { 0.0 };
    let off = if m > 1 { p / (mf - 1.0) } else { 0.0 };
    // Sum over the m^2 cells of P(x,y) ln(P(x,y) / (1/m^2)).
    let diag = mf * xlogx((1.0 - p) / mf) + (1.0 - p) * (2.0 * mf.ln());
    let rest = mf * (mf - 1.0) * xlogx(off / mf) + p * (2.0 * mf.ln());
    diag + rest
}

pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = privtrade::cli::run_with_io(
        std::iter::once("privtrade").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
