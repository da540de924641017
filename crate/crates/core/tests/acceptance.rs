//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each, and exits
//! nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{random_channel, random_joint, run_cli, sp_information, LN2};
use privtrade::axioms::{
    check_linkage, check_post_processing, dp_counterexample, dp_counterexample_triple, max_info_counterexample,
    random_markov_triple, random_markov_triple_over, two_bit_alphabet,
};
use privtrade::common_info::{binary_alphabet, ci_equals_mi, witness_release_pair, WitnessReleaseParams};
use privtrade::measures::{differential_privacy, distortion, information_privacy, information_privacy_sets};
use privtrade::probability::mutual_information;
use privtrade::solver::{
    evaluate, project_fd_to_op, solve_point, tradeoff_curve, Mechanism, Scenario, ScenarioKind, SolverOptions, Status,
};
use privtrade::symmetric_pair::{
    error_relation_check, fd_optimal_mechanism, inf_optimal_mechanism, markov_error_relation, op_optimal_mechanism,
    pi_fd_closed, pi_inf_closed, pi_op_closed, r_m, sp_joint, SPParams,
};
use privtrade::{Adjacency, AdjacencyRelation, Alphabet, Channel, DistortionMeasure, JointPmf, PrivacyMeasure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

const MI: PrivacyMeasure = PrivacyMeasure::MutualInformation;
const PE: DistortionMeasure = DistortionMeasure::ProbabilityOfError;

fn sp(m: usize, p: f64) -> SPParams {
    SPParams::new(m, p).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn eval_sp(kind: ScenarioKind, params: SPParams, mech: Channel) -> (f64, f64) {
    let s = Scenario::new(sp_joint(params).unwrap(), kind).unwrap();
    let m = Mechanism::new(&s, mech).unwrap();
    let (j, d) = evaluate(&s, &m, &MI, &PE).unwrap();
    (j.value(), d)
}

fn closed_form_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [2, 3, 5, 10] {
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let formula = r_m(sp(m, p));
            let direct = mutual_information(&sp_joint(sp(m, p)).unwrap());
            let oracle = sp_information(m, p).max(0.0);
            let err = (formula - direct).abs().max((formula - oracle).abs());
            worst = worst.max(err);
            ensure(err <= 1e-12, || format!("m={m} p={p}: r_m={formula} I={direct} oracle={oracle}"))?;
        }
    }
    Ok(format!("44 (m,p) pairs, max deviation {worst:.1e} nats"))
}

fn achievability() -> Outcome {
    let grid: Vec<f64> = (0..20).map(|k| k as f64 * 0.05).collect();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut check = |what: &str, kind: ScenarioKind, params: SPParams, delta: f64, closed: f64, mech: Channel| {
        let (j, d) = eval_sp(kind, params, mech);
        checked += 1;
        worst = worst.max((j - closed).abs());
        ensure((j - closed).abs() <= 1e-10 && d <= delta + 1e-12, || {
            format!("{what} m={} p={} delta={delta}: J={j} closed={closed} D={d}", params.m, params.p)
        })
    };
    for params in [sp(10, 0.4), sp(2, 0.25), sp(3, 0.2)] {
        for &delta in &grid {
            let v = pi_fd_closed(params, delta).unwrap().value.value();
            check("fd-add", ScenarioKind::FullData, params, delta, v, fd_optimal_mechanism(params, delta).unwrap())?;
        }
    }
    for params in [sp(2, 0.9), sp(3, 0.9), sp(5, 0.95)] {
        for &delta in &grid {
            let v = pi_fd_closed(params, delta).unwrap().value.value();
            check("fd-remove", ScenarioKind::FullData, params, delta, v, fd_optimal_mechanism(params, delta).unwrap())?;
        }
    }
    for params in [sp(10, 0.4), sp(2, 0.25), sp(3, 0.9)] {
        for &delta in &grid {
            let v = pi_op_closed(params, delta).unwrap().value.value();
            check("op", ScenarioKind::OutputPerturbation, params, delta, v, op_optimal_mechanism(params, delta).unwrap())?;
        }
    }
    let mut infinite = 0;
    for params in [sp(10, 0.4), sp(2, 0.8), sp(2, 0.1), sp(3, 0.05)] {
        for &delta in &grid {
            let v = pi_inf_closed(params, delta).unwrap().value;
            match inf_optimal_mechanism(params, delta).unwrap() {
                Some(mech) => check("inf", ScenarioKind::Inference, params, delta, v.value(), mech)?,
                None => {
                    ensure(v.is_infinite(), || format!("inf m={} p={} delta={delta}: no mechanism", params.m, params.p))?;
                    infinite += 1;
                }
            }
        }
    }
    Ok(format!("{checked} mechanisms, max |J - pi| {worst:.1e} nats, {infinite} infeasible points skipped"))
}

fn solver_vs_closed_form() -> Outcome {
    let opts = SolverOptions::default();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for p in [0.1, 0.25, 0.4] {
        let params = sp(2, p);
        for k in 1..=9 {
            let delta = k as f64 * 0.05;
            for (kind, closed) in [
                (ScenarioKind::FullData, pi_fd_closed(params, delta).unwrap().value),
                (ScenarioKind::OutputPerturbation, pi_op_closed(params, delta).unwrap().value),
                (ScenarioKind::Inference, pi_inf_closed(params, delta).unwrap().value),
            ] {
                let name = kind.name();
                let s = Scenario::new(sp_joint(params).unwrap(), kind).unwrap();
                let pt = solve_point(&s, &MI, &PE, delta, &opts).unwrap();
                n += 1;
                if closed.is_infinite() {
                    ensure(pt.status == Status::Infeasible, || format!("{name} p={p} delta={delta}: expected infeasible"))?;
                    continue;
                }
                let err = (pt.pi.value() - closed.value()).abs() / LN2;
                worst = worst.max(err);
                ensure(err <= 1e-3, || {
                    format!("{name} p={p} delta={delta}: solver {} vs closed {} nats", pt.pi.value(), closed.value())
                })?;
            }
        }
    }
    Ok(format!("{n} points, max deviation {worst:.1e} bits"))
}

fn parse_sp_curves(csv: &str) -> Vec<(f64, String, f64, String)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let pi = if f[2] == "inf" { f64::INFINITY } else { f[2].parse().unwrap() };
            (f[0].parse().unwrap(), f[1].to_string(), pi, f[4].to_string())
        })
        .collect()
}

fn preset_curves() -> Outcome {
    let (code, out, err) = run_cli(&["sp", "--m", "10", "--p", "0.4", "--fig2"]);
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    let rows = parse_sp_curves(&out);
    let curve = |name: &str| -> Vec<(f64, f64)> {
        rows.iter().filter(|r| r.1 == name).map(|r| (r.0, r.2)).collect()
    };
    let (fd, op, inf) = (curve("fd"), curve("op"), curve("inf"));
    ensure(fd.len() == 96 && op.len() == 96 && inf.len() == 96, || "expected 96 points per curve".into())?;
    let (m, p) = (10usize, 0.4);
    let slope = 1.0 - p * m as f64 / (m as f64 - 1.0);
    for i in 0..96 {
        let delta = fd[i].0;
        ensure(op[i].0 == delta && inf[i].0 == delta, || "grids differ".into())?;
        ensure(fd[i].1 <= op[i].1 && op[i].1 <= inf[i].1, || format!("ordering fails at delta={delta}"))?;
        let want_fd = if p + delta <= 0.9 { sp_information(m, p + delta) } else { 0.0 };
        let want_op = if delta < 0.9 { sp_information(m, p + delta * slope) } else { 0.0 };
        let want_inf = if delta < 0.4 {
            f64::INFINITY
        } else if delta < 0.9 {
            sp_information(m, (delta - p) / slope)
        } else {
            0.0
        };
        for (got, want, name) in [(fd[i].1, want_fd, "fd"), (op[i].1, want_op, "op"), (inf[i].1, want_inf, "inf")] {
            let ok = if want.is_infinite() { got.is_infinite() } else { (got - want.max(0.0)).abs() <= 1e-10 };
            ensure(ok, || format!("{name} at delta={delta}: {got} vs {want}"))?;
        }
        if delta >= 0.9 {
            ensure(fd[i].1 == 0.0 && op[i].1 == 0.0 && inf[i].1 == 0.0, || format!("nonzero at delta={delta}"))?;
        }
    }
    let first_finite = inf.iter().find(|r| r.1.is_finite()).unwrap().0;
    ensure(first_finite == 0.4, || format!("inf curve finite from {first_finite}"))?;
    Ok("3 curves x 96 points, fd <= op <= inf, inf = inf exactly for delta < 0.4".into())
}

fn hierarchy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let deltas = [0.1, 0.2, 0.3, 0.4, 0.5];
    let opts = SolverOptions::default();
    let tol = 2e-3 * LN2;
    let mut infeasible = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for trial in 0..50 {
        let data = random_joint(&mut rng, 3, 3);
        let curve = |kind: ScenarioKind| {
            let s = Scenario::new(data.clone(), kind).unwrap();
            tradeoff_curve(&s, &MI, &PE, &deltas, &opts).unwrap().points
        };
        let (fd, op, inf) = (curve(ScenarioKind::FullData), curve(ScenarioKind::OutputPerturbation), curve(ScenarioKind::Inference));
        for i in 0..deltas.len() {
            let (a, b, c) = (fd[i].pi, op[i].pi, inf[i].pi);
            if c.is_infinite() {
                infeasible += 1;
            } else {
                worst = worst.max(b.value() - c.value());
            }
            worst = worst.max(a.value() - b.value());
            ensure(a.value() <= b.value() + tol && b.value() <= c.value() + tol, || {
                format!("trial {trial} delta={}: fd={} op={} inf={}", deltas[i], a.value(), b.value(), c.value())
            })?;
        }
    }
    Ok(format!("250 points, worst violation {:.1e} bits, {infeasible} infinite inf points", worst / LN2))
}

fn counterexamples() -> Outcome {
    let t = max_info_counterexample();
    let maxinfo = PrivacyMeasure::MaximalInformationLeakage;
    let link = check_linkage(&maxinfo, &t).unwrap();
    ensure((link.rhs.value() / LN2 - 1.0).abs() <= 1e-12, || format!("I*(B;C) = {} bits", link.rhs.value() / LN2))?;
    ensure((link.lhs.value() / LN2 - 1.5).abs() <= 1e-12, || format!("I*(A;C) = {} bits", link.lhs.value() / LN2))?;
    ensure(!link.holds, || "I* linkage did not fail".into())?;

    let (_, b_map, mech) = dp_counterexample(0.1, 0.3, 0.6).unwrap();
    let rel = AdjacencyRelation::hamming(&two_bit_alphabet()).unwrap();
    let dp_bc = differential_privacy(&mech, &rel).unwrap().value();
    let dp_ac = differential_privacy(&b_map.then(&mech).unwrap(), &rel).unwrap().value();
    ensure((dp_bc - 3f64.ln()).abs() <= 1e-12, || format!("DP(B;C) = {dp_bc}"))?;
    ensure((dp_ac - 6f64.ln()).abs() <= 1e-12, || format!("DP(A;C) = {dp_ac}"))?;
    let dp = PrivacyMeasure::DifferentialPrivacy(Adjacency::Hamming);
    let link = check_linkage(&dp, &dp_counterexample_triple(0.1, 0.3, 0.6).unwrap()).unwrap();
    ensure(!link.holds && (link.lhs.value() - dp_ac).abs() <= 1e-12, || "DP linkage report wrong".into())?;

    for measure in ["max-info", "dp"] {
        let (code, out, err) = run_cli(&["check-axioms", "--measure", measure, "--trials", "1", "--seed", "0"]);
        ensure(code == 0, || format!("check-axioms {measure}: exit {code}: {err}"))?;
        let flagged = out.lines().any(|l| l.contains("\"linkage\"") && l.contains("\"expected-violation\""));
        ensure(flagged, || format!("check-axioms {measure} did not flag expected-violation"))?;
    }
    Ok("I* 1 vs 1.5 bits, DP ln 3 vs ln 6, both flagged expected-violation".into())
}

fn axiom_properties() -> Outcome {
    let mut worst: f64 = f64::INFINITY;
    let sizes = [(2, 2, 2), (3, 3, 3), (4, 3, 2), (2, 4, 3)];
    let both = [PrivacyMeasure::MutualInformation, PrivacyMeasure::InformationPrivacy, PrivacyMeasure::SibsonInfinity];
    for seed in 0..1000u64 {
        let t = random_markov_triple(seed, sizes[seed as usize % sizes.len()]).unwrap();
        for m in &both {
            for r in [check_post_processing(m, &t).unwrap(), check_linkage(m, &t).unwrap()] {
                worst = worst.min(r.margin);
                ensure(r.holds, || format!("{} {} fails on seed {seed}: margin {}", m, r.inequality, r.margin))?;
            }
        }
        let r = check_post_processing(&PrivacyMeasure::MaximalInformationLeakage, &t).unwrap();
        worst = worst.min(r.margin);
        ensure(r.holds, || format!("max-info post-processing fails on seed {seed}"))?;
    }
    let dp = PrivacyMeasure::DifferentialPrivacy(Adjacency::Hamming);
    for seed in 0..200u64 {
        let t = random_markov_triple_over(seed, two_bit_alphabet(), two_bit_alphabet(), two_bit_alphabet());
        let r = check_post_processing(&dp, &t).unwrap();
        worst = worst.min(r.margin);
        ensure(r.holds, || format!("dp post-processing fails on seed {seed}: margin {}", r.margin))?;
    }
    Ok(format!("1000 chains x 7 checks + 200 dp chains, min margin {worst:.1e} nats"))
}

fn ip_subsets() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let nx = 1 + trial % 4;
        let nz = 1 + (trial / 4) % 4;
        let j = random_joint(&mut rng, nx, nz);
        let a = information_privacy(&j).value();
        let b = information_privacy_sets(&j).unwrap().value();
        worst = worst.max((a - b).abs());
        ensure((a - b).abs() <= 1e-10, || format!("trial {trial} ({nx}x{nz}): {a} vs {b}"))?;
    }
    Ok(format!("200 joints, max deviation {worst:.1e} nats"))
}

fn projections_and_witness() -> Outcome {
    let x = Alphabet::indexed(4);
    let y = Alphabet::indexed(2);
    let probs = (0..8).map(|i| if (i / 2) / 2 == i % 2 { 0.25 } else { 0.0 }).collect();
    let data = JointPmf::new(vec![x.clone(), y.clone()], probs).unwrap();
    ensure(ci_equals_mi(&data), || "C != I on the floor(X/2) instance".into())?;
    let fd = Scenario::new(data.clone(), ScenarioKind::FullData).unwrap();
    let op = Scenario::new(data.clone(), ScenarioKind::OutputPerturbation).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = f64::NEG_INFINITY;
    for trial in 0..1000 {
        let mech = random_channel(&mut rng, Alphabet::product(&x, &y), y.clone());
        let projected = project_fd_to_op(&data, &mech).unwrap();
        let (j_fd, _) = evaluate(&fd, &Mechanism::new(&fd, mech).unwrap(), &MI, &PE).unwrap();
        let (j_op, _) = evaluate(&op, &Mechanism::new(&op, projected).unwrap(), &MI, &PE).unwrap();
        worst = worst.max(j_op.value() - j_fd.value());
        ensure(j_op.value() <= j_fd.value() + 1e-12, || format!("trial {trial}: {} > {}", j_op.value(), j_fd.value()))?;
    }

    let data = sp_joint(sp(2, 0.25)).unwrap();
    ensure(!ci_equals_mi(&data), || "C = I on SP(2, 0.25)".into())?;
    let params = WitnessReleaseParams::default_for(&data).unwrap();
    let (mech_fd, mech_op) = witness_release_pair(&data, &params).unwrap();
    let fd = Scenario::with_z_alphabet(data.clone(), ScenarioKind::FullData, binary_alphabet()).unwrap();
    let op = Scenario::with_z_alphabet(data.clone(), ScenarioKind::OutputPerturbation, binary_alphabet()).unwrap();
    let mech_fd = Mechanism::new(&fd, mech_fd).unwrap();
    let mech_op = Mechanism::new(&op, mech_op).unwrap();
    let yz_fd = fd.joint_xyz(&mech_fd).unwrap().marginal(&[1, 2]).unwrap();
    let yz_op = op.joint_xyz(&mech_op).unwrap().marginal(&[1, 2]).unwrap();
    let diff = yz_fd.probs().iter().zip(yz_op.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(diff <= 1e-12, || format!("(Y,Z) joints differ by {diff}"))?;
    let witness = DistortionMeasure::witness(yz_fd.clone());
    let (i_fd, d_fd) = evaluate(&fd, &mech_fd, &MI, &witness).unwrap();
    let (i_op, d_op) = evaluate(&op, &mech_op, &MI, &witness).unwrap();
    ensure(i_fd.value() <= 1e-9, || format!("I(X;Z) = {}", i_fd.value()))?;
    ensure(i_op.value() >= 1e-6, || format!("I(X;Z') = {}", i_op.value()))?;
    ensure(d_fd <= 1.0 && d_op <= 1.0, || format!("witness distortions {d_fd}, {d_op}"))?;
    // Any other output-perturbation release changes the (Y,Z) law and pays distortion 2.
    let other = Mechanism::new(&op, Channel::identity(data.axis(1).clone())).unwrap();
    ensure(distortion(&witness, &op.joint_xyz(&other).unwrap().marginal(&[1, 2]).unwrap()).unwrap() > 1.0, || {
        "witness distortion accepts a different release".into()
    })?;
    Ok(format!(
        "projection max increase {worst:.1e} nats over 1000 mechanisms; I(X;Z)={:.1e}, I(X;Z')={:.3e} nats",
        i_fd.value(),
        i_op.value()
    ))
}

fn error_relations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for (m, p) in [(2, 0.25), (3, 0.5), (5, 0.9), (10, 0.4)] {
        let params = sp(m, p);
        let a = params.alphabet();
        for _ in 0..1000 {
            let fd = random_channel(&mut rng, Alphabet::product(&a, &a), a.clone());
            let (lhs, rhs) = error_relation_check(params, &fd).unwrap();
            worst = worst.max((lhs - rhs).abs());
            ensure((lhs - rhs).abs() <= 1e-12, || format!("full-data relation m={m} p={p}: {lhs} vs {rhs}"))?;
            let inf = random_channel(&mut rng, a.clone(), a.clone());
            let (measured, predicted) = markov_error_relation(params, &inf).unwrap();
            worst = worst.max((measured - predicted).abs());
            ensure((measured - predicted).abs() <= 1e-12, || {
                format!("inference relation m={m} p={p}: {measured} vs {predicted}")
            })?;
        }
    }
    Ok(format!("4 (m,p) x 1000 mechanisms x 2 relations, max deviation {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("closed-form consistency", 1, closed_form_consistency),
        ("achievability", 10, achievability),
        ("solver vs closed form", 120, solver_vs_closed_form),
        ("frontier curves for m=10, p=0.4", 1, preset_curves),
        ("scenario hierarchy", 300, hierarchy),
        ("counterexamples", 1, counterexamples),
        ("axiom properties", 120, axiom_properties),
        ("information privacy over events", 30, ip_subsets),
        ("projection and common-information witness", 60, projections_and_witness),
        ("error-probability relations", 30, error_relations),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if took > Duration::from_secs(*limit) {
                Err(format!("took {took:.2?}, limit {limit} s ({msg})"))
            } else {
                Ok(msg)
            }
        });
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS {name} [{took:.2?}]: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} [{took:.2?}]: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
