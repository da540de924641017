//! Command-line front end. Exit codes: 0 on success, 1 when a guaranteed inequality
//! fails, 2 on bad input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::axioms::{
    check_linkage, check_post_processing, dp_counterexample_triple, guaranteed, max_info_counterexample,
    random_markov_triple, random_markov_triple_over, two_bit_alphabet, AxiomReport, MarkovTriple,
};
use crate::common_info::{ci_equals_mi, common_part, gk_common_information, find_witness};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::io;
use crate::measures::{
    differential_privacy, leakage, Adjacency, AdjacencyRelation, DistortionMeasure, PrivacyMeasure,
};
use crate::probability::{mutual_information, Alphabet, Tolerances};
use crate::solver::{
    tradeoff_curve, tradeoff_curve_oracle, Scenario, ScenarioKind, SolverOptions, TradeoffCurve,
};
use crate::symmetric_pair::{pi_closed, SPParams};

const EXIT_OK: i32 = 0;
const EXIT_VIOLATION: i32 = 1;
const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "privtrade", version, about = "Privacy-utility tradeoffs for finite-alphabet data release")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Units for JSON output. CSV output always carries both.
    #[arg(long, global = true, value_enum, default_value_t = Unit::Both)]
    unit: Unit,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Unit {
    Nats,
    Bits,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate privacy measures on a joint (X, Z) or a channel P_{Z|X}.
    Measure(MeasureArgs),
    /// Solve the tradeoff over a delta grid.
    Tradeoff(TradeoffArgs),
    /// Gacs-Korner common part and the equality test C(X;Y) = I(X;Y).
    CommonInfo(CommonInfoArgs),
    /// Check post-processing and linkage on random Markov chains.
    CheckAxioms(CheckAxiomsArgs),
    /// Closed-form frontiers for the symmetric pair SP(m, p).
    Sp(SpArgs),
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// mi, max-info, sibson, ip, dp or all (repeatable).
    #[arg(long, required = true)]
    privacy: Vec<String>,
    #[arg(long, conflicts_with = "channel", required_unless_present = "channel")]
    joint: Option<PathBuf>,
    /// Channel P_{Z|X}; only differential privacy can be computed from it.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Adjacency as a JSON list of label pairs; defaults to Hamming distance one.
    #[arg(long)]
    adjacency: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Fd,
    Op,
    Inf,
    Custom,
}

#[derive(Debug, Args)]
struct TradeoffArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    /// Observation channel P_{W|X,Y} for the custom scenario.
    #[arg(long, required_if_eq("scenario", "custom"))]
    observation: Option<PathBuf>,
    #[arg(long, default_value = "mi")]
    privacy: String,
    /// prob-error, cond-entropy or expected:<matrix.json>.
    #[arg(long, default_value = "prob-error")]
    distortion: String,
    /// a:b:step, a comma-separated list, or a single value.
    #[arg(long)]
    deltas: String,
    /// Release alphabet size; defaults to |Y|.
    #[arg(long)]
    z_size: Option<usize>,
    /// Use the exhaustive grid oracle instead of the convex solver.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 0.005)]
    resolution: f64,
    #[arg(long)]
    emit_mechanism: Option<PathBuf>,
    #[arg(long, default_value_t = SolverOptions::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value_t = SolverOptions::default().gap_tol)]
    gap_tol: f64,
    #[arg(long, default_value_t = SolverOptions::default().restarts)]
    restarts: usize,
}

#[derive(Debug, Args)]
struct CommonInfoArgs {
    joint: PathBuf,
}

#[derive(Debug, Args)]
struct CheckAxiomsArgs {
    #[arg(long)]
    measure: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Alphabet sizes |A|,|B|,|C| for random chains (ignored for dp).
    #[arg(long, default_value = "3,3,3")]
    sizes: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SpScenario {
    Fd,
    Op,
    Inf,
    All,
}

#[derive(Debug, Args)]
struct SpArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    deltas: Option<String>,
    #[arg(long, value_enum)]
    scenario: Option<SpScenario>,
    /// m = 10, p = 0.4, all scenarios, delta = 0:0.95:0.01 unless overridden.
    #[arg(long)]
    fig2: bool,
}

/// Runs with the process's stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with_io<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let mut out = Output {
        body: Vec::new(),
        warnings: Vec::new(),
    };
    let result = match &cli.command {
        Command::Measure(a) => measure(a, &mut out),
        Command::Tradeoff(a) => tradeoff(&cli, a, &mut out),
        Command::CommonInfo(a) => common_info(&cli, a, &mut out),
        Command::CheckAxioms(a) => check_axioms(&cli, a, &mut out),
        Command::Sp(a) => sp(a, &mut out),
    };
    for w in &out.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &out.body),
        None => stdout.write_all(&out.body),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_INPUT;
    }
    code
}

struct Output {
    body: Vec<u8>,
    warnings: Vec<String>,
}

/// `v` with 12 significant digits, `inf` for infinity, no trailing zeros.
pub fn format_sig(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    let s = if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // Rounding can carry into a new digit (9.99.. -> 10.0); the extra digit is a zero.
        trim_zeros(&s)
    } else {
        let s = format!("{v:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        format!("{}e{e}", trim_zeros(mantissa))
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn ext(v: ExtReal) -> String {
    format_sig(v.value())
}

fn bits(v: ExtReal) -> String {
    format_sig(v.to_bits_unit().value())
}

/// Parses `a:b:step`, a comma-separated list, or one value. Grid points are rounded to
/// twelve decimals so that e.g. `0:1:0.1` yields exactly `0.3`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("`{s}` is not a number")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step.is_nan() || step <= 0.0 || b < a || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "grid `{spec}` needs finite a <= b and step > 0"
                )));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            (0..=n)
                .map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12)
                .collect()
        }
        [_] => spec.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::InvalidParameter(format!("cannot parse grid `{spec}`"))),
    };
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    Ok(values)
}

fn read(path: &Path) -> Result<String> {
    io::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Json(j) => Error::InvalidParameter(format!("{}: malformed JSON: {j}", path.display())),
        other => other,
    })
}

fn csv_writer(body: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(body)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn measure(a: &MeasureArgs, out: &mut Output) -> Result<i32> {
    let mut names: Vec<String> = Vec::new();
    for p in &a.privacy {
        if p == "all" {
            names.extend(["mi", "max-info", "sibson", "ip", "dp"].map(String::from));
        } else {
            names.push(p.clone());
        }
    }
    let explicit_all = a.privacy.iter().any(|p| p == "all");
    let mut w = csv_writer(&mut out.body);
    w.write_record(["measure", "nats", "bits"]).map_err(csv_err)?;

    if let Some(path) = &a.channel {
        let channel = with_path(path, io::channel_from_json(&read(path)?))?;
        for name in &names {
            let m: PrivacyMeasure = name.parse()?;
            if !matches!(m, PrivacyMeasure::DifferentialPrivacy(_)) {
                if explicit_all {
                    continue;
                }
                return Err(Error::Unsupported(format!(
                    "`{name}` needs a joint distribution; only dp accepts --channel"
                )));
            }
            let rel = adjacency(a, channel.input())?;
            let v = differential_privacy(&channel, &rel)?;
            w.write_record([name.as_str(), &ext(v), &bits(v)]).map_err(csv_err)?;
        }
    } else {
        let path = a.joint.as_ref().expect("clap enforces joint or channel");
        let joint = with_path(path, io::joint_from_json(&read(path)?))?;
        if joint.arity() != 2 {
            return Err(Error::UnsupportedArity(joint.arity()));
        }
        for name in &names {
            let mut m: PrivacyMeasure = name.parse()?;
            if let PrivacyMeasure::DifferentialPrivacy(_) = m {
                match adjacency(a, joint.axis(0)) {
                    Ok(rel) => m = PrivacyMeasure::DifferentialPrivacy(Adjacency::Explicit(rel)),
                    Err(e) if explicit_all => {
                        out.warnings.push(format!("skipping dp: {e}"));
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            }
            let v = leakage(&m, &joint)?;
            w.write_record([name.as_str(), &ext(v), &bits(v)]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn adjacency(a: &MeasureArgs, alphabet: &Alphabet) -> Result<AdjacencyRelation> {
    match &a.adjacency {
        Some(path) => with_path(path, io::adjacency_from_json(&read(path)?, alphabet)),
        None => AdjacencyRelation::hamming(alphabet),
    }
}

fn parse_distortion(spec: &str) -> Result<(DistortionMeasure, Option<Alphabet>)> {
    Ok(match spec {
        "prob-error" => (DistortionMeasure::ProbabilityOfError, None),
        "cond-entropy" => (DistortionMeasure::ConditionalEntropy, None),
        s => match s.strip_prefix("expected:") {
            Some(path) => {
                let path = Path::new(path);
                let m = with_path(path, io::distortion_from_json(&read(path)?))?;
                (DistortionMeasure::ExpectedDistortion(m.d), Some(m.z_alphabet))
            }
            None => {
                return Err(Error::InvalidParameter(format!(
                    "unknown distortion `{s}` (expected prob-error, cond-entropy or expected:<file>)"
                )))
            }
        },
    })
}

fn tradeoff(cli: &Cli, a: &TradeoffArgs, out: &mut Output) -> Result<i32> {
    let data = with_path(&a.data, io::joint_from_json(&read(&a.data)?))?;
    if data.arity() != 2 {
        return Err(Error::UnsupportedArity(data.arity()));
    }
    let kind = match a.scenario {
        ScenarioArg::Fd => ScenarioKind::FullData,
        ScenarioArg::Op => ScenarioKind::OutputPerturbation,
        ScenarioArg::Inf => ScenarioKind::Inference,
        ScenarioArg::Custom => {
            let path = a.observation.as_ref().expect("clap enforces observation");
            ScenarioKind::Custom(with_path(path, io::channel_from_json(&read(path)?))?)
        }
    };
    let (dist, z_from_matrix) = parse_distortion(&a.distortion)?;
    let y = data.axis(1).clone();
    let z = match (z_from_matrix, a.z_size) {
        (Some(z), Some(k)) if z.len() != k => {
            return Err(Error::InvalidParameter(format!(
                "--z-size {k} disagrees with the {}-column distortion matrix",
                z.len()
            )))
        }
        (Some(z), _) => z,
        (None, Some(0)) => return Err(Error::EmptyAlphabet),
        (None, Some(k)) if k != y.len() => Alphabet::indexed(k),
        (None, _) => y,
    };
    let privacy: PrivacyMeasure = a.privacy.parse()?;
    let scenario = Scenario::with_z_alphabet(data, kind, z)?;
    let deltas = parse_grid(&a.deltas)?;
    let curve: TradeoffCurve = if a.oracle {
        tradeoff_curve_oracle(&scenario, &privacy, &dist, &deltas, a.resolution)?
    } else {
        let opts = SolverOptions {
            max_iters: a.max_iters,
            gap_tol: a.gap_tol,
            restarts: a.restarts,
            seed: cli.seed,
        };
        tradeoff_curve(&scenario, &privacy, &dist, &deltas, &opts)?
    };
    out.warnings.extend(curve.warnings.iter().cloned());

    let mut w = csv_writer(&mut out.body);
    w.write_record(["delta", "pi_nats", "pi_bits", "status", "gap"]).map_err(csv_err)?;
    for p in &curve.points {
        w.write_record([
            format_sig(p.delta),
            ext(p.pi),
            bits(p.pi),
            p.status.to_string(),
            format_sig(p.gap),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    drop(w);

    if let Some(path) = &a.emit_mechanism {
        let mechs: Vec<Value> = curve
            .points
            .iter()
            .map(|p| {
                p.mechanism
                    .as_ref()
                    .map_or(Value::Null, |m| io::channel_to_value(m.channel()))
            })
            .collect();
        let doc = if mechs.len() == 1 {
            mechs.into_iter().next().expect("one point")
        } else {
            Value::Array(mechs)
        };
        std::fs::write(path, format!("{doc}\n"))?;
    }
    Ok(EXIT_OK)
}

fn unit_fields(obj: &mut Map<String, Value>, key: &str, nats: f64, unit: Unit) {
    let v = ExtReal::new(nats);
    if unit != Unit::Bits {
        obj.insert(format!("{key}_nats"), json!(v));
    }
    if unit != Unit::Nats {
        obj.insert(format!("{key}_bits"), json!(v.to_bits_unit()));
    }
}

fn common_info(cli: &Cli, a: &CommonInfoArgs, out: &mut Output) -> Result<i32> {
    let joint = with_path(&a.joint, io::joint_from_json(&read(&a.joint)?))?;
    if joint.arity() != 2 {
        return Err(Error::UnsupportedArity(joint.arity()));
    }
    let s = Tolerances::DEFAULT.support;
    if let Some(p) = joint.mass_in_band(s, 10.0 * s) {
        out.warnings.push(format!(
            "probability {p:e} lies just above the support threshold {s:e}; the component structure may be fragile"
        ));
    }
    let cp = common_part(&joint);
    let mut obj = Map::new();
    unit_fields(&mut obj, "c", gk_common_information(&joint), cli.unit);
    unit_fields(&mut obj, "i", mutual_information(&joint), cli.unit);
    obj.insert("ci_equals_mi".into(), json!(ci_equals_mi(&joint)));
    let labels = |alphabet: &Alphabet, map: &[Option<usize>]| -> Value {
        Value::Object(
            alphabet
                .labels()
                .iter()
                .zip(map)
                .map(|(l, u)| (l.clone(), json!(u.map(|u| cp.u_alphabet.label(u)))))
                .collect(),
        )
    };
    obj.insert("u_of_x".into(), labels(joint.axis(0), &cp.u_of_x));
    obj.insert("u_of_y".into(), labels(joint.axis(1), &cp.u_of_y));
    obj.insert(
        "p_u".into(),
        Value::Object(
            cp.u_alphabet
                .labels()
                .iter()
                .zip(cp.p_u.probs())
                .map(|(l, p)| (l.clone(), json!(p)))
                .collect(),
        ),
    );
    let witness = find_witness(&joint).map(|w| {
        json!({
            "x0": joint.axis(0).label(w.x0),
            "x1": joint.axis(0).label(w.x1),
            "y0": joint.axis(1).label(w.y0),
            "y1": joint.axis(1).label(w.y1),
        })
    });
    obj.insert("witness".into(), witness.unwrap_or(Value::Null));
    obj.insert("warnings".into(), json!(out.warnings));
    writeln!(out.body, "{}", Value::Object(obj))?;
    Ok(EXIT_OK)
}

fn parse_sizes(spec: &str) -> Result<(usize, usize, usize)> {
    let v: Vec<usize> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::InvalidParameter(format!("bad alphabet size `{s}`")))
        })
        .collect::<Result<_>>()?;
    match v.as_slice() {
        [a, b, c] => Ok((*a, *b, *c)),
        _ => Err(Error::InvalidParameter(format!("--sizes needs three values, got `{spec}`"))),
    }
}

fn report_line(trial: usize, source: &str, r: &AxiomReport, label: &str, unit: Unit) -> Value {
    let mut obj = Map::new();
    obj.insert("trial".into(), json!(trial));
    obj.insert("source".into(), json!(source));
    obj.insert("measure".into(), json!(r.measure));
    obj.insert("inequality".into(), json!(r.inequality));
    for (key, v) in [("lhs", r.lhs), ("rhs", r.rhs)] {
        if unit != Unit::Bits {
            obj.insert(format!("{key}_nats"), json!(v));
        }
        if unit != Unit::Nats {
            obj.insert(format!("{key}_bits"), json!(v.to_bits_unit()));
        }
    }
    unit_fields(&mut obj, "margin", r.margin, unit);
    obj.insert("holds".into(), json!(r.holds));
    obj.insert("label".into(), json!(label));
    Value::Object(obj)
}

fn check_axioms(cli: &Cli, a: &CheckAxiomsArgs, out: &mut Output) -> Result<i32> {
    let measure: PrivacyMeasure = a.measure.parse()?;
    let sizes = parse_sizes(&a.sizes)?;
    let is_dp = matches!(measure, PrivacyMeasure::DifferentialPrivacy(_));
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut code = EXIT_OK;
    for trial in 0..a.trials {
        let seed: u64 = rng.random();
        let (source, triple): (&str, MarkovTriple) = match (&measure, trial) {
            (PrivacyMeasure::MaximalInformationLeakage, 0) => ("max-info-counterexample", max_info_counterexample()),
            (PrivacyMeasure::DifferentialPrivacy(_), 0) => {
                ("dp-counterexample", dp_counterexample_triple(0.1, 0.3, 0.6)?)
            }
            _ if is_dp => (
                "random",
                random_markov_triple_over(seed, two_bit_alphabet(), two_bit_alphabet(), Alphabet::indexed(2)),
            ),
            _ => ("random", random_markov_triple(seed, sizes)?),
        };
        for r in [check_post_processing(&measure, &triple)?, check_linkage(&measure, &triple)?] {
            let label = if r.holds {
                "holds"
            } else if guaranteed(&measure, r.inequality) {
                code = EXIT_VIOLATION;
                "violation"
            } else {
                "expected-violation"
            };
            writeln!(out.body, "{}", report_line(trial, source, &r, label, cli.unit))?;
        }
    }
    Ok(code)
}

fn sp(a: &SpArgs, out: &mut Output) -> Result<i32> {
    let (m, p, deltas, scenario) = if a.fig2 {
        (
            a.m.unwrap_or(10),
            a.p.unwrap_or(0.4),
            a.deltas.clone().unwrap_or_else(|| "0:0.95:0.01".into()),
            a.scenario.unwrap_or(SpScenario::All),
        )
    } else {
        let missing = |what: &str| Error::InvalidParameter(format!("sp needs --{what} (or --fig2)"));
        (
            a.m.ok_or_else(|| missing("m"))?,
            a.p.ok_or_else(|| missing("p"))?,
            a.deltas.clone().ok_or_else(|| missing("deltas"))?,
            a.scenario.unwrap_or(SpScenario::All),
        )
    };
    let params = SPParams::new(m, p)?;
    let deltas = parse_grid(&deltas)?;
    let kinds: Vec<ScenarioKind> = match scenario {
        SpScenario::Fd => vec![ScenarioKind::FullData],
        SpScenario::Op => vec![ScenarioKind::OutputPerturbation],
        SpScenario::Inf => vec![ScenarioKind::Inference],
        SpScenario::All => vec![
            ScenarioKind::FullData,
            ScenarioKind::OutputPerturbation,
            ScenarioKind::Inference,
        ],
    };
    let mut w = csv_writer(&mut out.body);
    w.write_record(["delta", "scenario", "pi_nats", "pi_bits", "branch", "status"])
        .map_err(csv_err)?;
    for kind in &kinds {
        for &delta in &deltas {
            let r = pi_closed(kind, params, delta)?;
            let status = if r.value.is_infinite() { "infeasible" } else { "optimal" };
            w.write_record([
                format_sig(delta),
                kind.name().to_string(),
                ext(r.value),
                bits(r.value),
                r.branch.to_string(),
                status.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(EXIT_OK)
}
