//! `czkit` command line: measure generation, maximal functions, RBMO norms, CZ and main-lemma
//! decompositions, self-checks and calibration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use czkit::corpus;
use czkit::cubes::{find_cube_at_delta, Cube, DoublingParams};
use czkit::czdecomp::cz_decompose;
use czkit::io::{self, fmt17, ParamsFile};
use czkit::mainlemma::{auto_r0, decompose_main_with, instance_constants, packing_constant, ClaimThresholds, MainParams};
use czkit::maximal::{maximal_field, CanonicalFamily, MaximalKind};
use czkit::measure::{generate_measure, growth_constant, DiscreteMeasure, Generator};
use czkit::spaces::{doubling_family, h1_upper_bound, jn_profile, rbmo_norm, SampledFunction};
use czkit::suite;
use serde_json::{json, Value};

type M = DiscreteMeasure<f64>;
type F = SampledFunction<f64>;

#[derive(Parser)]
#[command(name = "czkit", version, about = "Calderon-Zygmund toolkit for finitely supported measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Grid,
    Cantor,
    Clustered,
    Geometric,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Grand,
    Hl,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a measure file.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Cantor depth.
        #[arg(long, default_value_t = 5)]
        depth: usize,
        /// Grid atoms per axis.
        #[arg(long, default_value_t = 16)]
        per_axis: usize,
        /// Cantor contraction ratio.
        #[arg(long, default_value_t = 1.0 / 3.0)]
        ratio: f64,
        /// Growth exponent; defaults to the natural one of the kind.
        #[arg(long)]
        n: Option<f64>,
        #[arg(long, default_value_t = 4)]
        clusters: usize,
        #[arg(long, default_value_t = 12)]
        per_cluster: usize,
        #[arg(long, default_value_t = 0.3)]
        spread: f64,
        /// Dyadic levels of the geometric measure.
        #[arg(long, default_value_t = 64)]
        levels: i32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Growth constants, search accuracy and default parameters of a measure.
    Analyze {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long = "R0", default_value = "auto")]
        r0: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of the cubes found by the doubling search: `(zQ, lQ, zR, lR, delta)`.
        #[arg(long)]
        delta_out: Option<PathBuf>,
    },
    /// Maximal function at every atom as `(x, lower, upper)` rows.
    Maximal {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "grand")]
        op: Op,
        #[arg(long, default_value_t = 2.0)]
        rho: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// RBMO norm estimate, with an optional John-Nirenberg profile.
    Rbmo {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of `(lambda, fraction)` on the heaviest doubling cube.
        #[arg(long)]
        jn: Option<PathBuf>,
    },
    /// Calderon-Zygmund decomposition at one level.
    Czd {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generation decomposition with the claim report.
    Mainlemma {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long = "R0", default_value = "auto")]
        r0: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Self-check suites over the corpus or one measure.
    Verify {
        /// One of measure, cubes, maximal, covering, spaces, czd, mainlemma, or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-measure the frozen thresholds over the corpus.
    Calibrate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Raised after the artifacts are written when some checked property failed.
#[derive(Debug)]
struct Violated(String);

impl std::fmt::Display for Violated {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "property violated: {}", self.0)
    }
}

impl std::error::Error for Violated {}

fn exit_code(e: &anyhow::Error) -> u8 {
    use czkit::Error as E;
    if e.downcast_ref::<Violated>().is_some() {
        return 2;
    }
    match e.downcast_ref::<E>() {
        Some(
            E::PropertyViolated { .. }
            | E::NestingViolation(_)
            | E::ConditionViolated { .. }
            | E::AdmissibilityViolation(_),
        ) => 2,
        _ => 3,
    }
}

fn set_threads() -> Result<()> {
    if let Ok(v) = std::env::var("CZKIT_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("CZKIT_THREADS={v}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().context("thread pool")?;
    }
    Ok(())
}

fn load_measure(path: &Path) -> Result<M> {
    Ok(io::load_measure(path)?)
}

/// The given function, or a seeded mean-zero one.
fn load_or_random(mu: &M, path: &Option<PathBuf>, seed: u64) -> Result<F> {
    Ok(match path {
        Some(p) => io::load_function(p, mu)?,
        None => corpus::random_mean_zero(mu, seed),
    })
}

fn parse_r0(spec: &str, mu: &M) -> Result<Cube<f64>> {
    if spec == "auto" {
        return Ok(auto_r0(mu));
    }
    let v: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("--R0 entry {s:?}")))
        .collect::<Result<_>>()?;
    if v.len() != mu.dim() + 1 || v[mu.dim()].is_nan() || v[mu.dim()] <= 0.0 {
        bail!(czkit::Error::Schema(format!("--R0 takes {} center coordinates and a positive side", mu.dim())));
    }
    Ok(Cube::new(v[..mu.dim()].to_vec(), v[mu.dim()]))
}

fn emit(out: &Option<PathBuf>, v: &Value) -> Result<()> {
    match out {
        Some(p) => io::write_json(p, v)?,
        None => print!("{}", io::to_json(v)?),
    }
    Ok(())
}

fn cube_json(q: &Cube<f64>) -> Value {
    json!({ "center": q.center, "side": q.side })
}

fn gen(kind: Kind, a: GenArgs) -> Result<M> {
    let g = match kind {
        Kind::Grid => Generator::Grid { dim: a.dim, per_axis: a.per_axis },
        Kind::Cantor => Generator::Cantor {
            dim: a.dim,
            depth: a.depth,
            ratio: a.ratio,
            n: a.n.unwrap_or(a.dim as f64 * 2f64.ln() / (1.0 / a.ratio).ln()),
        },
        Kind::Clustered => Generator::Clustered {
            dim: a.dim,
            clusters: a.clusters,
            per_cluster: a.per_cluster,
            spread: a.spread,
            n: a.n.unwrap_or(1.0),
        },
        Kind::Geometric => {
            if a.levels < 1 {
                bail!(czkit::Error::Schema("--levels must be positive".into()));
            }
            return Ok(corpus::geometric(a.levels));
        }
    };
    Ok(generate_measure(&g, a.seed)?)
}

struct GenArgs {
    dim: usize,
    depth: usize,
    per_axis: usize,
    ratio: f64,
    n: Option<f64>,
    clusters: usize,
    per_cluster: usize,
    spread: f64,
    levels: i32,
    seed: u64,
}

fn analyze(mu: &M, function: &Option<PathBuf>, r0: &Cube<f64>, delta_out: &Option<PathBuf>) -> Result<Value> {
    let growth = growth_constant(mu)?;
    let d = DoublingParams::standard(mu.dim());
    let ic = instance_constants(mu, r0, &d)?;
    let params = MainParams::derived(&ic, d);
    let fam = CanonicalFamily::new(mu);
    let mut v = json!({
        "atoms": mu.len(),
        "dim": mu.dim(),
        "n": mu.growth_exponent(),
        "total_mass": mu.total_mass(),
        "growth": {
            "ball_constant": growth.ball_constant,
            "cube_constant": growth.cube_constant,
            "ball_witness": { "center": growth.ball_witness.center, "scale": growth.ball_witness.scale },
            "cube_witness": { "center": growth.cube_witness.center, "scale": growth.cube_witness.scale },
            "degenerate": growth.degenerate,
        },
        "r0": cube_json(r0),
        "eps0": ic.eps0,
        "eps1": ic.eps1,
        "doubling_family_size": doubling_family(mu, &fam, &d).len(),
        "derived_params": ParamsFile::from_params(&params),
    });
    if let Some(p) = function {
        let f = io::load_function(p, mu)?;
        let est = rbmo_norm(mu, &f, &d)?;
        v["function"] = json!({
            "l1": f.l1(mu),
            "integral": f.integral(mu),
            "rbmo": est.value,
            "h1_upper": h1_upper_bound(mu, &f).map(|h| h.bound).ok(),
        });
    }
    if let Some(path) = delta_out {
        let two = r0.scale(2.0);
        let depths = czkit::covering::point_depths(mu, r0);
        let mut rows = Vec::new();
        for (x, &depth) in depths.iter().enumerate() {
            for frac in [0.25, 0.5, 0.75] {
                let alpha = depth * frac;
                if !(alpha > 0.0 && alpha.is_finite()) {
                    continue;
                }
                if let Ok(s) = find_cube_at_delta(mu, x, r0, alpha, &d) {
                    let mut row = s.cube.center.clone();
                    row.push(s.cube.side);
                    row.extend(two.center.iter().copied());
                    row.push(two.side);
                    row.push(s.delta);
                    rows.push(row);
                }
            }
        }
        let mut header: Vec<String> = (0..mu.dim()).map(|k| format!("zQ_{k}")).collect();
        header.push("lQ".into());
        header.extend((0..mu.dim()).map(|k| format!("zR_{k}")));
        header.extend(["lR".into(), "delta".into()]);
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        io::write_csv(path, &h, rows)?;
    }
    Ok(v)
}

fn maximal(mu: &M, f: &F, op: Op, rho: f64, out: &Path) -> Result<()> {
    let pts = mu.points();
    let (lower, upper) = match op {
        Op::Grand => (
            maximal_field(mu, f, MaximalKind::GrandLower, pts)?,
            maximal_field(mu, f, MaximalKind::GrandUpper, pts)?,
        ),
        Op::Hl => (
            maximal_field(mu, f, MaximalKind::HlLower { rho }, pts)?,
            maximal_field(mu, f, MaximalKind::HlUpper { rho }, pts)?,
        ),
    };
    let mut header: Vec<String> = if mu.dim() == 1 { vec!["x".into()] } else { (0..mu.dim()).map(|k| format!("x_{k}")).collect() };
    header.extend(["lower".into(), "upper".into()]);
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = pts.iter().enumerate().map(|(i, p)| {
        let mut r = p.clone();
        r.extend([lower[i], upper[i]]);
        r
    });
    io::write_csv(out, &h, rows)?;
    Ok(())
}

fn rbmo(mu: &M, f: &F, jn: &Option<PathBuf>) -> Result<Value> {
    let d = DoublingParams::standard(mu.dim());
    let est = rbmo_norm(mu, f, &d)?;
    let v = json!({
        "value": est.value,
        "oscillation": est.oscillation,
        "coherence": est.coherence,
        "oscillation_witness": est.oscillation_witness.as_ref().map(cube_json),
        "coherence_witness": est.coherence_witness.as_ref().map(|(q, r)| json!([cube_json(q), cube_json(r)])),
        "cube_family_size": est.cube_family_size,
    });
    if let Some(path) = jn {
        let fam = CanonicalFamily::new(mu);
        let family = doubling_family(mu, &fam, &d);
        let top = family
            .iter()
            .max_by(|a, b| a.mass.partial_cmp(&b.mass).unwrap().then(a.side.partial_cmp(&b.side).unwrap()))
            .context("empty doubling family")?;
        let q = fam.cube(mu, top.center, top.side);
        let m = czkit::spaces::mean(mu, f, &q)?;
        let spread = mu.atoms_in(&q).iter().map(|&i| (f.values[i] - m).abs()).fold(0.0, f64::max);
        let lambdas: Vec<f64> = (0..=40).map(|j| spread * j as f64 / 40.0).collect();
        let prof = jn_profile(mu, f, &q, &lambdas)?;
        io::write_csv(path, &["lambda", "fraction"], prof.into_iter().map(|(l, s)| vec![l, s]))?;
    }
    Ok(v)
}

fn czd(mu: &M, f: &F, lambda: f64, out: &Path) -> Result<bool> {
    let cz = cz_decompose(mu, f, lambda)?;
    let rep = cz.check(mu, f);
    let c = &cz.constants;
    let v = json!({
        "lambda": cz.lambda,
        "omega": cz.omega,
        "superlevel": cz.superlevel,
        "whitney": cz.whitney.cubes.iter().map(cube_json).collect::<Vec<_>>(),
        "whitney_overlap": cz.whitney.overlap_bound,
        "hosts": cz.hosts.iter().map(cube_json).collect::<Vec<_>>(),
        "host_steps": cz.host_steps,
        "alphas": cz.alphas.iter().map(|a| json!({ "support": a.support, "coeff": a.coeff })).collect::<Vec<_>>(),
        "partition_weights": cz.partition_weights,
        "g": cz.g.values,
        "b": cz.b.values,
        "constants": {
            "c14": c.c14, "c15": c.c15, "b": c.b, "c_g": c.c_g,
            "concentration": c.concentration, "half_mass": c.half_mass,
            "partition_gradient": c.partition_gradient,
        },
        "invariants": rep.checks.iter().map(|(n, ok, val)| json!({ "name": n, "pass": ok, "value": val })).collect::<Vec<_>>(),
        "all_pass": rep.all_pass(),
    });
    io::write_json(out, &v)?;
    Ok(rep.all_pass())
}

fn mainlemma(mu: &M, f: &F, params: &Option<PathBuf>, r0: &Cube<f64>, out: &Path) -> Result<bool> {
    let d = DoublingParams::standard(mu.dim());
    let ic = instance_constants(mu, r0, &d)?;
    let mut p = MainParams::derived(&ic, d);
    if let Some(path) = params {
        let o: ParamsFile = io::read_json(path)?;
        p = o.apply(&p);
    }
    let dec = decompose_main_with(mu, f, r0, &p, &ClaimThresholds::frozen())?;
    let rep = dec.report.clone().unwrap_or_default();
    let budget = dec.budget().into_iter().fold(0.0, f64::max);
    let v = json!({
        "r0": cube_json(&dec.r0),
        "params": ParamsFile::from_params(&dec.params),
        "instance": { "cube_constant": dec.instance.cube_constant, "eps0": dec.instance.eps0, "eps1": dec.instance.eps1 },
        "fnorm": dec.fnorm,
        "retries": dec.retries,
        "residual": dec.residual(),
        "corrected_residual": dec.corrected_residual(),
        "f_l1": dec.f.l1(&dec.measure),
        "budget_max": budget,
        "budget_ratio": budget / (dec.params.a * dec.fnorm),
        "packing": packing_constant(&dec).0,
        "volume_cubes": dec.volume_cubes(),
        "generations": dec.generations.iter().map(|g| io::generation_record(&g.generation)).collect::<Vec<_>>(),
        "h0": dec.h0.values,
        "claims": rep.checks,
        "all_pass": rep.all_pass(),
        "ledger": dec.ledger,
    });
    io::write_json(out, &v)?;
    Ok(rep.all_pass())
}

fn verify(which: &str, measure: &Option<PathBuf>, out: &Option<PathBuf>) -> Result<bool> {
    let insts: Vec<(String, M)> = match measure {
        Some(p) => vec![(p.display().to_string(), load_measure(p)?)],
        None => corpus::corpus::<f64>()?.into_iter().map(|i| (i.id.to_string(), i.measure)).collect(),
    };
    let names: Vec<&str> = if which == "all" { suite::SUITES.to_vec() } else { vec![which] };
    if let Some(bad) = names.iter().find(|n| !suite::SUITES.contains(n)) {
        bail!(czkit::Error::Schema(format!("unknown suite {bad}; expected one of {:?} or all", suite::SUITES)));
    }
    let mut all = Vec::new();
    for n in names {
        for c in suite::verify_suite(n, &insts)? {
            println!("[{}] {} / {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.suite, c.name, c.detail);
            all.push(c);
        }
    }
    let ok = all.iter().all(|c| c.pass);
    if out.is_some() {
        emit(out, &serde_json::to_value(&all)?)?;
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<()> {
    set_threads()?;
    match cli.command {
        Command::Gen { kind, dim, depth, per_axis, ratio, n, clusters, per_cluster, spread, levels, seed, out } => {
            let a = GenArgs { dim, depth, per_axis, ratio, n, clusters, per_cluster, spread, levels, seed };
            let mu = gen(kind, a)?;
            let file = io::MeasureFile::from_measure(&mu);
            match out {
                Some(p) => io::write_json(&p, &file)?,
                None => print!("{}", io::to_json(&file)?),
            }
        }
        Command::Analyze { measure, function, r0, out, delta_out } => {
            let mu = load_measure(&measure)?;
            let r0 = parse_r0(&r0, &mu)?;
            emit(&out, &analyze(&mu, &function, &r0, &delta_out)?)?;
        }
        Command::Maximal { measure, function, op, rho, seed, out } => {
            let mu = load_measure(&measure)?;
            let f = load_or_random(&mu, &function, seed)?;
            maximal(&mu, &f, op, rho, &out)?;
        }
        Command::Rbmo { measure, function, seed, out, jn } => {
            let mu = load_measure(&measure)?;
            let f = load_or_random(&mu, &function, seed)?;
            emit(&out, &rbmo(&mu, &f, &jn)?)?;
        }
        Command::Czd { measure, function, lambda, seed, out } => {
            let mu = load_measure(&measure)?;
            let f = load_or_random(&mu, &function, seed)?;
            if !czd(&mu, &f, lambda, &out)? {
                bail!(Violated(format!("decomposition invariants, see {}", out.display())));
            }
        }
        Command::Mainlemma { measure, function, params, r0, seed, out } => {
            let mu = load_measure(&measure)?;
            let f = load_or_random(&mu, &function, seed)?;
            let r0 = parse_r0(&r0, &mu)?;
            if !mainlemma(&mu, &f, &params, &r0, &out)? {
                bail!(Violated(format!("claims, see {}", out.display())));
            }
        }
        Command::Verify { suite, measure, out } => {
            if !verify(&suite, &measure, &out)? {
                bail!(Violated(format!("suite {suite}")));
            }
        }
        Command::Calibrate { out } => {
            let cal = suite::calibrate(|m| eprintln!("{m}"))?;
            match out {
                Some(p) => io::write_json(&p, &cal)?,
                None => print!("{}", io::to_json(&cal)?),
            }
            for note in &cal.notes {
                eprintln!("note: {note}");
            }
            eprintln!("c_easy {}", fmt17(cal.c_easy));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
