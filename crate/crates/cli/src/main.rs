//! `muckenhoupt`: batch front-end for generating inputs, computing
//! constants and operators, running verification suites and the
//! self-improvement pipeline.
//!
//! Exit codes: 0 when every assertion passes, 1 when an assertion fails,
//! 2 on usage or configuration errors.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use muckenhoupt::family::{random_nonnegative, random_signs, standard_family};
use muckenhoupt::selfimprove::self_improve_report;
use muckenhoupt::space::doubling_with_masses;
use muckenhoupt::verify::{run_suite, Case, Suite, VerifyConfig};
use muckenhoupt::weights::{lognormal_weight, power_weight, weight_doubling_check};
use muckenhoupt::whitney::check_truncation_bounds;
use muckenhoupt::{
    ap_constant, generate, level_set, maximal, truncate, whitney_cover, FiniteMetricMeasureSpace, MeasureSpec,
    ScalarField, SelfImprovementConfig, SpaceKind, Strategy, Weight,
};

use report::{emit, read_input, write_artifact, Envelope, Format, InputRecord, Table};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "muckenhoupt", version, about = "Muckenhoupt weights on finite metric measure spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a space, weight or function file (JSON).
    Generate {
        #[command(subcommand)]
        what: Generate,
    },
    /// Compute a constant, operator or decomposition for the given inputs.
    Compute(ComputeArgs),
    /// Run an invariant suite; exit code 1 if any check fails.
    Verify(VerifyArgs),
    /// Run the self-improvement pipeline.
    Selfimprove(SelfImproveArgs),
}

#[derive(Args)]
struct GenOut {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MeasureArgs {
    /// Point masses: uniform, or independent uniform draws in [lo, hi].
    #[arg(long, value_enum, default_value_t = MeasureKind::Uniform)]
    measure: MeasureKind,
    #[arg(long, default_value_t = 0.5)]
    measure_lo: f64,
    #[arg(long, default_value_t = 2.0)]
    measure_hi: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureKind {
    Uniform,
    Random,
}

impl MeasureArgs {
    fn spec(&self) -> MeasureSpec {
        match self.measure {
            MeasureKind::Uniform => MeasureSpec::Uniform,
            MeasureKind::Random => MeasureSpec::Random { lo: self.measure_lo, hi: self.measure_hi },
        }
    }
}

#[derive(Subcommand)]
enum Generate {
    /// n equispaced points on [a, b], endpoints included.
    Grid1d {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        b: f64,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        out: GenOut,
    },
    /// Midpoints of n equal cells of [a, b].
    Grid1dMidpoint {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        b: f64,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        out: GenOut,
    },
    /// Integer lattice nx x ny with the Euclidean metric.
    Grid2d {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        out: GenOut,
    },
    /// n uniform points in the unit cube of the given dimension.
    RandomEuclidean {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        out: GenOut,
    },
    /// Leaves of a complete tree with the lowest-common-ancestor metric.
    Ultrametric {
        #[arg(long)]
        branching: usize,
        #[arg(long)]
        depth: u32,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        out: GenOut,
    },
    /// w(x) = |x|^alpha over a space with one-dimensional coordinates.
    PowerWeight {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[command(flatten)]
        out: GenOut,
    },
    /// Independent log-normal weight values.
    LognormalWeight {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[command(flatten)]
        out: GenOut,
    },
    /// A seeded random function: nonnegative uniform values, or random signs.
    Function {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        signs: bool,
        #[command(flatten)]
        out: GenOut,
    },
}

#[derive(Args)]
struct Output {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ComputeWhat {
    Ap,
    Doubling,
    Maximal,
    Whitney,
    Truncate,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(value_enum)]
    what: ComputeWhat,
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    weight: Option<PathBuf>,
    #[arg(long)]
    function: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    p: f64,
    /// Level for whitney (domain E_t = {Mf > t}) and truncate.
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Duality,
    Holder,
    Lerner,
    Whitney,
    Layercake,
    Oracle,
    Witness,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Duality => Suite::Duality,
            SuiteArg::Holder => Suite::Holder,
            SuiteArg::Lerner => Suite::Lerner,
            SuiteArg::Whitney => Suite::Whitney,
            SuiteArg::Layercake => Suite::Layercake,
            SuiteArg::Oracle => Suite::Oracle,
            SuiteArg::Witness => Suite::Witness,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: SuiteArg,
    /// Run on this space instead of the seeded random corpus.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Weight for `--space`; constant 1 when omitted.
    #[arg(long, requires = "space")]
    weight: Option<PathBuf>,
    /// Test functions for `--space` (repeatable); seeded random when omitted.
    #[arg(long, requires = "space")]
    function: Vec<PathBuf>,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    p: f64,
    /// Single eps for the layer-cake identities.
    #[arg(long)]
    eps: Option<f64>,
    /// Number of seeded random cases when no space is given.
    #[arg(long, default_value_t = 12)]
    cases: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SelfImproveArgs {
    #[arg(long)]
    space: PathBuf,
    /// Constant 1 when omitted.
    #[arg(long)]
    weight: Option<PathBuf>,
    /// Test family (repeatable); the standard family when omitted.
    #[arg(long)]
    function: Vec<PathBuf>,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    p: f64,
    /// Number of Mf quantiles for the explicit truncations.
    #[arg(long = "t-grid", default_value_t = 9)]
    t_grid: usize,
    #[arg(long, default_value_t = 0.9)]
    safety: f64,
    /// Random members of the standard family.
    #[arg(long, default_value_t = 16)]
    random: usize,
    #[command(flatten)]
    output: Output,
}

fn load_space(path: &Path, inputs: &mut Vec<InputRecord>) -> Result<FiniteMetricMeasureSpace> {
    let text = read_input("space", path, inputs)?;
    FiniteMetricMeasureSpace::from_json(&text).with_context(|| format!("parsing space {}", path.display()))
}

fn load_weight(path: Option<&Path>, n: usize, inputs: &mut Vec<InputRecord>) -> Result<Weight> {
    match path {
        Some(path) => {
            let text = read_input("weight", path, inputs)?;
            Weight::from_json(&text).with_context(|| format!("parsing weight {}", path.display()))
        }
        None => Ok(Weight::constant(n, 1.0)?),
    }
}

fn load_function(path: &Path, inputs: &mut Vec<InputRecord>) -> Result<ScalarField> {
    let text = read_input("function", path, inputs)?;
    ScalarField::from_json(&text).with_context(|| format!("parsing function {}", path.display()))
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn run_generate(what: Generate) -> Result<bool> {
    let mut ignored = Vec::new();
    let (text, out) = match what {
        Generate::Grid1d { n, a, b, measure, out } => {
            (generate(SpaceKind::Grid1d { n, a, b }, &measure.spec(), out.seed)?.to_json(), out)
        }
        Generate::Grid1dMidpoint { n, a, b, measure, out } => {
            (generate(SpaceKind::Grid1dMidpoint { n, a, b }, &measure.spec(), out.seed)?.to_json(), out)
        }
        Generate::Grid2d { nx, ny, measure, out } => {
            (generate(SpaceKind::Grid2d { nx, ny }, &measure.spec(), out.seed)?.to_json(), out)
        }
        Generate::RandomEuclidean { n, dim, measure, out } => {
            (generate(SpaceKind::RandomEuclidean { n, dim }, &measure.spec(), out.seed)?.to_json(), out)
        }
        Generate::Ultrametric { branching, depth, measure, out } => {
            (generate(SpaceKind::Ultrametric { branching, depth }, &measure.spec(), out.seed)?.to_json(), out)
        }
        Generate::PowerWeight { space, alpha, out } => {
            let s = load_space(&space, &mut ignored)?;
            (power_weight(&s, alpha)?.to_json(), out)
        }
        Generate::LognormalWeight { space, sigma, out } => {
            let s = load_space(&space, &mut ignored)?;
            (lognormal_weight(s.n(), sigma, out.seed)?.to_json(), out)
        }
        Generate::Function { space, signs, out } => {
            let n = load_space(&space, &mut ignored)?.n();
            let f = if signs { random_signs(n, 1, out.seed) } else { random_nonnegative(n, 1, out.seed) };
            (f[0].to_json(), out)
        }
    };
    write_artifact(&text, out.out.as_deref())?;
    Ok(true)
}

fn run_compute(args: ComputeArgs) -> Result<bool> {
    let mut inputs = Vec::new();
    let space = load_space(&args.space, &mut inputs)?;
    let n = space.n();
    let need_function = |inputs: &mut Vec<InputRecord>| -> Result<ScalarField> {
        match &args.function {
            Some(path) => load_function(path, inputs),
            None => bail!("this computation needs --function"),
        }
    };
    let need_t = || args.t.context("this computation needs --t");

    let (name, parameters, passed, result, table) = match args.what {
        ComputeWhat::Ap => {
            let Some(path) = &args.weight else { bail!("compute ap needs --weight") };
            let w = load_weight(Some(path), n, &mut inputs)?;
            let rep = ap_constant(&space, &w, args.p)?;
            let mut t = Table::new(vec!["p", "constant", "witness_center", "witness_radius", "witness_size"]);
            t.push(vec![
                num(rep.p),
                num(rep.constant),
                rep.witness.center.to_string(),
                num(rep.witness.radius),
                rep.witness.members.len().to_string(),
            ]);
            ("compute ap", json!({ "p": args.p }), true, serde_json::to_value(&rep)?, t)
        }
        ComputeWhat::Doubling => {
            let own = doubling_with_masses(&space, space.measure(), Strategy::default());
            let mut t = Table::new(vec!["quantity", "value"]);
            t.push(vec!["c_mu".into(), num(own.constant)]);
            let mut result = json!({ "c_mu": own.constant, "center": own.center, "radius": own.radius });
            let mut passed = true;
            if let Some(path) = &args.weight {
                let w = load_weight(Some(path), n, &mut inputs)?;
                let wd = weight_doubling_check(&space, &w, args.p)?;
                t.push(vec!["c_w".into(), num(wd.c_w_measured)]);
                t.push(vec!["c_mu^p [w]_Ap".into(), num(wd.bound)]);
                passed = wd.holds;
                result["weight"] = serde_json::to_value(&wd)?;
            }
            ("compute doubling", json!({ "p": args.p }), passed, result, t)
        }
        ComputeWhat::Maximal => {
            let f = need_function(&mut inputs)?;
            let mf = maximal(&space, &f)?;
            let mut t = Table::new(vec!["index", "f", "mf"]);
            for i in 0..n {
                t.push(vec![i.to_string(), num(f.values()[i]), num(mf.values()[i])]);
            }
            ("compute maximal", json!({}), true, json!({ "values": mf.values() }), t)
        }
        ComputeWhat::Whitney => {
            let f = need_function(&mut inputs)?;
            let level = need_t()?;
            let omega = level_set(&space, &f, level)?;
            let cover = whitney_cover(&space, &omega)?;
            let mut t = Table::new(vec!["center", "radius", "greedy", "size"]);
            for b in &cover.balls {
                t.push(vec![
                    b.ball.center.to_string(),
                    num(b.ball.radius),
                    b.greedy.to_string(),
                    b.ball.members.len().to_string(),
                ]);
            }
            ("compute whitney", json!({ "t": level }), true, serde_json::to_value(&cover)?, t)
        }
        ComputeWhat::Truncate => {
            let f = need_function(&mut inputs)?;
            let level = need_t()?;
            let tr = truncate(&space, &f, level)?;
            let bounds = check_truncation_bounds(&space, &f, &tr)?;
            let mf = tr.maximal_f.as_ref().expect("truncate keeps Mf");
            let mut t = Table::new(vec!["index", "in_level_set", "f", "f_t", "mf"]);
            for i in 0..n {
                t.push(vec![
                    i.to_string(),
                    tr.level_set.contains(i).to_string(),
                    num(f.values()[i]),
                    num(tr.f_t.values()[i]),
                    num(mf.values()[i]),
                ]);
            }
            let result = json!({ "truncation": tr, "bounds": bounds });
            ("compute truncate", json!({ "t": level }), bounds.holds(), result, t)
        }
    };
    let envelope = Envelope {
        command: name,
        inputs: &inputs,
        seed: args.output.seed,
        parameters,
        passed,
        notes: Vec::new(),
        result,
    };
    emit(&envelope, &table, args.output.format, args.output.out.as_deref())?;
    Ok(passed)
}

fn run_verify(args: VerifyArgs) -> Result<bool> {
    let mut inputs = Vec::new();
    let mut config = VerifyConfig::new(args.p);
    config.seed = args.output.seed;
    config.random_cases = args.cases;
    config.layer_cake_eps = args.eps;
    if let Some(path) = &args.space {
        let space = load_space(path, &mut inputs)?;
        let weight = load_weight(args.weight.as_deref(), space.n(), &mut inputs)?;
        let functions = if args.function.is_empty() {
            random_nonnegative(space.n(), 4, args.output.seed)
        } else {
            args.function.iter().map(|f| load_function(f, &mut inputs)).collect::<Result<_>>()?
        };
        config.cases = Some(vec![Case { name: path.display().to_string(), space, weight, functions }]);
    }
    let suite = Suite::from(args.suite);
    let rep = run_suite(suite, &config)?;
    let mut t = Table::new(vec!["suite", "case", "check", "lhs", "rhs", "slack", "passed"]);
    for c in &rep.checks {
        t.push(vec![
            c.suite.to_string(),
            c.case.clone(),
            c.check.clone(),
            num(c.lhs),
            num(c.rhs),
            num(c.slack),
            c.passed.to_string(),
        ]);
    }
    let passed = rep.passed();
    let name = format!("verify {suite}");
    let envelope = Envelope {
        command: &name,
        inputs: &inputs,
        seed: args.output.seed,
        parameters: json!({ "p": args.p, "eps": args.eps, "cases": args.cases }),
        passed,
        notes: Vec::new(),
        result: serde_json::to_value(&rep)?,
    };
    emit(&envelope, &t, args.output.format, args.output.out.as_deref())?;
    if !passed {
        for f in rep.failures() {
            eprintln!("FAIL {} [{}] {}: lhs {:e}, rhs {:e}", f.suite, f.case, f.check, f.lhs, f.rhs);
        }
    }
    Ok(passed)
}

fn run_selfimprove(args: SelfImproveArgs) -> Result<bool> {
    let mut inputs = Vec::new();
    let space = load_space(&args.space, &mut inputs)?;
    let w = load_weight(args.weight.as_deref(), space.n(), &mut inputs)?;
    let family = if args.function.is_empty() {
        standard_family(&space, &w, args.p, args.random, args.output.seed)?
    } else {
        args.function.iter().map(|f| load_function(f, &mut inputs)).collect::<Result<_>>()?
    };
    let mut config = SelfImprovementConfig::new(args.p, family.clone()).quantile_count(args.t_grid);
    config.safety = args.safety;
    let rep = self_improve_report(&space, &w, &config)?;
    let passed = rep.holds();

    let mut notes =
        vec!["constants are measured on this finite space; membership of a continuum weight shows in how ap_p grows \
         under grid refinement (compare compute ap across resolutions)"
            .to_string()];
    let mut result = serde_json::to_value(&rep)?;
    if let Some(bad) = rep.per_function.iter().find(|r| !r.holds) {
        notes.push(format!("family member {} violates the improved inequality", bad.index));
        result["violation"] = json!({ "index": bad.index, "function": family[bad.index].values() });
    }
    let mut t = Table::new(vec!["q", "sup_ratio"]);
    for (q, r) in &rep.ratio_curve {
        t.push(vec![num(*q), num(*r)]);
    }
    let envelope = Envelope {
        command: "selfimprove",
        inputs: &inputs,
        seed: args.output.seed,
        parameters: json!({ "p": args.p, "t_grid": args.t_grid, "safety": args.safety, "family_size": family.len() }),
        passed,
        notes,
        result,
    };
    emit(&envelope, &t, args.output.format, args.output.out.as_deref())?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate { what } => run_generate(what),
        Command::Compute(args) => run_compute(args),
        Command::Verify(args) => run_verify(args),
        Command::Selfimprove(args) => run_selfimprove(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
