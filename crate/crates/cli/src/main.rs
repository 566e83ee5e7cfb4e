mod args;
mod output;

use std::fs;
use std::process::ExitCode;

use clap::Parser;
use fidmoments::channels::{
    amplitude_damping, dephasing, depolarizing, deviation_channel, pauli_x, random_cptp,
    unitary_channel, validate_cptp, TP_TOL,
};
use fidmoments::io::{unitary_from_json, ChannelFile};
use fidmoments::moments::{
    analyze, bound_report, sweep, AnalysisOptions, SweepFamily, DEFAULT_MOMENT_BUDGET,
};
use fidmoments::oracle::{compare, estimate_moments, SampleConfig};
use fidmoments::{ComplexMatrix, KrausChannel};
use serde::{Deserialize, Serialize};

use args::{ChannelArgs, Cli, Command, Fixture, Format, OutputArgs};

/// `d·max_var` may grow by at most this factor over its value at the smallest dimension.
const TREND_FACTOR: f64 = 2.0;
const BUDGET_ENV: &str = "FIDMOMENTS_BUDGET";

#[derive(Debug)]
enum Failure {
    /// Malformed input or flags: exit 2.
    Input(String),
    /// The channel or a numerical check failed: exit 1.
    Check(String),
    /// A resource guard refused the computation: exit 3.
    Guard(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Input(_) => 2,
            Failure::Guard(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Check(m) | Failure::Guard(m) => m,
        }
    }
}

impl From<fidmoments::Error> for Failure {
    fn from(e: fidmoments::Error) -> Self {
        use fidmoments::Error as E;
        match e {
            E::BudgetExceeded { .. } | E::PermutationGuard(_) => Failure::Guard(e.to_string()),
            E::NotTracePreserving { .. } | E::NotPositive { .. } | E::NegativeVariance(_) => {
                Failure::Check(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(a) => cmd_validate(&a.channel, a.seed, &a.output),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Bounds(a) => cmd_bounds(&a.channel, a.seed, &a.output),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn require(value: Option<f64>, flag: &str, fixture: &str) -> Result<f64, Failure> {
    value.ok_or_else(|| Failure::Input(format!("fixture `{fixture}` requires --{flag}")))
}

fn require_qubit(dim: usize, fixture: &str) -> Result<(), Failure> {
    if dim == 2 {
        Ok(())
    } else {
        Err(Failure::Input(format!(
            "fixture `{fixture}` is only defined for --dim 2"
        )))
    }
}

fn read(path: &std::path::Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// The implemented channel and its ideal unitary, if any.
fn load(args: &ChannelArgs, seed: u64) -> Result<(KrausChannel, Option<ComplexMatrix>), Failure> {
    let (channel, mut ideal) = match (&args.file, args.fixture) {
        (Some(path), _) => {
            let file = ChannelFile::from_json(&read(path)?)?;
            (file.channel()?, file.ideal()?)
        }
        (None, Some(fixture)) => (build_fixture(fixture, args, seed)?, None),
        (None, None) => return Err(Failure::Input("give --fixture or --file".into())),
    };
    if let Some(path) = &args.ideal {
        ideal = Some(unitary_from_json(&read(path)?)?);
    }
    Ok((channel, ideal))
}

fn build_fixture(fixture: Fixture, args: &ChannelArgs, seed: u64) -> Result<KrausChannel, Failure> {
    let channel = match fixture {
        Fixture::Identity => KrausChannel::identity(args.dim)?,
        Fixture::Depolarizing => depolarizing(args.dim, require(args.p, "p", "depolarizing")?)?,
        Fixture::Dephasing => {
            require_qubit(args.dim, "dephasing")?;
            dephasing(require(args.p, "p", "dephasing")?)?
        }
        Fixture::AmplitudeDamping => {
            require_qubit(args.dim, "amplitude-damping")?;
            amplitude_damping(require(args.gamma, "gamma", "amplitude-damping")?)?
        }
        Fixture::PauliX => {
            require_qubit(args.dim, "pauli-x")?;
            unitary_channel(&pauli_x())?
        }
        Fixture::Random => random_cptp(args.dim, args.rank, args.channel_seed.unwrap_or(seed))?,
    };
    Ok(channel)
}

/// Loads the channel, insists it is CPTP, and returns `Λ = U† ∘ E`.
fn load_deviation(args: &ChannelArgs, seed: u64) -> Result<KrausChannel, Failure> {
    let (channel, ideal) = load(args, seed)?;
    let cptp = validate_cptp(&channel, TP_TOL)?;
    if !cptp.verdict {
        return Err(Failure::Check(format!(
            "channel is not CPTP (tp_residual {:.3e}, min Choi eigenvalue {:.3e})",
            cptp.tp_residual, cptp.min_choi_eig
        )));
    }
    Ok(match ideal {
        Some(u) => deviation_channel(&channel, &u)?,
        None => channel,
    })
}

fn budget() -> Result<u128, Failure> {
    match std::env::var(BUDGET_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| {
            Failure::Input(format!(
                "{BUDGET_ENV} must be a non-negative integer, got `{s}`"
            ))
        }),
        Err(_) => Ok(DEFAULT_MOMENT_BUDGET),
    }
}

fn json_only(out: &OutputArgs) -> Result<(), Failure> {
    match out.format {
        Some(Format::Csv) => Err(Failure::Input(
            "--format csv is only available for sweep".into(),
        )),
        _ => Ok(()),
    }
}

fn cmd_validate(args: &ChannelArgs, seed: u64, out: &OutputArgs) -> Outcome {
    json_only(out)?;
    let (channel, ideal) = load(args, seed)?;
    if let Some(u) = ideal {
        deviation_channel(&channel, &u)?;
    }
    let report = validate_cptp(&channel, TP_TOL)?;
    output::emit_json(&report, out)?;
    Ok(report.verdict)
}

fn cmd_analyze(a: &args::AnalyzeArgs) -> Outcome {
    json_only(&a.output)?;
    let lambda = load_deviation(&a.channel, a.seed)?;
    let opts = AnalysisOptions {
        max_moment: a.moments,
        budget: budget()?,
        direct_sum: a.direct_sum,
        prefer_qubit_form: a.qubit_form,
    };
    let report = analyze(&lambda, &opts)?;
    output::emit_json(&report, &a.output)?;
    Ok(true)
}

#[derive(Serialize, Deserialize)]
pub struct SampleOutput {
    pub analytic: fidmoments::MomentReport,
    pub empirical: fidmoments::EmpiricalMoments,
    pub comparison: fidmoments::oracle::ComparisonTable,
}

fn cmd_sample(a: &args::SampleArgs) -> Outcome {
    json_only(&a.output)?;
    let lambda = load_deviation(&a.channel, a.seed)?;
    let cfg = SampleConfig::with_shards(a.samples, a.seed, a.shards)?;
    let opts = AnalysisOptions {
        max_moment: a.moments,
        budget: budget()?,
        ..Default::default()
    };
    let analytic = analyze(&lambda, &opts)?;
    let empirical = estimate_moments(&lambda, a.moments, &cfg)?;
    let comparison = compare(&analytic, &empirical);
    let pass = comparison.all_pass;
    output::emit_json(
        &SampleOutput {
            analytic,
            empirical,
            comparison,
        },
        &a.output,
    )?;
    Ok(pass)
}

#[derive(Serialize, Deserialize)]
pub struct SweepOutput {
    #[serde(flatten)]
    pub table: fidmoments::moments::SweepTable,
    pub baseline: Option<f64>,
    pub trend_factor: f64,
    pub trend_ok: bool,
}

fn cmd_sweep(a: &args::SweepArgs) -> Outcome {
    if a.dims.is_empty() {
        return Err(Failure::Input(
            "--dims must list at least one dimension".into(),
        ));
    }
    let family = match a.fixture {
        None | Some(Fixture::Random) => SweepFamily::RandomCptp { rank: a.rank },
        Some(Fixture::Depolarizing) => SweepFamily::Depolarizing {
            p: a.p.unwrap_or(0.5),
        },
        Some(other) => {
            return Err(Failure::Input(format!(
                "sweep supports the random and depolarizing fixtures, not {other:?}"
            )))
        }
    };
    let table = sweep(&a.dims, family, a.trials, a.seed)?;
    let trend_ok = table.trend_ok(TREND_FACTOR);
    match a.output.format {
        Some(Format::Json) => output::emit_json(
            &SweepOutput {
                baseline: table.baseline(),
                trend_factor: TREND_FACTOR,
                trend_ok,
                table,
            },
            &a.output,
        )?,
        _ => output::emit_sweep_csv(&table, &a.output)?,
    }
    Ok(trend_ok)
}

fn cmd_bounds(args: &ChannelArgs, seed: u64, out: &OutputArgs) -> Outcome {
    json_only(out)?;
    let lambda = load_deviation(args, seed)?;
    let report = bound_report(&lambda)?;
    output::emit_json(&report, out)?;
    Ok(report.all_hold)
}
