use std::path::PathBuf;

use clap::Args;
use serde_json::Value;

use chaobell::inequality::{
    bell_three_check, chsh_four_check, parse_datasets, InequalityReport, Rational, SignSequence,
};
use chaobell::montecarlo::{
    bose_einstein_check, chsh_experiment, run_postselected_experiment, sweep_angles, with_lanes,
};
use chaobell::polarizer::sequential_polarizers;
use chaobell::rng::{derive_seed, StreamFamily};
use chaobell::{CountMode, SimConfig};

use crate::angles::{parse_angle, parse_angle_list, parse_angle_spec};
use crate::output::{number, Cell, Report};
use crate::{CliError, OutputArgs, RunArgs};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(format!("usage error: {}", msg.into()))
}

fn resolve_seed(s: &str) -> Result<u64, CliError> {
    if s == "random" {
        return Ok(rand::random());
    }
    s.parse()
        .map_err(|_| usage(format!("seed must be a 64-bit unsigned integer or 'random', got '{s}'")))
}

fn sim_config(run: &RunArgs, theta1: f64, theta2: f64) -> Result<SimConfig, CliError> {
    let config = SimConfig {
        trials: run.trials,
        mean_intensity: run.mean_intensity,
        theta1,
        theta2,
        seed: resolve_seed(&run.seed)?,
        count_mode: run.mode.into(),
        postselect_single_pairs: false,
    };
    config.validate()?;
    Ok(config)
}

/// Run `f` on the requested number of threads, or on rayon's default pool.
fn on_lanes<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => with_lanes(n, f).map_err(|e| CliError::Internal(e.to_string())),
        None => Ok(f()),
    }
}

fn echo_run(report: &mut Report, command: &str, config: &SimConfig) {
    report
        .config("command", Value::from(command))
        .config("trials", Value::from(config.trials))
        .config("mean_intensity", number(config.mean_intensity))
        .config("seed", Value::from(config.seed))
        .config("mode", Value::from(config.count_mode.name()));
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Angle differences θ1 − θ2: a list (`0,22.5,45`) or a range (`0:90:13deg`).
    #[arg(long, default_value = "0:90:13deg", allow_hyphen_values = true)]
    pub deltas: String,
    /// Side-2 analyzer angle; side 1 is set to theta2 + Δ.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub theta2: String,
    /// Also tally windows with exactly one photon on each side.
    #[arg(long)]
    pub postselect: bool,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let deltas = parse_angle_spec(&args.deltas).map_err(usage)?;
    if deltas.is_empty() {
        return Err(usage("--deltas must name at least one angle"));
    }
    let theta2 = parse_angle(&args.theta2).map_err(usage)?;
    let config = sim_config(&args.run, theta2, theta2)?;
    if args.postselect && config.count_mode == CountMode::IntensityOnly {
        return Err(usage("--postselect needs --mode poisson or matched"));
    }

    let (rows, tallies) = on_lanes(args.run.threads, || -> Result<_, chaobell::Error> {
        let rows = sweep_angles(&config, &deltas)?;
        let tallies = if args.postselect {
            deltas
                .iter()
                .enumerate()
                .map(|(k, &d)| {
                    let run = SimConfig {
                        theta1: theta2 + d,
                        seed: derive_seed(config.seed, k as u64),
                        postselect_single_pairs: true,
                        ..config
                    };
                    run_postselected_experiment(&run)
                })
                .collect::<Result<Vec<_>, _>>()?
        } else {
            Vec::new()
        };
        Ok((rows, tallies))
    })??;

    let mut columns = vec!["delta_radians", "estimate", "std_error", "oracle", "abs_deviation"];
    if args.postselect {
        columns.extend(["selected", "p_nn", "p_np", "p_pn", "p_pp", "postselected_correlation"]);
    }
    let mut report = Report::new(columns);
    echo_run(&mut report, "sweep", &config);
    report
        .config("theta2_radians", number(theta2))
        .config("postselect", Value::from(args.postselect));
    for (k, r) in rows.iter().enumerate() {
        let mut cells = vec![
            Cell::Num(r.delta),
            Cell::Num(r.estimate),
            Cell::Num(r.std_error),
            Cell::Num(r.oracle),
            Cell::Num(r.abs_deviation()),
        ];
        if let Some(t) = tallies.get(k) {
            cells.push(Cell::Int(t.trials_selected));
            cells.extend(t.frequencies().map(Cell::Num));
            cells.push(Cell::Num(t.correlation()));
        }
        report.row(cells);
    }
    let worst = rows.iter().map(|r| r.abs_deviation()).fold(0.0, f64::max);
    report.summary("points", Cell::Int(rows.len() as u64));
    report.summary("max_abs_deviation", Cell::Num(worst));
    report.emit(args.out.format, args.out.output.as_deref())?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct ChshArgs {
    /// a, a′ (side 1) and b, b′ (side 2).
    #[arg(long, default_value = "0,45,22.5,67.5", allow_hyphen_values = true)]
    pub angles: String,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn chsh(args: &ChshArgs) -> Result<(), CliError> {
    let angles = parse_angle_list(&args.angles).map_err(usage)?;
    let [a, a_prime, b, b_prime] = angles[..] else {
        return Err(usage(format!(
            "--angles needs exactly four values, got {}",
            angles.len()
        )));
    };
    let config = sim_config(&args.run, 0.0, 0.0)?;
    let e = on_lanes(args.run.threads, || chsh_experiment(&config, a, a_prime, b, b_prime))??;

    let mut report = Report::new(vec!["s_estimate", "std_error", "oracle", "abs_deviation"]);
    echo_run(&mut report, "chsh", &config);
    report.config(
        "angles_radians",
        Value::Array([a, a_prime, b, b_prime].map(number).to_vec()),
    );
    report.row(vec![
        Cell::Num(e.s),
        Cell::Num(e.std_error),
        Cell::Num(e.oracle),
        Cell::Num((e.s - e.oracle).abs()),
    ]);
    let legs = [
        ("c_ab", "c_ab_std_error"),
        ("c_ab_prime", "c_ab_prime_std_error"),
        ("c_a_prime_b", "c_a_prime_b_std_error"),
        ("c_a_prime_b_prime", "c_a_prime_b_prime_std_error"),
    ];
    for (k, (key, se_key)) in legs.into_iter().enumerate() {
        report.summary(key, Cell::Num(e.correlations[k]));
        report.summary(se_key, Cell::Num(e.correlation_std_errors[k]));
    }
    let sigmas = if e.std_error > 0.0 {
        (e.s - 2.0) / e.std_error
    } else {
        f64::NAN
    };
    report.summary("std_errors_above_2", Cell::Num(sigmas));
    report.emit(args.out.format, args.out.output.as_deref())?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct DistCheckArgs {
    #[arg(long, default_value_t = 1.0)]
    pub mean_intensity: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Largest acceptable total-variation distance.
    #[arg(long, default_value_t = 0.005)]
    pub threshold: f64,
    #[arg(long, default_value = "42")]
    pub seed: String,
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn dist_check(args: &DistCheckArgs) -> Result<(), CliError> {
    if args.threshold.is_nan() || args.threshold < 0.0 {
        return Err(usage("--threshold must be nonnegative"));
    }
    let seed = resolve_seed(&args.seed)?;
    let d = on_lanes(args.threads, || {
        bose_einstein_check(args.mean_intensity, args.samples, seed)
    })??;

    let mut report = Report::new(vec!["n", "empirical", "analytic", "abs_diff"]);
    report
        .config("command", Value::from("dist-check"))
        .config("mean_intensity", number(args.mean_intensity))
        .config("samples", Value::from(args.samples))
        .config("seed", Value::from(seed))
        .config("threshold", number(args.threshold));
    for r in &d.rows {
        report.row(vec![
            Cell::Int(r.n),
            Cell::Num(r.empirical),
            Cell::Num(r.analytic),
            Cell::Num((r.empirical - r.analytic).abs()),
        ]);
    }
    let passed = d.total_variation < args.threshold;
    report
        .summary("tail_empirical", Cell::Num(d.tail_empirical))
        .summary("tail_analytic", Cell::Num(d.tail_analytic))
        .summary("total_variation", Cell::Num(d.total_variation))
        .summary("sample_mean", Cell::Num(d.sample_mean))
        .summary("mean_std_error", Cell::Num(d.mean_std_error))
        .summary("passed", Cell::Bool(passed));
    report.emit(args.out.format, args.out.output.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Threshold(format!(
            "total variation {} >= {}",
            crate::output::sig9(d.total_variation),
            args.threshold
        )))
    }
}

#[derive(Args, Debug)]
pub struct BellDatasetsArgs {
    /// File with 3 or 4 lines of ±1 tokens separated by whitespace or commas.
    #[arg(long, conflicts_with = "random")]
    pub input: Option<PathBuf>,
    /// Generate this many random sequences (3 or 4) instead of reading a file.
    #[arg(long, requires = "len")]
    pub random: Option<usize>,
    /// Length of each random sequence.
    #[arg(long)]
    pub len: Option<usize>,
    #[arg(long, default_value = "42")]
    pub seed: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn rational_text(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rational_value(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn bell_datasets(args: &BellDatasetsArgs) -> Result<(), CliError> {
    let (seqs, source) = match (&args.input, args.random) {
        (Some(path), None) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            (parse_datasets(&text)?, Value::from(path.display().to_string()))
        }
        (None, Some(count)) => {
            let len = args.len.unwrap_or(0);
            if len == 0 {
                return Err(usage("--len must be at least 1"));
            }
            let seed = resolve_seed(&args.seed)?;
            let mut rng = StreamFamily::new(seed).stream(0);
            let seqs = (0..count)
                .map(|_| SignSequence::random(len, &mut rng))
                .collect::<Result<Vec<_>, _>>()?;
            (seqs, serde_json::json!({ "random": count, "len": len, "seed": seed }))
        }
        _ => return Err(usage("give either --input FILE or --random N --len L")),
    };
    let (name, rep): (&str, InequalityReport) = match &seqs[..] {
        [a, b, c] => ("bell_three", bell_three_check(a, b, c)?),
        [a, ap, b, bp] => ("chsh_four", chsh_four_check(a, ap, b, bp)?),
        other => return Err(usage(format!("expected 3 or 4 sequences, got {}", other.len()))),
    };

    let mut report = Report::new(vec![
        "check",
        "sequences",
        "length",
        "lhs",
        "bound",
        "margin",
        "lhs_decimal",
        "satisfied",
    ]);
    report
        .config("command", Value::from("bell-datasets"))
        .config("source", source);
    report.row(vec![
        Cell::Text(name.into()),
        Cell::Int(seqs.len() as u64),
        Cell::Int(seqs[0].len() as u64),
        Cell::Text(rational_text(&rep.lhs)),
        Cell::Text(rational_text(&rep.bound)),
        Cell::Text(rational_text(&rep.margin)),
        Cell::Num(rational_value(&rep.lhs)),
        Cell::Bool(rep.satisfied),
    ]);
    report.summary("satisfied", Cell::Bool(rep.satisfied));
    report.emit(args.out.format, args.out.output.as_deref())?;
    if rep.satisfied {
        Ok(())
    } else {
        Err(CliError::Internal("inequality violated by ±1 data".into()))
    }
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    /// Polarizer axes in the order light meets them.
    #[arg(long, default_value = "45,90", allow_hyphen_values = true)]
    pub angles: String,
    /// Polarization angle of the incoming light.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub input_pol: String,
    #[arg(long, default_value_t = 1.0)]
    pub intensity: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn demo_noncommute(args: &DemoArgs) -> Result<(), CliError> {
    let angles = parse_angle_list(&args.angles).map_err(usage)?;
    let input = parse_angle(&args.input_pol).map_err(usage)?;
    if !args.intensity.is_finite() || args.intensity < 0.0 {
        return Err(usage("--intensity must be nonnegative and finite"));
    }
    let reversed: Vec<f64> = angles.iter().rev().copied().collect();
    let degrees = |v: &[f64]| {
        v.iter()
            .map(|a| crate::output::sig9(a.to_degrees()))
            .collect::<Vec<_>>()
            .join(";")
    };

    let mut report = Report::new(vec!["order", "angles_degrees", "transmitted"]);
    report
        .config("command", Value::from("demo-noncommute"))
        .config("input_polarization_radians", number(input))
        .config("intensity", number(args.intensity));
    let forward = sequential_polarizers(input, args.intensity, &angles);
    let backward = sequential_polarizers(input, args.intensity, &reversed);
    report.row(vec![
        Cell::Text("given".into()),
        Cell::Text(degrees(&angles)),
        Cell::Num(forward),
    ]);
    report.row(vec![
        Cell::Text("reversed".into()),
        Cell::Text(degrees(&reversed)),
        Cell::Num(backward),
    ]);
    report.summary("order_dependent", Cell::Bool(forward != backward));
    report.emit(args.out.format, args.out.output.as_deref())?;
    Ok(())
}
