//! Command-line surface: exact PMF, approximation tables, Monte Carlo,
//! error-scaling studies, and the inequality certification report.
//!
//! Exit codes: 0 success (and all certified bounds hold), 1 certification
//! failure, 2 usage error, 3 resource cap exceeded.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use coupon_poisson::combinatorics;
use coupon_poisson::diagnostics::{build_schedule, certify_bounds, scaling_study, SCHEDULE_RULE};
use coupon_poisson::exact::{exact_pmf_dp, NumericMode};
use coupon_poisson::expansion::poisson_order1;
use coupon_poisson::model::{to_f64, CollectorInstance};
use coupon_poisson::output::{Cell, OutputRecord};
use coupon_poisson::simulate::{simulate_waiting_time, Method, SimConfig, RNG_ALGORITHM};
use coupon_poisson::Error;

#[derive(Parser)]
#[command(name = "coupon-poisson", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PmfMode {
    Rational,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimMethod {
    Draw,
    Geometric,
}

#[derive(Args)]
struct InstanceArgs {
    /// number of coupon types
    #[arg(long)]
    n: u64,
    /// uncollected coupons remaining at the stopping time
    #[arg(long)]
    m: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Exact PMF of the centered waiting time
    Pmf {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        kmax: usize,
        #[arg(long, value_enum, default_value_t = PmfMode::Rational)]
        mode: PmfMode,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Exact vs order-0 vs order-1 comparison table
    Approx {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        kmax: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Monte Carlo estimate of the PMF
    Simulate {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        /// RNG seed; drawn from OS entropy (and reported) when absent
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=4096))]
        workers: u64,
        #[arg(long, value_enum, default_value_t = SimMethod::Geometric)]
        method: SimMethod,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Error-scaling study along a schedule
    Scaling {
        #[arg(long)]
        lambda: f64,
        /// comma-separated increasing list of n values
        #[arg(long, value_delimiter = ',')]
        nlist: Vec<u64>,
        #[arg(long, default_value_t = 25)]
        kmax: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Certify every inequality on one instance
    Verify {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 5)]
        kmax: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE_CAP: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::EnumerationCap { .. } | Error::BitBudget { .. } => EXIT_RESOURCE_CAP,
                _ => EXIT_USAGE,
            };
            ExitCode::from(code)
        }
    }
}

fn emit(record: &OutputRecord, format: Format) -> ExitCode {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let res = match format {
        Format::Csv => record.write_csv(&mut out),
        Format::Json => record.write_json(&mut out),
    };
    let _ = out.flush();
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(_) => ExitCode::FAILURE,
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Pmf {
            instance,
            kmax,
            mode,
            format,
        } => cmd_pmf(instance, kmax, mode, format),
        Command::Approx {
            instance,
            kmax,
            format,
        } => cmd_approx(instance, kmax, format),
        Command::Simulate {
            instance,
            samples,
            seed,
            workers,
            method,
            format,
        } => cmd_simulate(instance, samples, seed, workers, method, format),
        Command::Scaling {
            lambda,
            nlist,
            kmax,
            format,
        } => cmd_scaling(lambda, &nlist, kmax, format),
        Command::Verify {
            instance,
            kmax,
            format,
        } => cmd_verify(instance, kmax, format),
    }
}

fn instance_of(args: &InstanceArgs) -> Result<CollectorInstance, Error> {
    CollectorInstance::new(args.n, args.m)
}

fn instance_meta(record: &mut OutputRecord, instance: &CollectorInstance) {
    record.set_meta("n", json!(instance.n()));
    record.set_meta("m", json!(instance.m()));
}

fn cmd_pmf(args: InstanceArgs, kmax: usize, mode: PmfMode, format: Format) -> Result<ExitCode, Error> {
    let instance = instance_of(&args)?;
    match mode {
        PmfMode::Rational => {
            let pmf = exact_pmf_dp(&instance, kmax, NumericMode::Rational)?;
            let mut rec = OutputRecord::new("pmf", &["k", "exact", "exact_float"]);
            instance_meta(&mut rec, &instance);
            rec.set_meta("mode", json!("rational"));
            rec.set_meta("kmax", json!(kmax));
            for k in 0..=kmax {
                let p = pmf.prob_rational(k).unwrap();
                rec.push_row(vec![
                    Cell::UInt(k as u64),
                    Cell::Text(p.to_string()),
                    Cell::Float(to_f64(p)),
                ]);
            }
            rec.trailer.push(("tail_mass".into(), pmf.tail_mass()));
            Ok(emit(&rec, format))
        }
        PmfMode::Float => {
            let pmf = exact_pmf_dp(&instance, kmax, NumericMode::Float)?;
            let mut rec = OutputRecord::new("pmf", &["k", "exact"]);
            instance_meta(&mut rec, &instance);
            rec.set_meta("mode", json!("float"));
            rec.set_meta("kmax", json!(kmax));
            for k in 0..=kmax {
                rec.push_row(vec![Cell::UInt(k as u64), Cell::Float(pmf.prob(k))]);
            }
            rec.trailer.push(("tail_mass".into(), pmf.tail_mass()));
            Ok(emit(&rec, format))
        }
    }
}

fn cmd_approx(args: InstanceArgs, kmax: usize, format: Format) -> Result<ExitCode, Error> {
    let instance = instance_of(&args)?;
    let pmf = exact_pmf_dp(&instance, kmax, NumericMode::Float)?;
    let mut rec = OutputRecord::new(
        "approx",
        &["k", "exact", "order0", "order1", "err0", "err1"],
    );
    instance_meta(&mut rec, &instance);
    rec.set_meta("lambda_n", json!(instance.lambda1_f64()));
    rec.set_meta("lambda_n2", json!(instance.lambda2_f64()));
    for k in 0..=kmax {
        let approx = poisson_order1(&instance, k as u64);
        let exact = pmf.prob(k);
        rec.push_row(vec![
            Cell::UInt(k as u64),
            Cell::Float(exact),
            Cell::Float(approx.order0),
            Cell::Float(approx.order1),
            Cell::Float(exact - approx.order0),
            Cell::Float(exact - approx.order1),
        ]);
    }
    Ok(emit(&rec, format))
}

fn cmd_simulate(
    args: InstanceArgs,
    samples: u64,
    seed: Option<u64>,
    workers: u64,
    method: SimMethod,
    format: Format,
) -> Result<ExitCode, Error> {
    let instance = instance_of(&args)?;
    let workers = workers as usize;
    let seed = seed.unwrap_or_else(|| {
        let s: u64 = rand::random();
        eprintln!("seed drawn from OS entropy: {s}");
        s
    });
    let method = match method {
        SimMethod::Draw => Method::Draw,
        SimMethod::Geometric => Method::Geometric,
    };
    let config = SimConfig {
        instance,
        samples,
        seed,
        method,
        workers,
    };
    let empirical = simulate_waiting_time(&config);
    let mut rec = OutputRecord::new("simulate", &["k", "count", "p_hat", "se"]);
    instance_meta(&mut rec, &instance);
    rec.set_meta("samples", json!(samples));
    rec.set_meta("seed", json!(seed));
    rec.set_meta("workers", json!(workers));
    rec.set_meta("method", json!(method.name()));
    rec.set_meta("rng", json!(RNG_ALGORITHM));
    for (&k, &count) in &empirical.counts {
        rec.push_row(vec![
            Cell::UInt(k),
            Cell::UInt(count),
            Cell::Float(empirical.p_hat(k)),
            Cell::Float(empirical.se(k)),
        ]);
    }
    Ok(emit(&rec, format))
}

fn cmd_scaling(lambda: f64, nlist: &[u64], kmax: usize, format: Format) -> Result<ExitCode, Error> {
    let spec = build_schedule(lambda, nlist)?;
    let report = scaling_study(&spec, kmax)?;
    let mut rec = OutputRecord::new(
        "scaling",
        &["n", "m", "lambda_n", "lambda_n2", "e0", "e1"],
    );
    rec.set_meta("lambda", json!(lambda));
    rec.set_meta("kmax", json!(kmax));
    rec.set_meta("schedule_rule", json!(SCHEDULE_RULE));
    for row in &report.rows {
        rec.push_row(vec![
            Cell::UInt(row.n),
            Cell::UInt(row.m),
            Cell::Float(row.lambda1),
            Cell::Float(row.lambda2),
            Cell::Float(row.e0),
            Cell::Float(row.e1),
        ]);
    }
    if let (Some(s0), Some(s1)) = (report.slope0, report.slope1) {
        rec.trailer.push(("slope0".into(), s0));
        rec.trailer.push(("slope1".into(), s1));
    }
    Ok(emit(&rec, format))
}

fn cmd_verify(args: InstanceArgs, kmax: u32, format: Format) -> Result<ExitCode, Error> {
    let instance = instance_of(&args)?;
    let checks = certify_bounds(&instance, kmax, combinatorics::cap_from_env())?;
    let mut rec = OutputRecord::new(
        "verify",
        &["name", "lhs", "rhs", "margin", "holds", "skipped"],
    );
    instance_meta(&mut rec, &instance);
    rec.set_meta("kmax", json!(kmax));
    let mut all_hold = true;
    for check in &checks {
        if !check.skipped && !check.holds {
            all_hold = false;
        }
        rec.push_row(vec![
            Cell::Text(check.name.clone()),
            Cell::Float(check.lhs),
            Cell::Float(check.rhs),
            Cell::Float(check.margin),
            Cell::Bool(check.holds),
            Cell::Bool(check.skipped),
        ]);
    }
    let emitted = emit(&rec, format);
    if emitted != ExitCode::SUCCESS {
        return Ok(emitted);
    }
    Ok(if all_hold {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY_FAILED)
    })
}
