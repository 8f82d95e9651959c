mod args;
mod experiment;

use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use tdmd_core::channel_sim::{generate_observed, ScenarioConfig};
use tdmd_core::dmd::DmdRank;
use tdmd_core::evaluation::{nmse_db, run_experiment, Figure};
use tdmd_core::io;
use tdmd_core::predictors::{forecast, verify_operator_equivalence, Method, PredictorConfig};
use tdmd_core::tucker::compression_ratio;
use tdmd_core::{Error, ErrorCategory, Result};

use args::{Cli, Command, EquivalenceArgs, GenerateArgs, InspectArgs, PredictArgs, PredictorArgs, SweepArgs};

const EXIT_USAGE: u8 = 2;
const EXIT_FORMAT: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let reason = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            report("usage", reason);
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (name, code) = match e.category() {
                ErrorCategory::Usage => ("usage", EXIT_USAGE),
                ErrorCategory::DataFormat => ("data-format", EXIT_FORMAT),
                ErrorCategory::Numerical => ("numerical", EXIT_NUMERICAL),
            };
            report(name, &e.to_string());
            ExitCode::from(code)
        }
    }
}

/// One line on stderr: `error category=<name> reason=<text>`.
fn report(category: &str, reason: &str) {
    eprintln!("error category={category} reason={}", reason.replace('\n', " "));
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Predict(a) => predict(a),
        Command::Sweep(a) => sweep(a),
        Command::Equivalence(a) => equivalence(a),
        Command::Inspect(a) => inspect(a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut cfg: ScenarioConfig = match &a.config {
        Some(p) => read_text(p)?.parse()?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let (clean, observed) = generate_observed(&cfg)?;
    io::save_sequence(&a.out, &observed)?;
    if let Some(p) = &a.clean_out {
        io::save_sequence(p, &clean)?;
    }
    let [n1, n2, n3] = cfg.dims();
    println!("snapshots={} dims={n1},{n2},{n3} period_ms={} seed={}", cfg.n_snapshots, cfg.period_ms, cfg.seed);
    Ok(())
}

fn predictor_config(method: Method, p: &PredictorArgs) -> Result<PredictorConfig> {
    let cfg = PredictorConfig::new(method)
        .with_history(p.history)
        .with_threshold(p.threshold)
        .with_ar_order(p.ar_order)
        .with_dmd_rank(p.dmd_rank.parse::<DmdRank>()?);
    cfg.validate()?;
    Ok(cfg)
}

fn predict(a: PredictArgs) -> Result<()> {
    let method: Method = a.method.parse()?;
    let cfg = predictor_config(method, &a.predictor)?;
    if a.save_tucker.is_some() && !method.uses_tucker() {
        return Err(Error::InvalidArgument(format!("--save-tucker needs t_ar or t_dmd, not {method}")));
    }
    if a.save_dmd.is_some() && !matches!(method, Method::FullDmd | Method::TuckerDmd) {
        return Err(Error::InvalidArgument(format!("--save-dmd needs full_dmd or t_dmd, not {method}")));
    }
    let seq = io::load_sequence(&a.sequence)?;
    let truth = a.truth.as_ref().map(io::load_tensor).transpose()?;

    let fc = forecast(&seq, &cfg, &[a.tau])?;
    let prediction = &fc.predictions[0];
    io::save_tensor(&a.out, prediction)?;
    if let (Some(p), Some(model)) = (&a.save_tucker, &fc.tucker) {
        io::save_tucker(p, model)?;
    }
    if let (Some(p), Some(model)) = (&a.save_dmd, &fc.dmd) {
        io::save_dmd(p, model)?;
    }

    let full = seq.dims();
    let ranks = fc.ranks(full);
    let nmse = match &truth {
        Some(t) => format!("{:.6}", nmse_db(t, prediction)?),
        None => "n/a".to_owned(),
    };
    println!(
        "method={method} tau={} ranks={},{},{} compression={:.4} nmse_db={nmse}",
        a.tau,
        ranks[0],
        ranks[1],
        ranks[2],
        compression_ratio(full, ranks)
    );
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut spec = match &a.spec {
        Some(p) => experiment::parse_experiment(&read_text(p)?)?,
        None => experiment::parse_experiment("")?,
    };
    if a.paper_dims {
        let full = ScenarioConfig::full_scale();
        spec.scenario.n_rx = full.n_rx;
        spec.scenario.n_tx = full.n_tx;
        spec.scenario.n_sc = full.n_sc;
    }
    if let Some(n) = a.trials {
        spec.n_trials = n;
    }
    if let Some(n) = a.figure {
        spec = Figure::from_number(n)?.preset(spec);
    }
    let report = run_experiment(&spec)?;
    fs::write(&a.out, report.to_csv()).map_err(|e| Error::Format(format!("{}: {e}", a.out.display())))?;
    println!("rows={} trials={} out={}", report.rows.len(), spec.n_trials, a.out.display());
    Ok(())
}

fn equivalence(a: EquivalenceArgs) -> Result<()> {
    let cfg = PredictorConfig::new(Method::TuckerDmd)
        .with_threshold(a.threshold)
        .with_history(a.history)
        .with_dmd_rank(a.dmd_rank.parse::<DmdRank>()?);
    cfg.validate()?;
    let seq = io::load_sequence(&a.sequence)?;
    let r = verify_operator_equivalence(&seq, &cfg)?;
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_owned(), |x| format!("{x:e}"));
    println!(
        "opdiff={} eigdiff={} tucker_residual={:e} rank_full={} rank_core={} ranks={},{},{}",
        fmt(r.opdiff),
        fmt(r.eigdiff),
        r.tucker_residual,
        r.rank_full,
        r.rank_core,
        r.tucker_ranks[0],
        r.tucker_ranks[1],
        r.tucker_ranks[2]
    );
    Ok(())
}

fn inspect(a: InspectArgs) -> Result<()> {
    let magic = {
        let mut line = Vec::new();
        let file = fs::File::open(&a.file).map_err(|e| Error::Format(format!("{}: {e}", a.file.display())))?;
        BufReader::new(file).take(16).read_until(b' ', &mut line)?;
        String::from_utf8_lossy(&line).trim().to_owned()
    };
    match magic.as_str() {
        "CT1" => {
            let t = io::load_tensor(&a.file)?;
            let [n1, n2, n3] = t.dims();
            println!("format=CT1 dims={n1},{n2},{n3} frobenius={:e}", t.frobenius_norm());
        }
        "CTS1" => {
            let s = io::load_sequence(&a.file)?;
            let [n1, n2, n3] = s.dims();
            println!("format=CTS1 snapshots={} dims={n1},{n2},{n3} period_ms={}", s.len(), s.period_ms());
        }
        "TKM1" => {
            let m = io::load_tucker(&a.file)?;
            let [n1, n2, n3] = m.full_dims();
            let [r1, r2, r3] = m.ranks();
            println!(
                "format=TKM1 dims={n1},{n2},{n3} ranks={r1},{r2},{r3} compression={:.4}",
                m.compression_ratio()
            );
        }
        "DMD1" => {
            let m = io::load_dmd(&a.file)?;
            let radius = m.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
            println!("format=DMD1 state_dim={} rank={} spectral_radius={radius:e}", m.state_dim(), m.rank());
        }
        other => return Err(Error::Format(format!("unrecognized file magic {other:?}"))),
    }
    Ok(())
}
