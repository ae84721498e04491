//! `novrec`: dataset statistics, training, evaluation and the novelty
//! experiments from the command line.
//!
//! Exit codes: 0 success, 1 validation or parse error, 2 runtime error.

mod settings;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use novelty_rec::dataset::{Dataset, DEFAULT_TITLE_LEN};
use novelty_rec::experiments::{
    evaluate_users, k_grid, sweep_k, uni_report, write_eval_csv, write_loss_csv, write_sweep_csv,
    write_uni_csv, SweepMode,
};
use novelty_rec::model::{
    build_pooled_rows, full_model_grad_check, load_params, save_params, train, ModelParams, Scorer,
};
use novelty_rec::Error;

use settings::{ModelFlags, Settings, UserSelection};

#[derive(Debug, Parser)]
#[command(
    name = "novrec",
    version,
    about = "Forgetful novelty-seeking rating model"
)]
struct Cli {
    /// Optional key=value file supplying defaults for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Summary statistics of a MovieLens-1M directory as JSON
    Stats {
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one shared model on the first N users (leave-last-out prefixes)
    Train {
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        users: Option<UserSelection>,
        #[command(flatten)]
        model: ModelFlags,
        /// Parameter file to write
        #[arg(long)]
        out: Option<PathBuf>,
        /// Loss trace CSV (defaults to <out>.loss.csv)
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Rank the catalog for each user's held-out last action
    Eval {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        users: Option<UserSelection>,
        /// Novelty window (defaults to the model's)
        #[arg(long)]
        k: Option<usize>,
        /// Drop movies the user already rated from the candidates
        #[arg(long)]
        exclude_seen: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Retrain and evaluate over a grid of window lengths
    SweepK {
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        users: Option<UserSelection>,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        step: Option<usize>,
        /// One model per k over all users instead of one per user
        #[arg(long)]
        shared: bool,
        #[arg(long)]
        exclude_seen: bool,
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-step user novelty index for selected users
    Uni {
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        users: Option<UserSelection>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference check of the full model on random small configurations
    GradCheck {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Number of random configurations
        #[arg(long)]
        configs: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e
                .chain()
                .find_map(|c| c.downcast_ref::<Error>())
                .is_some_and(Error::is_validation);
            ExitCode::from(if validation { 1 } else { 2 })
        }
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Validation(format!("--{flag} is required")).into())
}

fn path_setting(s: &Settings, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
    required(flag.or_else(|| s.raw(key).map(PathBuf::from)), key)
}

/// Writes via a temporary file in the destination directory, then renames,
/// so readers never see a partial file.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn load_dataset(dir: &Path, title_len: usize) -> Result<Dataset> {
    if !dir.is_dir() {
        bail!(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("data directory {} not found", dir.display()),
        )));
    }
    Ok(Dataset::load(dir, title_len)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let s = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Stats { data_dir, out } => {
            let dir = path_setting(&s, data_dir, "data-dir")?;
            let title_len = s.pick(None, "title-len", DEFAULT_TITLE_LEN)?;
            let stats = load_dataset(&dir, title_len)?.stats();
            let json = serde_json::to_string_pretty(&stats)?;
            match out.or_else(|| s.raw("out").map(PathBuf::from)) {
                Some(path) => write_atomic(&path, |w| Ok(writeln!(w, "{json}")?))?,
                None => println!("{json}"),
            }
        }

        Command::Train {
            data_dir,
            users,
            model,
            out,
            trace_out,
        } => {
            let dir = path_setting(&s, data_dir, "data-dir")?;
            let out = path_setting(&s, out, "out")?;
            let config = model.resolve(&s)?;
            let users = s.pick(users, "users", UserSelection::First(20))?;
            let dataset = load_dataset(&dir, config.title_len)?;
            let users = users.resolve(&dataset)?;
            let (rows, skipped) = build_pooled_rows::<f64>(&dataset, &users, config.k)?;
            if !skipped.is_empty() {
                eprintln!(
                    "skipped {} user(s) with fewer than two actions",
                    skipped.len()
                );
            }
            let outcome = train(&rows, &config, &dataset.catalog)?;
            write_atomic(&out, |w| Ok(save_params(&outcome.params, w)?))?;
            let trace = trace_out.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".loss.csv");
                PathBuf::from(p)
            });
            write_atomic(&trace, |w| Ok(write_loss_csv(w, &outcome.loss_trace)?))?;
            println!(
                "trained on {} rows from {} users: {} epochs, final mean loss {:.6}{}",
                rows.len(),
                users.len() - skipped.len(),
                outcome.loss_trace.len(),
                outcome.loss_trace.last().copied().unwrap_or(f64::NAN),
                if outcome.converged {
                    " (converged)"
                } else {
                    ""
                }
            );
        }

        Command::Eval {
            model,
            data_dir,
            users,
            k,
            exclude_seen,
            out,
        } => {
            let model_path = path_setting(&s, model, "model")?;
            let dir = path_setting(&s, data_dir, "data-dir")?;
            let out = path_setting(&s, out, "out")?;
            let file = File::open(&model_path)
                .with_context(|| format!("opening model {}", model_path.display()))?;
            let params: ModelParams<f64> = load_params(BufReader::new(file))?;
            let k = s.pick(k, "k", params.config.k)?;
            let exclude_seen = exclude_seen || s.pick(None, "exclude-seen", false)?;
            let dataset = load_dataset(&dir, params.config.title_len)?;
            let users = s
                .pick(users, "users", UserSelection::First(20))?
                .resolve(&dataset)?;
            let scorer = Scorer::new(&params, &dataset.catalog)?;
            let summary = evaluate_users(&scorer, &dataset, &users, k, exclude_seen)?;
            write_atomic(&out, |w| Ok(write_eval_csv(w, &summary.records)?))?;
            println!(
                "mean nDCG@all {:.6} over {} users (random ranking: {:.6})",
                summary.mean,
                summary.records.len(),
                summary.random_expectation
            );
        }

        Command::SweepK {
            data_dir,
            users,
            k_min,
            k_max,
            step,
            shared,
            exclude_seen,
            model,
            out,
        } => {
            let dir = path_setting(&s, data_dir, "data-dir")?;
            let out = path_setting(&s, out, "out")?;
            let grid = k_grid(
                s.pick(k_min, "k-min", 1)?,
                s.pick(k_max, "k-max", 50)?,
                s.pick(step, "step", 5)?,
            )?;
            let config = model.resolve(&s)?;
            let dataset = load_dataset(&dir, config.title_len)?;
            let users = s
                .pick(users, "users", UserSelection::First(3))?
                .resolve(&dataset)?;
            let mode = if shared || s.pick(None, "shared", false)? {
                SweepMode::Shared
            } else {
                SweepMode::PerUser
            };
            let exclude_seen = exclude_seen || s.pick(None, "exclude-seen", false)?;
            let outcome = sweep_k(&dataset, &users, &grid, &config, mode, exclude_seen)?;
            write_atomic(&out, |w| Ok(write_sweep_csv(w, &outcome.records)?))?;
            for (k, mean) in outcome.mean_by_k() {
                println!("k={k}: mean nDCG@all {mean:.6}");
            }
            for f in &outcome.failures {
                eprintln!("cell k={} user={:?} failed: {}", f.k, f.user_id, f.message);
            }
        }

        Command::Uni {
            data_dir,
            users,
            k,
            max_steps,
            out,
        } => {
            let dir = path_setting(&s, data_dir, "data-dir")?;
            let out = path_setting(&s, out, "out")?;
            let k = s.pick(k, "k", 20)?;
            let max_steps = s.pick(max_steps, "max-steps", 100)?;
            let dataset = load_dataset(&dir, s.pick(None, "title-len", DEFAULT_TITLE_LEN)?)?;
            let users = s
                .pick(users, "users", UserSelection::Ids(vec![1, 2, 3, 4, 5]))?
                .resolve(&dataset)?;
            let points = uni_report(&dataset, &users, k, max_steps)?;
            write_atomic(&out, |w| Ok(write_uni_csv(w, &points)?))?;
            println!(
                "wrote {} UNI points for {} users",
                points.len(),
                users.len()
            );
        }

        Command::GradCheck { seed, tol, configs } => {
            let seed = s.pick(seed, "seed", 0)?;
            let tol = s.pick(tol, "tol", 1e-4)?;
            let configs = s.pick(configs, "configs", 20)?;
            let mut worst = 0.0f64;
            let (mut checked, mut excluded) = (0, 0);
            for i in 0..configs as u64 {
                let report = full_model_grad_check(seed.wrapping_add(i))?;
                println!(
                    "config {i}: max relative error {:.3e} over {} entries ({} excluded at kinks)",
                    report.max_rel_error, report.checked, report.excluded
                );
                worst = worst.max(report.max_rel_error);
                checked += report.checked;
                excluded += report.excluded;
            }
            let pass = worst < tol;
            println!(
                "max relative error {worst:.3e} over {checked} entries ({excluded} excluded); tolerance {tol:e}: {}",
                if pass { "PASS" } else { "FAIL" }
            );
            if !pass {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
