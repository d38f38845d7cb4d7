//! Command-line surface: argument types, command drivers, exit codes.

use crate::cascade::{self, MAX_CASCADE_DEPTH};
use crate::config::{Format, RunConfig};
use crate::conjugacy::{Conjugacy, DEFAULT_ITINERARY_DEPTH};
use crate::exec;
use crate::markov::{self, build_partition};
use crate::report::{fmt_f64, write_output, CsvTable, Envelope};
use crate::scaffold::{self, Scaffold, DEFAULT_DEPTH, MAX_DEPTH};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "renormlab", version, about = "Doubling-cascade renormalization laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Superstable parameter cascade and accumulation estimates.
    Cascade(CommonArgs),
    /// Per-level scaffold geometry and renormalization nonlinearity.
    Geometry(CommonArgs),
    /// Admissible words and inverse-branch distortion table.
    Markov(CommonArgs),
    /// Conjugacy construction and quasisymmetry statistics.
    Conjugacy(CommonArgs),
    /// Comparison-map root table over K values.
    Lemma3(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the configured depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Process exit code for an error: 1 usage/config, 2 numerical failure,
/// 3 invariant violation.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) => 1,
        Error::NotRenormalizable(_)
        | Error::AmbiguousFixedPoint(_)
        | Error::ExtensionNotMonotone(_)
        | Error::CombinatorialMismatch(_)
        | Error::DepthInsufficient(..) => 3,
        _ => 2,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cascade(args) => cmd_cascade(load(&args)?),
        Command::Geometry(args) => cmd_geometry(load(&args)?),
        Command::Markov(args) => cmd_markov(load(&args)?),
        Command::Conjugacy(args) => cmd_conjugacy(load(&args)?),
        Command::Lemma3(args) => cmd_lemma3(load(&args)?),
    }
}

fn load(args: &CommonArgs) -> Result<RunConfig> {
    Ok(RunConfig::from_file(&args.config)?.with_overrides(
        args.depth,
        args.format,
        args.out.clone(),
    ))
}

fn emit<C: Serialize, R: Serialize>(
    cfg: &RunConfig,
    envelope: Envelope<C, R>,
    csv: CsvTable,
) -> Result<()> {
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => envelope.to_json()?,
        Format::Csv => csv.render(),
    };
    write_output(cfg.out.as_deref(), &text)
}

#[derive(Debug, Serialize)]
struct CascadeRow {
    k: usize,
    lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
}

fn cmd_cascade(cfg: RunConfig) -> Result<()> {
    let depth = cfg.depth.unwrap_or(DEFAULT_DEPTH);
    if !(1..=MAX_CASCADE_DEPTH).contains(&depth) {
        return Err(Error::InvalidParameter(format!(
            "cascade depth must be in 1..={MAX_CASCADE_DEPTH}, got {depth}"
        )));
    }
    let m = &cfg.map;
    // Validate family parameters up front for a clean usage error.
    crate::MapSpec::new(m.family, m.t, m.lambda.unwrap_or(0.5), m.a)?;
    let lambdas = cascade::superstable_cascade(m.family, m.t, m.a, depth)?;
    let lambda_inf = if depth >= 3 {
        let (l0, l1, l2) = (lambdas[depth - 3], lambdas[depth - 2], lambdas[depth - 1]);
        let denom = l2 - 2.0 * l1 + l0;
        if denom != 0.0 { l2 - (l2 - l1) * (l2 - l1) / denom } else { l2 }
    } else {
        *lambdas.last().unwrap()
    };
    // Scaffold ratios at the accumulation point, when it is resolvable.
    let alphas: Vec<f64> = if depth >= 5 {
        let spec = crate::MapSpec::new(m.family, m.t, lambda_inf, m.a)?;
        let sc = Scaffold::build(&spec, depth.min(MAX_DEPTH - 1))?;
        (1..sc.depth())
            .map(|k| sc.interval_i(k).length() / sc.interval_i(k + 1).length())
            .collect()
    } else {
        Vec::new()
    };
    let rows: Vec<CascadeRow> = (1..=depth)
        .map(|k| CascadeRow {
            k,
            lambda: lambdas[k - 1],
            delta: (k >= 2 && k < depth)
                .then(|| (lambdas[k - 1] - lambdas[k - 2]) / (lambdas[k] - lambdas[k - 1])),
            alpha: alphas.get(k - 1).copied(),
        })
        .collect();
    let echo = json!({
        "command": "cascade",
        "map": {"family": m.family, "t": m.t, "a": m.a},
        "depth": depth,
        "derived": {"lambda_inf": lambda_inf},
    });
    let csv = CsvTable {
        metadata: format!(
            "cascade family={:?} t={} a={} depth={} lambda_inf={}",
            m.family, m.t, m.a, depth, fmt_f64(lambda_inf)
        ),
        header: vec!["k", "lambda", "delta", "alpha"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    fmt_f64(r.lambda),
                    r.delta.map(fmt_f64).unwrap_or_default(),
                    r.alpha.map(fmt_f64).unwrap_or_default(),
                ]
            })
            .collect(),
    };
    emit(&cfg, Envelope::new(echo, rows), csv)
}

fn cmd_geometry(cfg: RunConfig) -> Result<()> {
    let depth = cfg.depth.unwrap_or(DEFAULT_DEPTH);
    if !(1..=MAX_DEPTH).contains(&depth) {
        return Err(Error::InvalidParameter(format!(
            "scaffold depth must be in 1..={MAX_DEPTH}, got {depth}"
        )));
    }
    let spec = cfg.map.resolve(DEFAULT_DEPTH)?;
    let sc = Scaffold::build(&spec, depth)?;
    let report = scaffold::geometry_report(&sc, 512)?;
    let echo = json!({
        "command": "geometry",
        "map": spec,
        "depth": depth,
        "sup_grid": 512,
        "derived": {
            "min_ratio_M_I": report.min_ratio_m_i,
            "min_ratio_I_I": report.min_ratio_i_i,
            "max_sup_N_hn": report.max_sup_n_hn,
        },
    });
    let csv = CsvTable {
        metadata: format!(
            "geometry family={:?} t={} lambda={} a={} depth={} sup_grid=512",
            spec.family(),
            spec.t(),
            fmt_f64(spec.lambda()),
            spec.a(),
            depth
        ),
        header: vec!["n", "ratio_M_I", "ratio_I_I", "sup_N_hn"],
        rows: report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    fmt_f64(r.ratio_m_i),
                    fmt_f64(r.ratio_i_i),
                    fmt_f64(r.sup_n_hn),
                ]
            })
            .collect(),
    };
    emit(&cfg, Envelope::new(echo, report.rows), csv)
}

fn cmd_markov(cfg: RunConfig) -> Result<()> {
    let n_max = cfg.n_max.unwrap_or(markov::DEFAULT_NMAX);
    if n_max + 1 > MAX_DEPTH {
        return Err(Error::InvalidParameter(format!(
            "n_max must be at most {}, got {n_max}",
            MAX_DEPTH - 1
        )));
    }
    let word_len = cfg.word_len.unwrap_or(5);
    let level_cap = cfg.level_cap.unwrap_or(6).min(n_max);
    let samples = cfg.samples.unwrap_or(8);
    let spec = cfg.map.resolve(DEFAULT_DEPTH)?;
    let sc = Scaffold::build(&spec, n_max + 1)?;
    let partition = build_partition(&sc, n_max)?;
    let mut words = Vec::new();
    for k in 1..=word_len {
        words.extend(partition.enumerate_words(k, level_cap));
    }
    for w in &words {
        if !w.is_level_monotone() {
            return Err(Error::CombinatorialMismatch(format!(
                "level monotonicity violated by word {w}"
            )));
        }
    }
    let cylinders = exec::map_items(&words, |w| {
        partition.word_cylinder_and_distortion(w, samples)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let echo = json!({
        "command": "markov",
        "map": spec,
        "n_max": n_max,
        "word_len": word_len,
        "level_cap": level_cap,
        "samples": samples,
        "derived": {"word_count": cylinders.len()},
    });
    let csv = CsvTable {
        metadata: format!(
            "markov family={:?} t={} lambda={} a={} n_max={n_max} word_len={word_len} level_cap={level_cap} samples={samples}",
            spec.family(),
            spec.t(),
            fmt_f64(spec.lambda()),
            spec.a()
        ),
        header: vec!["word", "|D(g_w)|", "sup_N_times_D", "derivative_ratio"],
        rows: cylinders
            .iter()
            .map(|c| {
                vec![
                    c.word.clone(),
                    fmt_f64(c.gw_domain.length()),
                    fmt_f64(c.sup_n_times_d),
                    fmt_f64(c.deriv_ratio),
                ]
            })
            .collect(),
    };
    emit(&cfg, Envelope::new(echo, cylinders), csv)
}

fn cmd_conjugacy(cfg: RunConfig) -> Result<()> {
    let n_max = cfg.n_max.unwrap_or(MAX_DEPTH - 1);
    if n_max + 1 > MAX_DEPTH {
        return Err(Error::InvalidParameter(format!(
            "n_max must be at most {}, got {n_max}",
            MAX_DEPTH - 1
        )));
    }
    let depth = cfg.itinerary_depth.unwrap_or(DEFAULT_ITINERARY_DEPTH);
    let scales = cfg.scales.clone().unwrap_or_else(|| vec![10, 11, 12]);
    let grid_n = cfg.qs_grid.unwrap_or(512);
    let target = cfg.map.resolve(DEFAULT_DEPTH)?;
    let source = match &cfg.second_map {
        Some(m) => m.resolve(DEFAULT_DEPTH)?,
        None => target.clone(),
    };
    let sc_t = Scaffold::build(&target, n_max + 1)?;
    let sc_s = Scaffold::build(&source, n_max + 1)?;
    let conj = Conjugacy::new(build_partition(&sc_s, n_max)?, build_partition(&sc_t, n_max)?, depth)?;
    let report = conj.qs_report(&scales, grid_n)?;
    if !report.all_reliable {
        let worst = report
            .rows
            .iter()
            .filter(|r| !r.reliable)
            .map(|r| r.max_err_bound)
            .fold(0.0f64, f64::max);
        return Err(Error::DepthInsufficient(depth, worst));
    }
    let echo = json!({
        "command": "conjugacy",
        "map": target,
        "second_map": source,
        "n_max": n_max,
        "itinerary_depth": depth,
        "qs_grid": grid_n,
        "derived": {"m_hat": report.m_hat},
    });
    let csv = CsvTable {
        metadata: format!(
            "conjugacy n_max={n_max} itinerary_depth={depth} qs_grid={grid_n} m_hat={}",
            fmt_f64(report.m_hat)
        ),
        header: vec!["d", "max_ratio", "samples", "max_err_bound", "reliable_flag"],
        rows: report
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt_f64(r.d),
                    fmt_f64(r.max_ratio),
                    r.samples.to_string(),
                    fmt_f64(r.max_err_bound),
                    r.reliable.to_string(),
                ]
            })
            .collect(),
    };
    emit(&cfg, Envelope::new(echo, report.rows), csv)
}

#[derive(Debug, Serialize)]
struct Lemma3Row {
    t: f64,
    big_k: f64,
    w: f64,
}

fn cmd_lemma3(cfg: RunConfig) -> Result<()> {
    let t = cfg.map.t;
    if t <= 1.0 {
        return Err(Error::InvalidParameter(format!("t must exceed 1, got {t}")));
    }
    let ks = cfg
        .k_values
        .clone()
        .unwrap_or_else(|| vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    if ks.iter().any(|&k| k < 0.0 || !k.is_finite()) {
        return Err(Error::InvalidParameter("K values must be finite and >= 0".into()));
    }
    let rows: Vec<Lemma3Row> = ks
        .iter()
        .map(|&big_k| Lemma3Row { t, big_k, w: cascade::lemma3_solve(t, big_k) })
        .collect();
    let echo = json!({"command": "lemma3", "t": t, "k_values": ks});
    let csv = CsvTable {
        metadata: format!("lemma3 t={t}"),
        header: vec!["t", "K", "w"],
        rows: rows
            .iter()
            .map(|r| vec![fmt_f64(r.t), fmt_f64(r.big_k), fmt_f64(r.w)])
            .collect(),
    };
    emit(&cfg, Envelope::new(echo, rows), csv)
}
