use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use serde_json::json;

use rpst_walk::length_dist::{DistKind, LengthDistribution};
use rpst_walk::plot::{self, NumericTable};
use rpst_walk::rng::RngStream;
use rpst_walk::rps::{max_rps_entropy, rps_entropy, PermutationMassFunction};
use rpst_walk::rvg::{self, StepGenerator};
use rpst_walk::verify::{self, SuiteParams};
use rpst_walk::walk::{self, EnsembleManifest, WalkConfig};
use rpst_walk::{stats, Error};

use crate::config::{FileConfig, RunManifest};
use crate::{
    Command, DistArgs, EntropyArgs, PlotArgs, PlotKind, ReportFormat, RvgArgs, RvgEnumArgs,
    TableFormat, VerifyArgs, WalkArgs,
};

pub const DEFAULT_OUT_DIR: &str = "rpst-out";
pub const DEFAULT_BASE: f64 = 2.0;
pub const DEFAULT_BINS: usize = 31;
pub const ENSEMBLE_MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.csv";

/// What a subcommand did, for the run manifest and the exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub files: Vec<String>,
    pub verification_failed: bool,
}

pub fn run(command: &Command, file: &FileConfig) -> Result<Outcome> {
    match command {
        Command::Entropy(a) => entropy(a, file),
        Command::Dist(a) => dist(a, file),
        Command::Rvg(a) => rvg_sample(a, file),
        Command::RvgEnum(a) => rvg_enum(a, file),
        Command::Walk(a) => walk_cmd(a, file),
        Command::Verify(a) => verify_cmd(a, file),
        Command::Plot(a) => plot_cmd(a, file),
    }
}

pub fn write_manifest(path: &Path, outcome: &Outcome, elapsed: Duration) -> Result<()> {
    let manifest = RunManifest {
        command_line: std::env::args().collect(),
        subcommand: outcome.subcommand.clone(),
        config: outcome.config.clone(),
        seed: outcome.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        files: outcome.files.clone(),
        duration_secs: elapsed.as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn required<T>(flag: Option<T>, config: Option<T>, name: &str) -> Result<T> {
    flag.or(config)
        .ok_or_else(|| Error::Domain(format!("--{name} is required (flag or config file)")).into())
}

/// Writes to `out` if given, otherwise to stdout.
fn emit(out: Option<&Path>, text: &str, files: &mut Vec<String>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            files.push(path.display().to_string());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn install_workers(workers: Option<usize>) -> Result<()> {
    if let Some(w) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global()
            .map_err(|e| Error::Capacity(format!("cannot start {w} workers: {e}")))?;
    }
    Ok(())
}

fn entropy(a: &EntropyArgs, file: &FileConfig) -> Result<Outcome> {
    let base = a.base.or(file.base).unwrap_or(DEFAULT_BASE);
    if a.pmf_file.is_none() && a.max_n.is_none() {
        return Err(Error::Domain("give a mass function file, --max-n, or both".into()).into());
    }
    let mut out = String::new();
    if let Some(path) = &a.pmf_file {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let pmf = PermutationMassFunction::from_json(&text)
            .with_context(|| format!("in {}", path.display()))?;
        writeln!(out, "{}", rps_entropy(&pmf, base)?)?;
    }
    if let Some(max_n) = a.max_n {
        out.push_str("n,max_entropy\n");
        for n in 1..=max_n {
            writeln!(out, "{n},{}", max_rps_entropy(n, base)?)?;
        }
    }
    print!("{out}");
    Ok(Outcome {
        subcommand: "entropy".into(),
        config: json!({ "pmf_file": a.pmf_file, "base": base, "max_n": a.max_n }),
        ..Outcome::default()
    })
}

fn dist_table(d: &LengthDistribution, format: TableFormat) -> String {
    match format {
        TableFormat::Csv => {
            let mut s = String::from("n,p\n");
            for n in 1..=d.max_len() {
                writeln!(s, "{n},{}", d.prob(n)).unwrap();
            }
            s
        }
        TableFormat::Json => {
            let denominator = d.exact(1).map(|(_, den)| den.to_string());
            let rows: Vec<_> = (1..=d.max_len())
                .map(|n| {
                    json!({
                        "n": n,
                        "p": d.prob(n),
                        "numerator": d.exact(n).map(|(num, _)| num.to_string()),
                    })
                })
                .collect();
            let v = json!({
                "kind": d.kind(),
                "max_len": d.max_len(),
                "denominator": denominator,
                "rows": rows,
            });
            serde_json::to_string_pretty(&v).unwrap() + "\n"
        }
    }
}

fn dist(a: &DistArgs, file: &FileConfig) -> Result<Outcome> {
    let kind = a.kind.or(file.dist).unwrap_or(DistKind::Rps);
    let max_len = required(a.max_len, file.max_len, "max-len")?;
    let d = LengthDistribution::new(kind, max_len)?;
    let mut files = Vec::new();
    emit(a.out.as_deref(), &dist_table(&d, a.format), &mut files)?;
    Ok(Outcome {
        subcommand: "dist".into(),
        config: json!({ "kind": kind, "max_len": max_len, "format": format!("{:?}", a.format).to_lowercase() }),
        files,
        ..Outcome::default()
    })
}

fn rvg_sample(a: &RvgArgs, file: &FileConfig) -> Result<Outcome> {
    let n = required(a.n, file.n, "n")?;
    let count = a.count.or(file.count).unwrap_or(1);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let mut rng = RngStream::new(seed, 0);
    let mut gen = StepGenerator::new(n);
    let mut s = String::from("vx,vy\n");
    for _ in 0..count {
        let v = gen.sample(n, &mut rng)?;
        writeln!(s, "{},{}", v.vx, v.vy)?;
    }
    let mut files = Vec::new();
    emit(a.out.as_deref(), &s, &mut files)?;
    Ok(Outcome {
        subcommand: "rvg".into(),
        config: json!({ "n": n, "count": count, "seed": seed }),
        seed: Some(seed),
        files,
        ..Outcome::default()
    })
}

fn rvg_enum(a: &RvgEnumArgs, file: &FileConfig) -> Result<Outcome> {
    let n = required(a.n, file.n, "n")?;
    let table = rvg::enumerate_support(n)?;
    let text = match a.format {
        TableFormat::Csv => {
            let mut s = String::from("vx,vy,count\n");
            for e in &table.entries {
                writeln!(s, "{},{},{}", e.vx, e.vy, e.count)?;
            }
            s
        }
        TableFormat::Json => {
            let v = json!({
                "n": n,
                "permutations": table.total(),
                "distinct": table.len(),
                "support": table.entries,
                "moments": rvg::exact_moments(n)?,
            });
            serde_json::to_string_pretty(&v)? + "\n"
        }
    };
    let mut files = Vec::new();
    emit(a.out.as_deref(), &text, &mut files)?;
    Ok(Outcome {
        subcommand: "rvg-enum".into(),
        config: json!({ "n": n }),
        files,
        ..Outcome::default()
    })
}

fn out_dir(flag: &Option<PathBuf>, file: &FileConfig) -> PathBuf {
    flag.clone()
        .or_else(|| file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn walk_cmd(a: &WalkArgs, file: &FileConfig) -> Result<Outcome> {
    let config = WalkConfig {
        steps: required(a.steps, file.steps, "steps")?,
        max_len: required(a.max_len, file.max_len, "max-len")?,
        dist_kind: a.dist.or(file.dist).unwrap_or(DistKind::Rps),
        seed: a.seed.or(file.seed).unwrap_or(0),
        rho: a.rho.or(file.rho).unwrap_or(walk::DEFAULT_RHO),
        scaled: a.scaled || file.scaled.unwrap_or(false),
    };
    let paths = a.paths.or(file.paths).unwrap_or(1);
    if paths == 0 {
        return Err(Error::Domain("--paths must be at least 1".into()).into());
    }
    let workers = a.workers.or(file.workers);
    let dir = out_dir(&a.out_dir, file);
    let ensemble = match workers {
        Some(w) => walk::generate_ensemble_with_workers(&config, paths, config.seed, w)?,
        None => walk::generate_ensemble(&config, paths, config.seed)?,
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut names = Vec::with_capacity(paths);
    for (i, p) in ensemble.iter().enumerate() {
        let name = walk::path_file_name(i);
        fs::write(dir.join(&name), p.to_csv()).with_context(|| format!("writing {name}"))?;
        names.push(name);
    }
    let mut files: Vec<String> = names
        .iter()
        .map(|n| dir.join(n).display().to_string())
        .collect();
    if paths >= 2 {
        let summary = stats::moment_series(&ensemble)?;
        fs::write(dir.join(SUMMARY_FILE), summary.to_csv())?;
        files.push(dir.join(SUMMARY_FILE).display().to_string());
    }
    let manifest = EnsembleManifest::new(config, config.seed, names);
    fs::write(
        dir.join(ENSEMBLE_MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    files.push(dir.join(ENSEMBLE_MANIFEST_FILE).display().to_string());
    eprintln!("wrote {paths} path(s) to {}", dir.display());
    Ok(Outcome {
        subcommand: "walk".into(),
        config: json!({ "walk": config, "paths": paths, "out_dir": dir, "workers": workers }),
        seed: Some(config.seed),
        files,
        ..Outcome::default()
    })
}

fn verify_cmd(a: &VerifyArgs, file: &FileConfig) -> Result<Outcome> {
    let d = SuiteParams::default();
    let params = SuiteParams {
        seed: a.seed.or(file.seed).unwrap_or(d.seed),
        paths: a.paths.or(file.paths).unwrap_or(d.paths),
        steps: a.steps.or(file.steps).unwrap_or(d.steps),
        max_len: a.max_len.or(file.max_len).unwrap_or(d.max_len),
        rho: a.rho.or(file.rho).unwrap_or(d.rho),
        kind: a.dist.or(file.dist).unwrap_or(d.kind),
    };
    install_workers(a.workers.or(file.workers))?;
    let report = verify::run_suite(a.suite, &params)?;
    match a.format {
        ReportFormat::Json => println!("{}", report.to_json()),
        ReportFormat::Text => print!("{}", report.to_text()),
    }
    for c in report.failures() {
        eprintln!("failed: {c}");
    }
    Ok(Outcome {
        subcommand: "verify".into(),
        config: json!({ "suite": a.suite, "params": params }),
        seed: Some(params.seed),
        verification_failed: !report.passed,
        ..Outcome::default()
    })
}

fn plot_cmd(a: &PlotArgs, file: &FileConfig) -> Result<Outcome> {
    let text =
        fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let table = NumericTable::parse(&text).with_context(|| format!("in {}", a.input.display()))?;
    let title = a.title.clone().unwrap_or_else(|| {
        a.input
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let svg = match a.kind {
        PlotKind::Path => {
            let (xs, ys) = match (table.column("x"), table.column("y")) {
                (Ok(x), Ok(y)) => (x, y),
                _ => (table.column("vx")?, table.column("vy")?),
            };
            plot::path_svg(&xs, &ys, &title)?
        }
        PlotKind::Hist => {
            let name = a.column.clone().unwrap_or_else(|| table.columns[0].clone());
            let bins = a.bins.or(file.bins).unwrap_or(DEFAULT_BINS);
            let h = stats::histogram(&table.column(&name)?, bins)?;
            plot::histogram_svg(&h, &title)
        }
        PlotKind::Series => {
            let t = table.column(&table.columns[0])?;
            let series = table.columns[1..]
                .iter()
                .map(|c| Ok((c.clone(), table.column(c)?)))
                .collect::<Result<Vec<_>>>()?;
            if series.is_empty() {
                return Err(anyhow!(Error::Validation(
                    "series plot needs at least two columns".into()
                )));
            }
            plot::series_svg(&t, &series, &title)?
        }
    };
    let out = match (&a.out, a.out_dir.clone().or_else(|| file.out_dir.clone())) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => {
            fs::create_dir_all(&dir)?;
            dir.join(
                a.input
                    .with_extension("svg")
                    .file_name()
                    .unwrap_or_default(),
            )
        }
        (None, None) => a.input.with_extension("svg"),
    };
    fs::write(&out, svg).with_context(|| format!("writing {}", out.display()))?;
    Ok(Outcome {
        subcommand: "plot".into(),
        config: json!({ "input": a.input, "kind": format!("{:?}", a.kind).to_lowercase(), "bins": a.bins, "column": a.column }),
        files: vec![out.display().to_string()],
        ..Outcome::default()
    })
}
