//! Command-line front end.
//!
//! Every command writes its results into an output directory (the
//! `--out-dir` flag, else the `HILL_SPECTRA_OUT_DIR` environment variable,
//! else the working directory). CSV files start with two `#` comment lines
//! carrying the format version and the run manifest; JSON files carry a
//! `schema_version` field and the manifest. Files are written atomically.
//!
//! Exit codes: `0` success, `1` computation failure (a diagnostic JSON
//! object goes to stderr and to `error.json`), `2` usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::model::{PotentialCoeffs, QuasiMomentum, SolverConfig};
use crate::shooting::{discriminant_fixed_step, find_critical_points, integrate_fundamental, Rectangle};
use crate::singularity::{classify_spectrality, pairing_dn, scan_singularity_at_infinity, ScanConfig};
use crate::spectrum::{assemble_spectrum, gap_table, separation_report, uniform_grid, ArcConfig, GapCell};

pub const SCHEMA_VERSION: u32 = 1;
pub const OUT_DIR_ENV: &str = "HILL_SPECTRA_OUT_DIR";

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hill-spectra",
    version,
    about = "Spectra of the complex Mathieu-Hill operator"
)]
pub struct Cli {
    /// Directory for output files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the spectral arcs of labels ±1..±nmax over t in [0, π].
    Spectrum(SpectrumArgs),
    /// Compare measured band-edge gaps with their asymptotic predictions.
    Gaps(GapsArgs),
    /// Decide asymptotic spectrality from a and b.
    Classify(ClassifyArgs),
    /// Tabulate the biorthogonal pairing d_n(t).
    Pairing(PairingArgs),
    /// Sample the Hill discriminant F(λ) on a segment or rectangle.
    Discriminant(DiscriminantArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PotentialArgs {
    /// Coefficient of exp(-2πix), as "re,im".
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub a: Complex64,
    /// Coefficient of exp(2πix), as "re,im".
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub b: Complex64,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Truncation half-width M (modes -M..=M).
    #[arg(long = "m", default_value_t = 32)]
    pub m: usize,
    #[arg(long, default_value = "1e-13")]
    pub ode_tol: f64,
    #[arg(long, default_value = "1e-10")]
    pub newton_tol: f64,
    #[arg(long, default_value_t = 60)]
    pub max_newton_iters: usize,
    #[arg(long, default_value = "1e-12")]
    pub eig_tol: f64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            truncation_half_width: self.m,
            ode_tolerance: self.ode_tol,
            newton_tolerance: self.newton_tol,
            max_newton_iters: self.max_newton_iters,
            eig_deflation_tol: self.eig_tol,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub nmax: u32,
    /// Number of equally spaced t values on [0, π].
    #[arg(long, default_value_t = 129)]
    pub grid: usize,
    /// Labels with |n| <= n0 are outside the asymptotic regime.
    #[arg(long, default_value_t = 3)]
    pub n0: u32,
    #[arg(long, default_value_t = 16)]
    pub resync_every: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GapsArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub nmax: u32,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Largest denominator considered for α.
    #[arg(long, default_value_t = 1_000_000)]
    pub q_cap: u64,
    /// Accept α = m/q when |α - m/q| is at most this.
    #[arg(long, default_value = "1e-9")]
    pub rational_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PairingArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Label or inclusive label range, e.g. "3" or "-2:8".
    #[arg(long, value_parser = parse_label_range, allow_hyphen_values = true)]
    pub n: LabelRange,
    /// Comma-separated quasi-momenta; overrides --grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "grid")]
    pub t: Vec<f64>,
    /// Number of equally spaced t values on [0, π].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Threshold for the trend verdict.
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
    /// Number of trailing labels examined for the trend.
    #[arg(long, default_value_t = 3)]
    pub window: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DiscriminantArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Segment start "re,im" (use with --to).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, requires = "to")]
    pub from: Option<Complex64>,
    /// Segment end "re,im".
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, requires = "from")]
    pub to: Option<Complex64>,
    /// Points on the segment, both ends included.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// Rectangle "re_min,re_max,im_min,im_max".
    #[arg(long, value_parser = parse_rect, allow_hyphen_values = true, conflicts_with_all = ["from", "center"])]
    pub rect: Option<Rectangle>,
    /// Rectangle centre "re,im" (use with --half).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, requires = "half", conflicts_with = "from")]
    pub center: Option<Complex64>,
    /// Rectangle half-extents "half_re,half_im".
    #[arg(long, value_parser = parse_complex, requires = "center")]
    pub half: Option<Complex64>,
    /// Grid points per side of the rectangle.
    #[arg(long, default_value_t = 16)]
    pub density: usize,
    /// Also list the zeros of dF/dλ inside the rectangle.
    #[arg(long)]
    pub critical: bool,
    /// Add a fixed-step RK4 (Richardson) value of F with this many steps.
    #[arg(long)]
    pub oracle_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelRange {
    pub lo: i32,
    pub hi: i32,
}

impl LabelRange {
    pub fn labels(&self) -> Vec<i32> {
        (self.lo..=self.hi).collect()
    }
}

/// Parses `"re,im"`; a bare real number is also accepted.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| {
        x.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("'{x}' is not a finite number"))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected \"re,im\", got '{s}'")),
    }
}

fn parse_rect(s: &str) -> Result<Rectangle, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number")))
        .collect::<Result<_, _>>()?;
    if v.len() != 4 {
        return Err(format!("expected \"re_min,re_max,im_min,im_max\", got '{s}'"));
    }
    Rectangle::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

pub fn parse_label_range(s: &str) -> Result<LabelRange, String> {
    let int = |x: &str| x.trim().parse::<i32>().map_err(|_| format!("'{x}' is not an integer"));
    let (lo, hi) = match s.split_once(':') {
        Some((a, b)) => (int(a)?, int(b)?),
        None => {
            let n = int(s)?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(format!("empty label range {lo}:{hi}"));
    }
    Ok(LabelRange { lo, hi })
}

/// Provenance attached to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    fn new(command: &str, parameters: Value) -> Self {
        Self {
            command: command.into(),
            parameters,
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        }
    }
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn potential_json(p: &PotentialArgs) -> Value {
    json!({ "a": complex_json(p.a), "b": complex_json(p.b) })
}

fn solver_json(s: &SolverArgs) -> Value {
    serde_json::to_value(s.config()).expect("config serializes")
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

enum Failure {
    Usage(String),
    Computation(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(msg) => Failure::Usage(msg),
            other => Failure::Computation(other),
        }
    }
}

type CmdResult = std::result::Result<Vec<PathBuf>, Failure>;

struct Output {
    dir: PathBuf,
    manifest: RunManifest,
    written: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path, manifest: RunManifest) -> std::result::Result<Self, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Computation(e.into()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            written: Vec::new(),
        })
    }

    fn write_atomic(&mut self, name: &str, bytes: &[u8]) -> std::result::Result<(), Failure> {
        let target = self.dir.join(name);
        let io = |e: std::io::Error| Failure::Computation(e.into());
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&target).map_err(|e| io(e.error))?;
        self.written.push(target);
        Ok(())
    }

    fn csv(
        &mut self,
        name: &str,
        format: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> std::result::Result<(), Failure> {
        let mut buf = format!(
            "# hill-spectra {format} v{SCHEMA_VERSION}\n# manifest: {}\n",
            serde_json::to_string(&self.manifest).expect("manifest serializes")
        )
        .into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let csv_err = |e: csv::Error| Failure::Computation(Error::Io(e.to_string()));
            w.write_record(header).map_err(csv_err)?;
            for r in rows {
                w.write_record(r).map_err(csv_err)?;
            }
            w.flush().map_err(|e| Failure::Computation(e.into()))?;
        }
        self.write_atomic(name, &buf)
    }

    fn json(&mut self, name: &str, body: Value) -> std::result::Result<Value, Failure> {
        let mut doc = json!({
            "schema_version": SCHEMA_VERSION,
            "manifest": self.manifest,
        });
        if let (Some(obj), Value::Object(extra)) = (doc.as_object_mut(), body) {
            obj.extend(extra);
        }
        let mut text = serde_json::to_string_pretty(&doc).expect("values serialize");
        text.push('\n');
        self.write_atomic(name, text.as_bytes())?;
        Ok(doc)
    }
}

fn potential(p: &PotentialArgs) -> std::result::Result<PotentialCoeffs, Failure> {
    Ok(PotentialCoeffs::new(p.a, p.b)?)
}

fn cmd_spectrum(args: &SpectrumArgs, dir: &Path) -> CmdResult {
    let manifest = RunManifest::new(
        "spectrum",
        json!({
            "potential": potential_json(&args.potential),
            "solver": solver_json(&args.solver),
            "nmax": args.nmax,
            "grid": args.grid,
            "n0": args.n0,
            "resync_every": args.resync_every,
        }),
    );
    let pot = potential(&args.potential)?;
    let cfg = args.solver.config();
    let grid = uniform_grid(args.grid)?;
    let arc_cfg = ArcConfig {
        resync_every: args.resync_every,
        n0: args.n0,
        ..ArcConfig::default()
    };
    let arcs = assemble_spectrum(&pot, args.nmax, &grid, &cfg, &arc_cfg)?;
    let report = separation_report(&arcs, &pot, &cfg, args.n0)?;

    let mut out = Output::new(dir, manifest)?;
    let mut arc_entries = Vec::new();
    for arc in &arcs {
        let name = format!("arc_n{:+03}.csv", arc.n.0);
        let rows: Vec<Vec<String>> = arc
            .samples
            .iter()
            .map(|s| {
                vec![
                    num(s.t),
                    num(s.lambda.re),
                    num(s.lambda.im),
                    num(s.abs_df),
                    num(s.f_residual),
                ]
            })
            .collect();
        out.csv(
            &name,
            "arc",
            &["t", "re_lambda", "im_lambda", "abs_dF", "f_residual"],
            &rows,
        )?;
        arc_entries.push(json!({
            "n": arc.n.0,
            "file": name,
            "samples": arc.samples.len(),
            "endpoint_0": complex_json(arc.endpoint_0),
            "endpoint_pi": complex_json(arc.endpoint_pi),
            "min_abs_dF": arc.min_df,
            "max_step": arc.max_step,
            "max_f_residual": arc.max_f_residual(),
            "asymptotic": arc.asymptotic,
            "refinements": arc.refinements,
            "corrections": arc.corrections,
        }));
    }
    out.json(
        "spectrum_summary.json",
        json!({
            "arcs": arc_entries,
            "gap_table": report.gaps,
            "separation": {
                "n0": report.n0,
                "min_distance": report.min_distance.map(|(d, x, y)| json!({ "distance": d, "labels": [x.0, y.0] })),
                "arcs": report.arcs,
            },
        }),
    )?;
    Ok(out.written)
}

fn gap_cells(cell: &GapCell) -> [String; 5] {
    match *cell {
        GapCell::Resolved {
            measured,
            predicted,
            ratio,
        } => [
            "resolved".into(),
            num(measured),
            num(predicted),
            ratio.map(num).unwrap_or_default(),
            String::new(),
        ],
        GapCell::Unresolvable { predicted, noise_floor } => [
            "unresolvable".into(),
            String::new(),
            num(predicted),
            String::new(),
            num(noise_floor),
        ],
    }
}

fn cmd_gaps(args: &GapsArgs, dir: &Path) -> CmdResult {
    let manifest = RunManifest::new(
        "gaps",
        json!({
            "potential": potential_json(&args.potential),
            "solver": solver_json(&args.solver),
            "nmax": args.nmax,
        }),
    );
    let pot = potential(&args.potential)?;
    let cfg = args.solver.config();
    if args.nmax == 0 {
        return Err(Failure::Usage("--nmax must be >= 1".into()));
    }
    cfg.check_label(args.nmax as i32 + 1)?;
    let rows = gap_table(&pot, args.nmax, &cfg)?;

    let mut out = Output::new(dir, manifest)?;
    let mut csv_rows = Vec::new();
    for r in &rows {
        for (edge, cell) in [("periodic", &r.periodic), ("antiperiodic", &r.antiperiodic)] {
            let mut row = vec![r.n.to_string(), edge.to_string()];
            row.extend(gap_cells(cell));
            csv_rows.push(row);
        }
    }
    out.csv(
        "gaps.csv",
        "gaps",
        &["n", "edge", "status", "measured", "predicted", "ratio", "noise_floor"],
        &csv_rows,
    )?;
    out.json("gaps.json", json!({ "rows": rows }))?;
    Ok(out.written)
}

fn cmd_classify(args: &ClassifyArgs, dir: &Path) -> CmdResult {
    let manifest = RunManifest::new(
        "classify",
        json!({
            "potential": potential_json(&args.potential),
            "q_cap": args.q_cap,
            "rational_tol": args.rational_tol,
        }),
    );
    let pot = potential(&args.potential)?;
    let report = classify_spectrality(&pot, args.q_cap, args.rational_tol)?;
    let mut out = Output::new(dir, manifest)?;
    let doc = out.json("classify.json", json!({ "report": report }))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&doc["report"]).expect("values serialize")
    );
    Ok(out.written)
}

fn cmd_pairing(args: &PairingArgs, dir: &Path) -> CmdResult {
    let ts: Vec<f64> = if !args.t.is_empty() {
        args.t.clone()
    } else {
        uniform_grid(args.grid.unwrap_or(129))?
    };
    let manifest = RunManifest::new(
        "pairing",
        json!({
            "potential": potential_json(&args.potential),
            "solver": solver_json(&args.solver),
            "n": [args.n.lo, args.n.hi],
            "t": ts,
            "threshold": args.threshold,
            "window": args.window,
        }),
    );
    let pot = potential(&args.potential)?;
    let cfg = args.solver.config();
    let labels = args.n.labels();
    for &n in &labels {
        cfg.check_label(n)?;
    }
    let qs: Vec<QuasiMomentum> = ts
        .iter()
        .map(|&t| QuasiMomentum::new(t))
        .collect::<crate::Result<_>>()?;

    let jobs: Vec<(i32, QuasiMomentum)> = labels.iter().flat_map(|&n| qs.iter().map(move |&q| (n, q))).collect();
    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|&(n, q)| {
            let mut row = vec![n.to_string(), num(q.value())];
            match pairing_dn(n, &pot, q, &cfg) {
                Ok(r) => {
                    row.extend([
                        "ok".to_string(),
                        num(r.lambda.re),
                        num(r.lambda.im),
                        num(r.d.re),
                        num(r.d.im),
                        num(r.abs_d()),
                    ]);
                }
                Err(e) => {
                    row.push(e.kind().to_string());
                    row.extend(std::iter::repeat_n(String::new(), 5));
                }
            }
            row
        })
        .collect();
    let scan = scan_singularity_at_infinity(
        &pot,
        &labels,
        &ts,
        &cfg,
        &ScanConfig {
            threshold: args.threshold,
            window: args.window,
        },
    )?;

    let mut out = Output::new(dir, manifest)?;
    out.csv(
        "pairing.csv",
        "pairing",
        &["n", "t", "status", "re_lambda", "im_lambda", "re_d", "im_d", "abs_d"],
        &rows,
    )?;
    out.json("pairing.json", json!({ "scan": scan }))?;
    Ok(out.written)
}

fn cmd_discriminant(args: &DiscriminantArgs, dir: &Path) -> CmdResult {
    let region = match (args.rect, args.center, args.half) {
        (Some(r), _, _) => Some(r),
        (None, Some(c), Some(h)) => Some(Rectangle::around(c, h.re, h.im)?),
        _ => None,
    };
    let points: Vec<Complex64> = match (args.from, args.to, region) {
        (Some(z0), Some(z1), None) => {
            if args.samples < 2 {
                return Err(Failure::Usage("--samples must be >= 2".into()));
            }
            (0..args.samples)
                .map(|i| z0 + (z1 - z0) * (i as f64 / (args.samples - 1) as f64))
                .collect()
        }
        (None, None, Some(r)) => {
            let g = args.density;
            if g < 2 {
                return Err(Failure::Usage("--density must be >= 2".into()));
            }
            let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (g - 1) as f64;
            (0..g)
                .flat_map(|j| {
                    (0..g).map(move |i| Complex64::new(step(r.re_min, r.re_max, i), step(r.im_min, r.im_max, j)))
                })
                .collect()
        }
        _ => {
            return Err(Failure::Usage(
                "give either --from/--to, or a rectangle via --rect or --center/--half".into(),
            ))
        }
    };
    if args.critical && region.is_none() {
        return Err(Failure::Usage("--critical needs a rectangle".into()));
    }
    let manifest = RunManifest::new(
        "discriminant",
        json!({
            "potential": potential_json(&args.potential),
            "solver": solver_json(&args.solver),
            "from": args.from.map(complex_json),
            "to": args.to.map(complex_json),
            "samples": args.samples,
            "rect": region.map(|r| json!([r.re_min, r.re_max, r.im_min, r.im_max])),
            "density": args.density,
            "critical": args.critical,
            "oracle_steps": args.oracle_steps,
        }),
    );
    let pot = potential(&args.potential)?;
    let cfg = args.solver.config();
    cfg.validate()?;

    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|&z| -> crate::Result<Vec<String>> {
            let s = integrate_fundamental(&pot, z, &cfg)?;
            let mut row = vec![
                num(z.re),
                num(z.im),
                num(s.f.re),
                num(s.f.im),
                num(s.df.re),
                num(s.df.im),
                num(s.df.norm()),
                num(s.est_error),
                num((s.wronskian() - 1.0).norm()),
            ];
            if let Some(n) = args.oracle_steps {
                let f = discriminant_fixed_step(&pot, z, n)?;
                row.extend([num(f.re), num(f.im)]);
            }
            Ok(row)
        })
        .collect::<crate::Result<_>>()?;

    let mut header = vec![
        "re_lambda",
        "im_lambda",
        "re_F",
        "im_F",
        "re_dF",
        "im_dF",
        "abs_dF",
        "est_error",
        "wronskian_defect",
    ];
    if args.oracle_steps.is_some() {
        header.extend(["re_F_oracle", "im_F_oracle"]);
    }
    let critical = match (args.critical, region) {
        (true, Some(r)) => Some(find_critical_points(&pot, r, args.density, &cfg)?),
        _ => None,
    };

    let mut out = Output::new(dir, manifest)?;
    out.csv("discriminant.csv", "discriminant", &header, &rows)?;
    if let Some(search) = critical {
        let rows: Vec<Vec<String>> = search
            .points
            .iter()
            .map(|p| {
                vec![
                    num(p.lambda.re),
                    num(p.lambda.im),
                    num(p.f.re),
                    num(p.f.im),
                    num(p.d2f.re),
                    num(p.d2f.im),
                ]
            })
            .collect();
        out.csv(
            "critical_points.csv",
            "critical_points",
            &["re_lambda", "im_lambda", "re_F", "im_F", "re_d2F", "im_d2F"],
            &rows,
        )?;
        out.json("critical_points.json", json!({ "search": search }))?;
    }
    Ok(out.written)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Spectrum(_) => "spectrum",
        Command::Gaps(_) => "gaps",
        Command::Classify(_) => "classify",
        Command::Pairing(_) => "pairing",
        Command::Discriminant(_) => "discriminant",
    }
}

fn error_details(e: &Error) -> Value {
    match e {
        Error::ArcTracing { label, t, samples, .. } => json!({
            "label": label,
            "t": t,
            "partial_samples": samples.iter().map(|(t, z)| json!([t, z.re, z.im])).collect::<Vec<_>>(),
        }),
        Error::Pairing { t, source } => json!({ "t": t, "cause": source.kind(), "cause_message": source.to_string() }),
        Error::NotSimple { label, t } => json!({ "label": label, "t": t }),
        Error::NearCritical { lambda, abs_derivative } => {
            json!({ "lambda": complex_json(*lambda), "abs_dF": abs_derivative })
        }
        _ => Value::Null,
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    })
    .unwrap_or_else(|| PathBuf::from("."))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_SUCCESS };
        }
    };
    let dir = out_dir(cli.out_dir.clone());
    let result = match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a, &dir),
        Command::Gaps(a) => cmd_gaps(a, &dir),
        Command::Classify(a) => cmd_classify(a, &dir),
        Command::Pairing(a) => cmd_pairing(a, &dir),
        Command::Discriminant(a) => cmd_discriminant(a, &dir),
    };
    match result {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            EXIT_SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Computation(e)) => {
            let diag = json!({
                "schema_version": SCHEMA_VERSION,
                "status": "error",
                "command": command_name(&cli.command),
                "kind": e.kind(),
                "message": e.to_string(),
                "details": error_details(&e),
            });
            let text = serde_json::to_string_pretty(&diag).expect("values serialize");
            eprintln!("{text}");
            if std::fs::create_dir_all(&dir).is_ok() {
                let _ = std::fs::write(dir.join("error.json"), format!("{text}\n"));
            }
            EXIT_FAILURE
        }
    }
}
