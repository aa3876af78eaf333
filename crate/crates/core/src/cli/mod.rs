//! Command-line front end.

mod finite;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::diffraction::{self, WeightedComb};
use crate::error::{Error, Result};
use crate::rulespec::{parse_rule_file, validate, Letter, RuleBody, RuleSpec};
use crate::spectral::{self, SpectralOptions};
use crate::supertile::{self, Limits, Word};
use crate::transition;

pub use finite::NonFinite;

pub const SCHEMA_VERSION: &str = "1.0.0";

/// Version tag carried by every JSON document the CLI writes.
pub fn report_schema_version() -> &'static str {
    SCHEMA_VERSION
}

#[derive(Debug, Parser)]
#[command(name = "tilespec", version, about = "Supertile rules, transition statistics, spectral tests and diffraction")]
pub struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Tolerance for eigenvalue tests.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Number of levels sampled by eigenvalue tests.
    #[arg(long, global = true, default_value_t = 40)]
    pub nmax: usize,
    /// Write the result to this file (atomically) instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a rule file and list any issues.
    Validate { rule: PathBuf },
    /// Build the level-n supertile of one type.
    Grow {
        rule: PathBuf,
        /// Supertile type; defaults to the first symbol.
        #[arg(long = "type")]
        ty: Option<String>,
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List the legal words of one length.
    Words {
        rule: PathBuf,
        #[arg(long, default_value_t = 3)]
        length: usize,
        /// Superword level the words are read from.
        #[arg(long, default_value_t = 10)]
        horizon: usize,
        /// Also report the repetitivity radius of this word.
        #[arg(long)]
        patch: Option<String>,
    },
    /// Transition matrix of one level, or the product over levels.
    Matrix {
        rule: PathBuf,
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Product M_{level,to} instead of a single level.
        #[arg(long)]
        to: Option<usize>,
        /// Levels inspected when primitivity cannot be decided exactly.
        #[arg(long, default_value_t = 64)]
        horizon: usize,
    },
    /// Perron data and letter frequencies.
    Freq {
        rule: PathBuf,
        /// Depth of the frequency sequence for fusion rules.
        #[arg(long, default_value_t = 16)]
        depth: usize,
        /// Also count letters in the level-n supertile of the first symbol.
        #[arg(long)]
        empirical: Option<usize>,
    },
    /// Algebraic, coincidence and eigenvalue diagnostics.
    Spectral {
        rule: PathBuf,
        /// Candidate eigenvalue for the Host test: p/q, a decimal or `phi`.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 8)]
        max_power: usize,
        #[arg(long, default_value_t = 10_000)]
        prefix_len: usize,
    },
    /// Validation, transition statistics and spectral diagnostics together.
    Analyze {
        rule: PathBuf,
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Intensities at chosen frequencies over growing windows, or a peak scan.
    Diffract {
        rule: PathBuf,
        /// Per-symbol weights `sym=re[+imi]`, comma separated; default all 1.
        #[arg(long)]
        weights: Option<String>,
        /// Frequency vector, components comma separated; repeatable.
        #[arg(long)]
        xi: Vec<String>,
        #[arg(long, default_value = "256,512,1024")]
        windows: String,
        /// Scan q-adic candidates j/q^k instead of fixed frequencies.
        #[arg(long)]
        peaks: bool,
        #[arg(long, default_value_t = 10)]
        level: usize,
        /// Candidate denominator exponent; defaults to the level.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
    },
    /// 2-D diffraction raster as PGM (or PPM with --color) plus a CSV of raw intensities.
    Image {
        rule: PathBuf,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long, default_value_t = 7)]
        level: usize,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long)]
        color: bool,
    },
    /// Autocorrelation atoms `z,re,im` of a window with a partner halo.
    Autocorr {
        rule: PathBuf,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long, default_value_t = 4096)]
        window: usize,
        #[arg(long, default_value_t = 8.0)]
        max_offset: f64,
    },
}

/// Anything that can end a run: library errors, I/O, or refused output.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    Io(std::io::Error),
    NonFinite(NonFinite),
    /// Printed report already explains the problem.
    Reported(i32),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Lib(e) => e.exit_code(),
            Failure::Io(_) | Failure::NonFinite(_) => 1,
            Failure::Reported(c) => *c,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<NonFinite> for Failure {
    fn from(e: NonFinite) -> Self {
        Failure::NonFinite(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
            Failure::NonFinite(e) => write!(f, "{e}"),
            Failure::Reported(c) => write!(f, "exit {c}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `argv`, runs the command and returns the exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(out) => match emit(&cli, out, stdout) {
            Ok(()) => 0,
            Err(Failure::Reported(c)) => c,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                e.code()
            }
        },
        Err(Failure::Reported(c)) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("TILESPEC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// What a command produced, before routing to a file or stdout.
enum Output {
    Text(String),
    Json(Value),
    /// Text or JSON chosen later, plus an exit status to report.
    Either { text: String, json: Value, code: i32 },
    Bytes(Vec<u8>),
}

fn emit(cli: &Cli, out: Output, stdout: &mut dyn Write) -> CliResult<()> {
    let (bytes, code) = match out {
        Output::Text(t) => (t.into_bytes(), 0),
        Output::Json(v) => (json_bytes(&v), 0),
        Output::Either { text, json, code } => {
            if cli.json {
                (json_bytes(&json), code)
            } else {
                (text.into_bytes(), code)
            }
        }
        Output::Bytes(b) => (b, 0),
    };
    match &cli.out {
        Some(path) => write_atomic(path, &bytes)?,
        None => stdout.write_all(&bytes)?,
    }
    if code != 0 {
        return Err(Failure::Reported(code));
    }
    Ok(())
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s.into_bytes()
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let mode = std::fs::metadata(path).map(|m| m.permissions().mode()).unwrap_or(0o644);
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(mode))?;
    }
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Serializes `value` with the schema tag, refusing NaN and infinities.
pub fn to_json<T: Serialize>(value: &T) -> std::result::Result<Value, NonFinite> {
    finite::check(value)?;
    let v = serde_json::to_value(value).map_err(|e| NonFinite(e.to_string()))?;
    Ok(match v {
        Value::Object(map) => {
            let mut tagged = serde_json::Map::new();
            tagged.insert("schema".into(), json!(SCHEMA_VERSION));
            tagged.extend(map);
            Value::Object(tagged)
        }
        other => json!({ "schema": SCHEMA_VERSION, "result": other }),
    })
}

fn load(path: &Path) -> CliResult<RuleSpec> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_rule_file(&text).map_err(Error::from)?)
}

fn weights_for(rule: &RuleSpec, spec: &Option<String>) -> Result<Vec<Complex64>> {
    match spec {
        Some(s) => diffraction::parse_weights(s, &rule.alphabet),
        None => Ok(vec![Complex64::new(1.0, 0.0); rule.alphabet.len()]),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("cannot read `{t}` in {what}")))
        })
        .collect()
}

fn execute(cli: &Cli) -> CliResult<Output> {
    let limits = Limits::default();
    match &cli.command {
        Command::Validate { rule } => {
            let rule = load(rule)?;
            let report = validate(&rule);
            let mut text = String::new();
            for i in &report.issues {
                let sev = if i.severity == crate::rulespec::Severity::Error { "error" } else { "warning" };
                let _ = writeln!(text, "{sev}: {}: {}", i.location, i.message);
            }
            let _ = writeln!(text, "{}: {}", rule.name, if report.ok { "ok" } else { "invalid" });
            let json = to_json(&json!({ "rule": rule.name, "kind": rule.kind().as_str(), "ok": report.ok, "issues": report.issues }))?;
            Ok(Output::Either {
                text,
                json,
                code: if report.ok { 0 } else { 3 },
            })
        }
        Command::Grow { rule, ty, level, format } => {
            let rule = load(rule)?;
            let (text, json) = grow(&rule, ty.as_deref(), *level, &limits)?;
            Ok(if cli.json || *format == Format::Json {
                Output::Json(json)
            } else {
                Output::Text(text)
            })
        }
        Command::Words { rule, length, horizon, patch } => {
            let rule = load(rule)?;
            let lang = supertile::legal_words(&rule, *length, *horizon, &limits)?;
            let words: Vec<String> = lang.words.iter().map(|w| w.display(&rule.alphabet).to_string()).collect();
            let mut text = words.join("\n");
            text.push('\n');
            let _ = writeln!(text, "complexity({length}) = {}{}", words.len(), if lang.saturated { "" } else { " (not saturated)" });
            let mut value = json!({
                "length": length,
                "horizon": horizon,
                "complexity": words.len(),
                "saturated": lang.saturated,
                "words": words,
            });
            if let Some(p) = patch {
                let w = Word::parse(p, &rule.alphabet)?;
                let r = supertile::repetitivity_radius(&rule, &w, *horizon, &limits)?;
                let _ = writeln!(text, "repetitivity radius of {p} = {}", r.radius);
                value["repetitivity_radius"] = json!(r.radius);
            }
            Ok(Output::Either { text, json: to_json(&value)?, code: 0 })
        }
        Command::Matrix { rule, level, to, horizon } => {
            let rule = load(rule)?;
            let m = match to {
                Some(big) => transition::matrix_product(&rule, *level, *big)?,
                None => transition::transition_matrix(&rule, *level)?,
            };
            let prim = transition::is_primitive(&rule, *horizon)?;
            let text = format!("{m}primitive: {}\n", prim.verdict());
            let json = to_json(&json!({ "level": level, "to": to, "matrix": m, "primitive": prim }))?;
            Ok(Output::Either { text, json, code: 0 })
        }
        Command::Freq { rule, depth, empirical } => {
            let rule = load(rule)?;
            let report = transition::transition_report(&rule, 1, *depth, 64)?;
            let mut value = serde_json::to_value(&report).map_err(|e| NonFinite(e.to_string()))?;
            finite::check(&report)?;
            let mut text = String::new();
            if let Some(t) = report.theta {
                let _ = writeln!(text, "perron root: {t}");
            }
            let _ = writeln!(text, "primitive: {}", report.primitive.verdict());
            if let Some(f) = &report.frequencies {
                for (s, x) in rule.alphabet.symbols().iter().zip(f) {
                    let _ = writeln!(text, "freq({s}) = {x}");
                }
            }
            if let Some(n) = empirical {
                let e = transition::empirical_frequencies(&rule, 0, *n, &limits)?;
                finite::check(&e)?;
                for (s, x) in rule.alphabet.symbols().iter().zip(&e) {
                    let _ = writeln!(text, "empirical({s}, level {n}) = {x}");
                }
                value["empirical"] = json!(e);
            }
            Ok(Output::Either { text, json: to_json(&value)?, code: 0 })
        }
        Command::Spectral { rule, alpha, p, max_power, prefix_len } => {
            let rule = load(rule)?;
            let opts = SpectralOptions {
                alpha: alpha.as_deref().map(spectral::parse_alpha).transpose()?,
                p: *p,
                n_max: cli.nmax,
                tol: cli.tol,
                max_power: *max_power,
                prefix_len: *prefix_len,
            };
            let report = spectral::spectral_report(&rule, &opts)?;
            let json = to_json(&report)?;
            Ok(Output::Either { text: summary_text(&json), json, code: 0 })
        }
        Command::Analyze { rule, alpha } => {
            let rule = load(rule)?;
            let report = validate(&rule);
            if !report.ok {
                let json = to_json(&json!({ "rule": rule.name, "ok": false, "issues": report.issues }))?;
                let text = report.issues.iter().map(|i| format!("{}: {}\n", i.location, i.message)).collect();
                return Ok(Output::Either { text, json, code: 3 });
            }
            let opts = SpectralOptions {
                alpha: alpha.as_deref().map(spectral::parse_alpha).transpose()?,
                n_max: cli.nmax,
                tol: cli.tol,
                ..SpectralOptions::default()
            };
            let trans = transition::transition_report(&rule, 1, 16, 64)?;
            let spec = spectral::spectral_report(&rule, &opts)?;
            #[derive(Serialize)]
            struct Analysis<'a> {
                rule: &'a str,
                kind: &'static str,
                dim: usize,
                alphabet: &'a [String],
                warnings: usize,
                transition: &'a transition::TransitionReport,
                #[serde(flatten)]
                spectral: &'a spectral::SpectralReport,
            }
            let json = to_json(&Analysis {
                rule: &rule.name,
                kind: rule.kind().as_str(),
                dim: rule.dim,
                alphabet: rule.alphabet.symbols(),
                warnings: report.issues.len(),
                transition: &trans,
                spectral: &spec,
            })?;
            Ok(Output::Either { text: summary_text(&json), json, code: 0 })
        }
        Command::Diffract { rule, weights, xi, windows, peaks, level, k, threshold } => {
            let rule = load(rule)?;
            let w = weights_for(&rule, weights)?;
            if *peaks {
                let scan = diffraction::peak_scan(&rule, &w, *level, k.unwrap_or(*level), *threshold)?;
                let d = rule.dim;
                let mut text = (1..=d).map(|i| format!("xi_{i},")).collect::<String>();
                text.push_str("intensity\n");
                for p in &scan.peaks {
                    for x in &p.xi {
                        let _ = write!(text, "{x:?},");
                    }
                    let _ = writeln!(text, "{:?}", p.intensity);
                }
                return Ok(Output::Either { text, json: to_json(&scan)?, code: 0 });
            }
            if xi.is_empty() {
                return Err(Error::InvalidArgument("give at least one --xi or use --peaks".into()).into());
            }
            let ns: Vec<usize> = parse_list(windows, "--windows")?;
            let combs = diffraction::window_combs(&rule, &w, &ns, &limits)?;
            let mut entries = Vec::new();
            for x in xi {
                let v: Vec<f64> = parse_list(x, "--xi")?;
                if v.len() != rule.dim {
                    return Err(Error::InvalidArgument(format!("--xi {x} needs {} components", rule.dim)).into());
                }
                entries.push(diffraction::intensity(&combs, &v)?);
            }
            let mut text = (1..=rule.dim).map(|i| format!("xi_{i},")).collect::<String>();
            text.push_str("intensity,window\n");
            for e in &entries {
                for (n, (_, i)) in ns.iter().zip(&e.values) {
                    for x in &e.xi {
                        let _ = write!(text, "{x:?},");
                    }
                    let _ = writeln!(text, "{i:?},{n}");
                }
            }
            finite::check(&entries)?;
            Ok(Output::Either { text, json: to_json(&json!({ "windows": ns, "entries": entries }))?, code: 0 })
        }
        Command::Image { rule, weights, level, grid, gamma, color } => {
            let rule = load(rule)?;
            let out = cli
                .out
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("image needs --out".into()))?;
            if !(gamma.is_finite() && *gamma > 0.0) {
                return Err(Error::InvalidArgument("gamma must be positive".into()).into());
            }
            let w = weights_for(&rule, weights)?;
            let img = diffraction::diffraction_image(&rule, &w, *level, *grid, &limits)?;
            finite::check(&img.intensities)?;
            let pixels = img.pixels(*gamma);
            let bytes = if *color {
                crate::image::encode_ppm(*grid, *grid, &crate::image::colorize(&pixels))?
            } else {
                crate::image::encode_pgm(*grid, *grid, &pixels)?
            };
            let mut csv = String::from("xi_1,xi_2,intensity,window\n");
            for (idx, i) in img.intensities.iter().enumerate() {
                let (u, v) = (idx % grid, idx / grid);
                let _ = writeln!(csv, "{:?},{:?},{i:?},{}", u as f64 / *grid as f64, v as f64 / *grid as f64, img.window);
            }
            write_atomic(&out.with_extension("csv"), csv.as_bytes())?;
            Ok(Output::Bytes(bytes))
        }
        Command::Autocorr { rule, weights, window, max_offset } => {
            let rule = load(rule)?;
            let w = weights_for(&rule, weights)?;
            let comb = halo_comb(&rule, &w, *window, *max_offset, &limits)?;
            let a = diffraction::autocorrelation(&comb, *max_offset);
            finite::check(&a)?;
            let mut text = if comb.dim == 1 {
                "z,re,im\n".to_string()
            } else {
                (1..=comb.dim).map(|i| format!("z_{i},")).collect::<String>() + "re,im\n"
            };
            for (z, v) in &a.atoms {
                for c in z {
                    let _ = write!(text, "{c:?},");
                }
                // adding zero folds -0.0 into 0.0
                let _ = writeln!(text, "{:?},{:?}", v.re + 0.0, v.im + 0.0);
            }
            Ok(Output::Either { text, json: to_json(&a)?, code: 0 })
        }
    }
}

/// A window of `n` tiles (or `n^d` cells) inside the rule's sample, with
/// partners out to `max_offset` on every side.
fn halo_comb(rule: &RuleSpec, w: &[Complex64], n: usize, max_offset: f64, limits: &Limits) -> Result<WeightedComb> {
    if n == 0 || !(max_offset.is_finite() && max_offset >= 0.0) {
        return Err(Error::InvalidArgument("window must be positive and max-offset finite".into()));
    }
    let halo = max_offset.ceil() as usize;
    match &rule.body {
        RuleBody::Inflation(_) => {
            let lengths = transition::tile_volumes(rule)?;
            let min = lengths.iter().copied().fold(f64::INFINITY, f64::min);
            let extra = (max_offset / min).ceil() as usize + 1;
            let word = diffraction::sample_word(rule, n + 2 * extra, limits)?;
            let p = supertile::IntervalPatch::from_word(&word, &lengths);
            let (start, end) = (p.tiles[extra].left, p.tiles[n + extra].left);
            diffraction::comb_from_patch(diffraction::PatchRef::Interval(&p), w)?.with_window(vec![(start, end)])
        }
        _ => {
            let mut combs = diffraction::window_combs(rule, w, &[n + 2 * halo], limits)?;
            let c = combs.pop().expect("one window requested");
            let dim = c.dim;
            c.with_window(vec![(halo as f64, (n + halo) as f64); dim])
        }
    }
}

fn symbol_of(rule: &RuleSpec, ty: Option<&str>) -> Result<Letter> {
    match ty {
        Some(t) => rule.alphabet.index_of(t).ok_or_else(|| Error::UnknownType(t.to_string())),
        None => Ok(0),
    }
}

fn grow(rule: &RuleSpec, ty: Option<&str>, level: usize, limits: &Limits) -> CliResult<(String, Value)> {
    let head = json!({ "rule": rule.name, "level": level });
    let (text, mut value) = match &rule.body {
        RuleBody::Symbolic(_) | RuleBody::Sadic(_) => {
            let a = symbol_of(rule, ty)?;
            let word = if matches!(rule.body, RuleBody::Sadic(_)) {
                supertile::sadic_superword(rule, a, level, limits)?
            } else {
                supertile::superword(rule, a, level, limits)?
            };
            let symbols: Vec<&str> = word.iter().map(|&l| rule.alphabet.symbol(l)).collect();
            (
                format!("{}\n", word.display(&rule.alphabet)),
                json!({ "type": rule.alphabet.symbol(a), "length": word.len(), "word": symbols }),
            )
        }
        RuleBody::Inflation(_) => {
            let a = symbol_of(rule, ty)?;
            let lengths = transition::tile_volumes(rule)?;
            let p = supertile::supertile_interval(rule, a, level, &lengths, limits)?;
            let tiles: Vec<Value> = p
                .tiles
                .iter()
                .map(|t| json!({ "symbol": rule.alphabet.symbol(t.letter), "left": t.left, "length": t.length }))
                .collect();
            finite::check(&p.tiles.iter().map(|t| (t.left, t.length)).collect::<Vec<_>>())?;
            (
                p.render(&rule.alphabet),
                json!({ "type": rule.alphabet.symbol(a), "tiles": tiles, "total_length": p.total_length() }),
            )
        }
        RuleBody::Block(_) => {
            let a = symbol_of(rule, ty)?;
            let b = supertile::superblock(rule, a, level, limits)?;
            let rows: Vec<Vec<&str>> = b.rows().map(|r| r.iter().map(|&l| rule.alphabet.symbol(l)).collect()).collect();
            (
                b.render(&rule.alphabet),
                json!({ "type": rule.alphabet.symbol(a), "extents": b.extents, "rows": rows }),
            )
        }
        RuleBody::Fusion(_) | RuleBody::VectorFusion(_) => {
            let name = match ty {
                Some(t) => t.to_string(),
                None => match &rule.body {
                    RuleBody::Fusion(_) => supertile::fusion_type_names(rule, level)?
                        .into_iter()
                        .next()
                        .ok_or_else(|| Error::UnknownType("(none)".into()))?,
                    _ => rule.alphabet.symbols()[0].clone(),
                },
            };
            let p = supertile::fusion_supertile(rule, &name, level, limits)?;
            let cells: Vec<Value> = p
                .cells
                .iter()
                .map(|(c, &l)| json!({ "at": c, "symbol": rule.alphabet.symbol(l) }))
                .collect();
            (p.render(&rule.alphabet), json!({ "type": name, "volume": p.len(), "cells": cells }))
        }
    };
    for (k, v) in head.as_object().expect("object literal") {
        value[k] = v.clone();
    }
    Ok((text, to_json(&value)?))
}

/// `key: value` lines for the scalar and short-array fields of a report.
fn summary_text(v: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = v {
        for (k, x) in map {
            match x {
                Value::Object(_) => {
                    let _ = writeln!(out, "{k}: {}", serde_json::to_string(x).unwrap_or_default());
                }
                Value::String(s) => {
                    let _ = writeln!(out, "{k}: {s}");
                }
                other => {
                    let _ = writeln!(out, "{k}: {other}");
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_tag() {
        let v = to_json(&json!({"a": 1})).unwrap();
        assert_eq!(v["schema"], SCHEMA_VERSION);
        let v = to_json(&vec![1, 2]).unwrap();
        assert_eq!(v["schema"], report_schema_version());
        assert_eq!(v["result"], json!([1, 2]));
        assert!(to_json(&vec![f64::NAN]).is_err());
    }

    #[test]
    fn clap_errors_exit_two() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["tilespec", "bogus"], &mut o, &mut e), 2);
        assert_eq!(run(["tilespec", "grow"], &mut o, &mut e), 2);
        assert_eq!(run(["tilespec", "--help"], &mut o, &mut e), 0);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
