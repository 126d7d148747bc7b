//! `illposed`: assemble, solve and analyse discretized composite operators.

mod cache;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use illposed_core::analysis::{
    check_bound, default_window, fit_decay, fit_tail_constant, lower_bound_chain, table1_summary, tail_bound_check,
    tail_to_pointwise, todd_check, BoundReport, BoundSpec, DecayModel, Table1Input,
};
use illposed_core::discretize::{
    dha_legendre_section, galerkin_gram, galerkin_gram_f64, left_gram, right_gram, GramMatrix, Scheme,
};
use illposed_core::figures::{render_figure, sha256_hex, FigureSpec, FileEntry, Which};
use illposed_core::ncnc::{build_compact_restriction, compact_product_witness, Selection};
use illposed_core::numerics::{
    float_to_hex, working_epsilon, BigFloat, DEFAULT_PRECISION, DOUBLE_PRECISION, FIGURE_PRECISION,
};
use illposed_core::operators::{verify_dha_identity, CompositionSpec};
use illposed_core::spectra::{eigen_sym, tail_sums, Spectrum};
use illposed_core::{Error, ErrorKind, Result};
use serde::Serialize;

use cache::Cache;

#[derive(Parser, Debug)]
#[command(name = "illposed", version, about = "Singular-value laboratory for composite ill-posed operators")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Cache directory for Gram matrices and spectra (disabled when absent).
    #[arg(long, global = true, env = "ILLPOSED_CACHE_DIR")]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assemble a Gram matrix and write it as JSON.
    Assemble(OperatorArgs),
    /// Singular values as CSV and JSON.
    Spectrum(OperatorArgs),
    /// Power or exponential decay fit over a window of trusted indices.
    Fit {
        #[command(flatten)]
        op: OperatorArgs,
        /// Fit window a:b (default: max(3, cutoff/4):cutoff).
        #[arg(long)]
        window: Option<String>,
        #[arg(long, value_enum, default_value_t = ModelArg::Power)]
        model: ModelArg,
    },
    /// Reference bound curves, and for left sections of DHa the tail bounds.
    Bounds(OperatorArgs),
    /// Exact check of Ha C* = D Ha on monomials.
    Identity {
        #[arg(long, default_value_t = 50)]
        kmax: u32,
        #[arg(long, default_value_t = 50)]
        jmax: u32,
    },
    /// Exact Hilbert inverses against the e^{4N} growth bound, and the lower-bound chain.
    Todd {
        #[arg(long, default_value_t = 1)]
        nmin: usize,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
    },
    /// Greedy compact-restriction construction on the Legendre factor of DHa.
    Ncnc {
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = FIGURE_PRECISION)]
        precision: u32,
        /// Maximum number of steps (default: n).
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value_t = SelectionArg::Frugal)]
        selection: SelectionArg,
        /// Include the vectors (hex) in the trace.
        #[arg(long)]
        vectors: bool,
    },
    /// Render the spectral figures.
    Figures {
        #[arg(long, value_enum)]
        which: WhichArg,
        #[arg(long, default_value_t = FIGURE_PRECISION)]
        precision: u32,
    },
    /// Overview table of fitted and theoretical behaviour.
    Table1 {
        /// Section size for HaJ and DHa.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Galerkin size for CJ and MJ (double precision).
        #[arg(long, default_value_t = 2048)]
        galerkin_n: usize,
        #[arg(long, default_value_t = FIGURE_PRECISION)]
        precision: u32,
    },
}

#[derive(Args, Debug, Clone)]
struct OperatorArgs {
    #[arg(long, value_enum)]
    op: OpArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Left)]
    scheme: SchemeArg,
    #[arg(long)]
    n: usize,
    /// Working precision in bits; 53 selects the double-precision Galerkin path.
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Dilogarithm tolerance of the right scheme (default 2^-(p-16)).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
enum OpArg {
    #[value(name = "J")]
    J,
    #[value(name = "CJ")]
    CJ,
    #[value(name = "J2")]
    J2,
    #[value(name = "MJ")]
    MJ,
    #[value(name = "HaJ")]
    HaJ,
    #[value(name = "DHa")]
    DHa,
    #[value(name = "HN")]
    HN,
}

impl OpArg {
    fn name(self) -> &'static str {
        match self {
            OpArg::J => "J",
            OpArg::CJ => "CJ",
            OpArg::J2 => "J2",
            OpArg::MJ => "MJ",
            OpArg::HaJ => "HaJ",
            OpArg::DHa => "DHa",
            OpArg::HN => "HN",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SchemeArg {
    Left,
    Right,
    Galerkin,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Left => Scheme::LeftSection,
            SchemeArg::Right => Scheme::RightMidpoint,
            SchemeArg::Galerkin => Scheme::Galerkin,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModelArg {
    Power,
    Exponential,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SelectionArg {
    Frugal,
    Minimizer,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum WhichArg {
    Fig1,
    Fig2,
}

/// Everything that determines a command's output.
#[derive(Serialize, Debug, Default)]
struct RunConfig {
    command: String,
    operator: Option<String>,
    scheme: Option<String>,
    n: Option<usize>,
    precision: Option<u32>,
    series_tol: Option<String>,
    window: Option<String>,
    out: String,
    cache: Option<String>,
    extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    schema_version: u32,
    config: &'a RunConfig,
    files: Vec<FileEntry>,
    generated_unix: u64,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        fs::write(self.dir.join(name), text)?;
        self.files.push(FileEntry { path: name.into(), sha256: sha256_hex(text.as_bytes()) });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    fn finish(self, config: &RunConfig) -> Result<()> {
        let manifest = RunManifest {
            schema_version: 1,
            config,
            files: self.files,
            generated_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.dir.join(format!("{}_manifest.json", config.command)), text)?;
        Ok(())
    }
}

struct Ctx {
    cache: Cache,
}

impl Ctx {
    fn tol(a: &OperatorArgs) -> Result<BigFloat> {
        let p = a.precision;
        match a.tol {
            None => Ok(working_epsilon(p)),
            Some(t) if t > 0.0 && t.is_finite() => Ok(BigFloat::with_val(p, t)),
            Some(t) => Err(Error::Domain(format!("series tolerance must be positive, got {t}"))),
        }
    }

    fn gram(&self, a: &OperatorArgs) -> Result<GramMatrix> {
        if a.precision < DOUBLE_PRECISION {
            return Err(Error::Domain(format!("precision must be at least {DOUBLE_PRECISION} bits")));
        }
        let spec: CompositionSpec = a.op.name().parse()?;
        let scheme = Scheme::from(a.scheme);
        let tol = Self::tol(a)?;
        // only the float schemes depend on precision and tolerance
        let (prec_key, tol_key) = match scheme {
            Scheme::LeftSection => (0, String::new()),
            Scheme::RightMidpoint => (a.precision, float_to_hex(&tol)),
            Scheme::Galerkin => (a.precision, String::new()),
        };
        self.cache.gram(a.op.name(), scheme.short_name(), a.n, prec_key, &tol_key, || match scheme {
            Scheme::LeftSection => left_gram(&spec, a.n),
            Scheme::RightMidpoint => right_gram(&spec, a.n, &tol),
            Scheme::Galerkin if a.precision == DOUBLE_PRECISION => galerkin_gram_f64(&spec, a.n),
            Scheme::Galerkin => galerkin_gram(&spec, a.n, a.precision),
        })
    }

    fn spectrum(&self, a: &OperatorArgs) -> Result<Spectrum> {
        let tol = Self::tol(a)?;
        let g = self.gram(a)?;
        let scheme = Scheme::from(a.scheme);
        self.cache.spectrum(a.op.name(), scheme.short_name(), a.n, a.precision, &float_to_hex(&tol), || {
            eigen_sym(&g, a.precision)
        })
    }
}

fn stem(a: &OperatorArgs) -> String {
    format!("{}_{}_N{}", a.op.name(), Scheme::from(a.scheme).short_name(), a.n)
}

fn config_for(command: &str, a: &OperatorArgs, cli: &Cli) -> Result<RunConfig> {
    Ok(RunConfig {
        command: command.into(),
        operator: Some(a.op.name().into()),
        scheme: Some(Scheme::from(a.scheme).short_name().into()),
        n: Some(a.n),
        precision: Some(a.precision),
        series_tol: Some(float_to_hex(&Ctx::tol(a)?)),
        out: cli.out.display().to_string(),
        cache: cli.cache.as_ref().map(|c| c.display().to_string()),
        ..Default::default()
    })
}

fn parse_window(w: &str) -> Result<(usize, usize)> {
    let bad = || Error::Invalid(format!("window {w:?} must look like a:b"));
    let (a, b) = w.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// The reference curves for `op`, with unit constants and fitted through σ₁.
fn reference_bounds(op: &str, s: &Spectrum) -> Vec<BoundReport> {
    let s1 = s.sigma(1).to_f64();
    let mut specs = vec![BoundSpec::three_halves_upper()];
    match op {
        "HaJ" => specs.push(BoundSpec::exp_lower()),
        "DHa" => specs.push(BoundSpec::exp_over_index_lower()),
        _ => {}
    }
    let fitted: Vec<BoundSpec> = specs.iter().map(|b| b.fitted_at(1, s1)).collect();
    specs.iter().chain(&fitted).map(|b| check_bound(s, b)).collect()
}

fn run(cli: &Cli) -> Result<()> {
    let ctx = Ctx { cache: Cache::new(cli.cache.clone()) };
    match &cli.command {
        Command::Assemble(a) => {
            let config = config_for("assemble", a, cli)?;
            let g = ctx.gram(a)?;
            let mut out = Outputs::new(&cli.out)?;
            out.json(&format!("gram_{}.json", stem(a)), &g.to_json())?;
            out.finish(&config)?;
            println!("assembled {} x {} Gram matrix ({})", g.dim(), g.dim(), g.precision);
        }
        Command::Spectrum(a) => {
            let config = config_for("spectrum", a, cli)?;
            let s = ctx.spectrum(a)?;
            let mut out = Outputs::new(&cli.out)?;
            out.text(&format!("spectrum_{}.csv", stem(a)), &s.to_csv())?;
            out.json(&format!("spectrum_{}.json", stem(a)), &s.to_json())?;
            out.finish(&config)?;
            println!("{} singular values, trusted through i = {}", s.len(), s.trust_cutoff);
        }
        Command::Fit { op: a, window, model } => {
            let mut config = config_for("fit", a, cli)?;
            let s = ctx.spectrum(a)?;
            let w = match window {
                Some(w) => parse_window(w)?,
                None => default_window(&s),
            };
            config.window = Some(format!("{}:{}", w.0, w.1));
            let model = match model {
                ModelArg::Power => DecayModel::Power,
                ModelArg::Exponential => DecayModel::Exponential,
            };
            let f = fit_decay(&s, model, w)?;
            let mut out = Outputs::new(&cli.out)?;
            out.json(&format!("fit_{}.json", stem(a)), &f)?;
            out.finish(&config)?;
            println!(
                "{:?} fit over {}:{}: rate {:.6}, c {:.6e}, max log10 residual {:.3e}",
                f.model, w.0, w.1, f.rate, f.c, f.residual_log10
            );
        }
        Command::Bounds(a) => {
            let config = config_for("bounds", a, cli)?;
            let s = ctx.spectrum(a)?;
            let reports = reference_bounds(a.op.name(), &s);
            let mut out = Outputs::new(&cli.out)?;
            for r in &reports {
                println!("{}: {}", r.label, if r.consistent { "consistent" } else { "violated" });
            }
            let mut doc = serde_json::json!({ "schema_version": 1, "bounds": reports });
            if a.op.name() == "DHa" && matches!(a.scheme, SchemeArg::Left) {
                let tail = tail_bound_check(&s, &BigFloat::with_val(a.precision, 1e-30))?;
                let t = tail_sums(&s);
                let pointwise = tail_to_pointwise(&t, 1.0, fit_tail_constant(&t, 1.0))?;
                println!(
                    "tail bound: {} ({} rows fail with the sum started one index later)",
                    if tail.holds { "holds" } else { "violated" },
                    tail.shifted_failures.len()
                );
                doc["tail"] = serde_json::to_value(&tail)?;
                doc["pointwise"] = serde_json::to_value(&pointwise)?;
            }
            out.json(&format!("bounds_{}.json", stem(a)), &doc)?;
            out.finish(&config)?;
        }
        Command::Identity { kmax, jmax } => {
            let mut config = RunConfig { command: "identity".into(), out: cli.out.display().to_string(), ..Default::default() };
            config.extra.insert("kmax".into(), (*kmax).into());
            config.extra.insert("jmax".into(), (*jmax).into());
            let r = verify_dha_identity(*kmax, *jmax)?;
            let mut out = Outputs::new(&cli.out)?;
            out.json("identity.json", &r)?;
            out.finish(&config)?;
            println!("PASS ({} exact checks)", r.checks);
        }
        Command::Todd { nmin, nmax, precision } => {
            let mut config = RunConfig {
                command: "todd".into(),
                precision: Some(*precision),
                out: cli.out.display().to_string(),
                ..Default::default()
            };
            config.extra.insert("nmin".into(), (*nmin).into());
            config.extra.insert("nmax".into(), (*nmax).into());
            let todd = todd_check(*nmin..=*nmax, *precision)?;
            let chain = lower_bound_chain(*nmin..=*nmax, *precision)?;
            let mut out = Outputs::new(&cli.out)?;
            out.json("todd.json", &serde_json::json!({ "schema_version": 1, "todd": todd, "chain": chain }))?;
            out.finish(&config)?;
            println!(
                "Todd bound with c = 1: {}; smallest c {:.3e}; growth exponent {:.4} over {}..{}",
                if todd.bound.consistent { "holds" } else { "violated" },
                todd.smallest_c,
                todd.growth_exponent,
                todd.fit_window.0,
                todd.fit_window.1
            );
            println!("lower-bound chain: {}", if chain.iter().all(|r| r.holds) { "holds" } else { "violated" });
        }
        Command::Ncnc { n, precision, depth, selection, vectors } => {
            let mut config = RunConfig {
                command: "ncnc".into(),
                operator: Some("DHa".into()),
                n: Some(*n),
                precision: Some(*precision),
                out: cli.out.display().to_string(),
                ..Default::default()
            };
            let how = match selection {
                SelectionArg::Frugal => Selection::Frugal,
                SelectionArg::Minimizer => Selection::Minimizer,
            };
            config.extra.insert("depth".into(), serde_json::to_value(depth)?);
            config.extra.insert("selection".into(), serde_json::to_value(how)?);
            config.extra.insert("vectors".into(), (*vectors).into());
            let t = dha_legendre_section(*n, *precision)?;
            let trace = build_compact_restriction(&t, depth.unwrap_or(*n), *precision, how)?;
            let witness = if trace.depth() > 0 { Some(compact_product_witness(&t, &trace, None)?) } else { None };
            let mut out = Outputs::new(&cli.out)?;
            out.json(
                &format!("ncnc_DHa_N{n}.json"),
                &serde_json::json!({ "trace": trace.to_json(*vectors), "witness": witness }),
            )?;
            out.finish(&config)?;
            println!("depth {} reached", trace.depth());
            if let Some(h) = &trace.halted {
                println!("stopped at step {}: requested {:.3e}, achievable {:.3e}", h.step, h.requested, h.achievable);
            }
        }
        Command::Figures { which, precision } => {
            let which = match which {
                WhichArg::Fig1 => Which::Fig1,
                WhichArg::Fig2 => Which::Fig2,
            };
            let spec = FigureSpec::new(which, *precision);
            let mut config = RunConfig {
                command: "figures".into(),
                precision: Some(*precision),
                out: cli.out.display().to_string(),
                ..Default::default()
            };
            config.extra.insert("which".into(), serde_json::to_value(which)?);
            config.extra.insert("sizes".into(), serde_json::to_value(&spec.sizes)?);
            let (manifest, _) = render_figure(&spec, &cli.out)?;
            let out = Outputs { dir: cli.out.clone(), files: manifest.files.clone() };
            out.finish(&config)?;
            println!("wrote {} files under {}", manifest.files.len(), cli.out.join(which.dir_name()).display());
        }
        Command::Table1 { n, galerkin_n, precision } => {
            let mut config = RunConfig {
                command: "table1".into(),
                n: Some(*n),
                precision: Some(*precision),
                out: cli.out.display().to_string(),
                cache: cli.cache.as_ref().map(|c| c.display().to_string()),
                ..Default::default()
            };
            config.extra.insert("galerkin_n".into(), (*galerkin_n).into());
            let mut inputs = Vec::new();
            for (op, model) in [(OpArg::CJ, DecayModel::Power), (OpArg::MJ, DecayModel::Power)] {
                let a = OperatorArgs { op, scheme: SchemeArg::Galerkin, n: *galerkin_n, precision: DOUBLE_PRECISION, tol: None };
                let s = ctx.spectrum(&a)?;
                let hi = s.trust_cutoff.min(64);
                let fit = fit_decay(&s, model, (8.min(hi.saturating_sub(3)).max(1), hi)).ok();
                inputs.push(Table1Input { operator: op.name().into(), fit, bounds: vec![] });
            }
            for op in [OpArg::HaJ, OpArg::DHa] {
                let a = OperatorArgs { op, scheme: SchemeArg::Left, n: *n, precision: *precision, tol: None };
                let s = ctx.spectrum(&a)?;
                let fit = fit_decay(&s, DecayModel::Exponential, default_window(&s)).ok();
                inputs.push(Table1Input { operator: op.name().into(), fit, bounds: reference_bounds(op.name(), &s) });
            }
            let table = table1_summary(&inputs)?;
            let mut out = Outputs::new(&cli.out)?;
            out.json("table1.json", &table)?;
            out.text("table1.csv", &table.to_csv())?;
            let text = table.to_text();
            out.text("table1.txt", &text)?;
            out.finish(&config)?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Contract => 3,
                ErrorKind::Tolerance => 4,
                ErrorKind::Io => 1,
            })
        }
    }
}
