//! Command-line front end. Every subcommand prints one JSON document on standard output;
//! CSV side files are written only when `--out` is given.
//!
//! Exit status: 0 on success, 2 on invalid input, 3 when a numerical guard fires
//! (ambiguous kernel, obstruction), 1 when `props` finds a failing suite.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::abs_index::{abs_class, KOClass};
use crate::clifford::{check_relations, irreducible_rep, Chirality, CliffordRep, Signature};
use crate::error::{Error, Result};
use crate::flow::{endpoint_flow, singular_value_tracks, spectral_flow_report, FlowOptions, SkewPath};
use crate::json::{matrix_from_str, rep_to_string, sampled_path_from_str, RepJson};
use crate::pairs::{pair_index, ComplexStructure};
use crate::rs_verify::{self, Convention, RSProblem};

#[derive(Debug, Parser)]
#[command(name = "koflow", version, about = "KO-valued spectral flow and Clifford indices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChiralityArg {
    #[value(name = "+", alias = "plus")]
    Plus,
    #[value(name = "-", alias = "minus")]
    Minus,
}

impl From<ChiralityArg> for Chirality {
    fn from(c: ChiralityArg) -> Self {
        match c {
            ChiralityArg::Plus => Chirality::Plus,
            ChiralityArg::Minus => Chirality::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Standard,
    Swapped,
}

/// A module given either as a JSON file or as the canonical irreducible of `(r, s)`.
#[derive(Debug, Clone, clap::Args)]
pub struct ModuleArgs {
    /// Representation JSON with keys r, s, n, E, F.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["r", "s"])]
    pub module: Option<PathBuf>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, value_enum, allow_hyphen_values = true)]
    pub chirality: Option<ChiralityArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical irreducible representation of Cl_{r,s}.
    Irrep {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, value_enum, allow_hyphen_values = true)]
        chirality: Option<ChiralityArg>,
        /// Also write the representation JSON to this file.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Validate the relations of a representation and report its class.
    Check {
        #[arg(long, value_name = "PATH")]
        module: PathBuf,
        #[arg(long, default_value_t = crate::clifford::CONSTRUCTION_TOL)]
        tol: f64,
    },
    /// Index of a pair of complex structures in a Clifford context.
    PairIndex {
        #[arg(long, value_name = "PATH")]
        j0: PathBuf,
        #[arg(long, value_name = "PATH")]
        j1: PathBuf,
        /// Context representation; defaults to no generators.
        #[arg(long, value_name = "PATH")]
        module: Option<PathBuf>,
    },
    /// Spectral flow of a sampled path, a normalization path or a seeded random path.
    Sf {
        /// Sampled path JSON `{"context", "samples": [{"t", "T"}]}`.
        #[arg(long, value_name = "PATH", conflicts_with_all = ["module", "r", "s", "random"])]
        path: Option<PathBuf>,
        #[command(flatten)]
        module: ModuleArgs,
        /// Draw a random admissible path of dimension at most `--n`.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of smallest singular values per sample in the CSV.
        #[arg(long)]
        tracks: Option<usize>,
        #[arg(long, value_name = "PATH", requires = "tracks")]
        out: Option<PathBuf>,
    },
    /// Flux insertion through the Kitaev ring.
    Kitaev {
        #[arg(long = "N")]
        n_sites: usize,
        #[arg(long)]
        tracks: Option<usize>,
        #[arg(long, value_name = "PATH", requires = "tracks")]
        out: Option<PathBuf>,
    },
    /// Generalized flux insertion carrying a Cl_{r,s+1} module.
    Flux {
        #[arg(long = "N", default_value_t = 4)]
        n_sites: usize,
        #[command(flatten)]
        module: ModuleArgs,
    },
    /// Quaternionic examples: degree-4 flow against the classical flow.
    Aii {
        /// One of the demonstration labels; all when omitted.
        #[arg(long)]
        demo: Option<String>,
    },
    /// Discretized check that the kernel class equals the flow class.
    RsCheck {
        #[command(flatten)]
        module: ModuleArgs,
        #[arg(long = "L", default_value_t = 12.0)]
        half_length: f64,
        #[arg(long, default_value_t = 1200)]
        m: usize,
        #[arg(long, value_enum, default_value = "standard")]
        convention: ConventionArg,
        /// Also report the zero cluster at m/4, m/2 and m.
        #[arg(long)]
        study: bool,
        /// Kernel profiles as CSV.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run the seeded invariant suites.
    Props {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict to one suite.
        #[arg(long)]
        suite: Option<String>,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(value: impl Serialize) -> Self {
        Output {
            code: 0,
            stdout: serde_json::to_string(&value).expect("serializable") + "\n",
            stderr: String::new(),
        }
    }

    fn error(e: &Error) -> Self {
        let kind = match e {
            Error::Invalid(_) => "invalid",
            Error::AmbiguousKernel(_) => "ambiguous_kernel",
            Error::Obstruction(_) => "obstruction",
            Error::Numerical(_) => "numerical",
        };
        Output {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: json!({"error": kind, "message": e.to_string()}).to_string() + "\n",
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli.command),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            }
        }
    }
}

pub fn run(cmd: Command) -> Output {
    match dispatch(cmd) {
        Ok(out) => out,
        Err(e) => Output::error(&e),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn load_module(path: &Path) -> Result<CliffordRep> {
    crate::json::rep_from_str(&read(path)?)
}

impl ModuleArgs {
    fn resolve(&self) -> Result<CliffordRep> {
        match (&self.module, self.r, self.s) {
            (Some(p), _, _) => {
                if self.chirality.is_some() {
                    return Err(Error::Invalid("--chirality applies only with --r/--s".into()));
                }
                load_module(p)
            }
            (None, Some(r), Some(s)) => {
                irreducible_rep(Signature::new(r, s), self.chirality.map(Into::into))
            }
            _ => Err(Error::Invalid("give either --module or both --r and --s".into())),
        }
    }
}

fn tracks_csv(path: &SkewPath, k: usize) -> String {
    let rows = singular_value_tracks(path, k, 200);
    let mut out = String::from("t");
    for i in 1..=k {
        out.push_str(&format!(",sigma_{i}"));
    }
    out.push('\n');
    for (t, sv) in rows {
        out.push_str(&format!("{t}"));
        for x in sv {
            out.push_str(&format!(",{x}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct FlowSummary {
    label: String,
    dim: usize,
    signature: String,
    class: KOClass,
    endpoint_class: KOClass,
    segments: usize,
    contributing: Vec<crate::flow::Segment>,
}

fn flow_summary(path: &SkewPath) -> Result<FlowSummary> {
    let report = spectral_flow_report(path, &FlowOptions::default())?;
    Ok(FlowSummary {
        label: path.label().to_string(),
        dim: path.n(),
        signature: path.context().sig().to_string(),
        class: report.class,
        endpoint_class: endpoint_flow(path)?,
        segments: report.segments.len(),
        contributing: report.contributing().cloned().collect(),
    })
}

fn maybe_tracks(path: &SkewPath, tracks: Option<usize>, out: &Option<PathBuf>) -> Result<()> {
    if let (Some(k), Some(p)) = (tracks, out) {
        write(p, &tracks_csv(path, k))?;
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<Output> {
    match cmd {
        Command::Irrep { r, s, chirality, out } => {
            let rep = irreducible_rep(Signature::new(r, s), chirality.map(Into::into))?;
            if let Some(p) = out {
                write(&p, &rep_to_string(&rep))?;
            }
            Ok(Output::ok(RepJson::from_rep(&rep)))
        }
        Command::Check { module, tol } => {
            let raw: RepJson = serde_json::from_str(&read(&module)?)
                .map_err(|e| Error::Invalid(format!("representation JSON: {e}")))?;
            let rep = raw.to_rep_unchecked()?;
            let report = check_relations(&rep, tol)?;
            let valid = report.is_clean();
            let class = if valid { Some(abs_class(&rep)?) } else { None };
            let mut out = Output::ok(json!({
                "valid": valid,
                "signature": rep.sig().to_string(),
                "n": rep.n(),
                "max_residual": report.max_residual(),
                "violations": report.to_string(),
                "class": class,
            }));
            if !valid {
                out.code = 2;
            }
            Ok(out)
        }
        Command::PairIndex { j0, j1, module } => {
            let a = matrix_from_str(&read(&j0)?)?;
            let b = matrix_from_str(&read(&j1)?)?;
            let ctx = match module {
                Some(p) => load_module(&p)?,
                None => CliffordRep::trivial(a.nrows()),
            };
            let s0 = ComplexStructure::new(a, ctx.clone())?;
            let s1 = ComplexStructure::new(b, ctx)?;
            let pi = pair_index(&s0, &s1)?;
            Ok(Output::ok(json!({
                "class": pi.class,
                "kernel_dim": pi.kernel_dim(),
                "kernel_signature": pi.kernel.sig().to_string(),
                "largest_zero": pi.split.largest_zero,
            })))
        }
        Command::Sf { path, module, random, n, seed, tracks, out } => {
            let p = if let Some(file) = path {
                sampled_path_from_str(&read(&file)?)?
            } else if random {
                let mut rng = crate::random::rng(seed);
                crate::props::random_path(&mut rng, 4, n)?
            } else {
                crate::props::normalization_path(&module.resolve()?)?
            };
            maybe_tracks(&p, tracks, &out)?;
            Ok(Output::ok(flow_summary(&p)?))
        }
        Command::Kitaev { n_sites, tracks, out } => {
            let p = crate::models::kitaev_path(n_sites)?;
            maybe_tracks(&p, tracks, &out)?;
            let report = spectral_flow_report(&p, &FlowOptions::default())?;
            Ok(Output::ok(report.class))
        }
        Command::Flux { n_sites, module } => {
            let v = module.resolve()?;
            let p = crate::models::flux_path(&v, n_sites)?;
            let s = flow_summary(&p)?;
            Ok(Output::ok(json!({
                "N": n_sites,
                "module_signature": v.sig().to_string(),
                "class": s.class,
                "endpoint_class": s.endpoint_class,
                "module_class": abs_class(&v)?,
            })))
        }
        Command::Aii { demo } => {
            let rows = crate::props::aii_quarter_relation()?;
            let rows: Vec<_> = rows
                .into_iter()
                .filter(|(label, ..)| demo.as_deref().is_none_or(|d| d == label))
                .map(|(label, sf, classical, dims)| {
                    json!({
                        "demo": label,
                        "sf": sf,
                        "classical_sf": classical,
                        "quarter": classical as f64 / 4.0,
                        "relation_holds": classical % 4 == 0 && sf.value == classical / 4,
                        "kernel_dims": dims,
                    })
                })
                .collect();
            if rows.is_empty() {
                return Err(Error::Invalid(format!("unknown demo {:?}", demo.unwrap_or_default())));
            }
            Ok(Output::ok(rows))
        }
        Command::RsCheck { module, half_length, m, convention, study, out } => {
            let v = module.resolve()?;
            let p = RSProblem::new(v, half_length, m)?;
            let conv = match convention {
                ConventionArg::Standard => Convention::Standard,
                ConventionArg::Swapped => Convention::Swapped,
            };
            let report = rs_verify::verify_rs_with(&p, conv)?;
            let mut value = serde_json::to_value(&report).expect("serializable");
            value["classes_agree"] = json!(report.classes_agree());
            value["continuum_gap"] = json!(rs_verify::continuum_gap(&p));
            if study {
                let ms: Vec<usize> = [m / 4, m / 2, m]
                    .into_iter()
                    .filter(|&k| k >= rs_verify::MIN_GRID)
                    .collect();
                value["convergence"] = json!(rs_verify::convergence_study(&p, &ms)?);
            }
            if let Some(path) = out {
                write(&path, &rs_verify::profiles_csv(&report))?;
            }
            Ok(Output::ok(value))
        }
        Command::Props { seed, suite } => {
            let report = match suite {
                Some(name) => {
                    let s = crate::props::run_suite(&name, seed)?;
                    crate::props::PropsReport { seed, passed: s.passed, suites: vec![s] }
                }
                None => crate::props::run_all(seed),
            };
            let mut out = Output::ok(&report);
            if !report.passed {
                out.code = 1;
            }
            Ok(out)
        }
    }
}
