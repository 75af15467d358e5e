//! The `hill` command: argument parsing, output formatting and run
//! manifests. Every subcommand writes to stdout, or to `--out` together
//! with a sidecar `<out>.manifest.json`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::closedform::compare_asymptotics;
use crate::error::{Error, Result};
use crate::exact::CRational;
use crate::potential::{parse_potential, Potential};
use crate::spectral::{self, basis_profile, Bc, SpectralPair, TruncatedOperator};
use crate::verdict::{default_range, full_report};
use crate::walkgen::{enumerate_walks, walk_sum, weight, Direction, ZArg, DEFAULT_MAX_CLASS};

#[derive(Debug, Parser)]
#[command(name = "hill", version, about = "Walk sums, asymptotics and Riesz-basis diagnostics for Hill operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Walk sums B±(n, z) by class, or the individual walks.
    Walks(WalksArgs),
    /// Walk sums at z = 0 against the closed-form leading term.
    AsymptoticsCompare(AsymptoticsArgs),
    /// Eigenvalue pairs and Gram diagnostics per disc.
    Spectrum(SpectrumArgs),
    /// Gram modulus, projection norm and gap next to their predictions.
    BasisProfile(ProfileArgs),
    /// Theorem verdict merged with the ratio criterion and spectral profile.
    BasisVerdict(VerdictArgs),
    /// Verdict JSON plus plot-ready CSV tables.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileFormat {
    Csv,
    Long,
    Json,
}

#[derive(Debug, Args)]
pub struct WalksArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub potential: String,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value = "fwd")]
    pub direction: String,
    /// Spectral parameter in the coefficient grammar, e.g. `1/2-i`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub z: String,
    #[arg(long)]
    pub max_class: Option<u32>,
    /// Report a single class.
    #[arg(long)]
    pub class: Option<u32>,
    /// List individual walks with at most this many steps instead of sums.
    #[arg(long)]
    pub list: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub potential: String,
    #[arg(long, default_value = "fwd")]
    pub direction: String,
    /// Range `lo..hi` (inclusive), single `n` or comma list.
    #[arg(long)]
    pub n: String,
    /// Keep only the disc indices of this boundary condition.
    #[arg(long)]
    pub bc: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub potential: String,
    #[arg(long)]
    pub bc: String,
    #[arg(long)]
    pub n: String,
    /// Fixed truncation half-width; by default it is chosen per disc and
    /// doubled until the pair is stable.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub potential: String,
    #[arg(long)]
    pub bc: String,
    #[arg(long)]
    pub n: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: ProfileFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerdictArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub potential: String,
    #[arg(long)]
    pub bc: String,
    /// Disc range; defaults to 4..14.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub potential: String,
    #[arg(long)]
    pub bc: String,
    #[arg(long)]
    pub n: Option<String>,
    /// Directory receiving `report.json`, `profile.csv` and
    /// `profile_long.csv`; without it the wide CSV goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

/// Sidecar record of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub potential: String,
    pub bc: Option<Bc>,
    pub n_range: Option<String>,
    pub truncation: Option<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub tool_version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputDigest>,
}

/// Parses `lo..hi`, `lo..=hi`, a single `n` or a comma list; both ends inclusive.
pub fn parse_range(text: &str) -> Result<Vec<u32>> {
    let t = text.trim();
    let num = |s: &str| {
        s.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad disc index {s:?} in range {text:?}")))
    };
    let out: Vec<u32> = if let Some((lo, hi)) = t.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(Error::Parse(format!("empty range {text:?}")));
        }
        (lo..=hi).collect()
    } else {
        t.split(',').map(num).collect::<Result<_>>()?
    };
    if out.contains(&0) {
        return Err(Error::InvalidArgument("disc index n must be positive".into()));
    }
    Ok(out)
}

fn parse_bc_range(bc: Bc, text: &str) -> Result<Vec<u32>> {
    let ns: Vec<u32> = parse_range(text)?.into_iter().filter(|&n| bc.admits(n)).collect();
    if ns.is_empty() {
        return Err(Error::InvalidArgument(format!("range {text:?} has no index of {bc} parity")));
    }
    Ok(ns)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

struct Run {
    command: &'static str,
    potential: String,
    bc: Option<Bc>,
    n_range: Option<String>,
    truncation: Option<String>,
    tolerances: BTreeMap<String, f64>,
    start: Instant,
}

impl Run {
    fn new(command: &'static str, potential: &Potential) -> Self {
        Run {
            command,
            potential: potential.to_spec_string(),
            bc: None,
            n_range: None,
            truncation: None,
            tolerances: BTreeMap::new(),
            start: Instant::now(),
        }
    }

    fn manifest(self, outputs: Vec<OutputDigest>) -> RunManifest {
        RunManifest {
            command: self.command.into(),
            potential: self.potential,
            bc: self.bc,
            n_range: self.n_range,
            truncation: self.truncation,
            tolerances: self.tolerances,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_time_s: self.start.elapsed().as_secs_f64(),
            outputs,
        }
    }

    /// Writes `bytes` to `out` (plus manifest) or to `stdout`.
    fn emit(self, bytes: &[u8], out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
        match out {
            None => {
                stdout.write_all(bytes)?;
                Ok(())
            }
            Some(path) => self.emit_files(vec![(path.to_path_buf(), bytes.to_vec())], path),
        }
    }

    fn emit_files(self, files: Vec<(PathBuf, Vec<u8>)>, manifest_base: &Path) -> Result<()> {
        let mut digests = Vec::new();
        for (path, bytes) in &files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, bytes)?;
            digests.push(OutputDigest { path: path.display().to_string(), sha256: sha256_hex(bytes) });
        }
        let m = self.manifest(digests);
        std::fs::write(manifest_path(manifest_base), serde_json::to_vec_pretty(&m)?)?;
        Ok(())
    }
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn cmd_walks(a: &WalksArgs, stdout: &mut dyn Write) -> Result<()> {
    let p = parse_potential(&a.potential)?;
    let dir: Direction = a.direction.parse()?;
    let z: ZArg = a.z.parse()?;
    let mut run = Run::new("walks", &p);
    run.n_range = Some(a.n.to_string());
    if let Some(max_steps) = a.list {
        let ZArg::Exact(zz) = &z else { unreachable!("parsed z is exact") };
        let walks = enumerate_walks(&p, a.n, dir, max_steps)?;
        let mut text = String::new();
        for w in &walks {
            let h = weight::<CRational>(w, &p, zz)?;
            text.push_str(&w.dump_line(&h));
            text.push('\n');
        }
        return run.emit(text.as_bytes(), a.out.as_deref(), stdout);
    }
    let max_class = a.max_class.unwrap_or(DEFAULT_MAX_CLASS).max(a.class.unwrap_or(0));
    run.truncation = Some(format!("max_class={max_class}"));
    let r = walk_sum(&p, a.n, dir, &z, max_class)?;
    let uncertified = (!r.certified).then(|| r.tail_note.clone().unwrap_or_default());
    let classes: Vec<_> = r.classes.iter().filter(|c| a.class.is_none_or(|k| c.index == k)).collect();
    let bytes = match a.format {
        Format::Json => match a.class {
            Some(_) => json_bytes(&classes.first())?,
            None => json_bytes(&r)?,
        },
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "direction", "class", "sum_re", "sum_im", "sum_exact", "mass", "count"])?;
            for c in &classes {
                w.write_record([
                    r.n.to_string(),
                    r.direction.to_string(),
                    c.index.to_string(),
                    format!("{:e}", c.sum.re),
                    format!("{:e}", c.sum.im),
                    c.sum.exact.clone().unwrap_or_default(),
                    format!("{:e}", c.mass),
                    c.count.to_string(),
                ])?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))?
        }
        Format::Text => {
            let mut s = String::new();
            for c in &classes {
                let v = c.sum.exact.clone().unwrap_or_else(|| format!("{}+{}i", c.sum.re, c.sum.im));
                s.push_str(&format!("class {}: sum {} mass {:e} count {}\n", c.index, v, c.mass, c.count));
            }
            if a.class.is_none() {
                let v = r.partial_sum.exact.clone().unwrap_or_else(|| format!("{}+{}i", r.partial_sum.re, r.partial_sum.im));
                s.push_str(&format!("partial_sum {v}\n"));
                match r.tail_bound {
                    Some(t) => s.push_str(&format!("tail_bound {t:e}\n")),
                    None => s.push_str(&format!("tail_bound none ({})\n", r.tail_note.as_deref().unwrap_or(""))),
                }
            }
            s.into_bytes()
        }
    };
    run.emit(&bytes, a.out.as_deref(), stdout)?;
    // the partial sums are still written; the exit status flags the missing tail bound
    match uncertified {
        Some(note) => Err(Error::CertificationUnavailable(note)),
        None => Ok(()),
    }
}

fn cmd_asymptotics(a: &AsymptoticsArgs, stdout: &mut dyn Write) -> Result<()> {
    let p = parse_potential(&a.potential)?;
    let dir: Direction = a.direction.parse()?;
    let ns = match &a.bc {
        Some(bc) => parse_bc_range(bc.parse()?, &a.n)?,
        None => parse_range(&a.n)?,
    };
    let mut run = Run::new("asymptotics-compare", &p);
    run.n_range = Some(a.n.clone());
    run.tolerances.insert("walk_sum_rel_tail".into(), 1e-12);
    let rows = compare_asymptotics(&p, dir, &ns)?;
    let bytes = match a.format {
        Format::Json => json_bytes(&rows)?,
        Format::Csv | Format::Text => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "exact_re", "exact_im", "leading_re", "leading_im", "rel_err", "error_model", "model_value"])?;
            for r in &rows {
                w.write_record([
                    r.n.to_string(),
                    format!("{:e}", r.exact.re),
                    format!("{:e}", r.exact.im),
                    format!("{:e}", r.leading.re),
                    format!("{:e}", r.leading.im),
                    format!("{:e}", r.rel_err),
                    r.error_model.as_str().to_string(),
                    format!("{:e}", r.error_model.order(r.n)),
                ])?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))?
        }
    };
    run.emit(&bytes, a.out.as_deref(), stdout)
}

fn cmd_spectrum(a: &SpectrumArgs, stdout: &mut dyn Write) -> Result<()> {
    let p = parse_potential(&a.potential)?;
    let bc: Bc = a.bc.parse()?;
    let ns = parse_bc_range(bc, &a.n)?;
    let mut run = Run::new("spectrum", &p);
    run.bc = Some(bc);
    run.n_range = Some(a.n.clone());
    run.tolerances.insert("residual".into(), spectral::RESIDUAL_TOL);
    run.tolerances.insert("truncation_drift".into(), spectral::STABILITY_TOL);
    let pairs: Vec<SpectralPair> = match a.k {
        Some(k) => {
            run.truncation = Some(format!("K={k}"));
            let op = TruncatedOperator::build_for(&p, bc, k, *ns.iter().max().expect("nonempty"))?;
            spectral::pairs_for(&op, &ns).into_iter().collect::<Result<_>>()?
        }
        None => {
            run.truncation = Some("auto".into());
            crate::parallel::ordered_map(&ns, |&n| spectral::spectral_pair_auto(&p, bc, n))
                .into_iter()
                .collect::<Result<_>>()?
        }
    };
    run.emit(&json_bytes(&pairs)?, a.out.as_deref(), stdout)
}

fn cmd_profile(a: &ProfileArgs, stdout: &mut dyn Write) -> Result<()> {
    let p = parse_potential(&a.potential)?;
    let bc: Bc = a.bc.parse()?;
    let ns = parse_bc_range(bc, &a.n)?;
    let mut run = Run::new("basis-profile", &p);
    run.bc = Some(bc);
    run.n_range = Some(a.n.clone());
    run.truncation = Some("auto".into());
    let prof = basis_profile(&p, bc, &ns);
    let mut bytes = Vec::new();
    match a.format {
        ProfileFormat::Csv => prof.write_csv(&mut bytes)?,
        ProfileFormat::Long => prof.write_long_csv(&mut bytes)?,
        ProfileFormat::Json => bytes = json_bytes(&prof)?,
    }
    run.emit(&bytes, a.out.as_deref(), stdout)
}

fn verdict_inputs(potential: &str, bc: &str, n: &Option<String>) -> Result<(Potential, Bc, Vec<u32>)> {
    let p = parse_potential(potential)?;
    let bc: Bc = bc.parse()?;
    let ns = match n {
        Some(r) => parse_bc_range(bc, r)?,
        None => default_range(bc),
    };
    Ok((p, bc, ns))
}

fn cmd_verdict(a: &VerdictArgs, stdout: &mut dyn Write) -> Result<()> {
    let (p, bc, ns) = verdict_inputs(&a.potential, &a.bc, &a.n)?;
    let mut run = Run::new("basis-verdict", &p);
    run.bc = Some(bc);
    run.n_range = Some(format!("{}..{}", ns[0], ns[ns.len() - 1]));
    let report = full_report(&p, bc, &ns);
    run.emit(&json_bytes(&report)?, a.out.as_deref(), stdout)
}

fn cmd_report(a: &ReportArgs, stdout: &mut dyn Write) -> Result<()> {
    let (p, bc, ns) = verdict_inputs(&a.potential, &a.bc, &a.n)?;
    let mut run = Run::new("report", &p);
    run.bc = Some(bc);
    run.n_range = Some(format!("{}..{}", ns[0], ns[ns.len() - 1]));
    let report = full_report(&p, bc, &ns);
    let mut wide = Vec::new();
    report.empirical.profile.write_csv(&mut wide)?;
    match &a.out {
        None => {
            stdout.write_all(&wide)?;
            Ok(())
        }
        Some(dir) => {
            let mut long = Vec::new();
            report.empirical.profile.write_long_csv(&mut long)?;
            let files = vec![
                (dir.join("report.json"), json_bytes(&report)?),
                (dir.join("profile.csv"), wide),
                (dir.join("profile_long.csv"), long),
            ];
            run.emit_files(files, &dir.join("report"))
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Walks(a) => cmd_walks(a, stdout),
        Command::AsymptoticsCompare(a) => cmd_asymptotics(a, stdout),
        Command::Spectrum(a) => cmd_spectrum(a, stdout),
        Command::BasisProfile(a) => cmd_profile(a, stdout),
        Command::BasisVerdict(a) => cmd_verdict(a, stdout),
        Command::Report(a) => cmd_report(a, stdout),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code; errors go to `stderr`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return e.exit_code();
        }
    };
    match run(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
