//! Command-line front end.
//!
//! Every value is resolved as flag > `--config` TOML file > default. The
//! output directory additionally falls back to `$SCALED_CHAIN_OUT` before the
//! current directory.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rayon::prelude::*;
use serde::Deserialize;

use crate::chain::scaled_chain;
use crate::eigen::{eig_all, eig_values_only};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, write_chain_csv, TbParams};
use crate::lrm::{compare_to_tb, lrm_spectrum};
use crate::spectral::{
    classify_spectrum, dos, eigenstate_map, ipr_all, spacings, species_gap, write_ipr_csv,
    write_spectrum_csv, BranchConfig, DEFAULT_DOS_BINS, DEFAULT_MINIGAP_FACTOR,
    DEFAULT_MINIGAP_WINDOW,
};
use crate::transmission::{
    transmission_sweep, EnergyGrid, LeadParams, Leads, DEFAULT_EDGE_MARGIN, DEFAULT_GRID_POINTS,
};

pub const OUT_DIR_ENV: &str = "SCALED_CHAIN_OUT";

pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_L: usize = 10;

#[derive(Debug, Parser)]
#[command(
    name = "scaled-chain",
    version,
    about = "Tight-binding spectra, localization and transmission of scaled LSD chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    /// Write the chain as a symbol string and a site table
    Generate,
    /// Sorted eigenvalues
    Spectrum,
    /// Consecutive level spacings
    Spacings,
    /// Density-of-states histogram
    Dos,
    /// Inverse participation ratio of every eigenstate
    Ipr,
    /// Amplitude magnitudes of all eigenstates (site x state)
    Eigmap,
    /// Local resonator model against the full spectrum
    LrmCompare,
    /// Transmission curve between two leads
    Transmit,
    /// Spectra and branch regimes over a list of couplings
    Sweep,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Generate => "generate",
            CommandKind::Spectrum => "spectrum",
            CommandKind::Spacings => "spacings",
            CommandKind::Dos => "dos",
            CommandKind::Ipr => "ipr",
            CommandKind::Eigmap => "eigmap",
            CommandKind::LrmCompare => "lrm-compare",
            CommandKind::Transmit => "transmit",
            CommandKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Pgm,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Chain order; N = 1 + 2l(l+1)
    #[arg(long, global = true)]
    pub l: Option<usize>,
    /// Nearest-neighbour coupling
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Couplings for `sweep`, comma separated
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub t_list: Option<Vec<f64>>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eps_a: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eps_b: Option<f64>,
    /// On-site energy of both leads
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lead_eps: Option<f64>,
    /// Hopping inside both leads
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lead_t: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub couple_left: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub couple_right: Option<f64>,
    /// Histogram bins for `dos`
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// Energies in a transmission sweep
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    /// Output directory [env: SCALED_CHAIN_OUT]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML file with any of the options above (snake_case keys)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub l: Option<usize>,
    pub t: Option<f64>,
    pub t_list: Option<Vec<f64>>,
    pub eps_a: Option<f64>,
    pub eps_b: Option<f64>,
    pub lead_eps: Option<f64>,
    pub lead_t: Option<f64>,
    pub couple_left: Option<f64>,
    pub couple_right: Option<f64>,
    pub bins: Option<usize>,
    pub grid_points: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved parameters of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub l: usize,
    pub tb: TbParams,
    pub t_list: Vec<f64>,
    pub leads: Leads,
    pub bins: usize,
    pub grid_points: usize,
    pub out: PathBuf,
    pub format: Format,
}

impl RunConfig {
    pub fn resolve(command: CommandKind, flags: &Flags, env_out: Option<PathBuf>) -> Result<Self> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let tb_default = TbParams::default();
        let lead_default = LeadParams::default();
        let t = flags.t.or(file.t).unwrap_or(tb_default.t);
        let tb = TbParams::new(
            flags.eps_a.or(file.eps_a).unwrap_or(tb_default.eps_a),
            flags.eps_b.or(file.eps_b).unwrap_or(tb_default.eps_b),
            t,
        )?;
        let lead_eps = flags.lead_eps.or(file.lead_eps).unwrap_or(lead_default.eps);
        let lead_t = flags.lead_t.or(file.lead_t).unwrap_or(lead_default.t_lead);
        let leads = Leads::new(
            LeadParams::new(
                lead_eps,
                lead_t,
                flags
                    .couple_left
                    .or(file.couple_left)
                    .unwrap_or(lead_default.t_couple),
            )?,
            LeadParams::new(
                lead_eps,
                lead_t,
                flags
                    .couple_right
                    .or(file.couple_right)
                    .unwrap_or(lead_default.t_couple),
            )?,
        );
        let t_list = flags
            .t_list
            .clone()
            .or(file.t_list)
            .unwrap_or_else(|| vec![t]);
        if t_list.is_empty() || t_list.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "t-list must hold finite values".into(),
            ));
        }
        let cfg = Self {
            command,
            l: flags.l.or(file.l).unwrap_or(DEFAULT_L),
            tb,
            t_list,
            leads,
            bins: flags.bins.or(file.bins).unwrap_or(DEFAULT_DOS_BINS),
            grid_points: flags
                .grid_points
                .or(file.grid_points)
                .unwrap_or(DEFAULT_GRID_POINTS),
            out: flags
                .out
                .clone()
                .or(file.out)
                .or(env_out)
                .unwrap_or_else(|| PathBuf::from(".")),
            format: flags.format.or(file.format).unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::InvalidArgument("l must be at least 1".into()));
        }
        if self.bins == 0 {
            return Err(Error::InvalidArgument("bins must be positive".into()));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidArgument(
                "grid-points must be at least 2".into(),
            ));
        }
        if self.format == Format::Pgm && self.command != CommandKind::Eigmap {
            return Err(Error::InvalidArgument(format!(
                "--format pgm is only available for eigmap, not {}",
                self.command.name()
            )));
        }
        Ok(())
    }

    /// Header line recording every resolved parameter.
    pub fn header(&self, t: f64) -> String {
        let (l, r) = (self.leads.left, self.leads.right);
        format!(
            "command={} l={} N={} eps_a={} eps_b={} t={} lead_eps={} lead_t={} couple_left={} couple_right={} bins={} grid_points={}",
            self.command.name(),
            self.l,
            crate::chain::scaled_chain_length(self.l),
            self.tb.eps_a,
            self.tb.eps_b,
            t,
            l.eps,
            l.t_lead,
            l.t_couple,
            r.t_couple,
            self.bins,
            self.grid_points,
        )
    }

    fn stem(&self, command: &str, t: f64) -> String {
        format!("{command}_l{}_t{}", self.l, t)
    }

    fn path(&self, name: String) -> PathBuf {
        self.out.join(name)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn finish(mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// Runs one command and returns the written artifact paths.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out)?;
    let chain = scaled_chain(cfg.l)?;
    let t = cfg.tb.t;
    let header = cfg.header(t);
    let name = cfg.command.name();
    let mut written = Vec::new();

    match cfg.command {
        CommandKind::Generate => {
            // bare symbol string, no header, so the file is the chain itself
            let txt = cfg.path(format!("generate_l{}.txt", cfg.l));
            fs::write(&txt, format!("{chain}\n"))?;
            written.push(txt);
            let csv = cfg.path(format!("generate_l{}_t{}.csv", cfg.l, t));
            let mut w = create(&csv)?;
            write_chain_csv(&chain, &cfg.tb, &mut w, &header)?;
            finish(w)?;
            written.push(csv);
        }
        CommandKind::Spectrum => {
            let eigs = eig_values_only(&build_hamiltonian(&chain, &cfg.tb))?;
            let path = cfg.path(format!("{}.csv", cfg.stem(name, t)));
            let mut w = create(&path)?;
            write_spectrum_csv(&eigs, &mut w, &header)?;
            finish(w)?;
            written.push(path);
        }
        CommandKind::Spacings => {
            let eigs = eig_values_only(&build_hamiltonian(&chain, &cfg.tb))?;
            let s = spacings(&eigs)?;
            info!("largest spacing at m = {}", s.argmax());
            let path = cfg.path(format!("{}.csv", cfg.stem(name, t)));
            let mut w = create(&path)?;
            s.write_csv(&mut w, &header)?;
            finish(w)?;
            written.push(path);
        }
        CommandKind::Dos => {
            let eigs = eig_values_only(&build_hamiltonian(&chain, &cfg.tb))?;
            let hist = dos(&eigs, cfg.bins)?;
            let path = cfg.path(format!("{}.csv", cfg.stem(name, t)));
            let mut w = create(&path)?;
            hist.write_csv(&mut w, &header)?;
            finish(w)?;
            written.push(path);
        }
        CommandKind::Ipr => {
            let result = eig_all(&build_hamiltonian(&chain, &cfg.tb))?;
            let path = cfg.path(format!("{}.csv", cfg.stem(name, t)));
            let mut w = create(&path)?;
            write_ipr_csv(&ipr_all(&result)?, &mut w, &header)?;
            finish(w)?;
            written.push(path);
        }
        CommandKind::Eigmap => {
            let result = eig_all(&build_hamiltonian(&chain, &cfg.tb))?;
            let map = eigenstate_map(&result);
            let ext = match cfg.format {
                Format::Csv => "csv",
                Format::Pgm => "pgm",
            };
            let path = cfg.path(format!("{}.{ext}", cfg.stem(name, t)));
            let mut w = create(&path)?;
            match cfg.format {
                Format::Csv => map.write_csv(&mut w, &header)?,
                Format::Pgm => map.write_pgm(&mut w, &header)?,
            }
            finish(w)?;
            written.push(path);
        }
        CommandKind::LrmCompare => {
            let tb = eig_values_only(&build_hamiltonian(&chain, &cfg.tb))?;
            let lrm = lrm_spectrum(cfg.l, &cfg.tb)?;
            let cmp = compare_to_tb(&lrm, &tb, DEFAULT_MINIGAP_WINDOW, DEFAULT_MINIGAP_FACTOR)?;
            let levels = cfg.path(format!("{}.csv", cfg.stem("lrm-levels", t)));
            let mut w = create(&levels)?;
            lrm.write_csv(&mut w, &header)?;
            finish(w)?;
            written.push(levels);
            let report = cfg.path(format!("{}.csv", cfg.stem(name, t)));
            let mut w = create(&report)?;
            cmp.write_report(&mut w, &header)?;
            finish(w)?;
            written.push(report);
        }
        CommandKind::Transmit => {
            let device = build_hamiltonian(&chain, &cfg.tb);
            let grid = EnergyGrid::lead_window(&cfg.leads, cfg.grid_points, DEFAULT_EDGE_MARGIN)?;
            let curve = transmission_sweep(&grid, &device, &cfg.leads)?;
            info!("{} transmission peaks", curve.peaks.len());
            let path = cfg.path(format!("{}.csv", cfg.stem(name, t)));
            let mut w = create(&path)?;
            curve.write_csv(&mut w, &header)?;
            finish(w)?;
            written.push(path);
            let peaks = cfg.path(format!("{}_peaks.csv", cfg.stem(name, t)));
            let mut w = create(&peaks)?;
            curve.write_peaks_csv(&mut w, &header)?;
            finish(w)?;
            written.push(peaks);
        }
        CommandKind::Sweep => {
            written.extend(run_sweep(cfg, &chain)?);
        }
    }
    Ok(written)
}

struct SweepRow {
    t: f64,
    regime: String,
    branches: usize,
    cusps: usize,
    species_gap: Option<f64>,
    spectrum: PathBuf,
}

fn run_sweep(cfg: &RunConfig, chain: &crate::chain::SymbolChain) -> Result<Vec<PathBuf>> {
    let rows: Vec<Result<SweepRow>> = cfg
        .t_list
        .par_iter()
        .map(|&t| {
            let tb = TbParams { t, ..cfg.tb };
            let result = eig_all(&build_hamiltonian(chain, &tb))?;
            let gap = species_gap(&result, chain)?;
            let report = classify_spectrum(result.eigenvalues(), gap, &BranchConfig::default())?;
            let path = cfg.path(format!("{}.csv", cfg.stem("spectrum", t)));
            let mut w = create(&path)?;
            write_spectrum_csv(result.eigenvalues(), &mut w, &cfg.header(t))?;
            finish(w)?;
            Ok(SweepRow {
                t,
                regime: report.regime.to_string(),
                branches: report.branches.count(),
                cusps: report.cusps.len(),
                species_gap: gap,
                spectrum: path,
            })
        })
        .collect();

    let mut written = Vec::new();
    let summary = cfg.path(format!("sweep_l{}.csv", cfg.l));
    let mut w = create(&summary)?;
    let list: Vec<String> = cfg.t_list.iter().map(|t| t.to_string()).collect();
    writeln!(w, "# {} t_list={}", cfg.header(cfg.tb.t), list.join(","))?;
    writeln!(w, "t,regime,gapped_branches,cusps,species_gap")?;
    for row in rows {
        let row = row?;
        let gap = row
            .species_gap
            .map(crate::export::fmt_f64)
            .unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{}",
            row.t, row.regime, row.branches, row.cusps, gap
        )?;
        println!("t = {}: {}", row.t, row.regime);
        written.push(row.spectrum);
    }
    finish(w)?;
    written.push(summary);
    Ok(written)
}

/// Exit status for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::Config(_) | Error::DomainSize { .. } => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

/// Parses `args`, runs the command and reports errors on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let result = RunConfig::resolve(cli.command, &cli.flags, env_out).and_then(|cfg| run(&cfg));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
