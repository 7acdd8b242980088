//! The `covertmac` command line.
//!
//! Exit codes: 0 on success, 2 when a channel fails validation or cannot be
//! read as a channel, 3 for infeasible queries, 1 otherwise.

pub mod figures;

use crate::channel::{io, reference, Channel, Dmmac};
use crate::error::{Error, Result};
use crate::region::{
    boundary_sweep, maximize, maximize_grid, write_boundary_csv, Axis, GeneralModel, IcModel, MacModel,
    MaximizeOptions, Maximum, RegionModel, RegionQuery, SingleUser, SweepOptions,
};
use crate::simulator::{simulate, SimConfig};
use crate::units::{fmt_sig, Unit};
use clap::{Args, Parser, Subcommand, ValueEnum};
use figures::FigureOptions;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "covertmac", version, about = "Covert rate-key regions of multi-access channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a channel file (or import a row list) against the regularity conditions.
    Validate(ValidateArgs),
    /// Maximise a weighted rate objective, or sweep a two-axis boundary.
    Region(RegionArgs),
    /// Single-user covert rate as a function of the key budget.
    Tradeoff(TradeoffArgs),
    /// Monte Carlo run of the coding scheme.
    Simulate(SimulateArgs),
    /// Data of the reference-channel figures (always in bits).
    Figures(FiguresArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum UnitArg {
    Nats,
    Bits,
}

#[derive(Args, Debug, Clone)]
pub struct UnitFlags {
    /// Unit of rate and key inputs and outputs.
    #[arg(long, value_enum, default_value = "nats")]
    pub unit: UnitArg,
    /// Shorthand for `--unit bits`.
    #[arg(long, conflicts_with = "unit")]
    pub bits: bool,
}

impl UnitFlags {
    fn unit(&self) -> Unit {
        if self.bits || self.unit == UnitArg::Bits {
            Unit::Bits
        } else {
            Unit::Nats
        }
    }
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Channel JSON file.
    #[arg(long, conflicts_with = "from_rows", required_unless_present = "from_rows")]
    pub channel: Option<PathBuf>,
    /// Row-list file: the Y rows and the Z rows of a binary three-user MAC.
    #[arg(long)]
    pub from_rows: Option<PathBuf>,
    /// Rescale rows whose sums drift from 1.
    #[arg(long, requires = "from_rows")]
    pub renormalize: bool,
    /// Write the imported channel as JSON.
    #[arg(long)]
    pub save_json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Objective weights, covert users first (default: all ones).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Option<Vec<f64>>,
    /// Key budget per covert user (default: none).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub budgets: Option<Vec<f64>>,
    /// Fixed rate such as `R3=0.15` or `r1=0.5` (repeatable).
    #[arg(long = "fix")]
    pub fix: Vec<String>,
    /// Sweep the boundary of two axes, e.g. `r1,r2`.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<String>>,
    #[arg(long, default_value_t = 181)]
    pub angles: usize,
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long)]
    pub phases: Option<usize>,
    /// Single-phase exhaustive grid with this many steps instead of the search.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub units: UnitFlags,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TradeoffArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Use the user-1 slice (x2 = 0, x3 = 0) of a channel that is not single-user.
    #[arg(long)]
    pub reduce: Option<String>,
    /// Largest key budget of the grid (default: 1.5 × the knee, or 1).
    #[arg(long)]
    pub k_max: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[command(flatten)]
    pub units: UnitFlags,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Covert parameters JSON (as written by `region`).
    #[arg(long)]
    pub params: PathBuf,
    /// Simulation config JSON; the flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub delta_samples: Option<usize>,
    /// Multiplies ωₙ = n^(−1/3).
    #[arg(long)]
    pub omega_scale: Option<f64>,
    /// Multiplies the logarithmic message and key sizes.
    #[arg(long)]
    pub size_scale: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub phi: Option<Vec<f64>>,
    /// New codebook for every trial.
    #[arg(long)]
    pub redraw: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum Figure {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    All,
}

#[derive(Args, Debug)]
pub struct FiguresArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub which: Figure,
    /// Channel file (default: the bundled reference channel).
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long, default_value_t = 61)]
    pub angles: usize,
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Process exit code of an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => 3,
        Error::Structure(_) | Error::Probability(_) | Error::Parse { .. } | Error::NotAdmissible(_) => 2,
        _ => 1,
    }
}

/// Runs the command line and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli.command, &recorded) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    args: &'a [String],
    channel_sha256: String,
    seed: Option<u64>,
    unit: &'static str,
}

fn channel_hash(ch: &Channel) -> String {
    let digest = Sha256::digest(io::to_json_string(ch).as_bytes());
    digest.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn provenance<'a>(args: &'a [String], ch: &Channel, seed: Option<u64>, unit: Unit) -> Provenance<'a> {
    Provenance {
        tool: "covertmac",
        version: env!("CARGO_PKG_VERSION"),
        args,
        channel_sha256: channel_hash(ch),
        seed,
        unit: unit.name(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("provenance.json")
}

fn run(cmd: Command, args: &[String]) -> Result<i32> {
    match cmd {
        Command::Validate(a) => cmd_validate(a),
        Command::Region(a) => cmd_region(a, args),
        Command::Tradeoff(a) => cmd_tradeoff(a, args),
        Command::Simulate(a) => cmd_simulate(a, args),
        Command::Figures(a) => cmd_figures(a, args),
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<i32> {
    let ch = match (&a.channel, &a.from_rows) {
        (Some(p), _) => io::load(p)?,
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Channel::Dmmac(io::from_rows_text(&text, a.renormalize)?)
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    if let Some(out) = &a.save_json {
        write_text(out, &io::to_json_string(&ch))?;
    }
    let report = ch.validate();
    if report.is_admissible() {
        println!("{}: admissible", ch.kind().as_str());
        Ok(0)
    } else {
        println!("{}: {} violation(s)", ch.kind().as_str(), report.violations.len());
        for v in &report.violations {
            println!("  {v}");
        }
        Ok(2)
    }
}

fn build_query(a: &RegionArgs, lc: usize, lnc: usize, unit: Unit) -> Result<RegionQuery> {
    let weights = a.weights.clone().unwrap_or_else(|| vec![1.0; lc + lnc]);
    let key_budgets =
        a.budgets.clone().map(|b| b.iter().map(|v| unit.to_nats(*v)).collect()).unwrap_or_else(|| vec![f64::INFINITY; lc]);
    let mut q = RegionQuery { weights, key_budgets, fixed: vec![] };
    for f in &a.fix {
        let (axis, value) =
            f.split_once('=').ok_or_else(|| Error::InvalidParams(format!("`--fix {f}` needs the form AXIS=VALUE")))?;
        let value: f64 =
            value.trim().parse().map_err(|_| Error::InvalidParams(format!("`{value}` is not a number")))?;
        q = q.with_fixed(Axis::parse(axis.trim(), lc)?, unit.to_nats(value));
    }
    Ok(q)
}

#[derive(Serialize)]
struct RegionReport<'a> {
    provenance: Provenance<'a>,
    query: &'a RegionQuery,
    /// Rates and keys in the provenance unit.
    r: Vec<f64>,
    r_nc: Vec<f64>,
    k: Vec<f64>,
    k_signed: Vec<f64>,
    objective: f64,
    params: &'a crate::region::CovertParams,
}

fn region_with<M: RegionModel>(model: &M, a: &RegionArgs, ch: &Channel, args: &[String]) -> Result<i32> {
    let unit = a.units.unit();
    let (lc, lnc) = (model.covert_users(), model.nc_sizes().len());
    let q = build_query(a, lc, lnc, unit)?;
    q.validate(lc, lnc)?;
    let prov = provenance(args, ch, Some(a.seed), unit);
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    if let Some(axes) = &a.sweep {
        if axes.len() != 2 {
            return Err(Error::InvalidParams("--sweep needs exactly two axes".into()));
        }
        let axes = [Axis::parse(&axes[0], lc)?, Axis::parse(&axes[1], lc)?];
        let opts = SweepOptions {
            angles: a.angles,
            first_starts: a.starts,
            starts_per_angle: (a.starts / 8).max(2),
            phases: a.phases,
            seed: a.seed,
        };
        let pts = boundary_sweep(model, axes, &q, &opts)?;
        let csv = a.out.join("boundary.csv");
        write_boundary_csv(&csv, &pts, unit)?;
        write_json(&a.out.join("provenance.json"), &json!({"provenance": prov, "query": q, "axes": [axes[0].name(lc), axes[1].name(lc)]}))?;
        println!("{} boundary points written to {}", pts.len(), csv.display());
        return Ok(0);
    }
    let m: Maximum = match a.grid {
        Some(n) => maximize_grid(model, &q, n)?,
        None => maximize(
            model,
            &q,
            &MaximizeOptions { starts: a.starts, phases: a.phases, seed: a.seed, ..Default::default() },
        )?,
    };
    let conv = |v: &[f64]| v.iter().map(|x| unit.from_nats(*x)).collect::<Vec<_>>();
    let report = RegionReport {
        provenance: prov,
        query: &q,
        r: conv(&m.tuple.r),
        r_nc: conv(&m.tuple.r_nc),
        k: conv(&m.tuple.k),
        k_signed: conv(&m.tuple.k_signed),
        objective: unit.from_nats(m.objective),
        params: &m.params,
    };
    write_json(&a.out.join("region.json"), &report)?;
    write_json(&a.out.join("params.json"), &m.params)?;
    println!("objective {} {}", fmt_sig(report.objective, 12), unit.name());
    Ok(0)
}

fn cmd_region(a: RegionArgs, args: &[String]) -> Result<i32> {
    let ch = io::load(&a.channel)?;
    if !ch.validate().supports_ok() {
        return Err(Error::NotAdmissible("a covert row escapes the idle support; run `validate`".into()));
    }
    match &ch {
        Channel::Dmmac(c) => region_with(&MacModel::new(c)?, &a, &ch, args),
        Channel::Dmic(c) => region_with(&IcModel::new(c)?, &a, &ch, args),
        Channel::General(c) => region_with(&GeneralModel::new(c)?, &a, &ch, args),
    }
}

fn cmd_tradeoff(a: TradeoffArgs, args: &[String]) -> Result<i32> {
    let unit = a.units.unit();
    let ch = io::load(&a.channel)?;
    let mac: &Dmmac = ch.as_dmmac()?;
    let force = match a.reduce.as_deref() {
        None => false,
        Some("user=1") => true,
        Some(other) => return Err(Error::InvalidParams(format!("unsupported reduction `{other}` (only user=1)"))),
    };
    let su = SingleUser::from_dmmac(mac, force)?;
    let k_max = match a.k_max {
        Some(k) if k < 0.0 => return Err(Error::Infeasible(format!("key budget {k} is negative"))),
        Some(k) => unit.to_nats(k),
        None if su.knee() > 0.0 => 1.5 * su.knee(),
        None => unit.to_nats(1.0),
    };
    let pts = a.points.max(2);
    let mut csv = String::from("k1,r1\n");
    for i in 0..pts {
        let k = k_max * i as f64 / (pts - 1) as f64;
        writeln!(csv, "{},{}", fmt_sig(unit.from_nats(k), 12), fmt_sig(unit.from_nats(su.rate(k)), 12)).unwrap();
    }
    write_text(&a.out, &csv)?;
    let side = json!({
        "provenance": provenance(args, &ch, None, unit),
        "d_y": su.d_y, "d_z": su.d_z, "chi2": su.chi2,
        "capacity": unit.from_nats(su.capacity()),
        "knee": unit.from_nats(su.knee()),
    });
    write_json(&sidecar(&a.out), &side)?;
    Ok(0)
}

fn cmd_simulate(a: SimulateArgs, args: &[String]) -> Result<i32> {
    let ch = io::load(&a.channel)?;
    let mac = ch.as_dmmac()?;
    let ptext = std::fs::read_to_string(&a.params).map_err(|e| Error::io(&a.params, e))?;
    let params: crate::region::CovertParams = serde_json::from_str(&ptext)?;
    let mut cfg: SimConfig = match &a.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
        None => SimConfig::default(),
    };
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.delta_samples {
        cfg.delta_samples = v;
    }
    if let Some(v) = a.omega_scale {
        cfg.omega.scale = v;
    }
    if let Some(v) = a.size_scale {
        cfg.size_scale = v;
    }
    if let Some(v) = &a.phi {
        if v.len() != 2 {
            return Err(Error::InvalidParams("--phi needs two values".into()));
        }
        cfg.phi = [v[0], v[1]];
    }
    cfg.redraw |= a.redraw;
    let result = simulate(&cfg, &params, mac)?;
    let out = json!({
        "provenance": provenance(args, &ch, Some(cfg.seed), Unit::Nats),
        "result": result,
    });
    write_json(&a.out, &out)?;
    println!(
        "P_e0 = {} P_e1 = {} over {} trials",
        fmt_sig(result.pe0.rate, 6),
        fmt_sig(result.pe1.rate, 6),
        cfg.trials
    );
    Ok(0)
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut s = format!("{header}\n");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| fmt_sig(*v, 12)).collect();
        writeln!(s, "{}", cells.join(",")).unwrap();
    }
    write_text(path, &s)
}

fn level_name(v: f64) -> String {
    fmt_sig(v, 6)
}

fn cmd_figures(a: FiguresArgs, args: &[String]) -> Result<i32> {
    let ch = match &a.channel {
        Some(p) => io::load(p)?,
        None => Channel::Dmmac(reference::reference_mac()),
    };
    let mac = ch.as_dmmac()?;
    let opts = FigureOptions { angles: a.angles, starts: a.starts, seed: a.seed, ..Default::default() };
    let want = |f: Figure| a.which == Figure::All || a.which == f;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut files: Vec<String> = Vec::new();
    let mut note = |p: &Path| files.push(p.file_name().unwrap().to_string_lossy().into_owned());
    if want(Figure::Fig4) {
        let data = figures::fig4_data(mac, &opts)?;
        let p = a.out.join("fig4.csv");
        write_rows(
            &p,
            "w1,w2,w3,r1,r2,R3,k1,k2",
            data.iter().map(|(w, t)| vec![w[0], w[1], w[2], t.r[0], t.r[1], t.r_nc[0], t.k[0], t.k[1]]),
        )?;
        note(&p);
    }
    if want(Figure::Fig5) {
        for (lvl, pts) in figures::fig5_data(mac, &opts)? {
            let p = a.out.join(format!("fig5_r1_{}.csv", level_name(lvl)));
            write_boundary_csv(&p, &pts, Unit::Nats)?;
            note(&p);
        }
    }
    if want(Figure::Fig6) {
        for (lvl, pts) in figures::fig6_data(mac, &opts)? {
            let p = a.out.join(format!("fig6_R3_{}.csv", level_name(lvl)));
            write_boundary_csv(&p, &pts, Unit::Nats)?;
            note(&p);
        }
    }
    if want(Figure::Fig7) {
        let f = figures::fig7_data(mac, &opts)?;
        let p = a.out.join("fig7.csv");
        let header = (0..f.pinned.len()).fold(String::from("k2,randomized"), |h, x| h + &format!(",x3_{x}")) + ",hull";
        write_rows(
            &p,
            &header,
            (0..f.k2.len()).map(|i| {
                let mut r = vec![f.k2[i], f.randomized[i]];
                r.extend(f.pinned.iter().map(|c| c[i]));
                r.push(f.hull[i]);
                r
            }),
        )?;
        note(&p);
    }
    if want(Figure::Fig8) {
        let f = figures::fig8_data(mac, &opts)?;
        for (name, pts) in [("fig8_T1.csv", &f.single), ("fig8_T2.csv", &f.multiplexed)] {
            let p = a.out.join(name);
            write_boundary_csv(&p, pts, Unit::Nats)?;
            note(&p);
        }
        let p = a.out.join("fig8_support.csv");
        write_rows(&p, "theta,support_T1,support_T2,gain", f.support.iter().map(|s| vec![s.0, s.1, s.2, s.2 - s.1]))?;
        note(&p);
    }
    write_json(
        &a.out.join("figures.provenance.json"),
        &json!({"provenance": provenance(args, &ch, Some(a.seed), Unit::Bits), "files": files}),
    )?;
    Ok(0)
}
