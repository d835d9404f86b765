//! Command-line front end behind the `qsl` binary.
//!
//! Everything is computed with `Omega0 = 1`; `--omega0` and `--hbar` only
//! rescale what is printed or written. Data files carry one `#` header line
//! and 17 significant digits per value, and each is written next to a
//! `<name>.manifest.json` describing the run.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bloch2::{self, KerrParams};
use crate::error::Error;
use crate::isomorphism::{self, CheckConfig};
use crate::lambda3;
use crate::ode::IntegratorConfig;
use crate::shooting::{self, ShotConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;
pub const EXIT_NO_HIT: i32 = 5;
pub const EXIT_ORACLE: i32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(
    name = "qsl",
    version,
    about = "Quantum speed limits of 1:2 nonlinear two- and three-level systems"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GlobalOpts {
    /// Physical value of the field amplitude Omega0; times scale by 1/W, frequencies by W.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub omega0: f64,
    /// Value of hbar used for energies.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    /// Directory for data files and manifests.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Absolute and relative integrator tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Search horizon for three-level shots, in units of 1/Omega0.
    #[arg(long, global = true, default_value_t = shooting::DEFAULT_HORIZON)]
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
pub enum Command {
    /// Two-level 1:2 system.
    #[command(subcommand)]
    TwoLevel(TwoLevel),
    /// Three-level Lambda system.
    #[command(subcommand)]
    ThreeLevel(ThreeLevel),
    /// Two-level counterpart of the three-level dynamics.
    #[command(subcommand)]
    Iso(Iso),
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
pub enum TwoLevel {
    /// Minimum pulse area and time to reach 1/2 - eps.
    Tmin {
        #[arg(long, allow_hyphen_values = true)]
        eps: f64,
    },
    /// Transfer probability against pulse area.
    Curve {
        #[arg(long, default_value_t = 12.0)]
        amax: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Time-optimal history with the Kerr-locking detuning.
    Simulate {
        #[arg(long)]
        eps: f64,
        /// Lambda11,Lambda12,Lambda22 in units of Omega0.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0,0")]
        kerr: Vec<f64>,
    },
    /// Minimum field and energy for a transfer of duration T.
    Energy {
        #[arg(long = "T", allow_hyphen_values = true)]
        duration: f64,
        #[arg(long)]
        eps: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CostateOpts {
    /// Fixed initial lambda_phi.
    #[arg(long, default_value_t = shooting::DEFAULT_LAMBDA_PHI, allow_hyphen_values = true)]
    pub lphi: f64,
    /// Starting guess for lambda_theta.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub guess: f64,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
pub enum ThreeLevel {
    /// Hit time over a grid of initial costates.
    Landscape {
        #[arg(long)]
        eps: f64,
        /// Common bounds a,b of both costate axes.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-3,3")]
        range: Vec<f64>,
        /// Points per axis.
        #[arg(long, default_value_t = 200)]
        res: usize,
    },
    /// Time-optimal extremal with its pulses.
    Optimize {
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        costate: CostateOpts,
    },
    /// Minimum area against eps on a log-uniform grid, with the logarithmic fit.
    Areacurve {
        #[arg(long, default_value_t = 1e-3)]
        eps_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        eps_max: f64,
        #[arg(long, default_value_t = 9)]
        n: usize,
        #[arg(long, default_value_t = shooting::DEFAULT_LAMBDA_PHI, allow_hyphen_values = true)]
        lphi: f64,
    },
    /// Minimum field and energy for a transfer of duration T.
    Energy {
        #[arg(long = "T", allow_hyphen_values = true)]
        duration: f64,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        costate: CostateOpts,
    },
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
pub enum Iso {
    /// Cross-integration and quadrature checks along the time optimum.
    Check {
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        costate: CostateOpts,
        /// Uses a wrong Stokes coupling; the check must then fail.
        #[arg(long, hide = true)]
        corrupt_mapping: bool,
    },
    /// Pump area of the time optimum for each eps.
    Areadiv {
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
        eps_list: Vec<f64>,
        #[arg(long, default_value_t = shooting::DEFAULT_LAMBDA_PHI, allow_hyphen_values = true)]
        lphi: f64,
    },
}

/// Run record written next to every data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub parameters: Cli,
    pub version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
    Oracle(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Oracle(_) => EXIT_ORACLE,
            CliError::Core(e) => match e {
                Error::InvalidConfig(_) | Error::InsufficientData { .. } => EXIT_USAGE,
                Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
                Error::NoHit => EXIT_NO_HIT,
                _ => EXIT_DOMAIN,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Oracle(m) => write!(f, "oracle deviation: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Column-labelled numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# {}\n", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(c, &x)| (c.to_string(), serde_json::Value::from(x)))
                    .collect()
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Writes through a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

/// Output rescaling from `Omega0 = 1` internals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub omega0: f64,
    pub hbar: f64,
}

impl Units {
    pub fn time(&self, t: f64) -> f64 {
        t / self.omega0
    }
    pub fn frequency(&self, w: f64) -> f64 {
        w * self.omega0
    }
    pub fn energy(&self, e: f64) -> f64 {
        e * self.hbar * self.omega0
    }
    /// A user-supplied duration in physical units, made dimensionless.
    pub fn duration_in(&self, t: f64) -> f64 {
        t * self.omega0
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    argv: Vec<String>,
    units: Units,
    integrator: IntegratorConfig,
    started: Instant,
    stdout: String,
}

impl Ctx<'_> {
    fn shot_config(&self, eps: f64) -> CliResult<ShotConfig> {
        let cfg = ShotConfig {
            eps,
            horizon: self.cli.global.horizon,
            integrator: self.integrator,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn print(&mut self, table: &Table) {
        self.stdout.push_str(&table.render(self.cli.global.format));
    }

    fn note(&mut self, line: &str) {
        if self.cli.global.format == Format::Csv {
            let _ = writeln!(self.stdout, "# {line}");
        }
    }

    /// Writes each `(stem, table)` and one manifest named after the command.
    fn export(&mut self, command: &str, tables: &[(&str, &Table)]) -> CliResult<()> {
        let dir = &self.cli.global.out;
        fs::create_dir_all(dir)?;
        let format = self.cli.global.format;
        let mut outputs = Vec::new();
        for (stem, table) in tables {
            let name = format!("{stem}.{}", format.extension());
            write_atomic(&dir.join(&name), &table.render(format))?;
            outputs.push(name);
        }
        let manifest = RunManifest {
            command: command.to_string(),
            argv: self.argv.clone(),
            parameters: self.cli.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            outputs: outputs.clone(),
        };
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        write_atomic(
            &dir.join(format!("{}.manifest.json", command.replace([' ', '-'], "_"))),
            &json,
        )?;
        for name in outputs {
            eprintln!("wrote {}", dir.join(name).display());
        }
        Ok(())
    }
}

fn validate_global(g: &GlobalOpts) -> CliResult<()> {
    for (name, v) in [
        ("omega0", g.omega0),
        ("hbar", g.hbar),
        ("tol", g.tol),
        ("horizon", g.horizon),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!(
                "--{name} must be positive and finite (got {v})"
            )));
        }
    }
    Ok(())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> CliResult<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi < 1.0) || n < 2 {
        return Err(CliError::Usage(format!(
            "need 0 < eps-min < eps-max < 1 and n >= 2 (got {lo}, {hi}, {n})"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}

/// Runs `qsl` with the given arguments and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let argv = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match configure_threads().and_then(|()| execute(&cli, argv)) {
        Ok(out) => {
            print!("{out}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("qsl: {e}");
            e.exit_code()
        }
    }
}

/// Honors `QSL_THREADS` (0 or unset: rayon default).
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("QSL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("QSL_THREADS must be a non-negative integer (got {raw:?})")))?;
    if n > 0 {
        // a pool installed earlier in this process (e.g. by tests) stays in effect
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Executes a parsed command and returns what it prints on stdout.
pub fn execute(cli: &Cli, argv: Vec<String>) -> CliResult<String> {
    validate_global(&cli.global)?;
    let integrator = IntegratorConfig {
        abs_tol: cli.global.tol,
        rel_tol: cli.global.tol,
        ..IntegratorConfig::default()
    };
    integrator.validate()?;
    let mut ctx = Ctx {
        cli,
        argv,
        units: Units {
            omega0: cli.global.omega0,
            hbar: cli.global.hbar,
        },
        integrator,
        started: Instant::now(),
        stdout: String::new(),
    };
    match &cli.command {
        Command::TwoLevel(c) => two_level(&mut ctx, c)?,
        Command::ThreeLevel(c) => three_level(&mut ctx, c)?,
        Command::Iso(c) => iso(&mut ctx, c)?,
    }
    Ok(ctx.stdout)
}

fn two_level(ctx: &mut Ctx, cmd: &TwoLevel) -> CliResult<()> {
    let u = ctx.units;
    match cmd {
        TwoLevel::Tmin { eps } => {
            let area = bloch2::area_for_epsilon(*eps)?;
            let mut t = Table::new(&["eps", "a_min", "t_min"]);
            t.push(vec![*eps, area, u.time(area)]);
            ctx.print(&t);
        }
        TwoLevel::Curve { amax, step } => {
            let mut t = Table::new(&["area", "p_nonlinear", "p_linear", "p_asymptotic"]);
            for p in bloch2::probability_curve(*amax, *step)? {
                t.push(vec![p.area, p.nonlinear, p.linear, p.asymptotic]);
            }
            ctx.export("two-level curve", &[("two_level_curve", &t)])?;
        }
        TwoLevel::Simulate { eps, kerr } => {
            let [l11, l12, l22] = kerr[..] else {
                return Err(CliError::Usage(format!(
                    "--kerr takes three values (got {})",
                    kerr.len()
                )));
            };
            if kerr.iter().any(|k| !k.is_finite()) {
                return Err(CliError::Usage("--kerr values must be finite".into()));
            }
            let area = bloch2::area_for_epsilon(*eps)?;
            let samples = bloch2::simulate_locked(&KerrParams::new(l11, l12, l22), 1.0, area, &ctx.integrator)?;
            let mut t = Table::new(&["t", "eta1", "eta2", "eta3", "p1", "p2", "delta_lock"]);
            for s in samples {
                t.push(vec![
                    u.time(s.t),
                    s.bloch.eta1,
                    s.bloch.eta2,
                    s.bloch.eta3,
                    s.ground_population,
                    s.upper_population,
                    u.frequency(s.lock_detuning),
                ]);
            }
            ctx.export("two-level simulate", &[("two_level_simulate", &t)])?;
        }
        TwoLevel::Energy { duration, eps } => {
            let area = bloch2::area_for_epsilon(*eps)?;
            let (omega, energy) = bloch2::energy_optimum(u.duration_in(*duration), -0.5, 0.5 - eps)?;
            let mut t = Table::new(&["eps", "t", "a_min", "omega0_min", "e_min"]);
            t.push(vec![*eps, *duration, area, u.frequency(omega), u.energy(energy)]);
            ctx.print(&t);
        }
    }
    Ok(())
}

fn three_level(ctx: &mut Ctx, cmd: &ThreeLevel) -> CliResult<()> {
    let u = ctx.units;
    match cmd {
        ThreeLevel::Landscape { eps, range, res } => {
            let [a, b] = range[..] else {
                return Err(CliError::Usage(format!(
                    "--range takes two values (got {})",
                    range.len()
                )));
            };
            if !(a.is_finite() && b.is_finite() && a < b) || *res == 0 {
                return Err(CliError::Usage(format!("need a < b and res >= 1 (got {a},{b}, {res})")));
            }
            let cfg = ctx.shot_config(*eps)?;
            let axis = shooting::linspace(a, b, *res);
            let grid = shooting::landscape(&axis, &axis, &cfg)?;
            let (i0, j0, t_min) = grid.min().ok_or(Error::NoHit)?;
            let mut t = Table::new(&["l_phi", "l_theta", "t", "log10_excess"]);
            for (i, lp) in grid.l_phi.iter().enumerate() {
                for (j, lt) in grid.l_theta.iter().enumerate() {
                    let ti = grid.get(i, j);
                    let excess = if ti.is_finite() {
                        shooting::log_excess(u.time(ti), u.time(t_min))
                    } else {
                        f64::NAN
                    };
                    t.push(vec![*lp, *lt, u.time(ti), excess]);
                }
            }
            ctx.export("three-level landscape", &[("three_level_landscape", &t)])?;
            let mut m = Table::new(&["eps", "l_phi", "l_theta", "t_min", "hits"]);
            m.push(vec![
                *eps,
                grid.l_phi[i0],
                grid.l_theta[j0],
                u.time(t_min),
                grid.hit_count() as f64,
            ]);
            ctx.print(&m);
        }
        ThreeLevel::Optimize { eps, costate } => {
            let cfg = ctx.shot_config(*eps)?;
            let opt = shooting::refine(costate.lphi, costate.guess, &cfg)?;
            let mut t = Table::new(&[
                "t", "phi", "theta", "l_phi", "l_theta", "omega_p", "omega_s", "p1", "p2", "p3", "ansatz",
            ]);
            for ((time, y), p) in opt.trajectory.iter().zip(&opt.pulses) {
                let (a, _) = lambda3::split_extended(y);
                let s = lambda3::cartesian_from_angles(&a);
                t.push(vec![
                    u.time(time),
                    y[0],
                    y[1],
                    y[2],
                    y[3],
                    u.frequency(p.pump),
                    u.frequency(p.stokes),
                    s.x1 * s.x1,
                    2.0 * s.y2 * s.y2,
                    2.0 * s.x3 * s.x3,
                    2.0 * lambda3::ansatz_population(time, 1.0),
                ]);
            }
            ctx.export("three-level optimize", &[("three_level_optimum", &t)])?;
            let mut m = Table::new(&["eps", "l_phi", "l_theta", "t_min", "a_min"]);
            m.push(vec![*eps, opt.l_phi, opt.l_theta, u.time(opt.t_min), opt.a_min]);
            ctx.print(&m);
        }
        ThreeLevel::Areacurve {
            eps_min,
            eps_max,
            n,
            lphi,
        } => {
            let eps = log_grid(*eps_min, *eps_max, *n)?;
            let cfg = ctx.shot_config(eps[0])?;
            let curve = shooting::area_curve(&eps, *lphi, &cfg)?;
            let mut t = Table::new(&["eps", "a_min", "t_min", "l_theta"]);
            for p in &curve {
                t.push(vec![p.eps, p.a_min, u.time(p.a_min), p.l_theta]);
            }
            let fit = shooting::fit_asymptote(&curve.iter().map(|p| (p.eps, p.a_min)).collect::<Vec<_>>())?;
            let mut f = Table::new(&["slope", "intercept", "points"]);
            f.push(vec![fit.slope, fit.intercept, fit.points as f64]);
            ctx.export(
                "three-level areacurve",
                &[("three_level_areacurve", &t), ("three_level_areafit", &f)],
            )?;
            ctx.print(&f);
        }
        ThreeLevel::Energy { duration, eps, costate } => {
            let cfg = ctx.shot_config(*eps)?;
            let d = u.duration_in(*duration);
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Domain(format!("duration {duration} must be positive")).into());
            }
            let opt = shooting::refine(costate.lphi, costate.guess, &cfg)?;
            let e = shooting::energy_from_optimum(&opt, d);
            let shot = shooting::energy_shot(&opt, &e, &cfg)?.ok_or(Error::NoHit)?;
            let mut t = Table::new(&["eps", "t", "a_min", "omega0_min", "e_min", "t_shot"]);
            t.push(vec![
                *eps,
                *duration,
                e.a_min,
                u.frequency(e.omega0_min),
                u.energy(e.e_min),
                u.time(shot.t),
            ]);
            ctx.print(&t);
        }
    }
    Ok(())
}

fn iso(ctx: &mut Ctx, cmd: &Iso) -> CliResult<()> {
    match cmd {
        Iso::Check {
            eps,
            costate,
            corrupt_mapping,
        } => {
            let cfg = ctx.shot_config(*eps)?;
            let opt = shooting::refine(costate.lphi, costate.guess, &cfg)?;
            let check_cfg = CheckConfig {
                stokes_factor: if *corrupt_mapping {
                    std::f64::consts::FRAC_1_SQRT_2
                } else {
                    0.5
                },
                ..CheckConfig::default()
            };
            let c = isomorphism::check(&opt, &check_cfg, &ctx.integrator)?;
            let mut t = Table::new(&[
                "eps",
                "t_final",
                "bloch_deviation",
                "amplitude_deviation",
                "angle_deviation",
                "round_trip_deviation",
                "theta_deviation",
                "max_abs_rho_x",
                "norm_drift",
                "final_theta",
            ]);
            t.push(vec![
                c.eps,
                ctx.units.time(c.t_final),
                c.bloch_deviation,
                c.amplitude_deviation,
                c.angle_deviation,
                c.round_trip_deviation,
                c.theta_deviation,
                c.max_abs_rho_x,
                c.norm_drift,
                c.final_theta,
            ]);
            ctx.print(&t);
            if !c.passed() {
                return Err(CliError::Oracle(format!(
                    "state {:.3e} (limit {:.0e}), theta {:.3e} (limit {:.0e}), max |rho_x| {}, norm drift {:.3e}",
                    c.state_deviation(),
                    c.state_tol,
                    c.theta_deviation,
                    c.theta_tol,
                    c.max_abs_rho_x,
                    c.norm_drift
                )));
            }
            ctx.note("all deviations within limits");
        }
        Iso::Areadiv { eps_list, lphi } => {
            if eps_list.is_empty() {
                return Err(CliError::Usage("--eps-list is empty".into()));
            }
            let cfg = ctx.shot_config(eps_list[0])?;
            for &e in eps_list {
                ShotConfig { eps: e, ..cfg }.validate()?;
            }
            let points = isomorphism::area_divergence_check(eps_list, *lphi, &cfg)?;
            let mut t = Table::new(&["eps", "pump_area", "a_min", "l_theta", "max_abs_rho_x"]);
            for p in &points {
                t.push(vec![p.eps, p.pump_area, p.a_min, p.l_theta, p.max_abs_rho_x]);
            }
            ctx.export("iso areadiv", &[("iso_areadiv", &t)])?;
            ctx.print(&t);
            if !isomorphism::strictly_divergent(&points) {
                return Err(CliError::Oracle(
                    "pump area does not grow strictly as eps decreases".into(),
                ));
            }
            if points.iter().any(|p| p.max_abs_rho_x >= 1.0) {
                return Err(CliError::Oracle("|rho_x| reached 1 at finite time".into()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 7.599_9, -1e-300, 1.0 / 3.0, 123456789.123] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn csv_has_single_header() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0, 2.0]);
        let csv = t.to_csv();
        assert_eq!(csv.lines().filter(|l| l.starts_with('#')).count(), 1);
        assert_eq!(csv.lines().next().unwrap(), "# a,b");
        let json: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(json[0]["b"], 2.0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::NoHit).exit_code(), EXIT_NO_HIT);
        assert_eq!(
            CliError::from(Error::NoConvergence { iterations: 1 }).exit_code(),
            EXIT_NO_CONVERGENCE
        );
        assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), EXIT_DOMAIN);
        assert_eq!(CliError::from(Error::InvalidConfig("x".into())).exit_code(), EXIT_USAGE);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e-1, 9).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!((g[0], g[8]), (1e-3, 1e-1));
        assert!((g[4] - 1e-2).abs() < 1e-15);
        assert!(log_grid(0.1, 0.01, 5).is_err());
    }

    #[test]
    fn parse_negative_range() {
        let cli =
            Cli::try_parse_from(["qsl", "three-level", "landscape", "--eps", "0.005", "--range", "-3,3"]).unwrap();
        match cli.command {
            Command::ThreeLevel(ThreeLevel::Landscape { range, res, .. }) => {
                assert_eq!(range, vec![-3.0, 3.0]);
                assert_eq!(res, 200);
            }
            other => panic!("{other:?}"),
        }
    }
}
