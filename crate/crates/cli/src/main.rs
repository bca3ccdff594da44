use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use blowup_core::evolution::{self, GridOptions, RunOptions, RunStatus};
use blowup_core::profile::{self, BlowupFrame, Corrector};
use blowup_core::spectral::transform::{self, RadialQuadrature, SpectralQuadrature, TransformOptions};
use blowup_core::spectral::{SpectralOperator, SpectralOptions};
use blowup_core::transference::{KernelOptions, KernelTable};
use blowup_core::{Error, HarmonicMap, SurfaceProfile};
use clap::{Args, Parser, Subcommand};

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "blowup-lab", version, about = "Numerical lab for co-rotational wave-map blow-up")]
#[command(args_override_self = true)]
struct Cli {
    /// Worker threads (falls back to BLOWUP_LAB_THREADS, then 1).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// File of `key = value` lines used as default flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Target-surface checks.
    #[command(subcommand)]
    Surface(SurfaceCmd),
    /// Harmonic map Q on a radial grid.
    HarmonicMap(HarmonicMapArgs),
    /// Approximate blow-up profiles.
    #[command(subcommand)]
    Profile(ProfileCmd),
    /// Distorted Fourier basis, spectral measure and transform.
    #[command(subcommand)]
    Spectral(SpectralCmd),
    /// Transference kernel.
    #[command(subcommand)]
    Transference(TransferenceCmd),
    /// Radial wave-map evolution from the blow-up profile.
    Evolve(EvolveArgs),
}

#[derive(Subcommand, Debug)]
enum SurfaceCmd {
    Validate {
        #[command(flatten)]
        profile: ProfileArg,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct ProfileArg {
    /// Profile file, or the keyword `sphere`.
    #[arg(long)]
    profile: String,
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HarmonicMapArgs {
    #[command(flatten)]
    profile: ProfileArg,
    #[arg(long, default_value = "1e-3:1e3:121")]
    r_grid: String,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Subcommand, Debug)]
enum ProfileCmd {
    /// `sup |t^2 e0|`, `sup |t^2 e1|` over the cone.
    Errors {
        #[command(flatten)]
        profile: ProfileArg,
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value = "1e-3:1e-1:9")]
        t_grid: String,
        #[arg(long, default_value_t = 400)]
        n_radii: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Local energy of `u0` over the cone.
    LocalEnergy {
        #[command(flatten)]
        profile: ProfileArg,
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value = "1e-3:1e-1:9")]
        t_grid: String,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct OperatorArg {
    /// Profile file, or the keyword `sphere`.
    #[arg(long, required_unless_present = "free")]
    profile: Option<String>,
    /// Replace the potential by zero.
    #[arg(long)]
    free: bool,
}

#[derive(Subcommand, Debug)]
enum SpectralCmd {
    /// `a(xi)` and `rho(xi)`.
    Measure {
        #[command(flatten)]
        op: OperatorArg,
        #[arg(long, default_value = "1e-6:1e3:46")]
        xi_grid: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// `phi(r, xi)` at fixed `xi`.
    Basis {
        #[command(flatten)]
        op: OperatorArg,
        #[arg(long)]
        xi: f64,
        #[arg(long, default_value = "0.01:20:200:lin")]
        r_grid: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Forward transform of samples `r, f` read from a CSV file.
    Transform {
        #[command(flatten)]
        op: OperatorArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        xi_lo: f64,
        #[arg(long, default_value_t = 60.0)]
        k_hi: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand, Debug)]
enum TransferenceCmd {
    Kernel {
        #[command(flatten)]
        profile: ProfileArg,
        #[arg(long, default_value = "1e-3:1e2:40")]
        grid: String,
        #[arg(long, default_value_t = 1e-8)]
        tail_tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    profile: ProfileArg,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 0.2)]
    t_start: f64,
    #[arg(long, default_value_t = 0.05)]
    t_end: f64,
    #[arg(long, default_value_t = 20000)]
    n: usize,
    /// Outer radius; defaults to `5 t_start`.
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    cfl: f64,
    /// Start from `u0` instead of `u0 + t^{2 nu} w`.
    #[arg(long)]
    no_corrector: bool,
    /// Run the sub-threshold control with this amplitude instead.
    #[arg(long)]
    control: Option<f64>,
    /// Absorbing sponge width at the outer boundary.
    #[arg(long)]
    sponge: Option<f64>,
    #[command(flatten)]
    out: OutArg,
}

/// Errors the user can fix by changing inputs.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Invalid>().is_some() {
        return EXIT_VALIDATION;
    }
    match e.downcast_ref::<Error>() {
        Some(
            Error::InvalidProfile(_)
            | Error::RhoMNotBracketed { .. }
            | Error::NormalizationInfeasible { .. }
            | Error::Domain(_),
        ) => EXIT_VALIDATION,
        _ => EXIT_NUMERICAL,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match with_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Splice `--key value` pairs from a `--config` file in front of the first
/// flag, so explicit flags given later override them.
fn with_config(argv: Vec<String>) -> anyhow::Result<Vec<String>> {
    let Some(pos) = argv.iter().position(|a| a == "--config") else {
        return Ok(argv);
    };
    let path = argv.get(pos + 1).ok_or_else(|| anyhow!("--config needs a path"))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {path}"))?;
    let mut extra = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line without '=': {line}"))?;
        extra.push(format!("--{}", k.trim().replace('_', "-")));
        let v = v.trim();
        if v != "true" {
            extra.push(v.to_string());
        }
    }
    let mut out: Vec<String> = argv[..pos].to_vec();
    out.extend_from_slice(&argv[pos + 2..]);
    let first_flag = out.iter().skip(1).position(|a| a.starts_with('-')).map_or(out.len(), |i| i + 1);
    out.splice(first_flag..first_flag, extra);
    Ok(out)
}

fn threads(flag: Option<usize>) -> anyhow::Result<usize> {
    if let Some(n) = flag {
        return Ok(n.max(1));
    }
    match std::env::var("BLOWUP_LAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|n| n.max(1))
            .map_err(|_| invalid(format!("BLOWUP_LAB_THREADS = {v:?} is not a count"))),
        Err(_) => Ok(1),
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let n_threads = threads(cli.threads)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n_threads)
        .build_global()
        .context("starting worker pool")?;
    let mut m = Manifest::new(&cli.command);
    m.push("threads", n_threads);
    match cli.command {
        Command::Surface(SurfaceCmd::Validate { profile, samples, out }) => {
            let surface = load_profile(&profile.profile)?;
            m.push("profile", &profile.profile);
            m.push("samples", samples);
            let report = surface.validate(samples);
            let mut csv = Csv::new(&m, &["assumption", "status", "worst_rho", "worst_value"]);
            for c in &report.checks {
                csv.row_str(&[c.assumption, c.status.as_str()], &[c.worst_rho, c.worst_value]);
            }
            csv.write(out.out.as_deref())?;
            Ok(if report.all_passed() { 0 } else { EXIT_VALIDATION })
        }
        Command::HarmonicMap(a) => {
            let hm = HarmonicMap::solve_default(&load_profile(&a.profile.profile)?)?;
            m.push("profile", &a.profile.profile);
            let rs = Grid::parse(&a.r_grid, true)?;
            m.push("r_grid", &rs);
            let mut csv = Csv::new(&m, &["r", "Q", "Qprime", "Qsecond"]);
            for r in rs.points() {
                csv.row(&[r, hm.q(r), hm.q_prime(r), hm.q_second(r)]);
            }
            csv.write(a.out.out.as_deref())?;
            Ok(0)
        }
        Command::Profile(ProfileCmd::Errors { profile, nu, t_grid, n_radii, tol, out }) => {
            let hm = HarmonicMap::solve_default(&load_profile(&profile.profile)?)?;
            let ts = Grid::parse(&t_grid, true)?;
            m.push("profile", &profile.profile);
            m.push("nu", nu);
            m.push("t_grid", &ts);
            m.push("n_radii", n_radii);
            m.push("tol", tol);
            let pts = ts.points();
            let t_min = pts.iter().copied().fold(f64::INFINITY, f64::min);
            let corrector = Corrector::solve(
                nu,
                &hm,
                profile::required_r_max(nu, t_min),
                profile::DEFAULT_R_MATCH,
                tol,
            )?;
            let samples = profile::error_sweep(&corrector, &pts, n_radii)?;
            let mut csv = Csv::new(&m, &["t", "sup_e0", "sup_e1", "ratio"]);
            for s in &samples {
                csv.row(&[s.t, s.sup_e0, s.sup_e1, s.ratio]);
            }
            csv.comment(&format!("exponent: {}", profile::improvement_exponent(&samples)));
            csv.write(out.out.as_deref())?;
            Ok(0)
        }
        Command::Profile(ProfileCmd::LocalEnergy { profile, nu, t_grid, out }) => {
            let hm = HarmonicMap::solve_default(&load_profile(&profile.profile)?)?;
            let ts = Grid::parse(&t_grid, true)?;
            m.push("profile", &profile.profile);
            m.push("nu", nu);
            m.push("t_grid", &ts);
            let pts = ts.points();
            let t0 = pts.iter().copied().fold(0.0, f64::max);
            let frame = BlowupFrame::new(nu, t0)?;
            let e_q = hm.energy()?;
            let mut csv = Csv::new(&m, &["t", "Eloc_u0", "E_Q"]);
            for t in pts {
                csv.row(&[t, profile::local_energy_of_profile(&frame, &hm, t)?, e_q]);
            }
            csv.write(out.out.as_deref())?;
            Ok(0)
        }
        Command::Spectral(cmd) => spectral(cmd, m),
        Command::Transference(TransferenceCmd::Kernel { profile, grid, tail_tol, out }) => {
            let hm = HarmonicMap::solve_default(&load_profile(&profile.profile)?)?;
            let xis = Grid::parse(&grid, true)?;
            m.push("profile", &profile.profile);
            m.push("grid", &xis);
            m.push("tail_tol", tail_tol);
            let op = SpectralOperator::new(&hm, SpectralOptions::default());
            let opts = KernelOptions {
                tail_tol,
                ..KernelOptions::default()
            };
            let pts = xis.points();
            let table = KernelTable::build(&op, &pts, &opts)?;
            m.push("r_cut", table.r_cut);
            let mut csv = Csv::new(&m, &["xi", "eta", "F", "K0_or_nan", "diag_if_diagonal"]);
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    let k0 = table.k0(i, j).unwrap_or(f64::NAN);
                    let diag = if i == j { table.diag[i] } else { f64::NAN };
                    csv.row(&[pts[i], pts[j], table.f[i][j], k0, diag]);
                }
            }
            csv.comment(&format!("symmetry_defect: {}", table.symmetry_defect()));
            csv.write(out.out.as_deref())?;
            Ok(0)
        }
        Command::Evolve(a) => evolve(a, m),
    }
}

fn operator(arg: &OperatorArg, m: &mut Manifest) -> anyhow::Result<SpectralOperator> {
    if arg.free {
        m.push("operator", "free");
        return Ok(SpectralOperator::free(SpectralOptions::default()));
    }
    let name = arg.profile.as_deref().ok_or_else(|| invalid("--profile or --free required"))?;
    m.push("profile", name);
    let hm = HarmonicMap::solve_default(&load_profile(name)?)?;
    Ok(SpectralOperator::new(&hm, SpectralOptions::default()))
}

fn spectral(cmd: SpectralCmd, mut m: Manifest) -> anyhow::Result<u8> {
    match cmd {
        SpectralCmd::Measure { op, xi_grid, out } => {
            let op = operator(&op, &mut m)?;
            let xis = Grid::parse(&xi_grid, true)?;
            m.push("xi_grid", &xis);
            let modes = op.modes(&xis.points())?;
            let mut csv = Csv::new(&m, &["xi", "re_a", "im_a", "rho"]);
            for md in &modes {
                csv.row(&[md.xi, md.a.re, md.a.im, md.rho()]);
            }
            csv.write(out.out.as_deref())?;
        }
        SpectralCmd::Basis { op, xi, r_grid, out } => {
            let op = operator(&op, &mut m)?;
            let rs = Grid::parse(&r_grid, false)?;
            m.push("xi", xi);
            m.push("r_grid", &rs);
            let pts = rs.points();
            let mode = op.mode(xi)?;
            let vals = op.phi_values(&mode, &pts)?;
            let mut csv = Csv::new(&m, &["r", "phi", "phi_prime"]);
            for (r, v) in pts.iter().zip(&vals) {
                csv.row(&[*r, v[0], v[1]]);
            }
            csv.write(out.out.as_deref())?;
        }
        SpectralCmd::Transform { op, input, xi_lo, k_hi, out } => {
            let op = operator(&op, &mut m)?;
            let (rs, f) = read_samples(&input)?;
            m.push("in", input.display());
            m.push("xi_lo", xi_lo);
            m.push("k_hi", k_hi);
            let rq = trapezoid(&rs);
            let opts = TransformOptions {
                xi_lo,
                k_hi,
                ..TransformOptions::default()
            };
            let sq = SpectralQuadrature::build(&op, &opts)?;
            let fhat = transform::forward(&op, &sq, &rq, &f)?;
            let mut csv = Csv::new(&m, &["xi", "rho_weight", "fhat"]);
            for ((md, w), v) in sq.modes.iter().zip(&sq.weights).zip(&fhat.values) {
                csv.row(&[md.xi, *w, *v]);
            }
            csv.comment(&format!(
                "norm_sq: {} spectral_norm_sq: {}",
                rq.norm_sq(&f),
                transform::plancherel(&sq, &fhat)
            ));
            csv.write(out.out.as_deref())?;
        }
    }
    Ok(0)
}

fn evolve(a: EvolveArgs, mut m: Manifest) -> anyhow::Result<u8> {
    let hm = HarmonicMap::solve_default(&load_profile(&a.profile.profile)?)?;
    let r_max = a.r_max.unwrap_or(5.0 * a.t_start);
    for (k, v) in [
        ("nu", a.nu),
        ("t_start", a.t_start),
        ("t_end", a.t_end),
        ("r_max", r_max),
        ("cfl", a.cfl),
    ] {
        m.push(k, v);
    }
    m.push("profile", &a.profile.profile);
    m.push("n", a.n);
    m.push("corrector", !a.no_corrector);
    if let Some(c) = a.control {
        m.push("control", c);
    }
    if let Some(s) = a.sponge {
        m.push("sponge", s);
    }
    let frame = BlowupFrame::new(a.nu, a.t_start)?;
    let grid = GridOptions { n: a.n, r_max };
    let opts = RunOptions {
        cfl: a.cfl,
        sponge: a.sponge,
    };
    let ex = match a.control {
        Some(amp) => evolution::run_control(&frame, &hm, amp, a.t_start, a.t_end, grid, opts)?,
        None => {
            let corrector = if a.no_corrector {
                None
            } else {
                // R reaches lambda(t_start) * r_max on the grid
                let big_r = frame.lambda(a.t_start) * (r_max + 2.0 * grid.spacing());
                Some(Corrector::solve(a.nu, &hm, big_r.max(10.0), profile::DEFAULT_R_MATCH, 1e-12)?)
            };
            evolution::run_blowup_experiment(&frame, &hm, corrector.as_ref(), a.t_start, a.t_end, grid, opts)?
        }
    };
    let mut csv = Csv::new(&m, &["t", "E_total", "Eloc_cone", "sup_u", "min_dt_used"]);
    for r in &ex.rows {
        csv.row(&[r.t, r.e_total, r.e_loc_cone, r.sup_u, r.min_dt]);
    }
    csv.comment(&format!("E_Q: {}", ex.e_q));
    let code = match ex.status {
        RunStatus::Completed => {
            csv.comment("status: completed");
            0
        }
        RunStatus::NonFinite { t } => {
            csv.comment(&format!("status: non-finite at t = {t}, blow-up suspected"));
            EXIT_NUMERICAL
        }
        RunStatus::ResolutionExhausted { t } => {
            csv.comment(&format!("status: resolution exhausted at t = {t}"));
            EXIT_NUMERICAL
        }
    };
    csv.write(a.out.out.as_deref())?;
    Ok(code)
}

/// Profile files hold `kind=sphere|series`, `coeffs=c0,c1,...` and
/// `rho_m_hint=<float>` lines; the bare keyword `sphere` needs no file.
fn load_profile(source: &str) -> anyhow::Result<SurfaceProfile> {
    if source == "sphere" {
        return Ok(SurfaceProfile::sphere());
    }
    let text = std::fs::read_to_string(source).map_err(|e| invalid(format!("reading profile {source}: {e}")))?;
    parse_profile(&text)
}

fn parse_profile(text: &str) -> anyhow::Result<SurfaceProfile> {
    let mut kind = None;
    let mut coeffs = None;
    let mut hint = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "sphere" {
            kind = Some("sphere".to_string());
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("profile line without '=': {line}")))?;
        let v = v.trim();
        match k.trim() {
            "kind" => kind = Some(v.to_string()),
            "coeffs" => {
                let c: Result<Vec<f64>, _> = v.split(',').map(|x| x.trim().parse::<f64>()).collect();
                coeffs = Some(c.map_err(|e| invalid(format!("bad coefficient list {v:?}: {e}")))?);
            }
            "rho_m_hint" => {
                hint = Some(v.parse::<f64>().map_err(|e| invalid(format!("bad rho_m_hint {v:?}: {e}")))?)
            }
            other => return Err(invalid(format!("unknown profile key {other:?}"))),
        }
    }
    match kind.as_deref() {
        Some("sphere") => Ok(SurfaceProfile::sphere()),
        Some("series") => {
            let coeffs = coeffs.ok_or_else(|| invalid("series profile needs coeffs="))?;
            let hint = hint.ok_or_else(|| invalid("series profile needs rho_m_hint="))?;
            Ok(SurfaceProfile::from_series(&coeffs, hint)?)
        }
        Some(other) => Err(invalid(format!("unknown profile kind {other:?}"))),
        None => Err(invalid("profile needs kind=")),
    }
}

/// `a:b:n` with an optional `:log` or `:lin` suffix.
#[derive(Debug, Clone, PartialEq)]
struct Grid {
    a: f64,
    b: f64,
    n: usize,
    log: bool,
}

impl Grid {
    fn parse(s: &str, default_log: bool) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(invalid(format!("grid {s:?} is not a:b:n[:log|:lin]")));
        }
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| invalid(format!("bad number {x:?} in grid {s:?}")));
        let a = num(parts[0])?;
        let b = num(parts[1])?;
        let n = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("bad count in grid {s:?}")))?;
        let log = match parts.get(3).map(|x| x.trim()) {
            None => default_log,
            Some("log") => true,
            Some("lin") => false,
            Some(x) => return Err(invalid(format!("grid spacing {x:?} is neither log nor lin"))),
        };
        if n == 0 || !(a.is_finite() && b.is_finite()) || (log && !(a > 0.0 && b > 0.0)) {
            return Err(invalid(format!("grid {s:?} is empty or has non-positive log ends")));
        }
        Ok(Self { a, b, n, log })
    }

    fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.a];
        }
        let step = |i: usize| i as f64 / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i == 0 {
                    self.a
                } else if i + 1 == self.n {
                    self.b
                } else if self.log {
                    (self.a.ln() + step(i) * (self.b / self.a).ln()).exp()
                } else {
                    self.a + step(i) * (self.b - self.a)
                }
            })
            .collect()
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}:{}", self.a, self.b, self.n, if self.log { "log" } else { "lin" })
    }
}

fn read_samples(path: &Path) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("reading {}: {e}", path.display())))?;
    let mut rs = Vec::new();
    let mut fs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(|c: char| c.is_ascii_alphabetic()) {
            continue;
        }
        let mut it = line.split(',').map(|x| x.trim().parse::<f64>());
        match (it.next(), it.next()) {
            (Some(Ok(r)), Some(Ok(f))) => {
                rs.push(r);
                fs.push(f);
            }
            _ => return Err(invalid(format!("bad sample line {line:?}"))),
        }
    }
    if rs.len() < 2 || rs.windows(2).any(|w| !(w[1] > w[0])) || rs[0] <= 0.0 {
        return Err(invalid("samples need at least two strictly increasing positive radii"));
    }
    Ok((rs, fs))
}

fn trapezoid(rs: &[f64]) -> RadialQuadrature {
    let n = rs.len();
    let weights = (0..n)
        .map(|i| {
            let left = if i == 0 { 0.0 } else { rs[i] - rs[i - 1] };
            let right = if i + 1 == n { 0.0 } else { rs[i + 1] - rs[i] };
            0.5 * (left + right)
        })
        .collect();
    RadialQuadrature {
        nodes: rs.to_vec(),
        weights,
    }
}

/// Resolved parameters echoed into every CSV.
struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    fn new(cmd: &Command) -> Self {
        let name = match cmd {
            Command::Surface(_) => "surface validate",
            Command::HarmonicMap(_) => "harmonic-map",
            Command::Profile(ProfileCmd::Errors { .. }) => "profile errors",
            Command::Profile(ProfileCmd::LocalEnergy { .. }) => "profile local-energy",
            Command::Spectral(SpectralCmd::Measure { .. }) => "spectral measure",
            Command::Spectral(SpectralCmd::Basis { .. }) => "spectral basis",
            Command::Spectral(SpectralCmd::Transform { .. }) => "spectral transform",
            Command::Transference(_) => "transference kernel",
            Command::Evolve(_) => "evolve",
        };
        let mut m = Self { entries: Vec::new() };
        m.push("version", env!("CARGO_PKG_VERSION"));
        m.push("command", name);
        m
    }

    fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    fn line(&self) -> String {
        let body: Vec<String> = self.entries.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# manifest: {}", body.join(" "))
    }
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(m: &Manifest, header: &[&str]) -> Self {
        Self {
            text: format!("{}\n{}\n", m.line(), header.join(",")),
        }
    }

    fn row(&mut self, values: &[f64]) {
        self.row_str(&[], values);
    }

    fn row_str(&mut self, labels: &[&str], values: &[f64]) {
        let mut cells: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        cells.extend(values.iter().map(|v| format!("{v:e}")));
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    fn comment(&mut self, s: &str) {
        let _ = writeln!(self.text, "# {s}");
    }

    fn write(&self, path: Option<&Path>) -> anyhow::Result<()> {
        match path {
            Some(p) => std::fs::write(p, &self.text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{}", self.text);
                Ok(())
            }
        }
    }
}
