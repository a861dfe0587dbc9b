//! Command-line front end: domain ingestion, sub-commands, CSV/JSON output.
//!
//! Exit codes: 0 success, 2 usage/config error, 3 numerical failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use ring_scatter::domain::piecewise_ring_eigendata;
use ring_scatter::oracle::assemble_full_s;
use ring_scatter::qmatrix::{build_q, resonance_data};
use ring_scatter::scattering::{smatrix, smatrix_asymptotic, smatrix_at_resonance};
use ring_scatter::transport::{averaged_conductance, switch_report};
use ring_scatter::{
    barrier_switch, green_direct, interference_switch, DomainConfig, Engine, RingDomain,
    ScatteringMatrix, SwitchConfig, SwitchSpec,
};

const TOOL: &str = "ring-scatter";

#[derive(Parser)]
#[command(name = TOOL, version, about = "Scattering and transport on a ring with attached semi-infinite leads")]
struct Cli {
    /// Worker threads for sweeps (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Scattering engine backing transmission evaluations
    #[arg(long, global = true, value_enum, default_value_t = EngineArg::Qmatrix)]
    engine: EngineArg,
    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Qmatrix,
    Direct,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Qmatrix => Engine::QMatrix,
            EngineArg::Direct => Engine::Direct,
        }
    }
}

#[derive(Args)]
struct DomainArgs {
    /// TOML domain description (overrides the inline flags)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ring circumference
    #[arg(long, default_value_t = 2.0 * PI)]
    circumference: f64,
    /// Uniform ring potential
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    /// Comma-separated attachment points
    #[arg(long, default_value = "0.0")]
    attachments: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ring eigenvalues up to a cap, with eigenfunction values at the
    /// attachment points (CSV)
    Eigen {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        lambda_max: f64,
    },
    /// Green's function values at attachment coordinates (CSV)
    Green {
        #[command(flatten)]
        domain: DomainArgs,
        /// Spectral parameter: a value or lo:hi:n grid
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
    },
    /// Q-matrix of Green's values at the attachment points (JSON)
    Qmat {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        lambda: f64,
    },
    /// Scattering matrix at a single energy (JSON)
    Smat {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Transmission sweep over an energy grid (CSV)
    Sweep {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        lambda_min: f64,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long, default_value_t = 500)]
        points: usize,
        #[arg(long)]
        beta: f64,
        /// Grid points closer than this to a ring eigenvalue are skipped
        #[arg(long, default_value_t = 1e-6)]
        skip_margin: f64,
    },
    /// Resonance decomposition at an eigenvalue: residue, projector,
    /// regular part, and the resonance-limit S-matrix (JSON)
    Resonance {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        lambda0: f64,
        /// Also evaluate the resonance-limit and asymptotic S-matrices
        #[arg(long)]
        beta: Option<f64>,
        /// Order of the weak-coupling expansion
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
    /// Fermi-averaged conductance over (beta, tau) grids (CSV)
    Conductance {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        mu: f64,
        /// Temperature parameter: a value or lo:hi:n grid
        #[arg(long)]
        tau: String,
        /// Coupling: a value or lo:hi:n grid
        #[arg(long)]
        beta: String,
        #[arg(long, default_value_t = 0)]
        source: usize,
        #[arg(long, default_value_t = 1)]
        drain: usize,
    },
    /// Two-state switch report (JSON), optionally with a transmission sweep
    /// of both states (CSV)
    Switch {
        /// Built-in parameter set
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// TOML switch description (alternative to --preset)
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = 1e-3)]
        tau: f64,
        /// Write a (lambda, T_open, T_closed) sweep to this file
        #[arg(long)]
        sweep_out: Option<PathBuf>,
        #[arg(long, default_value_t = 400)]
        sweep_points: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Interference,
    Barrier,
}

enum CliError {
    Usage(String),
    Numeric(String),
}

impl From<ring_scatter::RingError> for CliError {
    fn from(e: ring_scatter::RingError) -> Self {
        match e {
            ring_scatter::RingError::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Ignored if a global pool already exists (tests invoke run twice).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    match run(&cli) {
        Ok(text) => {
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, text) {
                    eprintln!("{TOOL}: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("{TOOL}: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("{TOOL}: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> CliResult<String> {
    let engine: Engine = cli.engine.into();
    match &cli.cmd {
        Cmd::Eigen { domain, lambda_max } => cmd_eigen(domain, *lambda_max, engine),
        Cmd::Green { domain, lambda, s, t } => cmd_green(domain, lambda, *s, *t, engine),
        Cmd::Qmat { domain, lambda } => cmd_qmat(domain, *lambda, engine),
        Cmd::Smat { domain, lambda, beta } => cmd_smat(domain, *lambda, *beta, engine),
        Cmd::Sweep {
            domain,
            lambda_min,
            lambda_max,
            points,
            beta,
            skip_margin,
        } => cmd_sweep(domain, *lambda_min, *lambda_max, *points, *beta, *skip_margin, engine),
        Cmd::Resonance {
            domain,
            lambda0,
            beta,
            order,
        } => cmd_resonance(domain, *lambda0, *beta, *order, engine),
        Cmd::Conductance {
            domain,
            mu,
            tau,
            beta,
            source,
            drain,
        } => cmd_conductance(domain, *mu, tau, beta, *source, *drain, engine),
        Cmd::Switch {
            preset,
            config,
            beta,
            tau,
            sweep_out,
            sweep_points,
        } => cmd_switch(*preset, config, *beta, *tau, sweep_out, *sweep_points, engine),
    }
}

// ---------------------------------------------------------------- plumbing

fn load_domain(args: &DomainArgs) -> CliResult<(RingDomain, DomainConfig)> {
    let config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<DomainConfig>(&text).map_err(|e| {
                CliError::Usage(format!("config error in {}: {e}", path.display()))
            })?
        }
        None => {
            let attachments = parse_list(&args.attachments)
                .map_err(|e| CliError::Usage(format!("--attachments: {e}")))?;
            DomainConfig {
                circumference: args.circumference,
                segments: Vec::new(),
                q: args.q,
                attachments,
            }
        }
    };
    let domain = config.build()?;
    // Echo a config that reparses to the same domain.
    Ok((domain.clone(), DomainConfig::from_domain(&domain)))
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}")))
        .collect()
}

/// A single value "x" or an inclusive grid "lo:hi:n".
fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = |m: String| CliError::Usage(format!("grid {text:?}: {m}"));
    match parts.as_slice() {
        [x] => Ok(vec![x
            .trim()
            .parse::<f64>()
            .map_err(|e| bad(e.to_string()))?]),
        [lo, hi, n] => {
            let lo: f64 = lo.trim().parse().map_err(|e| bad(format!("{e}")))?;
            let hi: f64 = hi.trim().parse().map_err(|e| bad(format!("{e}")))?;
            let n: usize = n.trim().parse().map_err(|e| bad(format!("{e}")))?;
            if n < 2 || hi <= lo {
                return Err(bad("need lo < hi and n >= 2".into()));
            }
            Ok((0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect())
        }
        _ => Err(bad("expected a value or lo:hi:n".into())),
    }
}

fn csv_header(config: &DomainConfig, engine: Engine, extra: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {TOOL} {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# engine: {engine}");
    let _ = writeln!(
        out,
        "# config: {}",
        serde_json::to_string(config).expect("config serializes")
    );
    for line in extra {
        let _ = writeln!(out, "# {line}");
    }
    out
}

#[derive(Serialize)]
struct Meta {
    tool: &'static str,
    version: &'static str,
    engine: String,
    config: DomainConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    caveats: Vec<String>,
}

impl Meta {
    fn new(config: DomainConfig, engine: Engine) -> Self {
        Meta {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            engine: engine.to_string(),
            config,
            caveats: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct RealMatrixJson {
    rows: usize,
    cols: usize,
    /// Row-major entries.
    data: Vec<f64>,
}

impl RealMatrixJson {
    fn from(m: &nalgebra::DMatrix<f64>) -> Self {
        RealMatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect(),
        }
    }
}

#[derive(Serialize)]
struct ComplexMatrixJson {
    rows: usize,
    cols: usize,
    /// Row-major entries, split into real and imaginary parts.
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ComplexMatrixJson {
    fn from(m: &nalgebra::DMatrix<num_complex::Complex64>) -> Self {
        let mut re = Vec::with_capacity(m.len());
        let mut im = Vec::with_capacity(m.len());
        for r in m.row_iter() {
            for v in r.iter() {
                re.push(v.re);
                im.push(v.im);
            }
        }
        ComplexMatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            re,
            im,
        }
    }
}

fn eigendata_for(domain: &RingDomain, lambda: f64) -> CliResult<ring_scatter::EigenData> {
    let cap = (lambda + 1.0).max(domain.q_min() + 0.5);
    Ok(piecewise_ring_eigendata(domain, cap)?)
}

fn smatrix_for(
    domain: &RingDomain,
    lambda: f64,
    beta: f64,
    engine: Engine,
) -> CliResult<ScatteringMatrix> {
    match engine {
        Engine::QMatrix => {
            let e = eigendata_for(domain, lambda)?;
            let q = build_q(domain, &e, lambda)?;
            Ok(smatrix(&q, beta)?)
        }
        Engine::Direct => Ok(assemble_full_s(domain, lambda, beta)?),
    }
}

// ---------------------------------------------------------------- commands

fn cmd_eigen(args: &DomainArgs, lambda_max: f64, engine: Engine) -> CliResult<String> {
    let (domain, config) = load_domain(args)?;
    let e = piecewise_ring_eigendata(&domain, lambda_max)?;
    let n = domain.n_leads();
    let mut out = csv_header(&config, engine, &[format!("lambda_max: {lambda_max}")]);
    let cols: Vec<String> = (0..n).map(|j| format!("value_{j}")).collect();
    let _ = writeln!(out, "index,lambda,{}", cols.join(","));
    for (i, &ev) in e.eigenvalues().iter().enumerate() {
        let vals: Vec<String> = (0..n).map(|j| format!("{:.15e}", e.values()[(i, j)])).collect();
        let _ = writeln!(out, "{i},{ev:.15e},{}", vals.join(","));
    }
    Ok(out)
}

fn cmd_green(args: &DomainArgs, lambda: &str, s: f64, t: f64, engine: Engine) -> CliResult<String> {
    let (domain, config) = load_domain(args)?;
    let grid = parse_grid(lambda)?;
    let mut out = csv_header(&config, engine, &[]);
    let _ = writeln!(out, "lambda,s,t,value");
    for &lam in &grid {
        let g = green_direct(&domain, lam, s, t)?;
        let _ = writeln!(out, "{lam:.15e},{s:.15e},{t:.15e},{:.15e}", g.value);
    }
    Ok(out)
}

fn cmd_qmat(args: &DomainArgs, lambda: f64, engine: Engine) -> CliResult<String> {
    let (domain, config) = load_domain(args)?;
    let e = eigendata_for(&domain, lambda)?;
    let q = build_q(&domain, &e, lambda)?;
    #[derive(Serialize)]
    struct Out {
        meta: Meta,
        lambda: f64,
        q: RealMatrixJson,
    }
    let out = Out {
        meta: Meta::new(config, engine),
        lambda,
        q: RealMatrixJson::from(&q.entries),
    };
    Ok(serde_json::to_string_pretty(&out).expect("serializes") + "\n")
}

fn cmd_smat(args: &DomainArgs, lambda: f64, beta: f64, engine: Engine) -> CliResult<String> {
    let (domain, config) = load_domain(args)?;
    let s = smatrix_for(&domain, lambda, beta, engine)?;
    #[derive(Serialize)]
    struct Out {
        meta: Meta,
        lambda: f64,
        beta: f64,
        unitarity_defect: f64,
        s: ComplexMatrixJson,
    }
    let out = Out {
        meta: Meta::new(config, engine),
        lambda,
        beta,
        unitarity_defect: s.unitarity_defect(),
        s: ComplexMatrixJson::from(&s.matrix),
    };
    Ok(serde_json::to_string_pretty(&out).expect("serializes") + "\n")
}

fn cmd_sweep(
    args: &DomainArgs,
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
    beta: f64,
    skip_margin: f64,
    engine: Engine,
) -> CliResult<String> {
    let (domain, config) = load_domain(args)?;
    if points < 2 || lambda_max <= lambda_min {
        return Err(CliError::Usage(
            "need lambda_min < lambda_max and points >= 2".into(),
        ));
    }
    let e = piecewise_ring_eigendata(&domain, (lambda_max + 1.0).max(domain.q_min() + 0.5))?;
    let spectrum = e.eigenvalues().to_vec();
    let n = domain.n_leads();
    let mut out = csv_header(
        &config,
        engine,
        &[format!("beta: {beta}"), format!("skip_margin: {skip_margin}")],
    );
    let mut cols = vec!["index".into(), "lambda".into()];
    for s in 0..n {
        for t in 0..n {
            cols.push(format!("t_{t}{s}"));
            cols.push(format!("phase_{t}{s}"));
        }
    }
    cols.push("unitarity_defect".into());
    let _ = writeln!(out, "{}", cols.join(","));

    let rows: Vec<CliResult<Option<String>>> = (0..points)
        .into_par_iter()
        .map(|i| {
            let lam = lambda_min + (lambda_max - lambda_min) * i as f64 / (points - 1) as f64;
            if lam <= 0.0 || spectrum.iter().any(|&ev| (lam - ev).abs() < skip_margin) {
                return Ok(None);
            }
            let s = match engine {
                Engine::QMatrix => smatrix(&build_q(&domain, &e, lam)?, beta)?,
                Engine::Direct => assemble_full_s(&domain, lam, beta)?,
            };
            let mut row = format!("{i},{lam:.15e}");
            for from in 0..n {
                for to in 0..n {
                    let v = s.matrix[(to, from)];
                    let _ = write!(row, ",{:.15e},{:.15e}", v.norm_sqr(), v.arg());
                }
            }
            let _ = write!(row, ",{:.3e}", s.unitarity_defect());
            Ok(Some(row))
        })
        .collect();
    for row in rows {
        if let Some(r) = row? {
            let _ = writeln!(out, "{r}");
        }
    }
    Ok(out)
}

fn cmd_resonance(
    args: &DomainArgs,
    lambda0: f64,
    beta: Option<f64>,
    order: usize,
    engine: Engine,
) -> CliResult<String> {
    let (domain, config) = load_domain(args)?;
    // Deep truncation so the regular part converges well past the pole.
    let cap = (lambda0 + 1.0).max(domain.q_min() + 0.5).max(4.0e4);
    let e = piecewise_ring_eigendata(&domain, cap)?;
    let res = resonance_data(&domain, &e, lambda0)?;
    #[derive(Serialize)]
    struct SOut {
        beta: f64,
        resonance_limit: ComplexMatrixJson,
        asymptotic_order: usize,
        asymptotic: Option<ComplexMatrixJson>,
        asymptotic_tail_bound: Option<f64>,
    }
    #[derive(Serialize)]
    struct Out {
        meta: Meta,
        lambda0: f64,
        multiplicity: usize,
        rank: usize,
        image_norms: Vec<f64>,
        images: RealMatrixJson,
        residue: RealMatrixJson,
        projector: RealMatrixJson,
        regular_part: RealMatrixJson,
        #[serde(skip_serializing_if = "Option::is_none")]
        scattering: Option<SOut>,
    }
    let scattering = match beta {
        None => None,
        Some(b) => {
            let exact = smatrix_at_resonance(&res, b)?;
            let (asym, bound) = match smatrix_asymptotic(&res, b, order) {
                Ok(s) => (
                    Some(ComplexMatrixJson::from(&s.matrix)),
                    Some(ring_scatter::scattering::asymptotic_tail_bound(&res, b, order)),
                ),
                // Divergent expansions are reported as absent, not fatal.
                Err(ring_scatter::RingError::Divergence { .. }) => (None, None),
                Err(e) => return Err(e.into()),
            };
            Some(SOut {
                beta: b,
                resonance_limit: ComplexMatrixJson::from(&exact.matrix),
                asymptotic_order: order,
                asymptotic: asym,
                asymptotic_tail_bound: bound,
            })
        }
    };
    let out = Out {
        meta: Meta::new(config, engine),
        lambda0: res.lambda0,
        multiplicity: res.multiplicity,
        rank: res.rank,
        image_norms: res.image_norms.clone(),
        images: RealMatrixJson::from(&res.images),
        residue: RealMatrixJson::from(&res.pole_matrix),
        projector: RealMatrixJson::from(&res.projector),
        regular_part: RealMatrixJson::from(&res.regular_part),
        scattering,
    };
    Ok(serde_json::to_string_pretty(&out).expect("serializes") + "\n")
}

fn cmd_conductance(
    args: &DomainArgs,
    mu: f64,
    tau: &str,
    beta: &str,
    source: usize,
    drain: usize,
    engine: Engine,
) -> CliResult<String> {
    let (domain, config) = load_domain(args)?;
    let taus = parse_grid(tau)?;
    let betas = parse_grid(beta)?;
    let mut out = csv_header(&config, engine, &[format!("mu: {mu}")]);
    let _ = writeln!(out, "beta,tau,sigma");
    let mut jobs = Vec::new();
    for &b in &betas {
        for &t in &taus {
            jobs.push((b, t));
        }
    }
    let rows: Vec<CliResult<String>> = jobs
        .par_iter()
        .map(|&(b, t)| {
            let sigma = averaged_conductance(&domain, b, mu, t, source, drain, engine)?;
            Ok(format!("{b:.15e},{t:.15e},{sigma:.15e}"))
        })
        .collect();
    for row in rows {
        let _ = writeln!(out, "{}", row?);
    }
    Ok(out)
}

fn preset_spec(preset: Preset, beta: f64, tau: f64) -> (SwitchSpec, Vec<String>) {
    let caveats = vec![
        "ring circumference fixed at 2*pi (unit mode spacing) in the presets".into(),
        "nominal open/closed labels follow the source model; the report's \
         transmitting_state field records which state actually conducts"
            .into(),
    ];
    let spec = match preset {
        Preset::Interference => interference_switch(beta, tau),
        Preset::Barrier => barrier_switch(beta, tau),
    };
    (spec, caveats)
}

fn cmd_switch(
    preset: Option<Preset>,
    config_path: &Option<PathBuf>,
    beta: f64,
    tau: f64,
    sweep_out: &Option<PathBuf>,
    sweep_points: usize,
    engine: Engine,
) -> CliResult<String> {
    let (spec, caveats) = match (preset, config_path) {
        (Some(p), None) => preset_spec(p, beta, tau),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let cfg: SwitchConfig = toml::from_str(&text).map_err(|e| {
                CliError::Usage(format!("config error in {}: {e}", path.display()))
            })?;
            (cfg.build()?, Vec::new())
        }
        _ => {
            return Err(CliError::Usage(
                "switch needs exactly one of --preset or --config".into(),
            ))
        }
    };
    let report = switch_report(&spec, engine)?;

    if let Some(path) = sweep_out {
        let text = switch_sweep_csv(&spec, sweep_points, engine, &caveats)?;
        std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }

    #[derive(Serialize)]
    struct Out {
        meta: Meta,
        config: SwitchConfig,
        report: ring_scatter::ConductanceReport,
    }
    let mut meta = Meta::new(DomainConfig::from_domain(&spec.open_domain), engine);
    meta.caveats = caveats;
    let out = Out {
        meta,
        config: SwitchConfig::from_spec(&spec),
        report,
    };
    Ok(serde_json::to_string_pretty(&out).expect("serializes") + "\n")
}

fn switch_sweep_csv(
    spec: &SwitchSpec,
    points: usize,
    engine: Engine,
    caveats: &[String],
) -> CliResult<String> {
    if points < 2 {
        return Err(CliError::Usage("need sweep_points >= 2".into()));
    }
    let lo = (spec.mu - 60.0 * spec.tau.max(1e-3)).max(1e-6);
    let hi = spec.mu + 60.0 * spec.tau.max(1e-3);
    let config = DomainConfig::from_domain(&spec.open_domain);
    let mut extra: Vec<String> = caveats.to_vec();
    extra.push(format!("beta: {}", spec.beta));
    extra.push(format!("tau: {}", spec.tau));
    let mut out = csv_header(&config, engine, &extra);
    let _ = writeln!(out, "lambda,t_open,t_closed");
    let rows: Vec<CliResult<String>> = (0..points)
        .into_par_iter()
        .map(|i| {
            let lam = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let t_open =
                averaged_conductance(&spec.open_domain, spec.beta, lam, 0.0, spec.source, spec.drain, engine)?;
            let t_closed =
                averaged_conductance(&spec.closed_domain, spec.beta, lam, 0.0, spec.source, spec.drain, engine)?;
            Ok(format!("{lam:.15e},{t_open:.15e},{t_closed:.15e}"))
        })
        .collect();
    for row in rows {
        let _ = writeln!(out, "{}", row?);
    }
    Ok(out)
}
