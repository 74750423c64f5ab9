use clap::{Parser, ValueEnum};
use fhtoeplitz::asymptotics::{predicted_cumulants, Statistic, prop44_constants, thm11_constants, thm17_constants, thm41_constants};
use fhtoeplitz::io::{fmt_f64, parse_grid, svg_loglog, SpecFile};
use fhtoeplitz::stats::{
    determinant_study, empirical_statistics, exact_cumulants, exact_log_mgf, mcmc_sample, moment_study, ConvergenceStudy, MgfQuery,
    StencilConfig, Target,
};
use fhtoeplitz::toeplitz::{logdet, Method};
use fhtoeplitz::trig::equilibrium_density;
use fhtoeplitz::verify::{run_suite, Suite};
use fhtoeplitz::{Complex64, Error};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Eqm,
    Asymp,
    Logdet,
    Convergence,
    Mgf,
    Cumulants,
    Sample,
    Verify,
}

/// Toeplitz determinants with Fisher–Hartwig singularities: exact values,
/// asymptotics and point-process statistics.
#[derive(Parser, Debug)]
#[command(name = "fhtoep", version)]
struct Cli {
    command: Command,
    /// suite for `verify` (identities, rh, special, quadrature); all when omitted
    suite: Option<String>,
    /// TOML symbol spec (see specs/)
    #[arg(long)]
    spec: Option<PathBuf>,
    /// matrix size, overriding the spec file
    #[arg(long)]
    n: Option<usize>,
    /// a:b:step, a:b:*factor, or a comma list
    #[arg(long)]
    n_grid: Option<String>,
    /// thm11, thm41 or thm17
    #[arg(long)]
    target: Option<String>,
    /// sampler seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// write CSV (and SVG, samples) here instead of printing CSV to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// also write a log-log plot of the convergence table
    #[arg(long)]
    svg: bool,
    /// overrides verification tolerances
    #[arg(long)]
    tol: Option<f64>,
}

enum Failure {
    Lib(Error),
    Verification(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

fn io_error(e: impl std::fmt::Display) -> Failure {
    Failure::Lib(Error::numerical(format!("output failed: {e}")))
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<Vec<u8>, Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(io_error)?;
        for r in &self.rows {
            w.write_record(r).map_err(io_error)?;
        }
        w.into_inner().map_err(io_error)
    }
}

struct Ctx {
    cli: Cli,
}

impl Ctx {
    fn spec(&self) -> Result<SpecFile, Failure> {
        let path = self.cli.spec.as_ref().ok_or_else(|| Error::parse("this command needs --spec PATH"))?;
        Ok(SpecFile::load(path)?)
    }

    fn n(&self, spec: &SpecFile) -> Result<usize, Failure> {
        let n = self.cli.n.or(spec.n).ok_or_else(|| Error::parse("no n given (--n or `n` in the spec)"))?;
        if n == 0 {
            return Err(Error::domain("n must be positive").into());
        }
        Ok(n)
    }

    fn grid(&self, spec: &SpecFile) -> Result<Vec<usize>, Failure> {
        match (&self.cli.n_grid, &spec.n_grid) {
            (Some(g), _) => Ok(parse_grid(g)?),
            (None, Some(g)) => Ok(parse_grid(&g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))?),
            (None, None) => Err(Error::parse("no n-grid given (--n-grid or `n_grid` in the spec)").into()),
        }
    }

    /// CSV to <out>/<name>.csv, or to stdout without --out.
    fn emit(&self, name: &str, table: &Table) -> Outcome {
        let bytes = table.to_csv()?;
        match &self.cli.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(io_error)?;
                let path = dir.join(format!("{name}.csv"));
                std::fs::write(&path, bytes).map_err(io_error)?;
                eprintln!("wrote {}", path.display());
            }
            None => {
                use std::io::Write;
                std::io::stdout().write_all(&bytes).map_err(io_error)?;
            }
        }
        Ok(())
    }

    fn out_path(&self, file: &str) -> Result<Option<PathBuf>, Failure> {
        match &self.cli.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(io_error)?;
                Ok(Some(dir.join(file)))
            }
            None => Ok(None),
        }
    }
}

fn cx(row: &mut Vec<String>, z: Complex64) {
    row.push(fmt_f64(z.re));
    row.push(fmt_f64(z.im));
}

fn cmd_eqm(ctx: &Ctx) -> Outcome {
    let spec = ctx.spec()?;
    let eq = equilibrium_density(&spec.v);
    if eq.regular {
        eprintln!("regular, min={} at theta={}", fmt_f64(eq.min_value), fmt_f64(eq.argmin));
    } else {
        eprintln!("NOT one-cut regular: min={} at theta={}", fmt_f64(eq.min_value), fmt_f64(eq.argmin));
    }
    let mut t = Table::new(&["k", "psi_re", "psi_im"]);
    for (k, c) in eq.psi.terms() {
        let mut row = vec![k.to_string()];
        cx(&mut row, c);
        t.push(row);
    }
    ctx.emit("eqm", &t)
}

fn cmd_asymp(ctx: &Ctx) -> Outcome {
    let file = ctx.spec()?;
    let spec = file.symbol(ctx.cli.n.or(file.n).unwrap_or(1))?;
    let full = thm11_constants(&spec)?;
    let free = thm41_constants(&spec.w, &spec.singularities)?;
    let pot = prop44_constants(&spec)?;
    let (d, p) = (&free.constants, &pot.constants);
    let sum = [p[0], d[0] + p[1], d[1], d[2] + p[2]];
    let residual = full.constants.iter().zip(sum).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let mut t = Table::new(&["name", "re", "im"]);
    let named = ["C1", "C2", "C3", "C4"].iter().zip(&full.constants);
    let named = named.chain(["D2", "D3", "D4"].iter().zip(d)).chain(["c1", "c2", "c3"].iter().zip(p));
    for (name, c) in named {
        let mut row = vec![name.to_string()];
        cx(&mut row, *c);
        t.push(row);
    }
    t.push(vec!["error_exponent".into(), fmt_f64(full.error_exponent), fmt_f64(0.0)]);
    t.push(vec!["decomposition_residual".into(), fmt_f64(residual), fmt_f64(0.0)]);
    ctx.emit("asymp", &t)
}

fn cmd_logdet(ctx: &Ctx) -> Outcome {
    let file = ctx.spec()?;
    let n = ctx.n(&file)?;
    let ld = logdet(&file.symbol(n)?, Method::Auto)?;
    let mut t = Table::new(&["n", "log_modulus", "phase", "scale_correction", "logdet_re", "logdet_im"]);
    let mut row = vec![n.to_string(), fmt_f64(ld.log_modulus), fmt_f64(ld.phase), fmt_f64(ld.scale_correction)];
    cx(&mut row, ld.value());
    t.push(row);
    ctx.emit("logdet", &t)
}

fn moment_query(file: &SpecFile, n: usize) -> Result<MgfQuery, Failure> {
    let mut q = file.moment.clone().ok_or_else(|| Error::parse("spec has no [moment] table"))?;
    q.n = n;
    Ok(q)
}

fn cmd_convergence(ctx: &Ctx) -> Outcome {
    let file = ctx.spec()?;
    let grid = ctx.grid(&file)?;
    let target: Target = ctx.cli.target.as_deref().unwrap_or("thm11").parse()?;
    let study: ConvergenceStudy = match target {
        Target::Thm17 => moment_study(&moment_query(&file, grid[0])?, &grid)?,
        _ => determinant_study(&file.symbol(grid[0])?, &grid, target)?,
    };
    let mut t = Table::new(&["n", "exact_re", "exact_im", "predicted_re", "predicted_im", "abs_diff"]);
    for r in &study.rows {
        let mut row = vec![r.n.to_string()];
        cx(&mut row, r.exact);
        cx(&mut row, r.predicted);
        row.push(fmt_f64(r.abs_diff));
        t.push(row);
        if r.excluded {
            eprintln!("n={}: |diff| below the numerical floor, excluded from the fit", r.n);
        }
    }
    if study.any_unwrapped() {
        eprintln!("note: exact phases were shifted by multiples of 2pi to meet the prediction");
    }
    match study.slope {
        Some(s) => eprintln!("slope={} expected={}", fmt_f64(s), fmt_f64(study.expansion.error_exponent)),
        None => eprintln!("slope=undefined (fewer than two usable rows)"),
    }
    ctx.emit("convergence", &t)?;
    if ctx.cli.svg {
        let pts: Vec<(f64, f64)> = study.rows.iter().map(|r| (r.n as f64, r.abs_diff)).collect();
        let svg = svg_loglog(&format!("convergence ({})", ctx.cli.target.as_deref().unwrap_or("thm11")), "n", "|exact - predicted|", &pts);
        let path = ctx.out_path("convergence.svg")?.unwrap_or_else(|| PathBuf::from("convergence.svg"));
        std::fs::write(&path, svg).map_err(io_error)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_mgf(ctx: &Ctx) -> Outcome {
    let file = ctx.spec()?;
    let n = ctx.n(&file)?;
    let q = moment_query(&file, n)?;
    let exact = exact_log_mgf(&q)?;
    let m = thm17_constants(&q.v, &q.w, &q.alphas, &q.us, &q.thetas)?;
    let predicted = m.expansion.predict(n as f64);
    let mut t = Table::new(&["n", "log_mgf_re", "log_mgf_im", "predicted_re", "predicted_im", "mgf_re", "mgf_im"]);
    let mut row = vec![n.to_string()];
    cx(&mut row, exact);
    cx(&mut row, predicted);
    cx(&mut row, exact.exp());
    t.push(row);
    ctx.emit("mgf", &t)
}

fn cmd_cumulants(ctx: &Ctx) -> Outcome {
    let file = ctx.spec()?;
    let n = ctx.n(&file)?;
    let (stat, order) = file.statistic.clone().ok_or_else(|| Error::parse("spec has no [statistic] table"))?;
    let exact = exact_cumulants(&file.v, &stat, n, order, &StencilConfig::default())?;
    let predicted = predicted_cumulants(&file.v, &stat, n, order)?;
    let mut t = Table::new(&["order", "exact", "predicted", "abs_diff", "stderr_if_sampled"]);
    for (j, (e, p)) in exact.iter().zip(&predicted).enumerate() {
        t.push(vec![(j + 1).to_string(), fmt_f64(*e), fmt_f64(*p), fmt_f64((e - p).abs()), String::new()]);
    }
    ctx.emit("cumulants", &t)
}

fn cmd_sample(ctx: &Ctx) -> Outcome {
    let file = ctx.spec()?;
    let n = ctx.n(&file)?;
    let cfg = file.sample.clone().ok_or_else(|| Error::parse("spec has no [sample] table"))?;
    if !file.w.is_zero() || !file.singularities.is_empty() {
        eprintln!("note: the sampler uses V only; W and singularities are ignored");
    }
    let batch = mcmc_sample(&file.v, n, cfg.chains, cfg.steps, ctx.cli.seed)?;
    if let Some(path) = ctx.out_path("samples.bin")? {
        batch.write_to(&path)?;
        eprintln!("wrote {}", path.display());
    }
    let eq = equilibrium_density(&file.v);
    let r = empirical_statistics(&batch, &eq, cfg.theta)?;
    let exact = exact_cumulants(&file.v, &Statistic::Counting(cfg.theta), n, 2, &StencilConfig::default())?;
    let mut t = Table::new(&["quantity", "value", "stderr", "exact"]);
    let mut put = |name: String, v: f64, se: f64, ex: Option<f64>| {
        t.push(vec![name, fmt_f64(v), fmt_f64(se), ex.map(fmt_f64).unwrap_or_default()]);
    };
    put("acceptance_rate".into(), batch.acceptance_rate.unwrap_or(f64::NAN), f64::NAN, None);
    put("count_mean".into(), r.count_mean.value, r.count_mean.stderr, Some(exact[0]));
    put("count_variance".into(), r.count_variance.value, r.count_variance.stderr, Some(exact[1]));
    put("sup_deviation_mean".into(), r.sup_deviation.value, r.sup_deviation.stderr, None);
    for row in &r.rigidity {
        put(format!("rigidity_counting_eps{}", row.epsilon), row.counting.value, row.counting.stderr, None);
        put(format!("rigidity_ordered_eps{}", row.epsilon), row.ordered.value, row.ordered.stderr, None);
        put(format!("cdf_deviation_event_eps{}", row.epsilon), row.cdf_deviation.value, row.cdf_deviation.stderr, None);
    }
    put("max_cdf_deviation".into(), r.max_cdf_deviation, f64::NAN, None);
    put(format!("ordered_k{}_mean", r.ordered.k_theta), r.ordered.mean, f64::NAN, Some(0.0));
    put(format!("ordered_k{}_variance", r.ordered.k_theta), r.ordered.variance, f64::NAN, Some(1.0));
    put(format!("ordered_k{}_kurtosis", r.ordered.k_theta), r.ordered.kurtosis, f64::NAN, Some(3.0));
    ctx.emit("sample", &t)
}

fn cmd_verify(ctx: &Ctx) -> Outcome {
    if let Some(t) = ctx.cli.tol {
        if !(t > 0.0) {
            return Err(Error::domain("--tol must be positive").into());
        }
    }
    let suites: Vec<Suite> = match &ctx.cli.suite {
        Some(s) => vec![s.parse()?],
        None => Suite::ALL.to_vec(),
    };
    let mut failed = 0;
    let mut t = Table::new(&["suite", "check", "residual", "tol", "passed"]);
    for s in suites {
        for c in run_suite(s, ctx.cli.tol)? {
            eprintln!("{} [{}] {} (residual {:.3e}, tol {:.0e})", if c.passed() { "PASS" } else { "FAIL" }, s.name(), c.name, c.residual, c.tol);
            failed += usize::from(!c.passed());
            t.push(vec![s.name().into(), c.name.clone(), fmt_f64(c.residual), fmt_f64(c.tol), c.passed().to_string()]);
        }
    }
    ctx.emit("verify", &t)?;
    if failed > 0 {
        return Err(Failure::Verification(failed));
    }
    Ok(())
}

fn run(ctx: &Ctx) -> Outcome {
    if ctx.cli.command != Command::Verify && ctx.cli.suite.is_some() {
        return Err(Error::parse("unexpected positional argument").into());
    }
    match ctx.cli.command {
        Command::Eqm => cmd_eqm(ctx),
        Command::Asymp => cmd_asymp(ctx),
        Command::Logdet => cmd_logdet(ctx),
        Command::Convergence => cmd_convergence(ctx),
        Command::Mgf => cmd_mgf(ctx),
        Command::Cumulants => cmd_cumulants(ctx),
        Command::Sample => cmd_sample(ctx),
        Command::Verify => cmd_verify(ctx),
    }
}

fn main() -> ExitCode {
    let ctx = Ctx { cli: Cli::parse() };
    match run(&ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Parse(_) => 2,
                Error::Domain(_) => 3,
                Error::Numerical(_) => 4,
            })
        }
        Err(Failure::Verification(k)) => {
            eprintln!("{k} verification check(s) failed");
            ExitCode::from(5)
        }
    }
}
