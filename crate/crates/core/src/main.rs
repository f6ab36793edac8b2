use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pais_uhlenbeck::classical::{integrate_eom, shortest_period, JetState};
use pais_uhlenbeck::fock::jordan_analysis_all;
use pais_uhlenbeck::fock::jordan::MAX_SHELL;
use pais_uhlenbeck::params::{
    classify_regime, frequencies, frequencies_first_order, params_from_epsilon, OscillatorParams, Regime,
};
use pais_uhlenbeck::spectra::{energy_degenerate, energy_indefinite, energy_positive, limit_schedule_between, DegenerateLabel, QuantumNumbers};
use pais_uhlenbeck::table::{Cell, ScanTable};
use pais_uhlenbeck::verify::{run_suite, VerifyConfig, SUITE_COUNT};
use pais_uhlenbeck::wavefn::{limit_scan, prefactor_slope, scan_table, ScanGrid};
use pais_uhlenbeck::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "pu", version, about = "Pais-Uhlenbeck oscillator: spectra, limits and operator structure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct Physical {
    /// Mass.
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Base frequency.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Planck constant.
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Shorthand for --format json.
    #[arg(long)]
    json: bool,
    /// Recorded in the output header.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

impl Output {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regime and frequencies over a lambda grid (Eq. 3); an --epsilon sweep adds the first-order error of Eq. (25).
    Regime {
        #[command(flatten)]
        phys: Physical,
        /// Comma-separated lambda values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "epsilon")]
        lambda: Option<Vec<f64>>,
        /// Comma-separated epsilon values, lambda = (1 - eps^2)/(4 omega^2).
        #[arg(long, value_delimiter = ',')]
        epsilon: Option<Vec<f64>>,
        #[command(flatten)]
        out: Output,
    },
    /// Energy levels: Eq. (9) and Eq. (19) on an (n1, n2) grid, or Eqs. (23), (26) on an (n, k) grid at equal frequencies.
    Spectrum {
        #[command(flatten)]
        phys: Physical,
        #[arg(long, allow_hyphen_values = true, required_unless_present = "epsilon")]
        lambda: Option<f64>,
        #[arg(long, conflicts_with = "lambda")]
        epsilon: Option<f64>,
        /// Labels 0 <= n1, n2 < LEVELS; at equal frequencies |n| < LEVELS.
        #[arg(long, default_value_t = 6)]
        levels: u64,
        /// Comma-separated k values for the equal-frequency grid.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        k: Vec<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Equal-frequency limit of the momentum eigenfunctions along the schedule of Eq. (28), against Eq. (37) through Eq. (36).
    LimitScan {
        #[command(flatten)]
        phys: Physical,
        /// n = n2 - n1, held fixed.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
        /// Radial momentum label, eps (n1 + n2) = m omega hbar k^2 / sqrt(2).
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        /// First value of n1 + n2.
        #[arg(long, default_value_t = 20.0)]
        total_start: f64,
        /// Last value of n1 + n2.
        #[arg(long, default_value_t = 2000.0)]
        total_end: f64,
        #[arg(long, default_value_t = 10.0)]
        pmax: f64,
        #[arg(long, default_value_t = 401)]
        grid_points: usize,
        #[arg(long, default_value_t = 8)]
        theta_samples: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Exact Jordan structure, chain eigenvectors and zero norms of the degenerate Hamiltonian, Eqs. (45)-(51). Always JSON unless --format csv.
    Jordan {
        /// Largest shell occupation, at most 64.
        #[arg(long, default_value_t = 20)]
        max_n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Runs the invariant suites; exit 0 iff all pass. Suites: 1 Eq. 3; 2 Eqs. 5, 7, 8, 20, 21, 29; 3 Eq. 2; 4 Eqs. 9, 18, 19; 5 Eqs. 10, 22, 23; 6 Eqs. 33-36; 7 Eqs. 28, 36, 37; 8 Eq. 37; 9 Eq. 38; 10 Eqs. 39-44; 11 Eqs. 45-51.
    VerifyAll {
        #[command(flatten)]
        phys: Physical,
        /// lambda for the distinct-frequency suites.
        #[arg(long, conflicts_with = "epsilon")]
        lambda: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Free scale of the degenerate algebra, Eq. (39).
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Fock cutoff for the spectrum suite.
        #[arg(long, default_value_t = 20)]
        nmax: u64,
        /// Largest shell for the Jordan suite.
        #[arg(long, default_value_t = 64)]
        max_n: u64,
        /// Multiplies every numeric tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Comma-separated suite ids; all when absent.
        #[arg(long, value_delimiter = ',')]
        suite: Option<Vec<u32>>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// RK4 integration of the fourth-order equation of motion, Eq. (2), with the energy of Eq. (5). CSV only.
    Trajectory {
        #[command(flatten)]
        phys: Physical,
        #[arg(long, allow_hyphen_values = true, required_unless_present = "epsilon")]
        lambda: Option<f64>,
        #[arg(long, conflicts_with = "lambda")]
        epsilon: Option<f64>,
        /// Initial jet q, q', q'', q'''.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0,0,0")]
        jet: Vec<f64>,
        /// Length in shortest periods.
        #[arg(long, default_value_t = 10.0)]
        periods: f64,
        /// Steps per shortest period.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Outcome {
    Ok,
    VerificationFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(table: &ScanTable, out: &Output) -> Result<()> {
    let mut w = sink(&out.out)?;
    match out.format() {
        Format::Csv => table.write_csv(&mut w)?,
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&table.to_json()).expect("table serializes"))?,
    }
    Ok(())
}

fn echo_physical(t: &mut ScanTable, command: &str, phys: &Physical, seed: u64) {
    t.echo("command", command).echo("m", phys.m).echo("omega", phys.omega).echo("hbar", phys.hbar).echo("seed", seed);
}

fn resolve(phys: &Physical, lambda: Option<f64>, epsilon: Option<f64>) -> Result<OscillatorParams> {
    match (lambda, epsilon) {
        (Some(l), None) => OscillatorParams::new(phys.m, phys.omega, l, phys.hbar),
        (None, Some(e)) => params_from_epsilon(phys.m, phys.omega, phys.hbar, e),
        _ => Err(Error::InvalidParameter("give exactly one of --lambda and --epsilon".into())),
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Regime { phys, lambda, epsilon, out } => cmd_regime(&phys, lambda, epsilon, &out),
        Command::Spectrum { phys, lambda, epsilon, levels, k, out } => {
            cmd_spectrum(&phys, resolve(&phys, lambda, epsilon)?, lambda, epsilon, levels, &k, &out)
        }
        Command::LimitScan { phys, n, k, steps, total_start, total_end, pmax, grid_points, theta_samples, out } => {
            let grid = ScanGrid { p_max: pmax, points: grid_points, theta_samples };
            cmd_limit_scan(&phys, n, k, steps, (total_start, total_end), grid, &out)
        }
        Command::Jordan { max_n, out, format, seed } => cmd_jordan(max_n, &out, format, seed),
        Command::VerifyAll { phys, lambda, epsilon, mu, nmax, max_n, tolerance_scale, suite, seed, json, out } => {
            let lambda_omega2 = match (lambda, epsilon) {
                (Some(l), None) => l * phys.omega * phys.omega,
                (None, Some(e)) => params_from_epsilon(phys.m, phys.omega, phys.hbar, e)?.lambda * phys.omega * phys.omega,
                _ => VerifyConfig::default().lambda_omega2,
            };
            if max_n > MAX_SHELL {
                return Err(Error::OutOfRange { what: "max-n", value: max_n as f64, max: MAX_SHELL as f64 });
            }
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
            }
            let cfg = VerifyConfig {
                m: phys.m,
                omega: phys.omega,
                hbar: phys.hbar,
                lambda_omega2,
                mu,
                nmax,
                max_n,
                seed,
                tolerance_scale,
                ..Default::default()
            };
            cmd_verify_all(&cfg, suite, json, &out)
        }
        Command::Trajectory { phys, lambda, epsilon, jet, periods, steps, out } => {
            if jet.len() != 4 {
                return Err(Error::InvalidParameter(format!("--jet needs 4 values, got {}", jet.len())));
            }
            let params = resolve(&phys, lambda, epsilon)?;
            let period = shortest_period(&params)?;
            let jet0 = JetState::new(jet[0], jet[1], jet[2], jet[3]);
            let traj = integrate_eom(&jet0, &params, periods * period, period / steps.max(1) as f64)?;
            let mut w = sink(&out)?;
            writeln!(w, "# command=trajectory")?;
            writeln!(w, "# m={}\n# omega={}\n# lambda={}\n# hbar={}", params.m, params.omega, params.lambda, params.hbar)?;
            writeln!(w, "# jet={},{},{},{}\n# periods={periods}\n# steps={steps}", jet[0], jet[1], jet[2], jet[3])?;
            traj.write_csv(&mut w)?;
            Ok(Outcome::Ok)
        }
    }
}

fn cmd_regime(phys: &Physical, lambda: Option<Vec<f64>>, epsilon: Option<Vec<f64>>, out: &Output) -> Result<Outcome> {
    let sweep = epsilon.is_some();
    let mut cols = vec!["lambda", "regime", "omega1_re", "omega1_im", "omega2_re", "omega2_im"];
    if sweep {
        cols.splice(0..0, ["epsilon"]);
        cols.extend(["omega1_first_order_err", "omega2_first_order_err"]);
    }
    let mut t = ScanTable::new(&cols);
    echo_physical(&mut t, "regime", phys, out.seed);
    let empty = || Cell::from("");
    let points: Vec<(Option<f64>, f64)> = match (lambda, epsilon) {
        (_, Some(es)) => es.into_iter().map(|e| (Some(e), (1.0 - e * e) / (4.0 * phys.omega * phys.omega))).collect(),
        (Some(ls), None) => ls.into_iter().map(|l| (None, l)).collect(),
        (None, None) => [-1.0, 0.15, 0.25, 1.0].into_iter().map(|l| (None, l / (phys.omega * phys.omega))).collect(),
    };
    for (eps, l) in points {
        let mut row: Vec<Cell> = Vec::new();
        if let Some(e) = eps {
            row.push(e.into());
        }
        row.push(l.into());
        let p = OscillatorParams::new(phys.m, phys.omega, l, phys.hbar);
        match p.and_then(|p| Ok((classify_regime(&p)?, frequencies(&p)?))) {
            Ok((regime, f)) => {
                row.extend([regime.as_str().into(), f.omega1.re.into(), f.omega1.im.into(), f.omega2.re.into(), f.omega2.im.into()]);
                if let Some(e) = eps {
                    let (a, b) = frequencies_first_order(phys.omega, e);
                    if regime == Regime::RealDistinct || regime == Regime::Degenerate {
                        row.extend([(f.omega1.re - a).abs().into(), (f.omega2.re - b).abs().into()]);
                    } else {
                        row.extend([empty(), empty()]);
                    }
                }
            }
            Err(e) => {
                row.push(format!("error: {e}").into());
                row.extend(std::iter::repeat_with(empty).take(cols.len() - row.len()));
            }
        }
        t.push(row);
    }
    emit(&t, out)?;
    Ok(Outcome::Ok)
}

fn cmd_spectrum(
    phys: &Physical,
    params: OscillatorParams,
    lambda: Option<f64>,
    epsilon: Option<f64>,
    levels: u64,
    ks: &[f64],
    out: &Output,
) -> Result<Outcome> {
    let regime = classify_regime(&params)?;
    let mut t = if regime == Regime::Degenerate {
        ScanTable::new(&["n", "k", "E"])
    } else {
        ScanTable::new(&["n1", "n2", "E_indefinite", "E_positive"])
    };
    echo_physical(&mut t, "spectrum", phys, out.seed);
    if let Some(l) = lambda {
        t.echo("lambda", l);
    }
    if let Some(e) = epsilon {
        t.echo("epsilon", e);
    }
    t.echo("regime", regime).echo("levels", levels);
    if regime == Regime::Degenerate {
        let top = levels as i64;
        for n in (1 - top)..top {
            for &k in ks {
                let e = energy_degenerate(DegenerateLabel::new(n, k)?, &params)?;
                t.push(vec![n.into(), k.into(), e.into()]);
            }
        }
    } else {
        params.require_real_distinct()?;
        for n1 in 0..levels {
            for n2 in 0..levels {
                let qn = QuantumNumbers::new(n1, n2);
                t.push(vec![n1.into(), n2.into(), energy_indefinite(qn, &params)?.into(), energy_positive(qn, &params)?.into()]);
            }
        }
    }
    emit(&t, out)?;
    Ok(Outcome::Ok)
}

fn cmd_limit_scan(phys: &Physical, n: i64, k: f64, steps: usize, totals: (f64, f64), grid: ScanGrid, out: &Output) -> Result<Outcome> {
    let params = OscillatorParams::degenerate(phys.m, phys.omega, phys.hbar)?;
    let sched = limit_schedule_between(n, k, &params, steps, totals.0, totals.1)?;
    let rows = limit_scan(&sched, &grid, &params)?;
    let mut t = scan_table(&rows);
    let mut head = ScanTable::new(&[]);
    echo_physical(&mut head, "limit-scan", phys, out.seed);
    head.echo("n", n)
        .echo("k", k)
        .echo("steps", steps)
        .echo("total_start", totals.0)
        .echo("total_end", totals.1)
        .echo("pmax", grid.p_max)
        .echo("grid_points", grid.points)
        .echo("theta_samples", grid.theta_samples);
    if rows.len() > 1 {
        head.echo("fitted_sqrt_eps_slope", prefactor_slope(&rows));
    }
    t.config = head.config;
    emit(&t, out)?;
    Ok(Outcome::Ok)
}

fn cmd_jordan(max_n: u64, out: &Option<PathBuf>, format: Format, seed: u64) -> Result<Outcome> {
    if max_n > MAX_SHELL {
        return Err(Error::OutOfRange { what: "max-n", value: max_n as f64, max: MAX_SHELL as f64 });
    }
    let reports = jordan_analysis_all(max_n)?;
    let mut w = sink(out)?;
    match format {
        Format::Json => {
            let doc = json!({
                "config": { "command": "jordan", "max_n": max_n.to_string(), "seed": seed.to_string() },
                "reports": reports,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc).expect("report serializes"))?;
        }
        Format::Csv => {
            let mut t = ScanTable::new(&["n", "dimension", "rank_sequence", "nilpotency_index", "is_single_block", "matches_chain", "zero_norm", "normality_defect"]);
            t.echo("command", "jordan").echo("max_n", max_n).echo("seed", seed);
            for r in &reports {
                let ranks: Vec<String> = r.rank_sequence.iter().map(|x| x.to_string()).collect();
                t.push(vec![
                    r.n.into(),
                    (r.dimension as u64).into(),
                    ranks.join(" ").into(),
                    r.nilpotency_index.map_or(Cell::from(""), |i| (i as u64).into()),
                    r.is_single_block.to_string().into(),
                    r.matches_chain.to_string().into(),
                    r.zero_norm.to_string().into(),
                    r.normality_defect.to_string().into(),
                ]);
            }
            t.write_csv(&mut w)?;
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_verify_all(cfg: &VerifyConfig, suites: Option<Vec<u32>>, json_out: bool, out: &Option<PathBuf>) -> Result<Outcome> {
    let ids = suites.unwrap_or_else(|| (1..=SUITE_COUNT).collect());
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > SUITE_COUNT) {
        return Err(Error::InvalidParameter(format!("no suite {bad}; ids run 1..={SUITE_COUNT}")));
    }
    let mut w = sink(out)?;
    let mut results = Vec::new();
    for id in ids {
        let r = run_suite(id, cfg);
        if !json_out {
            let status = if r.passed() { "PASS" } else { "FAIL" };
            writeln!(w, "{status} suite {:>2} {} (Eq. {}) [{:.2}s]", r.id, r.name, r.equations, r.elapsed.as_secs_f64())?;
            for c in &r.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                match c.target {
                    Some(t) => writeln!(w, "    {mark} {} : value={:.4} target={t} +/- {:.3e}", c.name, c.value, c.tolerance)?,
                    None => writeln!(w, "    {mark} {} : value={:.3e} tol={:.3e}", c.name, c.value, c.tolerance)?,
                }
            }
            if let Some(e) = &r.error {
                writeln!(w, "    FAIL error: {e}")?;
            }
            w.flush()?;
        }
        results.push(r);
    }
    let all = results.iter().all(|r| r.passed());
    if json_out {
        let doc = json!({ "config": cfg, "passed": all, "suites": results });
        writeln!(w, "{}", serde_json::to_string_pretty(&doc).expect("results serialize"))?;
    } else {
        let failed: Vec<String> = results.iter().filter(|r| !r.passed()).map(|r| r.id.to_string()).collect();
        if failed.is_empty() {
            writeln!(w, "all {} suites passed", results.len())?;
        } else {
            writeln!(w, "failed suites: {}", failed.join(", "))?;
        }
    }
    Ok(if all { Outcome::Ok } else { Outcome::VerificationFailed })
}
