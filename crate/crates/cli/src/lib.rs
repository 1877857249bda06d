//! Command implementations for the `memfhn` binary.
//!
//! Every command returns a process exit code: 0 on success, 1 when a check
//! or a run fails, 2 for usage and configuration errors. Reports go to stdout,
//! diagnostics to stderr.

use std::fs;
use std::path::{Path, PathBuf};

use memfhn::io::{
    parse_config, read_metrics_csv, write_metrics_csv, write_plot_svg, write_snapshot, ConfigDocument, PlotOptions,
};
use memfhn::metrics::{column_names, MetricsRecord};
use memfhn::{
    absorbing_check, asynchronous_degree_estimate, fit_decay_rate, integrate, sync_envelope_check, threshold_report,
    Component, DecayTarget, Error, RunObserver, Series, State, ThresholdReport, Verdict,
};

pub mod args;

pub use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Configuration with the reference parameter set (`k = 0.25`), used for the constants.
pub const BUNDLED_CONSTANTS_CONFIG: &str = include_str!("../../../configs/paper.json");
/// Configuration used to reproduce the point-sample tables (`k = 5`).
pub const BUNDLED_TABLE_CONFIG: &str = include_str!("../../../configs/paper_tables.json");

/// Grid point of the point-sample tables, 0-based `(i, j)`.
pub const PROBE: (usize, usize) = (10, 10);

/// Reference values of the constants with the absolute tolerance each is
/// checked to. The tolerances follow the printed precision.
pub const REFERENCE_CONSTANTS: [(&str, f64, f64); 7] = [
    ("C1", 437.5, 0.0),
    ("C2", 876.4, 0.01),
    ("mu", 0.175, 0.0),
    ("K", 41_345_645.6, 1.0),
    ("1+Q", 1_220_899.6, 1.0),
    ("Gamma", 0.45, 0.01),
    ("alpha", 0.35, 0.0),
];

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Constants(a) => cmd_constants(&a.config, a.out.as_deref()),
        Command::Simulate(a) => cmd_simulate(&a.config, a.out, a.seed, a.tail_fraction),
        Command::Verify => cmd_verify(),
        Command::ReproducePaper(a) => cmd_reproduce_paper(a.config.as_deref(), &a.out, a.seed, a.tail_fraction),
        Command::Plot(a) => cmd_plot(&a.csv, &a.columns, a.log_y, a.out.as_deref()),
    }
}

fn load_config(path: &Path) -> Result<ConfigDocument, i32> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_USAGE
    })?;
    parse_text(&text, &path.display().to_string())
}

fn parse_text(text: &str, origin: &str) -> Result<ConfigDocument, i32> {
    parse_config(text).map_err(|errs| {
        eprintln!("error: invalid configuration {origin}:");
        for e in &errs.0 {
            eprintln!("  {e}");
        }
        EXIT_USAGE
    })
}

fn apply_overrides(doc: &mut ConfigDocument, seed: Option<u64>, tail_fraction: Option<f64>) -> Result<(), i32> {
    if let Some(s) = seed {
        doc.run.seed = s;
    }
    if let Some(f) = tail_fraction {
        if !(f > 0.0 && f <= 1.0) {
            eprintln!("error: --tail-fraction must lie in (0, 1], got {f}");
            return Err(EXIT_USAGE);
        }
        doc.tail_fraction = f;
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), i32> {
    fs::create_dir_all(dir).map_err(|e| {
        eprintln!("error: cannot create {}: {e}", dir.display());
        EXIT_CHECK_FAILED
    })
}

fn io_fail(what: &Path, e: Error) -> i32 {
    eprintln!("error: writing {}: {e}", what.display());
    EXIT_CHECK_FAILED
}

fn report_for(doc: &ConfigDocument) -> Result<ThresholdReport<f64>, i32> {
    threshold_report(&doc.run.params, &doc.run.bounds, doc.c_star, &doc.conventions).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_USAGE
    })
}

fn constants_csv(r: &ThresholdReport<f64>) -> String {
    let c = &r.constants;
    let rows = [
        ("C1", c.c1),
        ("C2", c.c2),
        ("mu", c.mu),
        ("K", c.k),
        ("1+Q", c.one_plus_q()),
        ("C_star", c.c_star),
        ("Gamma", c.gamma),
        ("P", r.coupling),
        ("alpha", c.alpha),
    ];
    let mut s = String::from("name,value\n");
    for (n, v) in rows {
        s.push_str(&format!("{n},{v:.16e}\n"));
    }
    s
}

pub fn cmd_constants(config: &Path, out: Option<&Path>) -> i32 {
    let doc = match load_config(config) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let report = match report_for(&doc) {
        Ok(r) => r,
        Err(code) => return code,
    };
    println!("{report}");
    if let Some(dir) = out {
        if let Err(code) = ensure_dir(dir) {
            return code;
        }
        let path = dir.join("constants.csv");
        if let Err(e) = fs::write(&path, constants_csv(&report)) {
            return io_fail(&path, e.into());
        }
    }
    EXIT_OK
}

/// Keeps every row and writes snapshots as the run proceeds, so a failed run
/// still leaves its history on disk.
struct FileObserver {
    series: Series,
    snapshot_dir: PathBuf,
}

impl RunObserver<f64> for FileObserver {
    fn on_record(&mut self, _step: usize, record: &MetricsRecord<f64>) -> memfhn::Result<()> {
        self.series.push(record.clone())
    }

    fn on_snapshot(&mut self, step: usize, state: &State) -> memfhn::Result<()> {
        fs::create_dir_all(&self.snapshot_dir)?;
        write_snapshot(state, &self.snapshot_dir.join(format!("step_{step:08}.snap")))
    }
}

struct RunSummary {
    series: Series,
    initial: State,
    final_state: State,
}

fn run_to_dir(doc: &ConfigDocument, dir: &Path) -> Result<RunSummary, i32> {
    ensure_dir(dir)?;
    let csv = dir.join("metrics.csv");
    let mut obs = FileObserver {
        series: Series::new(doc.run.params.neurons),
        snapshot_dir: dir.join("snapshots"),
    };
    match integrate(&doc.run, &mut obs) {
        Ok(out) => {
            write_metrics_csv(&out.series, &csv).map_err(|e| io_fail(&csv, e))?;
            Ok(RunSummary {
                series: out.series,
                initial: out.initial,
                final_state: out.final_state,
            })
        }
        Err(e) => {
            eprintln!("error: simulation failed: {e}");
            if !obs.series.is_empty() {
                match write_metrics_csv(&obs.series, &csv) {
                    Ok(()) => eprintln!(
                        "partial metrics ({} rows) written to {}",
                        obs.series.len(),
                        csv.display()
                    ),
                    Err(w) => eprintln!("error: could not write partial metrics: {w}"),
                }
            }
            Err(EXIT_CHECK_FAILED)
        }
    }
}

fn print_sync_summary(doc: &ConfigDocument, series: &Series, report: &ThresholdReport<f64>) {
    let t_end = doc.run.t_end();
    match asynchronous_degree_estimate(series, doc.tail_fraction) {
        Ok(d) => println!(
            "asynchronous degree (max over last {:.0}% of rows, summed over pairs): {d:.6e}",
            100.0 * doc.tail_fraction
        ),
        Err(e) => println!("asynchronous degree: n/a ({e})"),
    }
    match fit_decay_rate(series, DecayTarget::Total, (doc.transient, t_end)) {
        Ok(f) => println!(
            "fitted decay rate of sum D_ij over [{:.4}, {:.4}]: {:.6} (R^2 {:.5}, {} samples)",
            doc.transient, t_end, f.rate, f.r_squared, f.samples
        ),
        Err(e) => println!("fitted decay rate: n/a ({e})"),
    }
    let c = &report.constants;
    match report.verdict {
        Verdict::Guaranteed => match sync_envelope_check(series, c.alpha, doc.transient, doc.envelope_slack) {
            Ok(env) => println!(
                "envelope exp(-{:.4} (t - {:.4})) with slack {}: worst ratio {:.4} ({})",
                c.alpha,
                env.anchor,
                env.slack,
                env.worst_ratio,
                if env.passed() { "holds" } else { "violated" }
            ),
            Err(e) => println!("envelope check: n/a ({e})"),
        },
        Verdict::NoGuarantee => println!("envelope check: skipped ({})", report.verdict),
    }
    let ball = absorbing_check(series, c.k);
    println!(
        "max recorded energy {:.6e} vs K {:.6e}: {}",
        ball.max_energy,
        c.k,
        if ball.passed() { "inside" } else { "outside" }
    );
}

pub fn cmd_simulate(config: &Path, out: Option<PathBuf>, seed: Option<u64>, tail_fraction: Option<f64>) -> i32 {
    let mut doc = match load_config(config) {
        Ok(d) => d,
        Err(code) => return code,
    };
    if let Err(code) = apply_overrides(&mut doc, seed, tail_fraction) {
        return code;
    }
    let report = match report_for(&doc) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let dir = out
        .or_else(|| doc.out_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let run = match run_to_dir(&doc, &dir) {
        Ok(r) => r,
        Err(code) => return code,
    };
    println!(
        "{} steps to t = {:.6}, {} rows written to {}",
        doc.run.n_steps,
        run.final_state.t,
        run.series.len(),
        dir.join("metrics.csv").display()
    );
    print_sync_summary(&doc, &run.series, &report);
    EXIT_OK
}

pub fn cmd_verify() -> i32 {
    match memfhn::verify::run_all() {
        Ok(outcomes) => {
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            for o in &outcomes {
                println!("{o}");
            }
            println!("{} checks, {failed} failed", outcomes.len());
            if failed == 0 {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CHECK_FAILED
        }
    }
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Point samples at [`PROBE`]: one line per neuron with `u`, `w`, `rho` at the
/// initial and final time.
pub fn point_sample_table(initial: &State, final_state: &State) -> String {
    let (i, j) = PROBE;
    let cols = [Component::Potential, Component::Recovery, Component::Memductance];
    let at = |s: &State| cols.map(|c| s.point_values(c, i, j));
    let (a, b) = (at(initial), at(final_state));
    let mut s = format!(
        "point samples at grid index ({i}, {j}), cell centre ({}, {})\n",
        initial.grid().coords(i, j).0,
        initial.grid().coords(i, j).1
    );
    s.push_str(&format!(
        "{:<8}{:>14}{:>14}{:>14}{:>14}{:>14}{:>14}\n",
        "neuron",
        format!("u(t={})", initial.t),
        format!("u(t={})", final_state.t),
        format!("w(t={})", initial.t),
        format!("w(t={})", final_state.t),
        format!("rho(t={})", initial.t),
        format!("rho(t={})", final_state.t)
    ));
    for n in 0..initial.neurons() {
        s.push_str(&format!(
            "{:<8}{:>14.6}{:>14.6}{:>14.6}{:>14.6}{:>14.6}{:>14.6}\n",
            n + 1,
            a[0][n],
            b[0][n],
            a[1][n],
            b[1][n],
            a[2][n],
            b[2][n]
        ));
    }
    s.push_str(&format!(
        "{:<8}{:>14.3e}{:>14.3e}{:>14.3e}{:>14.3e}{:>14.3e}{:>14.3e}\n",
        "spread",
        spread(&a[0]),
        spread(&b[0]),
        spread(&a[1]),
        spread(&b[1]),
        spread(&a[2]),
        spread(&b[2])
    ));
    s
}

fn write_figures(series: &Series, dir: &Path) -> Result<(), i32> {
    let m = series.neurons();
    let figures = [
        ("fig_u_norm", "u_norm", "||u_i||"),
        ("fig_w_norm", "w_norm", "||w_i||"),
        ("fig_rho_norm", "rho_norm", "||rho_i||"),
        ("fig_g_norm_sq", "g_norm_sq", "||g_i||^2"),
    ];
    for (file, prefix, label) in figures {
        let sel: Vec<String> = (1..=m).map(|i| format!("{prefix}_{i}")).collect();
        let opts = PlotOptions {
            title: format!("{label} over time"),
            log_y: false,
            y_label: Some(label.into()),
        };
        let path = dir.join(format!("{file}.svg"));
        write_plot_svg(series, &sel, &opts, &path).map_err(|e| io_fail(&path, e))?;
    }
    let pairs: Vec<String> = column_names(m).into_iter().filter(|c| c.starts_with("D_")).collect();
    let opts = PlotOptions {
        title: "pairwise differences D_ij".into(),
        log_y: true,
        y_label: Some("D_ij (log scale)".into()),
    };
    let path = dir.join("fig_sync_log.svg");
    write_plot_svg(series, &pairs, &opts, &path).map_err(|e| io_fail(&path, e))
}

pub fn cmd_reproduce_paper(config: Option<&Path>, out: &Path, seed: Option<u64>, tail_fraction: Option<f64>) -> i32 {
    match reproduce(config, out, seed, tail_fraction) {
        Ok(code) | Err(code) => code,
    }
}

fn reproduce(config: Option<&Path>, out: &Path, seed: Option<u64>, tail_fraction: Option<f64>) -> Result<i32, i32> {
    let constants_doc = parse_text(BUNDLED_CONSTANTS_CONFIG, "(bundled constants configuration)")?;
    let mut doc = match config {
        Some(p) => load_config(p)?,
        None => parse_text(BUNDLED_TABLE_CONFIG, "(bundled table configuration)")?,
    };
    apply_overrides(&mut doc, seed, tail_fraction)?;
    ensure_dir(out)?;
    let mut ok = true;

    let report = report_for(&constants_doc)?;
    let c = &report.constants;
    let computed = [c.c1, c.c2, c.mu, c.k, c.one_plus_q(), c.gamma, c.alpha];
    println!(
        "constants (k = {}, reconciled conventions)",
        constants_doc.run.params.memristor_strength
    );
    println!(
        "{:<8}{:>22}{:>22}{:>14}{:>10}",
        "name", "computed", "reference", "rel. error", "tol"
    );
    for (&(name, want, tol), got) in REFERENCE_CONSTANTS.iter().zip(computed) {
        let rel = ((got - want) / want).abs();
        let within = (got - want).abs() <= tol;
        ok &= within;
        println!(
            "{name:<8}{got:>22.6}{want:>22.6}{rel:>14.3e}{:>10}",
            if within { format!("{tol}") } else { format!("{tol} !") }
        );
    }
    println!("verdict: {}", report.verdict);
    let path = out.join("constants.csv");
    fs::write(&path, constants_csv(&report)).map_err(|e| io_fail(&path, e.into()))?;

    println!();
    println!(
        "simulation: {}x{} grid, dx = {}, dt = {}, {} steps, m = {}, k = {}, seed {}",
        doc.run.grid.nx(),
        doc.run.grid.ny(),
        doc.run.grid.dx(),
        doc.run.dt,
        doc.run.n_steps,
        doc.run.params.neurons,
        doc.run.params.memristor_strength,
        doc.run.seed
    );
    let run = run_to_dir(&doc, out)?;
    let table = point_sample_table(&run.initial, &run.final_state);
    print!("{table}");
    let path = out.join("point_samples.txt");
    fs::write(&path, &table).map_err(|e| io_fail(&path, e.into()))?;

    let (i, j) = PROBE;
    let u_spread = spread(&run.final_state.point_values(Component::Potential, i, j));
    let rho_spread = spread(&run.final_state.point_values(Component::Memductance, i, j));
    let spreads_ok = u_spread <= 1e-3 && rho_spread <= 1e-4;
    ok &= spreads_ok;
    println!(
        "final spreads at ({i}, {j}): u {u_spread:.3e} (<= 1e-3), rho {rho_spread:.3e} (<= 1e-4): {}",
        if spreads_ok { "ok" } else { "FAILED" }
    );

    // The sync checks use the reference constants (rate alpha, radius K),
    // which need not be guaranteed for the simulated parameter set.
    print_sync_summary(&doc, &run.series, &report);
    write_figures(&run.series, out)?;
    println!("metrics, figures and samples written to {}", out.display());

    if ok {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: reproduction checks failed");
        Ok(EXIT_CHECK_FAILED)
    }
}

pub fn cmd_plot(csv: &Path, columns: &[String], log_y: bool, out: Option<&Path>) -> i32 {
    let series = match read_metrics_csv(csv) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot load {}: {e}", csv.display());
            return EXIT_USAGE;
        }
    };
    let selection: Vec<String> = if columns.is_empty() {
        (1..=series.neurons()).map(|i| format!("u_norm_{i}")).collect()
    } else {
        columns
            .iter()
            .map(|c| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect()
    };
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => csv.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    if let Err(code) = ensure_dir(&dir) {
        return code;
    }
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    let path = dir.join(format!("{stem}.svg"));
    let opts = PlotOptions {
        title: stem.to_string(),
        log_y,
        y_label: None,
    };
    match write_plot_svg(&series, &selection, &opts, &path) {
        Ok(()) => {
            println!("{}", path.display());
            EXIT_OK
        }
        Err(e @ (Error::UnknownColumn(_) | Error::EmptySelection)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => io_fail(&path, e),
    }
}
