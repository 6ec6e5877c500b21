//! Command-line surface. Four subcommands share one config format:
//! `run` advances the configured problem and writes series.csv,
//! final.ckpt, and summary.txt; `check-data` evaluates the growth
//! hypotheses and (in viscous mode) the compatibility data on the initial
//! state without stepping; `convergence` runs the three-level refinement
//! study; `plot` emits a gnuplot script over a previously written series.
//!
//! Exit codes are a stable contract: 0 success, 1 usage or config error,
//! 2 run ended in breakdown, 3 hypothesis or order gate failed.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::checkpoint;
use crate::config::{self, InitialSpec, RunSpec};
use crate::convergence;
use crate::error::Result;
use crate::initdata::{self, HypothesisReport};
use crate::params::Mode;
use crate::series;
use crate::solver::{self, RunOutcome, RunStatus};
use crate::state::{to_primitive, State};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BREAKDOWN: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;

#[derive(Parser)]
#[command(
    name = "elastoblow",
    about = "Finite-time breakdown experiments for compressible Hookean elastodynamics",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Advance the configured problem; writes series.csv, final.ckpt, summary.txt
    Run {
        config: PathBuf,
        /// Directory for the output artifacts (created if missing)
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Evaluate the growth hypotheses on the initial data without stepping
    CheckData { config: PathBuf },
    /// Run the problem at n, 3n/2, 2n and report observed orders
    Convergence { config: PathBuf },
    /// Emit a gnuplot script for a series.csv written by `run`
    Plot {
        config: PathBuf,
        /// Directory holding series.csv; the script lands next to it
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn init_workers() {
    if let Ok(v) = std::env::var("ELASTOBLOW_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            if k > 0 {
                // ignore "already initialized": tests and library callers may
                // have built the pool first
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

pub fn cli_main() -> i32 {
    init_workers();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let res = match cli.cmd {
        Cmd::Run { config, out_dir } => cmd_run(&config, &out_dir),
        Cmd::CheckData { config } => cmd_check_data(&config),
        Cmd::Convergence { config } => cmd_convergence(&config),
        Cmd::Plot { config, out_dir } => cmd_plot(&config, &out_dir),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Builds the initial state a config describes. Checkpoints are verified
/// against the config header field by field before being adopted.
fn initial_state(spec: &RunSpec) -> Result<State> {
    match &spec.initial {
        InitialSpec::Equilibrium => Ok(initdata::make_equilibrium(&spec.physics, &spec.grid)),
        InitialSpec::Bump(b) => initdata::make_bump(b, &spec.physics, &spec.grid),
        InitialSpec::Checkpoint(path) => {
            let (c, p, g) = checkpoint::load(path)?;
            config::check_checkpoint_agreement(spec, &p, &g)?;
            to_primitive(&c)
        }
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Inviscid => "inviscid",
        Mode::Viscous => "viscous",
    }
}

fn summary_text(spec: &RunSpec, out: &RunOutcome) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(s, "mode = {}", mode_name(spec.run.mode));
    let _ = writeln!(
        s,
        "grid = {}x{}x{} half_width = {}",
        spec.grid.n[0], spec.grid.n[1], spec.grid.n[2], spec.grid.half_width
    );
    let _ = writeln!(
        s,
        "scheme = order {} dissipation {} cfl {}",
        spec.stencil.order, spec.stencil.dissipation_coeff, spec.run.cfl
    );
    match out.status {
        RunStatus::Completed => {
            let _ = writeln!(s, "status = completed");
        }
        RunStatus::Breakdown { reason, t } => {
            let _ = writeln!(s, "status = breakdown");
            let _ = writeln!(s, "breakdown_reason = {reason}");
            let _ = writeln!(s, "breakdown_t = {t}");
        }
    }
    let _ = writeln!(s, "steps = {}", out.steps);
    let _ = writeln!(s, "t_final = {}", out.final_state.t);
    let _ = writeln!(s, "samples = {}", out.series.len());
    if let (Some(first), Some(last)) = (out.series.first(), out.series.last()) {
        let _ = writeln!(s, "mass_drift = {:e}", (last.m - first.m).abs());
        let _ = writeln!(s, "final_bkm = {}", last.bkm);
        let _ = writeln!(s, "final_gradu_max = {}", last.gradu_max);
    }
    let h = &out.hypotheses;
    let _ = writeln!(s, "hyp_momentum_nonneg = {}", h.cond_ff1);
    let _ = writeln!(s, "hyp_functional_above_threshold = {}", h.cond_ff);
    let _ = writeln!(s, "hyp_trace_dominates_energy = {}", h.cond_a2);
    if let Some(t) = h.t_upper {
        let _ = writeln!(s, "t_upper = {t}");
    }
    if let Some(d) = out.viscous_dissipation {
        let _ = writeln!(s, "viscous_dissipation = {d}");
    }
    s
}

fn cmd_run(config: &Path, out_dir: &Path) -> Result<i32> {
    let spec = config::load_config(config)?;
    let initial = initial_state(&spec)?;
    let out = solver::run(&initial, &spec.physics, &spec.grid, &spec.stencil, &spec.run)?;

    std::fs::create_dir_all(out_dir)?;
    series::save_csv(&out_dir.join("series.csv"), &out.series)?;
    checkpoint::save(&out_dir.join("final.ckpt"), &out.final_state, &spec.physics, &spec.grid)?;
    let summary = summary_text(&spec, &out);
    std::fs::write(out_dir.join("summary.txt"), &summary)?;
    print!("{summary}");

    Ok(match out.status {
        RunStatus::Completed => EXIT_OK,
        RunStatus::Breakdown { .. } => EXIT_BREAKDOWN,
    })
}

fn hypothesis_lines(h: &HypothesisReport) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let verdict = |b: bool| if b { "pass" } else { "FAIL" };
    let _ = writeln!(s, "initial-data report");
    let _ = writeln!(s, "  m0 = {}", h.m0);
    let _ = writeln!(s, "  Ffun0 = {}", h.f0_functional);
    let _ = writeln!(s, "  E0 = {}", h.e0);
    let _ = writeln!(s, "  trace0 = {}", h.trace0);
    let _ = writeln!(s, "  rho0_max = {}", h.rho0_max);
    let _ = writeln!(s, "  growth_threshold = {}", h.threshold);
    let _ = writeln!(s, "  div_residual0 = {:e}", h.div_residual0);
    let _ = writeln!(
        s,
        "  radial momentum nonnegative:     {}  margin = {}",
        verdict(h.cond_ff1),
        h.m0
    );
    let _ = writeln!(
        s,
        "  functional above threshold:      {}  margin = {}",
        verdict(h.cond_ff),
        h.f0_functional - h.threshold
    );
    let _ = writeln!(
        s,
        "  trace dominates twice energy:    {}  margin = {}",
        verdict(h.cond_a2),
        h.trace0 - 2.0 * h.e0
    );
    match h.t_upper {
        Some(t) => {
            let _ = writeln!(s, "  blowup_time_upper_bound = {t}");
        }
        None => {
            let _ = writeln!(s, "  blowup_time_upper_bound = none (functional at or below threshold)");
        }
    }
    s
}

fn cmd_check_data(config: &Path) -> Result<i32> {
    let spec = config::load_config(config)?;
    let initial = initial_state(&spec)?;
    let h = initdata::check_hypotheses(&initial, &spec.physics, &spec.grid, &spec.stencil)?;
    let mut text = hypothesis_lines(&h);
    let mut all = h.all_hold();

    if spec.run.mode == Mode::Viscous {
        use std::fmt::Write as _;
        let compat = initdata::check_compatibility(
            &initial,
            &spec.physics,
            &spec.grid,
            &spec.stencil,
        )?;
        let visc_ok =
            initdata::check_viscosity(spec.physics.mu, spec.physics.lambda);
        let compat_ok = compat.flagged_cells == 0
            && compat.g_l2.is_finite()
            && compat.g_h1_semi.is_finite()
            && compat.sqrt_rho_g_l2.is_finite();
        let _ = writeln!(text, "viscous-mode report");
        let _ = writeln!(
            text,
            "  viscosity gate (7 mu > lambda):  {}  margin = {}",
            if visc_ok { "pass" } else { "FAIL" },
            7.0 * spec.physics.mu - spec.physics.lambda
        );
        let _ = writeln!(text, "  compat_source_l2 = {}", compat.g_l2);
        let _ = writeln!(text, "  compat_source_h1_semi = {}", compat.g_h1_semi);
        let _ = writeln!(text, "  compat_weighted_l2 = {}", compat.sqrt_rho_g_l2);
        let _ = writeln!(
            text,
            "  compatibility source resolved:   {}  flagged_cells = {}",
            if compat_ok { "pass" } else { "FAIL" },
            compat.flagged_cells
        );
        all = all && visc_ok && compat_ok;
    }

    print!("{text}");
    println!("all_conditions_hold = {all}");
    Ok(if all { EXIT_OK } else { EXIT_HYPOTHESIS })
}

fn cmd_convergence(config: &Path) -> Result<i32> {
    let spec = config::load_config(config)?;
    let report = convergence::convergence_study(&spec)?;
    println!(
        "refinement levels: {}^3, {}^3, {}^3",
        report.ns[0], report.ns[1], report.ns[2]
    );
    println!("{:<14} {:>14} {:>14} {:>8}", "quantity", "coarse/mid err", "mid/fine err", "order");
    for row in &report.rows {
        println!(
            "{:<14} {:>14.6e} {:>14.6e} {:>8}",
            row.name,
            row.errs[0],
            row.errs[1],
            row.order_label()
        );
    }
    let gate = report.design_order - 0.5;
    println!(
        "order gate (>= {gate}): {}",
        if report.pass { "pass" } else { "FAIL" }
    );
    Ok(if report.pass { EXIT_OK } else { EXIT_HYPOTHESIS })
}

const PLOT_SCRIPT: &str = r#"# gnuplot script over series.csv; render with: gnuplot plot.gp
set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 1400,900
set output 'series.png'
set multiplot layout 2,2
set xlabel 't'
set title 'weighted radial momentum'
plot 'series.csv' using 1:3 with lines lw 2 title 'Ffun', \
     'series.csv' using 1:12 with lines dt 2 title 'riccati lower bound'
set title 'energy and trace'
plot 'series.csv' using 1:4 with lines lw 2 title 'E', \
     'series.csv' using 1:5 with lines title 'trace'
set title 'disturbance front'
plot 'series.csv' using 1:7 with lines lw 2 title 'front', \
     'series.csv' using 1:8 with lines dt 2 title 'bound'
set title 'gradient growth'
plot 'series.csv' using 1:10 with lines lw 2 title 'max |grad u|', \
     'series.csv' using 1:9 with lines title 'bkm integral'
unset multiplot
"#;

fn cmd_plot(config: &Path, out_dir: &Path) -> Result<i32> {
    // parse for validation only; the script never computes anything
    let _ = config::load_config(config)?;
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("plot.gp");
    std::fs::write(&path, PLOT_SCRIPT)?;
    println!("wrote {}", path.display());
    if !out_dir.join("series.csv").exists() {
        eprintln!("note: series.csv not found in {}; run `elastoblow run` first", out_dir.display());
    }
    Ok(EXIT_OK)
}
