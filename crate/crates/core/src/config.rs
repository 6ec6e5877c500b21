//! Run configuration files: flat INI-style sections holding plain
//! key = value pairs. Parsing is strict on purpose: unknown sections and
//! keys are rejected by name, duplicates are errors, and every physical
//! admissibility check runs at parse time so a config that parses will
//! also start.
//!
//! ```text
//! [physics]
//! A = 12.5
//! gamma = 2.0
//! rho_bar = 1.0
//! R = 0.3
//!
//! [grid]
//! n = 48
//! half_width = 1.0
//!
//! [scheme]
//! order = 2
//! dissipation_coeff = 0.02
//! cfl = 0.4
//!
//! [run]
//! mode = inviscid
//! t_end = 0.06
//! output_stride = 1
//!
//! [initial]
//! kind = bump
//! velocity_amplitude = 0.25
//! density_bump = 0.02
//! f_potential_amplitude = 0.02
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{ConfigError, Error, Result};
use crate::grid::Grid;
use crate::initdata::BumpSpec;
use crate::params::{Mode, PhysParams};
use crate::solver::RunConfig;
use crate::stencil::StencilConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Equilibrium,
    Bump(BumpSpec),
    Checkpoint(PathBuf),
}

/// Fully validated run description; everything a subcommand needs.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub physics: PhysParams,
    pub grid: Grid,
    pub stencil: StencilConfig,
    pub run: RunConfig,
    pub initial: InitialSpec,
}

const SECTIONS: [&str; 5] = ["physics", "grid", "scheme", "run", "initial"];

struct RawConfig {
    /// (section, key) -> (value, line number)
    entries: BTreeMap<(String, String), (String, usize)>,
}

fn scan(text: &str) -> Result<RawConfig> {
    let mut entries = BTreeMap::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find(['#', ';']) {
            Some(cut) => &raw[..cut],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(ConfigError::Syntax {
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::UnknownSection { line: line_no, name: name.into() }.into());
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let sec = section.clone().ok_or(ConfigError::Syntax {
            line: line_no,
            message: format!("key `{}` before any section header", key.trim()),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if let Some((_, first)) = entries.insert((sec.clone(), key.clone()), (value, line_no)) {
            return Err(ConfigError::Syntax {
                line: line_no,
                message: format!("duplicate key `{key}` in section [{sec}] (first at line {first})"),
            }
            .into());
        }
    }
    Ok(RawConfig { entries })
}

impl RawConfig {
    fn take(&mut self, section: &'static str, key: &'static str) -> Option<String> {
        self.entries
            .remove(&(section.to_string(), key.to_string()))
            .map(|(v, _)| v)
    }

    fn take_f64(&mut self, section: &'static str, key: &'static str) -> Result<Option<f64>> {
        match self.take(section, key) {
            None => Ok(None),
            Some(v) => v.parse::<f64>().map(Some).map_err(|_| {
                ConfigError::BadValue {
                    section,
                    key,
                    message: format!("expected a number, got `{v}`"),
                }
                .into()
            }),
        }
    }

    fn need_f64(&mut self, section: &'static str, key: &'static str) -> Result<f64> {
        self.take_f64(section, key)?
            .ok_or_else(|| ConfigError::MissingKey { section, key }.into())
    }

    fn take_usize(&mut self, section: &'static str, key: &'static str) -> Result<Option<usize>> {
        match self.take(section, key) {
            None => Ok(None),
            Some(v) => v.parse::<usize>().map(Some).map_err(|_| {
                ConfigError::BadValue {
                    section,
                    key,
                    message: format!("expected a nonnegative integer, got `{v}`"),
                }
                .into()
            }),
        }
    }

    fn reject_leftovers(&self) -> Result<()> {
        if let Some(((section, key), (_, line))) = self.entries.iter().next() {
            return Err(ConfigError::UnknownKey {
                line: *line,
                section: section.clone(),
                key: key.clone(),
            }
            .into());
        }
        Ok(())
    }

    fn forbid(&self, section: &'static str, key: &'static str, why: String) -> Result<()> {
        if self.entries.contains_key(&(section.to_string(), key.to_string())) {
            return Err(ConfigError::BadValue { section, key, message: why }.into());
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<RunSpec> {
    let mut raw = scan(text)?;

    let physics = PhysParams {
        a: raw.need_f64("physics", "A")?,
        gamma: raw.need_f64("physics", "gamma")?,
        mu: raw.take_f64("physics", "mu")?.unwrap_or(0.0),
        lambda: raw.take_f64("physics", "lambda")?.unwrap_or(0.0),
        rho_bar: raw.need_f64("physics", "rho_bar")?,
        r: raw.need_f64("physics", "R")?,
    };

    let n = raw
        .take_usize("grid", "n")?
        .ok_or(ConfigError::MissingKey { section: "grid", key: "n" })?;
    let half_width = raw.need_f64("grid", "half_width")?;
    let grid = Grid::cube(n, half_width)?;

    let stencil = StencilConfig {
        order: raw.take_usize("scheme", "order")?.unwrap_or(2),
        dissipation_coeff: raw.take_f64("scheme", "dissipation_coeff")?.unwrap_or(0.02),
    };
    let cfl = raw.take_f64("scheme", "cfl")?.unwrap_or(0.4);

    let mode = match raw.take("run", "mode") {
        None => return Err(ConfigError::MissingKey { section: "run", key: "mode" }.into()),
        Some(v) => match v.as_str() {
            "inviscid" => Mode::Inviscid,
            "viscous" => Mode::Viscous,
            other => {
                return Err(ConfigError::BadValue {
                    section: "run",
                    key: "mode",
                    message: format!("expected `inviscid` or `viscous`, got `{other}`"),
                }
                .into())
            }
        },
    };
    let t_end = raw.need_f64("run", "t_end")?;
    let mut run = RunConfig::new(t_end, mode, &physics);
    run.cfl = cfl;
    if let Some(v) = raw.take_usize("run", "output_stride")? {
        run.output_stride = v;
    }
    if let Some(v) = raw.take_f64("run", "rho_floor")? {
        run.rho_floor = v;
    }
    if let Some(v) = raw.take_f64("run", "gradu_ceiling")? {
        run.gradu_ceiling = v;
    }

    let initial = match raw.take("initial", "kind") {
        None => return Err(ConfigError::MissingKey { section: "initial", key: "kind" }.into()),
        Some(kind) => match kind.as_str() {
            "equilibrium" => {
                for key in ["velocity_amplitude", "density_bump", "f_potential_amplitude", "path"] {
                    raw.forbid("initial", key, format!("`{key}` is not valid when kind = equilibrium"))?;
                }
                InitialSpec::Equilibrium
            }
            "bump" => {
                raw.forbid("initial", "path", "`path` is only valid when kind = checkpoint".into())?;
                InitialSpec::Bump(BumpSpec {
                    velocity_amplitude: raw
                        .take_f64("initial", "velocity_amplitude")?
                        .unwrap_or(0.0),
                    density_bump: raw.take_f64("initial", "density_bump")?.unwrap_or(0.0),
                    f_potential_amplitude: raw
                        .take_f64("initial", "f_potential_amplitude")?
                        .unwrap_or(0.0),
                    ..Default::default()
                })
            }
            "checkpoint" => {
                for key in ["velocity_amplitude", "density_bump", "f_potential_amplitude"] {
                    raw.forbid("initial", key, format!("`{key}` is only valid when kind = bump"))?;
                }
                match raw.take("initial", "path") {
                    None => {
                        return Err(
                            ConfigError::MissingKey { section: "initial", key: "path" }.into()
                        )
                    }
                    Some(p) => InitialSpec::Checkpoint(PathBuf::from(p)),
                }
            }
            other => {
                return Err(ConfigError::BadValue {
                    section: "initial",
                    key: "kind",
                    message: format!(
                        "expected `equilibrium`, `bump`, or `checkpoint`, got `{other}`"
                    ),
                }
                .into())
            }
        },
    };

    raw.reject_leftovers()?;

    physics.validate(run.mode)?;
    stencil.validate()?;
    run.validate()?;
    for a in 0..3 {
        if grid.n[a] < stencil.min_cells() {
            return Err(Error::GridTooSmall { needed: stencil.min_cells(), got: grid.n[a] });
        }
    }

    Ok(RunSpec { physics, grid, stencil, run, initial })
}

/// Reads and parses a config file; a relative checkpoint path is resolved
/// against the config file's directory.
pub fn load_config(path: &Path) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path)?;
    let mut spec = parse_config(&text)?;
    if let InitialSpec::Checkpoint(p) = &spec.initial {
        if p.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            spec.initial = InitialSpec::Checkpoint(base.join(p));
        }
    }
    Ok(spec)
}

/// Verifies that a loaded checkpoint header agrees with the config's
/// physics and grid; restarting under silently different parameters is
/// refused field by field.
pub fn check_checkpoint_agreement(spec: &RunSpec, p: &PhysParams, g: &Grid) -> Result<()> {
    let pairs = [
        ("A", spec.physics.a, p.a),
        ("gamma", spec.physics.gamma, p.gamma),
        ("mu", spec.physics.mu, p.mu),
        ("lambda", spec.physics.lambda, p.lambda),
        ("rho_bar", spec.physics.rho_bar, p.rho_bar),
        ("R", spec.physics.r, p.r),
        ("half_width", spec.grid.half_width, g.half_width),
    ];
    for (field, want, got) in pairs {
        if want != got {
            return Err(ConfigError::CheckpointConflict {
                field,
                message: format!("config has {want}, checkpoint has {got}"),
            }
            .into());
        }
    }
    if spec.grid.n != g.n {
        return Err(ConfigError::CheckpointConflict {
            field: "n",
            message: format!("config has {:?}, checkpoint has {:?}", spec.grid.n, g.n),
        }
        .into());
    }
    Ok(())
}
