use std::fs;
use std::path::{Path, PathBuf};

use klcontrol::gridworld::{build_gridworld, parse_grid, GridCosts, GridLayout, OutOfBounds};
use klcontrol::{Error, KlProblem, ProblemFile, StepSchedule};

/// Exit codes: 0 success, 2 input error, 3 non-convergence,
/// 4 state corruption, 10 conjecture candidate found.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NoConvergence { .. } | Error::EigenNoConvergence => 3,
        Error::StateCorrupt { .. } => 4,
        Error::Io(_) => 2,
        _ => 2,
    }
}

/// Optional JSON config document; flags override its values.
pub fn load_config(path: &Option<PathBuf>) -> Result<serde_json::Value, Error> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
        None => Ok(serde_json::Value::Null),
    }
}

pub fn cfg_f64(cfg: &serde_json::Value, key: &str) -> Option<f64> {
    cfg.get(key).and_then(|v| v.as_f64())
}

pub fn cfg_u64(cfg: &serde_json::Value, key: &str) -> Option<u64> {
    cfg.get(key).and_then(|v| v.as_u64())
}

pub fn cfg_str(cfg: &serde_json::Value, key: &str) -> Option<String> {
    cfg.get(key).and_then(|v| v.as_str()).map(str::to_string)
}

/// Shared grid-construction flags.
#[derive(clap::Args, Debug, Clone)]
pub struct GridOpts {
    /// Per-step cost on free cells
    #[arg(long, default_value_t = 1.0)]
    pub step_cost: f64,
    /// Per-step cost on wall cells
    #[arg(long, default_value_t = 100.0)]
    pub wall_cost: f64,
    /// Per-step cost on the goal cell
    #[arg(long, default_value_t = 0.0)]
    pub goal_cost: f64,
    /// Inverse-temperature weight of the control cost
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Redirect out-of-bounds move mass to "stay" instead of
    /// renormalizing over feasible moves
    #[arg(long)]
    pub redirect_to_stay: bool,
}

impl GridOpts {
    pub fn costs(&self) -> GridCosts {
        GridCosts {
            step_cost: self.step_cost,
            wall_cost: self.wall_cost,
            goal_cost: self.goal_cost,
        }
    }

    pub fn oob(&self) -> OutOfBounds {
        if self.redirect_to_stay {
            OutOfBounds::RedirectToStay
        } else {
            OutOfBounds::UniformFeasible
        }
    }
}

/// Loads a problem from either a JSON problem file or a grid text file;
/// with neither, falls back to the built-in 10x10 walled grid.
pub fn load_problem(
    problem: &Option<PathBuf>,
    grid: &Option<PathBuf>,
    grid_opts: &GridOpts,
) -> Result<(KlProblem, String), Error> {
    match (problem, grid) {
        (Some(p), _) => {
            let text = fs::read_to_string(p)?;
            let doc: ProblemFile = serde_json::from_str(&text)?;
            Ok((doc.into_problem()?, format!("problem:{}", p.display())))
        }
        (None, Some(g)) => {
            let text = fs::read_to_string(g)?;
            let layout = parse_grid(&text)?;
            let problem =
                build_gridworld(&layout, &grid_opts.costs(), grid_opts.beta, grid_opts.oob())?;
            Ok((problem, format!("grid:{}", g.display())))
        }
        (None, None) => {
            let layout: GridLayout = klcontrol::gridworld::default_layout();
            let problem =
                build_gridworld(&layout, &grid_opts.costs(), grid_opts.beta, grid_opts.oob())?;
            Ok((problem, "grid:builtin-10x10".to_string()))
        }
    }
}

/// Builds a schedule from the shared gain flags: constant when --gamma
/// is given, Robbins-Monro when the --rm-* triple is used.
pub fn schedule_from(
    gamma: Option<f64>,
    rm_a: Option<f64>,
    rm_b: Option<f64>,
    rm_p: Option<f64>,
    default: StepSchedule,
) -> Result<StepSchedule, Error> {
    match (gamma, rm_a) {
        (Some(g), None) => StepSchedule::constant(g),
        (None, Some(a)) => {
            StepSchedule::robbins_monro(a, rm_b.unwrap_or(0.0), rm_p.unwrap_or(1.0))
        }
        (None, None) => Ok(default),
        (Some(_), Some(_)) => Err(Error::InvalidInput(
            "--gamma and --rm-a are mutually exclusive".into(),
        )),
    }
}

pub fn ensure_out_dir(out: &Path) -> Result<(), Error> {
    fs::create_dir_all(out)?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text)?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
