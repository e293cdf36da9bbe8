//! The wall-grid benchmark environment: uniform moves over the in-bounds
//! subset of {left, right, up, down, stay}, walls as costly (not
//! forbidden) states, a single zero-cost goal cell.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::klproblem::KlProblem;
use crate::markov::StochasticMatrix;

/// Rectangular grid with wall cells and one goal cell. States are cells
/// in row-major order: state id = row * cols + col.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridLayout {
    rows: usize,
    cols: usize,
    walls: Vec<bool>,
    goal: usize,
}

impl GridLayout {
    pub fn new(rows: usize, cols: usize, walls: Vec<(usize, usize)>, goal: (usize, usize)) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DegenerateGrid("empty grid".into()));
        }
        let mut mask = vec![false; rows * cols];
        for (r, c) in walls {
            if r >= rows || c >= cols {
                return Err(Error::DegenerateGrid(format!(
                    "wall ({r}, {c}) outside {rows}x{cols} grid"
                )));
            }
            mask[r * cols + c] = true;
        }
        let (gr, gc) = goal;
        if gr >= rows || gc >= cols {
            return Err(Error::DegenerateGrid("goal outside grid".into()));
        }
        let goal = gr * cols + gc;
        if mask[goal] {
            return Err(Error::DegenerateGrid("goal cell is a wall".into()));
        }
        Ok(Self {
            rows,
            cols,
            walls: mask,
            goal,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n(&self) -> usize {
        self.rows * self.cols
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn is_wall(&self, state: usize) -> bool {
        self.walls[state]
    }

    pub fn wall_count(&self) -> usize {
        self.walls.iter().filter(|&&w| w).count()
    }

    /// Renders back to the text format accepted by [`parse_grid`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let id = r * self.cols + c;
                out.push(if id == self.goal {
                    'G'
                } else if self.walls[id] {
                    '#'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        out
    }
}

/// Per-cell state costs of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCosts {
    pub step_cost: f64,
    pub wall_cost: f64,
    pub goal_cost: f64,
}

impl Default for GridCosts {
    fn default() -> Self {
        Self {
            step_cost: 1.0,
            wall_cost: 100.0,
            goal_cost: 0.0,
        }
    }
}

impl GridCosts {
    fn validate(&self) -> Result<()> {
        for v in [self.step_cost, self.wall_cost, self.goal_cost] {
            if !v.is_finite() {
                return Err(Error::DegenerateGrid("non-finite grid cost".into()));
            }
        }
        if self.wall_cost < self.step_cost {
            return Err(Error::DegenerateGrid(
                "wall cost must be at least the step cost".into(),
            ));
        }
        Ok(())
    }
}

/// How probability mass is assigned when a move would leave the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutOfBounds {
    /// Uniform over the feasible subset of {left, right, up, down, stay}.
    #[default]
    UniformFeasible,
    /// Always 1/5 per move with blocked moves' mass redirected to stay
    /// (kept for sensitivity checks).
    RedirectToStay,
}

/// Parses a grid description: '.' free, '#' wall, 'G' the single goal.
pub fn parse_grid(text: &str) -> Result<GridLayout> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.is_empty())
        .collect();
    if lines.is_empty() {
        return Err(Error::DegenerateGrid("empty grid text".into()));
    }
    let cols = lines[0].chars().count();
    if lines.iter().any(|l| l.chars().count() != cols) {
        return Err(Error::NonRectangular);
    }
    let rows = lines.len();
    let mut walls = Vec::new();
    let mut goal = None;
    for (r, line) in lines.iter().enumerate() {
        for (c, ch) in line.chars().enumerate() {
            match ch {
                '.' => {}
                '#' => walls.push((r, c)),
                'G' => {
                    if goal.is_some() {
                        return Err(Error::MultipleGoals);
                    }
                    goal = Some((r, c));
                }
                other => {
                    return Err(Error::UnknownChar {
                        ch: other,
                        row: r,
                        col: c,
                    })
                }
            }
        }
    }
    let goal = goal.ok_or(Error::NoGoal)?;
    GridLayout::new(rows, cols, walls, goal)
}

/// Builds the KL problem: uniform uncontrolled moves, state costs
/// attached to the departure cell (wall_cost on walls, goal_cost on the
/// goal, step_cost elsewhere). Walls are states, not obstacles.
pub fn build_gridworld(
    layout: &GridLayout,
    costs: &GridCosts,
    beta: f64,
    oob: OutOfBounds,
) -> Result<KlProblem> {
    costs.validate()?;
    let (rows, cols) = (layout.rows(), layout.cols());
    let n = layout.n();
    let mut q = Array2::zeros((n, n));
    for r in 0..rows {
        for c in 0..cols {
            let id = r * cols + c;
            let mut moves = vec![id]; // stay
            let deltas: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
            for (dr, dc) in deltas {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr >= 0 && nr < rows as isize && nc >= 0 && nc < cols as isize {
                    moves.push(nr as usize * cols + nc as usize);
                }
            }
            match oob {
                OutOfBounds::UniformFeasible => {
                    let p = 1.0 / moves.len() as f64;
                    for m in moves {
                        q[[id, m]] += p;
                    }
                }
                OutOfBounds::RedirectToStay => {
                    let blocked = 5 - moves.len();
                    for m in &moves {
                        q[[id, *m]] += 0.2;
                    }
                    q[[id, id]] += 0.2 * blocked as f64;
                }
            }
        }
    }
    let q = StochasticMatrix::new(q)?;
    let mut c = Array1::zeros(n);
    for s in 0..n {
        c[s] = if s == layout.goal() {
            costs.goal_cost
        } else if layout.is_wall(s) {
            costs.wall_cost
        } else {
            costs.step_cost
        };
    }
    KlProblem::with_state_costs(q, c.view(), beta)
}

/// The default benchmark layout: a 10x10 grid with an L-shaped interior
/// wall and the goal in the bottom-right corner.
pub fn default_layout() -> GridLayout {
    let mut walls = Vec::new();
    for r in 2..=6 {
        walls.push((r, 5));
    }
    for c in 2..=5 {
        walls.push((6, c));
    }
    GridLayout::new(10, 10, walls, (9, 9)).expect("default layout is valid")
}

/// Values laid out in grid geometry as CSV (row-major, no header),
/// 17 significant digits.
pub fn export_heatmap(values: &Array1<f64>, layout: &GridLayout) -> Result<String> {
    if values.len() != layout.n() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: layout.n(),
        });
    }
    let mut out = String::new();
    for r in 0..layout.rows() {
        let cells: Vec<String> = (0..layout.cols())
            .map(|c| format!("{:.16e}", values[r * layout.cols() + c]))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}
