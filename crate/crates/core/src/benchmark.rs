//! The three-way solver comparison on a normalized problem: KL-learning
//! and Z-learning step by step against the relaxed power method, with
//! errors indexed both by iteration and by elementary-operation count
//! (a power iteration costs nnz(H) operations, a stochastic step costs 1).

use rayon::prelude::*;

use crate::error::Result;
use crate::klproblem::{build_h, normalize_costs, KlProblem};
use crate::learners::{
    learner_by_name, run_learner, RunConfig, StepSchedule, Trajectory,
};
use crate::solvers::{relaxed_power_trace, solve_power};

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    /// Constant gain shared by all three methods.
    pub gamma: f64,
    /// Stochastic steps per run.
    pub steps: u64,
    /// Error-curve sampling stride for the stochastic methods.
    pub stride: u64,
    /// Seeds of the stochastic runs; curves report the median.
    pub seeds: Vec<u64>,
    /// Power iterations recorded (every iteration is sampled).
    pub power_iters: usize,
    pub tol: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            gamma: 0.05,
            steps: 100_000,
            stride: 100,
            seeds: (1..=10).collect(),
            power_iters: 2_000,
            tol: 1e-12,
        }
    }
}

/// Error curve of one method: samples at `iters[i]` with median error
/// `errs[i]`; total operation count is `iters[i] * ops_per_iter`.
#[derive(Debug, Clone)]
pub struct MethodCurve {
    pub name: &'static str,
    pub ops_per_iter: u64,
    pub iters: Vec<u64>,
    pub errs: Vec<f64>,
}

impl MethodCurve {
    /// Cumulative operations at which the error first reaches `threshold`.
    pub fn ops_to_reach(&self, threshold: f64) -> Option<u64> {
        self.iters
            .iter()
            .zip(&self.errs)
            .find(|(_, &e)| e <= threshold)
            .map(|(&k, _)| k * self.ops_per_iter)
    }

    /// Means of the error over consecutive iteration windows of width
    /// `window` (samples at k in ((j-1)w, jw] go to window j).
    pub fn window_means(&self, window: u64) -> Vec<f64> {
        let mut sums: Vec<(f64, u64)> = Vec::new();
        for (&k, &e) in self.iters.iter().zip(&self.errs) {
            if k == 0 {
                continue;
            }
            let idx = ((k - 1) / window) as usize;
            if sums.len() <= idx {
                sums.resize(idx + 1, (0.0, 0));
            }
            sums[idx].0 += e;
            sums[idx].1 += 1;
        }
        sums.iter()
            .filter(|(_, c)| *c > 0)
            .map(|(s, c)| s / *c as f64)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    /// Spectral radius of the problem before cost normalization.
    pub lambda_raw: f64,
    pub nnz: u64,
    pub kl: MethodCurve,
    pub z: MethodCurve,
    pub power: MethodCurve,
    /// (seed, final KL error, final Z error) per stochastic run.
    pub per_seed_final: Vec<(u64, f64, f64)>,
}

impl BenchmarkResult {
    /// Wide CSV: `k,kl_ops,kl_err,z_ops,z_err,power_ops,power_err`, one
    /// row per sampled iteration index, blank where a method has no
    /// sample at that index.
    pub fn to_csv(&self) -> String {
        let mut ks: Vec<u64> = self
            .kl
            .iters
            .iter()
            .chain(&self.z.iters)
            .chain(&self.power.iters)
            .copied()
            .collect();
        ks.sort_unstable();
        ks.dedup();
        let lookup = |curve: &MethodCurve, k: u64| -> Option<f64> {
            curve
                .iters
                .binary_search(&k)
                .ok()
                .map(|idx| curve.errs[idx])
        };
        let mut out = String::from("k,kl_ops,kl_err,z_ops,z_err,power_ops,power_err\n");
        for k in ks {
            let cell = |curve: &MethodCurve| -> (String, String) {
                match lookup(curve, k) {
                    Some(e) => (format!("{}", k * curve.ops_per_iter), format!("{e}")),
                    None => (String::new(), String::new()),
                }
            };
            let (kl_ops, kl_err) = cell(&self.kl);
            let (z_ops, z_err) = cell(&self.z);
            let (p_ops, p_err) = cell(&self.power);
            out.push_str(&format!(
                "{k},{kl_ops},{kl_err},{z_ops},{z_err},{p_ops},{p_err}\n"
            ));
        }
        out
    }
}

fn median_curve(trajs: &[Trajectory]) -> (Vec<u64>, Vec<f64>) {
    let iters: Vec<u64> = trajs[0].records.iter().map(|r| r.k).collect();
    let mut errs = Vec::with_capacity(iters.len());
    for idx in 0..iters.len() {
        let mut vals: Vec<f64> = trajs
            .iter()
            .map(|t| t.records[idx].err_l1.expect("benchmark runs carry a reference"))
            .collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = vals.len() / 2;
        errs.push(if vals.len() % 2 == 1 {
            vals[m]
        } else {
            0.5 * (vals[m - 1] + vals[m])
        });
    }
    (iters, errs)
}

/// Normalizes the problem to λ* = 1, solves the reference pair, then
/// runs KL-learning, Z-learning (in parallel over seeds) and the relaxed
/// power method with the same gain.
pub fn run_benchmark(problem: &KlProblem, cfg: &BenchmarkConfig) -> Result<BenchmarkResult> {
    let h_raw = build_h(problem);
    let e_raw = solve_power(&h_raw, cfg.tol, 1_000_000)?;
    let normalized = normalize_costs(problem, cfg.tol, 1_000_000)?;
    let h = build_h(&normalized);
    let reference = solve_power(&h, cfg.tol, 1_000_000)?;
    let schedule = StepSchedule::constant(cfg.gamma)?;

    let run_algo = |name: &str| -> Result<Vec<Trajectory>> {
        let algo = learner_by_name(name).expect("registered learner");
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                run_learner(
                    algo,
                    &normalized,
                    &RunConfig {
                        schedule,
                        steps: cfg.steps,
                        stride: cfg.stride,
                        seed,
                    },
                    Some(&reference),
                )
            })
            .collect()
    };
    let kl_runs = run_algo("kl")?;
    let z_runs = run_algo("z")?;

    let ref_unit: Vec<f64> = {
        let s = reference.z().sum();
        reference.z().iter().map(|v| v / s).collect()
    };
    let power_states = relaxed_power_trace(&h, &schedule, cfg.power_iters);
    let mut p_iters = Vec::with_capacity(power_states.len());
    let mut p_errs = Vec::with_capacity(power_states.len());
    for (k, z) in power_states.iter().enumerate() {
        let mass = z.sum();
        let err: f64 = z
            .iter()
            .zip(&ref_unit)
            .map(|(a, b)| (a / mass - b).abs())
            .sum();
        p_iters.push(k as u64);
        p_errs.push(err);
    }

    let (kl_iters, kl_errs) = median_curve(&kl_runs);
    let (z_iters, z_errs) = median_curve(&z_runs);
    let per_seed_final = cfg
        .seeds
        .iter()
        .zip(kl_runs.iter().zip(&z_runs))
        .map(|(&s, (a, b))| (s, a.final_err().unwrap(), b.final_err().unwrap()))
        .collect();

    Ok(BenchmarkResult {
        lambda_raw: e_raw.lambda(),
        nnz: h.nnz() as u64,
        kl: MethodCurve {
            name: "kl",
            ops_per_iter: 1,
            iters: kl_iters,
            errs: kl_errs,
        },
        z: MethodCurve {
            name: "z",
            ops_per_iter: 1,
            iters: z_iters,
            errs: z_errs,
        },
        power: MethodCurve {
            name: "power",
            ops_per_iter: h.nnz() as u64,
            iters: p_iters,
            errs: p_errs,
        },
        per_seed_final,
    })
}
