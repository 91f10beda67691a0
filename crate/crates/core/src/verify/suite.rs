//! Suite configuration and the runner.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::*;
use crate::error::{Error, Result};

/// Every check name a suite may select, in execution order.
pub const CHECK_NAMES: &[&str] = &[
    "bernoulli",
    "delta_identities",
    "bl2coc",
    "jacobi",
    "virasoro",
    "main1",
    "cross_realization",
    "central_monomial",
    "corrections",
    "untwisted_bar_corrections",
    "delta_generating",
    "grading",
    "normal_ordering_symmetry",
    "lincomb",
    "heisenberg",
    "prop_bracket",
    "prop_scalar",
    "prop_main1",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistSpec {
    pub p: i64,
    pub dims: Vec<usize>,
}

impl TwistSpec {
    pub fn twist(&self) -> Result<TwistData> {
        TwistData::new(self.p, self.dims.clone())
    }
}

fn spec(p: i64, dims: &[usize]) -> TwistSpec {
    TwistSpec { p, dims: dims.to_vec() }
}

/// Suite selection and parameter grid. Missing fields take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Check names; an empty list runs nothing.
    pub suite: Vec<String>,
    /// Twists for the Fock-space checks.
    pub twists: Vec<TwistSpec>,
    /// Twists for the generating-series checks.
    pub prop_twists: Vec<TwistSpec>,
    /// `r + s` bound for the representation checks.
    pub rs_max: u32,
    /// `|m|, |n|` bound for the representation checks.
    pub mode_range: i64,
    /// Weight cap of the Fock basis.
    pub weight_cap: i64,
    /// `r + s` and `|m|, |n|` bounds for the abstract bracket.
    pub bl2coc_rs_max: u32,
    pub bl2coc_mode_range: i64,
    pub jacobi_n_max: i64,
    pub jacobi_r_max: u32,
    pub bernoulli_points: Vec<Rational>,
    pub bernoulli_degree: usize,
    pub delta_periods: Vec<i64>,
    pub delta_window: i64,
    /// Highest `r` for the correction checks.
    pub correction_r_max: u32,
    /// `K` for the highest-weight generating function.
    pub delta_k: u32,
    pub y_cap: u32,
    pub mode_window: i64,
    pub prop_weight_cap: i64,
    /// Scale of the cocycle in the abstract bracket; anything but `-1/2`
    /// is a negative control.
    pub cocycle: Rational,
    /// Record wall time in each report.
    pub timings: bool,
    /// Worker threads; 0 or 1 runs sequentially.
    pub jobs: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            suite: CHECK_NAMES.iter().map(|s| s.to_string()).collect(),
            twists: vec![spec(1, &[1]), spec(1, &[2]), spec(2, &[0, 1]), spec(2, &[1, 1]), spec(3, &[0, 1, 1])],
            prop_twists: vec![spec(1, &[1]), spec(2, &[0, 1])],
            rs_max: 2,
            mode_range: 3,
            weight_cap: 4,
            bl2coc_rs_max: 3,
            bl2coc_mode_range: 4,
            jacobi_n_max: 3,
            jacobi_r_max: 2,
            bernoulli_points: vec![q(0, 1), q(1, 3), q(1, 2), q(2, 3), q(1, 1)],
            bernoulli_degree: 12,
            delta_periods: vec![1, 2, 3],
            delta_window: 6,
            correction_r_max: 3,
            delta_k: 3,
            y_cap: 2,
            mode_window: 2,
            prop_weight_cap: 3,
            cocycle: cocycle_normalization(),
            timings: false,
            jobs: 1,
        }
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

impl Config {
    /// Checks names, twists and caps.
    pub fn validate(&self) -> Result<()> {
        for name in &self.suite {
            if !CHECK_NAMES.contains(&name.as_str()) {
                return Err(Error::InvalidArgument(format!("unknown check `{name}`")));
            }
        }
        for t in self.twists.iter().chain(&self.prop_twists) {
            t.twist()?;
        }
        let caps = [
            ("mode_range", self.mode_range),
            ("weight_cap", self.weight_cap),
            ("bl2coc_mode_range", self.bl2coc_mode_range),
            ("jacobi_n_max", self.jacobi_n_max),
            ("delta_window", self.delta_window),
            ("mode_window", self.mode_window),
            ("prop_weight_cap", self.prop_weight_cap),
        ];
        for (name, v) in caps {
            if v < 0 {
                return Err(Error::InvalidArgument(format!("{name} is negative")));
            }
        }
        if self.delta_periods.iter().any(|p| *p < 1) {
            return Err(Error::InvalidArgument("delta period below 1".into()));
        }
        if self.delta_k < 1 || self.y_cap < 1 || self.mode_window < 1 {
            return Err(Error::InvalidArgument("delta_k, y_cap and mode_window must be at least 1".into()));
        }
        Ok(())
    }

    fn selected(&self, name: &str) -> bool {
        self.suite.iter().any(|s| s == name)
    }
}

type Task = Box<dyn Fn() -> Vec<CheckReport> + Send + Sync>;

/// The tasks of the configuration, in report order.
fn tasks(config: &Config) -> Result<Vec<Task>> {
    config.validate()?;
    let twists: Vec<TwistData> = config.twists.iter().map(TwistSpec::twist).collect::<Result<_>>()?;
    let prop_twists: Vec<TwistData> = config.prop_twists.iter().map(TwistSpec::twist).collect::<Result<_>>()?;
    let c = config.clone();
    let mut out: Vec<Task> = Vec::new();
    for name in CHECK_NAMES.iter().filter(|n| config.selected(n)) {
        match *name {
            "bernoulli" => {
                for v in &c.bernoulli_points {
                    let (v, k) = (v.clone(), c.bernoulli_degree);
                    out.push(Box::new(move || vec![check_bernoulli(&v, k)]));
                }
            }
            "delta_identities" => {
                for &p in &c.delta_periods {
                    let w = c.delta_window;
                    out.push(Box::new(move || vec![check_delta_identities(p, w)]));
                }
            }
            "bl2coc" => {
                for r in 0..=c.bl2coc_rs_max {
                    for s in 0..=(c.bl2coc_rs_max - r) {
                        let (range, cocycle) = (c.bl2coc_mode_range, c.cocycle.clone());
                        out.push(Box::new(move || vec![check_bl2coc(r, s, range, &cocycle)]));
                    }
                }
            }
            "jacobi" => {
                let (n, r, cocycle) = (c.jacobi_n_max, c.jacobi_r_max, c.cocycle.clone());
                out.push(Box::new(move || vec![check_jacobi(n, r, &cocycle)]));
            }
            "virasoro" => {
                for t in &twists {
                    let (t, range, w) = (t.clone(), c.mode_range, c.weight_cap);
                    out.push(Box::new(move || vec![check_virasoro_grid(&t, range, w)]));
                }
            }
            "main1" => {
                for t in &twists {
                    for bar in [false, true] {
                        let (t, rs, range, w, cocycle) = (t.clone(), c.rs_max, c.mode_range, c.weight_cap, c.cocycle.clone());
                        out.push(Box::new(move || check_main1_grid(&t, rs, range, bar, w, &cocycle)));
                    }
                }
            }
            "cross_realization" => {
                for t in &twists {
                    for bar in [false, true] {
                        let (t, rs, range, cocycle) = (t.clone(), c.rs_max, c.mode_range, c.cocycle.clone());
                        out.push(Box::new(move || vec![check_cross_realization(&t, rs, range, bar, &cocycle)]));
                    }
                }
            }
            "central_monomial" => {
                for t in &twists {
                    let (t, rs) = (t.clone(), c.rs_max);
                    out.push(Box::new(move || {
                        (0..=rs).flat_map(|r| (0..=(rs - r)).map(move |s| (r, s))).map(|(r, s)| check_central_monomial(&t, r, s)).collect()
                    }));
                }
            }
            "corrections" => {
                for t in &twists {
                    let (t, r) = (t.clone(), c.correction_r_max);
                    out.push(Box::new(move || vec![check_corrections(&t, r)]));
                }
            }
            "untwisted_bar_corrections" => {
                for t in twists.iter().filter(|t| t.p() == 1) {
                    let (d, r) = (t.total_dim(), c.correction_r_max);
                    out.push(Box::new(move || vec![check_untwisted_bar_corrections(d, r)]));
                }
            }
            "delta_generating" => {
                for t in &twists {
                    let (t, k) = (t.clone(), c.delta_k);
                    out.push(Box::new(move || vec![check_delta_generating(&t, k)]));
                }
            }
            "grading" => {
                for t in &twists {
                    let (t, range, w) = (t.clone(), c.mode_range, c.weight_cap);
                    out.push(Box::new(move || vec![check_grading(&t, range, 2, w)]));
                }
            }
            "normal_ordering_symmetry" => {
                for t in &twists {
                    let (t, range, w) = (t.clone(), c.mode_range, c.weight_cap);
                    out.push(Box::new(move || vec![check_normal_ordering_symmetry(&t, range, 3, w)]));
                }
            }
            "lincomb" => {
                for t in &twists {
                    let (t, range, w) = (t.clone(), c.mode_range, c.weight_cap);
                    out.push(Box::new(move || vec![check_lincomb(&t, range, 4, w)]));
                }
            }
            "heisenberg" => {
                for t in &twists {
                    let (t, range, w) = (t.clone(), c.mode_range, c.weight_cap);
                    out.push(Box::new(move || vec![check_heisenberg(&t, range, w)]));
                }
            }
            "prop_bracket" => {
                for t in &prop_twists {
                    let (t, y, win, w) = (t.clone(), c.y_cap, c.mode_window, c.prop_weight_cap);
                    out.push(Box::new(move || vec![check_prop_bracket(&t, y, win, w)]));
                }
            }
            "prop_scalar" => {
                for t in &prop_twists {
                    let (t, y, win) = (t.clone(), c.y_cap, c.mode_window);
                    out.push(Box::new(move || vec![check_prop_scalar_sector(&t, y, win)]));
                }
            }
            "prop_main1" => {
                for t in prop_twists.iter().filter(|t| t.p() == 1) {
                    let (t, y, win, w) = (t.clone(), c.y_cap, c.mode_window, c.prop_weight_cap);
                    out.push(Box::new(move || vec![check_prop_main1_agreement(&t, y, win, w)]));
                }
            }
            _ => unreachable!("validated"),
        }
    }
    Ok(out)
}

fn run_task(task: &Task, timings: bool) -> Vec<CheckReport> {
    let start = Instant::now();
    let mut reports = task();
    if timings {
        let ms = start.elapsed().as_millis() as u64;
        for r in &mut reports {
            r.ms = ms;
        }
    }
    reports
}

/// Runs the selected checks. Reports come back in configuration order
/// whatever the number of workers; a failing check does not stop the rest.
pub fn run_suite(config: &Config) -> Result<Vec<CheckReport>> {
    let tasks = tasks(config)?;
    let jobs = config.jobs.max(1).min(tasks.len().max(1));
    let results: Vec<Mutex<Option<Vec<CheckReport>>>> = tasks.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(task) = tasks.get(i) else { break };
                let reports = run_task(task, config.timings);
                *results[i].lock().expect("no poisoned slot") = Some(reports);
            });
        }
    });
    Ok(results.into_iter().flat_map(|slot| slot.into_inner().expect("no poisoned slot").expect("every task ran")).collect())
}
