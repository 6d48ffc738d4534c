//! Protograph density evolution on the binary erasure channel.
//!
//! Every iteration updates all check nodes, then all variable nodes:
//!
//! ```text
//! q_kj = 1 - prod_{j' in V(k) \ j} (1 - p_j'k)
//! p_jk = eps * prod_{k' in C(j) \ k} q_k'j
//! Pb(j) = eps * prod_{k in C(j)} q_kj
//! ```
//!
//! Exclusions are per edge instance, so a parallel edge still sees its
//! twin. Check products are accumulated as sums of `ln(1 - p)` and turned
//! back with `expm1`, which keeps `q` accurate when all inputs are tiny.
//!
//! The selective schedule skips
//! (a) variables whose `Pb` is already below `pb_max`,
//! (b) nodes none of whose neighbours changed in the phase that produced
//!     their inputs, and
//! (c) variables whose candidate `Pb` improves by a relative amount below
//!     `theta`; the candidate is discarded and the old messages are kept.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjacency::Adjacency;
use crate::error::{Error, Result};
use crate::protograph::Protograph;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    Flooding,
    Selective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub mode: ScheduleMode,
    /// Convergence target; also the rule (a) cut-off under the selective schedule.
    pub pb_max: f64,
    /// Rule (c) improvement constraint; `0` disables the rule.
    pub theta: f64,
    pub max_iterations: usize,
    /// Relative decrease of `sum Pb` over `stall_window` iterations below
    /// which a run is declared stuck at a non-zero fixed point.
    pub stall_epsilon: f64,
    pub stall_window: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            mode: ScheduleMode::Selective,
            pb_max: 1e-5,
            theta: 1e-2,
            max_iterations: 200_000,
            stall_epsilon: 1e-12,
            stall_window: 100,
        }
    }
}

impl ScheduleConfig {
    /// Plain flooding, converging once every `Pb` is below `1e-10`.
    pub fn flooding() -> Self {
        Self { mode: ScheduleMode::Flooding, pb_max: 1e-10, theta: 0.0, ..Self::default() }
    }

    pub fn selective(pb_max: f64, theta: f64) -> Self {
        Self { mode: ScheduleMode::Selective, pb_max, theta, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.pb_max >= 0.0) || !(self.theta >= 0.0) || self.max_iterations == 0 || self.stall_window == 0 {
            return Err(Error::InvalidParameter(format!("invalid schedule {self:?}")));
        }
        Ok(())
    }
}

/// Per-edge and per-node state of one density evolution run.
#[derive(Debug, Clone)]
pub struct DeState<T> {
    /// Variable-to-check erasure probability per edge.
    pub p: Vec<T>,
    /// Check-to-variable erasure probability per edge.
    pub q: Vec<T>,
    pub pb: Vec<T>,
    pub updated_v: Vec<bool>,
    pub updated_c: Vec<bool>,
    pub update_count_v: Vec<u64>,
    pub update_count_c: Vec<u64>,
    pub iteration: usize,
}

/// Stepping engine; [`de_run`] drives it to convergence.
pub struct BecEvolution<T> {
    adj: Adjacency,
    eps: T,
    sched: ScheduleConfig,
    state: DeState<T>,
    scratch: Vec<T>,
}

impl<T: Real> BecEvolution<T> {
    pub fn new(g: &Protograph, eps: f64, sched: &ScheduleConfig) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidParameter(format!("erasure probability {eps} outside [0,1]")));
        }
        sched.validate()?;
        let adj = Adjacency::new(g);
        let eps_t = T::of(eps);
        let m = adj.n_edges();
        let state = DeState {
            p: vec![eps_t; m],
            q: vec![T::one(); m],
            pb: vec![eps_t; g.n_v],
            // iteration 0 counts as a full update so iteration 1 is complete
            updated_v: vec![true; g.n_v],
            updated_c: vec![true; g.n_c],
            update_count_v: vec![0; g.n_v],
            update_count_c: vec![0; g.n_c],
            iteration: 0,
        };
        let scratch = vec![T::zero(); adj.max_degree() + 1];
        Ok(Self { adj, eps: eps_t, sched: sched.clone(), state, scratch })
    }

    pub fn state(&self) -> &DeState<T> {
        &self.state
    }

    pub fn converged(&self) -> bool {
        let target = T::of(self.sched.pb_max);
        self.state.pb.iter().all(|&x| x < target)
    }

    /// Average number of applied updates per node.
    pub fn i_eff(&self) -> f64 {
        let s = &self.state;
        let total: u64 = s.update_count_v.iter().chain(&s.update_count_c).sum();
        total as f64 / (s.update_count_v.len() + s.update_count_c.len()) as f64
    }

    /// One global iteration. Returns the number of variable updates applied.
    pub fn step(&mut self) -> usize {
        let selective = self.sched.mode == ScheduleMode::Selective;
        let pb_max = T::of(self.sched.pb_max);
        let theta = T::of(self.sched.theta);
        let eps = self.eps;
        let Self { adj, state, scratch, .. } = self;
        state.iteration += 1;

        let mut updated_c = vec![false; adj.n_c];
        for (c, flag) in updated_c.iter_mut().enumerate() {
            let edges = adj.check(c);
            if selective && !edges.iter().any(|&e| state.updated_v[adj.edge_var[e]]) {
                continue;
            }
            // suffix sums of ln(1-p); scratch[i] = sum over edges[i..]
            let d = edges.len();
            scratch[d] = T::zero();
            for i in (0..d).rev() {
                scratch[i] = scratch[i + 1] + (-state.p[edges[i]]).ln_1p();
            }
            let mut prefix = T::zero();
            for (i, &e) in edges.iter().enumerate() {
                let others = prefix + scratch[i + 1];
                state.q[e] = -others.exp_m1();
                prefix = prefix + (-state.p[e]).ln_1p();
            }
            *flag = true;
            state.update_count_c[c] += 1;
        }
        state.updated_c = updated_c;

        let mut applied = 0;
        let mut updated_v = vec![false; adj.n_v];
        for (v, flag) in updated_v.iter_mut().enumerate() {
            let edges = adj.var(v);
            if selective {
                if state.pb[v] < pb_max {
                    continue;
                }
                if !edges.iter().any(|&e| state.updated_c[adj.edge_check[e]]) {
                    continue;
                }
            }
            let d = edges.len();
            scratch[d] = T::one();
            for i in (0..d).rev() {
                scratch[i] = scratch[i + 1] * state.q[edges[i]];
            }
            let candidate = eps * scratch[0];
            if selective && theta > T::zero() {
                let old = state.pb[v];
                let improvement = if old > T::zero() { (old - candidate) / old } else { T::zero() };
                if improvement < theta {
                    continue;
                }
            }
            let mut prefix = T::one();
            for (i, &e) in edges.iter().enumerate() {
                state.p[e] = eps * prefix * scratch[i + 1];
                prefix = prefix * state.q[e];
            }
            state.pb[v] = candidate;
            *flag = true;
            state.update_count_v[v] += 1;
            applied += 1;
        }
        state.updated_v = updated_v;
        applied
    }
}

/// Variables whose `Pb` should be recorded at given iterations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceRequest {
    pub slices: Vec<String>,
    pub iterations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSnapshot {
    pub slice: String,
    pub iteration: usize,
    pub pb: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeReport {
    pub converged: bool,
    pub iterations_run: usize,
    pub i_eff: f64,
    /// `Pb` per variable at the end of the run.
    pub pb: Vec<f64>,
    pub pb_trace: Vec<TraceSnapshot>,
}

impl DeReport {
    pub fn mean_pb(&self) -> f64 {
        self.pb.iter().sum::<f64>() / self.pb.len().max(1) as f64
    }
}

/// Runs density evolution until convergence, a stall, or the iteration cap.
pub fn de_run<T: Real>(g: &Protograph, eps: f64, sched: &ScheduleConfig, trace: &TraceRequest) -> Result<DeReport> {
    let slices = trace
        .slices
        .iter()
        .map(|s| g.slice(s).map(|vars| (s.clone(), vars)))
        .collect::<Result<Vec<_>>>()?;
    let mut de = BecEvolution::<T>::new(g, eps, sched)?;
    let mut pb_trace = Vec::new();
    let mut history = std::collections::VecDeque::with_capacity(sched.stall_window + 1);
    let mut converged = de.converged();
    while !converged && de.state.iteration < sched.max_iterations {
        let applied = de.step();
        let it = de.state.iteration;
        if trace.iterations.contains(&it) {
            for (name, vars) in &slices {
                pb_trace.push(TraceSnapshot {
                    slice: name.clone(),
                    iteration: it,
                    pb: vars.iter().map(|&v| de.state.pb[v].as_f64()).collect(),
                });
            }
        }
        converged = de.converged();
        if converged || applied == 0 {
            break;
        }
        let total: f64 = de.state.pb.iter().map(|x| x.as_f64()).sum();
        history.push_back(total);
        if history.len() > sched.stall_window {
            let old = history.pop_front().unwrap_or(total);
            if old - total <= sched.stall_epsilon * total {
                break;
            }
        }
    }
    Ok(DeReport {
        converged,
        iterations_run: de.state.iteration,
        i_eff: de.i_eff(),
        pb: de.state.pb.iter().map(|x| x.as_f64()).collect(),
        pb_trace,
    })
}

/// Largest erasure probability (to within `tol`) at which [`de_run`] converges.
pub fn threshold_bec<T: Real>(g: &Protograph, sched: &ScheduleConfig, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let none = TraceRequest::default();
    let converges = |eps: f64| de_run::<T>(g, eps, sched, &none).map(|r| r.converged);
    if !converges(0.0)? {
        return Err(Error::DegenerateGraph);
    }
    if converges(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if converges(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub i_eff: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// `I_eff` over a grid of erasure probabilities; runs are independent and
/// executed in parallel, results keep the grid order.
pub fn ieff_sweep<T: Real>(g: &Protograph, eps_grid: &[f64], sched: &ScheduleConfig) -> Result<Vec<SweepPoint>> {
    let none = TraceRequest::default();
    eps_grid
        .par_iter()
        .map(|&eps| {
            de_run::<T>(g, eps, sched, &none).map(|r| SweepPoint {
                eps,
                i_eff: r.i_eff,
                converged: r.converged,
                iterations: r.iterations_run,
            })
        })
        .collect()
}

/// `Pb` along one slice at the requested (ascending) iterations. The run is
/// not stopped at convergence so that every requested iteration is reported.
pub fn pb_profile<T: Real>(
    g: &Protograph,
    eps: f64,
    sched: &ScheduleConfig,
    slice: &str,
    iterations: &[usize],
) -> Result<Vec<(usize, Vec<f64>)>> {
    if iterations.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("profile iterations must be strictly ascending".into()));
    }
    let vars = g.slice(slice)?;
    let mut de = BecEvolution::<T>::new(g, eps, sched)?;
    let mut out = Vec::with_capacity(iterations.len());
    for &target in iterations {
        while de.state.iteration < target {
            de.step();
        }
        out.push((target, vars.iter().map(|&v| de.state.pb[v].as_f64()).collect()));
    }
    Ok(out)
}
