//! Asymptotic average weight spectrum of a protograph ensemble and its
//! minimum distance growth rate.
//!
//! For per-variable weight fractions `d_j` the exponent of the ensemble
//! average number of codewords is
//!
//! ```text
//! (1/n_v) [ sum_c a_c(d on the edges of c) - sum_j (deg_j - 1) H(d_j) ]
//! ```
//!
//! with `a_c(w) = inf_{x > 0} ln g_c(x) - sum_e w_e ln x_e` and
//! `g_c(x) = (prod (1 + x_e) + prod (1 - x_e)) / 2` the even-weight
//! generating function of check `c`. The spectral shape `r(delta)` is the
//! maximum of this exponent subject to `mean(d_j) = delta`.
//!
//! A degree-2 check forces equal weights on its two endpoints. Variables
//! linked through such checks share one unknown and every such check
//! contributes `H(d)` instead of a saddle-point term.
//!
//! The maximum may sit on a face of the simplex where some variables carry
//! no weight at all. The weighted variables of a codeword form a stopping
//! set, so every candidate support is closed under removing the lone
//! weighted neighbour of a check. On a fixed support the exponent is
//! climbed by a Levenberg-Marquardt ascent in log-weights, projected onto
//! the mean-weight constraint. Check saddle points are eliminated
//! implicitly, their inverse Hessians feeding the Hessian of the exponent.
//! Classes driven to zero shrink the support and the ascent restarts on the
//! smaller face. Several starts (uniform, each chain or bridge of a
//! composite graph, the previous solution) are tried and the largest local
//! maximum is kept.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protograph::Protograph;
use crate::scalar::{binary_entropy, logit, Real};

/// Point on the spectral shape curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint<T> {
    pub delta: T,
    pub r: T,
    /// Lagrange multiplier of the weight constraint.
    pub mu: T,
    /// Weight fraction of every protograph variable.
    pub fractions: Vec<T>,
    /// Largest stationarity residual at the solution.
    pub residual: T,
}

/// Sampled spectral shape and its first zero crossing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralShape<T> {
    pub delta_grid: Vec<T>,
    pub r_values: Vec<T>,
    /// `None` if `r` stays negative up to `delta = 1/2` (or the branch ends).
    pub delta_min: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    /// Smallest sampled weight.
    pub delta_start: f64,
    /// Grid step in `ln delta`.
    pub log_step: f64,
    /// Width of the final bracket on `delta_min`.
    pub tol: f64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self { delta_start: 1e-6, log_step: 0.25, tol: 1e-9 }
    }
}

// --- per-check saddle point ------------------------------------------------

struct CheckSaddle<T> {
    value: T,
    /// `ln x_e` at the solution.
    log_x: Vec<T>,
    /// Inverse Hessian of `ln g` in log coordinates.
    inv_hessian: Vec<Vec<T>>,
    #[cfg_attr(not(test), allow(dead_code))]
    gradient_residual: T,
}

/// Sum of the elementary symmetric polynomials `e_k`, `k = start, start + 2, ...`,
/// of `x` with the indices in `skip` left out. All terms are positive, so
/// this stays accurate when `x` is tiny.
fn parity_sum<T: Real>(x: &[T], skip: &[usize], start: usize) -> T {
    let mut e = vec![T::zero(); x.len() + 1];
    e[0] = T::one();
    let mut len = 0;
    for (i, &xi) in x.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        len += 1;
        for k in (1..=len).rev() {
            e[k] = e[k] + e[k - 1] * xi;
        }
    }
    e.iter().skip(start).step_by(2).copied().sum()
}

/// `g`, gradient `x_e dg/dx_e / g` and Hessian of `ln g` in `u = ln x`.
fn even_weight_terms<T: Real>(x: &[T]) -> (T, Vec<T>, Vec<Vec<T>>) {
    let d = x.len();
    let g = parity_sum(x, &[], 0);
    let grad: Vec<T> = (0..d).map(|e| x[e] * parity_sum(x, &[e], 1) / g).collect();
    let mut hess = vec![vec![T::zero(); d]; d];
    for e in 0..d {
        hess[e][e] = grad[e] - grad[e] * grad[e];
        for f in e + 1..d {
            let h = x[e] * x[f] * parity_sum(x, &[e, f], 0) / g - grad[e] * grad[f];
            hess[e][f] = h;
            hess[f][e] = h;
        }
    }
    (g, grad, hess)
}

/// Minimises `ln g(e^u) - sum w_e u_e` by damped Newton; `u` is the warm start.
fn check_saddle<T: Real>(w: &[T], u: &mut [T]) -> Result<CheckSaddle<T>> {
    let d = w.len();
    let tol = T::tolerance() * T::of(10.0);
    if w.iter().any(|&x| !(x > T::zero())) {
        return Err(Error::NotConverged("zero weight on a check edge".into()));
    }
    let total: T = w.iter().copied().sum();
    if w.iter().any(|&x| x >= total - x) {
        return Err(Error::NotConverged("infeasible check weights".into()));
    }
    let objective = |u: &[T]| -> T {
        let x: Vec<T> = u.iter().map(|v| v.exp()).collect();
        parity_sum(&x, &[], 2).ln_1p() - u.iter().zip(w).map(|(&a, &b)| a * b).sum::<T>()
    };
    let rel_residual = |u: &[T]| -> T {
        let x: Vec<T> = u.iter().map(|v| v.exp()).collect();
        let g = parity_sum(&x, &[], 0);
        (0..d).fold(T::zero(), |m, e| m.max((x[e] * parity_sum(&x, &[e], 1) / g - w[e]).abs() / w[e]))
    };
    let mut phi = objective(u);
    for _ in 0..200 {
        let x: Vec<T> = u.iter().map(|v| v.exp()).collect();
        let (_, grad, hess) = even_weight_terms(&x);
        let residual: Vec<T> = grad.iter().zip(w).map(|(&a, &b)| a - b).collect();
        // relative: the weights can be tiny
        let worst = residual.iter().zip(w).fold(T::zero(), |m, (r, &b)| m.max(r.abs() / b));
        if worst < tol {
            let inv = linalg::inverse(&hess).ok_or_else(|| Error::NotConverged("singular check Hessian".into()))?;
            return Ok(CheckSaddle { value: phi, log_x: u.to_vec(), inv_hessian: inv, gradient_residual: worst });
        }
        let neg: Vec<T> = residual.iter().map(|&r| -r).collect();
        let step = linalg::solve(hess.clone(), neg).ok_or_else(|| Error::NotConverged("singular check Hessian".into()))?;
        let slope: T = step.iter().zip(&residual).map(|(&s, &r)| s * r).sum();
        let mut t = T::one();
        let biggest = step.iter().fold(T::zero(), |m, s| m.max(s.abs()));
        if biggest > T::of(4.0) {
            t = T::of(4.0) / biggest;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<T> = u.iter().zip(&step).map(|(&a, &s)| a + t * s).collect();
            let val = objective(&trial);
            // near the optimum the objective is flat to rounding; fall back to the gradient
            if val.is_finite()
                && (val <= phi + T::of(1e-4) * t * slope || rel_residual(&trial) < (T::one() - T::of(0.5) * t) * worst)
            {
                u.copy_from_slice(&trial);
                phi = val;
                accepted = true;
                break;
            }
            t = t * T::of(0.5);
        }
        if !accepted {
            // at the floating point floor of the objective: accept if the gradient is small enough
            if worst < T::tolerance().sqrt() * T::of(1e-2) {
                let inv = linalg::inverse(&hess).ok_or_else(|| Error::NotConverged("singular check Hessian".into()))?;
                return Ok(CheckSaddle { value: phi, log_x: u.to_vec(), inv_hessian: inv, gradient_residual: worst });
            }
            return Err(Error::NotConverged(format!("check saddle line search failed (d={d})")));
        }
    }
    Err(Error::NotConverged("check saddle iteration limit".into()))
}

// --- ensemble spectrum ---------------------------------------------------

/// Variables allowed to carry weight, with the class structure they induce.
///
/// The support of a codeword is a stopping set, so the support is closed
/// under removing every variable that is the only weighted neighbour of
/// some check. Checks left with two weighted edges tie their endpoints.
#[derive(Debug, Clone)]
struct Face<T> {
    support: Vec<bool>,
    /// Variable count of the whole protograph; all rates are per variable of it.
    norm: T,
    /// Class per variable, `usize::MAX` off the support.
    class_of: Vec<usize>,
    size: Vec<T>,
    /// Entropy multiplicity `sum (deg - 1) - #tying checks` per class.
    entropy_coef: Vec<T>,
    /// Variable class of each weighted edge, per check with three or more.
    checks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
struct Solution<T> {
    face: Face<T>,
    /// Weight fraction per class of `face`.
    d: Vec<T>,
    /// Warm starts for the check saddle points.
    log_x: Vec<Vec<T>>,
    delta: T,
    mu: T,
    r: T,
    residual: T,
}

/// Exponent, gradient and Hessian in the class fractions (not normalized).
struct Local<T> {
    phi: T,
    grad: Vec<T>,
    hess: Vec<Vec<T>>,
}

enum Ascent<T> {
    Converged(Solution<T>),
    /// Some classes are being driven to zero weight; fractions at that
    /// point and the cutoff below which a class is dropped.
    Collapsed(Vec<T>, T),
}

/// Ascent steps before a start is abandoned.
const MAX_ITER: usize = 600;
/// Iterations between checks for a stalled drift.
const STALL: usize = 200;
/// Smallest-to-largest ratio treated as drifting to zero when stalled.
const DRIFT: f64 = 0.05;
/// Relative weight below which a class is treated as leaving the support.
const COLLAPSE: f64 = 1e-9;

fn find(p: &mut [usize], mut a: usize) -> usize {
    while p[a] != a {
        p[a] = p[p[a]];
        a = p[a];
    }
    a
}

impl<T: Real> Face<T> {
    fn new(g: &Protograph, mut support: Vec<bool>) -> Option<Self> {
        let adj = g.check_edges();
        loop {
            let mut changed = false;
            for edges in &adj {
                let on: Vec<usize> = edges.iter().map(|&e| g.edges[e].1).filter(|&v| support[v]).collect();
                if on.len() == 1 {
                    support[on[0]] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !support.iter().any(|&s| s) {
            return None;
        }
        let mut parent: Vec<usize> = (0..g.n_v).collect();
        let weighted: Vec<Vec<usize>> = adj
            .iter()
            .map(|edges| edges.iter().map(|&e| g.edges[e].1).filter(|&v| support[v]).collect())
            .collect();
        for on in &weighted {
            if on.len() == 2 {
                let a = find(&mut parent, on[0]);
                let b = find(&mut parent, on[1]);
                parent[a] = b;
            }
        }
        let mut id = vec![usize::MAX; g.n_v];
        let mut class_of = vec![usize::MAX; g.n_v];
        let mut k = 0;
        for v in (0..g.n_v).filter(|&v| support[v]) {
            let root = find(&mut parent, v);
            if id[root] == usize::MAX {
                id[root] = k;
                k += 1;
            }
            class_of[v] = id[root];
        }
        let mut size = vec![T::zero(); k];
        let mut entropy_coef = vec![T::zero(); k];
        for (v, deg) in g.variable_degrees().into_iter().enumerate() {
            if support[v] {
                size[class_of[v]] = size[class_of[v]] + T::one();
                entropy_coef[class_of[v]] = entropy_coef[class_of[v]] + T::of(deg as f64 - 1.0);
            }
        }
        let mut checks = Vec::new();
        for on in weighted {
            let classes: Vec<usize> = on.iter().map(|&v| class_of[v]).collect();
            match classes.len() {
                0 => {}
                2 => entropy_coef[classes[0]] = entropy_coef[classes[0]] - T::one(),
                _ => checks.push(classes),
            }
        }
        Some(Self { support, norm: T::of(g.n_v as f64), class_of, size, entropy_coef, checks })
    }

    fn n_classes(&self) -> usize {
        self.size.len()
    }

    fn mean_weight(&self, d: &[T]) -> T {
        d.iter().zip(&self.size).map(|(&a, &s)| a * s).sum::<T>() / self.norm
    }

    /// Class fractions from per-variable fractions; members off the old
    /// support start at `floor`.
    fn restrict(&self, per_var: &[T], floor: T) -> Vec<T> {
        let mut sum = vec![T::zero(); self.n_classes()];
        for (v, &k) in self.class_of.iter().enumerate() {
            if k != usize::MAX {
                sum[k] = sum[k] + per_var[v].max(floor);
            }
        }
        sum.iter().zip(&self.size).map(|(&s, &n)| s / n).collect()
    }

    fn per_variable(&self, d: &[T]) -> Vec<T> {
        self.class_of.iter().map(|&k| if k == usize::MAX { T::zero() } else { d[k] }).collect()
    }

    /// Unnormalized exponent at class fractions `d`; warm starts are updated.
    fn phi(&self, d: &[T], log_x: &mut [Vec<T>]) -> Result<T> {
        let mut total = T::zero();
        for (classes, warm) in self.checks.iter().zip(log_x.iter_mut()) {
            let w: Vec<T> = classes.iter().map(|&k| d[k]).collect();
            total = total + check_saddle(&w, warm)?.value;
        }
        for (k, &dk) in d.iter().enumerate() {
            total = total - self.entropy_coef[k] * binary_entropy(dk);
        }
        Ok(total)
    }

    fn local(&self, d: &[T], log_x: &mut [Vec<T>]) -> Result<Local<T>> {
        let k = self.n_classes();
        let mut phi = T::zero();
        let mut grad = vec![T::zero(); k];
        let mut hess = vec![vec![T::zero(); k]; k];
        for (classes, warm) in self.checks.iter().zip(log_x.iter_mut()) {
            let w: Vec<T> = classes.iter().map(|&k| d[k]).collect();
            let s = check_saddle(&w, warm)?;
            phi = phi + s.value;
            for (a, &ka) in classes.iter().enumerate() {
                grad[ka] = grad[ka] - s.log_x[a];
                for (b, &kb) in classes.iter().enumerate() {
                    hess[ka][kb] = hess[ka][kb] - s.inv_hessian[a][b];
                }
            }
        }
        for c in 0..k {
            let dc = d[c];
            phi = phi - self.entropy_coef[c] * binary_entropy(dc);
            grad[c] = grad[c] + self.entropy_coef[c] * logit(dc);
            hess[c][c] = hess[c][c] + self.entropy_coef[c] / (dc * (T::one() - dc));
        }
        Ok(Local { phi, grad, hess })
    }

    fn initial_log_x(&self, d: &[T]) -> Vec<Vec<T>> {
        self.checks
            .iter()
            .map(|cl| cl.iter().map(|&k| T::of(0.5) * d[k].ln()).collect())
            .collect()
    }

    /// Multiplier and stationarity residual `max |grad + mu * size|`.
    fn multiplier(&self, d: &[T], grad: &[T]) -> (T, T) {
        // least squares in the scaled metric
        let (mut num, mut den) = (T::zero(), T::zero());
        for k in 0..d.len() {
            let st = self.size[k] * d[k];
            num = num + st * d[k] * grad[k];
            den = den + st * st;
        }
        let mu = -num / den;
        let res = (0..d.len()).fold(T::zero(), |m, k| m.max((grad[k] + mu * self.size[k]).abs()));
        (mu, res)
    }

    fn collapsing(d: &[T]) -> bool {
        let hi = d.iter().fold(T::zero(), |m, &x| m.max(x));
        d.iter().any(|&x| x < hi * T::of(COLLAPSE))
    }

    /// Local maximum of the exponent at mean weight `delta`, by
    /// Levenberg-Marquardt ascent on the constraint surface in the scaled
    /// coordinates `d_k (1 + p_k)`.
    fn ascend(&self, delta: T, start: &[T], log_x: Option<&[Vec<T>]>) -> Result<Ascent<T>> {
        let k = self.n_classes();
        let f = delta / self.mean_weight(start);
        let mut d: Vec<T> = start.iter().map(|&x| x * f).collect();
        if !d.iter().all(|&x| x > T::zero() && x < T::one()) {
            return Err(Error::NotConverged(format!("start profile cannot carry weight {}", delta)));
        }
        let mut lx = log_x.map_or_else(|| self.initial_log_x(&d), <[_]>::to_vec);
        let mut loc = self.local(&d, &mut lx)?;
        let tol = T::tolerance() * T::of(1e4);
        let mut lam = T::of(1e-3);
        for it in 0..MAX_ITER {
            let (mu, res) = self.multiplier(&d, &loc.grad);
            if res < tol {
                return Ok(Ascent::Converged(self.finish(d, lx, loc.phi, mu, res)));
            }
            let st: Vec<T> = (0..k).map(|i| self.size[i] * d[i]).collect();
            let nrm: T = st.iter().map(|&x| x * x).sum();
            let project = |v: &[T]| -> Vec<T> {
                let dot: T = v.iter().zip(&st).map(|(&a, &b)| a * b).sum();
                v.iter().zip(&st).map(|(&a, &b)| a - b * dot / nrm).collect()
            };
            let gt = project(&(0..k).map(|i| d[i] * loc.grad[i]).collect::<Vec<_>>());
            // -P S H S P
            let mut a: Vec<Vec<T>> =
                (0..k).map(|i| project(&(0..k).map(|j| d[i] * loc.hess[i][j] * d[j]).collect::<Vec<_>>())).collect();
            for j in 0..k {
                let pc = project(&(0..k).map(|i| a[i][j]).collect::<Vec<_>>());
                for i in 0..k {
                    a[i][j] = -pc[i];
                }
            }
            let scale = (0..k).fold(T::zero(), |m, i| m.max(a[i][i].abs())).max(T::tolerance());
            let mut accepted = false;
            while lam < T::of(1e12) {
                let mut m = a.clone();
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = row[i] + lam * (row[i].abs() + scale * T::of(1e-6));
                }
                // only a positive definite shift gives an ascent direction
                if let Some(p) = linalg::cholesky_solve(m, gt.clone()) {
                    let trial: Vec<T> = d.iter().zip(&p).map(|(&x, &q)| x * q.max(T::of(-4.0)).min(T::one()).exp()).collect();
                    let f = delta / self.mean_weight(&trial);
                    let trial: Vec<T> = trial.into_iter().map(|x| x * f).collect();
                    if trial.iter().all(|&x| x > T::zero() && x < T::one()) {
                        let mut tlx = lx.clone();
                        if let Ok(v) = self.phi(&trial, &mut tlx) {
                            let slack = T::tolerance() * T::of(10.0) * (T::one() + loc.phi.abs());
                            if v > loc.phi - slack {
                                let tloc = self.local(&trial, &mut tlx)?;
                                let (_, tres) = self.multiplier(&trial, &tloc.grad);
                                // within rounding of the objective, insist on a smaller gradient
                                if v > loc.phi + slack || tres < res {
                                    d = trial;
                                    lx = tlx;
                                    loc = tloc;
                                    lam = (lam * T::of(0.3)).max(T::of(1e-12));
                                    accepted = true;
                                    break;
                                }
                            }
                        }
                    }
                }
                lam = lam * T::of(4.0);
            }
            let hi = d.iter().fold(T::zero(), |m, &x| m.max(x));
            if Self::collapsing(&d) {
                return Ok(Ascent::Collapsed(d, hi * T::of(COLLAPSE)));
            }
            if it % STALL == STALL - 1 {
                // a slow drift toward the boundary: drop the smallest classes
                let lo = d.iter().fold(T::one(), |m, &x| m.min(x));
                if lo < hi * T::of(DRIFT) {
                    return Ok(Ascent::Collapsed(d, lo * T::of(10.0)));
                }
            }
            if !accepted {
                if res < tol.sqrt() * T::of(1e-2) {
                    // rounding floor
                    return Ok(Ascent::Converged(self.finish(d, lx, loc.phi, mu, res)));
                }
                return Err(Error::NotConverged(format!("ascent stuck, residual {}", res)));
            }
        }
        Err(Error::NotConverged("ascent iteration limit".into()))
    }

    fn finish(&self, d: Vec<T>, log_x: Vec<Vec<T>>, phi: T, mu: T, residual: T) -> Solution<T> {
        let delta = self.mean_weight(&d);
        Solution { face: self.clone(), d, log_x, delta, mu, r: phi / self.norm, residual }
    }
}

/// Spectral shape solver bound to one protograph.
#[derive(Debug, Clone)]
pub struct WeightSpectrum<T> {
    graph: Protograph,
    full: Face<T>,
    /// Extra starting supports: the chains and bridges of a composite graph.
    seeds: Vec<Vec<bool>>,
}

impl<T: Real> WeightSpectrum<T> {
    pub fn new(g: &Protograph) -> Result<Self> {
        if let Some(c) = g.check_degrees().iter().position(|&d| d == 1) {
            return Err(Error::InvalidSpec(format!("check {c} has degree 1; its variable has zero weight")));
        }
        let full = Face::new(g, vec![true; g.n_v]).ok_or(Error::DegenerateGraph)?;
        let mut seeds = Vec::new();
        for name in g.slice_names() {
            let mut support = vec![false; g.n_v];
            for v in g.slice(&name)? {
                support[v] = true;
            }
            seeds.push(support);
        }
        Ok(Self { graph: g.clone(), full, seeds })
    }

    pub fn n_classes(&self) -> usize {
        self.full.n_classes()
    }

    /// Ascent from per-variable fractions on `support`, shrinking the
    /// support whenever classes collapse to zero weight.
    fn solve(&self, delta: T, mut support: Vec<bool>, per_var: &[T], warm: Option<&[Vec<T>]>) -> Result<Solution<T>> {
        let mut per_var = per_var.to_vec();
        let mut warm = warm;
        loop {
            let face = Face::new(&self.graph, support)
                .ok_or_else(|| Error::NotConverged("support collapsed to nothing".into()))?;
            let start = face.restrict(&per_var, delta * T::of(1e-3));
            let lx = warm.filter(|w| w.len() == face.checks.len());
            match face.ascend(delta, &start, lx)? {
                Ascent::Converged(sol) => return Ok(sol),
                Ascent::Collapsed(d, cut) => {
                    per_var = face.per_variable(&d);
                    support = face.support.clone();
                    for v in 0..support.len() {
                        if support[v] && per_var[v] < cut {
                            support[v] = false;
                            per_var[v] = T::zero();
                        }
                    }
                    warm = None;
                }
            }
        }
    }

    /// Best local maximum at `delta` over a warm start, the uniform profile
    /// on the full graph and on each seed support, and the warm solution
    /// re-opened to the full graph.
    fn best_at(&self, delta: T, warm: Option<&Solution<T>>, all_starts: bool) -> Result<Solution<T>> {
        let n = self.graph.n_v;
        let mut best: Option<Solution<T>> = None;
        let mut last_err = None;
        let mut consider = |res: Result<Solution<T>>| match res {
            Ok(s) => {
                if best.as_ref().is_none_or(|b| s.r > b.r) {
                    best = Some(s);
                }
            }
            Err(e) => last_err = Some(e),
        };
        if let Some(w) = warm {
            let pv = w.face.per_variable(&w.d);
            consider(self.solve(delta, w.face.support.clone(), &pv, Some(&w.log_x)));
            if all_starts && w.face.support.iter().any(|&s| !s) {
                consider(self.solve(delta, vec![true; n], &pv, None));
            }
        }
        if all_starts || warm.is_none() {
            let uniform = vec![delta; n];
            consider(self.solve(delta, vec![true; n], &uniform, None));
            for seed in &self.seeds {
                consider(self.solve(delta, seed.clone(), &uniform, None));
            }
        }
        best.ok_or_else(|| last_err.unwrap())
    }

    /// Spectral shape at normalized weight `delta`: the largest local
    /// maximum found from the standard starts and random perturbations.
    /// At `delta = 0` only the all-zero word remains and `mu` is `-inf`.
    pub fn point(&self, delta: T, _cfg: &GrowthConfig) -> Result<SpectralPoint<T>> {
        if delta == T::zero() {
            return Ok(SpectralPoint {
                delta,
                r: T::zero(),
                mu: T::neg_infinity(),
                fractions: vec![T::zero(); self.graph.n_v],
                residual: T::zero(),
            });
        }
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::InvalidParameter(format!("delta {} outside [0,1)", delta)));
        }
        let mut best = self.best_at(delta, None, true)?;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..2 {
            let pv: Vec<T> = best
                .face
                .per_variable(&best.d)
                .iter()
                .map(|&x| (x * T::of(rng.gen_range(0.7..1.4))).max(delta * T::of(1e-3)))
                .collect();
            if let Ok(sol) = self.solve(delta, vec![true; self.graph.n_v], &pv, None) {
                if sol.r > best.r {
                    best = sol;
                }
            }
        }
        Ok(self.to_point(&best))
    }

    fn to_point(&self, sol: &Solution<T>) -> SpectralPoint<T> {
        SpectralPoint {
            delta: sol.delta,
            r: sol.r,
            mu: sol.mu,
            fractions: sol.face.per_variable(&sol.d),
            residual: sol.residual,
        }
    }

    /// Samples `r(delta)` on a grid in `ln delta` from `cfg.delta_start` up
    /// to the first non-negative value (or `delta = 1/2`) and locates the
    /// crossing to `cfg.tol` by regula falsi.
    pub fn shape(&self, cfg: &GrowthConfig) -> Result<SpectralShape<T>> {
        let half = T::of(0.5);
        let mut path = vec![self.best_at(T::of(cfg.delta_start), None, true)?];
        let h = T::of(cfg.log_step);
        while path.last().unwrap().r < T::zero() && path.last().unwrap().delta < half {
            let prev = path.last().unwrap();
            let next = (prev.delta.ln() + h).exp().min(half);
            let sol = self.best_at(next, Some(prev), true)?;
            path.push(sol);
        }
        let mut delta_grid: Vec<T> = path.iter().map(|s| s.delta).collect();
        let mut r_values: Vec<T> = path.iter().map(|s| s.r).collect();
        let last = path.last().unwrap().clone();
        if last.r < T::zero() || path.len() < 2 {
            return Ok(SpectralShape { delta_grid, r_values, delta_min: None });
        }
        let mut neg = path[path.len() - 2].clone();
        let mut pos = last;
        let (mut keep_neg, mut keep_pos) = (0, 0);
        for _ in 0..100 {
            if pos.delta - neg.delta <= T::of(cfg.tol) {
                break;
            }
            // Illinois variant: halve the stale end's value after two repeats
            let rn = if keep_neg >= 2 { neg.r * T::of(0.5).powi(keep_neg - 1) } else { neg.r };
            let rp = if keep_pos >= 2 { pos.r * T::of(0.5).powi(keep_pos - 1) } else { pos.r };
            let mut mid = neg.delta + (pos.delta - neg.delta) * rn / (rn - rp);
            let w = pos.delta - neg.delta;
            mid = mid.max(neg.delta + w * T::of(0.01)).min(pos.delta - w * T::of(0.01));
            let a = self.best_at(mid, Some(&neg), false)?;
            let b = self.best_at(mid, Some(&pos), false);
            let sol = match b {
                Ok(b) if b.r > a.r => b,
                _ => a,
            };
            if sol.r < T::zero() {
                neg = sol;
                keep_pos += 1;
                keep_neg = 0;
            } else {
                pos = sol;
                keep_neg += 1;
                keep_pos = 0;
            }
        }
        let t = neg.r / (neg.r - pos.r);
        let delta_min = neg.delta + t * (pos.delta - neg.delta);
        delta_grid.pop();
        r_values.pop();
        delta_grid.extend([neg.delta, pos.delta]);
        r_values.extend([neg.r, pos.r]);
        Ok(SpectralShape { delta_grid, r_values, delta_min: Some(delta_min) })
    }
}

/// `r(delta)` for protograph `g`.
pub fn spectral_shape<T: Real>(g: &Protograph, delta: T) -> Result<SpectralPoint<T>> {
    WeightSpectrum::new(g)?.point(delta, &GrowthConfig::default())
}

/// Minimum distance growth rate together with the sampled curve.
pub fn growth_rate<T: Real>(g: &Protograph, cfg: &GrowthConfig) -> Result<SpectralShape<T>> {
    WeightSpectrum::new(g)?.shape(cfg)
}

mod linalg {
    use crate::scalar::Real;

    /// Gaussian elimination with partial pivoting.
    pub fn solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
            if !(a[piv][col].abs() > T::zero()) {
                return None;
            }
            a.swap(col, piv);
            b.swap(col, piv);
            let (upper, lower) = a.split_at_mut(col + 1);
            let prow = &upper[col];
            for (i, row) in lower.iter_mut().enumerate() {
                let f = row[col] / prow[col];
                if f != T::zero() {
                    for k in col..n {
                        row[k] = row[k] - f * prow[k];
                    }
                    b[col + 1 + i] = b[col + 1 + i] - f * b[col];
                }
            }
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let s: T = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }

    /// Solves `a x = b` for symmetric `a`; `None` unless `a` is positive definite.
    pub fn cholesky_solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
        let n = b.len();
        for j in 0..n {
            let mut diag = a[j][j];
            for k in 0..j {
                diag = diag - a[j][k] * a[j][k];
            }
            if !(diag > T::zero()) {
                return None;
            }
            let l = diag.sqrt();
            a[j][j] = l;
            for i in j + 1..n {
                let mut v = a[i][j];
                for k in 0..j {
                    v = v - a[i][k] * a[j][k];
                }
                a[i][j] = v / l;
            }
        }
        for i in 0..n {
            let s: T = (0..i).map(|k| a[i][k] * b[k]).sum();
            b[i] = (b[i] - s) / a[i][i];
        }
        for i in (0..n).rev() {
            let s: T = (i + 1..n).map(|k| a[k][i] * b[k]).sum();
            b[i] = (b[i] - s) / a[i][i];
        }
        b.iter().all(|v| v.is_finite()).then_some(b)
    }

    pub fn inverse<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
        let n = a.len();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            cols.push(solve(a.to_vec(), e)?);
        }
        Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protograph::{build_chain, Protograph};

    fn regular() -> Protograph {
        Protograph::from_base_matrix(&[vec![3, 3]]).unwrap()
    }

    /// Classical (3,6)-regular spectral shape, solved independently.
    fn regular_oracle(delta: f64) -> f64 {
        let frac = |x: f64| x * ((1.0 + x).powi(5) - (1.0 - x).powi(5)) / ((1.0 + x).powi(6) + (1.0 - x).powi(6));
        let (mut lo, mut hi) = (1e-12, 1.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if frac(m) < delta {
                lo = m
            } else {
                hi = m
            }
        }
        let x = 0.5 * (lo + hi);
        let h = -(delta * delta.ln() + (1.0 - delta) * (1.0 - delta).ln());
        -2.0 * h + 0.5 * (((1.0 + x).powi(6) + (1.0 - x).powi(6)) / 2.0).ln() - 3.0 * delta * x.ln()
    }

    #[test]
    fn saddle_matches_regular_tilt() {
        let w = [0.05; 6];
        let mut u = [0.0f64; 6];
        let s = check_saddle(&w, &mut u).unwrap();
        let x = u[0].exp();
        let frac = x * ((1.0 + x).powi(5) - (1.0 - x).powi(5)) / ((1.0 + x).powi(6) + (1.0 - x).powi(6));
        assert!((frac - 0.05).abs() < 1e-12);
        assert!(s.gradient_residual < 1e-12);
    }

    #[test]
    fn saddle_rejects_infeasible() {
        let mut u = [0.0; 3];
        assert!(check_saddle(&[0.3, 0.1, 0.1], &mut u).is_err());
    }

    #[test]
    fn regular_matches_oracle() {
        let ws = WeightSpectrum::<f64>::new(&regular()).unwrap();
        for &delta in &[0.005, 0.02, 0.05, 0.1, 0.2] {
            let p = ws.point(delta, &GrowthConfig::default()).unwrap();
            let oracle = regular_oracle(delta);
            assert!((p.r - oracle).abs() < 1e-6, "delta {delta}: {} vs {oracle}", p.r);
            assert!(p.residual < 1e-8);
        }
    }

    #[test]
    fn regular_growth_rate() {
        let s = growth_rate::<f64>(&regular(), &GrowthConfig::default()).unwrap();
        let dm = s.delta_min.unwrap();
        // zero of the oracle by bisection
        let (mut lo, mut hi) = (1e-3, 0.1);
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if regular_oracle(m) < 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        assert!((dm - lo).abs() < 1e-6, "{dm} vs {lo}");
        assert!(s.r_values[..s.r_values.len() - 1].iter().all(|&r| r < 0.0));
    }

    #[test]
    fn chain_is_asymptotically_good() {
        let g = build_chain(3, 6, 6).unwrap();
        let s = growth_rate::<f64>(&g, &GrowthConfig::default()).unwrap();
        let dm = s.delta_min.unwrap();
        // lower rate than the uncoupled ensemble, so a larger distance ratio
        assert!(dm > 0.0227 && dm < 0.17, "{dm}");
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let g = crate::protograph::build_connected(8).unwrap();
        let ws = WeightSpectrum::<f64>::new(&g).unwrap().full;
        let k = ws.n_classes();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d: Vec<f64> = (0..k).map(|_| 0.02 * rng.gen_range(0.8..1.2)).collect();
        let mut lx = ws.initial_log_x(&d);
        let l0 = ws.local(&d, &mut lx).unwrap();
        assert!((ws.phi(&d, &mut lx).unwrap() - l0.phi).abs() < 1e-12);
        let mut worst: f64 = 0.0;
        for j in 0..k {
            let h = 1e-6 * d[j];
            let (mut up, mut down) = (d.clone(), d.clone());
            up[j] += h;
            down[j] -= h;
            let mut lx2 = lx.clone();
            let lu = ws.local(&up, &mut lx2).unwrap();
            let ld = ws.local(&down, &mut lx2).unwrap();
            let fd_phi = (lu.phi - ld.phi) / (2.0 * h);
            worst = worst.max((fd_phi - l0.grad[j]).abs() / (1.0 + l0.grad[j].abs()));
            for i in 0..k {
                let fd = (lu.grad[i] - ld.grad[i]) / (2.0 * h);
                worst = worst.max((fd - l0.hess[i][j]).abs() / (1.0 + l0.hess[i][j].abs()));
            }
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn degree_one_check_rejected() {
        let g = Protograph::from_base_matrix(&[vec![1, 0], vec![1, 1], vec![1, 1], vec![0, 1]]).unwrap();
        assert!(WeightSpectrum::<f64>::new(&g).is_err());
    }

    #[test]
    fn invalid_delta() {
        assert!(spectral_shape::<f64>(&regular(), -0.01).is_err());
        assert!(spectral_shape::<f64>(&regular(), 1.0).is_err());
        assert_eq!(spectral_shape::<f64>(&regular(), 0.0).unwrap().r, 0.0);
    }
}
