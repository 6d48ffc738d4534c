//! Discretized density evolution for the binary-input AWGN channel.
//!
//! Messages are log-likelihood ratios quantized to a uniform grid with step
//! `delta` on `[-l_max, l_max]`; the two end points absorb everything
//! beyond them. The all-zero codeword is assumed.
//!
//! Variable nodes add LLRs, so their densities convolve. All inputs of a
//! node are multiplied in the Fourier domain and the sum is folded onto the
//! grid once at the end. Check nodes combine pairs of inputs with the
//! quantized `boxplus` table, folding left over the inputs that remain
//! after removing the target edge.
//!
//! The table has a useful structure. Away from a band around the diagonal,
//! `a boxplus b` rounds to `min(|a|, |b|)`, and inside the band the output
//! changes only a few times along a row. Each row is therefore stored as
//! runs of constant output, and the mass of a run is one difference of
//! prefix sums.
//!
//! Density evolution runs on the coarsest equitable partition of the
//! protograph ([`crate::symmetry`]), which leaves the result unchanged.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftNum, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protograph::Protograph;
use crate::scalar::Real;
use crate::symmetry::{equitable_partition, Quotient};

/// Error probability of a variable class and its outgoing edge densities.
type VarUpdate<T> = (T, Vec<(usize, QuantDensity<T>)>);

/// Entries below this are flushed to zero after every update.
const FLUSH: f64 = 1e-30;
/// Largest tolerated loss of probability mass in a single update.
const LEAK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantConfig {
    pub delta: f64,
    pub l_max: f64,
}

impl Default for QuantConfig {
    fn default() -> Self {
        Self { delta: 1.0 / 32.0, l_max: 25.0 }
    }
}

impl QuantConfig {
    /// Number of grid steps between 0 and `l_max`.
    pub fn half(&self) -> Result<usize> {
        if !(self.delta > 0.0 && self.l_max > 0.0 && self.delta.is_finite() && self.l_max.is_finite()) {
            return Err(Error::Quantization(format!("invalid grid {self:?}")));
        }
        let h = (self.l_max / self.delta).round();
        if h < 1.0 || (h * self.delta - self.l_max).abs() > 1e-9 * self.l_max {
            return Err(Error::Quantization(format!("l_max {} is not a multiple of delta {}", self.l_max, self.delta)));
        }
        Ok(h as usize)
    }

    pub fn halved(&self) -> Self {
        Self { delta: self.delta / 2.0, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AwgnChannelParams {
    pub ebn0_db: f64,
    pub rate: f64,
}

impl AwgnChannelParams {
    pub fn new(ebn0_db: f64, rate: f64) -> Result<Self> {
        if ebn0_db.is_nan() || ebn0_db == f64::NEG_INFINITY || !(rate > 0.0 && rate < 1.0) {
            return Err(Error::InvalidParameter(format!("Eb/N0 {ebn0_db} dB at rate {rate}")));
        }
        Ok(Self { ebn0_db, rate })
    }

    /// Noise variance `1 / (2 R Eb/N0)`.
    pub fn sigma2(&self) -> f64 {
        1.0 / (2.0 * self.rate * 10f64.powf(self.ebn0_db / 10.0))
    }
}

/// Probability mass function over the quantized LLR grid. Bin `i` holds
/// the LLR `(i - half) * delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantDensity<T> {
    pub delta: T,
    pub half: usize,
    pub pmf: Vec<T>,
}

impl<T: Real> QuantDensity<T> {
    pub fn point_mass(q: &QuantConfig, llr_bin: isize) -> Result<Self> {
        let half = q.half()?;
        let i = (llr_bin + half as isize).clamp(0, 2 * half as isize) as usize;
        let mut pmf = vec![T::zero(); 2 * half + 1];
        pmf[i] = T::one();
        Ok(Self { delta: T::of(q.delta), half, pmf })
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn llr(&self, i: usize) -> T {
        T::of(i as f64 - self.half as f64) * self.delta
    }

    pub fn mass(&self) -> T {
        self.pmf.iter().copied().sum()
    }

    /// Mass below zero plus half the mass at zero.
    pub fn error_probability(&self) -> T {
        let below: T = self.pmf[..self.half].iter().copied().sum();
        below + self.pmf[self.half] * T::of(0.5)
    }

    pub fn mean(&self) -> T {
        self.pmf.iter().enumerate().map(|(i, &p)| p * self.llr(i)).sum()
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        self.pmf.iter().enumerate().map(|(i, &p)| p * (self.llr(i) - m).powi(2)).sum()
    }
}

/// Standard normal mass on `[a, b]`, evaluated on the tail side for accuracy.
fn normal_mass(a: f64, b: f64) -> f64 {
    let upper = |z: f64| 0.5 * libm::erfc(z / std::f64::consts::SQRT_2);
    if a >= 0.0 {
        upper(a) - upper(b)
    } else if b <= 0.0 {
        upper(-b) - upper(-a)
    } else {
        1.0 - upper(-a) - upper(b)
    }
}

/// Channel LLR density `N(2/sigma^2, 4/sigma^2)` integrated over the bins.
pub fn channel_density<T: Real>(params: &AwgnChannelParams, q: &QuantConfig) -> Result<QuantDensity<T>> {
    let half = q.half()?;
    let n = 2 * half + 1;
    let s2 = params.sigma2();
    if s2 == 0.0 {
        return QuantDensity::point_mass(q, half as isize);
    }
    let mean = 2.0 / s2;
    if q.delta > mean / 4.0 {
        return Err(Error::Quantization(format!("step {} too coarse for mean LLR {mean}", q.delta)));
    }
    let sd = (2.0 * mean).sqrt();
    let z = |x: f64| (x - mean) / sd;
    let pmf = (0..n)
        .map(|i| {
            let x = (i as f64 - half as f64) * q.delta;
            let lo = if i == 0 { f64::NEG_INFINITY } else { z(x - q.delta / 2.0) };
            let hi = if i == n - 1 { f64::INFINITY } else { z(x + q.delta / 2.0) };
            T::of(normal_mass(lo, hi).max(0.0))
        })
        .collect();
    Ok(QuantDensity { delta: T::of(q.delta), half, pmf })
}

/// A density split by sign over magnitude bins `0..=half`; the zero bin is
/// kept in `plus[0]`.
#[derive(Debug, Clone)]
struct Folded<T> {
    plus: Vec<T>,
    minus: Vec<T>,
}

impl<T: Real> Folded<T> {
    fn from_density(d: &QuantDensity<T>) -> Self {
        let h = d.half;
        let plus = d.pmf[h..].to_vec();
        let mut minus: Vec<T> = (0..=h).map(|m| d.pmf[h - m]).collect();
        minus[0] = T::zero();
        Self { plus, minus }
    }

    fn to_density(&self, delta: T) -> QuantDensity<T> {
        let h = self.plus.len() - 1;
        let mut pmf = vec![T::zero(); 2 * h + 1];
        for m in 0..=h {
            pmf[h + m] = pmf[h + m] + self.plus[m];
            pmf[h - m] = pmf[h - m] + self.minus[m];
        }
        QuantDensity { delta, half: h, pmf }
    }
}

/// Quantized magnitude table for `boxplus`.
///
/// For `b >= a` the quantized value of `a boxplus b` is non-decreasing in
/// `b` and reaches `a` a short distance from the diagonal, so each row is
/// stored as a handful of runs of constant output. A run then costs one
/// difference of prefix sums instead of a pass over its partners.
#[derive(Debug, Clone)]
pub struct BoxplusTable {
    half: usize,
    band: usize,
    row_start: Vec<usize>,
    /// `(end, output)` per run; a run of row `a` covers partners from the
    /// previous end (or `a`) up to `end`, exclusive.
    runs: Vec<(u32, u32)>,
}

/// Exact `boxplus` of two non-negative LLR magnitudes.
fn boxplus_magnitude(x: f64, y: f64) -> f64 {
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    lo + (-(lo + hi)).exp().ln_1p() - (-(hi - lo)).exp().ln_1p()
}

impl BoxplusTable {
    pub fn new(q: &QuantConfig) -> Result<Self> {
        let half = q.half()?;
        let index = |a: usize, b: usize| -> usize {
            let v = boxplus_magnitude(a as f64 * q.delta, b as f64 * q.delta) / q.delta;
            (v.round().max(0.0) as usize).min(a.min(b))
        };
        let mut band = 0;
        let mut row_start = Vec::with_capacity(half + 2);
        let mut runs = Vec::new();
        for a in 0..=half {
            row_start.push(runs.len());
            let mut k = index(a, a);
            for b in a + 1..=half {
                let next = index(a, b);
                if next != k {
                    runs.push((b as u32, k as u32));
                    k = next;
                }
                if k == a {
                    band = band.max(b - a);
                    break;
                }
            }
            runs.push((half as u32 + 1, k as u32));
        }
        row_start.push(runs.len());
        Ok(Self { half, band, row_start, runs })
    }

    /// Largest distance from the diagonal at which the result is not `min`.
    pub fn band(&self) -> usize {
        self.band
    }

    /// Quantized magnitude index of `a boxplus b`.
    pub fn lookup(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let row = &self.runs[self.row_start[a]..self.row_start[a + 1]];
        row.iter().find(|&&(end, _)| b < end as usize).map_or(a, |&(_, k)| k as usize)
    }

    fn combine<T: Real>(&self, x: &Folded<T>, y: &Folded<T>) -> Folded<T> {
        let h = self.half;
        let mut plus = vec![T::zero(); h + 1];
        let mut minus = vec![T::zero(); h + 1];
        let prefix = |v: &[T]| {
            let mut s = vec![T::zero(); v.len() + 1];
            for i in 0..v.len() {
                s[i + 1] = s[i] + v[i];
            }
            s
        };
        let (xp_s, xm_s, yp_s, ym_s) = (prefix(&x.plus), prefix(&x.minus), prefix(&y.plus), prefix(&y.minus));
        for a in 0..=h {
            let (xp, xm) = (x.plus[a], x.minus[a]);
            let (yp, ym) = (y.plus[a], y.minus[a]);
            let x_live = xp != T::zero() || xm != T::zero();
            let y_live = yp != T::zero() || ym != T::zero();
            if !x_live && !y_live {
                continue;
            }
            let mut from = a;
            for &(end, k) in &self.runs[self.row_start[a]..self.row_start[a + 1]] {
                let (end, k) = (end as usize, k as usize);
                // x at the smaller magnitude a, y at partners in [from, end)
                if x_live {
                    let (sp, sm) = (yp_s[end] - yp_s[from], ym_s[end] - ym_s[from]);
                    plus[k] = plus[k] + xp * sp + xm * sm;
                    minus[k] = minus[k] + xp * sm + xm * sp;
                }
                // y at a, x strictly above a so the diagonal counts once
                let lo = from.max(a + 1);
                if y_live && lo < end {
                    let (sp, sm) = (xp_s[end] - xp_s[lo], xm_s[end] - xm_s[lo]);
                    plus[k] = plus[k] + yp * sp + ym * sm;
                    minus[k] = minus[k] + yp * sm + ym * sp;
                }
                from = end;
            }
        }
        // a zero magnitude has no sign
        plus[0] = plus[0] + minus[0];
        minus[0] = T::zero();
        for v in plus.iter_mut().chain(minus.iter_mut()) {
            *v = v.max(T::zero());
        }
        Folded { plus, minus }
    }

    /// `boxplus` of two densities on the same grid.
    pub fn boxplus<T: Real>(&self, x: &QuantDensity<T>, y: &QuantDensity<T>) -> Result<QuantDensity<T>> {
        if x.half != self.half || y.half != self.half {
            return Err(Error::Quantization("density grid does not match the table".into()));
        }
        Ok(self.combine(&Folded::from_density(x), &Folded::from_density(y)).to_density(x.delta))
    }
}

/// Fourier-domain sums of LLRs with saturation at the grid ends.
struct Convolver<T: FftNum> {
    size: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real + FftNum> Convolver<T> {
    /// Room for linear sums of up to `terms` densities of `n` bins.
    fn new(n: usize, terms: usize) -> Self {
        let size = (terms * (n - 1) + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self { size, forward: planner.plan_fft_forward(size), inverse: planner.plan_fft_inverse(size) }
    }

    fn spectrum(&self, d: &QuantDensity<T>) -> Vec<Complex<T>> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.size];
        for (b, &p) in buf.iter_mut().zip(&d.pmf) {
            b.re = p;
        }
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform of a product of `terms` spectra, folded back onto
    /// the grid of `proto`.
    fn density(&self, mut buf: Vec<Complex<T>>, terms: usize, proto: &QuantDensity<T>) -> Result<QuantDensity<T>> {
        self.inverse.process(&mut buf);
        let scale = T::one() / T::of(self.size as f64);
        let n = proto.len();
        let shift = (terms - 1) * proto.half;
        let mut pmf = vec![T::zero(); n];
        let mut total = T::zero();
        for (s, c) in buf.iter().enumerate().take(terms * (n - 1) + 1) {
            let p = (c.re * scale).max(T::zero());
            total = total + p;
            let o = s.saturating_sub(shift).min(n - 1);
            pmf[o] = pmf[o] + p;
        }
        if (total - T::one()).abs().as_f64() > LEAK {
            return Err(Error::Quantization(format!("variable node lost mass {}", (total - T::one()).as_f64())));
        }
        for p in &mut pmf {
            *p = if p.as_f64() < FLUSH { T::zero() } else { *p / total };
        }
        Ok(QuantDensity { delta: proto.delta, half: proto.half, pmf })
    }
}

fn flush<T: Real>(d: &mut QuantDensity<T>) -> Result<()> {
    let total = d.mass();
    if (total - T::one()).abs().as_f64() > LEAK {
        return Err(Error::Quantization(format!("check node lost mass {}", (total - T::one()).as_f64())));
    }
    for p in &mut d.pmf {
        *p = if p.as_f64() < FLUSH { T::zero() } else { *p / total };
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwgnRunConfig {
    pub max_iterations: usize,
    /// Converged once every variable's error probability is below this.
    pub pe_target: f64,
    /// Stop early when `sum Pe` decreases by a relative amount below
    /// `stall_epsilon` over `stall_window` iterations.
    pub stall_epsilon: f64,
    pub stall_window: usize,
}

impl Default for AwgnRunConfig {
    fn default() -> Self {
        Self { max_iterations: 2000, pe_target: 1e-9, stall_epsilon: 1e-9, stall_window: 50 }
    }
}

/// Flooding density evolution on the quotient graph.
pub struct AwgnEvolution<T: FftNum> {
    quotient: Quotient,
    table: Arc<BoxplusTable>,
    conv: Convolver<T>,
    channel: QuantDensity<T>,
    channel_spectrum: Vec<Complex<T>>,
    v2c: Vec<QuantDensity<T>>,
    c2v: Vec<QuantDensity<T>>,
    /// Error probability per variable class.
    pe: Vec<T>,
    pub iteration: usize,
}

impl<T: Real + FftNum> AwgnEvolution<T> {
    pub fn new(g: &Protograph, params: &AwgnChannelParams, q: &QuantConfig) -> Result<Self> {
        let table = Arc::new(BoxplusTable::new(q)?);
        Self::with_table(g, params, q, table)
    }

    /// Reuses a table built for the same grid.
    pub fn with_table(g: &Protograph, params: &AwgnChannelParams, q: &QuantConfig, table: Arc<BoxplusTable>) -> Result<Self> {
        let channel = channel_density::<T>(params, q)?;
        if table.half != channel.half {
            return Err(Error::Quantization("boxplus table built for another grid".into()));
        }
        let quotient = equitable_partition(g);
        let max_deg = quotient.var_edges.iter().map(|e| e.iter().map(|x| x.1).sum::<usize>()).max().unwrap_or(0);
        let conv = Convolver::new(channel.len(), max_deg + 1);
        let channel_spectrum = conv.spectrum(&channel);
        let ne = quotient.n_edge_classes();
        let pe0 = channel.error_probability();
        let c2v = vec![QuantDensity::point_mass(q, 0)?; ne];
        Ok(Self {
            pe: vec![pe0; quotient.n_var_classes()],
            v2c: vec![channel.clone(); ne],
            c2v,
            quotient,
            table,
            conv,
            channel,
            channel_spectrum,
            iteration: 0,
        })
    }

    pub fn quotient(&self) -> &Quotient {
        &self.quotient
    }

    /// Error probability of every protograph variable.
    pub fn pe(&self) -> Vec<T> {
        self.quotient.var_class.iter().map(|&k| self.pe[k]).collect()
    }

    pub fn max_pe(&self) -> T {
        self.pe.iter().fold(T::zero(), |m, &x| m.max(x))
    }

    fn check_update(&self, edges: &[(usize, usize)]) -> Result<Vec<(usize, QuantDensity<T>)>> {
        let inputs: Vec<Folded<T>> = edges.iter().map(|&(e, _)| Folded::from_density(&self.v2c[e])).collect();
        edges
            .iter()
            .enumerate()
            .map(|(skip, &(e, _))| {
                let mut acc: Option<Folded<T>> = None;
                for (i, &(_, count)) in edges.iter().enumerate() {
                    let uses = if i == skip { count - 1 } else { count };
                    for _ in 0..uses {
                        acc = Some(match acc {
                            None => inputs[i].clone(),
                            Some(a) => self.table.combine(&a, &inputs[i]),
                        });
                    }
                }
                // a degree-1 check sends nothing
                let mut out = match acc {
                    Some(f) => f.to_density(self.channel.delta),
                    None => QuantDensity { delta: self.channel.delta, half: self.channel.half, pmf: point(self.channel.len(), self.channel.half) },
                };
                flush(&mut out)?;
                Ok((e, out))
            })
            .collect()
    }

    fn var_update(&self, edges: &[(usize, usize)]) -> Result<VarUpdate<T>> {
        let spectra: Vec<Vec<Complex<T>>> = edges.iter().map(|&(e, _)| self.conv.spectrum(&self.c2v[e])).collect();
        let product = |skip: Option<usize>| -> (Vec<Complex<T>>, usize) {
            let mut acc = self.channel_spectrum.clone();
            let mut terms = 1;
            for (i, &(_, count)) in edges.iter().enumerate() {
                let uses = if Some(i) == skip { count - 1 } else { count };
                for _ in 0..uses {
                    for (a, s) in acc.iter_mut().zip(&spectra[i]) {
                        *a = *a * *s;
                    }
                }
                terms += uses;
            }
            (acc, terms)
        };
        let (full, terms) = product(None);
        let pe = self.conv.density(full, terms, &self.channel)?.error_probability();
        let out = (0..edges.len())
            .map(|i| {
                let (buf, terms) = product(Some(i));
                Ok((edges[i].0, self.conv.density(buf, terms, &self.channel)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((pe, out))
    }

    /// One flooding iteration: all checks, then all variables.
    pub fn step(&mut self) -> Result<()> {
        let c_out = self
            .quotient
            .check_edges
            .par_iter()
            .map(|edges| self.check_update(edges))
            .collect::<Result<Vec<_>>>()?;
        for (e, d) in c_out.into_iter().flatten() {
            self.c2v[e] = d;
        }
        let v_out =
            self.quotient.var_edges.par_iter().map(|edges| self.var_update(edges)).collect::<Result<Vec<_>>>()?;
        for (k, (pe, outs)) in v_out.into_iter().enumerate() {
            self.pe[k] = pe;
            for (e, d) in outs {
                self.v2c[e] = d;
            }
        }
        self.iteration += 1;
        Ok(())
    }
}

fn point<T: Real>(n: usize, at: usize) -> Vec<T> {
    let mut v = vec![T::zero(); n];
    v[at] = T::one();
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwgnReport {
    pub converged: bool,
    pub iterations: usize,
    /// Largest variable error probability after each iteration, starting
    /// with the channel.
    pub max_pe_trace: Vec<f64>,
    pub pe: Vec<f64>,
}

/// Runs density evolution at one channel parameter.
pub fn de_awgn_run<T: Real + FftNum>(
    g: &Protograph,
    params: &AwgnChannelParams,
    q: &QuantConfig,
    run: &AwgnRunConfig,
) -> Result<AwgnReport> {
    let table = Arc::new(BoxplusTable::new(q)?);
    run_with_table::<T>(g, params, q, run, table)
}

fn run_with_table<T: Real + FftNum>(
    g: &Protograph,
    params: &AwgnChannelParams,
    q: &QuantConfig,
    run: &AwgnRunConfig,
    table: Arc<BoxplusTable>,
) -> Result<AwgnReport> {
    if run.max_iterations == 0 || run.stall_window == 0 || !(run.pe_target > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid run config {run:?}")));
    }
    let mut de = AwgnEvolution::<T>::with_table(g, params, q, table)?;
    let target = T::of(run.pe_target);
    let weights: Vec<T> = de.quotient.var_size.iter().map(|&s| T::of(s as f64)).collect();
    let total = |de: &AwgnEvolution<T>| de.pe.iter().zip(&weights).map(|(&p, &w)| p * w).sum::<T>().as_f64();
    let mut trace = vec![de.max_pe().as_f64()];
    let mut history = std::collections::VecDeque::new();
    let mut converged = de.max_pe() < target;
    while !converged && de.iteration < run.max_iterations {
        de.step()?;
        trace.push(de.max_pe().as_f64());
        converged = de.max_pe() < target;
        let now = total(&de);
        history.push_back(now);
        if history.len() > run.stall_window {
            let old = history.pop_front().unwrap_or(now);
            if old - now <= run.stall_epsilon * now {
                break;
            }
        }
    }
    Ok(AwgnReport {
        converged,
        iterations: de.iteration,
        max_pe_trace: trace,
        pe: de.pe().iter().map(|x| x.as_f64()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwgnSearch {
    pub low_db: f64,
    pub high_db: f64,
    pub tol_db: f64,
    pub run: AwgnRunConfig,
}

impl Default for AwgnSearch {
    fn default() -> Self {
        Self { low_db: 0.0, high_db: 3.0, tol_db: 0.01, run: AwgnRunConfig::default() }
    }
}

/// Eb/N0 threshold in dB by bisection, evaluated at the design rate of `g`.
/// Returns the midpoint of the final bracket.
pub fn threshold_awgn<T: Real + FftNum>(g: &Protograph, q: &QuantConfig, search: &AwgnSearch) -> Result<f64> {
    if !(search.tol_db > 0.0 && search.low_db < search.high_db) {
        return Err(Error::InvalidParameter(format!("invalid search {search:?}")));
    }
    let rate = *g.design_rate()?.numer() as f64 / *g.design_rate()?.denom() as f64;
    let table = Arc::new(BoxplusTable::new(q)?);
    let converges = |db: f64| -> Result<bool> {
        let p = AwgnChannelParams::new(db, rate)?;
        Ok(run_with_table::<T>(g, &p, q, &search.run, table.clone())?.converged)
    };
    let (mut lo, mut hi) = (search.low_db, search.high_db);
    if converges(lo)? || !converges(hi)? {
        return Err(Error::BadBracket { low: lo, high: hi });
    }
    while hi - lo > search.tol_db {
        let mid = 0.5 * (lo + hi);
        if converges(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Thresholds of several ensembles, computed in parallel.
pub fn thresholds_awgn<T: Real + FftNum>(graphs: &[Protograph], q: &QuantConfig, search: &AwgnSearch) -> Vec<Result<f64>> {
    graphs.par_iter().map(|g| threshold_awgn::<T>(g, q, search)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuantConfig {
        QuantConfig::default()
    }

    #[test]
    fn channel_moments() {
        let p = AwgnChannelParams::new(0.0, 0.5).unwrap();
        assert!((p.sigma2() - 1.0).abs() < 1e-15);
        let d = channel_density::<f64>(&p, &q()).unwrap();
        assert!((d.mass() - 1.0).abs() < 1e-12);
        assert!((d.mean() - 2.0).abs() < q().delta);
        // uniform quantization adds delta^2 / 12 to the variance
        assert!((d.variance() - 4.0).abs() < q().delta);
    }

    #[test]
    fn noiseless_channel_is_a_point_mass() {
        let p = AwgnChannelParams::new(f64::INFINITY, 0.5).unwrap();
        let d = channel_density::<f64>(&p, &q()).unwrap();
        assert_eq!(d.pmf[d.len() - 1], 1.0);
    }

    #[test]
    fn coarse_grid_rejected() {
        let p = AwgnChannelParams::new(-15.0, 0.5).unwrap();
        assert!(matches!(channel_density::<f64>(&p, &q()), Err(Error::Quantization(_))));
    }

    #[test]
    fn band_matches_direct_table() {
        let cfg = QuantConfig { delta: 0.25, l_max: 10.0 };
        let t = BoxplusTable::new(&cfg).unwrap();
        let h = cfg.half().unwrap();
        for a in 0..=h {
            for b in 0..=h {
                let v = boxplus_magnitude(a as f64 * 0.25, b as f64 * 0.25) / 0.25;
                assert_eq!(t.lookup(a, b), (v.round() as usize).min(a.min(b)), "{a} {b}");
            }
        }
        assert!(t.band() < h / 2);
    }

    #[test]
    fn perfect_knowledge_is_neutral() {
        let p = AwgnChannelParams::new(1.0, 0.5).unwrap();
        let d = channel_density::<f64>(&p, &q()).unwrap();
        let top = QuantDensity::<f64>::point_mass(&q(), d.half as isize).unwrap();
        let t = BoxplusTable::new(&q()).unwrap();
        let out = t.boxplus(&d, &top).unwrap();
        // l_max itself bends values near the top by less than a bin
        let moved: f64 = d.pmf.iter().zip(&out.pmf).map(|(a, b)| (a - b).abs()).sum();
        assert!(moved < 1e-9, "moved {moved}");
    }

    #[test]
    fn boxplus_with_erasure_gives_erasure() {
        let p = AwgnChannelParams::new(1.0, 0.5).unwrap();
        let d = channel_density::<f64>(&p, &q()).unwrap();
        let zero = QuantDensity::<f64>::point_mass(&q(), 0).unwrap();
        let t = BoxplusTable::new(&q()).unwrap();
        let out = t.boxplus(&d, &zero).unwrap();
        assert!((out.pmf[out.half] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_run_converges_at_once() {
        let g = crate::protograph::build_chain(3, 6, 6).unwrap();
        let p = AwgnChannelParams::new(f64::INFINITY, 1.0 / 3.0).unwrap();
        let r = de_awgn_run::<f64>(&g, &p, &q(), &AwgnRunConfig::default()).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 1);
    }
}
