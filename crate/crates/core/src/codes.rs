//! Lifted parity-check matrices and Monte Carlo peeling on the BEC.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protograph::Protograph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftMode {
    RandomPermutation,
    Circulant,
}

/// Sparse binary matrix kept both by rows and by columns; indices sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCheck {
    pub n_rows: usize,
    pub n_cols: usize,
    pub rows: Vec<Vec<u32>>,
    pub cols: Vec<Vec<u32>>,
}

impl ParityCheck {
    /// Builds from `(row, col)` positions; duplicates are an error.
    pub fn from_entries(n_rows: usize, n_cols: usize, entries: &[(usize, usize)]) -> Result<Self> {
        let mut rows = vec![Vec::new(); n_rows];
        let mut cols = vec![Vec::new(); n_cols];
        for &(r, c) in entries {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidParameter(format!("entry ({r},{c}) outside {n_rows}x{n_cols}")));
            }
            rows[r].push(c as u32);
            cols[c].push(r as u32);
        }
        for list in rows.iter_mut().chain(cols.iter_mut()) {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter("repeated entry in parity-check matrix".into()));
            }
        }
        Ok(Self { n_rows, n_cols, rows, cols })
    }

    pub fn column_weights(&self) -> Vec<usize> {
        self.cols.iter().map(Vec::len).collect()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn write_alist<W: Write>(&self, mut w: W) -> Result<()> {
        let max_c = self.cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_r = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        writeln!(w, "{} {}", self.n_cols, self.n_rows)?;
        writeln!(w, "{max_c} {max_r}")?;
        let join = |v: Vec<String>| v.join(" ");
        writeln!(w, "{}", join(self.cols.iter().map(|c| c.len().to_string()).collect()))?;
        writeln!(w, "{}", join(self.rows.iter().map(|r| r.len().to_string()).collect()))?;
        for (lists, width) in [(&self.cols, max_c), (&self.rows, max_r)] {
            for l in lists {
                let mut f: Vec<String> = l.iter().map(|&i| (i + 1).to_string()).collect();
                f.resize(width, "0".into());
                writeln!(w, "{}", join(f))?;
            }
        }
        Ok(())
    }

    pub fn read_alist<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(s) if s.trim().is_empty() => None,
            other => Some((i + 1, other)),
        });
        let mut next = |want: Option<usize>| -> Result<(usize, Vec<usize>)> {
            let (no, line) = lines.next().ok_or(Error::Parse { line: 0, msg: "unexpected end of alist".into() })?;
            let nums = line?
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse { line: no, msg: e.to_string() }))
                .collect::<Result<Vec<_>>>()?;
            if want.is_some_and(|n| nums.len() != n) {
                return Err(Error::Parse { line: no, msg: format!("expected {} numbers", want.unwrap_or(0)) });
            }
            Ok((no, nums))
        };
        let (_, dims) = next(Some(2))?;
        let (n_cols, n_rows) = (dims[0], dims[1]);
        let (_, maxw) = next(Some(2))?;
        let (_, col_w) = next(Some(n_cols))?;
        let (_, row_w) = next(Some(n_rows))?;
        let mut entries = Vec::new();
        for (c, &wc) in col_w.iter().enumerate() {
            let (no, l) = next(None)?;
            let idx: Vec<usize> = l.into_iter().filter(|&x| x != 0).collect();
            if idx.len() != wc || wc > maxw[0] {
                return Err(Error::Parse { line: no, msg: format!("column {} weight mismatch", c + 1) });
            }
            entries.extend(idx.into_iter().map(|r| (r - 1, c)));
        }
        let h = Self::from_entries(n_rows, n_cols, &entries)?;
        for (r, &wr) in row_w.iter().enumerate() {
            let (no, l) = next(None)?;
            let idx: Vec<u32> = l.into_iter().filter(|&x| x != 0).map(|x| x as u32 - 1).collect();
            if idx.len() != wr || wr > maxw[1] || {
                let mut s = idx.clone();
                s.sort_unstable();
                s != h.rows[r]
            } {
                return Err(Error::Parse { line: no, msg: format!("row {} disagrees with the column lists", r + 1) });
            }
        }
        Ok(h)
    }
}

/// How one protograph edge was expanded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLift {
    pub check: usize,
    pub variable: usize,
    /// Lifted row `check * m + r` meets column `variable * m + perm[r]`.
    pub perm: Vec<u32>,
    /// Shift when the block is circulant.
    pub shift: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedCode {
    pub h: ParityCheck,
    pub m: usize,
    pub mode: LiftMode,
    pub seed: u64,
    pub provenance: Vec<EdgeLift>,
}

/// `M`-fold lift of `g`. Parallel edges of one block receive permutations
/// that never coincide, so the block is a sum of disjoint permutation
/// matrices.
pub fn lift(g: &Protograph, m: usize, mode: LiftMode, seed: u64) -> Result<LiftedCode> {
    if m == 0 {
        return Err(Error::InvalidParameter("lifting factor must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
    for (e, &(c, v)) in g.edges.iter().enumerate() {
        blocks.entry((c, v)).or_default().push(e);
    }
    let mut shifts = vec![None; g.edges.len()];
    let mut perms: Vec<Vec<u32>> = vec![Vec::new(); g.edges.len()];
    for (&(c, v), edges) in &blocks {
        if edges.len() > m {
            return Err(Error::InvalidParameter(format!("block ({c},{v}) has {} edges, more than m = {m}", edges.len())));
        }
        match mode {
            LiftMode::Circulant => {
                let mut all: Vec<usize> = (0..m).collect();
                let (picked, _) = all.partial_shuffle(&mut rng, edges.len());
                for (&e, &s) in edges.iter().zip(picked.iter()) {
                    shifts[e] = Some(s);
                }
            }
            LiftMode::RandomPermutation => {
                let mut sigma: Vec<u32> = (0..m as u32).collect();
                sigma.shuffle(&mut rng);
                if edges.len() == 1 {
                    perms[edges[0]] = sigma;
                } else {
                    // r -> sigma(tau(r) + i): disjoint for distinct i
                    let mut tau: Vec<usize> = (0..m).collect();
                    tau.shuffle(&mut rng);
                    for (i, &e) in edges.iter().enumerate() {
                        perms[e] = (0..m).map(|r| sigma[(tau[r] + i) % m]).collect();
                    }
                }
            }
        }
    }
    let shift_list: Vec<usize> = shifts.iter().map(|s| s.unwrap_or(0)).collect();
    if mode == LiftMode::Circulant {
        return lift_circulant(g, m, &shift_list, seed);
    }
    assemble(g, m, mode, seed, perms, shifts)
}

/// Circulant lift with explicit shifts, one per protograph edge.
pub fn lift_circulant(g: &Protograph, m: usize, shifts: &[usize], seed: u64) -> Result<LiftedCode> {
    if m == 0 || shifts.len() != g.edges.len() {
        return Err(Error::InvalidParameter(format!("need {} shifts and m >= 1", g.edges.len())));
    }
    let mut seen = std::collections::HashSet::new();
    for (&(c, v), &s) in g.edges.iter().zip(shifts) {
        if !seen.insert((c, v, s % m)) {
            return Err(Error::CirculantCollision { check: c, variable: v });
        }
    }
    let perms = shifts.iter().map(|&s| (0..m).map(|r| ((r + s) % m) as u32).collect()).collect();
    assemble(g, m, LiftMode::Circulant, seed, perms, shifts.iter().map(|&s| Some(s % m)).collect())
}

fn assemble(
    g: &Protograph,
    m: usize,
    mode: LiftMode,
    seed: u64,
    perms: Vec<Vec<u32>>,
    shifts: Vec<Option<usize>>,
) -> Result<LiftedCode> {
    let mut entries = Vec::with_capacity(g.edges.len() * m);
    for (&(c, v), p) in g.edges.iter().zip(&perms) {
        entries.extend(p.iter().enumerate().map(|(r, &col)| (c * m + r, v * m + col as usize)));
    }
    let h = ParityCheck::from_entries(g.n_c * m, g.n_v * m, &entries)?;
    let provenance = g
        .edges
        .iter()
        .zip(perms.into_iter().zip(shifts))
        .map(|(&(check, variable), (perm, shift))| EdgeLift { check, variable, perm, shift })
        .collect();
    Ok(LiftedCode { h, m, mode, seed, provenance })
}

/// Peeling decoder: repeatedly solves checks with a single erased
/// neighbour. `erased` is updated in place; returns the number of bits
/// left erased. With `order` set, pending checks are served in random
/// order instead of last in, first out.
pub fn peel(h: &ParityCheck, erased: &mut [bool], mut order: Option<&mut ChaCha8Rng>) -> usize {
    let mut count: Vec<u32> =
        h.rows.iter().map(|r| r.iter().filter(|&&c| erased[c as usize]).count() as u32).collect();
    let mut pending: Vec<u32> = (0..h.n_rows as u32).filter(|&r| count[r as usize] == 1).collect();
    while !pending.is_empty() {
        let r = match order.as_deref_mut() {
            Some(rng) => {
                let i = rng.gen_range(0..pending.len());
                pending.swap_remove(i)
            }
            None => pending.pop().unwrap_or(0),
        } as usize;
        if count[r] != 1 {
            continue;
        }
        let Some(&v) = h.rows[r].iter().find(|&&c| erased[c as usize]) else { continue };
        erased[v as usize] = false;
        for &r2 in &h.cols[v as usize] {
            let r2 = r2 as usize;
            count[r2] -= 1;
            if count[r2] == 1 {
                pending.push(r2 as u32);
            }
        }
    }
    erased.iter().filter(|&&e| e).count()
}

/// Wilson score interval for `k` successes in `n` trials at 95%.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let (nf, p) = (n as f64, k as f64 / n as f64);
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub eps: f64,
    pub m: usize,
    pub trials: u64,
    pub seed: u64,
    /// Residual erasure rate over all transmitted bits.
    pub ber: f64,
    pub ber_ci: (f64, f64),
    pub fer: f64,
    pub fer_ci: (f64, f64),
    /// Trials that ended with no erasure left.
    pub clean_frames: u64,
}

/// Erasure pattern and decoder outcome of one trial, seeded by
/// `(seed, trial)` so results do not depend on scheduling.
pub fn run_trial(h: &ParityCheck, eps: f64, seed: u64, trial: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut erased: Vec<bool> = (0..h.n_cols).map(|_| rng.gen::<f64>() < eps).collect();
    peel(h, &mut erased, None)
}

pub fn simulate_bec(code: &LiftedCode, eps: f64, trials: u64, seed: u64) -> Result<SimReport> {
    if !(0.0..=1.0).contains(&eps) || trials == 0 {
        return Err(Error::InvalidParameter(format!("eps {eps}, trials {trials}")));
    }
    let residual: Vec<usize> = (0..trials).into_par_iter().map(|t| run_trial(&code.h, eps, seed, t)).collect();
    let bits = code.h.n_cols as u64 * trials;
    let erased: u64 = residual.iter().map(|&r| r as u64).sum();
    let failed = residual.iter().filter(|&&r| r > 0).count() as u64;
    Ok(SimReport {
        eps,
        m: code.m,
        trials,
        seed,
        ber: erased as f64 / bits as f64,
        ber_ci: wilson_interval(erased, bits),
        fer: failed as f64 / trials as f64,
        fer_ci: wilson_interval(failed, trials),
        clean_frames: trials - failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protograph::build_chain;

    #[test]
    fn unit_lift_is_the_base_matrix() {
        let g = build_chain(3, 6, 4).unwrap();
        let c = lift_circulant(&g, 1, &vec![0; g.edges.len()], 0).unwrap();
        let b = g.base_matrix();
        for (r, row) in b.iter().enumerate() {
            let ones: Vec<u32> = row.iter().enumerate().filter(|(_, &x)| x > 0).map(|(j, _)| j as u32).collect();
            assert_eq!(c.h.rows[r], ones);
        }
    }

    #[test]
    fn parallel_edges_stay_disjoint() {
        let g = Protograph::from_base_matrix(&[vec![3, 3]]).unwrap();
        let c = lift(&g, 7, LiftMode::RandomPermutation, 3).unwrap();
        assert!(c.h.column_weights().iter().all(|&w| w == 3));
        assert!(c.h.row_weights().iter().all(|&w| w == 6));
        assert!(matches!(lift_circulant(&g, 7, &[1, 1, 2, 0, 1, 2], 0), Err(Error::CirculantCollision { .. })));
        let c = lift(&g, 7, LiftMode::Circulant, 3).unwrap();
        assert!(c.h.column_weights().iter().all(|&w| w == 3));
    }

    #[test]
    fn wilson_zero_successes() {
        let (lo, hi) = wilson_interval(0, 200);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.03);
    }

    #[test]
    fn peeling_solves_a_chain_of_checks() {
        // x0 + x1 = 0, x1 + x2 = 0 with x0 known
        let h = ParityCheck::from_entries(2, 3, &[(0, 0), (0, 1), (1, 1), (1, 2)]).unwrap();
        let mut e = vec![false, true, true];
        assert_eq!(peel(&h, &mut e, None), 0);
        let mut e = vec![true, true, true];
        assert_eq!(peel(&h, &mut e, None), 3);
    }
}
