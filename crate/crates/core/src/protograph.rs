//! Protograph base graphs for terminated (3,6) coupled chains and for
//! chains joined by bridges.
//!
//! A chain of `L` segments has `2L` variables and `L + 2` checks. The two
//! variables of segment `t` (1-based) connect to checks `t - 1`, `t` and
//! `t + 1`, so the check degrees read `2, 4, 6, ..., 6, 4, 2`.
//!
//! A bridge is itself a chain. Each of its two ends carries a degree-2
//! and a degree-4 termination check; when the bridge is attached to a
//! chain those checks are completed to degree 6 by four and two extra
//! edges into chain variables. Which chain variables receive the extra
//! edges is described by an [`AttachmentPattern`] applied at an
//! [`AttachPoint`].

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Variable,
    Check,
}

/// Which sub-structure a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Chain(usize),
    Bridge(usize),
    /// Nodes of a protograph read from a bare base matrix.
    Standalone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Interior,
    /// Reduced-degree check at a free chain end.
    Termination,
    /// Bridge-end check or chain variable carrying a connection edge.
    Connection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeMeta {
    pub kind: NodeKind,
    pub component: Component,
    /// Segment index (1-based) for variables, check index `0..=L+1` for checks.
    pub position: usize,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeMetaTable {
    pub variables: Vec<NodeMeta>,
    pub checks: Vec<NodeMeta>,
}

/// Bipartite multigraph with per-node metadata.
///
/// Edges are `(check, variable)` pairs; a repeated pair is a parallel edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protograph {
    pub n_v: usize,
    pub n_c: usize,
    pub edges: Vec<(usize, usize)>,
    pub node_meta: NodeMetaTable,
}

impl Protograph {
    pub fn new(n_v: usize, n_c: usize, edges: Vec<(usize, usize)>, node_meta: NodeMetaTable) -> Result<Self> {
        if node_meta.variables.len() != n_v || node_meta.checks.len() != n_c {
            return Err(Error::InvalidSpec("node metadata does not match node counts".into()));
        }
        if let Some(&(c, v)) = edges.iter().find(|&&(c, v)| c >= n_c || v >= n_v) {
            return Err(Error::InvalidSpec(format!("edge ({c},{v}) out of range")));
        }
        Ok(Self { n_v, n_c, edges, node_meta })
    }

    /// Build from a base matrix (rows are checks). Entries are edge
    /// multiplicities; metadata is marked [`Component::Standalone`].
    pub fn from_base_matrix(rows: &[Vec<u32>]) -> Result<Self> {
        let n_c = rows.len();
        let n_v = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_v) {
            return Err(Error::InvalidSpec("ragged base matrix".into()));
        }
        let mut edges = Vec::new();
        for (c, row) in rows.iter().enumerate() {
            for (v, &mult) in row.iter().enumerate() {
                edges.extend(std::iter::repeat_n((c, v), mult as usize));
            }
        }
        let meta = |kind, position| NodeMeta {
            kind,
            component: Component::Standalone,
            position,
            role: Role::Interior,
        };
        let node_meta = NodeMetaTable {
            variables: (0..n_v).map(|v| meta(NodeKind::Variable, v)).collect(),
            checks: (0..n_c).map(|c| meta(NodeKind::Check, c)).collect(),
        };
        Self::new(n_v, n_c, edges, node_meta)
    }

    pub fn base_matrix(&self) -> Vec<Vec<u32>> {
        let mut b = vec![vec![0u32; self.n_v]; self.n_c];
        for &(c, v) in &self.edges {
            b[c][v] += 1;
        }
        b
    }

    pub fn variable_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_v];
        for &(_, v) in &self.edges {
            d[v] += 1;
        }
        d
    }

    pub fn check_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_c];
        for &(c, _) in &self.edges {
            d[c] += 1;
        }
        d
    }

    /// Edge indices incident to each check, in edge order.
    pub fn check_edges(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_c];
        for (e, &(c, _)) in self.edges.iter().enumerate() {
            adj[c].push(e);
        }
        adj
    }

    /// Edge indices incident to each variable, in edge order.
    pub fn variable_edges(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_v];
        for (e, &(_, v)) in self.edges.iter().enumerate() {
            adj[v].push(e);
        }
        adj
    }

    /// Exact design rate `(n_v - n_c) / n_v`.
    pub fn design_rate(&self) -> Result<Ratio<u64>> {
        if self.n_c >= self.n_v {
            return Err(Error::NonPositiveRate { n_v: self.n_v, n_c: self.n_c });
        }
        Ok(Ratio::new((self.n_v - self.n_c) as u64, self.n_v as u64))
    }

    pub fn is_connected(&self) -> bool {
        let total = self.n_v + self.n_c;
        if total == 0 {
            return true;
        }
        // nodes: variables 0..n_v, checks n_v..
        let mut adj = vec![Vec::new(); total];
        for &(c, v) in &self.edges {
            adj[v].push(self.n_v + c);
            adj[self.n_v + c].push(v);
        }
        let mut seen = vec![false; total];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == total
    }

    /// Variables of a named slice (`chain0`, `chain1`, `bridge0`, ...),
    /// ordered by segment position.
    pub fn slice(&self, name: &str) -> Result<Vec<usize>> {
        let component = parse_slice(name).ok_or_else(|| Error::UnknownSlice(name.to_string()))?;
        let mut vars: Vec<usize> = (0..self.n_v)
            .filter(|&v| self.node_meta.variables[v].component == component)
            .collect();
        if vars.is_empty() {
            return Err(Error::UnknownSlice(name.to_string()));
        }
        vars.sort_by_key(|&v| (self.node_meta.variables[v].position, v));
        Ok(vars)
    }

    /// Names of all chain and bridge slices present in the graph.
    pub fn slice_names(&self) -> Vec<String> {
        let mut names: Vec<Component> = Vec::new();
        for m in &self.node_meta.variables {
            if !matches!(m.component, Component::Standalone) && !names.contains(&m.component) {
                names.push(m.component);
            }
        }
        names.iter().map(|c| c.to_string()).collect()
    }

    /// Plain-text base matrix: `n_c` lines of `n_v` space-separated integers.
    pub fn write_base_matrix<W: Write>(&self, mut w: W) -> Result<()> {
        for row in self.base_matrix() {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_base_matrix<R: BufRead>(r: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            rows.push(row);
        }
        Self::from_base_matrix(&rows)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: Protograph = serde_json::from_str(s)?;
        Self::new(g.n_v, g.n_c, g.edges, g.node_meta)
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Chain(i) => write!(f, "chain{i}"),
            Component::Bridge(i) => write!(f, "bridge{i}"),
            Component::Standalone => write!(f, "standalone"),
        }
    }
}

fn parse_slice(name: &str) -> Option<Component> {
    if let Some(i) = name.strip_prefix("chain") {
        return i.parse().ok().map(Component::Chain);
    }
    if let Some(i) = name.strip_prefix("bridge") {
        return i.parse().ok().map(Component::Bridge);
    }
    None
}

/// Offsets (in chain variables, counted from the attach point) receiving
/// the extra edges of the degree-2 and degree-4 bridge-end checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttachmentPattern {
    pub degree2: Vec<usize>,
    pub degree4: Vec<usize>,
}

impl AttachmentPattern {
    /// Four consecutive variables (two whole segments) for the degree-2
    /// check, the next segment for the degree-4 check.
    pub fn contiguous() -> Self {
        Self { degree2: vec![0, 1, 2, 3], degree4: vec![4, 5] }
    }

    /// The pattern used by [`build_connected`]. The degree-4 check reaches
    /// one variable further along the chain than the degree-2 check's
    /// window, which spreads the six connection edges over seven variables.
    pub fn interleaved() -> Self {
        Self { degree2: vec![0, 1, 3, 4], degree4: vec![2, 7] }
    }

    fn span(&self) -> usize {
        self.degree2.iter().chain(&self.degree4).copied().max().unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        if self.degree2.len() != 4 || self.degree4.len() != 2 {
            return Err(Error::InvalidSpec(
                "attachment pattern needs 4 degree-2 and 2 degree-4 offsets".into(),
            ));
        }
        Ok(())
    }
}

impl Default for AttachmentPattern {
    fn default() -> Self {
        Self::interleaved()
    }
}

/// Where a bridge end meets a chain: the pattern offsets are laid out from
/// chain variable `start`, towards higher indices unless `descending`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttachPoint {
    pub start: usize,
    #[serde(default)]
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeSpec {
    pub chain_a: usize,
    pub attach_a: AttachPoint,
    pub chain_b: usize,
    pub attach_b: AttachPoint,
    pub length: usize,
}

fn default_cap() -> usize {
    4
}

/// General layout: horizontal chains plus bridges between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionSpec {
    pub chain_lengths: Vec<usize>,
    #[serde(default)]
    pub bridges: Vec<BridgeSpec>,
    #[serde(default)]
    pub pattern: AttachmentPattern,
    #[serde(default = "default_cap")]
    pub degree_cap: usize,
}

/// How the bridges of the two-chain ensemble are positioned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionLayout {
    pub pattern: AttachmentPattern,
    pub anchor: Anchor,
    /// Right-hand bridge mirrors the left one about the chain centre.
    pub mirrored: bool,
}

/// First chain variable (0-based) touched by the left-hand bridge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// `floor(L/4) + shift`, i.e. a distance counted in variable nodes.
    QuarterVariables(isize),
    /// First variable of segment `floor(L/4)`.
    QuarterSegment,
}

impl Anchor {
    fn start(self, length: usize) -> Result<usize> {
        let quarter = (length / 4) as isize;
        let s = match self {
            Anchor::QuarterVariables(shift) => quarter + shift,
            Anchor::QuarterSegment => 2 * (quarter - 1),
        };
        usize::try_from(s).map_err(|_| Error::InvalidSpec(format!("anchor before chain start for L={length}")))
    }
}

impl ConnectionLayout {
    /// Segment-level reading: degree-2 check into segments `c, c+1`,
    /// degree-4 check into segment `c+2`, with `c = floor(L/4)` on the left
    /// and the window shifted (not mirrored) on the right.
    pub fn segment_local() -> Self {
        Self {
            pattern: AttachmentPattern::contiguous(),
            anchor: Anchor::QuarterSegment,
            mirrored: false,
        }
    }
}

impl Default for ConnectionLayout {
    fn default() -> Self {
        Self {
            pattern: AttachmentPattern::interleaved(),
            anchor: Anchor::QuarterVariables(-1),
            mirrored: true,
        }
    }
}

impl ConnectionSpec {
    /// Two chains of length `length` joined by two bridges of length `length/2`.
    pub fn two_chain(length: usize, layout: &ConnectionLayout) -> Result<Self> {
        let a = layout.anchor.start(length)?;
        let n = 2 * length;
        let span = layout.pattern.span();
        if a + span >= n {
            return Err(Error::InvalidSpec(format!("attachment window does not fit L={length}")));
        }
        let left = AttachPoint { start: a, descending: false };
        let right = if layout.mirrored {
            AttachPoint { start: n - 1 - a, descending: true }
        } else {
            AttachPoint { start: n - 1 - a - span, descending: false }
        };
        let bridge = |p: AttachPoint| BridgeSpec {
            chain_a: 0,
            attach_a: p,
            chain_b: 1,
            attach_b: p,
            length: length / 2,
        };
        Ok(Self {
            chain_lengths: vec![length, length],
            bridges: vec![bridge(left), bridge(right)],
            pattern: layout.pattern.clone(),
            degree_cap: 4,
        })
    }
}

/// Terminated coupled chain `C(J,K,L)`; only `(3,6)` is supported.
pub fn build_chain(j: usize, k: usize, length: usize) -> Result<Protograph> {
    if (j, k) != (3, 6) {
        return Err(Error::UnsupportedDegrees { j, k });
    }
    if length < 3 {
        return Err(Error::InvalidLength { length, reason: "a chain needs at least 3 segments" });
    }
    build_custom(&ConnectionSpec {
        chain_lengths: vec![length],
        bridges: Vec::new(),
        pattern: AttachmentPattern::default(),
        degree_cap: 4,
    })
}

/// Connected ensemble `S(3,6,L)` with the default [`ConnectionLayout`].
pub fn build_connected(length: usize) -> Result<Protograph> {
    build_connected_with(length, &ConnectionLayout::default())
}

pub fn build_connected_with(length: usize, layout: &ConnectionLayout) -> Result<Protograph> {
    if length < 8 || !length.is_multiple_of(2) {
        return Err(Error::InvalidLength { length, reason: "connected ensembles need an even L >= 8" });
    }
    build_custom(&ConnectionSpec::two_chain(length, layout)?)
}

struct Builder {
    edges: Vec<(usize, usize)>,
    vars: Vec<NodeMeta>,
    checks: Vec<NodeMeta>,
}

impl Builder {
    /// Appends a coupled chain; returns (first variable, first check).
    fn chain(&mut self, length: usize, component: Component) -> (usize, usize) {
        let v0 = self.vars.len();
        let c0 = self.checks.len();
        for k in 0..=length + 1 {
            let role = match component {
                Component::Chain(_) if k <= 1 || k >= length => Role::Termination,
                _ => Role::Interior,
            };
            self.checks.push(NodeMeta { kind: NodeKind::Check, component, position: k, role });
        }
        for t in 1..=length {
            for _ in 0..2 {
                let v = self.vars.len();
                self.vars.push(NodeMeta { kind: NodeKind::Variable, component, position: t, role: Role::Interior });
                for k in t - 1..=t + 1 {
                    self.edges.push((c0 + k, v));
                }
            }
        }
        (v0, c0)
    }
}

/// Builds an arbitrary chains-plus-bridges layout.
pub fn build_custom(spec: &ConnectionSpec) -> Result<Protograph> {
    if spec.chain_lengths.is_empty() {
        return Err(Error::InvalidSpec("at least one chain is required".into()));
    }
    if let Some(&l) = spec.chain_lengths.iter().find(|&&l| l < 3) {
        return Err(Error::InvalidLength { length: l, reason: "a chain needs at least 3 segments" });
    }
    if !spec.bridges.is_empty() {
        spec.pattern.validate()?;
    }
    let mut b = Builder { edges: Vec::new(), vars: Vec::new(), checks: Vec::new() };
    let chain_vars: Vec<usize> = spec
        .chain_lengths
        .iter()
        .enumerate()
        .map(|(i, &l)| b.chain(l, Component::Chain(i)).0)
        .collect();
    let mut extra = vec![0usize; b.vars.len()];

    for (bi, br) in spec.bridges.iter().enumerate() {
        if br.length < 2 {
            return Err(Error::InvalidSpec(format!("bridge {bi} length {} < 2", br.length)));
        }
        let (_, c0) = b.chain(br.length, Component::Bridge(bi));
        let ends = [
            (br.chain_a, br.attach_a, c0, c0 + 1),
            (br.chain_b, br.attach_b, c0 + br.length + 1, c0 + br.length),
        ];
        for (chain, at, deg2, deg4) in ends {
            let Some(&len) = spec.chain_lengths.get(chain) else {
                return Err(Error::InvalidSpec(format!("bridge {bi} references missing chain {chain}")));
            };
            for (check, offsets) in [(deg2, &spec.pattern.degree2), (deg4, &spec.pattern.degree4)] {
                b.checks[check].role = Role::Connection;
                for &o in offsets {
                    let local = if at.descending { at.start.checked_sub(o) } else { Some(at.start + o) };
                    let local = local.filter(|&x| x < 2 * len).ok_or_else(|| {
                        Error::InvalidSpec(format!("bridge {bi} attaches outside chain {chain}"))
                    })?;
                    let v = chain_vars[chain] + local;
                    extra[v] += 1;
                    let degree = 3 + extra[v];
                    if degree > spec.degree_cap {
                        return Err(Error::DegreeCap { chain, variable: local, degree, cap: spec.degree_cap });
                    }
                    b.vars[v].role = Role::Connection;
                    b.edges.push((check, v));
                }
            }
        }
    }

    let n_v = b.vars.len();
    let n_c = b.checks.len();
    Protograph::new(n_v, n_c, b.edges, NodeMetaTable { variables: b.vars, checks: b.checks })
}

/// Exact design rate of a protograph.
pub fn design_rate(g: &Protograph) -> Result<Ratio<u64>> {
    g.design_rate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<usize>) -> Vec<usize> {
        v.sort_unstable();
        v
    }

    #[test]
    fn chain_of_eight() {
        let g = build_chain(3, 6, 8).unwrap();
        assert_eq!((g.n_v, g.n_c), (16, 10));
        assert_eq!(sorted(g.check_degrees()), vec![2, 2, 4, 4, 6, 6, 6, 6, 6, 6]);
        assert!(g.variable_degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn smallest_chain() {
        let g = build_chain(3, 6, 3).unwrap();
        assert_eq!((g.n_v, g.n_c, g.edges.len()), (6, 5, 18));
    }

    #[test]
    fn chain_rates() {
        assert_eq!(build_chain(3, 6, 18).unwrap().design_rate().unwrap(), Ratio::new(4, 9));
        assert_eq!(build_chain(3, 6, 6).unwrap().design_rate().unwrap(), Ratio::new(1, 3));
    }

    #[test]
    fn chain_errors() {
        assert!(matches!(build_chain(4, 8, 10), Err(Error::UnsupportedDegrees { .. })));
        assert!(matches!(build_chain(3, 6, 2), Err(Error::InvalidLength { .. })));
    }

    #[test]
    fn connected_counts() {
        let g = build_connected(24).unwrap();
        assert_eq!((g.n_v, g.n_c), (144, 80));
        assert_eq!(g.design_rate().unwrap(), Ratio::new(4, 9));
        assert_eq!(build_connected(8).unwrap().design_rate().unwrap(), Ratio::new(1, 3));
        assert_eq!(build_connected(12).unwrap().design_rate().unwrap(), Ratio::new(7, 18));
        assert_eq!(build_connected(20).unwrap().design_rate().unwrap(), Ratio::new(13, 30));
    }

    #[test]
    fn connected_rejects_bad_lengths() {
        assert!(build_connected(6).is_err());
        assert!(build_connected(13).is_err());
    }

    #[test]
    fn connected_degree_profile() {
        for layout in [ConnectionLayout::default(), ConnectionLayout::segment_local()] {
            let g = build_connected_with(16, &layout).unwrap();
            let cd = g.check_degrees();
            assert_eq!(cd.iter().filter(|&&d| d == 2).count(), 4);
            assert_eq!(cd.iter().filter(|&&d| d == 4).count(), 4);
            assert!(cd.iter().all(|&d| [2, 4, 6].contains(&d)));
            let vd = g.variable_degrees();
            assert_eq!(vd.iter().filter(|&&d| d == 4).count(), 24);
            assert!(vd.iter().all(|&d| d == 3 || d == 4));
            assert!(g.is_connected());
        }
    }

    #[test]
    fn segment_local_touches_expected_segments() {
        let g = build_connected_with(24, &ConnectionLayout::segment_local()).unwrap();
        let touched: Vec<usize> = (0..48)
            .filter(|&v| g.node_meta.variables[v].role == Role::Connection)
            .map(|v| g.node_meta.variables[v].position)
            .collect();
        // segments c..c+2 with c = 6 on the left, L - 6 + 1 - 2 = 17 on the right
        assert_eq!(touched, vec![6, 6, 7, 7, 8, 8, 17, 17, 18, 18, 19, 19]);
    }

    #[test]
    fn custom_single_chain_matches_builder() {
        let spec = ConnectionSpec {
            chain_lengths: vec![9],
            bridges: vec![],
            pattern: AttachmentPattern::default(),
            degree_cap: 4,
        };
        assert_eq!(build_custom(&spec).unwrap(), build_chain(3, 6, 9).unwrap());
    }

    #[test]
    fn custom_reproduces_connected() {
        let spec = ConnectionSpec::two_chain(24, &ConnectionLayout::default()).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: ConnectionSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(build_custom(&back).unwrap(), build_connected(24).unwrap());
    }

    #[test]
    fn custom_single_short_bridge() {
        // 2 chains of 12 segments (24 variables each) + one bridge of 3 segments (6 variables)
        let p = AttachPoint { start: 4, descending: false };
        let spec = ConnectionSpec {
            chain_lengths: vec![12, 12],
            bridges: vec![BridgeSpec { chain_a: 0, attach_a: p, chain_b: 1, attach_b: p, length: 3 }],
            pattern: AttachmentPattern::contiguous(),
            degree_cap: 4,
        };
        let g = build_custom(&spec).unwrap();
        assert_eq!(g.n_v, 2 * 24 + 6);
        assert_eq!(g.n_c, 2 * 14 + 5);
    }

    #[test]
    fn custom_degree_cap_collision() {
        let p = AttachPoint { start: 4, descending: false };
        let bridge = BridgeSpec { chain_a: 0, attach_a: p, chain_b: 1, attach_b: p, length: 4 };
        let spec = ConnectionSpec {
            chain_lengths: vec![12, 12],
            bridges: vec![bridge.clone(), bridge],
            pattern: AttachmentPattern::contiguous(),
            degree_cap: 4,
        };
        assert!(matches!(build_custom(&spec), Err(Error::DegreeCap { .. })));
    }

    #[test]
    fn custom_out_of_range() {
        let p = AttachPoint { start: 20, descending: false };
        let spec = ConnectionSpec {
            chain_lengths: vec![12, 12],
            bridges: vec![BridgeSpec { chain_a: 0, attach_a: p, chain_b: 1, attach_b: p, length: 4 }],
            pattern: AttachmentPattern::contiguous(),
            degree_cap: 4,
        };
        assert!(matches!(build_custom(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn slices_are_ordered() {
        let g = build_connected(12).unwrap();
        let c1 = g.slice("chain1").unwrap();
        assert_eq!(c1.len(), 24);
        assert_eq!(c1[0], 24);
        assert_eq!(g.slice("bridge1").unwrap().len(), 12);
        assert!(matches!(g.slice("bridge7"), Err(Error::UnknownSlice(_))));
        assert!(g.slice("nonsense").is_err());
        assert_eq!(g.slice_names(), vec!["chain0", "chain1", "bridge0", "bridge1"]);
    }

    #[test]
    fn nonpositive_rate() {
        let g = Protograph::from_base_matrix(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert!(matches!(g.design_rate(), Err(Error::NonPositiveRate { .. })));
    }
}
