//! Coarsest equitable partition of a protograph by colour refinement.
//!
//! Two nodes end up in the same class only if they see the same multiset of
//! neighbouring classes. Message passing started from identical channel
//! inputs therefore produces identical messages on every edge joining the
//! same pair of classes, and density evolution can run on the quotient.

use std::collections::HashMap;

use crate::adjacency::Adjacency;
use crate::protograph::Protograph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub var_class: Vec<usize>,
    pub check_class: Vec<usize>,
    pub var_size: Vec<usize>,
    pub check_size: Vec<usize>,
    /// Per variable class, `(edge class, multiplicity)` for each check class
    /// it touches, in increasing edge class order.
    pub var_edges: Vec<Vec<(usize, usize)>>,
    /// Per check class, `(edge class, multiplicity)`.
    pub check_edges: Vec<Vec<(usize, usize)>>,
    /// Endpoint classes `(variable class, check class)` of every edge class.
    pub edge_classes: Vec<(usize, usize)>,
}

impl Quotient {
    pub fn n_var_classes(&self) -> usize {
        self.var_size.len()
    }

    pub fn n_check_classes(&self) -> usize {
        self.check_size.len()
    }

    pub fn n_edge_classes(&self) -> usize {
        self.edge_classes.len()
    }
}

/// Relabels signatures by first appearance so class ids follow node order.
fn relabel<K: std::hash::Hash + Eq>(sigs: Vec<K>) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let labels = sigs
        .into_iter()
        .map(|s| {
            let next = ids.len();
            *ids.entry(s).or_insert(next)
        })
        .collect();
    (labels, ids.len())
}

pub fn equitable_partition(g: &Protograph) -> Quotient {
    let adj = Adjacency::new(g);
    let mut vc = vec![0usize; g.n_v];
    let mut cc = vec![0usize; g.n_c];
    let (mut nv, mut nc) = (1, 1);
    loop {
        let vsig: Vec<(usize, Vec<usize>)> = (0..g.n_v)
            .map(|v| {
                let mut s: Vec<usize> = adj.var(v).iter().map(|&e| cc[adj.edge_check[e]]).collect();
                s.sort_unstable();
                (vc[v], s)
            })
            .collect();
        let csig: Vec<(usize, Vec<usize>)> = (0..g.n_c)
            .map(|c| {
                let mut s: Vec<usize> = adj.check(c).iter().map(|&e| vc[adj.edge_var[e]]).collect();
                s.sort_unstable();
                (cc[c], s)
            })
            .collect();
        let (nvc, nnv) = relabel(vsig);
        let (ncc, nnc) = relabel(csig);
        vc = nvc;
        cc = ncc;
        if nnv == nv && nnc == nc {
            break;
        }
        nv = nnv;
        nc = nnc;
    }

    let mut var_size = vec![0; nv];
    let mut check_size = vec![0; nc];
    for &c in &vc {
        var_size[c] += 1;
    }
    for &c in &cc {
        check_size[c] += 1;
    }
    let mut edge_id: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edge_classes = Vec::new();
    for e in 0..adj.n_edges() {
        let key = (vc[adj.edge_var[e]], cc[adj.edge_check[e]]);
        edge_id.entry(key).or_insert_with(|| {
            edge_classes.push(key);
            edge_classes.len() - 1
        });
    }
    // multiplicities are read off one representative per class
    let counts = |edges: &[usize]| {
        let mut m: Vec<(usize, usize)> = Vec::new();
        for &e in edges {
            let id = edge_id[&(vc[adj.edge_var[e]], cc[adj.edge_check[e]])];
            match m.iter_mut().find(|(k, _)| *k == id) {
                Some(x) => x.1 += 1,
                None => m.push((id, 1)),
            }
        }
        m.sort_unstable();
        m
    };
    let var_edges = (0..nv).map(|k| counts(adj.var(vc.iter().position(|&c| c == k).unwrap()))).collect();
    let check_edges = (0..nc).map(|k| counts(adj.check(cc.iter().position(|&c| c == k).unwrap()))).collect();
    Quotient { var_class: vc, check_class: cc, var_size, check_size, var_edges, check_edges, edge_classes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protograph::{build_chain, build_connected};

    fn assert_equitable(g: &Protograph, q: &Quotient) {
        let adj = Adjacency::new(g);
        for v in 0..g.n_v {
            let mut seen: Vec<(usize, usize)> = Vec::new();
            for &e in adj.var(v) {
                let id = q.edge_classes.iter().position(|&k| k == (q.var_class[v], q.check_class[adj.edge_check[e]])).unwrap();
                match seen.iter_mut().find(|(k, _)| *k == id) {
                    Some(x) => x.1 += 1,
                    None => seen.push((id, 1)),
                }
            }
            seen.sort_unstable();
            assert_eq!(seen, q.var_edges[q.var_class[v]]);
        }
    }

    #[test]
    fn chain_folds_in_half() {
        let g = build_chain(3, 6, 8).unwrap();
        let q = equitable_partition(&g);
        // mirror symmetry plus the two variables of a segment
        assert_eq!(q.n_var_classes(), 4);
        assert_eq!(q.n_check_classes(), 5);
        assert_equitable(&g, &q);
    }

    #[test]
    fn connected_ensemble_quotient_is_equitable() {
        let g = build_connected(12).unwrap();
        let q = equitable_partition(&g);
        assert!(q.n_var_classes() < g.n_v / 2);
        assert_eq!(q.var_size.iter().sum::<usize>(), g.n_v);
        assert_eq!(q.check_size.iter().sum::<usize>(), g.n_c);
        assert_equitable(&g, &q);
    }

    #[test]
    fn uncoupled_base_matrix_is_one_class() {
        let g = Protograph::from_base_matrix(&[vec![3, 3]]).unwrap();
        let q = equitable_partition(&g);
        assert_eq!((q.n_var_classes(), q.n_check_classes()), (1, 1));
        assert_eq!(q.var_edges[0], vec![(0, 3)]);
        assert_eq!(q.check_edges[0], vec![(0, 6)]);
    }
}
