use crate::protograph::Protograph;

/// Compressed edge incidence lists of a protograph.
#[derive(Debug, Clone)]
pub struct Adjacency {
    pub n_v: usize,
    pub n_c: usize,
    pub edge_check: Vec<usize>,
    pub edge_var: Vec<usize>,
    check_ptr: Vec<usize>,
    check_list: Vec<usize>,
    var_ptr: Vec<usize>,
    var_list: Vec<usize>,
}

fn csr(n: usize, keys: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut ptr = vec![0; n + 1];
    for &k in keys {
        ptr[k + 1] += 1;
    }
    for i in 0..n {
        ptr[i + 1] += ptr[i];
    }
    let mut fill = ptr.clone();
    let mut list = vec![0; keys.len()];
    for (e, &k) in keys.iter().enumerate() {
        list[fill[k]] = e;
        fill[k] += 1;
    }
    (ptr, list)
}

impl Adjacency {
    pub fn new(g: &Protograph) -> Self {
        let edge_check: Vec<usize> = g.edges.iter().map(|&(c, _)| c).collect();
        let edge_var: Vec<usize> = g.edges.iter().map(|&(_, v)| v).collect();
        let (check_ptr, check_list) = csr(g.n_c, &edge_check);
        let (var_ptr, var_list) = csr(g.n_v, &edge_var);
        Self { n_v: g.n_v, n_c: g.n_c, edge_check, edge_var, check_ptr, check_list, var_ptr, var_list }
    }

    pub fn n_edges(&self) -> usize {
        self.edge_check.len()
    }

    #[inline]
    pub fn check(&self, c: usize) -> &[usize] {
        &self.check_list[self.check_ptr[c]..self.check_ptr[c + 1]]
    }

    #[inline]
    pub fn var(&self, v: usize) -> &[usize] {
        &self.var_list[self.var_ptr[v]..self.var_ptr[v + 1]]
    }

    pub fn max_degree(&self) -> usize {
        let c = (0..self.n_c).map(|c| self.check(c).len()).max().unwrap_or(0);
        let v = (0..self.n_v).map(|v| self.var(v).len()).max().unwrap_or(0);
        c.max(v)
    }
}
