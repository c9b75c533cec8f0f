//! Real sparse matrices on the computational basis and the spin operators
//! built from them. Site `i` is bit `i` of the basis label; a set bit is spin up.

use std::collections::BTreeMap;

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseReal {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseReal {
    pub fn zeros(dim: usize) -> Self {
        SparseReal { dim, rows: vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        SparseReal { dim, rows: (0..dim).map(|i| vec![(i, 1.0)]).collect() }
    }

    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); dim];
        for (r, c, v) in triplets {
            *acc[r].entry(c).or_insert(0.0) += v;
        }
        SparseReal {
            dim,
            rows: acc
                .into_iter()
                .map(|row| row.into_iter().filter(|(_, v)| *v != 0.0).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.rows[r]
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, *c, *v)))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v)))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (r, c, s * v)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut t = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for (k, a) in row {
                for (c, b) in &other.rows[*k] {
                    t.push((r, *c, a * b));
                }
            }
        }
        Self::from_triplets(self.dim, t)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(c, w)| w * v[*c]).sum())
            .collect()
    }

    /// `out += s · A X` for row-major `X` of shape `dim × dim`.
    pub fn left_mul_acc(&self, x: &[Complex64], s: Complex64, out: &mut [Complex64]) {
        let n = self.dim;
        for (i, row) in self.rows.iter().enumerate() {
            let dst = &mut out[i * n..(i + 1) * n];
            for (k, w) in row {
                let f = s * w;
                for (d, src) in dst.iter_mut().zip(&x[k * n..(k + 1) * n]) {
                    *d += f * src;
                }
            }
        }
    }

    /// `out += s · X Aᵀ` for row-major `X`.
    pub fn right_mul_transpose_acc(&self, x: &[Complex64], s: Complex64, out: &mut [Complex64]) {
        let n = self.dim;
        for i in 0..n {
            let src = &x[i * n..(i + 1) * n];
            for (j, row) in self.rows.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, w) in row {
                    acc += src[*k] * w;
                }
                out[i * n + j] += s * acc;
            }
        }
    }
}

/// Single-site and collective operators on `n_total` sites.
pub struct SpinOps {
    pub n_total: u32,
}

impl SpinOps {
    fn dim(&self) -> usize {
        1usize << self.n_total
    }

    pub fn sigma_minus(&self, site: u32) -> SparseReal {
        let bit = 1usize << site;
        SparseReal::from_triplets(self.dim(), (0..self.dim()).filter(|s| s & bit != 0).map(|s| (s ^ bit, s, 1.0)))
    }

    pub fn sigma_plus(&self, site: u32) -> SparseReal {
        self.sigma_minus(site).transpose()
    }

    pub fn z(&self, site: u32) -> SparseReal {
        let bit = 1usize << site;
        SparseReal::from_triplets(
            self.dim(),
            (0..self.dim()).map(|s| (s, s, if s & bit != 0 { 1.0 } else { -1.0 })),
        )
    }

    fn sum(&self, sites: &[u32], f: impl Fn(u32) -> SparseReal, scale: f64) -> SparseReal {
        let mut acc = SparseReal::zeros(self.dim());
        for s in sites {
            acc = acc.add(&f(*s));
        }
        acc.scale(scale)
    }

    pub fn j_minus(&self, sites: &[u32]) -> SparseReal {
        self.sum(sites, |s| self.sigma_minus(s), 1.0)
    }

    pub fn j_plus(&self, sites: &[u32]) -> SparseReal {
        self.sum(sites, |s| self.sigma_plus(s), 1.0)
    }

    pub fn j_z(&self, sites: &[u32]) -> SparseReal {
        self.sum(sites, |s| self.z(s), 0.5)
    }

    /// Total spin squared, `J_+ J_- + J_z² - J_z`.
    pub fn j_sq(&self, sites: &[u32]) -> SparseReal {
        let jz = self.j_z(sites);
        self.j_plus(sites)
            .mul(&self.j_minus(sites))
            .add(&jz.mul(&jz))
            .add(&jz.scale(-1.0))
    }
}
