use crate::error::{Error, Result};
use crate::scalar::{count, Real};

use super::DirectedGraph;

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix rows must all have length n".into()));
        }
        Ok(Self { n, data: rows.iter().flatten().copied().collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.n + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: T) {
        self.data[row * self.n + col] = v;
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.n..(row + 1) * self.n]
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n).map(|r| self.row(r).iter().zip(v).map(|(&a, &b)| a * b).sum()).collect()
    }

    pub fn column_sum(&self, col: usize) -> T {
        (0..self.n).map(|r| self.get(r, col)).sum()
    }

    pub fn row_sum(&self, row: usize) -> T {
        self.row(row).iter().copied().sum()
    }

    /// Nonnegative with every column summing to one within `tol`.
    pub fn is_column_stochastic(&self, tol: T) -> bool {
        self.data.iter().all(|&x| x >= T::zero())
            && (0..self.n).all(|c| (self.column_sum(c) - T::one()).abs() <= tol)
    }

    /// Column stochastic and every row also sums to one within `tol`.
    pub fn is_doubly_stochastic(&self, tol: T) -> bool {
        self.is_column_stochastic(tol) && (0..self.n).all(|r| (self.row_sum(r) - T::one()).abs() <= tol)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|r| self.row(r).iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()).collect()
    }
}

/// `B[r][i] = 1 / d_i^out` for every out-edge `i -> r`, self-loop included.
pub fn make_column_stochastic<T: Real>(g: &DirectedGraph) -> Matrix<T> {
    let mut b = Matrix::zeros(g.n());
    for i in 0..g.n() {
        let w = T::one() / count::<T>(g.out_degree(i));
        for &r in g.out_neighbors(i) {
            b.set(r, i, w);
        }
    }
    b
}

/// Sparse view of a weight matrix: for every receiving node, its
/// `(sender, weight)` pairs in ascending sender order. Mixing sums always run
/// in this order so results do not depend on scheduling.
#[derive(Clone, Debug)]
pub struct MixingWeights<T> {
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> MixingWeights<T> {
    pub fn from_matrix(b: &Matrix<T>) -> Self {
        let rows = (0..b.n())
            .map(|i| {
                b.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w != T::zero())
                    .map(|(r, &w)| (r, w))
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// The trivial single-node network.
    pub fn identity(n: usize) -> Self {
        Self { rows: (0..n).map(|i| vec![(i, T::one())]).collect() }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    /// `sum_r b_ir * values[r]` for scalar per-node values.
    #[inline]
    pub fn mix_scalar(&self, i: usize, values: &[T]) -> T {
        self.rows[i].iter().fold(T::zero(), |acc, &(r, w)| acc + w * values[r])
    }

    /// `out = sum_r b_ir * values[r*p..(r+1)*p]` for stacked per-node vectors.
    #[inline]
    pub fn mix_into(&self, i: usize, values: &[T], p: usize, out: &mut [T]) {
        out.iter_mut().for_each(|o| *o = T::zero());
        for &(r, w) in &self.rows[i] {
            for (o, &v) in out.iter_mut().zip(&values[r * p..(r + 1) * p]) {
                *o = *o + w * v;
            }
        }
    }

    pub fn is_doubly_stochastic(&self, tol: T) -> bool {
        let n = self.n();
        let mut col = vec![T::zero(); n];
        for row in &self.rows {
            let s: T = row.iter().map(|&(_, w)| w).sum();
            if (s - T::one()).abs() > tol {
                return false;
            }
            for &(r, w) in row {
                col[r] = col[r] + w;
            }
        }
        col.iter().all(|&c| (c - T::one()).abs() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{build_cycle_plus_edges, build_exponential_graph};

    #[test]
    fn cycle_weights_are_halves() {
        let g = build_cycle_plus_edges(3, 0, 0).unwrap();
        let b: Matrix<f64> = make_column_stochastic(&g);
        for r in 0..3 {
            for c in 0..3 {
                let expected = if r == c || r == (c + 1) % 3 { 0.5 } else { 0.0 };
                assert_eq!(b.get(r, c), expected);
            }
        }
    }

    #[test]
    fn complete_graph_is_uniform() {
        let g = build_cycle_plus_edges(4, 8, 0).unwrap();
        let b: Matrix<f64> = make_column_stochastic(&g);
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(b.get(r, c), 0.25);
            }
        }
        assert!(b.is_doubly_stochastic(1e-15));
    }

    #[test]
    fn exponential_columns() {
        let g = build_exponential_graph(16).unwrap();
        let b: Matrix<f64> = make_column_stochastic(&g);
        for c in 0..16 {
            let nz: Vec<f64> = (0..16).map(|r| b.get(r, c)).filter(|&x| x != 0.0).collect();
            assert_eq!(nz.len(), 5);
            assert!(nz.iter().all(|&x| x == 1.0 / 5.0));
            assert!((b.column_sum(c) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn mixing_matches_dense_product() {
        let g = build_cycle_plus_edges(7, 9, 4).unwrap();
        let b: Matrix<f64> = make_column_stochastic(&g);
        let mix = MixingWeights::from_matrix(&b);
        let v: Vec<f64> = (0..7).map(|i| (i as f64).sin() + 2.0).collect();
        let dense = b.mul_vec(&v);
        for i in 0..7 {
            assert!((mix.mix_scalar(i, &v) - dense[i]).abs() < 1e-15);
        }
        assert!(!mix.is_doubly_stochastic(1e-12));
    }
}
