use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objective::FiniteSumProblem;
use crate::scalar::{count, Real};

/// One node's iterates and, for SAGA-type estimators, its gradient table.
#[derive(Clone, Debug)]
pub struct NodeState<T> {
    pub x: Vec<T>,
    /// Push-sum weight, positive.
    pub y: T,
    /// Corrected iterate `x / y`.
    pub z: Vec<T>,
    /// Gradient tracker.
    pub w: Vec<T>,
    /// Current local gradient estimate.
    pub g: Vec<T>,
    /// Stored component gradients, `m_i x p` row-major; empty when the
    /// algorithm keeps no table.
    pub table: Vec<T>,
    /// Mean of the table rows.
    pub table_avg: Vec<T>,
    /// Points at which the table rows were evaluated (`m_i x p`), kept only
    /// in instrumented runs.
    pub reference_points: Option<Vec<T>>,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) updates_since_refresh: usize,
    pub(crate) scratch: Vec<T>,
}

impl<T: Real> NodeState<T> {
    /// Node `node` started at `x0` with `y = 1`, `z = x0`,
    /// `w = g = grad f_i(x0)` and, when `with_table`, every table entry
    /// evaluated at `x0`.
    pub fn init<P: FiniteSumProblem<T> + ?Sized>(
        problem: &P,
        node: usize,
        x0: Vec<T>,
        rng: ChaCha8Rng,
        with_table: bool,
        track_reference_points: bool,
    ) -> Self {
        let p = problem.dim();
        let m = problem.local_count(node);
        let mut g = vec![T::zero(); p];
        problem.local_grad(node, &x0, &mut g);
        let (table, table_avg) = if with_table {
            let mut table = vec![T::zero(); m * p];
            for j in 0..m {
                problem.component_grad(node, j, &x0, &mut table[j * p..(j + 1) * p]);
            }
            let avg = table_mean(&table, m, p);
            (table, avg)
        } else {
            (Vec::new(), Vec::new())
        };
        let reference_points = (with_table && track_reference_points).then(|| x0.repeat(m));
        Self {
            z: x0.clone(),
            x: x0,
            y: T::one(),
            w: g.clone(),
            g,
            table,
            table_avg,
            reference_points,
            rng,
            updates_since_refresh: 0,
            scratch: vec![T::zero(); p],
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn has_table(&self) -> bool {
        !self.table.is_empty()
    }

    pub fn table_len(&self) -> usize {
        if self.x.is_empty() {
            0
        } else {
            self.table.len() / self.x.len()
        }
    }

    pub fn table_row(&self, j: usize) -> &[T] {
        let p = self.dim();
        &self.table[j * p..(j + 1) * p]
    }

    /// Overwrites table row `j`, keeping `table_avg` in step.
    pub fn set_table_row(&mut self, j: usize, grad: &[T]) {
        let p = self.dim();
        let m = self.table_len();
        let inv = T::one() / count::<T>(m);
        for k in 0..p {
            let old = self.table[j * p + k];
            self.table_avg[k] = self.table_avg[k] + (grad[k] - old) * inv;
            self.table[j * p + k] = grad[k];
        }
    }

    /// Recomputes `table_avg` from the rows.
    pub fn refresh_table_avg(&mut self) {
        let (m, p) = (self.table_len(), self.dim());
        self.table_avg = table_mean(&self.table, m, p);
        self.updates_since_refresh = 0;
    }
}

fn table_mean<T: Real>(table: &[T], m: usize, p: usize) -> Vec<T> {
    let mut avg = vec![T::zero(); p];
    for row in table.chunks_exact(p) {
        for (a, &v) in avg.iter_mut().zip(row) {
            *a = *a + v;
        }
    }
    let inv = T::one() / count::<T>(m);
    avg.iter_mut().for_each(|a| *a = *a * inv);
    avg
}

/// Per-node random stream: the master seed selects the key, the node index
/// selects the stream, so the draws of a node never depend on scheduling.
pub fn node_rng(master_seed: u64, node: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(node as u64);
    rng
}

/// All node states of a network plus the round counter.
#[derive(Clone, Debug)]
pub struct NetworkState<T> {
    pub nodes: Vec<NodeState<T>>,
    /// Completed rounds.
    pub k: usize,
}

impl<T: Real> NetworkState<T> {
    /// Initializes every node. `x0` defaults to the origin on every node.
    pub fn init<P: FiniteSumProblem<T> + ?Sized>(
        problem: &P,
        x0: Option<&[Vec<T>]>,
        seed: u64,
        with_table: bool,
        track_reference_points: bool,
    ) -> Result<Self> {
        let n = problem.nodes();
        let p = problem.dim();
        if let Some(x0) = x0 {
            if x0.len() != n || x0.iter().any(|v| v.len() != p) {
                return Err(Error::InvalidInput(format!("initial point must be {n} vectors of length {p}")));
            }
        }
        let nodes = (0..n)
            .map(|i| {
                let start = x0.map(|v| v[i].clone()).unwrap_or_else(|| vec![T::zero(); p]);
                NodeState::init(problem, i, start, node_rng(seed, i), with_table, track_reference_points)
            })
            .collect();
        Ok(Self { nodes, k: 0 })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn dim(&self) -> usize {
        self.nodes.first().map(|s| s.dim()).unwrap_or(0)
    }

    /// `(1/n) sum_i z_i`.
    pub fn z_bar(&self) -> Vec<T> {
        self.mean_of(|s| &s.z)
    }

    /// `(1/n) sum_i x_i`.
    pub fn x_bar(&self) -> Vec<T> {
        self.mean_of(|s| &s.x)
    }

    pub fn w_bar(&self) -> Vec<T> {
        self.mean_of(|s| &s.w)
    }

    pub fn g_bar(&self) -> Vec<T> {
        self.mean_of(|s| &s.g)
    }

    pub fn y_sum(&self) -> T {
        self.nodes.iter().map(|s| s.y).sum()
    }

    fn mean_of(&self, f: impl Fn(&NodeState<T>) -> &Vec<T>) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        for s in &self.nodes {
            for (o, &v) in out.iter_mut().zip(f(s)) {
                *o = *o + v;
            }
        }
        let inv = T::one() / count::<T>(self.n());
        out.iter_mut().for_each(|o| *o = *o * inv);
        out
    }

    /// `||v - B^inf v||_2^2` where `(B^inf v)_i = pi_i sum_r v_r`, for the
    /// stacked per-node vectors selected by `f`. With `pi_weighted`, each
    /// node's block is divided by `pi_i` (the `||.||_pi^2` norm).
    pub fn disagreement(&self, pi: &[T], pi_weighted: bool, f: impl Fn(&NodeState<T>) -> &Vec<T>) -> T {
        let p = self.dim();
        let mut total = vec![T::zero(); p];
        for s in &self.nodes {
            for (t, &v) in total.iter_mut().zip(f(s)) {
                *t = *t + v;
            }
        }
        let mut acc = T::zero();
        for (i, s) in self.nodes.iter().enumerate() {
            let block: T = f(s).iter().zip(&total).map(|(&v, &t)| (v - pi[i] * t).powi(2)).sum();
            acc = acc + if pi_weighted { block / pi[i] } else { block };
        }
        acc
    }

    /// `t = sum_i (1/m_i) sum_j ||v_ij - z_star||^2`, when reference points
    /// are recorded on every node.
    pub fn auxiliary_gap(&self, z_star: &[T]) -> Option<T> {
        let mut acc = T::zero();
        for s in &self.nodes {
            let v = s.reference_points.as_ref()?;
            let m = s.table_len();
            let sum: T = v
                .chunks_exact(z_star.len())
                .map(|row| row.iter().zip(z_star).map(|(&a, &b)| (a - b).powi(2)).sum::<T>())
                .sum();
            acc = acc + sum / count::<T>(m);
        }
        Some(acc)
    }
}
