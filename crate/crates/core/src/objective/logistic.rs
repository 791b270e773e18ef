use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::{Dataset, FiniteSumProblem, Partition};

/// Regularized logistic loss
/// `f_ij(z) = log(1 + exp(-y <a, z>)) + (reg / 2) ||z||^2`.
#[derive(Clone, Debug)]
pub struct LogisticProblem<T> {
    data: Dataset<T>,
    partition: Partition,
    reg: T,
    l: T,
}

pub fn make_logistic<T: Real>(data: Dataset<T>, partition: Partition, reg: T) -> Result<LogisticProblem<T>> {
    if !(reg > T::zero()) {
        return Err(Error::InvalidInput(format!("regularizer must be positive, got {reg}")));
    }
    if partition.total() != data.len() {
        return Err(Error::InvalidInput(format!(
            "partition covers {} samples but the dataset has {}",
            partition.total(),
            data.len()
        )));
    }
    let max_sq = (0..data.len())
        .map(|i| data.row(i).iter().map(|&a| a * a).sum::<T>())
        .fold(T::zero(), T::max);
    let l = lit::<T>(0.25) * max_sq + reg;
    Ok(LogisticProblem { data, partition, reg, l })
}

impl<T: Real> LogisticProblem<T> {
    pub fn dataset(&self) -> &Dataset<T> {
        &self.data
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn regularizer(&self) -> T {
        self.reg
    }

    fn margin(&self, g: usize, z: &[T]) -> T {
        let dot: T = self.data.row(g).iter().zip(z).map(|(&a, &b)| a * b).sum();
        self.data.label(g) * dot
    }
}

/// `log(1 + e^t)` without overflow.
fn softplus<T: Real>(t: T) -> T {
    t.max(T::zero()) + (-t.abs()).exp().ln_1p()
}

/// `1 / (1 + e^t)`.
fn sigmoid_neg<T: Real>(t: T) -> T {
    if t >= T::zero() {
        let e = (-t).exp();
        e / (T::one() + e)
    } else {
        T::one() / (T::one() + t.exp())
    }
}

impl<T: Real> FiniteSumProblem<T> for LogisticProblem<T> {
    fn nodes(&self) -> usize {
        self.partition.nodes()
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn local_count(&self, node: usize) -> usize {
        self.partition.counts()[node]
    }

    fn component_grad(&self, node: usize, j: usize, z: &[T], out: &mut [T]) {
        let g = self.partition.global_index(node, j);
        let coef = -self.data.label(g) * sigmoid_neg(self.margin(g, z));
        for ((o, &a), &zk) in out.iter_mut().zip(self.data.row(g)).zip(z) {
            *o = coef * a + self.reg * zk;
        }
    }

    fn component_value(&self, node: usize, j: usize, z: &[T]) -> T {
        let g = self.partition.global_index(node, j);
        let sq: T = z.iter().map(|&x| x * x).sum();
        softplus(-self.margin(g, z)) + lit::<T>(0.5) * self.reg * sq
    }

    fn smoothness(&self) -> T {
        self.l
    }

    fn strong_convexity(&self) -> T {
        self.reg
    }
}
