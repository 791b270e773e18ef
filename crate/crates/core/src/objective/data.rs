use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Dense feature matrix with `+-1` labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    dim: usize,
    /// Row-major, `len() * dim` entries.
    features: Vec<T>,
    labels: Vec<T>,
}

impl<T: Real> Dataset<T> {
    pub fn new(dim: usize, features: Vec<T>, labels: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("feature dimension must be positive".into()));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::InvalidInput(format!(
                "{} feature values do not fill {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != T::one() && y != -T::one()) {
            return Err(Error::InvalidInput(format!("label {bad} is not +-1")));
        }
        Ok(Self { dim, features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> T {
        self.labels[i]
    }

    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    /// Fraction of samples with `sign(<a, z>) == label`.
    pub fn accuracy(&self, z: &[T]) -> f64 {
        let hits = (0..self.len())
            .filter(|&i| {
                let s: T = self.row(i).iter().zip(z).map(|(&a, &b)| a * b).sum();
                (s > T::zero()) == (self.labels[i] > T::zero())
            })
            .count();
        hits as f64 / self.len() as f64
    }

    /// Rescales every feature column to `[0, 1]`; constant columns become 0.
    pub fn scale_unit(&mut self) {
        for k in 0..self.dim {
            let col = (0..self.len()).map(|i| self.features[i * self.dim + k]);
            let (lo, hi) = col.fold((T::infinity(), T::neg_infinity()), |(a, b), x| (a.min(x), b.max(x)));
            let span = hi - lo;
            for i in 0..self.len() {
                let v = &mut self.features[i * self.dim + k];
                *v = if span > T::zero() { (*v - lo) / span } else { T::zero() };
            }
        }
    }
}

/// Two unit-variance Gaussian clusters centred at `+-separation * u` for a
/// random unit vector `u`; labels are balanced and shuffled.
pub fn make_synthetic_classification<T: Real>(n_samples: usize, dim: usize, separation: f64, seed: u64) -> Result<Dataset<T>> {
    if n_samples == 0 || dim == 0 {
        return Err(Error::invalid_param("synthetic data needs N, p >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        u.iter_mut().for_each(|x| *x /= norm);
    } else {
        u[0] = 1.0;
    }
    let mut labels: Vec<f64> = (0..n_samples).map(|i| if i < n_samples.div_ceil(2) { 1.0 } else { -1.0 }).collect();
    labels.shuffle(&mut rng);
    let mut features = Vec::with_capacity(n_samples * dim);
    for &y in &labels {
        for &uk in &u {
            let noise: f64 = rng.sample(StandardNormal);
            features.push(lit::<T>(y * separation * uk + noise));
        }
    }
    Dataset::new(dim, features, labels.into_iter().map(lit).collect())
}

/// Reads a headerless CSV with one sample per row and the label in the last
/// column. Labels may be `+-1` or `{0, 1}` (0 maps to -1). With `scale`, each
/// feature column is rescaled to `[0, 1]`.
pub fn load_csv_dataset<T: Real>(path: impl AsRef<Path>, scale: bool) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut dim: Option<usize> = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() < 2 {
            return Err(Error::Parse { line, message: "need at least one feature and a label".into() });
        }
        let width = record.len() - 1;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} columns, found {}", d + 1, record.len()),
                })
            }
            _ => {}
        }
        let mut values = Vec::with_capacity(record.len());
        for cell in record.iter() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse { line, message: format!("non-numeric cell `{cell}`") })?;
            values.push(v);
        }
        let label = match values.pop() {
            Some(y) if y == 1.0 => 1.0,
            Some(y) if y == -1.0 || y == 0.0 => -1.0,
            Some(y) => return Err(Error::Parse { line, message: format!("label {y} is not in {{-1, +1}} or {{0, 1}}") }),
            None => unreachable!(),
        };
        features.extend(values.into_iter().map(lit::<T>));
        labels.push(lit::<T>(label));
    }
    let dim = dim.ok_or_else(|| Error::InvalidInput(format!("{} contains no samples", path.display())))?;
    let mut data = Dataset::new(dim, features, labels)?;
    if scale {
        data.scale_unit();
    }
    Ok(data)
}
