use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{certify, NetworkParams};
use crate::error::Result;

use super::config::ExperimentConfig;
use super::output::{artifact, fmt_float, Artifact, OutputDir};

/// Draws a valid parameter tuple: `L` in `[1, 10]`, `mu` in `(0, L]`,
/// `lambda` in `[0, 0.99]`, `psi` in `[1, 5]`, `1 <= m <= M <= max_count`,
/// `n` in `[2, max_nodes]`.
///
/// `h` and `T` are drawn so that `(1 + T) h <= psi`, which any real network
/// satisfies because `y, y_inv >= 1`. The extreme Perron entries are then
/// placed so that a probability vector with that ratio exists.
pub fn random_network_params<R: Rng>(rng: &mut R, max_nodes: usize, max_count: usize) -> NetworkParams<f64> {
    let smoothness = rng.random_range(1.0..=10.0);
    let strong_convexity = smoothness * (1.0 - rng.random::<f64>()).max(1e-3);
    let lambda = rng.random_range(0.0..=0.99);
    let psi = rng.random_range(1.0..=5.0);
    let n = rng.random_range(2..=max_nodes.max(2));
    let m_max = rng.random_range(1..=max_count.max(1));
    let m_min = rng.random_range(1..=m_max);
    let h: f64 = rng.random_range(1.0..=psi);
    let t = rng.random_range(0.0..=psi / h - 1.0);
    let u: f64 = rng.random();
    let pi_min = 1.0 / (n as f64 * h.powf(u));
    NetworkParams {
        lambda,
        smoothness,
        strong_convexity,
        n,
        m_min,
        m_max,
        psi,
        pi_max: h * pi_min,
        pi_min,
        t,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub alpha_multiplier: f64,
    pub smoothness: f64,
    pub strong_convexity: f64,
    pub lambda: f64,
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    pub big_m: usize,
    pub pi_max: f64,
    pub pi_min: f64,
    pub t: f64,
    pub alpha: f64,
    pub alpha_bar: f64,
    pub gamma: f64,
    pub gamma_working: f64,
    pub rho: f64,
    pub inequalities: [bool; 4],
    pub guaranteed: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub kind: &'static str,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "index,alpha_multiplier,L,mu,lambda,psi,n,m,M,pi_max,pi_min,T,alpha,alpha_bar,gamma,gamma_working,rho,e1,e2,e3,e4,guaranteed,pass\n",
        );
        for r in &self.rows {
            let floats = [
                r.alpha_multiplier,
                r.smoothness,
                r.strong_convexity,
                r.lambda,
                r.psi,
            ]
            .map(fmt_float)
            .join(",");
            let tail = [r.pi_max, r.pi_min, r.t, r.alpha, r.alpha_bar, r.gamma, r.gamma_working, r.rho]
                .map(fmt_float)
                .join(",");
            let [e1, e2, e3, e4] = r.inequalities;
            s.push_str(&format!(
                "{},{floats},{},{},{},{tail},{e1},{e2},{e3},{e4},{},{}\n",
                r.index, r.n, r.m, r.big_m, r.guaranteed, r.pass
            ));
        }
        s
    }

    /// Rows at multiplier one, the stepsize the guarantee is stated for.
    pub fn at_alpha_bar(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.alpha_multiplier == 1.0)
    }
}

/// Certifies `tuples` random parameter tuples, each at `alpha_bar` times
/// every configured multiplier. The draw depends only on the first seed.
pub fn sweep_rows(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let spec = &cfg.sweep;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seeds[0]);
    let mut rows = Vec::with_capacity(spec.tuples * spec.alpha_multipliers.len());
    for index in 0..spec.tuples {
        let p = random_network_params(&mut rng, spec.max_nodes, spec.max_count);
        for &c in &spec.alpha_multipliers {
            let cert = certify(c * p.alpha_bar(), &p)?;
            rows.push(SweepRow {
                index,
                alpha_multiplier: c,
                smoothness: p.smoothness,
                strong_convexity: p.strong_convexity,
                lambda: p.lambda,
                psi: p.psi,
                n: p.n,
                m: p.m_min,
                big_m: p.m_max,
                pi_max: p.pi_max,
                pi_min: p.pi_min,
                t: p.t,
                alpha: cert.alpha,
                alpha_bar: cert.alpha_bar,
                gamma: cert.gamma_closed_form,
                gamma_working: cert.gamma_working,
                rho: cert.rho,
                inequalities: cert.inequalities,
                guaranteed: cert.guaranteed,
                pass: cert.passes(),
            });
        }
    }
    Ok(rows)
}

pub fn run_certify_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let report = SweepReport {
        kind: "certify_sweep",
        seed: cfg.seeds[0],
        rows: sweep_rows(cfg)?,
        artifacts: Vec::new(),
    };
    let mut out = OutputDir::create(&cfg.output_dir)?;
    let hash = cfg.content_hash();
    out.write_bytes("certificates.csv", report.to_csv().as_bytes(), artifact("certificates", None, Some(report.seed), hash.clone()))?;
    out.write_json("summary.json", &report, artifact("summary", None, Some(report.seed), hash.clone()))?;
    let artifacts = out.finish("certify_sweep", hash, cfg.seeds.clone())?;
    Ok(SweepReport { artifacts, ..report })
}
