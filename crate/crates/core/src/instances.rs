//! Seeded random problem instances for property checks and benchmarks.

use crate::binom_dpp::{BinomialData, EtaGaussianPrior, LogitGaussianPrior};
use crate::error::Result;
use crate::gauss_dpp::{Direction, GaussianBelief};
use crate::rng::{domain, StreamRng};
use crate::symlin::{SymMatrix, Vector};

/// Instance generator on its own RNG domain, one stream per instance family.
pub struct InstanceGen {
    rng: StreamRng,
}

impl InstanceGen {
    pub fn new(seed: u64, family: u64) -> Self {
        InstanceGen {
            rng: StreamRng::new(seed, domain::TEST_INSTANCES, family),
        }
    }

    pub fn rng(&mut self) -> &mut StreamRng {
        &mut self.rng
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.uniform_range(lo, hi)
    }

    pub fn int(&mut self, lo: u64, hi: u64) -> u64 {
        lo + ((hi - lo + 1) as f64 * self.rng.uniform()) as u64
    }

    pub fn vector(&mut self, dim: usize, lo: f64, hi: f64) -> Vector {
        Vector::new((0..dim).map(|_| self.uniform(lo, hi)).collect()).expect("finite")
    }

    pub fn normal_vector(&mut self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        self.rng.fill_normal(&mut v);
        v
    }

    /// `Q diag(e) Qᵀ` with Haar-like `Q` and eigenvalues log-uniform on
    /// `[scale, scale · cond]`.
    pub fn spd(&mut self, dim: usize, scale: f64, cond: f64) -> SymMatrix {
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(dim);
        while q.len() < dim {
            let mut v = self.normal_vector(dim);
            for u in &q {
                let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= p * y;
                }
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-6 {
                q.push(v.into_iter().map(|x| x / n).collect());
            }
        }
        let eig: Vec<f64> = (0..dim).map(|_| scale * cond.powf(self.rng.uniform())).collect();
        SymMatrix::from_fn(dim, |i, j| (0..dim).map(|k| q[k][i] * eig[k] * q[k][j]).sum()).expect("finite")
    }

    pub fn diagonal(&mut self, dim: usize, lo: f64, hi: f64) -> SymMatrix {
        let d: Vec<f64> = (0..dim).map(|_| self.uniform(lo, hi)).collect();
        SymMatrix::diagonal(&d).expect("positive")
    }

    pub fn direction(&mut self, dim: usize) -> Direction {
        loop {
            if let Ok(d) = Direction::from_slice(&self.normal_vector(dim)) {
                return d;
            }
        }
    }

    /// Prior and likelihood with general SPD covariances.
    pub fn belief_pair(&mut self, dim: usize) -> Result<(GaussianBelief, GaussianBelief)> {
        let prior = GaussianBelief::prior(self.vector(dim, -3.0, 3.0), self.spd(dim, 0.1, 100.0))?;
        let lik = GaussianBelief::likelihood(self.vector(dim, -3.0, 3.0), self.spd(dim, 0.1, 100.0))?;
        Ok((prior, lik))
    }

    /// Prior and likelihood with diagonal covariances.
    pub fn diagonal_pair(&mut self, dim: usize) -> Result<(GaussianBelief, GaussianBelief)> {
        let prior = GaussianBelief::prior(self.vector(dim, -3.0, 3.0), self.diagonal(dim, 0.05, 20.0))?;
        let lik = GaussianBelief::likelihood(self.vector(dim, -3.0, 3.0), self.diagonal(dim, 0.05, 20.0))?;
        Ok((prior, lik))
    }

    /// Counts with at least one success and one failure per arm.
    pub fn binomial(&mut self, n_lo: u64, n_hi: u64) -> BinomialData {
        let n0 = self.int(n_lo, n_hi);
        let n1 = self.int(n_lo, n_hi);
        let y0 = self.int(1, n0 - 1);
        let y1 = self.int(1, n1 - 1);
        BinomialData::new(y0, n0, y1, n1).expect("valid counts")
    }

    pub fn eta_prior(&mut self) -> EtaGaussianPrior {
        EtaGaussianPrior::new(
            self.uniform(0.1, 0.9),
            self.uniform(-0.4, 0.4),
            self.uniform(0.05, 1.0),
            self.uniform(0.05, 1.0),
            self.uniform(-0.9, 0.9),
        )
        .expect("valid prior")
    }

    pub fn logit_prior(&mut self) -> LogitGaussianPrior {
        LogitGaussianPrior::new(
            [self.uniform(-2.0, 2.0), self.uniform(-2.0, 2.0)],
            self.uniform(0.3, 3.0),
            self.uniform(0.3, 3.0),
            self.uniform(-0.9, 0.9),
        )
        .expect("valid prior")
    }
}
