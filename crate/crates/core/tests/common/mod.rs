//! Seeded random corpora of joint distributions shared by the integration tests.

#![allow(dead_code)]

use qentropic::JointDistribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Normalised random weights; roughly one cell in six is an exact zero.
pub fn random_cells<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| if rng.gen_bool(1.0 / 6.0) { 0.0 } else { rng.gen::<f64>() }).collect();
        let total: f64 = raw.iter().sum();
        if total > 1e-3 {
            return raw.into_iter().map(|w| w / total).collect();
        }
    }
}

pub fn random_joint<R: Rng>(rng: &mut R) -> JointDistribution {
    let rows = rng.gen_range(2..=4);
    let cols = rng.gen_range(2..=4);
    JointDistribution::from_cells(rows, cols, random_cells(rng, rows * cols)).unwrap()
}

pub fn joint_corpus(seed: u64, n: usize) -> Vec<JointDistribution> {
    let mut rng = rng(seed);
    (0..n).map(|_| random_joint(&mut rng)).collect()
}

/// `p(x, y, z)` stored with `z` fastest.
#[derive(Debug, Clone)]
pub struct Triple {
    pub dims: [usize; 3],
    pub cells: Vec<f64>,
}

impl Triple {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let dims = [rng.gen_range(2..=4), rng.gen_range(2..=4), rng.gen_range(2..=4)];
        Triple { dims, cells: random_cells(rng, dims.iter().product()) }
    }

    /// Joint of the composite variables `rows` and `cols` (indices into `[X, Y, Z]`),
    /// marginalising every variable listed in neither.
    pub fn group(&self, rows: &[usize], cols: &[usize]) -> JointDistribution {
        let radix = |vars: &[usize], idx: [usize; 3]| vars.iter().fold(0, |acc, &v| acc * self.dims[v] + idx[v]);
        let size = |vars: &[usize]| vars.iter().map(|&v| self.dims[v]).product::<usize>();
        let (nr, nc) = (size(rows), size(cols));
        let mut out = vec![0.0; nr * nc];
        let [dx, dy, dz] = self.dims;
        for x in 0..dx {
            for y in 0..dy {
                for z in 0..dz {
                    let idx = [x, y, z];
                    out[radix(rows, idx) * nc + radix(cols, idx)] += self.cells[(x * dy + y) * dz + z];
                }
            }
        }
        JointDistribution::from_cells(nr, nc, out).unwrap()
    }
}

pub fn triple_corpus(seed: u64, n: usize) -> Vec<Triple> {
    let mut rng = rng(seed);
    (0..n).map(|_| Triple::random(&mut rng)).collect()
}

pub const X: usize = 0;
pub const Y: usize = 1;
pub const Z: usize = 2;
