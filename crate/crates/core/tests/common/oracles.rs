//! Reference implementations used to check the library by an independent route.
#![allow(dead_code)]

use nalgebra::DMatrix;

pub fn fibonacci(n: usize) -> Vec<u64> {
    let mut f = vec![1u64, 1];
    while f.len() < n {
        let k = f.len();
        f.push(f[k - 1] + f[k - 2]);
    }
    f.truncate(n);
    f
}

/// Individual-level greedy breeding: every round, mature collectibles with
/// charges left are taken oldest first in groups of `d`; each group makes one
/// child that exists from the next round on.
pub fn greedy_pairing_population(initial: u64, d: usize, limit: Option<u32>, delay: u64, horizon: usize) -> Vec<u64> {
    #[derive(Clone, Copy)]
    struct Individual {
        born: u64,
        used: u32,
    }
    let mut pop: Vec<Individual> = (0..initial).map(|_| Individual { born: 0, used: 0 }).collect();
    let mut sizes = vec![pop.len() as u64];
    for round in 0..horizon as u64 {
        let eligible: Vec<usize> = (0..pop.len())
            .filter(|&i| {
                let c = pop[i];
                (c.born == 0 || round >= c.born + delay) && limit.is_none_or(|l| c.used < l)
            })
            .collect();
        let groups = eligible.len() / d;
        for &i in &eligible[..groups * d] {
            pop[i].used += 1;
        }
        for _ in 0..groups {
            pop.push(Individual { born: round + 1, used: 0 });
        }
        sizes.push(pop.len() as u64);
    }
    sizes
}

/// Gaussian elimination with partial pivoting. `None` for a singular system.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, &bi)| {
        let mut r = row.clone();
        r.push(bi);
        r
    }).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    Some(x)
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Largest violation of the four Penrose conditions, each scaled by the size
/// of the matrix it compares against.
pub fn penrose_residual(a: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let scale = |m: &DMatrix<f64>| max_abs(m).max(1.0);
    let apa = a * p * a;
    let pap = p * a * p;
    let ap = a * p;
    let pa = p * a;
    [
        max_abs(&(&apa - a)) / scale(a),
        max_abs(&(&pap - p)) / scale(p),
        max_abs(&(&ap - ap.transpose())) / scale(&ap),
        max_abs(&(&pa - pa.transpose())) / scale(&pa),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Expected fractional gain computed straight from the branch table.
pub fn expected_gain(branches: &[(f64, f64)]) -> f64 {
    branches.iter().map(|(p, m)| p * (m - 1.0)).sum()
}
