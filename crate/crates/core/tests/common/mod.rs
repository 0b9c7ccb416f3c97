#![allow(dead_code)]

use corrarms::{CorrelationMatrix, DistanceMatrix};
use rand::Rng;

/// Random correlation matrix with non-negative entries from a non-negative
/// factor model `W Wᵀ + diag(ψ)`, rescaled to unit diagonal.
pub fn random_correlation<R: Rng>(k: usize, rng: &mut R) -> CorrelationMatrix {
    let factors = 2;
    let w: Vec<f64> = (0..k * factors).map(|_| rng.random::<f64>()).collect();
    let psi: Vec<f64> = (0..k).map(|_| 0.05 + rng.random::<f64>()).collect();
    let mut c = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let mut v: f64 = (0..factors).map(|f| w[i * factors + f] * w[j * factors + f]).sum();
            if i == j {
                v += psi[i];
            }
            c[i * k + j] = v;
        }
    }
    let mut e = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            e[i * k + j] = if i == j { 1.0 } else { c[i * k + j] / (c[i * k + i] * c[j * k + j]).sqrt() };
        }
    }
    for i in 0..k {
        for j in 0..i {
            e[i * k + j] = e[j * k + i];
        }
    }
    CorrelationMatrix::from_row_major(k, e).unwrap()
}

/// Random symmetric non-negative distances with zero diagonal.
pub fn random_distances<R: Rng>(k: usize, rng: &mut R) -> DistanceMatrix {
    let mut d = vec![0.0; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let v = rng.random::<f64>();
            d[i * k + j] = v;
            d[j * k + i] = v;
        }
    }
    DistanceMatrix::from_row_major(k, d).unwrap()
}

/// Reference implementation straight from the definitions, over ordered
/// pairs and bitmask-enumerated subsets.
pub mod reference {
    use corrarms::DistanceMatrix;

    pub fn subsets(of: &[usize], h: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for mask in 0u32..(1 << of.len()) {
            if mask.count_ones() as usize == h {
                out.push((0..of.len()).filter(|p| mask & (1 << p) != 0).map(|p| of[p]).collect());
            }
        }
        out
    }

    pub fn score(d: &DistanceMatrix, s: &[usize]) -> f64 {
        let mut sum = 0.0;
        for &j in s {
            for &l in s {
                if j != l {
                    sum += d.get(j, l);
                }
            }
        }
        sum
    }

    pub fn ratio_d(d: &DistanceMatrix, a: &[usize], b: &[usize]) -> f64 {
        let both = |j: usize| a.contains(&j) && b.contains(&j);
        let part = |s: &[usize]| {
            let mut sum = 0.0;
            for &j in s {
                for &l in s {
                    if j != l && !(both(j) && both(l)) {
                        sum += d.get(j, l);
                    }
                }
            }
            sum
        };
        let (num, den) = (part(b), part(a));
        if den == 0.0 {
            if num == 0.0 { 1.0 } else { f64::INFINITY }
        } else {
            num / den
        }
    }

    pub fn best_subset(d: &DistanceMatrix, h: usize) -> Vec<usize> {
        let all: Vec<usize> = (0..d.dim()).collect();
        let mut best: Option<(f64, Vec<usize>)> = None;
        for s in subsets(&all, h) {
            let v = score(d, &s);
            let better = match &best {
                None => true,
                Some((bv, bs)) => v < *bv || (v == *bv && s < *bs),
            };
            if better {
                best = Some((v, s));
            }
        }
        best.unwrap().1
    }

    pub fn ratio_r(d: &DistanceMatrix, opt: &[usize], i: usize) -> f64 {
        let all: Vec<usize> = (0..d.dim()).collect();
        subsets(&all, opt.len())
            .into_iter()
            .filter(|b| b.contains(&i))
            .map(|b| ratio_d(d, opt, &b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn statistic_u(d: &DistanceMatrix, active: &[usize], i: usize, h: usize) -> f64 {
        let sets = subsets(active, h);
        let mut best = f64::NEG_INFINITY;
        for a in &sets {
            let mut inner = f64::INFINITY;
            for b in sets.iter().filter(|b| b.contains(&i)) {
                inner = inner.min(ratio_d(d, a, b));
            }
            best = best.max(inner);
        }
        best
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a == b) || (a - b).abs() <= tol * a.abs().max(1.0)
}
