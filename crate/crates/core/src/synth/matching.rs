//! Minimum-cost pairing of computed and reference tuples (Hungarian method).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Euclidean distance between two tuples.
pub fn tuple_distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = *x - *y;
            d.re.to_f64_lossy().powi(2) + d.im.to_f64_lossy().powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Pairs `reference[j]` with `computed[assignment[j]]`, minimizing the total
/// Euclidean tuple distance.
pub fn match_eigenvalues<T: Real>(computed: &[Vec<Complex<T>>], reference: &[Vec<Complex<T>>]) -> Result<Vec<usize>> {
    if computed.len() != reference.len() {
        return Err(Error::CountMismatch(computed.len(), reference.len()));
    }
    let n = reference.len();
    let cost: Vec<Vec<f64>> = reference
        .iter()
        .map(|r| computed.iter().map(|c| tuple_distance(c, r)).collect())
        .collect();
    Ok(hungarian(&cost, n))
}

/// Square assignment problem: row `i` gets column `result[i]`.
/// Non-finite costs are treated as very large.
pub fn hungarian(cost: &[Vec<f64>], n: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let big = cost
        .iter()
        .flatten()
        .copied()
        .filter(|c| c.is_finite())
        .fold(0.0f64, f64::max)
        * 4.0
        + 1.0;
    let c = |i: usize, j: usize| {
        let v = cost[i][j];
        if v.is_finite() {
            v
        } else {
            big
        }
    };
    // potentials and augmenting paths, 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut result = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            result[p[j] - 1] = j - 1;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_from_seed;
    use crate::scalar::cplx;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn tuples(v: &[(f64, f64)]) -> Vec<Vec<Complex<f64>>> {
        v.iter().map(|&(a, b)| vec![cplx(a, 0.0), cplx(b, 0.0)]).collect()
    }

    fn total(cost: &[Vec<f64>], perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
    }

    #[test]
    fn identical_and_reversed() {
        let t = tuples(&[(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (3.0, 3.0)]);
        assert_eq!(match_eigenvalues(&t, &t).unwrap(), vec![0, 1, 2, 3]);
        let mut r = t.clone();
        r.reverse();
        assert_eq!(match_eigenvalues(&r, &t).unwrap(), vec![3, 2, 1, 0]);
        assert_eq!(match_eigenvalues(&t[..2], &t), Err(Error::CountMismatch(2, 4)));
    }

    #[test]
    fn beats_random_permutations() {
        let mut rng = rng_from_seed(4);
        let n = 7;
        let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
        let best = hungarian(&cost, n);
        let mut seen = best.clone();
        seen.sort();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let opt = total(&cost, &best);
        let mut perm: Vec<usize> = (0..n).collect();
        for _ in 0..100 {
            perm.shuffle(&mut rng);
            assert!(opt <= total(&cost, &perm) + 1e-12);
        }
    }

    #[test]
    fn exhaustive_small() {
        let mut rng = rng_from_seed(9);
        for _ in 0..20 {
            let n = 5;
            let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
            let opt = total(&cost, &hungarian(&cost, n));
            let mut best = f64::INFINITY;
            permute(&mut (0..n).collect::<Vec<_>>(), 0, &mut |p| best = best.min(total(&cost, p)));
            assert!((opt - best).abs() < 1e-12);
        }
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }
}
