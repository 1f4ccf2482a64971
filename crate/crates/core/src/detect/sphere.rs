//! Depth-first sphere decoding with Schnorr–Euchner enumeration.

use std::ops::AddAssign;

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::CMatrix;

/// Search effort counters.
///
/// `cm_count` follows a coarse model: one complex multiplication per
/// `R_ij·s_j` product (complex-by-real products on the diagonal count as one).
/// Expanding a node at level `i` of an `n`-level tree costs `n − 1 − i` CMs
/// for the interference term plus one per constellation point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DetectionStats {
    /// Tree nodes entered (partial metric below the current radius).
    pub sd_nodes_visited: u64,
    pub cm_count: u64,
    /// Number of sphere decoder invocations.
    pub sd_calls: u64,
}

impl AddAssign for DetectionStats {
    fn add_assign(&mut self, rhs: Self) {
        self.sd_nodes_visited += rhs.sd_nodes_visited;
        self.cm_count += rhs.cm_count;
        self.sd_calls += rhs.sd_calls;
    }
}

/// Exact `argmin_s ‖z − R·s‖²` over constellation vectors `s`.
///
/// The tree is searched from the last coordinate down; children are visited
/// in order of increasing incremental metric (lowest point index on equal
/// metrics) and the radius starts at infinity, shrinking at every better
/// leaf. A leaf only replaces the incumbent when strictly better, so among
/// equal-metric leaves the first one reached wins.
///
/// Returns constellation indices. `r` must be upper triangular with a nonzero
/// diagonal; only its upper triangle is read.
pub fn sphere_decode(
    r: &CMatrix,
    z: &[Complex64],
    cs: &Constellation,
    stats: &mut DetectionStats,
) -> Vec<usize> {
    let n = z.len();
    assert_eq!(r.nrows(), n, "R must be {n}x{n}");
    assert_eq!(r.ncols(), n, "R must be {n}x{n}");
    stats.sd_calls += 1;
    if n == 0 {
        return Vec::new();
    }
    let q = cs.len();
    let mut children: Vec<Vec<(f64, usize)>> = vec![Vec::with_capacity(q); n];
    let mut next = vec![0usize; n];
    let mut current = vec![0usize; n];
    // partial[i] = metric of levels i..n−1; partial[n] = 0
    let mut partial = vec![0.0f64; n + 1];
    let mut best = vec![0usize; n];
    let mut radius = f64::INFINITY;

    let expand = |level: usize,
                  current: &[usize],
                  children: &mut Vec<Vec<(f64, usize)>>,
                  stats: &mut DetectionStats| {
        let mut b = z[level];
        for j in level + 1..n {
            b -= r[(level, j)] * cs.point(current[j]);
        }
        let rii = r[(level, level)];
        let list = &mut children[level];
        list.clear();
        list.extend(cs.points().iter().enumerate().map(|(i, p)| ((b - rii * p).norm_sqr(), i)));
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        stats.cm_count += (n - 1 - level + q) as u64;
    };

    let mut level = n - 1;
    expand(level, &current, &mut children, stats);
    next[level] = 0;
    loop {
        if next[level] < children[level].len() {
            let (inc, idx) = children[level][next[level]];
            next[level] += 1;
            let metric = partial[level + 1] + inc;
            if metric >= radius {
                // remaining siblings are no better
                next[level] = children[level].len();
                continue;
            }
            stats.sd_nodes_visited += 1;
            current[level] = idx;
            partial[level] = metric;
            if level == 0 {
                radius = metric;
                best.copy_from_slice(&current);
                next[0] = children[0].len();
            } else {
                level -= 1;
                expand(level, &current, &mut children, stats);
                next[level] = 0;
            }
        } else if level == n - 1 {
            break;
        } else {
            level += 1;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::detect::sqrd::sqrd;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute force over all |cs|^n vectors; lexicographically first on ties.
    fn brute_force(r: &CMatrix, z: &[Complex64], cs: &Constellation) -> Vec<usize> {
        let n = z.len();
        let q = cs.len();
        let mut idx = vec![0usize; n];
        let mut best = idx.clone();
        let mut best_metric = f64::INFINITY;
        loop {
            let s = cs.map(&idx);
            let mut metric = 0.0;
            for i in 0..n {
                let mut acc = z[i];
                for j in i..n {
                    acc -= r[(i, j)] * s[j];
                }
                metric += acc.norm_sqr();
            }
            if metric < best_metric {
                best_metric = metric;
                best = idx.clone();
            }
            let mut pos = n;
            loop {
                if pos == 0 {
                    return best;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < q {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    #[test]
    fn identity_noiseless() {
        let cs = Constellation::qpsk();
        let n = 5;
        let truth = vec![0, 3, 2, 1, 1];
        let z = cs.map(&truth);
        let mut stats = DetectionStats::default();
        let out = sphere_decode(&CMatrix::identity(n, n), &z, &cs, &mut stats);
        assert_eq!(out, truth);
        assert_eq!(stats.sd_nodes_visited, n as u64);
        assert_eq!(stats.sd_calls, 1);
    }

    #[test]
    fn noiseless_triangular() {
        let cs = Constellation::qam16();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let f = CMatrix::from_fn(6, 4, |_, _| complex_gaussian(&mut rng, 1.0));
            let r = sqrd(&f).unwrap().r;
            let truth: Vec<usize> = (0..4).map(|_| rng.random_range(0..16)).collect();
            let z = (&r * nalgebra::DVector::from_vec(cs.map(&truth))).as_slice().to_vec();
            let mut stats = DetectionStats::default();
            assert_eq!(sphere_decode(&r, &z, &cs, &mut stats), truth);
        }
    }

    #[test]
    fn matches_brute_force() {
        let cs = Constellation::qpsk();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..200 {
            let n = 1 + trial % 6;
            let f = CMatrix::from_fn(n + 1, n, |_, _| complex_gaussian(&mut rng, 1.0));
            let r = sqrd(&f).unwrap().r;
            let z: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng, 2.0)).collect();
            let mut stats = DetectionStats::default();
            assert_eq!(sphere_decode(&r, &z, &cs, &mut stats), brute_force(&r, &z, &cs));
        }
    }

    #[test]
    fn counts_are_deterministic_and_additive() {
        let cs = Constellation::qpsk();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = CMatrix::from_fn(6, 6, |_, _| complex_gaussian(&mut rng, 1.0));
        let r = sqrd(&f).unwrap().r;
        let z: Vec<Complex64> = (0..6).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let mut a = DetectionStats::default();
        let mut b = DetectionStats::default();
        sphere_decode(&r, &z, &cs, &mut a);
        sphere_decode(&r, &z, &cs, &mut b);
        assert_eq!(a, b);
        assert!(a.cm_count >= 6 * 4);
        let mut total = a;
        total += b;
        assert_eq!(total.sd_nodes_visited, 2 * a.sd_nodes_visited);
    }

    #[test]
    fn empty_problem() {
        let mut stats = DetectionStats::default();
        let out = sphere_decode(&CMatrix::zeros(0, 0), &[], &Constellation::qpsk(), &mut stats);
        assert!(out.is_empty());
    }
}
