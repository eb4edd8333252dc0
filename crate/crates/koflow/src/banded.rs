//! Banded real matrices with an LU factorization using partial pivoting.

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Square matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i − kl ..= i + kl + ku`; the extra `kl` slots hold the fill
/// created by row interchanges during factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Banded {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.kl
    }

    pub fn upper(&self) -> usize {
        self.ku
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// Panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band ({}, {})",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    fn cols(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i.saturating_sub(self.kl)..=(i + self.ku).min(self.n - 1)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.cols(i).map(|j| self.data[self.slot(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Banded {
        let mut t = Banded::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            for j in self.cols(i) {
                t.add(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in self.cols(i) {
                m[(i, j)] = self.get(i, j);
            }
        }
        m
    }

    /// Largest entry of `A + Aᵀ`.
    pub fn skew_residual(&self) -> f64 {
        let mut r = 0.0_f64;
        for i in 0..self.n {
            for j in self.cols(i) {
                r = r.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        r
    }

    pub fn lu(&self) -> Result<BandedLu> {
        BandedLu::factor(self)
    }
}

/// `PA = LU`; multipliers stay in the rows where they were created and the
/// interchanges are replayed in order during the solve.
#[derive(Debug, Clone)]
pub struct BandedLu {
    a: Banded,
    piv: Vec<usize>,
}

impl BandedLu {
    fn factor(src: &Banded) -> Result<Self> {
        let mut a = src.clone();
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let mut piv = vec![0; n];
        let scale = a.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = a.data[a.slot(k, k)].abs();
            for i in k + 1..=last_row {
                let v = a.data[a.slot(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= f64::EPSILON * scale * n as f64 {
                return Err(Error::Numerical(format!(
                    "banded matrix is numerically singular at column {k}"
                )));
            }
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (sk, sp) = (a.slot(k, j), a.slot(p, j));
                    a.data.swap(sk, sp);
                }
            }
            let pivot = a.data[a.slot(k, k)];
            for i in k + 1..=last_row {
                let sik = a.slot(i, k);
                let l = a.data[sik] / pivot;
                a.data[sik] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let (sij, skj) = (a.slot(i, j), a.slot(k, j));
                        a.data[sij] -= l * a.data[skj];
                    }
                }
            }
        }
        Ok(BandedLu { a, piv })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let a = &self.a;
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    x[i] -= a.data[a.slot(i, k)] * xk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..=(i + kl + ku).min(n - 1) {
                acc -= a.data[a.slot(i, j)] * x[j];
            }
            x[i] = acc / a.data[a.slot(i, i)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian, rng};

    fn random_banded(seed: u64, n: usize, kl: usize, ku: usize, skew: bool) -> Banded {
        let g = gaussian(&mut rng(seed), n, n);
        let mut a = Banded::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let v = if skew { g[(i, j)] - g[(j, i)] } else { g[(i, j)] };
                a.add(i, j, v);
            }
        }
        a
    }

    #[test]
    fn solve_matches_dense_lu() {
        for (seed, n, kl, ku, skew) in [(1, 30, 2, 3, false), (2, 40, 4, 4, true), (3, 8, 0, 0, false)] {
            let a = random_banded(seed, n, kl, ku, skew);
            let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let x = a.lu().unwrap().solve(&b);
            let dense = a.to_dense().lu().solve(&Mat::from_column_slice(n, 1, &b)).unwrap();
            for i in 0..n {
                assert!((x[i] - dense[i]).abs() <= 1e-9 * dense.amax().max(1.0), "seed {seed}");
            }
            let back = a.matvec(&x);
            for i in 0..n {
                assert!((back[i] - b[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_diagonal_needs_pivoting() {
        // Skew tridiagonal of even size is invertible with an all-zero diagonal.
        let n = 6;
        let mut a = Banded::zeros(n, 1, 1);
        for i in 0..n - 1 {
            a.add(i, i + 1, 1.0);
            a.add(i + 1, i, -1.0);
        }
        assert_eq!(a.skew_residual(), 0.0);
        let b = vec![1.0; n];
        let x = a.lu().unwrap().solve(&b);
        assert_eq!(a.matvec(&x), b);
    }

    #[test]
    fn singular_and_structure() {
        let mut a = Banded::zeros(3, 1, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        assert!(matches!(a.lu(), Err(Error::Numerical(_))));
        assert_eq!(a.get(0, 2), 0.0);
        assert_eq!(a.transpose().to_dense(), a.to_dense().transpose());
    }

    #[test]
    #[should_panic(expected = "outside band")]
    fn add_outside_band_panics() {
        Banded::zeros(4, 1, 0).add(0, 1, 1.0);
    }
}
