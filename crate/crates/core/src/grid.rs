//! Periodic box `[0, L)^d` sampled with `n` points per axis.
//!
//! Mode indices are stored in FFT order: index `i` carries the integer mode
//! `k = i` for `i <= n/2` and `k = i - n` otherwise, so the per-axis mode set is
//! `{-n/2+1, ..., n/2}` and the frequency is `xi = k / L`.
//!
//! Every Fourier multiplier in the crate is evaluated at the *effective*
//! wavevector, which equals `xi` except that components sitting on the Nyquist
//! index `n/2` are replaced by zero. This keeps real fields real and makes all
//! multiplier identities hold mode by mode, Nyquist planes included.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    n: usize,
    length: T,
    /// Effective per-axis frequencies in index order (Nyquist zeroed).
    eff: Vec<T>,
}

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, n: usize, length: T) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::Config(format!("dimension {dim} not in {{2, 3, 4}}")));
        }
        if n % 2 != 0 {
            return Err(Error::Config(format!("samples per axis must be even, got {n}")));
        }
        if !(8..=512).contains(&n) {
            return Err(Error::Config(format!("samples per axis must lie in [8, 512], got {n}")));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::Config(format!("box length must be positive, got {length}")));
        }
        let eff = (0..n)
            .map(|i| {
                if i == n / 2 {
                    T::zero()
                } else {
                    T::lit(mode_number(i, n) as f64) / length
                }
            })
            .collect();
        Ok(Self { dim, n, length, eff })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self) -> T {
        self.length
    }

    /// Number of points (equivalently, modes): `n^d`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.length / T::count(self.n)
    }

    /// Integer mode carried by axis index `i`.
    #[inline]
    pub fn mode_number(&self, i: usize) -> i64 {
        mode_number(i, self.n)
    }

    /// Frequencies `k / L` per axis in index order, Nyquist included.
    pub fn frequencies(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| T::lit(self.mode_number(i) as f64) / self.length)
            .collect()
    }

    /// Effective frequency for axis index `i` (zero on the Nyquist index).
    #[inline]
    pub fn effective_frequency(&self, i: usize) -> T {
        self.eff[i]
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    pub fn unravel(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Flat index of the mode `-k` (mod n), the Hermitian partner of `flat`.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let idx = self.unravel(flat);
        let mut out = [0; MAX_DIM];
        for a in 0..self.dim {
            out[a] = (self.n - idx[a]) % self.n;
        }
        self.ravel(&out)
    }

    /// Effective wavevector of a flat mode index.
    pub fn wavevector(&self, flat: usize) -> [T; MAX_DIM] {
        let idx = self.unravel(flat);
        let mut xi = [T::zero(); MAX_DIM];
        for a in 0..self.dim {
            xi[a] = self.eff[idx[a]];
        }
        xi
    }

    /// Effective wavevectors of every mode, in flat order.
    pub fn wavevectors(&self) -> Wavevectors<'_, T> {
        Wavevectors {
            grid: self,
            idx: [0; MAX_DIM],
            remaining: self.len(),
        }
    }

    /// Physical coordinates of every point, in flat order.
    pub fn points(&self) -> impl Iterator<Item = [T; MAX_DIM]> + '_ {
        let h = self.spacing();
        (0..self.len()).map(move |flat| {
            let idx = self.unravel(flat);
            let mut x = [T::zero(); MAX_DIM];
            for a in 0..self.dim {
                x[a] = T::count(idx[a]) * h;
            }
            x
        })
    }

    /// `true` when the mode survives the 2/3 truncation rule on every axis.
    pub fn inside_two_thirds(&self, flat: usize) -> bool {
        let idx = self.unravel(flat);
        idx[..self.dim]
            .iter()
            .all(|&i| 3 * (self.mode_number(i).unsigned_abs() as usize) < self.n)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }
}

#[inline]
fn mode_number(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Odometer over the effective wavevectors of a grid.
pub struct Wavevectors<'a, T> {
    grid: &'a Grid<T>,
    idx: [usize; MAX_DIM],
    remaining: usize,
}

impl<T: Real> Iterator for Wavevectors<'_, T> {
    type Item = [T; MAX_DIM];

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let g = self.grid;
        let mut xi = [T::zero(); MAX_DIM];
        for a in 0..g.dim {
            xi[a] = g.eff[self.idx[a]];
        }
        for a in (0..g.dim).rev() {
            self.idx[a] += 1;
            if self.idx[a] < g.n {
                break;
            }
            self.idx[a] = 0;
        }
        Some(xi)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl<T: Real> ExactSizeIterator for Wavevectors<'_, T> {}

/// Unit vector `xi / |xi|` and `|xi|`, or `None` for a mean-like mode.
#[inline]
pub fn unit_and_norm<T: Real>(xi: &[T; MAX_DIM], dim: usize) -> Option<([T; MAX_DIM], T)> {
    let r2: T = xi[..dim].iter().map(|&x| x * x).sum();
    if r2 == T::zero() {
        return None;
    }
    let r = r2.sqrt();
    let mut u = [T::zero(); MAX_DIM];
    for a in 0..dim {
        u[a] = xi[a] / r;
    }
    Some((u, r))
}
