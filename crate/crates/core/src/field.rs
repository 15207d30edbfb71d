//! Sampled fields on a [`Grid`] in physical or spectral representation.
//!
//! Storage is point-major (or mode-major) with components fastest-varying.
//! Symmetric matrices store their upper triangle row-major, anti-symmetric
//! matrices their strict upper triangle row-major. The forward transform is
//! scaled by `1/n^d`, so spectral coefficients are Fourier-series coefficients
//! and Parseval reads `mean |f|^2 = sum |f_hat|^2`.

use std::fmt::Debug;
use std::marker::PhantomData;
use std::ops::{Add, Neg, Sub};

use rustfft::num_complex::Complex;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::grid::{Grid, MAX_DIM};
use crate::scalar::Real;

/// Upper bound on components per point (a general 4x4 matrix).
pub const MAX_COMPONENTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rep {
    Physical,
    Spectral,
}

/// Component layout of a field.
pub trait Kind: Copy + Clone + Debug + Default + PartialEq + Send + Sync + 'static {
    const NAME: &'static str;

    fn components(dim: usize) -> usize;

    /// Weight of component `c` in the Frobenius inner product.
    fn weight(dim: usize, c: usize) -> f64;
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Scalar;
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vector;
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymMatrix;
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AntiSymMatrix;
/// General (non-symmetric) matrix, stored row-major with `d^2` components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Matrix;

impl Kind for Scalar {
    const NAME: &'static str = "scalar";
    fn components(_: usize) -> usize {
        1
    }
    fn weight(_: usize, _: usize) -> f64 {
        1.0
    }
}

impl Kind for Vector {
    const NAME: &'static str = "vector";
    fn components(dim: usize) -> usize {
        dim
    }
    fn weight(_: usize, _: usize) -> f64 {
        1.0
    }
}

impl Kind for SymMatrix {
    const NAME: &'static str = "symmatrix";
    fn components(dim: usize) -> usize {
        dim * (dim + 1) / 2
    }
    fn weight(dim: usize, c: usize) -> f64 {
        let (i, j) = sym_pair(dim, c);
        if i == j {
            1.0
        } else {
            2.0
        }
    }
}

impl Kind for AntiSymMatrix {
    const NAME: &'static str = "antisymmatrix";
    fn components(dim: usize) -> usize {
        dim * (dim - 1) / 2
    }
    fn weight(_: usize, _: usize) -> f64 {
        2.0
    }
}

impl Kind for Matrix {
    const NAME: &'static str = "matrix";
    fn components(dim: usize) -> usize {
        dim * dim
    }
    fn weight(_: usize, _: usize) -> f64 {
        1.0
    }
}

/// Packed index of the symmetric entry `(i, j)`.
#[inline]
pub fn sym_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * i.saturating_sub(1) / 2 + (j - i)
}

/// Entry `(i, j)` with `i <= j` addressed by packed symmetric index `c`.
#[inline]
pub fn sym_pair(dim: usize, c: usize) -> (usize, usize) {
    let mut start = 0;
    for i in 0..dim {
        let row = dim - i;
        if c < start + row {
            return (i, i + c - start);
        }
        start += row;
    }
    panic!("symmetric component {c} out of range for d = {dim}");
}

/// Packed index of the anti-symmetric entry `(i, j)`, `i < j`.
#[inline]
pub fn antisym_index(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    i * (dim - 1) - i * i.saturating_sub(1) / 2 + (j - i - 1)
}

/// Entry `(i, j)` with `i < j` addressed by packed anti-symmetric index `c`.
#[inline]
pub fn antisym_pair(dim: usize, c: usize) -> (usize, usize) {
    let mut start = 0;
    for i in 0..dim {
        let row = dim - 1 - i;
        if c < start + row {
            return (i, i + 1 + c - start);
        }
        start += row;
    }
    panic!("anti-symmetric component {c} out of range for d = {dim}");
}

#[derive(Clone, Debug)]
pub struct Field<T, K> {
    grid: Grid<T>,
    rep: Rep,
    data: Vec<Complex<T>>,
    kind: PhantomData<K>,
}

pub type ScalarField<T> = Field<T, Scalar>;
pub type VectorField<T> = Field<T, Vector>;
pub type SymMatrixField<T> = Field<T, SymMatrix>;
pub type AntiSymMatrixField<T> = Field<T, AntiSymMatrix>;
pub type MatrixField<T> = Field<T, Matrix>;

impl<T: Real, K: Kind> Field<T, K> {
    pub fn zeros(grid: &Grid<T>, rep: Rep) -> Self {
        let nc = K::components(grid.dim());
        Self {
            grid: grid.clone(),
            rep,
            data: vec![Complex::default(); grid.len() * nc],
            kind: PhantomData,
        }
    }

    pub fn from_data(grid: &Grid<T>, rep: Rep, data: Vec<Complex<T>>) -> Result<Self> {
        let expected = grid.len() * K::components(grid.dim());
        if data.len() != expected {
            return Err(Error::Usage(format!(
                "{} field on this grid needs {expected} values, got {}",
                K::NAME,
                data.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            rep,
            data,
            kind: PhantomData,
        })
    }

    /// Physical field sampled from `f(x, out)`, which writes the real components.
    pub fn from_fn(grid: &Grid<T>, mut f: impl FnMut(&[T; MAX_DIM], &mut [T])) -> Self {
        let nc = K::components(grid.dim());
        let mut out = Self::zeros(grid, Rep::Physical);
        let mut buf = vec![T::zero(); nc];
        for (p, x) in grid.points().enumerate() {
            buf.iter_mut().for_each(|b| *b = T::zero());
            f(&x, &mut buf);
            for c in 0..nc {
                out.data[p * nc + c] = Complex::new(buf[c], T::zero());
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn rep(&self) -> Rep {
        self.rep
    }

    #[inline]
    pub fn components(&self) -> usize {
        K::components(self.grid.dim())
    }

    #[inline]
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    /// Components stored at one point or mode.
    #[inline]
    pub fn at(&self, flat: usize) -> &[Complex<T>] {
        let nc = self.components();
        &self.data[flat * nc..(flat + 1) * nc]
    }

    #[inline]
    pub fn at_mut(&mut self, flat: usize) -> &mut [Complex<T>] {
        let nc = self.components();
        &mut self.data[flat * nc..(flat + 1) * nc]
    }

    pub fn require(&self, rep: Rep, op: &str) -> Result<()> {
        if self.rep != rep {
            return Err(Error::Usage(format!(
                "{op} needs a {rep:?} field, got {:?}",
                self.rep
            )));
        }
        Ok(())
    }

    pub fn require_same_grid<K2: Kind>(&self, other: &Field<T, K2>, op: &str) -> Result<()> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::Usage(format!("{op}: fields live on different grids")));
        }
        Ok(())
    }

    /// Forward transform; fails unless the field is physical.
    pub fn forward(mut self) -> Result<Self> {
        self.require(Rep::Physical, "forward transform")?;
        self.transform(FftDirection::Forward);
        self.rep = Rep::Spectral;
        Ok(self)
    }

    /// Inverse transform; fails unless the field is spectral.
    pub fn inverse(mut self) -> Result<Self> {
        self.require(Rep::Spectral, "inverse transform")?;
        self.transform(FftDirection::Inverse);
        self.rep = Rep::Physical;
        Ok(self)
    }

    /// Spectral copy, transforming only when needed.
    pub fn to_spectral(&self) -> Self {
        let mut out = self.clone();
        out.make_spectral();
        out
    }

    /// Physical copy, transforming only when needed.
    pub fn to_physical(&self) -> Self {
        let mut out = self.clone();
        out.make_physical();
        out
    }

    pub fn make_spectral(&mut self) {
        if self.rep == Rep::Physical {
            self.transform(FftDirection::Forward);
            self.rep = Rep::Spectral;
        }
    }

    pub fn make_physical(&mut self) {
        if self.rep == Rep::Spectral {
            self.transform(FftDirection::Inverse);
            self.rep = Rep::Physical;
        }
    }

    /// Copy in representation `rep`.
    pub fn in_rep(&self, rep: Rep) -> Self {
        match rep {
            Rep::Physical => self.to_physical(),
            Rep::Spectral => self.to_spectral(),
        }
    }

    fn transform(&mut self, direction: FftDirection) {
        let npts = self.grid.len();
        let nc = self.components();
        let mut fft = NdFft::new(self.grid.n(), self.grid.dim(), direction);
        let mut buf = vec![Complex::default(); npts];
        let scale = match direction {
            FftDirection::Forward => T::one() / T::count(npts),
            FftDirection::Inverse => T::one(),
        };
        for c in 0..nc {
            for p in 0..npts {
                buf[p] = self.data[p * nc + c];
            }
            fft.process(&mut buf);
            for p in 0..npts {
                self.data[p * nc + c] = buf[p] * scale;
            }
        }
    }

    fn weights(&self) -> [T; MAX_COMPONENTS] {
        let d = self.grid.dim();
        let mut w = [T::zero(); MAX_COMPONENTS];
        for (c, wc) in w.iter_mut().enumerate().take(self.components()) {
            *wc = T::lit(K::weight(d, c));
        }
        w
    }

    /// Squared Frobenius norm: mean over points (physical) or sum over modes
    /// (spectral). The two agree by Parseval.
    pub fn norm_sq(&self) -> T {
        let w = self.weights();
        let nc = self.components();
        let mut acc = 0.0f64;
        for chunk in self.data.chunks_exact(nc) {
            for c in 0..nc {
                acc += (w[c] * chunk[c].norm_sqr()).as_f64();
            }
        }
        let s = T::lit(acc);
        match self.rep {
            Rep::Physical => s / T::count(self.grid.len()),
            Rep::Spectral => s,
        }
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Real part of the Frobenius inner product; `other` is brought into
    /// this field's representation first.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.require_same_grid(other, "inner product")?;
        let other = if other.rep == self.rep {
            std::borrow::Cow::Borrowed(other)
        } else {
            std::borrow::Cow::Owned(other.in_rep(self.rep))
        };
        let w = self.weights();
        let nc = self.components();
        let mut acc = 0.0f64;
        for (a, b) in self.data.chunks_exact(nc).zip(other.data.chunks_exact(nc)) {
            for c in 0..nc {
                acc += (w[c] * (a[c].conj() * b[c]).re).as_f64();
            }
        }
        let s = T::lit(acc);
        Ok(match self.rep {
            Rep::Physical => s / T::count(self.grid.len()),
            Rep::Spectral => s,
        })
    }

    /// Largest imaginary magnitude relative to the largest magnitude.
    pub fn max_imag_relative(&self) -> T {
        let mut im = T::zero();
        let mut mag = T::zero();
        for z in &self.data {
            im = im.max(z.im.magnitude());
            mag = mag.max(z.norm());
        }
        if mag == T::zero() {
            T::zero()
        } else {
            im / mag
        }
    }

    /// Largest absolute value of any component.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Drops imaginary parts (physical representation only makes sense).
    pub fn discard_imag(&mut self) {
        for z in &mut self.data {
            z.im = T::zero();
        }
    }

    /// Real parts of component `c` at every point or mode.
    pub fn real_component(&self, c: usize) -> Vec<T> {
        let nc = self.components();
        self.data.iter().skip(c).step_by(nc).map(|z| z.re).collect()
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z = *z * s);
        out
    }

    pub fn scale_in_place(&mut self, s: T) {
        self.data.iter_mut().for_each(|z| *z = *z * s);
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: T, other: &Self) -> Result<()> {
        self.check_compatible(other, "axpy")?;
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x = *x + *y * a;
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self, op: &str) -> Result<()> {
        self.require_same_grid(other, op)?;
        if self.rep != other.rep {
            return Err(Error::Usage(format!("{op}: representations differ")));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "add")?;
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x = *x + *y;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "subtract")?;
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x = *x - *y;
        }
        Ok(out)
    }

    /// `‖self − other‖ / ‖other‖`, or the absolute norm if `other` vanishes.
    pub fn relative_distance(&self, other: &Self) -> Result<T> {
        let rhs = other.in_rep(self.rep);
        let diff = self.try_sub(&rhs)?.norm();
        let base = rhs.norm();
        Ok(if base > T::zero() { diff / base } else { diff })
    }

    /// Apply `f(effective_xi, components)` to every mode.
    pub fn map_modes(&mut self, mut f: impl FnMut(&[T; MAX_DIM], &mut [Complex<T>])) -> Result<()> {
        self.require(Rep::Spectral, "mode map")?;
        let nc = self.components();
        let grid = self.grid.clone();
        for (chunk, xi) in self.data.chunks_exact_mut(nc).zip(grid.wavevectors()) {
            f(&xi, chunk);
        }
        Ok(())
    }
}

impl<'a, T: Real, K: Kind> Add<&'a Field<T, K>> for &'a Field<T, K> {
    type Output = Field<T, K>;

    /// Panics on mismatched grids or representations; see [`Field::try_add`].
    fn add(self, rhs: &'a Field<T, K>) -> Field<T, K> {
        self.try_add(rhs).expect("compatible fields")
    }
}

impl<'a, T: Real, K: Kind> Sub<&'a Field<T, K>> for &'a Field<T, K> {
    type Output = Field<T, K>;

    /// Panics on mismatched grids or representations; see [`Field::try_sub`].
    fn sub(self, rhs: &'a Field<T, K>) -> Field<T, K> {
        self.try_sub(rhs).expect("compatible fields")
    }
}

impl<T: Real, K: Kind> Neg for Field<T, K> {
    type Output = Field<T, K>;

    fn neg(mut self) -> Self {
        self.data.iter_mut().for_each(|z| *z = -*z);
        self
    }
}

/// Dense `d x d` block with `d <= 4`; unused entries stay zero.
pub type Mat<E> = [[E; MAX_DIM]; MAX_DIM];

impl<T: Real> Field<T, SymMatrix> {
    /// Full matrix at one point or mode.
    pub fn matrix_at(&self, flat: usize) -> Mat<Complex<T>> {
        unpack_sym(self.grid.dim(), self.at(flat))
    }

    /// Stores the upper triangle of `m`.
    pub fn set_matrix(&mut self, flat: usize, m: &Mat<Complex<T>>) {
        let d = self.grid.dim();
        pack_sym(d, m, self.at_mut(flat));
    }

    pub fn trace(&self) -> Field<T, Scalar> {
        let d = self.grid.dim();
        let mut out = Field::<T, Scalar>::zeros(&self.grid, self.rep);
        for (p, o) in out.data.iter_mut().enumerate() {
            let m = self.at(p);
            *o = (0..d).fold(Complex::default(), |acc, i| acc + m[sym_index(d, i, i)]);
        }
        out
    }

    /// `f * I` for a scalar field `f`.
    pub fn identity_times(f: &Field<T, Scalar>) -> Self {
        let d = f.grid.dim();
        let mut out = Self::zeros(&f.grid, f.rep);
        for (p, v) in f.data.iter().enumerate() {
            let m = out.at_mut(p);
            for i in 0..d {
                m[sym_index(d, i, i)] = *v;
            }
        }
        out
    }

    /// Scalar field `v^T S v` for a constant vector `v`.
    pub fn contract(&self, v: &[T]) -> Field<T, Scalar> {
        let d = self.grid.dim();
        let mut out = Field::<T, Scalar>::zeros(&self.grid, self.rep);
        for (p, o) in out.data.iter_mut().enumerate() {
            let m = self.at(p);
            let mut acc = Complex::default();
            for i in 0..d {
                for j in 0..d {
                    acc = acc + m[sym_index(d, i, j)] * (v[i] * v[j]);
                }
            }
            *o = acc;
        }
        out
    }
}

impl<T: Real> Field<T, AntiSymMatrix> {
    pub fn matrix_at(&self, flat: usize) -> Mat<Complex<T>> {
        unpack_antisym(self.grid.dim(), self.at(flat))
    }

    pub fn set_matrix(&mut self, flat: usize, m: &Mat<Complex<T>>) {
        let d = self.grid.dim();
        pack_antisym(d, m, self.at_mut(flat));
    }
}

impl<T: Real> Field<T, Matrix> {
    pub fn symmetric_part(&self) -> Field<T, SymMatrix> {
        let d = self.grid.dim();
        let mut out = Field::<T, SymMatrix>::zeros(&self.grid, self.rep);
        let half = T::lit(0.5);
        for p in 0..self.grid.len() {
            let a = self.at(p);
            let o = out.at_mut(p);
            for i in 0..d {
                for j in i..d {
                    o[sym_index(d, i, j)] = (a[i * d + j] + a[j * d + i]) * half;
                }
            }
        }
        out
    }

    pub fn antisymmetric_part(&self) -> Field<T, AntiSymMatrix> {
        let d = self.grid.dim();
        let mut out = Field::<T, AntiSymMatrix>::zeros(&self.grid, self.rep);
        let half = T::lit(0.5);
        for p in 0..self.grid.len() {
            let a = self.at(p);
            let o = out.at_mut(p);
            for i in 0..d {
                for j in i + 1..d {
                    o[antisym_index(d, i, j)] = (a[i * d + j] - a[j * d + i]) * half;
                }
            }
        }
        out
    }

    /// Sum of a symmetric and an anti-symmetric field.
    pub fn from_parts(sym: &Field<T, SymMatrix>, asym: &Field<T, AntiSymMatrix>) -> Result<Self> {
        sym.require_same_grid(asym, "matrix assembly")?;
        let asym = asym.in_rep(sym.rep);
        let d = sym.grid.dim();
        let mut out = Self::zeros(&sym.grid, sym.rep);
        for p in 0..sym.grid.len() {
            let s = sym.matrix_at(p);
            let a = asym.matrix_at(p);
            let o = out.at_mut(p);
            for i in 0..d {
                for j in 0..d {
                    o[i * d + j] = s[i][j] + a[i][j];
                }
            }
        }
        Ok(out)
    }
}

pub fn unpack_sym<E: Copy + Default>(d: usize, packed: &[E]) -> Mat<E> {
    let mut m = [[E::default(); MAX_DIM]; MAX_DIM];
    let mut c = 0;
    for i in 0..d {
        for j in i..d {
            m[i][j] = packed[c];
            m[j][i] = packed[c];
            c += 1;
        }
    }
    m
}

pub fn pack_sym<E: Copy>(d: usize, m: &Mat<E>, packed: &mut [E]) {
    let mut c = 0;
    for i in 0..d {
        for j in i..d {
            packed[c] = m[i][j];
            c += 1;
        }
    }
}

pub fn unpack_antisym<E: Copy + Default + Neg<Output = E>>(d: usize, packed: &[E]) -> Mat<E> {
    let mut m = [[E::default(); MAX_DIM]; MAX_DIM];
    let mut c = 0;
    for i in 0..d {
        for j in i + 1..d {
            m[i][j] = packed[c];
            m[j][i] = -packed[c];
            c += 1;
        }
    }
    m
}

pub fn pack_antisym<E: Copy>(d: usize, m: &Mat<E>, packed: &mut [E]) {
    let mut c = 0;
    for i in 0..d {
        for j in i + 1..d {
            packed[c] = m[i][j];
            c += 1;
        }
    }
}
