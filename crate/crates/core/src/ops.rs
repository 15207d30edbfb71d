//! Fourier multipliers on spectral fields.
//!
//! Every operator is evaluated at the effective wavevector of the grid (Nyquist
//! components zeroed), with derivative multiplier `2 pi i xi`. Operators
//! require spectral input and return spectral output.

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{
    antisym_index, sym_index, AntiSymMatrix, Field, Kind, Matrix, Rep, Scalar, SymMatrix, Vector,
};
use crate::grid::MAX_DIM;
use crate::scalar::Real;

/// Power `p` of `(-Delta)^{-p}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplacianPower {
    Half,
    One,
    ThreeHalves,
}

#[inline]
fn two_pi<T: Real>() -> T {
    T::TAU()
}

/// `2 pi i xi_a`.
#[inline]
fn dmul<T: Real>(xi: &[T; MAX_DIM], a: usize) -> Complex<T> {
    Complex::new(T::zero(), two_pi::<T>() * xi[a])
}

/// `4 pi^2 |xi|^2`, the symbol of `-Delta`.
#[inline]
pub fn neg_laplacian_symbol<T: Real>(xi: &[T; MAX_DIM], dim: usize) -> T {
    let r2: T = xi[..dim].iter().map(|&x| x * x).sum();
    two_pi::<T>() * two_pi::<T>() * r2
}

fn spectral_out<T: Real, K: Kind, K2: Kind>(f: &Field<T, K>, op: &str) -> Result<Field<T, K2>> {
    f.require(Rep::Spectral, op)?;
    Ok(Field::zeros(f.grid(), Rep::Spectral))
}

pub fn derivative<T: Real, K: Kind>(f: &Field<T, K>, axis: usize) -> Result<Field<T, K>> {
    if axis >= f.grid().dim() {
        return Err(Error::Usage(format!(
            "derivative axis {axis} out of range for d = {}",
            f.grid().dim()
        )));
    }
    let mut out = f.clone();
    out.map_modes(|xi, m| {
        let s = dmul(xi, axis);
        m.iter_mut().for_each(|z| *z = *z * s);
    })?;
    Ok(out)
}

pub fn laplacian<T: Real, K: Kind>(f: &Field<T, K>) -> Result<Field<T, K>> {
    let d = f.grid().dim();
    let mut out = f.clone();
    out.map_modes(|xi, m| {
        let s = -neg_laplacian_symbol(xi, d);
        m.iter_mut().for_each(|z| *z = *z * s);
    })?;
    Ok(out)
}

/// `(-Delta)^{-p}`; modes with zero effective wavevector map to zero.
pub fn inverse_laplacian<T: Real, K: Kind>(f: &Field<T, K>, power: LaplacianPower) -> Result<Field<T, K>> {
    let d = f.grid().dim();
    let mut out = f.clone();
    out.map_modes(|xi, m| {
        let k2 = neg_laplacian_symbol(xi, d);
        let s = if k2 == T::zero() {
            T::zero()
        } else {
            match power {
                LaplacianPower::Half => T::one() / k2.sqrt(),
                LaplacianPower::One => T::one() / k2,
                LaplacianPower::ThreeHalves => T::one() / (k2 * k2.sqrt()),
            }
        };
        m.iter_mut().for_each(|z| *z = *z * s);
    })?;
    Ok(out)
}

pub fn gradient<T: Real>(f: &Field<T, Scalar>) -> Result<Field<T, Vector>> {
    let d = f.grid().dim();
    let mut out: Field<T, Vector> = spectral_out(f, "gradient")?;
    for ((o, v), xi) in out.data_mut().chunks_exact_mut(d).zip(f.data()).zip(f.grid().wavevectors()) {
        for a in 0..d {
            o[a] = *v * dmul(&xi, a);
        }
    }
    Ok(out)
}

pub fn divergence<T: Real>(u: &Field<T, Vector>) -> Result<Field<T, Scalar>> {
    let d = u.grid().dim();
    let mut out: Field<T, Scalar> = spectral_out(u, "divergence")?;
    for ((o, v), xi) in out.data_mut().iter_mut().zip(u.data().chunks_exact(d)).zip(u.grid().wavevectors()) {
        *o = (0..d).fold(Complex::default(), |acc, a| acc + v[a] * dmul(&xi, a));
    }
    Ok(out)
}

/// `(div M)_j = sum_i d_i M_ij`.
pub fn sym_divergence<T: Real>(m: &Field<T, SymMatrix>) -> Result<Field<T, Vector>> {
    let d = m.grid().dim();
    let nc = m.components();
    let mut out: Field<T, Vector> = spectral_out(m, "matrix divergence")?;
    for ((o, v), xi) in out.data_mut().chunks_exact_mut(d).zip(m.data().chunks_exact(nc)).zip(m.grid().wavevectors()) {
        for j in 0..d {
            o[j] = (0..d).fold(Complex::default(), |acc, i| acc + v[sym_index(d, i, j)] * dmul(&xi, i));
        }
    }
    Ok(out)
}

/// `(div A)_j = sum_i d_i A_ij`.
pub fn antisym_divergence<T: Real>(a: &Field<T, AntiSymMatrix>) -> Result<Field<T, Vector>> {
    let d = a.grid().dim();
    let nc = a.components();
    let mut out: Field<T, Vector> = spectral_out(a, "matrix divergence")?;
    for ((o, v), xi) in out.data_mut().chunks_exact_mut(d).zip(a.data().chunks_exact(nc)).zip(a.grid().wavevectors()) {
        for j in 0..d {
            let mut acc = Complex::default();
            for i in 0..d {
                let aij = match i.cmp(&j) {
                    std::cmp::Ordering::Less => v[antisym_index(d, i, j)],
                    std::cmp::Ordering::Greater => -v[antisym_index(d, j, i)],
                    std::cmp::Ordering::Equal => continue,
                };
                acc = acc + aij * dmul(&xi, i);
            }
            o[j] = acc;
        }
    }
    Ok(out)
}

/// `(grad u)_ij = d_i u_j`.
pub fn full_gradient<T: Real>(u: &Field<T, Vector>) -> Result<Field<T, Matrix>> {
    let d = u.grid().dim();
    let mut out: Field<T, Matrix> = spectral_out(u, "gradient")?;
    for ((o, v), xi) in out.data_mut().chunks_exact_mut(d * d).zip(u.data().chunks_exact(d)).zip(u.grid().wavevectors()) {
        for i in 0..d {
            for j in 0..d {
                o[i * d + j] = v[j] * dmul(&xi, i);
            }
        }
    }
    Ok(out)
}

/// `(d_i u_j + d_j u_i) / 2`.
pub fn sym_gradient<T: Real>(u: &Field<T, Vector>) -> Result<Field<T, SymMatrix>> {
    let d = u.grid().dim();
    let nc = SymMatrix::components(d);
    let half = T::lit(0.5);
    let mut out: Field<T, SymMatrix> = spectral_out(u, "symmetric gradient")?;
    for ((o, v), xi) in out.data_mut().chunks_exact_mut(nc).zip(u.data().chunks_exact(d)).zip(u.grid().wavevectors()) {
        for i in 0..d {
            for j in i..d {
                o[sym_index(d, i, j)] = (v[j] * dmul(&xi, i) + v[i] * dmul(&xi, j)) * half;
            }
        }
    }
    Ok(out)
}

/// `(d_i u_j - d_j u_i) / 2` for `i < j`.
pub fn antisym_gradient<T: Real>(u: &Field<T, Vector>) -> Result<Field<T, AntiSymMatrix>> {
    let d = u.grid().dim();
    let nc = AntiSymMatrix::components(d);
    let half = T::lit(0.5);
    let mut out: Field<T, AntiSymMatrix> = spectral_out(u, "anti-symmetric gradient")?;
    for ((o, v), xi) in out.data_mut().chunks_exact_mut(nc).zip(u.data().chunks_exact(d)).zip(u.grid().wavevectors()) {
        for i in 0..d {
            for j in i + 1..d {
                o[antisym_index(d, i, j)] = (v[j] * dmul(&xi, i) - v[i] * dmul(&xi, j)) * half;
            }
        }
    }
    Ok(out)
}

pub fn curl<T: Real>(u: &Field<T, Vector>) -> Result<Field<T, Vector>> {
    if u.grid().dim() != 3 {
        return Err(Error::Unsupported(format!(
            "curl as a vector needs d = 3, got d = {}",
            u.grid().dim()
        )));
    }
    let mut out: Field<T, Vector> = spectral_out(u, "curl")?;
    for ((o, v), xi) in out.data_mut().chunks_exact_mut(3).zip(u.data().chunks_exact(3)).zip(u.grid().wavevectors()) {
        let k = [dmul(&xi, 0), dmul(&xi, 1), dmul(&xi, 2)];
        o[0] = k[1] * v[2] - k[2] * v[1];
        o[1] = k[2] * v[0] - k[0] * v[2];
        o[2] = k[0] * v[1] - k[1] * v[0];
    }
    Ok(out)
}

pub fn hessian<T: Real>(f: &Field<T, Scalar>) -> Result<Field<T, SymMatrix>> {
    let d = f.grid().dim();
    let nc = SymMatrix::components(d);
    let mut out: Field<T, SymMatrix> = spectral_out(f, "hessian")?;
    for ((o, v), xi) in out.data_mut().chunks_exact_mut(nc).zip(f.data()).zip(f.grid().wavevectors()) {
        for i in 0..d {
            for j in i..d {
                o[sym_index(d, i, j)] = *v * dmul(&xi, i) * dmul(&xi, j);
            }
        }
    }
    Ok(out)
}

/// Zeroes every mode outside the 2/3 truncation box.
pub fn dealias<T: Real, K: Kind>(f: &Field<T, K>) -> Result<Field<T, K>> {
    f.require(Rep::Spectral, "dealias")?;
    let mut out = f.clone();
    dealias_in_place(&mut out);
    Ok(out)
}

pub(crate) fn dealias_in_place<T: Real, K: Kind>(f: &mut Field<T, K>) {
    let nc = f.components();
    let grid = f.grid().clone();
    for (flat, chunk) in f.data_mut().chunks_exact_mut(nc).enumerate() {
        if !grid.inside_two_thirds(flat) {
            chunk.iter_mut().for_each(|z| *z = Complex::default());
        }
    }
}

/// Vector `w` with `A v = v x w` (d = 3): `w = (A_23, -A_13, A_12)`.
pub fn antisym_to_vector<T: Real>(a: &Field<T, AntiSymMatrix>) -> Result<Field<T, Vector>> {
    if a.grid().dim() != 3 {
        return Err(Error::Unsupported("vector form of an anti-symmetric matrix needs d = 3".into()));
    }
    let mut out = Field::<T, Vector>::zeros(a.grid(), a.rep());
    for (o, v) in out.data_mut().chunks_exact_mut(3).zip(a.data().chunks_exact(3)) {
        o[0] = v[2];
        o[1] = -v[1];
        o[2] = v[0];
    }
    Ok(out)
}

pub fn vector_to_antisym<T: Real>(w: &Field<T, Vector>) -> Result<Field<T, AntiSymMatrix>> {
    if w.grid().dim() != 3 {
        return Err(Error::Unsupported("vector form of an anti-symmetric matrix needs d = 3".into()));
    }
    let mut out = Field::<T, AntiSymMatrix>::zeros(w.grid(), w.rep());
    for (o, v) in out.data_mut().chunks_exact_mut(3).zip(w.data().chunks_exact(3)) {
        o[0] = v[2];
        o[1] = -v[1];
        o[2] = v[0];
    }
    Ok(out)
}

/// Physical `u (x) u` as a symmetric field.
pub fn self_outer<T: Real>(u: &Field<T, Vector>) -> Result<Field<T, SymMatrix>> {
    u.require(Rep::Physical, "outer product")?;
    let d = u.grid().dim();
    let nc = SymMatrix::components(d);
    let mut out = Field::<T, SymMatrix>::zeros(u.grid(), Rep::Physical);
    for (o, v) in out.data_mut().chunks_exact_mut(nc).zip(u.data().chunks_exact(d)) {
        for i in 0..d {
            for j in i..d {
                o[sym_index(d, i, j)] = Complex::new(v[i].re * v[j].re, T::zero());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::random::random_field;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_cosine() {
        let g = Grid::<f64>::new(3, 16, 1.0).unwrap();
        let f = Field::<f64, Scalar>::from_fn(&g, |x, o| o[0] = (2.0 * PI * x[0]).cos());
        let df = derivative(&f.to_spectral(), 0).unwrap().inverse().unwrap();
        let want = Field::<f64, Scalar>::from_fn(&g, |x, o| o[0] = -2.0 * PI * (2.0 * PI * x[0]).sin());
        assert!(df.try_sub(&want).unwrap().max_abs() < 1e-10);
        let dy = derivative(&f.to_spectral(), 1).unwrap();
        assert!(dy.max_abs() < 1e-14);
        assert!(matches!(derivative(&f.to_spectral(), 3), Err(Error::Usage(_))));
        assert!(matches!(derivative(&f, 0), Err(Error::Usage(_))));
    }

    #[test]
    fn divergence_of_curl_vanishes() {
        let g = Grid::<f64>::new(3, 16, 1.0).unwrap();
        let a = random_field::<f64, Vector>(&g, 1.0, 3).unwrap();
        let dc = divergence(&curl(&a).unwrap()).unwrap();
        assert!(dc.norm() < 1e-12 * a.norm());
    }

    #[test]
    fn inverse_laplacian_inverts_on_mean_zero() {
        let g = Grid::<f64>::new(3, 16, 1.0).unwrap();
        let mut f = random_field::<f64, Scalar>(&g, 1.0, 11).unwrap();
        f.data_mut()[0] = Complex::default();
        let back = inverse_laplacian(&(-laplacian(&f).unwrap()), LaplacianPower::One).unwrap();
        assert!(back.relative_distance(&f).unwrap() < 1e-12);

        let c = Field::<f64, Scalar>::from_fn(&g, |_, o| o[0] = 3.0).forward().unwrap();
        assert!(inverse_laplacian(&c, LaplacianPower::One).unwrap().max_abs() == 0.0);

        let half = LaplacianPower::Half;
        let twice = inverse_laplacian(&inverse_laplacian(&f, half).unwrap(), half).unwrap();
        let once = inverse_laplacian(&f, LaplacianPower::One).unwrap();
        assert!(twice.relative_distance(&once).unwrap() < 1e-12);
        let three = inverse_laplacian(&f, LaplacianPower::ThreeHalves).unwrap();
        let composed = inverse_laplacian(&once, half).unwrap();
        assert!(three.relative_distance(&composed).unwrap() < 1e-12);
    }

    #[test]
    fn hessian_is_symmetric_and_mixed_partials_commute() {
        let g = Grid::<f64>::new(3, 8, 1.0).unwrap();
        let f = random_field::<f64, Scalar>(&g, 0.5, 5).unwrap();
        let dxy = derivative(&derivative(&f, 0).unwrap(), 1).unwrap();
        let dyx = derivative(&derivative(&f, 1).unwrap(), 0).unwrap();
        let scale = dxy.max_abs();
        for (a, b) in dxy.data().iter().zip(dyx.data()) {
            assert!((a - b).norm() <= 4.0 * f64::EPSILON * scale);
        }
        // The Hessian stores one entry per pair, so it is symmetric by layout.
        let h = hessian(&f).unwrap();
        let mixed = h.data().iter().skip(sym_index(3, 0, 1)).step_by(6);
        for (a, b) in mixed.zip(dxy.data()) {
            assert!((a - b).norm() <= 4.0 * f64::EPSILON * scale);
        }
        for p in 0..g.len() {
            let m = h.matrix_at(p);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(m[i][j], m[j][i]);
                }
            }
        }
    }

    #[test]
    fn antisym_vector_correspondence() {
        let g = Grid::<f64>::new(3, 8, 1.0).unwrap();
        let w = random_field::<f64, Vector>(&g, 0.0, 2).unwrap();
        let a = vector_to_antisym(&w).unwrap();
        assert_eq!(antisym_to_vector(&a).unwrap().data(), w.data());
        // A v = v x w at one mode
        let m = a.matrix_at(5);
        let wv = w.at(5);
        let v = [1.0, -2.0, 0.5];
        let av: Vec<Complex<f64>> = (0..3).map(|i| (0..3).fold(Complex::default(), |s, j| s + m[i][j] * v[j])).collect();
        let cross = [
            wv[2] * v[1] - wv[1] * v[2],
            wv[0] * v[2] - wv[2] * v[0],
            wv[1] * v[0] - wv[0] * v[1],
        ];
        for i in 0..3 {
            assert!((av[i] - cross[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn dealias_keeps_two_thirds() {
        let g = Grid::<f64>::new(2, 12, 1.0).unwrap();
        let f = random_field::<f64, Scalar>(&g, 0.0, 1).unwrap();
        let t = dealias(&f).unwrap();
        for (flat, z) in t.data().iter().enumerate() {
            let idx = g.unravel(flat);
            let keep = idx[..2].iter().all(|&i| 3 * g.mode_number(i).unsigned_abs() < 12);
            if !keep {
                assert_eq!(*z, Complex::default());
            } else {
                assert_eq!(*z, f.data()[flat]);
            }
        }
    }
}
