//! Max-mid matrices `λ/√6 (I − 3 v⊗v)` and their strain projections.
//!
//! Everything here is three-dimensional. The objective of a max-mid field is
//! `‖P_st M‖² / ‖λ‖²`; for a constant direction `v` it is the Fourier
//! multiplier `3c²(1 − c²)` with `c = v·ξ̂`, which is at most 3/4 mode by mode.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::decomp::project_st;
use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::field::{sym_index, Field, Rep, Scalar, SymMatrix, Vector};
use crate::grid::{unit_and_norm, Grid, MAX_DIM};
use crate::identities::precondition_tolerance;
use crate::ops::{self, LaplacianPower};
use crate::random::random_field;
use crate::scalar::Real;
use crate::small::sym_eigen;

type V3<T> = [T; 3];
type M3<T> = [[T; 3]; 3];

fn require_3d<T: Real>(grid: &Grid<T>, what: &str) -> Result<()> {
    if grid.dim() != 3 {
        return Err(Error::Unsupported(format!("{what} is defined for d = 3, got d = {}", grid.dim())));
    }
    Ok(())
}

fn unit3<T: Real>(v: &[T]) -> Result<V3<T>> {
    if v.len() != 3 {
        return Err(Error::Config(format!("direction must have 3 components, got {}", v.len())));
    }
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::Config("direction must be a nonzero finite vector".into()));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

fn real_values<T: Real, K: crate::field::Kind>(f: &Field<T, K>, what: &str) -> Result<Field<T, K>> {
    let p = f.to_physical();
    let imag = p.max_imag_relative();
    if imag > precondition_tolerance::<T>() {
        return Err(Error::Precondition {
            what: format!("{what} must be real-valued"),
            residual: imag.as_f64(),
        });
    }
    Ok(p)
}

fn scalar_from<T: Real>(grid: &Grid<T>, vals: &[T]) -> Field<T, Scalar> {
    let data = vals.iter().map(|&x| Complex::new(x, T::zero())).collect();
    Field::from_data(grid, Rep::Physical, data).expect("length matches grid")
}

fn mean_sq<T: Real>(vals: &[T]) -> T {
    vals.iter().map(|&x| x * x).sum::<T>() / T::count(vals.len().max(1))
}

fn normalize<T: Real>(vals: &mut [T]) -> T {
    let n = mean_sq(vals).sqrt();
    if n > T::zero() {
        vals.iter_mut().for_each(|x| *x = *x / n);
    }
    n
}

/// Trace-free matrix field of rank-one shape with `λ₂ = λ₃`.
#[derive(Clone, Debug)]
pub struct MaxMidField<T: Real> {
    lam: Vec<T>,
    v: Vec<V3<T>>,
    grid: Grid<T>,
    nonnegative: bool,
}

impl<T: Real> MaxMidField<T> {
    /// Requires `λ ≥ 0` and `|v| = 1` wherever `λ > 1e-12`.
    pub fn new(lam: &Field<T, Scalar>, v: &Field<T, Vector>) -> Result<Self> {
        Self::build(lam, v, true)
    }

    /// Same as [`MaxMidField::new`] without the sign condition on `λ`.
    pub fn new_signed(lam: &Field<T, Scalar>, v: &Field<T, Vector>) -> Result<Self> {
        Self::build(lam, v, false)
    }

    fn build(lam: &Field<T, Scalar>, v: &Field<T, Vector>, nonnegative: bool) -> Result<Self> {
        require_3d(lam.grid(), "a max-mid field")?;
        lam.require_same_grid(v, "max-mid field")?;
        let lam = real_values(lam, "lambda")?.real_component(0);
        let vp = real_values(v, "direction field")?;
        let (c0, c1, c2) = (vp.real_component(0), vp.real_component(1), vp.real_component(2));
        let dirs: Vec<V3<T>> = (0..lam.len()).map(|i| [c0[i], c1[i], c2[i]]).collect();
        let floor = T::lit(1e-12);
        let scale = lam.iter().fold(T::one(), |m, x| m.max(x.magnitude()));
        if nonnegative {
            let worst = lam.iter().fold(T::zero(), |m, &x| m.min(x));
            if worst < -floor * scale {
                return Err(Error::Precondition {
                    what: "lambda must be nonnegative".into(),
                    residual: (-worst).as_f64(),
                });
            }
        }
        let unit_tol = T::lit(1e-10).max(T::lit(100.0) * T::epsilon());
        let mut worst = T::zero();
        for (l, d) in lam.iter().zip(&dirs) {
            if l.magnitude() > floor * scale {
                let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                worst = worst.max((n - T::one()).magnitude());
            }
        }
        if worst > unit_tol {
            return Err(Error::Precondition {
                what: "direction field must be unit length where lambda is nonzero".into(),
                residual: worst.as_f64(),
            });
        }
        Ok(Self { lam, v: dirs, grid: v.grid().clone(), nonnegative })
    }

    fn from_parts(grid: &Grid<T>, lam: Vec<T>, v: Vec<V3<T>>, nonnegative: bool) -> Self {
        Self { lam, v, grid: grid.clone(), nonnegative }
    }

    /// Constant direction `v` everywhere.
    pub fn with_constant_direction(lam: &Field<T, Scalar>, v: &[T]) -> Result<Self> {
        let v = unit3(v)?;
        let dirs = Field::<T, Vector>::from_fn(lam.grid(), |_, o| o[..3].copy_from_slice(&v));
        Self::new_signed(lam, &dirs).map(|mut m| {
            m.nonnegative = m.lam.iter().all(|&x| x >= T::zero());
            m
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Whether `λ ≥ 0` was required at construction (or holds).
    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn lam_values(&self) -> &[T] {
        &self.lam
    }

    pub fn directions(&self) -> &[[T; 3]] {
        &self.v
    }

    pub fn lam(&self) -> Field<T, Scalar> {
        scalar_from(&self.grid, &self.lam)
    }

    pub fn v(&self) -> Field<T, Vector> {
        let mut f = Field::<T, Vector>::zeros(&self.grid, Rep::Physical);
        for (i, d) in self.v.iter().enumerate() {
            for a in 0..3 {
                f.at_mut(i)[a] = Complex::new(d[a], T::zero());
            }
        }
        f
    }

    /// `‖λ‖` (root mean square).
    pub fn lam_norm(&self) -> T {
        mean_sq(&self.lam).sqrt()
    }
}

/// `λ/√6 (I − 3 v⊗v)` in physical representation.
pub fn assemble_maxmid<T: Real>(mm: &MaxMidField<T>) -> Field<T, SymMatrix> {
    assemble(&mm.grid, &mm.lam, &mm.v)
}

fn assemble<T: Real>(grid: &Grid<T>, lam: &[T], v: &[V3<T>]) -> Field<T, SymMatrix> {
    let mut out = Field::<T, SymMatrix>::zeros(grid, Rep::Physical);
    let s = T::one() / T::lit(6.0).sqrt();
    let three = T::lit(3.0);
    for (flat, (l, d)) in lam.iter().zip(v).enumerate() {
        let a = *l * s;
        let comps = out.at_mut(flat);
        for i in 0..3 {
            for j in i..3 {
                let delta = if i == j { T::one() } else { T::zero() };
                comps[sym_index(3, i, j)] = Complex::new(a * (delta - three * d[i] * d[j]), T::zero());
            }
        }
    }
    out
}

fn sym3_at<T: Real>(f: &Field<T, SymMatrix>, flat: usize) -> M3<T> {
    let c = f.at(flat);
    let g = |i, j| c[sym_index(3, i, j)].re;
    [[g(0, 0), g(0, 1), g(0, 2)], [g(0, 1), g(1, 1), g(1, 2)], [g(0, 2), g(1, 2), g(2, 2)]]
}

/// Pointwise ascending eigenvalues and eigenvector frames of a 3x3 field.
#[derive(Clone, Debug)]
pub struct EigenField<T: Real> {
    pub lam1: Field<T, Scalar>,
    pub lam2: Field<T, Scalar>,
    pub lam3: Field<T, Scalar>,
    /// `frames[x][i][k]` is component `i` of the eigenvector for eigenvalue `k`.
    pub frames: Vec<M3<T>>,
}

impl<T: Real> EigenField<T> {
    /// Largest pointwise deviation of `Σ λ_k v_k⊗v_k` from `s`, relative to `max |s|`.
    pub fn reconstruction_error(&self, s: &Field<T, SymMatrix>) -> T {
        let p = s.to_physical();
        let scale = p.max_abs().max(T::min_positive_value());
        let l = [self.lam1.real_component(0), self.lam2.real_component(0), self.lam3.real_component(0)];
        let mut worst = T::zero();
        for (flat, f) in self.frames.iter().enumerate() {
            let m = sym3_at(&p, flat);
            for i in 0..3 {
                for j in 0..3 {
                    let r: T = (0..3).map(|k| l[k][flat] * f[i][k] * f[j][k]).sum();
                    worst = worst.max((r - m[i][j]).magnitude());
                }
            }
        }
        worst / scale
    }
}

/// Ascending pointwise eigen-decomposition (d = 3). Spectral input is
/// transformed first; the imaginary part of the samples is ignored.
pub fn eigen_decompose_field<T: Real>(s: &Field<T, SymMatrix>) -> Result<EigenField<T>> {
    require_3d(s.grid(), "eigen decomposition")?;
    let p = s.to_physical();
    let len = p.grid().len();
    let mut l = [vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len]];
    let mut frames = Vec::with_capacity(len);
    for flat in 0..len {
        let m = sym3_at(&p, flat);
        let mut a = [[T::zero(); MAX_DIM]; MAX_DIM];
        for i in 0..3 {
            a[i][..3].copy_from_slice(&m[i]);
        }
        let e = sym_eigen(&a, 3);
        let mut f = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                f[i][k] = e.vectors[i][k];
            }
        }
        for k in 0..3 {
            l[k][flat] = e.values[k];
        }
        frames.push(f);
    }
    let g = p.grid();
    Ok(EigenField {
        lam1: scalar_from(g, &l[0]),
        lam2: scalar_from(g, &l[1]),
        lam3: scalar_from(g, &l[2]),
        frames,
    })
}

/// Multiplier `3c²(1 − c²)`, `c = v·ξ̂`, applied to a spectral scalar field.
fn apply_k<T: Real>(lam_hat: &mut Field<T, Scalar>, v: &V3<T>) {
    lam_hat
        .map_modes(|xi, z| match unit_and_norm(xi, 3) {
            None => z[0] = Complex::default(),
            Some((e, _)) => {
                let c = e[0] * v[0] + e[1] * v[1] + e[2] * v[2];
                let c2 = c * c;
                z[0] = z[0] * (T::lit(3.0) * c2 * (T::one() - c2));
            }
        })
        .expect("spectral input");
}

/// `‖P_st(λ/√6 (I − 3 v⊗v))‖² / ‖λ‖²` for a constant unit direction `v`.
pub fn fixed_direction_value<T: Real>(lam: &Field<T, Scalar>, v: &[T]) -> Result<T> {
    require_3d(lam.grid(), "the fixed-direction objective")?;
    let v = unit3(v)?;
    let hat = lam.to_spectral();
    let den = hat.norm_sq();
    if !(den > T::zero()) {
        return Err(Error::Precondition { what: "lambda must be nonzero".into(), residual: 0.0 });
    }
    let mut k = hat.clone();
    apply_k(&mut k, &v);
    Ok(hat.inner(&k)? / den)
}

/// `‖P_st M‖² / ‖λ‖²` for a general max-mid field.
pub fn maxmid_value<T: Real>(mm: &MaxMidField<T>) -> Result<T> {
    let den = mean_sq(&mm.lam);
    if !(den > T::zero()) {
        return Err(Error::Precondition { what: "lambda must be nonzero".into(), residual: 0.0 });
    }
    Ok(project_st(&assemble_maxmid(mm)).norm_sq() / den)
}

fn strain_residual_rel<T: Real>(s: &Field<T, SymMatrix>) -> Result<T> {
    let sp = s.to_spectral();
    let n = sp.norm();
    if n == T::zero() {
        return Ok(T::zero());
    }
    Ok(sp.try_sub(&project_st(&sp))?.norm() / n)
}

fn require_strain<T: Real>(s: &Field<T, SymMatrix>) -> Result<()> {
    let r = strain_residual_rel(s)?;
    if r > precondition_tolerance::<T>() {
        return Err(Error::Precondition {
            what: "field is not in the strain space".into(),
            residual: r.as_f64(),
        });
    }
    Ok(())
}

/// `‖vᵀ S v‖² / ‖S‖²` for a strain field `S` and constant unit `v`; at most 1/2.
pub fn diag_component_bound_check<T: Real>(s: &Field<T, SymMatrix>, v: &[T]) -> Result<T> {
    require_3d(s.grid(), "the diagonal-component bound")?;
    let v = unit3(v)?;
    require_strain(s)?;
    let sp = s.to_spectral();
    let den = sp.norm_sq();
    if den == T::zero() {
        return Ok(T::zero());
    }
    Ok(sp.contract_quadratic(&v).norm_sq() / den)
}

impl<T: Real> Field<T, SymMatrix> {
    /// Scalar field `vᵀ S v` for a constant `v` (d = 3), in the input rep.
    pub fn contract_quadratic(&self, v: &V3<T>) -> Field<T, Scalar> {
        let mut out = Field::<T, Scalar>::zeros(self.grid(), self.rep());
        for flat in 0..self.grid().len() {
            let c = self.at(flat);
            let mut acc = Complex::default();
            for i in 0..3 {
                for j in 0..3 {
                    acc = acc + c[sym_index(3, i.min(j), i.max(j))] * (v[i] * v[j]);
                }
            }
            out.at_mut(flat)[0] = acc;
        }
        out
    }
}

/// Largest `n` tried when looking for the smallest grid that resolves a shell.
const MAX_SHELL_SEARCH: usize = 512;

fn in_shell<T: Real>(xi: &[T; MAX_DIM], v: &V3<T>, eps: T) -> bool {
    match unit_and_norm(xi, 3) {
        None => false,
        Some((e, _)) => {
            let c = e[0] * v[0] + e[1] * v[1] + e[2] * v[2];
            let half = T::lit(0.5);
            let c2 = c * c;
            c2 > half - eps * half && c2 < half + eps * half
        }
    }
}

fn shell_mask<T: Real>(grid: &Grid<T>, v: &V3<T>, eps: T) -> Vec<bool> {
    grid.wavevectors().map(|xi| in_shell(&xi, v, eps)).collect()
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::Config(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

fn empty_shell_error<T: Real>(grid: &Grid<T>, v: &V3<T>, eps: T) -> Error {
    let min_n = (8..=MAX_SHELL_SEARCH)
        .find(|&n| {
            Grid::new(3, n, grid.length())
                .map(|g| shell_mask(&g, v, eps).iter().any(|&b| b))
                .unwrap_or(false)
        })
        .unwrap_or(MAX_SHELL_SEARCH + 1);
    Error::Resolution {
        what: format!("no grid mode satisfies |v.xi|^2/|xi|^2 in (1/2 - {eps}/2, 1/2 + {eps}/2)"),
        min_n,
    }
}

/// Strain field from the diagonal-bound near-maximizer family: a random
/// velocity with `û(ξ) = g(ξ)(v − (v·ξ̂)ξ̂)` supported on the shell around
/// `v`, mapped through `∇_sym (−Δ)^{-1/2}`. Spectral output, `‖S‖ = 1`.
pub fn diag_near_maximizer<T: Real>(grid: &Grid<T>, eps: T, v: &[T], seed: u64) -> Result<Field<T, SymMatrix>> {
    require_3d(grid, "the diagonal near-maximizer")?;
    check_eps(eps)?;
    let v = unit3(v)?;
    let mask = shell_mask(grid, &v, eps);
    if !mask.iter().any(|&b| b) {
        return Err(empty_shell_error(grid, &v, eps));
    }
    let g = random_field::<T, Scalar>(grid, 1.0, seed)?;
    let mut u = Field::<T, Vector>::zeros(grid, Rep::Spectral);
    for (flat, xi) in grid.wavevectors().enumerate() {
        if !mask[flat] {
            continue;
        }
        let (e, _) = unit_and_norm(&xi, 3).expect("shell excludes the mean");
        let c = e[0] * v[0] + e[1] * v[1] + e[2] * v[2];
        let amp = g.at(flat)[0];
        for a in 0..3 {
            u.at_mut(flat)[a] = amp * (v[a] - c * e[a]);
        }
    }
    let s = ops::sym_gradient(&ops::inverse_laplacian(&u, LaplacianPower::Half)?)?;
    let n = s.norm();
    Ok(s.scale(T::one() / n))
}

/// Near-maximizer construction for the fixed-direction objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NearMaxKind {
    /// Random `λ̂` supported where `(v·ξ̂)²` is within `ε/2` of 1/2.
    Shell { seed: u64 },
    /// Periodized anisotropic Gaussian concentrating on a diagonal of the
    /// plane spanned by `v` and the next axis.
    Gaussian { sharpness: f64 },
}

/// `λ` with `‖λ‖ = 1` and constant direction `v_axis`.
///
/// Shell fields have zero mean, so they change sign and are built with
/// [`MaxMidField::new_signed`]. Gaussian fields are positive (up to
/// underflow) and need `v_axis` to be a coordinate axis.
pub fn near_maximizer<T: Real>(grid: &Grid<T>, eps: T, kind: NearMaxKind, v_axis: &[T]) -> Result<MaxMidField<T>> {
    require_3d(grid, "the near-maximizer")?;
    check_eps(eps)?;
    let v = unit3(v_axis)?;
    let lam = match kind {
        NearMaxKind::Shell { seed } => {
            let mask = shell_mask(grid, &v, eps);
            if !mask.iter().any(|&b| b) {
                return Err(empty_shell_error(grid, &v, eps));
            }
            let mut f = random_field::<T, Scalar>(grid, 1.0, seed)?;
            for (flat, keep) in mask.iter().enumerate() {
                if !keep {
                    f.at_mut(flat)[0] = Complex::default();
                }
            }
            let mut vals = f.to_physical().real_component(0);
            normalize(&mut vals);
            vals
        }
        NearMaxKind::Gaussian { sharpness } => {
            let axis = coordinate_axis(&v).ok_or_else(|| {
                Error::Unsupported("the Gaussian family is built for coordinate axes only".into())
            })?;
            if !(sharpness > 0.0) || !sharpness.is_finite() {
                return Err(Error::Config(format!("Gaussian sharpness must be positive, got {sharpness}")));
            }
            let mut vals = gaussian_lambda(grid, sharpness, axis);
            if normalize(&mut vals) == T::zero() {
                return Err(Error::Resolution {
                    what: "Gaussian profile underflows on every grid point".into(),
                    min_n: grid.n() * 2,
                });
            }
            vals
        }
    };
    let nonneg = lam.iter().all(|&x| x >= T::zero());
    let dirs = vec![v; grid.len()];
    Ok(MaxMidField::from_parts(grid, lam, dirs, nonneg))
}

fn coordinate_axis<T: Real>(v: &V3<T>) -> Option<usize> {
    (0..3).find(|&a| v[a] == T::one() && (0..3).all(|b| b == a || v[b] == T::zero()))
}

/// Physical samples of the periodization of the inverse transform of
/// `exp(−s p₁² − s p₂² − p₃²/s)` in the frame (transverse axis, `(e_z − e_y)/√2`,
/// `(e_y + e_z)/√2`) where `z` is the compression axis.
fn gaussian_lambda<T: Real>(grid: &Grid<T>, s: f64, axis: usize) -> Vec<T> {
    let l = grid.length().as_f64();
    let h = l / grid.n() as f64;
    let pi2 = std::f64::consts::PI.powi(2);
    let wide = move |x: f64| (-pi2 * x * x / s).exp();
    let narrow = move |x: f64| (-pi2 * s * x * x).exp();
    let reach = |width: f64, step: f64| ((width / step).ceil() as i64) + 2;
    let wide_w = (40.0 * s).sqrt() / std::f64::consts::PI;
    let narrow_w = (40.0 / s).sqrt() / std::f64::consts::PI;
    let step = l / std::f64::consts::SQRT_2;

    let line = |f: &dyn Fn(f64) -> f64, x: f64, period: f64, m: i64| (-m..=m).map(|k| f(x + k as f64 * period)).sum::<f64>();
    let parity = |f: &dyn Fn(f64) -> f64, x: f64, m: i64, odd: bool| {
        (-m..=m)
            .filter(|k| (k.rem_euclid(2) == 1) == odd)
            .map(|k| f(x + k as f64 * step))
            .sum::<f64>()
    };
    let (t, y, z) = ((axis + 1) % 3, (axis + 2) % 3, axis);
    let m1 = reach(wide_w, l);
    let m2 = reach(wide_w, step);
    let m3 = reach(narrow_w, step);
    let x1: Vec<f64> = (0..grid.n()).map(|i| line(&wide, i as f64 * h, l, m1)).collect();
    grid.points()
        .map(|x| {
            let (xt, xy, xz) = (x[t].as_f64(), x[y].as_f64(), x[z].as_f64());
            let it = (xt / h).round() as usize % grid.n();
            let p2 = (xz - xy) / std::f64::consts::SQRT_2;
            let p3 = (xy + xz) / std::f64::consts::SQRT_2;
            let even = parity(&wide, p2, m2, false) * parity(&narrow, p3, m3, false);
            let odd = parity(&wide, p2, m2, true) * parity(&narrow, p3, m3, true);
            T::lit(x1[it] * (even + odd))
        })
        .collect()
}

/// `(3/2)‖P_st(w⊗w)‖² / ‖w‖⁴_{L⁴}`.
pub fn rank_one_value<T: Real>(w: &Field<T, Vector>) -> Result<T> {
    require_3d(w.grid(), "the rank-one objective")?;
    let p = real_values(w, "w")?;
    let quartic = (0..p.grid().len())
        .map(|i| {
            let s: T = p.at(i).iter().map(|z| z.re * z.re).sum();
            s * s
        })
        .sum::<T>()
        / T::count(p.grid().len());
    if !(quartic > T::zero()) {
        return Err(Error::Precondition { what: "w must be nonzero".into(), residual: 0.0 });
    }
    let mut ww = ops::self_outer(&p)?;
    ww.discard_imag();
    Ok(T::lit(1.5) * project_st(&ww).norm_sq() / quartic)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EigenGapReport<T> {
    /// `‖λ₃ − λ₂⁺‖`.
    pub lhs: T,
    /// `(1 − r)/√2 ‖S‖`.
    pub rhs: T,
    pub holds: bool,
    /// `‖λ₃ − λ₂‖`, which dominates `lhs`.
    pub lhs_plain: T,
    pub holds_plain: bool,
}

/// Compares the eigenvalue gap of a strain field against `(1 − r)/√2 ‖S‖`.
pub fn eigen_gap_check<T: Real>(s: &Field<T, SymMatrix>, r: T) -> Result<EigenGapReport<T>> {
    require_3d(s.grid(), "the eigenvalue gap bound")?;
    if !(r >= T::zero() && r < T::one()) {
        return Err(Error::Config(format!("r must lie in [0, 1), got {r}")));
    }
    require_strain(s)?;
    let e = eigen_decompose_field(s)?;
    let l2 = e.lam2.real_component(0);
    let l3 = e.lam3.real_component(0);
    let gap: Vec<T> = l3.iter().zip(&l2).map(|(&a, &b)| a - b.max(T::zero())).collect();
    let plain: Vec<T> = l3.iter().zip(&l2).map(|(&a, &b)| a - b).collect();
    let lhs = mean_sq(&gap).sqrt();
    let lhs_plain = mean_sq(&plain).sqrt();
    let rhs = (T::one() - r) / T::lit(2.0).sqrt() * s.norm();
    let slack = T::lit(1e-10);
    Ok(EigenGapReport {
        lhs,
        rhs,
        holds: lhs >= rhs - slack,
        lhs_plain,
        holds_plain: lhs_plain >= rhs - slack,
    })
}

/// Constraint on the direction field during ascent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionConstraint {
    Free,
    /// Constant direction (normalized on use).
    Fixed([f64; 3]),
    /// `v(x)` restricted to the plane spanned by `e_2` and `e_3`.
    Plane,
}

/// How far to move `λ` toward the majorizer's maximizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepRule {
    Full,
    /// Convex combination with weight `α ∈ (0, 1]` on the new `λ`.
    Damped(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AscentConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_rule: StepRule,
    pub constraint: DirectionConstraint,
    pub seed: u64,
    /// Smallest objective increase for a step to be accepted.
    pub accept_tol: f64,
    /// Stop when the relative objective change falls below this.
    pub rel_tol: f64,
    /// When set, the first restart starts from the Gaussian family with this
    /// sharpness instead of a random field.
    pub warm_start: Option<f64>,
    /// Score only the part of `P_st M` inside the 2/3 band. Off by default;
    /// the unrestricted objective rewards grid-scale oscillation of `v`.
    #[serde(default)]
    pub band_limited: bool,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 500,
            step_rule: StepRule::Full,
            constraint: DirectionConstraint::Free,
            seed: 0,
            accept_tol: 1e-12,
            rel_tol: 1e-9,
            warm_start: None,
            band_limited: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    /// `‖λ_{k+1} − λ_k‖` of the accepted step (0 for the initial row).
    pub step_size: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub seed: u64,
    pub warm_start: bool,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

impl RestartTrace {
    /// `iter,objective,step_size` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,objective,step_size\n");
        for r in &self.trace {
            s.push_str(&format!("{},{:.17e},{:.17e}\n", r.iter, r.objective, r.step_size));
        }
        s
    }
}

/// Bound for plane-constrained directions: modes with `ξ₁ = 0` cannot carry
/// the `e₁e₁` entry into the strain space, so the value is at most `1 − cert/6`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PlaneReport {
    /// Share of `‖λ‖²` on modes with `ξ₁ = 0`.
    pub certificate: f64,
    pub bound: f64,
    /// Fraction of grid points with `λ > 1e-12 max λ` at the best iterate.
    pub positive_fraction: f64,
    /// Set when the best iterate is not a converged, everywhere-positive `λ`.
    pub no_positive_fixed_point: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridMeta {
    pub d: usize,
    pub n: usize,
    pub length: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SupremumEstimate<T: Real> {
    /// Best objective over all restarts.
    pub value: f64,
    /// Always "empirical estimate": the supremum itself is not known.
    pub label: &'static str,
    pub constraint: DirectionConstraint,
    pub best_restart: usize,
    pub restarts: Vec<RestartTrace>,
    pub grid: GridMeta,
    pub plane: Option<PlaneReport>,
    #[serde(skip)]
    pub best: MaxMidField<T>,
}

impl<T: Real> SupremumEstimate<T> {
    pub fn is_monotone(&self) -> bool {
        self.restarts
            .iter()
            .all(|r| r.trace.windows(2).all(|w| w[1].objective >= w[0].objective))
    }
}

/// Smallest eigenpair of a symmetric 3x3 matrix: trigonometric eigenvalue,
/// cross-product eigenvector, Jacobi fallback near degeneracy.
fn min_eigenpair<T: Real>(b: &M3<T>) -> (T, V3<T>) {
    let p1 = b[0][1] * b[0][1] + b[0][2] * b[0][2] + b[1][2] * b[1][2];
    let q = (b[0][0] + b[1][1] + b[2][2]) / T::lit(3.0);
    let d = [b[0][0] - q, b[1][1] - q, b[2][2] - q];
    let p2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + T::lit(2.0) * p1;
    let p = (p2 / T::lit(6.0)).sqrt();
    if p == T::zero() {
        return (q, [T::one(), T::zero(), T::zero()]);
    }
    let c = |i: usize, j: usize| (b[i][j] - if i == j { q } else { T::zero() }) / p;
    let det = c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0))
        + c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0));
    let r = (det / T::lit(2.0)).max(-T::one()).min(T::one());
    let phi = r.acos() / T::lit(3.0);
    let mu = q + T::lit(2.0) * p * (phi + T::lit(2.0 * std::f64::consts::FRAC_PI_3)).cos();
    let rows: [V3<T>; 3] = std::array::from_fn(|i| std::array::from_fn(|j| b[i][j] - if i == j { mu } else { T::zero() }));
    let cross = |a: &V3<T>, c: &V3<T>| [a[1] * c[2] - a[2] * c[1], a[2] * c[0] - a[0] * c[2], a[0] * c[1] - a[1] * c[0]];
    let cands = [cross(&rows[0], &rows[1]), cross(&rows[0], &rows[2]), cross(&rows[1], &rows[2])];
    let norms = cands.map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    let best = (0..3).fold(0, |k, i| if norms[i] > norms[k] { i } else { k });
    if norms[best] > T::lit(1e-6) * p2 * p2 {
        let n = norms[best].sqrt();
        let v = cands[best];
        return (mu, [v[0] / n, v[1] / n, v[2] / n]);
    }
    let mut a = [[T::zero(); MAX_DIM]; MAX_DIM];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&b[i]);
    }
    let e = sym_eigen(&a, 3);
    let v = e.vector(0);
    (e.values[0], [v[0], v[1], v[2]])
}

/// Smallest eigenpair of `b` restricted to the plane spanned by `e_2, e_3`.
fn plane_min_eigenpair<T: Real>(b: &M3<T>) -> (T, V3<T>) {
    let (a, c, d) = (b[1][1], b[1][2], b[2][2]);
    let mid = (a + d) / T::lit(2.0);
    let rad = (((a - d) / T::lit(2.0)).powi(2) + c * c).sqrt();
    let mu = mid - rad;
    // Eigenvector of [[a, c], [c, d]] for mu.
    let (x, y) = if rad == T::zero() {
        (T::one(), T::zero())
    } else if (a - mu).magnitude() >= (d - mu).magnitude() {
        (-c, a - mu)
    } else {
        (d - mu, -c)
    };
    let n = (x * x + y * y).sqrt();
    (mu, [T::zero(), x / n, y / n])
}

/// Constant-direction objective as a scalar multiplier, with reusable plans
/// and buffers (the large-grid path).
struct FixedKernel<T: Real> {
    k: Vec<T>,
    fwd: NdFft<T>,
    inv: NdFft<T>,
    buf: Vec<Complex<T>>,
}

impl<T: Real> FixedKernel<T> {
    fn new(grid: &Grid<T>, dir: &V3<T>, band_limited: bool) -> Self {
        let mut hat = Field::<T, Scalar>::zeros(grid, Rep::Spectral);
        hat.data_mut().iter_mut().for_each(|z| *z = Complex::new(T::one(), T::zero()));
        apply_k(&mut hat, dir);
        if band_limited {
            ops::dealias_in_place(&mut hat);
        }
        Self {
            k: hat.data().iter().map(|z| z.re).collect(),
            fwd: NdFft::new(grid.n(), 3, FftDirection::Forward),
            inv: NdFft::new(grid.n(), 3, FftDirection::Inverse),
            buf: vec![Complex::default(); grid.len()],
        }
    }

    /// Objective of `lam` and `K lam` written to `t`.
    fn apply(&mut self, lam: &[T], t: &mut Vec<T>) -> T {
        for (b, &l) in self.buf.iter_mut().zip(lam) {
            *b = Complex::new(l, T::zero());
        }
        self.fwd.process(&mut self.buf);
        let inv_n = T::one() / T::count(lam.len());
        let (mut num, mut den) = (T::zero(), T::zero());
        for (b, &k) in self.buf.iter_mut().zip(&self.k) {
            *b = *b * inv_n;
            let e = b.norm_sqr();
            den = den + e;
            num = num + k * e;
            *b = *b * k;
        }
        self.inv.process(&mut self.buf);
        t.clear();
        t.extend(self.buf.iter().map(|z| z.re));
        num / den
    }
}

struct Ascent<'a, T: Real> {
    grid: &'a Grid<T>,
    constraint: DirectionConstraint,
    fixed: Option<FixedKernel<T>>,
    band_limited: bool,
}

impl<T: Real> Ascent<'_, T> {
    /// Objective, pointwise majorizer weights `t(x)`, and the new directions
    /// (`None` when the direction is held fixed).
    fn evaluate(&mut self, lam: &[T], v: &[V3<T>]) -> (T, Vec<T>, Option<Vec<V3<T>>>) {
        let scale = T::lit(1.5).sqrt();
        if let Some(kernel) = self.fixed.as_mut() {
            let mut t = Vec::with_capacity(lam.len());
            let value = kernel.apply(lam, &mut t);
            return (value, t, None);
        }
        let mut b = project_st(&assemble(self.grid, lam, v).to_spectral());
        if self.band_limited {
            ops::dealias_in_place(&mut b);
        }
        let value = b.norm_sq() / mean_sq(lam);
        b.make_physical();
        let mut t = Vec::with_capacity(lam.len());
        let mut dirs = Vec::with_capacity(lam.len());
        for flat in 0..lam.len() {
            let m = sym3_at(&b, flat);
            let (mu, dir) = match self.constraint {
                DirectionConstraint::Plane => plane_min_eigenpair(&m),
                _ => min_eigenpair(&m),
            };
            t.push(-scale * mu);
            dirs.push(dir);
        }
        (value, t, Some(dirs))
    }

    fn run(&mut self, mut lam: Vec<T>, mut v: Vec<V3<T>>, cfg: &AscentConfig) -> (Vec<T>, Vec<V3<T>>, Vec<TraceRow>, bool) {
        normalize(&mut lam);
        let (mut value, mut t, mut dirs) = self.evaluate(&lam, &v);
        let mut trace = vec![TraceRow { iter: 0, objective: value.as_f64(), step_size: 0.0 }];
        let accept = T::lit(cfg.accept_tol);
        let rel = T::lit(cfg.rel_tol);
        let mut converged = false;
        for iter in 1..=cfg.max_iters {
            let mut cand: Vec<T> = t.iter().map(|&x| x.max(T::zero())).collect();
            if normalize(&mut cand) == T::zero() {
                converged = true;
                break;
            }
            if let StepRule::Damped(alpha) = cfg.step_rule {
                let a = T::lit(alpha.clamp(f64::MIN_POSITIVE, 1.0));
                for (c, &o) in cand.iter_mut().zip(&lam) {
                    *c = (T::one() - a) * o + a * *c;
                }
                normalize(&mut cand);
            }
            let (cv, ct, cd) = self.evaluate(&cand, dirs.as_deref().unwrap_or(&v));
            if !(cv >= value + accept) {
                converged = true;
                break;
            }
            let step = (cand.iter().zip(&lam).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>() / T::count(lam.len())).sqrt();
            let change = (cv - value) / value.max(T::min_positive_value());
            lam = cand;
            if let Some(d) = dirs {
                v = d;
            }
            value = cv;
            t = ct;
            dirs = cd;
            trace.push(TraceRow { iter, objective: value.as_f64(), step_size: step.as_f64() });
            if change < rel {
                converged = true;
                break;
            }
        }
        (lam, v, trace, converged)
    }
}

fn random_start<T: Real>(grid: &Grid<T>, constraint: &DirectionConstraint, fixed: Option<V3<T>>, seed: u64) -> Result<(Vec<T>, Vec<V3<T>>)> {
    let lam: Vec<T> = random_field::<T, Scalar>(grid, 1.0, seed)?
        .to_physical()
        .real_component(0)
        .into_iter()
        .map(|x| x.magnitude())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let v = (0..grid.len())
        .map(|_| {
            if let Some(f) = fixed {
                return f;
            }
            loop {
                let mut w: V3<f64> = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                if *constraint == DirectionConstraint::Plane {
                    w[0] = 0.0;
                }
                let n = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
                if n > 1e-8 {
                    return w.map(|x| T::lit(x / n));
                }
            }
        })
        .collect();
    Ok((lam, v))
}

/// Alternating (minorize-maximize) ascent for the max-mid objective.
///
/// With `B = P_st M_k`, the next iterate maximizes `⟨M, B⟩` over max-mid `M`
/// with `‖λ‖ = 1`: pointwise `v` is the eigenvector of the smallest eigenvalue
/// `μ` of `B` (within the constraint) and `λ ∝ (−μ)⁺`. Each such step cannot
/// decrease the objective; steps gaining less than `accept_tol` end the run.
pub fn estimate_supremum<T: Real>(grid: &Grid<T>, cfg: &AscentConfig) -> Result<SupremumEstimate<T>> {
    require_3d(grid, "the supremum estimator")?;
    if cfg.restarts == 0 {
        return Err(Error::Config("at least one restart is required".into()));
    }
    if let StepRule::Damped(a) = cfg.step_rule {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::Config(format!("damping must lie in (0, 1], got {a}")));
        }
    }
    let fixed = match cfg.constraint {
        DirectionConstraint::Fixed(v) => Some(unit3(&v.map(T::lit))?),
        _ => None,
    };
    let mut ascent = Ascent {
        grid,
        constraint: cfg.constraint,
        fixed: fixed.map(|f| FixedKernel::new(grid, &f, cfg.band_limited)),
        band_limited: cfg.band_limited,
    };
    let warm_axis: Option<V3<T>> = match cfg.constraint {
        DirectionConstraint::Free => Some([T::zero(), T::zero(), T::one()]),
        DirectionConstraint::Fixed(_) => fixed.filter(|f| coordinate_axis(f).is_some()),
        DirectionConstraint::Plane => Some([T::zero(), T::zero(), T::one()]),
    };

    let mut restarts = Vec::with_capacity(cfg.restarts);
    let mut best: Option<(f64, usize, Vec<T>, Vec<V3<T>>)> = None;
    for r in 0..cfg.restarts {
        let seed = cfg.seed.wrapping_add(r as u64);
        let warm = match (r, cfg.warm_start, warm_axis) {
            (0, Some(s), Some(axis)) => Some(near_maximizer(grid, T::lit(0.5), NearMaxKind::Gaussian { sharpness: s }, &axis)?),
            _ => None,
        };
        let (lam0, v0) = match &warm {
            Some(mm) => (mm.lam.clone(), mm.v.clone()),
            None => random_start(grid, &cfg.constraint, fixed, seed)?,
        };
        let (lam, v, trace, converged) = ascent.run(lam0, v0, cfg);
        let value = trace.last().map(|t| t.objective).unwrap_or(0.0);
        log::debug!("restart {r}: value {value:.6} after {} steps", trace.len() - 1);
        if best.as_ref().map_or(true, |b| value > b.0) {
            best = Some((value, r, lam, v));
        }
        restarts.push(RestartTrace {
            restart: r,
            seed,
            warm_start: warm.is_some(),
            value,
            iterations: trace.len() - 1,
            converged,
            trace,
        });
    }
    let (value, best_restart, lam, v) = best.expect("at least one restart");
    let plane = if cfg.constraint == DirectionConstraint::Plane {
        Some(plane_report(grid, &lam, restarts[best_restart].converged))
    } else {
        None
    };
    Ok(SupremumEstimate {
        value,
        label: "empirical estimate",
        constraint: cfg.constraint,
        best_restart,
        restarts,
        grid: GridMeta { d: 3, n: grid.n(), length: grid.length().as_f64() },
        plane,
        best: MaxMidField::from_parts(grid, lam, v, true),
    })
}

fn plane_report<T: Real>(grid: &Grid<T>, lam: &[T], converged: bool) -> PlaneReport {
    let hat = scalar_from(grid, lam).to_spectral();
    let total = hat.norm_sq().as_f64();
    let on_plane: f64 = (0..grid.len())
        .filter(|&flat| grid.unravel(flat)[0] == 0)
        .map(|flat| hat.at(flat)[0].norm_sqr().as_f64())
        .sum();
    let certificate = if total > 0.0 { on_plane / total } else { 0.0 };
    let top = lam.iter().fold(T::zero(), |m, &x| m.max(x));
    let positive = lam.iter().filter(|&&x| x > T::lit(1e-12) * top).count();
    let positive_fraction = positive as f64 / lam.len() as f64;
    PlaneReport {
        certificate,
        bound: 1.0 - certificate / 6.0,
        positive_fraction,
        no_positive_fixed_point: !(converged && positive_fraction == 1.0),
    }
}
