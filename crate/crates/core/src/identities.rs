//! Residual checks for the structural identities of the strain space.
//!
//! Functions here measure; callers decide what tolerance counts as a pass.

use rustfft::num_complex::Complex;
use serde::Serialize;

use crate::decomp::{helmholtz_vector, project_df, project_st};
use crate::error::{Error, Result};
use crate::field::{Field, Rep, Scalar, SymMatrix, Vector};
use crate::grid::MAX_DIM;
use crate::ops::{self, LaplacianPower};
use crate::scalar::Real;
use crate::small::{det3, frobenius_sq, sym_eigen};

/// Tolerance used for hard preconditions (divergence-free input and so on).
pub fn precondition_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::lit(1e4) * T::epsilon())
}

fn ratio<T: Real>(num: T, den: T) -> T {
    if den > T::zero() {
        num / den
    } else {
        num
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StrainResidual<T> {
    /// `‖tr S‖ / ‖S‖`.
    pub trace: T,
    /// `‖S + 2 ∇_sym div (−Δ)^{-1} S‖ / ‖S‖`.
    pub constraint: T,
}

impl<T: Real> StrainResidual<T> {
    pub fn max(&self) -> T {
        self.trace.max(self.constraint)
    }
}

fn require_dim<T: Real, K: crate::field::Kind>(f: &Field<T, K>, d: usize, what: &str) -> Result<()> {
    if f.grid().dim() != d {
        return Err(Error::Unsupported(format!(
            "{what} is stated for d = {d}, got d = {}",
            f.grid().dim()
        )));
    }
    Ok(())
}

/// Both residuals vanish exactly when `S` lies in the strain space (d = 3).
pub fn check_strain_characterization<T: Real>(s: &Field<T, SymMatrix>) -> Result<StrainResidual<T>> {
    require_dim(s, 3, "the strain characterization")?;
    let s = s.to_spectral();
    let norm = s.norm();
    if norm == T::zero() {
        return Ok(StrainResidual { trace: T::zero(), constraint: T::zero() });
    }
    let trace = s.trace().norm() / norm;
    let div = ops::sym_divergence(&ops::inverse_laplacian(&s, LaplacianPower::One)?)?;
    let correction = ops::sym_gradient(&div)?.scale(T::lit(2.0));
    let constraint = s.try_add(&correction)?.norm() / norm;
    Ok(StrainResidual { trace, constraint })
}

/// `‖P_gr u‖ / ‖u‖`: zero exactly for divergence-free `u`.
pub fn divergence_residual<T: Real>(u: &Field<T, Vector>) -> T {
    let split = helmholtz_vector(&u.to_spectral());
    ratio(split.gr.norm(), u.norm())
}

fn mean_norm<T: Real>(u: &Field<T, Vector>) -> T {
    let s = u.to_spectral();
    s.at(0).iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

pub(crate) fn require_divfree_mean_zero<T: Real>(u: &Field<T, Vector>) -> Result<()> {
    let tol = precondition_tolerance::<T>();
    let div = divergence_residual(u);
    if div > tol {
        return Err(Error::Precondition {
            what: "velocity is not divergence-free".into(),
            residual: div.as_f64(),
        });
    }
    let mean = ratio(mean_norm(u), u.norm());
    if mean > tol {
        return Err(Error::Precondition {
            what: "velocity has a nonzero mean".into(),
            residual: mean.as_f64(),
        });
    }
    Ok(())
}

/// `∇_sym (−Δ)^{-1/2} u` for a divergence-free, mean-zero `u` (spectral output).
pub fn strain_from_velocity<T: Real>(u: &Field<T, Vector>) -> Result<Field<T, SymMatrix>> {
    require_divfree_mean_zero(u)?;
    let u = u.to_spectral();
    ops::sym_gradient(&ops::inverse_laplacian(&u, LaplacianPower::Half)?)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IsometryRatios<T> {
    /// `‖∇_sym (−Δ)^{-1/2} u‖² / ‖u‖²`.
    pub sym: T,
    /// `½‖∇×(−Δ)^{-1/2} u‖² / ‖u‖²` (d = 3 only).
    pub curl: Option<T>,
}

pub fn isometry_ratios<T: Real>(u: &Field<T, Vector>) -> Result<IsometryRatios<T>> {
    let s = strain_from_velocity(u)?;
    let u = u.to_spectral();
    let base = u.norm_sq();
    let sym = ratio(s.norm_sq(), base);
    let curl = if u.grid().dim() == 3 {
        let c = ops::curl(&ops::inverse_laplacian(&u, LaplacianPower::Half)?)?;
        Some(ratio(T::lit(0.5) * c.norm_sq(), base))
    } else {
        None
    };
    Ok(IsometryRatios { sym, curl })
}

/// `2‖∇×div(−Δ)^{-1} M‖²`, which equals `‖P_st M‖²` (d = 3).
pub fn projection_norm_via_curl<T: Real>(m: &Field<T, SymMatrix>) -> Result<T> {
    require_dim(m, 3, "the vector curl")?;
    let m = m.to_spectral();
    let v = ops::sym_divergence(&ops::inverse_laplacian(&m, LaplacianPower::One)?)?;
    Ok(T::lit(2.0) * ops::curl(&v)?.norm_sq())
}

/// `‖div P_st M − P_df div M‖ / ‖M‖`.
pub fn div_commutation_residual<T: Real>(m: &Field<T, SymMatrix>) -> Result<T> {
    let m = m.to_spectral();
    let lhs = ops::sym_divergence(&project_st(&m))?;
    let rhs = project_df(&ops::sym_divergence(&m)?);
    Ok(ratio(lhs.try_sub(&rhs)?.norm(), m.norm()))
}

/// Element of the rotation group of the cube: a signed permutation matrix
/// with determinant +1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CubicRotation {
    m: [[i8; 3]; 3],
}

impl CubicRotation {
    pub fn identity() -> Self {
        Self { m: [[1, 0, 0], [0, 1, 0], [0, 0, 1]] }
    }

    /// All 24 rotations, identity first.
    pub fn all() -> Vec<Self> {
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut out = Vec::with_capacity(24);
        for p in PERMS {
            for signs in 0..8u8 {
                let mut m = [[0i8; 3]; 3];
                for (row, &col) in p.iter().enumerate() {
                    m[row][col] = if signs >> row & 1 == 1 { -1 } else { 1 };
                }
                let r = Self { m };
                if r.det() == 1 {
                    out.push(r);
                }
            }
        }
        out
    }

    /// Accepts a real 3x3 matrix only if it is (to 1e-12) a cube rotation.
    pub fn from_matrix(q: &[[f64; 3]; 3]) -> Result<Self> {
        let mut m = [[0i8; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let r = q[i][j].round();
                if (q[i][j] - r).abs() > 1e-12 || r.abs() > 1.0 {
                    return Err(Error::Unsupported(format!(
                        "rotation entry ({i},{j}) = {} does not preserve the grid",
                        q[i][j]
                    )));
                }
                m[i][j] = r as i8;
            }
        }
        let r = Self { m };
        let is_perm = (0..3).all(|i| m[i].iter().filter(|&&x| x != 0).count() == 1)
            && (0..3).all(|j| (0..3).filter(|&i| m[i][j] != 0).count() == 1);
        if !is_perm || r.det() != 1 {
            return Err(Error::Unsupported("matrix is not a rotation of the cube".into()));
        }
        Ok(r)
    }

    pub fn matrix(&self) -> [[i8; 3]; 3] {
        self.m
    }

    fn det(&self) -> i32 {
        let m = self.m.map(|r| r.map(i32::from));
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// `(Q k) mod n` for an index triple.
    fn map_index(&self, idx: &[usize; MAX_DIM], n: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for (i, o) in out.iter_mut().enumerate().take(3) {
            let mut acc: i64 = 0;
            for j in 0..3 {
                acc += self.m[i][j] as i64 * idx[j] as i64;
            }
            *o = acc.rem_euclid(n as i64) as usize;
        }
        out
    }
}

/// `S^Q(x) = Q^T S(Q x) Q`, exact on samples and on modes (d = 3).
pub fn rotate_field<T: Real>(s: &Field<T, SymMatrix>, q: &CubicRotation) -> Result<Field<T, SymMatrix>> {
    require_dim(s, 3, "cubic rotation")?;
    let g = s.grid();
    let n = g.n();
    let qm = q.m.map(|r| r.map(|x| T::lit(x as f64)));
    let mut out = Field::<T, SymMatrix>::zeros(g, s.rep());
    for flat in 0..g.len() {
        let src = g.ravel(&q.map_index(&g.unravel(flat), n));
        let a = s.matrix_at(src);
        let mut r = [[Complex::<T>::default(); MAX_DIM]; MAX_DIM];
        for i in 0..3 {
            for j in i..3 {
                let mut acc = Complex::default();
                for k in 0..3 {
                    for l in 0..3 {
                        let w = qm[k][i] * qm[l][j];
                        if w != T::zero() {
                            acc = acc + a[k][l] * w;
                        }
                    }
                }
                r[i][j] = acc;
                r[j][i] = acc;
            }
        }
        out.set_matrix(flat, &r);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DetBoundReport<T> {
    /// `max_x (−4 det M − (2/9)√6 |M|³) / max_x |M|³`; nonpositive when the bound holds.
    pub max_violation: T,
    /// Points where the gap is below `1e-8 |M|³`.
    pub equality_sites: usize,
    /// Whether every equality site has `λ₂ = λ₃` to 1e-6 (relative to `|M|`).
    pub equality_has_double_top: bool,
}

/// `(2/9)√6`.
pub fn det_bound_constant<T: Real>() -> T {
    T::lit(2.0 / 9.0 * 6f64.sqrt())
}

/// `−4 det M − (2/9)√6 |M|³` for one trace-free 3x3 matrix.
pub fn det_bound_gap<T: Real>(m: &crate::field::Mat<T>) -> T {
    let f = frobenius_sq(m, 3).sqrt();
    -T::lit(4.0) * det3(m) - det_bound_constant::<T>() * f * f * f
}

/// Pointwise check of `−4 det M ≤ (2/9)√6 |M|³` on a trace-free field (d = 3).
pub fn det_bound_check<T: Real>(m: &Field<T, SymMatrix>) -> Result<DetBoundReport<T>> {
    require_dim(m, 3, "the determinant bound")?;
    let p = m.to_physical();
    let scale = p.max_abs();
    let tr_tol = precondition_tolerance::<T>() * scale.max(T::min_positive_value());
    let tr = p.trace();
    let worst_tr = tr.max_abs();
    if worst_tr > tr_tol {
        return Err(Error::Precondition {
            what: "determinant bound needs a trace-free field".into(),
            residual: ratio(worst_tr, scale).as_f64(),
        });
    }
    let mut max_gap = T::neg_infinity();
    let mut max_cube = T::zero();
    let mut sites = 0;
    let mut double_top = true;
    for flat in 0..p.grid().len() {
        let mut a = [[T::zero(); MAX_DIM]; MAX_DIM];
        let mc = p.matrix_at(flat);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = mc[i][j].re;
            }
        }
        let f = frobenius_sq(&a, 3).sqrt();
        let cube = f * f * f;
        let gap = det_bound_gap(&a);
        max_gap = max_gap.max(gap);
        max_cube = max_cube.max(cube);
        if cube > T::zero() && gap.magnitude() <= T::lit(1e-8) * cube {
            sites += 1;
            let e = sym_eigen(&a, 3);
            if (e.values[2] - e.values[1]).magnitude() > T::lit(1e-6) * f {
                double_top = false;
            }
        }
    }
    let max_violation = if max_cube > T::zero() { max_gap / max_cube } else { T::zero() };
    Ok(DetBoundReport {
        max_violation,
        equality_sites: sites,
        equality_has_double_top: double_top,
    })
}

/// Scalar field `f` such that `P_hess(M) = Hess (−Δ)^{-1} f`: `f = −tr P_hess(M)`
/// up to its mean.
pub fn hessian_potential<T: Real>(hess_part: &Field<T, SymMatrix>) -> Field<T, Scalar> {
    let mut f = -hess_part.to_spectral().trace();
    f.data_mut()[0] = Complex::default();
    f
}

/// Spectral field of `u` with its mean removed.
pub fn remove_mean<T: Real>(u: &Field<T, Vector>) -> Field<T, Vector> {
    let mut s = u.to_spectral();
    s.at_mut(0).iter_mut().for_each(|z| *z = Complex::default());
    if u.rep() == Rep::Physical {
        s.make_physical();
    }
    s
}
