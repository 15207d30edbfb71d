//! Orthogonal splits of matrix and vector fields by Fourier multipliers.
//!
//! For a mode with unit effective wavevector `e` and coefficient matrix `M`,
//! put `w = M e`, `a = e.w` and `w_perp = w - a e`. Then
//!
//! * strain: `e (x) w_perp + w_perp (x) e`
//! * Hessian: `a e (x) e`
//! * adjusted identity: `c (I - e (x) e)` with `c = (tr M - a) / (d - 1)`
//! * trace-and-divergence-free: the remainder.
//!
//! Mean-like modes (zero effective wavevector) send `(tr M / d) I` to the
//! adjusted-identity part and the trace-free rest to the last part.

use rustfft::num_complex::Complex;
use serde::Serialize;

use crate::error::Result;
use crate::field::{
    pack_antisym, pack_sym, unpack_antisym, unpack_sym, AntiSymMatrix, Field, Kind, Mat, Matrix,
    Rep, SymMatrix, Vector,
};
use crate::grid::{unit_and_norm, MAX_DIM};
use crate::scalar::Real;

/// The four orthogonal subspaces of symmetric fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymSubspace {
    Strain,
    Hessian,
    AdjustedIdentity,
    TraceDivFree,
}

impl SymSubspace {
    pub const ALL: [SymSubspace; 4] = [
        SymSubspace::Strain,
        SymSubspace::Hessian,
        SymSubspace::AdjustedIdentity,
        SymSubspace::TraceDivFree,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SymSubspace::Strain => "st",
            SymSubspace::Hessian => "hess",
            SymSubspace::AdjustedIdentity => "id_tilde",
            SymSubspace::TraceDivFree => "trdivfree",
        }
    }
}

type C<T> = Complex<T>;

fn zero_mat<T: Real>() -> Mat<C<T>> {
    [[C::default(); MAX_DIM]; MAX_DIM]
}

/// Closed-form split of one symmetric coefficient matrix, indexed by
/// [`SymSubspace::index`].
pub fn split_sym_mode<T: Real>(d: usize, xi: &[T; MAX_DIM], m: &Mat<C<T>>) -> [Mat<C<T>>; 4] {
    match d {
        2 => split_sym_fixed::<T, 2>(xi, m),
        3 => split_sym_fixed::<T, 3>(xi, m),
        4 => split_sym_fixed::<T, 4>(xi, m),
        _ => panic!("dimension {d} outside 2..=4"),
    }
}

fn split_sym_fixed<T: Real, const D: usize>(xi: &[T; MAX_DIM], m: &Mat<C<T>>) -> [Mat<C<T>>; 4] {
    let mut parts = [zero_mat::<T>(); 4];
    let mut tr = C::default();
    for i in 0..D {
        tr = tr + m[i][i];
    }
    match unit_and_norm(xi, D) {
        None => {
            let c = tr / T::count(D);
            for i in 0..D {
                parts[2][i][i] = c;
            }
        }
        Some((e, _)) => {
            let mut w = [C::<T>::default(); D];
            for i in 0..D {
                for j in 0..D {
                    w[i] = w[i] + m[i][j] * e[j];
                }
            }
            let mut a = C::default();
            for i in 0..D {
                a = a + w[i] * e[i];
            }
            let mut wp = [C::<T>::default(); D];
            for i in 0..D {
                wp[i] = w[i] - a * e[i];
            }
            let c = (tr - a) / T::count(D - 1);
            for i in 0..D {
                for j in i..D {
                    let ee = e[i] * e[j];
                    parts[0][i][j] = wp[j] * e[i] + wp[i] * e[j];
                    parts[1][i][j] = a * ee;
                    parts[2][i][j] = c * (if i == j { T::one() - ee } else { -ee });
                }
            }
        }
    }
    for i in 0..D {
        for j in i..D {
            parts[3][i][j] = m[i][j] - parts[0][i][j] - parts[1][i][j] - parts[2][i][j];
            for p in parts.iter_mut() {
                p[j][i] = p[i][j];
            }
        }
    }
    parts
}

/// Closed-form split of one anti-symmetric coefficient matrix into its
/// vorticity part `w (x) e - e (x) w` (`w = A e`) and the divergence-free rest.
pub fn split_antisym_mode<T: Real>(d: usize, xi: &[T; MAX_DIM], a: &Mat<C<T>>) -> [Mat<C<T>>; 2] {
    let mut vort = zero_mat::<T>();
    if let Some((e, _)) = unit_and_norm(xi, d) {
        let mut w = [C::<T>::default(); MAX_DIM];
        for i in 0..d {
            w[i] = (0..d).fold(C::default(), |acc, j| acc + a[i][j] * e[j]);
        }
        for i in 0..d {
            for j in 0..d {
                vort[i][j] = w[i] * e[j] - w[j] * e[i];
            }
        }
    }
    let mut rest = zero_mat::<T>();
    for i in 0..d {
        for j in 0..d {
            rest[i][j] = a[i][j] - vort[i][j];
        }
    }
    [vort, rest]
}

/// Runs `f` on the spectral form of `m` and returns the outputs in the
/// representation of `m`.
fn spectral_map<T: Real, K: Kind, const P: usize>(
    m: &Field<T, K>,
    mut f: impl FnMut(&[T; MAX_DIM], &[C<T>], &mut [&mut [C<T>]; P]),
) -> [Field<T, K>; P] {
    let input = m.to_spectral();
    let mut outs: [Field<T, K>; P] = std::array::from_fn(|_| Field::zeros(m.grid(), Rep::Spectral));
    let nc = m.components();
    for (flat, xi) in m.grid().wavevectors().enumerate() {
        let src = &input.data()[flat * nc..(flat + 1) * nc];
        let mut views: [&mut [C<T>]; P] = {
            let mut it = outs.iter_mut();
            std::array::from_fn(|_| {
                let o = it.next().expect("P outputs");
                let slice: &mut [C<T>] = &mut o.data_mut()[flat * nc..(flat + 1) * nc];
                slice
            })
        };
        f(&xi, src, &mut views);
    }
    if m.rep() == Rep::Physical {
        for o in &mut outs {
            o.make_physical();
        }
    }
    outs
}

fn split_sym_field<T: Real>(m: &Field<T, SymMatrix>) -> [Field<T, SymMatrix>; 4] {
    let d = m.grid().dim();
    spectral_map::<T, SymMatrix, 4>(m, |xi, src, outs| {
        let parts = split_sym_mode(d, xi, &unpack_sym(d, src));
        for (o, p) in outs.iter_mut().zip(parts.iter()) {
            pack_sym(d, p, o);
        }
    })
}

fn project_sym<T: Real>(m: &Field<T, SymMatrix>, part: SymSubspace) -> Field<T, SymMatrix> {
    let d = m.grid().dim();
    let [out] = spectral_map::<T, SymMatrix, 1>(m, |xi, src, outs| {
        let parts = split_sym_mode(d, xi, &unpack_sym(d, src));
        pack_sym(d, &parts[part.index()], outs[0]);
    });
    out
}

/// Orthogonal projection onto one of the four subspaces, returned in the
/// representation of the input.
pub fn project<T: Real>(m: &Field<T, SymMatrix>, part: SymSubspace) -> Field<T, SymMatrix> {
    project_sym(m, part)
}

pub fn project_st<T: Real>(m: &Field<T, SymMatrix>) -> Field<T, SymMatrix> {
    project_sym(m, SymSubspace::Strain)
}

pub fn project_hess<T: Real>(m: &Field<T, SymMatrix>) -> Field<T, SymMatrix> {
    project_sym(m, SymSubspace::Hessian)
}

pub fn project_id_tilde<T: Real>(m: &Field<T, SymMatrix>) -> Field<T, SymMatrix> {
    project_sym(m, SymSubspace::AdjustedIdentity)
}

pub fn project_trdivfree<T: Real>(m: &Field<T, SymMatrix>) -> Field<T, SymMatrix> {
    project_sym(m, SymSubspace::TraceDivFree)
}

/// Projection onto symmetric fields with `div M = 0` (adjusted identity plus
/// trace-and-divergence-free).
pub fn project_divfree_sym<T: Real>(m: &Field<T, SymMatrix>) -> Field<T, SymMatrix> {
    let d = m.grid().dim();
    let [out] = spectral_map::<T, SymMatrix, 1>(m, |xi, src, outs| {
        let p = split_sym_mode(d, xi, &unpack_sym(d, src));
        let mut s = zero_mat::<T>();
        for i in 0..d {
            for j in 0..d {
                s[i][j] = p[2][i][j] + p[3][i][j];
            }
        }
        pack_sym(d, &s, outs[0]);
    });
    out
}

#[derive(Clone, Debug)]
pub struct DecompositionResult<T> {
    pub st: Field<T, SymMatrix>,
    pub hess: Field<T, SymMatrix>,
    pub id_tilde: Field<T, SymMatrix>,
    pub trdivfree: Field<T, SymMatrix>,
    /// Pairwise inner products of the parts, in [`SymSubspace`] order.
    pub gram: [[T; 4]; 4],
    /// `‖st + hess + id_tilde + trdivfree − M‖ / ‖M‖` (absolute if `M = 0`).
    pub reconstruction_error: T,
    pub input_norm_sq: T,
}

impl<T: Real> DecompositionResult<T> {
    pub fn part(&self, s: SymSubspace) -> &Field<T, SymMatrix> {
        match s {
            SymSubspace::Strain => &self.st,
            SymSubspace::Hessian => &self.hess,
            SymSubspace::AdjustedIdentity => &self.id_tilde,
            SymSubspace::TraceDivFree => &self.trdivfree,
        }
    }

    /// Divergence-free part of the three-part split: `id_tilde + trdivfree`.
    pub fn divfree(&self) -> Field<T, SymMatrix> {
        &self.id_tilde + &self.trdivfree
    }

    /// Largest off-diagonal Gram entry relative to `‖M‖²`.
    pub fn max_cross_term(&self) -> T {
        let mut worst = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    worst = worst.max(self.gram[i][j].magnitude());
                }
            }
        }
        relative(worst, self.input_norm_sq)
    }

    /// `|‖M‖² − Σ‖part‖²| / ‖M‖²`.
    pub fn pythagoras_defect(&self) -> T {
        let sum = (0..4).fold(T::zero(), |acc, i| acc + self.gram[i][i]);
        relative((self.input_norm_sq - sum).magnitude(), self.input_norm_sq)
    }

    /// JSON record with the Gram matrix, part norms and residuals.
    pub fn diagnostics(&self) -> serde_json::Value {
        let f = |x: T| x.as_f64();
        let base = self.input_norm_sq.sqrt();
        let tdf_trace = relative(self.trdivfree.trace().norm(), base);
        let tdf_div = div_residual(&self.trdivfree, base);
        serde_json::json!({
            "gram": self.gram.iter().map(|r| r.iter().map(|&x| f(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "norms": {
                "input": f(base),
                "st": f(self.st.norm()),
                "hess": f(self.hess.norm()),
                "id_tilde": f(self.id_tilde.norm()),
                "trdivfree": f(self.trdivfree.norm()),
            },
            "residuals": {
                "reconstruction": f(self.reconstruction_error),
                "pythagoras": f(self.pythagoras_defect()),
                "max_cross_term": f(self.max_cross_term()),
                "trdivfree_trace": f(tdf_trace),
                "trdivfree_divergence": f(tdf_div),
            }
        })
    }
}

fn relative<T: Real>(x: T, base: T) -> T {
    if base > T::zero() {
        x / base
    } else {
        x
    }
}

/// Four-part orthogonal decomposition.
pub fn decompose_sym<T: Real>(m: &Field<T, SymMatrix>) -> DecompositionResult<T> {
    let [st, hess, id_tilde, trdivfree] = split_sym_field(m);
    let parts = [&st, &hess, &id_tilde, &trdivfree];
    let mut gram = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let g = parts[i].inner(parts[j]).expect("parts share a grid");
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let sum = &(&st + &hess) + &(&id_tilde + &trdivfree);
    let input_norm_sq = m.norm_sq();
    let reconstruction_error = relative(sum.try_sub(m).expect("same grid").norm(), input_norm_sq.sqrt());
    DecompositionResult {
        st,
        hess,
        id_tilde,
        trdivfree,
        gram,
        reconstruction_error,
        input_norm_sq,
    }
}

/// `‖div (−Δ)^{-1/2} M‖ / base`, computed per mode as `|M e|`.
pub fn div_residual<T: Real>(m: &Field<T, SymMatrix>, base: T) -> T {
    let d = m.grid().dim();
    let s = m.to_spectral();
    let mut acc = 0.0f64;
    for (flat, xi) in m.grid().wavevectors().enumerate() {
        if let Some((e, _)) = unit_and_norm(&xi, d) {
            let mm = unpack_sym(d, s.at(flat));
            for row in mm.iter().take(d) {
                let v = (0..d).fold(C::<T>::default(), |acc, j| acc + row[j] * e[j]);
                acc += v.norm_sqr().as_f64();
            }
        }
    }
    relative(T::lit(acc.sqrt()), base)
}

/// `‖div² (−Δ)^{-1} M‖ / base`, computed per mode as `|e^T M e|`.
pub fn div2_residual<T: Real>(m: &Field<T, SymMatrix>, base: T) -> T {
    let d = m.grid().dim();
    let s = m.to_spectral();
    let mut acc = 0.0f64;
    for (flat, xi) in m.grid().wavevectors().enumerate() {
        if let Some((e, _)) = unit_and_norm(&xi, d) {
            let mm = unpack_sym(d, s.at(flat));
            let mut v = C::<T>::default();
            for i in 0..d {
                for j in 0..d {
                    v = v + mm[i][j] * (e[i] * e[j]);
                }
            }
            acc += v.norm_sqr().as_f64();
        }
    }
    relative(T::lit(acc.sqrt()), base)
}

#[derive(Clone, Debug)]
pub struct AntiSymDecomposition<T> {
    pub vort: Field<T, AntiSymMatrix>,
    pub divfree: Field<T, AntiSymMatrix>,
}

/// Vorticity / divergence-free split of an anti-symmetric field.
pub fn decompose_antisym<T: Real>(a: &Field<T, AntiSymMatrix>) -> AntiSymDecomposition<T> {
    let d = a.grid().dim();
    let [vort, divfree] = spectral_map::<T, AntiSymMatrix, 2>(a, |xi, src, outs| {
        let parts = split_antisym_mode(d, xi, &unpack_antisym(d, src));
        for (o, p) in outs.iter_mut().zip(parts.iter()) {
            pack_antisym(d, p, o);
        }
    });
    AntiSymDecomposition { vort, divfree }
}

#[derive(Clone, Debug)]
pub struct HelmholtzSplit<T> {
    pub df: Field<T, Vector>,
    pub gr: Field<T, Vector>,
}

/// Classical split `u = df + gr`; the mean goes to `df`.
pub fn helmholtz_vector<T: Real>(u: &Field<T, Vector>) -> HelmholtzSplit<T> {
    let d = u.grid().dim();
    let [df, gr] = spectral_map::<T, Vector, 2>(u, |xi, src, outs| {
        let mut g = [C::<T>::default(); MAX_DIM];
        if let Some((e, _)) = unit_and_norm(xi, d) {
            let dot = (0..d).fold(C::default(), |acc, a| acc + src[a] * e[a]);
            for a in 0..d {
                g[a] = dot * e[a];
            }
        }
        for a in 0..d {
            outs[1][a] = g[a];
            outs[0][a] = src[a] - g[a];
        }
    });
    HelmholtzSplit { df, gr }
}

/// Leray projection: the divergence-free part of `u`.
pub fn project_df<T: Real>(u: &Field<T, Vector>) -> Field<T, Vector> {
    helmholtz_vector(u).df
}

/// Five-part split of a general matrix field: four symmetric parts plus the
/// two anti-symmetric parts.
#[derive(Clone, Debug)]
pub struct FullDecomposition<T> {
    pub sym: DecompositionResult<T>,
    pub asym: AntiSymDecomposition<T>,
}

impl<T: Real> FullDecomposition<T> {
    /// The five parts embedded as general matrix fields, in the order
    /// st, hess, divfree (symmetric), vort, divfree (anti-symmetric).
    pub fn parts(&self) -> Result<[Field<T, Matrix>; 5]> {
        let g = self.sym.st.grid();
        let rep = self.sym.st.rep();
        let zs = Field::<T, SymMatrix>::zeros(g, rep);
        let za = Field::<T, AntiSymMatrix>::zeros(g, rep);
        Ok([
            Field::from_parts(&self.sym.st, &za)?,
            Field::from_parts(&self.sym.hess, &za)?,
            Field::from_parts(&self.sym.divfree(), &za)?,
            Field::from_parts(&zs, &self.asym.vort)?,
            Field::from_parts(&zs, &self.asym.divfree)?,
        ])
    }
}

pub fn decompose_full<T: Real>(m: &Field<T, Matrix>) -> FullDecomposition<T> {
    FullDecomposition {
        sym: decompose_sym(&m.symmetric_part()),
        asym: decompose_antisym(&m.antisymmetric_part()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sym_index;
    use crate::grid::Grid;
    use crate::ops::{self, LaplacianPower};
    use crate::random::{random_divfree, random_field};

    fn single_mode(g: &Grid<f64>, idx: &[usize], m: &[[f64; 3]; 3]) -> Field<f64, SymMatrix> {
        let mut f = Field::<f64, SymMatrix>::zeros(g, Rep::Spectral);
        let mut full = [[C::default(); MAX_DIM]; MAX_DIM];
        for i in 0..3 {
            for j in 0..3 {
                full[i][j] = C::new(m[i][j], 0.0);
            }
        }
        f.set_matrix(g.ravel(idx), &full);
        f
    }

    #[test]
    fn axial_mode_examples() {
        let g = Grid::<f64>::new(3, 8, 1.0).unwrap();
        let e3e3 = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let m = single_mode(&g, &[0, 0, 1], &e3e3);
        assert_eq!(project_st(&m).max_abs(), 0.0);
        assert!(project_hess(&m).relative_distance(&m).unwrap() < 1e-15);

        let shear = [[0.0, 0.0, 0.5], [0.0, 0.0, 0.0], [0.5, 0.0, 0.0]];
        let m = single_mode(&g, &[0, 0, 1], &shear);
        assert!(project_st(&m).relative_distance(&m).unwrap() < 1e-15);

        let e1e1 = [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert_eq!(project_hess(&single_mode(&g, &[0, 0, 1], &e1e1)).max_abs(), 0.0);

        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let want = single_mode(&g, &[0, 0, 1], &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]);
        let got = project_id_tilde(&single_mode(&g, &[0, 0, 1], &id));
        assert!(got.relative_distance(&want).unwrap() < 1e-15);

        let tdf = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]];
        let m = single_mode(&g, &[0, 0, 1], &tdf);
        assert_eq!(project_id_tilde(&m).max_abs(), 0.0);
        assert!(project_trdivfree(&m).relative_distance(&m).unwrap() < 1e-15);
    }

    #[test]
    fn zero_input_gives_zero_parts() {
        let g = Grid::<f64>::new(3, 8, 1.0).unwrap();
        let r = decompose_sym(&Field::<f64, SymMatrix>::zeros(&g, Rep::Physical));
        for s in SymSubspace::ALL {
            assert_eq!(r.part(s).max_abs(), 0.0);
        }
        assert_eq!(r.reconstruction_error, 0.0);
    }

    #[test]
    fn random_field_accounting() {
        for d in 2..=4 {
            let g = Grid::<f64>::new(d, 8, 1.0).unwrap();
            let m = random_field::<f64, SymMatrix>(&g, 1.0, d as u64).unwrap();
            let r = decompose_sym(&m);
            assert!(r.reconstruction_error < 1e-14);
            assert!(r.max_cross_term() < 1e-14);
            assert!(r.pythagoras_defect() < 1e-13);
            let diag = r.diagnostics();
            assert!(diag["residuals"]["trdivfree_trace"].as_f64().unwrap() < 1e-13);
            assert!(diag["residuals"]["trdivfree_divergence"].as_f64().unwrap() < 1e-13);
        }
    }

    #[test]
    fn physical_input_gives_physical_parts() {
        let g = Grid::<f64>::new(3, 8, 1.0).unwrap();
        let m = random_field::<f64, SymMatrix>(&g, 1.0, 1).unwrap();
        let p = project_st(&m.to_physical());
        assert_eq!(p.rep(), Rep::Physical);
        assert!(p.relative_distance(&project_st(&m)).unwrap() < 1e-13);
        assert!(p.max_imag_relative() < 1e-13);
    }

    #[test]
    fn symmetric_gradient_of_divfree_is_strain() {
        let g = Grid::<f64>::new(3, 16, 1.0).unwrap();
        let u = random_divfree::<f64>(&g, 1.0, 4).unwrap();
        let m = ops::sym_gradient(&u).unwrap();
        let r = decompose_sym(&m);
        let base = m.norm();
        assert!(r.st.relative_distance(&m).unwrap() < 1e-12);
        for part in [&r.hess, &r.id_tilde, &r.trdivfree] {
            assert!(part.norm() < 1e-10 * base);
        }
    }

    #[test]
    fn hessians_are_fixed_and_identity_projects_to_minus_hessian() {
        let g = Grid::<f64>::new(3, 16, 1.0).unwrap();
        let f = random_field::<f64, crate::field::Scalar>(&g, 1.0, 8).unwrap();
        let h = ops::hessian(&ops::inverse_laplacian(&f, LaplacianPower::One).unwrap()).unwrap();
        assert!(project_hess(&h).relative_distance(&h).unwrap() < 1e-12);

        let fi = Field::<f64, SymMatrix>::identity_times(&f);
        let ph = project_hess(&fi);
        assert!(ph.relative_distance(&(-h.clone())).unwrap() < 1e-12);
        // id_tilde(fI) = fI + Hess(−Δ)⁻¹f apart from the mean, which stays in fI.
        let want = &fi + &h;
        assert!(project_id_tilde(&fi).relative_distance(&want).unwrap() < 1e-12);
    }

    #[test]
    fn helmholtz_examples() {
        let g = Grid::<f64>::new(3, 16, 1.0).unwrap();
        let f = random_field::<f64, crate::field::Scalar>(&g, 1.0, 2).unwrap();
        let grad = ops::gradient(&f).unwrap();
        let s = helmholtz_vector(&grad);
        assert!(s.df.norm() < 1e-12 * grad.norm());
        let a = random_field::<f64, Vector>(&g, 1.0, 3).unwrap();
        let c = ops::curl(&a).unwrap();
        let s = helmholtz_vector(&c);
        assert!(s.gr.norm() < 1e-12 * c.norm());
        let u = random_field::<f64, Vector>(&g, 0.5, 5).unwrap();
        let s = helmholtz_vector(&u);
        assert!(s.df.inner(&s.gr).unwrap().abs() < 1e-12 * u.norm_sq());
        assert!(ops::divergence(&s.df).unwrap().norm() < 1e-10 * u.norm());
    }

    #[test]
    fn antisym_examples() {
        let g = Grid::<f64>::new(3, 16, 1.0).unwrap();
        let u = random_divfree::<f64>(&g, 1.0, 6).unwrap();
        let a = ops::antisym_gradient(&u).unwrap();
        let r = decompose_antisym(&a);
        assert!(r.vort.relative_distance(&a).unwrap() < 1e-12);
        assert!(r.divfree.norm() < 1e-12 * a.norm());

        let b = random_field::<f64, AntiSymMatrix>(&g, 1.0, 7).unwrap();
        let r = decompose_antisym(&b);
        assert!((&r.vort + &r.divfree).relative_distance(&b).unwrap() < 1e-14);
        assert!(r.vort.inner(&r.divfree).unwrap().abs() < 1e-13 * b.norm_sq());
        assert!(ops::antisym_divergence(&r.divfree).unwrap().norm() < 1e-10 * b.norm());
    }

    #[test]
    fn sym_index_layout_matches_spec_order() {
        assert_eq!(sym_index(3, 0, 2), 2);
        assert_eq!(sym_index(3, 1, 1), 3);
        assert_eq!(sym_index(3, 2, 1), 4);
    }
}
