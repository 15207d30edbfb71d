//! Per-mode orthonormal bases of the four symmetric subspaces, built from an
//! explicit frame `{xi_hat, eta, mu, ...}`. Used as a reference projector that
//! shares no formulas with the closed-form multipliers in [`crate::decomp`].

use rustfft::num_complex::Complex;

use crate::decomp::SymSubspace;
use crate::field::{pack_sym, unpack_sym, Field, Mat, Rep, SymMatrix};
use crate::grid::{unit_and_norm, MAX_DIM};
use crate::scalar::Real;

const MAX_SPAN: usize = MAX_DIM * (MAX_DIM + 1) / 2;

#[derive(Clone, Debug)]
pub struct ModeBasis<T> {
    dim: usize,
    xi_hat: Option<[T; MAX_DIM]>,
    complement: [[T; MAX_DIM]; MAX_DIM - 1],
    mats: [Mat<T>; MAX_SPAN],
    /// `[start, end)` into `mats` per subspace, in [`SymSubspace`] order.
    ranges: [(usize, usize); 4],
}

impl<T: Real> ModeBasis<T> {
    /// Basis for the mode with effective wavevector `xi`.
    pub fn new(xi: &[T; MAX_DIM], dim: usize) -> Self {
        let mut b = Self {
            dim,
            xi_hat: None,
            complement: [[T::zero(); MAX_DIM]; MAX_DIM - 1],
            mats: [[[T::zero(); MAX_DIM]; MAX_DIM]; MAX_SPAN],
            ranges: [(0, 0); 4],
        };
        match unit_and_norm(xi, dim) {
            Some((e, _)) => {
                b.xi_hat = Some(e);
                b.complement_frame(&e);
                b.fill_nonzero_mode(&e);
            }
            None => b.fill_mean_mode(),
        }
        b
    }

    pub fn xi_hat(&self) -> Option<&[T; MAX_DIM]> {
        self.xi_hat.as_ref()
    }

    /// The `d - 1` vectors completing `xi_hat` to an orthonormal frame
    /// (empty for a mean-like mode).
    pub fn complement(&self) -> &[[T; MAX_DIM]] {
        if self.xi_hat.is_some() {
            &self.complement[..self.dim - 1]
        } else {
            &[]
        }
    }

    pub fn span(&self, s: SymSubspace) -> &[Mat<T>] {
        let (a, b) = self.ranges[s.index()];
        &self.mats[a..b]
    }

    pub fn dimension(&self, s: SymSubspace) -> usize {
        self.span(s).len()
    }

    /// Largest deviation of the frame `{xi_hat} ∪ complement` from orthonormality.
    pub fn frame_error(&self) -> T {
        let Some(e) = self.xi_hat else {
            return T::zero();
        };
        let mut vecs = vec![e];
        vecs.extend_from_slice(self.complement());
        let mut worst = T::zero();
        for (i, a) in vecs.iter().enumerate() {
            for (j, b) in vecs.iter().enumerate() {
                let dot = (0..self.dim).fold(T::zero(), |acc, k| acc + a[k] * b[k]);
                let want = if i == j { T::one() } else { T::zero() };
                worst = worst.max((dot - want).magnitude());
            }
        }
        worst
    }

    /// Largest deviation of all span matrices from mutual orthonormality.
    pub fn span_error(&self) -> T {
        let total = self.ranges[3].1;
        let mut worst = T::zero();
        for i in 0..total {
            for j in 0..total {
                let want = if i == j { T::one() } else { T::zero() };
                worst = worst.max((mat_inner(&self.mats[i], &self.mats[j], self.dim) - want).magnitude());
            }
        }
        worst
    }

    /// `sum_E <M, E> E` over the span of `s`.
    pub fn project(&self, s: SymSubspace, m: &Mat<Complex<T>>) -> Mat<Complex<T>> {
        match self.dim {
            2 => self.project_fixed::<2>(s, m),
            3 => self.project_fixed::<3>(s, m),
            _ => self.project_fixed::<4>(s, m),
        }
    }

    // Span elements are symmetric: work on the upper triangle.
    fn project_fixed<const D: usize>(&self, s: SymSubspace, m: &Mat<Complex<T>>) -> Mat<Complex<T>> {
        let mut out = [[Complex::default(); MAX_DIM]; MAX_DIM];
        for e in self.span(s) {
            let mut coef = Complex::<T>::default();
            for i in 0..D {
                coef = coef + m[i][i] * e[i][i];
                for j in i + 1..D {
                    coef = coef + (m[i][j] + m[j][i]) * e[i][j];
                }
            }
            for i in 0..D {
                for j in i..D {
                    out[i][j] = out[i][j] + coef * e[i][j];
                }
            }
        }
        for i in 0..D {
            for j in 0..i {
                out[i][j] = out[j][i];
            }
        }
        out
    }

    fn complement_frame(&mut self, e: &[T; MAX_DIM]) {
        let d = self.dim;
        // eta: standard axis least aligned with e (lowest index on ties).
        let mut first = 0;
        for k in 1..d {
            if e[k].magnitude() < e[first].magnitude() {
                first = k;
            }
        }
        let mut chosen: Vec<[T; MAX_DIM]> = vec![*e];
        let push_axis = |k: usize, chosen: &mut Vec<[T; MAX_DIM]>| -> bool {
            let mut v = [T::zero(); MAX_DIM];
            v[k] = T::one();
            for u in chosen.iter() {
                let dot = u[k];
                for a in 0..d {
                    v[a] = v[a] - dot * u[a];
                }
            }
            // re-orthogonalize once for accuracy
            for u in chosen.iter() {
                let dot = (0..d).fold(T::zero(), |acc, a| acc + u[a] * v[a]);
                for a in 0..d {
                    v[a] = v[a] - dot * u[a];
                }
            }
            let n = (0..d).fold(T::zero(), |acc, a| acc + v[a] * v[a]).sqrt();
            if n < T::lit(1e-6) {
                return false;
            }
            for x in v.iter_mut().take(d) {
                *x = *x / n;
            }
            chosen.push(v);
            true
        };
        push_axis(first, &mut chosen);
        if d == 3 {
            let eta = chosen[1];
            let mu = [
                e[1] * eta[2] - e[2] * eta[1],
                e[2] * eta[0] - e[0] * eta[2],
                e[0] * eta[1] - e[1] * eta[0],
                T::zero(),
            ];
            chosen.push(mu);
        } else {
            for k in 0..d {
                if chosen.len() == d {
                    break;
                }
                if k != first {
                    push_axis(k, &mut chosen);
                }
            }
        }
        for (slot, v) in self.complement.iter_mut().zip(chosen.iter().skip(1)) {
            *slot = *v;
        }
    }

    fn fill_nonzero_mode(&mut self, e: &[T; MAX_DIM]) {
        let d = self.dim;
        let r2 = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let eta: Vec<[T; MAX_DIM]> = self.complement[..d - 1].to_vec();
        let mut lists: [Vec<Mat<T>>; 4] = Default::default();
        for h in &eta {
            lists[0].push(scale(&sym_outer(e, h, d), r2));
        }
        lists[1].push(outer(e, e, d));
        let mut id = [[T::zero(); MAX_DIM]; MAX_DIM];
        for h in &eta {
            id = add(&id, &outer(h, h, d), d);
        }
        lists[2].push(scale(&id, T::one() / T::count(d - 1).sqrt()));
        for k in 0..eta.len() {
            for l in k + 1..eta.len() {
                lists[3].push(scale(&sym_outer(&eta[k], &eta[l], d), r2));
            }
        }
        for k in 0..eta.len().saturating_sub(1) {
            let diff = sub(&outer(&eta[k], &eta[k], d), &outer(&eta[k + 1], &eta[k + 1], d), d);
            lists[3].push(scale(&diff, r2));
        }
        self.store(lists);
    }

    fn fill_mean_mode(&mut self) {
        let d = self.dim;
        let r2 = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let axes: Vec<[T; MAX_DIM]> = (0..d)
            .map(|k| {
                let mut v = [T::zero(); MAX_DIM];
                v[k] = T::one();
                v
            })
            .collect();
        let mut lists: [Vec<Mat<T>>; 4] = Default::default();
        let id = scale(&crate::small::identity(d), T::one() / T::count(d).sqrt());
        lists[2].push(id);
        for k in 0..d {
            for l in k + 1..d {
                lists[3].push(scale(&sym_outer(&axes[k], &axes[l], d), r2));
            }
        }
        for k in 0..d - 1 {
            let diff = sub(&outer(&axes[k], &axes[k], d), &outer(&axes[k + 1], &axes[k + 1], d), d);
            lists[3].push(scale(&diff, r2));
        }
        self.store(lists);
    }

    fn store(&mut self, lists: [Vec<Mat<T>>; 4]) {
        let d = self.dim;
        let mut at = 0;
        for (s, list) in lists.into_iter().enumerate() {
            let start = at;
            for m in gram_schmidt(list, d) {
                self.mats[at] = m;
                at += 1;
            }
            self.ranges[s] = (start, at);
        }
    }
}

/// Projection of `m` onto `s`, computed mode by mode from explicit bases.
/// Returned in the representation of the input.
pub fn brute_force_project<T: Real>(m: &Field<T, SymMatrix>, s: SymSubspace) -> Field<T, SymMatrix> {
    let d = m.grid().dim();
    let input = m.to_spectral();
    let mut out = Field::<T, SymMatrix>::zeros(m.grid(), Rep::Spectral);
    for (flat, xi) in m.grid().wavevectors().enumerate() {
        let basis = ModeBasis::new(&xi, d);
        let p = basis.project(s, &unpack_sym(d, input.at(flat)));
        pack_sym(d, &p, out.at_mut(flat));
    }
    if m.rep() == Rep::Physical {
        out.make_physical();
    }
    out
}

fn gram_schmidt<T: Real>(list: Vec<Mat<T>>, d: usize) -> Vec<Mat<T>> {
    let mut out: Vec<Mat<T>> = Vec::with_capacity(list.len());
    for mut m in list {
        for _ in 0..2 {
            for q in &out {
                let c = mat_inner(q, &m, d);
                m = sub(&m, &scale(q, c), d);
            }
        }
        let n = mat_inner(&m, &m, d).sqrt();
        if n > T::lit(1e-8) {
            out.push(scale(&m, T::one() / n));
        }
    }
    out
}

fn mat_inner<T: Real>(a: &Mat<T>, b: &Mat<T>, d: usize) -> T {
    let mut s = T::zero();
    for i in 0..d {
        for j in 0..d {
            s = s + a[i][j] * b[i][j];
        }
    }
    s
}

fn outer<T: Real>(a: &[T; MAX_DIM], b: &[T; MAX_DIM], d: usize) -> Mat<T> {
    let mut m = [[T::zero(); MAX_DIM]; MAX_DIM];
    for i in 0..d {
        for j in 0..d {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

fn sym_outer<T: Real>(a: &[T; MAX_DIM], b: &[T; MAX_DIM], d: usize) -> Mat<T> {
    add(&outer(a, b, d), &outer(b, a, d), d)
}

fn add<T: Real>(a: &Mat<T>, b: &Mat<T>, d: usize) -> Mat<T> {
    let mut m = *a;
    for i in 0..d {
        for j in 0..d {
            m[i][j] = m[i][j] + b[i][j];
        }
    }
    m
}

fn sub<T: Real>(a: &Mat<T>, b: &Mat<T>, d: usize) -> Mat<T> {
    let mut m = *a;
    for i in 0..d {
        for j in 0..d {
            m[i][j] = m[i][j] - b[i][j];
        }
    }
    m
}

fn scale<T: Real>(a: &Mat<T>, s: T) -> Mat<T> {
    let mut m = *a;
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x = *x * s;
        }
    }
    m
}
