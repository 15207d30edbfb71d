//! Seeded random fields with a prescribed spectral envelope.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{Field, Kind, Rep, Vector};
use crate::grid::{unit_and_norm, Grid};
use crate::scalar::Real;

/// Spectral field with Hermitian-symmetric coefficients of amplitude
/// `(1 + |k|)^-decay` times a standard complex normal.
///
/// Modes touching a Nyquist index are left at zero; the mean is a real normal
/// draw. The field is real in physical space and bitwise reproducible for a
/// fixed seed.
pub fn random_field<T: Real, K: Kind>(grid: &Grid<T>, decay: f64, seed: u64) -> Result<Field<T, K>> {
    if !(decay >= 0.0) || !decay.is_finite() {
        return Err(Error::Config(format!("spectrum decay must be >= 0, got {decay}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let nc = K::components(d);
    let mut out = Field::<T, K>::zeros(grid, Rep::Spectral);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for flat in 0..grid.len() {
        let idx = grid.unravel(flat);
        if idx[..d].iter().any(|&i| grid.is_nyquist(i)) {
            continue;
        }
        let partner = grid.conjugate_index(flat);
        if partner < flat {
            continue;
        }
        let k2: f64 = idx[..d].iter().map(|&i| (grid.mode_number(i) as f64).powi(2)).sum();
        let amp = (1.0 + k2.sqrt()).powf(-decay);
        for c in 0..nc {
            let z = if partner == flat {
                let re: f64 = StandardNormal.sample(&mut rng);
                Complex::new(T::lit(amp * re), T::zero())
            } else {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex::new(T::lit(amp * half * re), T::lit(amp * half * im))
            };
            out.data_mut()[flat * nc + c] = z;
            out.data_mut()[partner * nc + c] = z.conj();
        }
    }
    Ok(out)
}

/// Mean-zero, divergence-free spectral vector field.
pub fn random_divfree<T: Real>(grid: &Grid<T>, decay: f64, seed: u64) -> Result<Field<T, Vector>> {
    let mut u = random_field::<T, Vector>(grid, decay, seed)?;
    let d = grid.dim();
    u.map_modes(|xi, v| match unit_and_norm(xi, d) {
        None => v.iter_mut().for_each(|z| *z = Complex::default()),
        Some((e, _)) => {
            let dot = (0..d).fold(Complex::default(), |acc, a| acc + v[a] * e[a]);
            for a in 0..d {
                v[a] = v[a] - dot * e[a];
            }
        }
    })?;
    Ok(u)
}
