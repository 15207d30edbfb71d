//! Navier-Stokes in velocity form and in matrix-potential form.
//!
//! Velocity: `∂_t u = νΔu − P_df div(u⊗u)`. Potential `M = 2∇_sym(−Δ)^{-1}u`:
//! `∂_t M = νΔM + P_st(div M ⊗ div M)`, with `u = −div M`. Both are advanced
//! by the same integrating-factor RK4 scheme (exact heat semigroup, explicit
//! stages on the nonlinear term) with 2/3-rule dealiasing of the products.

use rustfft::num_complex::Complex;
use serde::Serialize;

use crate::decomp::{project_df, project_st};
use crate::error::{Error, Result};
use crate::field::{Field, Kind, Rep, Scalar, SymMatrix, Vector};
use crate::grid::Grid;
use crate::identities::require_divfree_mean_zero;
use crate::ops::{self, dealias_in_place, neg_laplacian_symbol, LaplacianPower};
use crate::scalar::Real;

/// Norm above which a run is declared to have blown up.
pub const BLOWUP_NORM: f64 = 1e12;

/// Time-stepping parameters shared by all integrators.
#[derive(Clone, Copy, Debug, Serialize, serde::Deserialize)]
pub struct NsConfig {
    pub nu: f64,
    pub dt: f64,
    /// Final time; must be an integer multiple of `dt`.
    pub t_final: f64,
    /// Record a sample (and repair strain drift) every this many steps.
    pub sample_every: usize,
}

impl Default for NsConfig {
    fn default() -> Self {
        Self { nu: 1.0, dt: 1e-3, t_final: 0.1, sample_every: 10 }
    }
}

impl NsConfig {
    pub fn validate(&self) -> Result<usize> {
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::Config(format!("viscosity must be positive, got {}", self.nu)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::Config(format!("final time must be positive, got {}", self.t_final)));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be at least 1".into()));
        }
        let steps = (self.t_final / self.dt).round();
        if steps < 1.0 || (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::Config(format!(
                "final time {} is not a multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// `2∇_sym(−Δ)^{-1} u` for divergence-free, mean-zero `u` (spectral output).
pub fn potential_from_velocity<T: Real>(u: &Field<T, Vector>) -> Result<Field<T, SymMatrix>> {
    require_divfree_mean_zero(u)?;
    let u = u.to_spectral();
    Ok(ops::sym_gradient(&ops::inverse_laplacian(&u, LaplacianPower::One)?)?.scale(T::lit(2.0)))
}

/// `−div M` (spectral output).
pub fn velocity_from_potential<T: Real>(m: &Field<T, SymMatrix>) -> Result<Field<T, Vector>> {
    Ok(-ops::sym_divergence(&m.to_spectral())?)
}

/// Taylor-Green vortex with unit amplitude (d = 2 or 3), physical samples.
pub fn taylor_green<T: Real>(grid: &Grid<T>) -> Result<Field<T, Vector>> {
    let tau = T::lit(std::f64::consts::TAU) / grid.length();
    match grid.dim() {
        2 => Ok(Field::from_fn(grid, |x, o| {
            let (a, b) = (tau * x[0], tau * x[1]);
            o[0] = a.sin() * b.cos();
            o[1] = -a.cos() * b.sin();
        })),
        3 => Ok(Field::from_fn(grid, |x, o| {
            let (a, b, c) = (tau * x[0], tau * x[1], tau * x[2]);
            o[0] = a.sin() * b.cos() * c.cos();
            o[1] = -a.cos() * b.sin() * c.cos();
        })),
        d => Err(Error::Unsupported(format!("Taylor-Green initial data for d = {d}"))),
    }
}

/// Per-mode heat factors `e^{−νκ dt}` and `e^{−νκ dt/2}`, `κ = 4π²|ξ|²`.
struct Heat<T> {
    kappa: Vec<T>,
    full: Vec<T>,
    half: Vec<T>,
}

impl<T: Real> Heat<T> {
    fn new(grid: &Grid<T>, nu: f64, dt: f64) -> Self {
        let kappa: Vec<T> = grid.wavevectors().map(|xi| neg_laplacian_symbol(&xi, grid.dim())).collect();
        let full = kappa.iter().map(|k| T::lit((-nu * k.as_f64() * dt).exp())).collect();
        let half = kappa.iter().map(|k| T::lit((-nu * k.as_f64() * dt / 2.0).exp())).collect();
        Self { kappa, full, half }
    }
}

fn modes_scaled<T: Real, K: Kind>(f: &Field<T, K>, factors: &[T]) -> Field<T, K> {
    let mut out = f.clone();
    let nc = f.components();
    for (chunk, &s) in out.data_mut().chunks_exact_mut(nc).zip(factors) {
        chunk.iter_mut().for_each(|z| *z = *z * s);
    }
    out
}

fn lin<T: Real, K: Kind>(a: &Field<T, K>, s: T, b: &Field<T, K>) -> Field<T, K> {
    let mut out = a.clone();
    out.axpy(s, b).expect("same grid and representation");
    out
}

/// One Lawson RK4 step. Returns the new state and a third-order midpoint
/// estimate used by the dissipation quadrature.
fn lawson_step<T: Real, K: Kind>(
    u: &Field<T, K>,
    heat: &Heat<T>,
    dt: T,
    nonlinear: &mut impl FnMut(&Field<T, K>) -> Result<Field<T, K>>,
) -> Result<(Field<T, K>, Field<T, K>)> {
    let half = dt / T::lit(2.0);
    let eu = modes_scaled(u, &heat.full);
    let e2u = modes_scaled(u, &heat.half);
    let k1 = nonlinear(u)?;
    let k2 = nonlinear(&modes_scaled(&lin(u, half, &k1), &heat.half))?;
    let k3 = nonlinear(&lin(&e2u, half, &k2))?;
    let k4 = nonlinear(&lin(&eu, dt, &modes_scaled(&k3, &heat.half)))?;
    let e2k1 = modes_scaled(&k1, &heat.half);
    let mut next = eu;
    next.axpy(dt / T::lit(6.0), &modes_scaled(&k1, &heat.full))?;
    next.axpy(dt / T::lit(3.0), &modes_scaled(&k2.try_add(&k3)?, &heat.half))?;
    next.axpy(dt / T::lit(6.0), &k4)?;
    let mut mid = e2u;
    mid.axpy(dt / T::lit(4.0), &e2k1.try_add(&k2)?)?;
    Ok((next, mid))
}

/// `∫_0^1 s^j e^{−zs} ds` for `j = 0, 1, 2`.
fn exp_moments(z: f64) -> [f64; 3] {
    if z < 0.5 {
        let mut out = [0.0; 3];
        let mut term = 1.0;
        for m in 0..25 {
            if m > 0 {
                term *= -z / m as f64;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += term / (m + j + 1) as f64;
            }
        }
        return out;
    }
    let e = (-z).exp();
    let i0 = (1.0 - e) / z;
    let i1 = (i0 - e) / z;
    let i2 = (2.0 * i1 - e) / z;
    [i0, i1, i2]
}

/// `∫_t^{t+dt} Σ_k w(κ_k)|û_k(τ)|² dτ`, treating `e^{2νκτ}|û_k(τ)|²` as a
/// quadratic through the start, midpoint and end of the step and
/// integrating against the exact exponential weight.
fn dissipation_increment<T: Real, K: Kind>(
    heat: &Heat<T>,
    nu: f64,
    dt: f64,
    states: [&Field<T, K>; 3],
    weight: impl Fn(f64) -> f64,
) -> f64 {
    let d = states[0].grid().dim();
    let nc = states[0].components();
    let energy = |f: &Field<T, K>, flat: usize| -> f64 {
        f.at(flat)
            .iter()
            .enumerate()
            .map(|(c, z)| K::weight(d, c) as f64 * z.norm_sqr().as_f64())
            .sum()
    };
    let mut total = 0.0;
    for (flat, kappa) in heat.kappa.iter().enumerate() {
        let kappa = kappa.as_f64();
        let w = weight(kappa);
        if w == 0.0 || nc == 0 {
            continue;
        }
        let z = 2.0 * nu * kappa * dt;
        let [i0, i1, i2] = exp_moments(z);
        let (w0, wh, w1) = (i0 - 3.0 * i1 + 2.0 * i2, 4.0 * i1 - 4.0 * i2, 2.0 * i2 - i1);
        let p0 = energy(states[0], flat);
        let mut acc = w0 * p0;
        if z < 700.0 {
            acc += wh * (z / 2.0).exp() * energy(states[1], flat) + w1 * z.exp() * energy(states[2], flat);
        }
        total += w * acc;
    }
    total * dt
}

fn check_cfl<T: Real>(u_phys: &Field<T, Vector>, dt: f64) -> Result<()> {
    let h = u_phys.grid().spacing().as_f64();
    let d = u_phys.grid().dim();
    let vmax = u_phys
        .data()
        .chunks_exact(d)
        .map(|v| v.iter().map(|z| z.re.as_f64().powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if vmax > 0.0 && dt > 0.5 * h / vmax {
        return Err(Error::Config(format!(
            "dt = {dt:.3e} exceeds the CFL limit 0.5 dx / max|u| = {:.3e}",
            0.5 * h / vmax
        )));
    }
    Ok(())
}

fn advisory_diffusive<T: Real>(grid: &Grid<T>, nu: f64, dt: f64) {
    let h = grid.spacing().as_f64();
    let limit = 0.5 * h * h / nu;
    if dt > limit {
        log::debug!("dt = {dt:.3e} above the explicit diffusive scale {limit:.3e}; heat part is integrated exactly");
    }
}

fn velocity_nonlinear<T: Real>(u: &Field<T, Vector>) -> Result<Field<T, Vector>> {
    let mut w = u.clone();
    dealias_in_place(&mut w);
    w.make_physical();
    let mut uu = ops::self_outer(&w)?;
    uu.make_spectral();
    dealias_in_place(&mut uu);
    Ok(-project_df(&ops::sym_divergence(&uu)?))
}

fn potential_nonlinear<T: Real>(m: &Field<T, SymMatrix>) -> Result<Field<T, SymMatrix>> {
    let mut w = m.clone();
    dealias_in_place(&mut w);
    let mut v = ops::sym_divergence(&w)?;
    v.make_physical();
    let mut vv = ops::self_outer(&v)?;
    vv.make_spectral();
    dealias_in_place(&mut vv);
    Ok(project_st(&vv))
}

/// One velocity step (spectral output). Fails if `dt` violates the CFL cap.
pub fn step_velocity<T: Real>(u: &Field<T, Vector>, nu: f64, dt: f64) -> Result<Field<T, Vector>> {
    require_divfree_mean_zero(u)?;
    check_cfl(&u.to_physical(), dt)?;
    let heat = Heat::new(u.grid(), nu, dt);
    Ok(lawson_step(&u.to_spectral(), &heat, T::lit(dt), &mut |f| velocity_nonlinear(f))?.0)
}

/// One potential step (spectral output). Fails if `dt` violates the CFL cap
/// for `u = −div M`.
pub fn step_potential<T: Real>(m: &Field<T, SymMatrix>, nu: f64, dt: f64) -> Result<Field<T, SymMatrix>> {
    check_cfl(&velocity_from_potential(m)?.to_physical(), dt)?;
    let heat = Heat::new(m.grid(), nu, dt);
    Ok(lawson_step(&m.to_spectral(), &heat, T::lit(dt), &mut |f| potential_nonlinear(f))?.0)
}

/// Energy balance along a trajectory. For the velocity form
/// `kinetic = ‖u‖²` and `dissipation = 2ν∫‖∇u‖²`; for the potential form
/// `kinetic = ‖div M‖²` and `dissipation = ν∫‖−ΔM‖²`. In both cases
/// `kinetic + dissipation = initial` for exact solutions.
#[derive(Clone, Debug, Default, Serialize)]
pub struct EnergyLedger {
    pub initial: f64,
    pub times: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub dissipation_integral: Vec<f64>,
    /// `‖M − P_st M‖/‖M‖` before repair (potential form only).
    pub strain_residual: Vec<Option<f64>>,
    /// Size `‖M − P_st M‖` of the drift repair applied at each sample.
    pub drift_correction: Vec<Option<f64>>,
    /// `‖u + div M‖/‖u⁰‖` when both forms were run side by side.
    pub equivalence_residual: Vec<Option<f64>>,
}

impl EnergyLedger {
    /// `(kinetic + dissipation − initial) / initial` (absolute when `initial = 0`).
    pub fn energy_defect(&self, i: usize) -> f64 {
        let raw = self.kinetic[i] + self.dissipation_integral[i] - self.initial;
        if self.initial > 0.0 {
            raw / self.initial
        } else {
            raw
        }
    }

    pub fn max_energy_defect(&self) -> f64 {
        (0..self.times.len()).map(|i| self.energy_defect(i).abs()).fold(0.0, f64::max)
    }

    /// Header `t,kinetic,dissipation_integral,energy_defect,strain_residual,equivalence_residual`;
    /// missing values are empty cells.
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.17e}")).unwrap_or_default();
        let mut s = String::from("t,kinetic,dissipation_integral,energy_defect,strain_residual,equivalence_residual\n");
        for i in 0..self.times.len() {
            s.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{},{}\n",
                self.times[i],
                self.kinetic[i],
                self.dissipation_integral[i],
                self.energy_defect(i),
                opt(self.strain_residual[i]),
                opt(self.equivalence_residual[i]),
            ));
        }
        s
    }

    fn push(&mut self, t: f64, kinetic: f64, diss: f64, strain: Option<(f64, f64)>) {
        self.times.push(t);
        self.kinetic.push(kinetic);
        self.dissipation_integral.push(diss);
        self.strain_residual.push(strain.map(|s| s.0));
        self.drift_correction.push(strain.map(|s| s.1));
        self.equivalence_residual.push(None);
    }
}

/// Sampled states (spectral) with their energy ledger.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real, K: Kind> {
    pub times: Vec<f64>,
    pub states: Vec<Field<T, K>>,
    pub ledger: EnergyLedger,
}

/// Common driver: `kinetic(state)`, `weight(κ)` of the dissipation density,
/// and an optional sample hook that may repair the state.
struct Driver<'a, T: Real, K: Kind> {
    cfg: &'a NsConfig,
    kinetic: fn(&Field<T, K>) -> Result<f64>,
    weight: &'a dyn Fn(f64) -> f64,
    velocity: fn(&Field<T, K>) -> Result<Field<T, Vector>>,
    nonlinear: fn(&Field<T, K>) -> Result<Field<T, K>>,
    repair: Option<fn(&mut Field<T, K>) -> (f64, f64)>,
}

impl<T: Real, K: Kind> Driver<'_, T, K> {
    fn run(&self, init: &Field<T, K>) -> Result<Trajectory<T, K>> {
        let steps = self.cfg.validate()?;
        let (nu, dt) = (self.cfg.nu, self.cfg.dt);
        let grid = init.grid().clone();
        let heat = Heat::new(&grid, nu, dt);
        advisory_diffusive(&grid, nu, dt);
        let mut state = init.to_spectral();
        let mut ledger = EnergyLedger { initial: (self.kinetic)(&state)?, ..Default::default() };
        let mut traj = Trajectory { times: Vec::new(), states: Vec::new(), ledger: EnergyLedger::default() };
        let mut diss = 0.0;
        let mut last_valid = 0.0;

        let record = |state: &mut Field<T, K>, t: f64, diss: f64, traj: &mut Trajectory<T, K>, ledger: &mut EnergyLedger| -> Result<()> {
            let strain = self.repair.map(|r| r(state));
            ledger.push(t, (self.kinetic)(state)?, diss, strain);
            traj.times.push(t);
            traj.states.push(state.clone());
            Ok(())
        };
        record(&mut state, 0.0, diss, &mut traj, &mut ledger)?;
        for step in 1..=steps {
            let t = step as f64 * dt;
            check_cfl(&(self.velocity)(&state)?.to_physical(), dt)?;
            let (next, mid) = lawson_step(&state, &heat, T::lit(dt), &mut |f| (self.nonlinear)(f))?;
            let norm = next.norm().as_f64();
            if !norm.is_finite() || norm > BLOWUP_NORM {
                return Err(Error::Blowup { time: t, last_valid_time: last_valid });
            }
            diss += dissipation_increment(&heat, nu, dt, [&state, &mid, &next], self.weight);
            state = next;
            last_valid = t;
            if step % self.cfg.sample_every == 0 || step == steps {
                record(&mut state, t, diss, &mut traj, &mut ledger)?;
            }
        }
        traj.ledger = ledger;
        Ok(traj)
    }
}

fn velocity_kinetic<T: Real>(u: &Field<T, Vector>) -> Result<f64> {
    Ok(u.norm_sq().as_f64())
}

fn potential_kinetic<T: Real>(m: &Field<T, SymMatrix>) -> Result<f64> {
    Ok(ops::sym_divergence(&m.to_spectral())?.norm_sq().as_f64())
}

fn identity_velocity<T: Real>(u: &Field<T, Vector>) -> Result<Field<T, Vector>> {
    Ok(u.clone())
}

fn repair_strain<T: Real>(m: &mut Field<T, SymMatrix>) -> (f64, f64) {
    let p = project_st(m);
    let base = m.norm().as_f64();
    let drift = m.try_sub(&p).map(|d| d.norm().as_f64()).unwrap_or(f64::NAN);
    *m = p;
    let rel = if base > 0.0 { drift / base } else { 0.0 };
    (rel, drift)
}

/// Integrates the velocity form from divergence-free, mean-zero `u0`.
pub fn evolve_velocity<T: Real>(u0: &Field<T, Vector>, cfg: &NsConfig) -> Result<Trajectory<T, Vector>> {
    require_divfree_mean_zero(u0)?;
    let nu = cfg.nu;
    let weight = move |k: f64| 2.0 * nu * k;
    Driver {
        cfg,
        kinetic: velocity_kinetic,
        weight: &weight,
        velocity: identity_velocity,
        nonlinear: velocity_nonlinear,
        repair: None,
    }
    .run(u0)
}

/// Integrates the potential form. `m0` must lie in the strain space; each
/// sample is re-projected onto it and the correction recorded.
pub fn evolve_potential<T: Real>(m0: &Field<T, SymMatrix>, cfg: &NsConfig) -> Result<Trajectory<T, SymMatrix>> {
    let m0s = m0.to_spectral();
    let base = m0s.norm();
    if base > T::zero() {
        let r = m0s.try_sub(&project_st(&m0s))?.norm() / base;
        if r > crate::identities::precondition_tolerance::<T>() {
            return Err(Error::Precondition {
                what: "initial potential is not in the strain space".into(),
                residual: r.as_f64(),
            });
        }
        let lap = ops::laplacian(&m0s)?.norm().as_f64();
        if lap > 0.0 {
            log::info!("lifespan scale 1/|-Lap M0|^4 = {:.3e}", lap.powi(-4));
        }
    }
    let nu = cfg.nu;
    let weight = move |k: f64| nu * k * k;
    Driver {
        cfg,
        kinetic: potential_kinetic,
        weight: &weight,
        velocity: velocity_from_potential,
        nonlinear: potential_nonlinear,
        repair: Some(repair_strain),
    }
    .run(m0)
}

/// Both forms from the same data: velocity trajectory, potential trajectory
/// with `equivalence_residual` filled in, and the maximum of that residual.
pub fn evolve_both<T: Real>(
    u0: &Field<T, Vector>,
    cfg: &NsConfig,
) -> Result<(Trajectory<T, Vector>, Trajectory<T, SymMatrix>, f64)> {
    let vel = evolve_velocity(u0, cfg)?;
    let mut pot = evolve_potential(&potential_from_velocity(u0)?, cfg)?;
    let base = u0.norm();
    let mut worst = 0.0f64;
    for (i, (u, m)) in vel.states.iter().zip(&pot.states).enumerate() {
        let sum = u.try_add(&ops::sym_divergence(m)?)?.norm();
        let r = if base > T::zero() { (sum / base).as_f64() } else { sum.as_f64() };
        pot.ledger.equivalence_residual[i] = Some(r);
        worst = worst.max(r);
    }
    Ok((vel, pot, worst))
}

/// `max_t ‖u(t) + div M(t)‖ / ‖u⁰‖` over the sampled times.
pub fn equivalence_residual<T: Real>(u0: &Field<T, Vector>, cfg: &NsConfig) -> Result<f64> {
    Ok(evolve_both(u0, cfg)?.2)
}

/// Max-norm error of the integrator on `∂_t f = ν(Δf + |∇f|²)` against
/// `f(t) = log(e^{νtΔ} e^{f⁰})`. The product is not dealiased; smooth data
/// keeps aliasing below the time-stepping error.
pub fn cole_hopf_check<T: Real>(f0: &Field<T, Scalar>, nu: f64, t_final: f64, dt: f64) -> Result<f64> {
    let cfg = NsConfig { nu, dt, t_final, sample_every: usize::MAX };
    let steps = cfg.validate()?;
    let f0p = f0.to_physical();
    if f0p.max_imag_relative() > crate::identities::precondition_tolerance::<T>() {
        return Err(Error::Precondition {
            what: "Cole-Hopf data must be real".into(),
            residual: f0p.max_imag_relative().as_f64(),
        });
    }
    let heat = Heat::new(f0.grid(), nu, dt);
    let nl = |f: &Field<T, Scalar>| -> Result<Field<T, Scalar>> {
        let mut g = ops::gradient(f)?;
        g.make_physical();
        let d = f.grid().dim();
        let mut out = Field::<T, Scalar>::zeros(f.grid(), Rep::Physical);
        for (o, v) in out.data_mut().iter_mut().zip(g.data().chunks_exact(d)) {
            let s: T = v.iter().map(|z| z.re * z.re).sum();
            *o = Complex::new(T::lit(nu) * s, T::zero());
        }
        Ok(out.to_spectral())
    };
    let mut f = f0p.to_spectral();
    for step in 1..=steps {
        f = lawson_step(&f, &heat, T::lit(dt), &mut |x| nl(x))?.0;
        if !f.norm().as_f64().is_finite() {
            return Err(Error::Blowup { time: step as f64 * dt, last_valid_time: (step - 1) as f64 * dt });
        }
    }
    let mut g = f0p.clone();
    g.data_mut().iter_mut().for_each(|z| *z = Complex::new(z.re.exp(), T::zero()));
    let exact_heat = Heat::new(f0.grid(), nu, t_final);
    let mut g = modes_scaled(&g.to_spectral(), &exact_heat.full);
    g.make_physical();
    let num = f.to_physical();
    let err = num
        .data()
        .iter()
        .zip(g.data())
        .map(|(a, b)| (a.re - b.re.ln()).as_f64().abs())
        .fold(0.0, f64::max);
    Ok(err)
}
