//! Identity suite behind `verify`.

use serde::Serialize;
use strain_decomp::basis::brute_force_project;
use strain_decomp::decomp::{decompose_antisym, decompose_sym, project_st, SymSubspace};
use strain_decomp::extremal::{diag_component_bound_check, fixed_direction_value};
use strain_decomp::identities::{
    check_strain_characterization, det_bound_check, div_commutation_residual, isometry_ratios, projection_norm_via_curl,
    rotate_field, CubicRotation,
};
use strain_decomp::random::{random_divfree, random_field};
use strain_decomp::{AntiSymMatrix, Complex, Field, Grid, Result, Scalar, SymMatrix};

use crate::args::VerifyArgs;

const DECAY: f64 = 1.0;

#[derive(Debug, Serialize)]
pub struct Entry {
    pub identity_name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

struct Suite {
    scale: f64,
    entries: Vec<Entry>,
}

impl Suite {
    /// Records the worst of `residuals`; NaN propagates to a failure.
    fn push(&mut self, name: &str, tolerance: f64, residuals: impl IntoIterator<Item = f64>) {
        let residual = residuals.into_iter().fold(0.0f64, |a, r| if r.is_nan() { f64::NAN } else { a.max(r) });
        let tolerance = tolerance * self.scale;
        self.entries.push(Entry {
            identity_name: name.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        (a - b).abs() / b
    } else {
        (a - b).abs()
    }
}

pub fn run(args: &VerifyArgs, scale: f64) -> Result<Vec<Entry>> {
    let grid = Grid::<f64>::new(args.d, args.n, 1.0)?;
    let d = args.d;
    let seeds: Vec<u64> = (0..args.samples as u64).map(|k| args.seed.wrapping_mul(1000).wrapping_add(k)).collect();
    let mut suite = Suite { scale, entries: Vec::new() };

    let mut recon = Vec::new();
    let mut cross = Vec::new();
    let mut pyth = Vec::new();
    let mut idem = Vec::new();
    let mut oracle = Vec::new();
    let mut strain = Vec::new();
    let mut commute = Vec::new();
    let mut via_curl = Vec::new();
    let mut rotation = Vec::new();
    let mut det = Vec::new();
    let mut diag = Vec::new();
    for &seed in &seeds {
        let m = random_field::<f64, SymMatrix>(&grid, DECAY, seed)?;
        let r = decompose_sym(&m);
        recon.push(r.reconstruction_error);
        cross.push(r.max_cross_term());
        pyth.push(r.pythagoras_defect());
        idem.push(project_st(&r.st).relative_distance(&r.st)?);
        let mut worst = 0.0f64;
        for s in SymSubspace::ALL {
            worst = worst.max(brute_force_project(&m, s).relative_distance(r.part(s))?);
        }
        oracle.push(worst);
        commute.push(div_commutation_residual(&m)?);
        if d == 3 {
            strain.push(check_strain_characterization(&r.st)?.max());
            via_curl.push(rel(projection_norm_via_curl(&m)?, r.st.norm_sq()));
            let mut worst = 0.0f64;
            for q in CubicRotation::all() {
                let lhs = project_st(&rotate_field(&m, &q)?);
                let rhs = rotate_field(&r.st, &q)?;
                worst = worst.max(lhs.relative_distance(&rhs)?);
                worst = worst.max(check_strain_characterization(&rhs)?.max());
            }
            rotation.push(worst);
            det.push(det_bound_check(&r.st)?.max_violation.max(0.0));
            let v = [0.0, 0.6, 0.8];
            diag.push((diag_component_bound_check(&r.st, &v)? - 0.5).max(0.0));
        }
    }
    suite.push("decomposition_completeness", 1e-11, recon);
    suite.push("decomposition_orthogonality", 1e-10, cross);
    suite.push("pythagoras", 1e-10, pyth);
    suite.push("projection_idempotence", 1e-12, idem);
    suite.push("closed_form_vs_frame_oracle", 1e-12, oracle);
    if d == 3 {
        suite.push("strain_characterization", 1e-10, strain);
    }
    suite.push("div_commutation", 1e-10, commute);

    let mut iso_sym = Vec::new();
    let mut iso_curl = Vec::new();
    for &seed in &seeds {
        let u = random_divfree::<f64>(&grid, DECAY, seed)?;
        let r = isometry_ratios(&u)?;
        iso_sym.push((r.sym - 0.5).abs());
        if let Some(c) = r.curl {
            iso_curl.push((c - 0.5).abs());
        }
    }
    suite.push("isometry_symmetric_gradient", 1e-10, iso_sym);
    if d == 3 {
        suite.push("isometry_curl", 1e-10, iso_curl);
        suite.push("projection_norm_via_curl", 1e-10, via_curl);
        suite.push("cubic_rotation_invariance", 1e-10, rotation);
        suite.push("determinant_bound", 1e-12, det);
        suite.push("diagonal_component_bound", 1e-10, diag);

        let mut fixed = Vec::new();
        for &seed in &seeds {
            let lam = random_field::<f64, Scalar>(&grid, DECAY, seed)?;
            fixed.push((fixed_direction_value(&lam, &[0.3, -0.4, 0.866])? - 0.75).max(0.0));
        }
        suite.push("fixed_direction_bound", 1e-10, fixed);
    }

    let mut anti_recon = Vec::new();
    let mut anti_orth = Vec::new();
    for &seed in &seeds {
        let a = random_field::<f64, AntiSymMatrix>(&grid, DECAY, seed)?;
        let s = decompose_antisym(&a);
        let sum: Field<f64, AntiSymMatrix> = s.vort.try_add(&s.divfree)?;
        anti_recon.push(sum.relative_distance(&a)?);
        anti_orth.push(s.vort.inner(&s.divfree)?.abs() / a.norm_sq());
    }
    suite.push("antisymmetric_completeness", 1e-11, anti_recon);
    suite.push("antisymmetric_orthogonality", 1e-10, anti_orth);

    let g2 = Grid::<f64>::new(2, args.n, 1.0)?;
    let mut planar = Vec::new();
    for &seed in &seeds {
        // Constant trace-free matrices are divergence-free on the torus; the
        // degeneracy concerns the nonzero modes.
        let mut m = random_field::<f64, SymMatrix>(&g2, DECAY, seed)?;
        m.at_mut(0).fill(Complex::default());
        planar.push(decompose_sym(&m).trdivfree.norm() / m.norm());
    }
    suite.push("planar_trace_divfree_vanishes", 1e-12, planar);

    Ok(suite.entries)
}
