use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use log::{info, warn};
use serde_json::{json, Value};
use strain_decomp::decomp::{decompose_full, decompose_sym, DecompositionResult, SymSubspace};
use strain_decomp::extremal::{
    assemble_maxmid, diag_component_bound_check, diag_near_maximizer, estimate_supremum, maxmid_value, near_maximizer,
    AscentConfig, DirectionConstraint, NearMaxKind, StepRule,
};
use strain_decomp::io::{read_any, write_field_with, AnyField, FieldHeader};
use strain_decomp::ns::{
    evolve_both, evolve_potential, evolve_velocity, potential_from_velocity, taylor_green, velocity_from_potential,
    EnergyLedger, NsConfig,
};
use strain_decomp::random::random_divfree;
use strain_decomp::{Error, Field, Grid, Kind, SymMatrix, Vector};

use crate::args::{
    Cli, Command, ConstraintArg, DecomposeArgs, EstimateArgs, EvolveArgs, Form, NearMaxArgs, NearMaxFamily,
};
use crate::verify;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance shared by every artifact of one run.
struct Ctx {
    config: Value,
    start: Instant,
    tol_scale: f64,
}

impl Ctx {
    fn provenance(&self) -> Value {
        json!({ "config": self.config, "version": VERSION })
    }

    /// Writes `body` with `config`, `version` and `wall_time` (seconds) added.
    fn write_json(&self, path: &Path, body: Value) -> Result<()> {
        let mut obj = match body {
            Value::Object(m) => m,
            other => {
                let mut m = serde_json::Map::new();
                m.insert("result".into(), other);
                m
            }
        };
        obj.insert("config".into(), self.config.clone());
        obj.insert("version".into(), VERSION.into());
        obj.insert("wall_time".into(), self.start.elapsed().as_secs_f64().into());
        let text = serde_json::to_string_pretty(&Value::Object(obj))?;
        fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        info!("wrote {}", path.display());
        Ok(())
    }

    fn write_field<K: Kind>(&self, f: &Field<f64, K>, path: &Path, seed: Option<u64>) -> Result<()> {
        let header = FieldHeader::for_field(f).with_seed(seed).with_provenance(self.provenance());
        write_field_with(f, &header, path).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    Error::Config(msg.into()).into()
}

/// Runs one command; `Ok(false)` means a verification failed.
pub fn run(cli: &Cli) -> Result<bool> {
    if cli.threads == 0 {
        return Err(config_error("--threads must be at least 1"));
    }
    if cli.threads > 1 {
        warn!("--threads {} requested; computations run on one thread", cli.threads);
    }
    let ctx = Ctx {
        config: serde_json::to_value(cli)?,
        start: Instant::now(),
        tol_scale: cli.tolerance_profile.scale(),
    };
    match &cli.command {
        Command::Decompose(a) => decompose(&ctx, a),
        Command::Verify(a) => run_verify(&ctx, a),
        Command::EstimateSup(a) => estimate(&ctx, a),
        Command::NearMax(a) => near_max(&ctx, a),
        Command::Evolve(a) => evolve(&ctx, a),
    }
}

fn sym_checks(ctx: &Ctx, r: &DecompositionResult<f64>) -> (Value, bool) {
    let checks = [
        ("reconstruction", r.reconstruction_error, 1e-11),
        ("orthogonality", r.max_cross_term(), 1e-10),
        ("pythagoras", r.pythagoras_defect(), 1e-10),
    ];
    let mut pass = true;
    let list: Vec<Value> = checks
        .iter()
        .map(|&(name, residual, tol)| {
            let tol = tol * ctx.tol_scale;
            let ok = residual <= tol;
            pass &= ok;
            json!({ "identity_name": name, "residual": residual, "tolerance": tol, "pass": ok })
        })
        .collect();
    (Value::Array(list), pass)
}

fn write_sym_parts(ctx: &Ctx, r: &DecompositionResult<f64>, rep: strain_decomp::Rep, dir: &Path) -> Result<()> {
    for s in SymSubspace::ALL {
        let part = r.part(s).in_rep(rep);
        ctx.write_field(&part, &dir.join(format!("{}.field", s.name())), None)?;
    }
    Ok(())
}

fn decompose(ctx: &Ctx, a: &DecomposeArgs) -> Result<bool> {
    let (field, header) = read_any::<f64>(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    out_dir(&a.out)?;
    let (diag, pass) = match field {
        AnyField::SymMatrix(m) => {
            let r = decompose_sym(&m);
            write_sym_parts(ctx, &r, m.rep(), &a.out)?;
            let (checks, pass) = sym_checks(ctx, &r);
            (json!({ "input": header, "symmetric": r.diagnostics(), "checks": checks, "pass": pass }), pass)
        }
        AnyField::Matrix(m) => {
            let full = decompose_full(&m);
            write_sym_parts(ctx, &full.sym, m.rep(), &a.out)?;
            ctx.write_field(&full.asym.vort.in_rep(m.rep()), &a.out.join("vort.field"), None)?;
            ctx.write_field(&full.asym.divfree.in_rep(m.rep()), &a.out.join("asym_divfree.field"), None)?;
            let (checks, pass) = sym_checks(ctx, &full.sym);
            let asym = json!({
                "vort_norm": full.asym.vort.norm(),
                "divfree_norm": full.asym.divfree.norm(),
                "cross_term": full.asym.vort.inner(&full.asym.divfree)?,
            });
            (
                json!({ "input": header, "symmetric": full.sym.diagnostics(), "antisymmetric": asym, "checks": checks, "pass": pass }),
                pass,
            )
        }
        other => {
            return Err(Error::KindMismatch { expected: "symmatrix or matrix".into(), found: other.kind().into() }.into())
        }
    };
    ctx.write_json(&a.out.join("diagnostics.json"), diag)?;
    Ok(pass)
}

fn run_verify(ctx: &Ctx, a: &crate::args::VerifyArgs) -> Result<bool> {
    if a.samples == 0 {
        return Err(config_error("--samples must be at least 1"));
    }
    let entries = verify::run(a, ctx.tol_scale)?;
    let pass = entries.iter().all(|e| e.pass);
    for e in entries.iter().filter(|e| !e.pass) {
        warn!("{} residual {:.3e} exceeds {:.1e}", e.identity_name, e.residual, e.tolerance);
    }
    let body = json!({ "identities": entries, "pass": pass });
    let mut obj = body.as_object().cloned().unwrap_or_default();
    obj.insert("config".into(), ctx.config.clone());
    obj.insert("version".into(), VERSION.into());
    obj.insert("wall_time".into(), ctx.start.elapsed().as_secs_f64().into());
    println!("{}", serde_json::to_string_pretty(&obj)?);
    if let Some(path) = &a.out {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            out_dir(dir)?;
        }
        ctx.write_json(path, body)?;
    }
    Ok(pass)
}

fn unit_direction(v: &[f64]) -> Result<[f64; 3]> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if v.len() != 3 || !(n > 0.0) || !n.is_finite() {
        return Err(config_error(format!("direction must be a nonzero 3-vector, got {v:?}")));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

fn estimate(ctx: &Ctx, a: &EstimateArgs) -> Result<bool> {
    if a.restarts == 0 || a.max_iters == 0 {
        return Err(config_error("--restarts and --max-iters must be at least 1"));
    }
    if !(a.damping > 0.0 && a.damping <= 1.0) {
        return Err(config_error(format!("--damping must lie in (0, 1], got {}", a.damping)));
    }
    let grid = Grid::<f64>::new(3, a.n, 1.0)?;
    let constraint = match a.constraint {
        ConstraintArg::Free => DirectionConstraint::Free,
        ConstraintArg::Fixed => DirectionConstraint::Fixed(unit_direction(&a.direction)?),
        ConstraintArg::Plane => DirectionConstraint::Plane,
    };
    let cfg = AscentConfig {
        restarts: a.restarts,
        max_iters: a.max_iters,
        step_rule: if a.damping < 1.0 { StepRule::Damped(a.damping) } else { StepRule::Full },
        constraint,
        seed: a.seed,
        warm_start: a.warm_start,
        band_limited: a.band_limited,
        ..AscentConfig::default()
    };
    out_dir(&a.out)?;
    let est = estimate_supremum(&grid, &cfg)?;
    for r in &est.restarts {
        let path = a.out.join(format!("trace_{:03}.csv", r.restart));
        fs::write(&path, r.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    ctx.write_field(&assemble_maxmid(&est.best), &a.out.join("best.field"), Some(a.seed))?;
    info!("estimate {:.6} ({}) over {} restarts", est.value, est.label, est.restarts.len());
    let body = json!({
        "value": est.value,
        "label": est.label,
        "constraint": est.constraint,
        "restarts": est.restarts.len(),
        "best_restart": est.best_restart,
        "monotone": est.is_monotone(),
        "grid": est.grid,
        "plane": est.plane,
        "ascent": cfg,
        "per_restart_traces": est.restarts,
    });
    ctx.write_json(&a.out.join("estimate.json"), body)?;
    Ok(true)
}

fn near_max(ctx: &Ctx, a: &NearMaxArgs) -> Result<bool> {
    let grid = Grid::<f64>::new(3, a.n, 1.0)?;
    let v = unit_direction(&a.direction)?;
    out_dir(&a.out)?;
    let (field, objective, label) = match a.family {
        NearMaxFamily::Diag => {
            let s = diag_near_maximizer(&grid, a.eps, &v, a.seed)?;
            let value = diag_component_bound_check(&s, &v)?;
            (s, value, "diagonal component ratio")
        }
        fam => {
            let kind = match fam {
                NearMaxFamily::Shell => NearMaxKind::Shell { seed: a.seed },
                _ => NearMaxKind::Gaussian { sharpness: a.sharpness },
            };
            let mm = near_maximizer(&grid, a.eps, kind, &v)?;
            let value = maxmid_value(&mm)?;
            ctx.write_field(&mm.lam(), &a.out.join("lambda.field"), Some(a.seed))?;
            (assemble_maxmid(&mm), value, "fixed-direction max-mid value")
        }
    };
    ctx.write_field(&field, &a.out.join("near_max.field"), Some(a.seed))?;
    info!("{label}: {objective:.6}");
    ctx.write_json(&a.out.join("near_max.json"), json!({ "objective": objective, "objective_name": label }))?;
    Ok(true)
}

enum Init {
    Velocity(Field<f64, Vector>),
    Potential(Field<f64, SymMatrix>),
}

fn initial_data(a: &EvolveArgs) -> Result<Init> {
    if let Some(path) = a.init.strip_prefix("file:") {
        let (f, h) = read_any::<f64>(path).with_context(|| format!("reading {path}"))?;
        if h.n != a.n || h.d != a.d {
            info!("using the file grid d = {}, n = {} over the command-line values", h.d, h.n);
        }
        return match f {
            AnyField::Vector(u) => Ok(Init::Velocity(u)),
            AnyField::SymMatrix(m) => Ok(Init::Potential(m)),
            other => {
                Err(Error::KindMismatch { expected: "vector or symmatrix".into(), found: other.kind().into() }.into())
            }
        };
    }
    let grid = Grid::<f64>::new(a.d, a.n, 1.0)?;
    match a.init.as_str() {
        "taylor-green" => Ok(Init::Velocity(taylor_green(&grid)?)),
        "random" => {
            let u = random_divfree::<f64>(&grid, 2.0, a.seed)?;
            let peak = u.to_physical().max_abs();
            Ok(Init::Velocity(u.scale(1.0 / peak)))
        }
        other => Err(config_error(format!("unknown --init {other:?}; use taylor-green, random or file:<path>"))),
    }
}

fn write_ledger(ledger: &EnergyLedger, path: &Path) -> Result<()> {
    fs::write(path, ledger.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn write_states<K: Kind>(ctx: &Ctx, states: &[Field<f64, K>], prefix: &str, dir: &Path) -> Result<()> {
    for (i, s) in states.iter().enumerate() {
        ctx.write_field(s, &dir.join(format!("{prefix}_{i:04}.field")), None)?;
    }
    Ok(())
}

fn ledger_summary(l: &EnergyLedger) -> Value {
    let worst = |v: &[Option<f64>]| v.iter().flatten().cloned().fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.max(x))));
    json!({
        "initial_energy": l.initial,
        "max_energy_defect": l.max_energy_defect(),
        "max_strain_residual": worst(&l.strain_residual),
        "max_equivalence_residual": worst(&l.equivalence_residual),
    })
}

fn evolve(ctx: &Ctx, a: &EvolveArgs) -> Result<bool> {
    let cfg = NsConfig { nu: a.nu, dt: a.dt, t_final: a.t_final, sample_every: a.sample_every };
    let steps = cfg.validate()?;
    let init = initial_data(a)?;
    out_dir(&a.out)?;
    let velocity = |init: &Init| -> Result<Field<f64, Vector>> {
        Ok(match init {
            Init::Velocity(u) => u.clone(),
            Init::Potential(m) => velocity_from_potential(m)?,
        })
    };
    let mut body = json!({ "steps": steps, "form": a.form });
    match a.form {
        Form::Velocity => {
            let tr = evolve_velocity(&velocity(&init)?, &cfg)?;
            write_states(ctx, &tr.states, "u", &a.out)?;
            write_ledger(&tr.ledger, &a.out.join("ledger_velocity.csv"))?;
            body["velocity"] = ledger_summary(&tr.ledger);
        }
        Form::Potential => {
            let m0 = match &init {
                Init::Velocity(u) => potential_from_velocity(u)?,
                Init::Potential(m) => m.clone(),
            };
            let tr = evolve_potential(&m0, &cfg)?;
            write_states(ctx, &tr.states, "m", &a.out)?;
            write_ledger(&tr.ledger, &a.out.join("ledger_potential.csv"))?;
            body["potential"] = ledger_summary(&tr.ledger);
        }
        Form::Both => {
            let (vel, pot, eq) = evolve_both(&velocity(&init)?, &cfg)?;
            write_states(ctx, &vel.states, "u", &a.out)?;
            write_states(ctx, &pot.states, "m", &a.out)?;
            write_ledger(&vel.ledger, &a.out.join("ledger_velocity.csv"))?;
            write_ledger(&pot.ledger, &a.out.join("ledger_potential.csv"))?;
            body["velocity"] = ledger_summary(&vel.ledger);
            body["potential"] = ledger_summary(&pot.ledger);
            body["max_equivalence_residual"] = eq.into();
            info!("velocity/potential equivalence residual {eq:.3e}");
        }
    }
    ctx.write_json(&a.out.join("evolve.json"), body)?;
    Ok(true)
}
