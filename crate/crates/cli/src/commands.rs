use crate::output::{Column, Table};
use crate::{
    AsymArgs, AsymKind, FactorArgs, FactorChoice, Failure, MethodChoice, Resolved, ValidateArgs,
    WaveArgs, EXIT_VALIDATION,
};
use clap::ValueEnum;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde_json::{json, Value};
use twobody_core::validation::{self, ValidationOptions};
use twobody_core::wavefunction::{self, default_tol, EvalOptions, WaveSample};
use twobody_core::wiener_hopf::{self, j_direct, splus_at_k};
use twobody_core::{FactorMethod, Method, ReducedParams};

/// Largest relative deviation accepted by `factor --check-oracle`.
pub const ORACLE_TOL: f64 = 1e-6;

/// Fraction of failed samples above which a grid command exits with code 3.
pub const MAX_FAIL_FRACTION: f64 = 0.1;

pub fn metadata(res: &Resolved, command: &str, extra: Value) -> Value {
    let mut m = json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "params": res.params,
        "tol": res.tol,
    });
    if let Some(p) = res.physical {
        m["physical"] = json!(p);
    }
    if let (Value::Object(m), Value::Object(x)) = (&mut m, extra) {
        m.extend(x);
    }
    m
}

pub fn factor(res: &Resolved, args: &FactorArgs) -> Result<(), Failure> {
    let rp = &res.params;
    if args.at_k {
        let s = splus_at_k(rp);
        println!(
            "S+(K) = {:.16e} {:+.16e}i  |S+(K)| = {:.16e}",
            s.re,
            s.im,
            s.norm()
        );
        if args.k_grid.is_none() {
            return Ok(());
        }
    }
    let Some(grid) = args.k_grid else {
        return Err(Failure::usage("factor needs --k-grid or --at-K"));
    };
    let tol = res.tol.unwrap_or(1e-10);
    let method = match args.method {
        FactorChoice::Closed => FactorMethod::ClosedForm,
        FactorChoice::JIntegral => FactorMethod::JIntegral,
    };
    let ks = grid.points();
    let vals = ks
        .par_iter()
        .map(|&k| wiener_hopf::factor(k, rp, method, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(metadata(
        res,
        "factor",
        json!({"method": format!("{method:?}")}),
    ));
    t.push("re_k", Column::Num(vals.iter().map(|v| v.k.re).collect()));
    t.push("im_k", Column::Num(vals.iter().map(|v| v.k.im).collect()));
    t.push(
        "re_splus",
        Column::Num(vals.iter().map(|v| v.splus.re).collect()),
    );
    t.push(
        "im_splus",
        Column::Num(vals.iter().map(|v| v.splus.im).collect()),
    );
    t.push(
        "method",
        Column::Text(vals.iter().map(|v| format!("{:?}", v.method)).collect()),
    );
    t.push(
        "err_est",
        Column::Num(vals.iter().map(|v| v.err_est).collect()),
    );
    t.write(res.format, res.out.as_deref())?;
    if args.check_oracle {
        let devs = ks
            .par_iter()
            .zip(&vals)
            .map(|(&k, v)| {
                j_direct(k, rp, 1e-12).map(|j| (v.splus - (-j.value).exp()).norm() / v.splus.norm())
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let worst = devs.iter().cloned().fold(0.0, f64::max);
        let verdict = if worst <= ORACLE_TOL { "<=" } else { ">" };
        eprintln!(
            "oracle: {} points, max rel dev = {:.3e} {verdict} {ORACLE_TOL:e}",
            devs.len(),
            worst
        );
        if worst > ORACLE_TOL {
            return Err(Failure {
                code: EXIT_VALIDATION,
                message: "oracle check failed".into(),
            });
        }
    }
    Ok(())
}

pub fn method_from(
    res: &Resolved,
    flag: Option<MethodChoice>,
    default: MethodChoice,
) -> Result<MethodChoice, Failure> {
    if let Some(m) = flag {
        return Ok(m);
    }
    match res.config_str("method") {
        Some(s) => MethodChoice::from_str(s, true)
            .map_err(|_| Failure::usage(format!("config key 'method': unknown '{s}'"))),
        None => Ok(default),
    }
}

/// Evaluates a grid R-major; failed samples become NaN rows with
/// `converged = false`.
pub fn wave_samples(
    rp: &ReducedParams,
    rs: &[f64],
    ys: &[f64],
    opts: &EvalOptions,
    fixed_tol: Option<f64>,
) -> Vec<WaveSample> {
    let pts: Vec<(f64, f64)> = rs
        .iter()
        .flat_map(|&r| ys.iter().map(move |&y| (r, y)))
        .collect();
    pts.par_iter()
        .map(|&(r, y)| {
            let o = EvalOptions {
                tol: fixed_tol.unwrap_or_else(|| default_tol(r, y)),
                ..*opts
            };
            wavefunction::evaluate(r, y, rp, &o).unwrap_or(WaveSample {
                r,
                y,
                psi: C::new(f64::NAN, f64::NAN),
                err_est: f64::NAN,
                method: opts.method,
                converged: false,
                neglected: f64::NAN,
            })
        })
        .collect()
}

pub fn wave_table(meta: Value, samples: &[WaveSample]) -> Table {
    let mut t = Table::new(meta);
    t.push("R", Column::Num(samples.iter().map(|s| s.r).collect()));
    t.push("y", Column::Num(samples.iter().map(|s| s.y).collect()));
    t.push(
        "re_psi",
        Column::Num(samples.iter().map(|s| s.psi.re).collect()),
    );
    t.push(
        "im_psi",
        Column::Num(samples.iter().map(|s| s.psi.im).collect()),
    );
    t.push(
        "abs2",
        Column::Num(samples.iter().map(|s| s.psi.norm_sqr()).collect()),
    );
    t.push(
        "err_est",
        Column::Num(samples.iter().map(|s| s.err_est).collect()),
    );
    t.push(
        "method",
        Column::Text(
            samples
                .iter()
                .map(|s| s.method.name().to_string())
                .collect(),
        ),
    );
    t.push(
        "converged",
        Column::Bool(samples.iter().map(|s| s.converged).collect()),
    );
    t
}

pub fn check_failures(what: &str, samples: &[WaveSample]) -> Result<(), Failure> {
    let bad = samples.iter().filter(|s| !s.converged).count();
    if bad > 0 {
        eprintln!(
            "{what}: {bad} of {} samples did not converge",
            samples.len()
        );
    }
    if bad as f64 > MAX_FAIL_FRACTION * samples.len() as f64 {
        return Err(Failure::numerical(format!(
            "{what}: too many failed samples ({bad})"
        )));
    }
    Ok(())
}

pub fn wavefunction(res: &Resolved, args: &WaveArgs) -> Result<(), Failure> {
    let rs = args.r.values();
    if rs.contains(&0.0) {
        return Err(Failure::usage("the R grid must not contain R = 0"));
    }
    let method = method_from(res, args.method, MethodChoice::Full)?.method();
    let eps = match args.eps {
        Some(e) => e,
        None => res
            .config_str("eps")
            .map(|s| s.parse().map_err(|_| Failure::usage("config key 'eps'")))
            .transpose()?
            .unwrap_or(1e-3),
    };
    if eps.is_nan() || eps <= 0.0 {
        return Err(Failure::usage("--eps must be positive"));
    }
    let opts = EvalOptions {
        method,
        tol: 1e-8,
        eps,
        wrong_branch: args.wrong_branch,
    };
    let samples = wave_samples(&res.params, &rs, &args.y.values(), &opts, res.tol);
    let mut extra = json!({"method": method.name(), "R_count": rs.len(), "y_count": args.y.count});
    if method == Method::UnifiedA7 {
        extra["eps"] = json!(wavefunction::unified_eps_set(eps));
    }
    let t = wave_table(metadata(res, "wavefunction", extra), &samples);
    t.write(res.format, res.out.as_deref())?;
    check_failures("wavefunction", &samples)
}

pub fn validate(res: &Resolved, args: &ValidateArgs) -> Result<(), Failure> {
    if let Some(m) = &args.only {
        if !validation::MODULES.contains(&m.as_str()) {
            return Err(Failure::usage(format!(
                "unknown module '{m}'; expected one of {:?}",
                validation::MODULES
            )));
        }
    }
    let _ = res;
    let checks = validation::run(&ValidationOptions {
        only: args.only.clone(),
        inject_wrong_branch: args.inject_wrong_branch,
    });
    for c in &checks {
        println!(
            "{} {:<13} {:<48} residual={:.3e} threshold={:.1e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.module,
            c.name,
            c.residual,
            c.threshold
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", checks.len(), failed);
    if failed > 0 {
        return Err(Failure {
            code: EXIT_VALIDATION,
            message: format!("{failed} checks failed"),
        });
    }
    Ok(())
}

pub fn asymptotics(res: &Resolved, args: &AsymArgs) -> Result<(), Failure> {
    let rp = res.params;
    let rs = args.r.values();
    let ys = args.y.values();
    let pts: Vec<(f64, f64)> = rs
        .iter()
        .flat_map(|&r| ys.iter().map(move |&y| (r, y)))
        .collect();
    let tol = res.tol;
    let rows = pts
        .par_iter()
        .map(|&(r, y)| -> Result<(C, Option<C>), Failure> {
            let t = tol.unwrap_or_else(|| default_tol(r, y));
            match args.kind {
                AsymKind::FarField => {
                    let v = wavefunction::far_field(r, y, &rp)?.psi;
                    let ex = if args.compare {
                        Some(wavefunction::psi_free(r, y, &rp, t, true)?.psi)
                    } else {
                        None
                    };
                    Ok((v, ex))
                }
                AsymKind::Steepest => {
                    let v = wavefunction::steepest_descent(r, y, &rp)?;
                    let ex = if args.compare {
                        Some(wavefunction::phi_integral(r, y, &rp, t)?.value)
                    } else {
                        None
                    };
                    Ok((v, ex))
                }
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let quantity = match args.kind {
        AsymKind::FarField => "psi",
        AsymKind::Steepest => "phi",
    };
    let mut t = Table::new(metadata(
        res,
        "asymptotics",
        json!({"kind": format!("{:?}", args.kind), "quantity": quantity}),
    ));
    t.push("R", Column::Num(pts.iter().map(|p| p.0).collect()));
    t.push("y", Column::Num(pts.iter().map(|p| p.1).collect()));
    t.push(
        "re_asym",
        Column::Num(rows.iter().map(|r| r.0.re).collect()),
    );
    t.push(
        "im_asym",
        Column::Num(rows.iter().map(|r| r.0.im).collect()),
    );
    t.push(
        "abs_asym",
        Column::Num(rows.iter().map(|r| r.0.norm()).collect()),
    );
    if args.compare {
        let ex: Vec<C> = rows.iter().map(|r| r.1.unwrap()).collect();
        t.push("re_exact", Column::Num(ex.iter().map(|v| v.re).collect()));
        t.push("im_exact", Column::Num(ex.iter().map(|v| v.im).collect()));
        t.push(
            "rel_dev",
            Column::Num(
                rows.iter()
                    .map(|r| (r.0 - r.1.unwrap()).norm() / r.1.unwrap().norm())
                    .collect(),
            ),
        );
    }
    t.write(res.format, res.out.as_deref())?;
    Ok(())
}
