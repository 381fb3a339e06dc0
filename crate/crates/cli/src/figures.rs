//! Data behind figures 1-4 (a = 1, k0 = 2 unless overridden).

use crate::commands::{check_failures, metadata, method_from, wave_samples};
use crate::output::{Column, Table};
use crate::{Failure, Figure, FigureArgs, MethodChoice, Resolved};
use serde_json::json;
use std::path::{Path, PathBuf};
use twobody_core::wavefunction::{envelope_slope, EvalOptions};
use twobody_core::Method;

/// R and y grids of figures 1 and 2.
pub const FIG12_R: (f64, f64, usize) = (-20.0, -0.5, 40);
pub const FIG12_Y: (f64, f64, usize) = (0.0, 6.0, 61);
/// y grid of figure 3 at R = -10.
pub const FIG3_R: f64 = -10.0;
pub const FIG3_Y: (f64, f64, usize) = (0.0, 60.0, 1201);
/// R grid of figure 4, for y = 0 and y = 0.5.
pub const FIG4_R: (f64, f64, usize) = (0.05, 10.0, 200);

fn linspace((a, b, n): (f64, f64, usize)) -> Vec<f64> {
    crate::grid::Grid {
        start: a,
        stop: b,
        count: n,
    }
    .values()
}

fn path(dir: &Path, name: &str, res: &Resolved) -> PathBuf {
    dir.join(format!("{name}.{}", res.format.extension()))
}

pub fn run(res: &Resolved, args: &FigureArgs) -> Result<(), Failure> {
    let dir = res.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let method = method_from(res, args.method, MethodChoice::Approx31)?.method();
    if matches!(method, Method::Steepest35) {
        return Err(Failure::usage(
            "figures 1-3 lie in R < 0; steepest applies to R > 0",
        ));
    }
    let figs: Vec<Figure> = match args.which {
        Figure::All => vec![Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4],
        f => vec![f],
    };
    let mut first_err = None;
    for f in figs {
        let r = match f {
            Figure::Fig1 | Figure::Fig2 => grid_figure(res, &dir, f, method),
            Figure::Fig3 => fig3(res, &dir, method),
            Figure::Fig4 => fig4(res, &dir),
            Figure::All => unreachable!(),
        };
        if let Err(e) = r {
            eprintln!("twobody: {}", e.message);
            first_err.get_or_insert(e);
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn grid_figure(res: &Resolved, dir: &Path, f: Figure, method: Method) -> Result<(), Failure> {
    let name = if f == Figure::Fig1 { "fig1" } else { "fig2" };
    let rs = linspace(FIG12_R);
    let ys = linspace(FIG12_Y);
    let samples = wave_samples(&res.params, &rs, &ys, &EvalOptions::method(method), res.tol);
    let mut t = Table::new(metadata(res, name, json!({"method": method.name()})));
    t.push("R", Column::Num(samples.iter().map(|s| s.r).collect()));
    t.push("y", Column::Num(samples.iter().map(|s| s.y).collect()));
    if f == Figure::Fig1 {
        t.push(
            "abs2",
            Column::Num(samples.iter().map(|s| s.psi.norm_sqr()).collect()),
        );
    } else {
        t.push(
            "re_psi",
            Column::Num(samples.iter().map(|s| s.psi.re).collect()),
        );
        t.push(
            "im_psi",
            Column::Num(samples.iter().map(|s| s.psi.im).collect()),
        );
    }
    t.push(
        "err_est",
        Column::Num(samples.iter().map(|s| s.err_est).collect()),
    );
    t.push(
        "converged",
        Column::Bool(samples.iter().map(|s| s.converged).collect()),
    );
    t.write(res.format, Some(&path(dir, name, res)))?;
    let bad = samples.iter().filter(|s| !s.converged).count();
    eprintln!("{name}: {} samples, {bad} non-converged", samples.len());
    check_failures(name, &samples)
}

fn fig3(res: &Resolved, dir: &Path, method: Method) -> Result<(), Failure> {
    let ys = linspace(FIG3_Y);
    let samples = wave_samples(
        &res.params,
        &[FIG3_R],
        &ys,
        &EvalOptions::method(method),
        res.tol,
    );
    let abs2: Vec<f64> = samples.iter().map(|s| s.psi.norm_sqr()).collect();
    let mut t = Table::new(metadata(
        res,
        "fig3",
        json!({"method": method.name(), "R": FIG3_R}),
    ));
    t.push("y", Column::Num(ys.clone()));
    t.push("abs2", Column::Num(abs2.clone()));
    t.push(
        "converged",
        Column::Bool(samples.iter().map(|s| s.converged).collect()),
    );
    t.write(res.format, Some(&path(dir, "fig3", res)))?;
    let bad = samples.iter().filter(|s| !s.converged).count();
    match envelope_slope(&ys[1..], &abs2[1..], 2) {
        Ok(fit) => eprintln!(
            "fig3: {} samples, {bad} non-converged, {} maxima, envelope slope {:.3}",
            samples.len(),
            fit.maxima.len(),
            fit.slope
        ),
        Err(e) => eprintln!("fig3: {} samples, {bad} non-converged, {e}", samples.len()),
    }
    check_failures("fig3", &samples)
}

fn fig4(res: &Resolved, dir: &Path) -> Result<(), Failure> {
    let rs = linspace(FIG4_R);
    let opts = EvalOptions::method(Method::RegionalWithVerticalLeg);
    let s0 = wave_samples(&res.params, &rs, &[0.0], &opts, res.tol);
    let s5 = wave_samples(&res.params, &rs, &[0.5], &opts, res.tol);
    let mut t = Table::new(metadata(
        res,
        "fig4",
        json!({"method": Method::RegionalWithVerticalLeg.name(), "y": [0.0, 0.5]}),
    ));
    t.push("R", Column::Num(rs));
    t.push(
        "abs2_y0",
        Column::Num(s0.iter().map(|s| s.psi.norm_sqr()).collect()),
    );
    t.push(
        "abs2_y0.5",
        Column::Num(s5.iter().map(|s| s.psi.norm_sqr()).collect()),
    );
    t.push(
        "converged",
        Column::Bool(
            s0.iter()
                .zip(&s5)
                .map(|(a, b)| a.converged && b.converged)
                .collect(),
        ),
    );
    t.write(res.format, Some(&path(dir, "fig4", res)))?;
    let all: Vec<_> = s0.into_iter().chain(s5).collect();
    let bad = all.iter().filter(|s| !s.converged).count();
    eprintln!("fig4: {} samples, {bad} non-converged", all.len());
    check_failures("fig4", &all)
}
