use std::ops::Range;
use std::path::{Path, PathBuf};

use serde_json::json;
use varosc::analysis::dominant_frequency;
use varosc::evolve::{make_evolution, project_by_quadrature, project_centered_gaussian, project_shifted_gaussian};
use varosc::pms::{pms_optimize, trace, PmsOptions};
use varosc::spectrum::{convergence_study, solve_centered, solve_spectrum};
use varosc::{BasisConfig, Gaussian, Pms, SolveOptions};

use crate::config::{Evolution, PacketKind, Run, Scan, Solver};
use crate::output::{fmt_f64, write_json, Table};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(varosc::Error),
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e}"),
            Failure::Io(e) => write!(f, "i/o error: {e:#}"),
        }
    }
}

impl From<varosc::Error> for Failure {
    fn from(e: varosc::Error) -> Self {
        Failure::Numerical(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<Vec<PathBuf>, Failure>;

fn solve_options(s: &Solver) -> SolveOptions<f64> {
    SolveOptions::default().with_pms(PmsOptions::default().with_sigma(s.optimize_sigma).with_span(s.span))
}

fn pms_json(p: &Pms, dim: usize, center: usize) -> serde_json::Value {
    json!({
        "dim": dim,
        "center": center,
        "omega": p.omega,
        "sigma": p.sigma,
        "trace": p.trace_value,
        "residual": p.stationarity_residual,
    })
}

fn save_pms(dir: &Path, p: &Pms, dim: usize, center: usize) -> Outcome {
    let path = dir.join("pms.json");
    write_json(&path, &pms_json(p, dim, center))?;
    Ok(vec![path])
}

pub fn spectrum(run: &Run, levels: Option<Range<usize>>) -> Outcome {
    let opts = solve_options(&run.solver);
    let report = match run.solver.center_level {
        Some(target) => solve_centered(&run.potential, target, run.solver.dim, &opts)?,
        None => solve_spectrum(&run.potential, run.solver.dim, &opts)?,
    };
    let block = report.levels();
    let wanted = levels.or_else(|| run.solver.levels.clone()).unwrap_or(block.clone());
    let mut table = Table::new(&["n", "energy"]);
    for n in wanted.clone() {
        if let Some(e) = report.energy(n) {
            table.push(vec![n.into(), e.into()]);
        }
    }
    if table.rows.len() < wanted.len() {
        eprintln!(
            "warning: levels {}..{} only partly inside the block {}..{}",
            wanted.start, wanted.end, block.start, block.end
        );
    }
    let mut written = table.save(&run.out_dir, "levels", run.formats)?;
    written.extend(save_pms(&run.out_dir, &report.pms, run.solver.dim, block.start)?);
    Ok(written)
}

pub fn convergence(run: &Run, levels: Option<Range<usize>>) -> Outcome {
    let levels: Vec<usize> = levels.or_else(|| run.solver.levels.clone()).unwrap_or(0..1).collect();
    let report = convergence_study(
        &run.potential,
        &levels,
        &run.solver.dims,
        run.solver.n_ref,
        &solve_options(&run.solver),
    )?;
    let mut table = Table::new(&["N", "n", "delta", "energy", "reference", "omega"]);
    table.comment(format!("n_ref = {}", report.solution.config().dim));
    for r in report.convergence.as_deref().unwrap_or_default() {
        table.push(vec![
            r.dim.into(),
            r.level.into(),
            r.delta.into(),
            r.energy.into(),
            r.reference.into(),
            r.omega.into(),
        ]);
    }
    let mut written = table.save(&run.out_dir, "convergence", run.formats)?;
    written.extend(save_pms(&run.out_dir, &report.pms, report.solution.config().dim, 0)?);
    Ok(written)
}

pub fn trace_scan(run: &Run) -> Outcome {
    let scan: &Scan = run
        .scan
        .as_ref()
        .ok_or_else(|| Failure::Config("scan: missing section".into()))?;
    let opts = PmsOptions::default().with_span(run.solver.span);
    let ratio = (scan.omega_max / scan.omega_min).ln() / (scan.points - 1) as f64;
    let grid: Vec<f64> = (0..scan.points)
        .map(|i| scan.omega_min * (ratio * i as f64).exp())
        .collect();
    let mut table = Table::new(&["N", "omega", "trace_over_n", "pms_omega", "is_pms"]);
    let mut summary = Vec::new();
    for &n in &scan.dims {
        let len = run.solver.span.len(n);
        let values: Vec<f64> = grid
            .iter()
            .map(|&w| trace(&run.potential, &BasisConfig::new(len, w)?).map(|t| t / n as f64))
            .collect::<Result<_, _>>()?;
        let pms = pms_optimize(&run.potential, n, &opts)?;
        let argmin = (0..values.len()).fold(0, |b, i| if values[i] < values[b] { i } else { b });
        if argmin == 0 || argmin == values.len() - 1 {
            eprintln!(
                "warning: N={n}: smallest trace on the grid sits at its edge (omega = {}); PMS omega = {}",
                fmt_f64(grid[argmin]),
                fmt_f64(pms.omega)
            );
        }
        let inside = pms.omega >= scan.omega_min && pms.omega <= scan.omega_max;
        let mark = grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 / pms.omega).ln().abs().total_cmp(&(b.1 / pms.omega).ln().abs()))
            .map(|(i, _)| i)
            .filter(|_| inside);
        for (i, (&w, &v)) in grid.iter().zip(&values).enumerate() {
            table.push(vec![n.into(), w.into(), v.into(), pms.omega.into(), usize::from(mark == Some(i)).into()]);
        }
        summary.push(pms_json(&pms, n, 0));
    }
    let mut written = table.save(&run.out_dir, "trace_scan", run.formats)?;
    let path = run.out_dir.join("pms.json");
    write_json(&path, &serde_json::Value::Array(summary))?;
    written.push(path);
    Ok(written)
}

fn time_grid(ev: &Evolution) -> Vec<f64> {
    let steps = (ev.t_max / ev.t_step * (1.0 + 1e-12)).floor() as usize;
    (0..=steps).map(|i| ev.t_step * i as f64).collect()
}

pub fn evolve(run: &Run) -> Outcome {
    let ev = run
        .evolution
        .as_ref()
        .ok_or_else(|| Failure::Config("evolution: missing section".into()))?;
    let report = solve_spectrum(&run.potential, run.solver.dim, &solve_options(&run.solver))?;
    let cfg = *report.solution.config();
    let times = time_grid(ev);
    let many = ev.widths.len() > 1;
    let mut written = Vec::new();
    let mut packets = Vec::new();
    for (k, &width) in ev.widths.iter().enumerate() {
        let g = Gaussian::new(width, ev.x0)?;
        let c = if cfg.sigma != 0.0 || cfg.center != 0 {
            project_by_quadrature(|x| g.evaluate(x), &cfg, None)?
        } else {
            match ev.kind {
                PacketKind::Centered => project_centered_gaussian(&g, &cfg)?,
                PacketKind::Shifted => project_shifted_gaussian(&g, &cfg)?,
            }
        };
        let state = make_evolution(&c, &report.solution)?;
        let obs = state.time_series(&times);
        let stem = if many { format!("observables_mu{k}") } else { "observables".to_string() };
        let mut table = Table::new(&["t", "x_mean", "x2_mean", "sqrt_x2"]);
        table.comment(format!("truncation_loss = {}", fmt_f64(state.truncation_loss())));
        table.comment(format!("width = {}", fmt_f64(width)));
        table.comment(format!("x0 = {}", fmt_f64(ev.x0)));
        for o in &obs {
            table.push(vec![o.t.into(), o.x_mean.into(), o.x2_mean.into(), o.sqrt_x2.into()]);
        }
        written.extend(table.save(&run.out_dir, &stem, run.formats)?);

        for &t in &ev.snapshots {
            let (lo, hi) = ev.snapshot_range;
            let h = (hi - lo) / (ev.snapshot_points - 1) as f64;
            let mut snap = Table::new(&["x", "re", "im", "density"]);
            for i in 0..ev.snapshot_points {
                let x = lo + h * i as f64;
                let psi = state.wavefunction_at(x, t);
                snap.push(vec![x.into(), psi.re.into(), psi.im.into(), psi.norm_sqr().into()]);
            }
            let name = if many { format!("wavefunction_mu{k}_t{t}") } else { format!("wavefunction_t{t}") };
            written.extend(snap.save(&run.out_dir, &name, run.formats)?);
        }

        let x: Vec<f64> = obs.iter().map(|o| o.x_mean).collect();
        let x2: Vec<f64> = obs.iter().map(|o| o.x2_mean).collect();
        let peak = |s: &[f64]| dominant_frequency(s, ev.t_step).map(|p| p.omega);
        packets.push(json!({
            "width": width,
            "x0": ev.x0,
            "truncation_loss": state.truncation_loss(),
            "energy": state.energy(0.0),
            "active_modes": state.active_modes().len(),
            "dominant_omega_x": peak(&x),
            "dominant_omega_x2": peak(&x2),
        }));
    }
    let path = run.out_dir.join("evolve.json");
    write_json(
        &path,
        &json!({
            "pms": pms_json(&report.pms, cfg.dim, cfg.center),
            "packets": packets,
        }),
    )?;
    written.push(path);
    Ok(written)
}
