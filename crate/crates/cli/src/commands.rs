use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

use rayon::prelude::*;
use serde_json::json;

use nhlgi::acceptance;
use nhlgi::dynamics::{
    check_theta, evolve_pure, geodesic_closed_form, geodesic_distance, integrate_bloch, speed,
    speed_closed_form, uniform_grid, BlochVector, DensityMatrix, Frame, NhHamiltonian, PureState,
};
use nhlgi::embedding::{equivalence_sample, k3_via_embedding, theta_from_delta};
use nhlgi::export::Table;
use nhlgi::lgi::{k3, k3_canonical, LgiResult, Observable};
use nhlgi::qmat::trace_distance;
use nhlgi::scan::{self, ScanResult, DEFAULT_NOISE_DELTA};

use crate::{
    write_output, CliError, Command, DistanceArgs, EmbedArgs, Format, FrameArg, LgiArgs,
    NoiseArgs, NoiseScanArgs, OutputArgs, ScanArgs, SearchArgs, SeriesArgs, Subsystem, TimeGrid,
    TrajectoryArgs, VERSION,
};

pub const DEFAULT_THETAS: [f64; 4] = [0.0, FRAC_PI_6, FRAC_PI_4, FRAC_PI_3];
pub const DEFAULT_EMBED_THETAS: [f64; 4] = [0.0, 0.5, 1.0, 1.4];
// The canonical path near θ → π/2 loses its violation already at κ ~ 1e-12.
pub const DEFAULT_NOISE_KAPPAS: [f64; 5] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9];

/// θ = 0, 0.05, …, 1.55.
pub fn default_scan_thetas() -> Vec<f64> {
    (0..32).map(|k| f64::from(k) * 0.05).collect()
}

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Trajectory(a) => trajectory(a),
        Command::Distance(a) => distance(a),
        Command::Speed(a) => speed_series(a),
        Command::Lgi(a) => lgi(a),
        Command::Noise(a) => noise(a),
        Command::Scan(a) => scan_theta(a),
        Command::Noisescan(a) => noisescan(a),
        Command::Embed(a) => embed(a),
        Command::Check(a) => check(a),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn validate_theta(theta: f64) -> Result<f64, CliError> {
    check_theta(theta).map_err(|e| usage(e.to_string()))?;
    Ok(theta)
}

fn validate_thetas(thetas: &[f64]) -> Result<(), CliError> {
    if thetas.is_empty() {
        return Err(usage("empty --theta list"));
    }
    thetas.iter().try_for_each(|&t| validate_theta(t).map(|_| ()))
}

fn validate_kappas(kappas: &[f64]) -> Result<(), CliError> {
    if kappas.is_empty() {
        return Err(usage("empty --kappa list"));
    }
    match kappas.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
        Some(k) => Err(usage(format!("kappa = {k} must be finite and ≥ 0"))),
        None => Ok(()),
    }
}

/// θ from `--theta` or `--delta`, falling back to `default`.
fn theta_or_delta(theta: Option<f64>, delta: Option<f64>, default: f64) -> Result<f64, CliError> {
    match (theta, delta) {
        (Some(t), _) => validate_theta(t),
        (None, Some(d)) => theta_from_delta(d).map_err(|e| usage(e.to_string())),
        (None, None) => Ok(default),
    }
}

fn time_grid(grid: &TimeGrid, default_tmax: f64) -> Result<Vec<f64>, CliError> {
    let tmax = grid.tmax.unwrap_or(default_tmax);
    if !(grid.step > 0.0) {
        return Err(usage(format!("--step must be > 0, got {}", grid.step)));
    }
    if !(grid.tmin >= 0.0) {
        return Err(usage(format!("--tmin must be ≥ 0, got {}", grid.tmin)));
    }
    if tmax < grid.tmin {
        return Err(usage(format!("--tmax {tmax} precedes --tmin {}", grid.tmin)));
    }
    uniform_grid(grid.tmin, tmax, grid.step).map_err(|e| usage(e.to_string()))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn header(table: &mut Table, command: &str, seed: Option<u64>) {
    table.meta("command", command);
    table.meta("version", VERSION);
    match seed {
        Some(s) => table.meta("seed", s),
        None => table.meta("seed", "none"),
    };
}

fn emit_table(output: &OutputArgs, table: &Table) -> Result<(), CliError> {
    let text = match output.format {
        Format::Csv => table.to_csv(),
        Format::Json => format!("{:#}\n", table.to_json()),
    };
    write_output(output, &text)
}

fn grid_meta(table: &mut Table, grid: &TimeGrid, times: &[f64]) {
    table.meta("tmin", grid.tmin);
    table.meta("tmax", times.last().copied().unwrap_or(grid.tmin));
    table.meta("step", grid.step);
}

fn trajectory(a: &TrajectoryArgs) -> Result<(), CliError> {
    let theta = theta_or_delta(a.theta, a.delta, 0.0)?;
    validate_kappas(&[a.kappa])?;
    if a.grid.tmin != 0.0 {
        return Err(usage("trajectory starts at t = 0; --tmin is not supported"));
    }
    let times = time_grid(&a.grid, PI)?;
    let h = NhHamiltonian::canonical(theta).in_subsystem("hamiltonian")?;
    let start = BlochVector::cartesian(PureState::up_y().bloch());
    let traj = integrate_bloch(&start, &h, a.kappa, &times).in_subsystem("bloch integrator")?;
    let frame = match a.frame {
        FrameArg::Cartesian => Frame::Cartesian,
        FrameArg::Abn => Frame::Abn,
    };
    let mut table = Table::default();
    header(&mut table, "trajectory", None);
    grid_meta(&mut table, &a.grid, &times);
    table.meta("initial_state", "up_y");
    let body = traj.to_table(frame);
    table.meta.extend(body.meta);
    table.columns = body.columns;
    table.rows = body.rows;
    emit_table(&a.output, &table)
}

fn distance(a: &DistanceArgs) -> Result<(), CliError> {
    let s = &a.series;
    validate_thetas(&s.theta)?;
    let times = time_grid(&s.grid, PI)?;
    let mut table = if a.rescaled {
        Table::new(&["theta", "scale", "t", "delta", "trace_distance", "delta_closed_form"])
    } else {
        Table::new(&["theta", "t", "delta", "delta_closed_form", "S_n"])
    };
    header(&mut table, if a.rescaled { "distance --rescaled" } else { "distance" }, None);
    table.meta("theta", join(&s.theta));
    grid_meta(&mut table, &s.grid, &times);
    table.meta("initial_state", "up_y");
    table.meta("target_state", "down_y");

    let (up, down) = (PureState::up_y(), PureState::down_y());
    let rho_down = DensityMatrix::from_pure(&down);
    for &theta in &s.theta {
        let base = NhHamiltonian::canonical(theta).in_subsystem("hamiltonian")?;
        let scale = if a.rescaled { theta.cos() } else { 1.0 };
        let h = base.with_scale(scale).in_subsystem("hamiltonian")?;
        for &t in &times {
            let psi = evolve_pure(&h, &up, t).in_subsystem("propagator")?;
            let delta = geodesic_distance(&psi, &down);
            let closed = geodesic_closed_form(theta, scale * t);
            if a.rescaled {
                let d = trace_distance(&DensityMatrix::from_pure(&psi), &rho_down);
                table.push(vec![theta, scale, t, delta, d, closed]);
            } else {
                let s_n = BlochVector::cartesian(psi.bloch()).to_frame(&h, Frame::Abn).vector().z;
                table.push(vec![theta, t, delta, closed, s_n]);
            }
        }
    }
    emit_table(&s.output, &table)
}

fn speed_series(a: &SeriesArgs) -> Result<(), CliError> {
    validate_thetas(&a.theta)?;
    let times = time_grid(&a.grid, PI)?;
    let mut table = Table::new(&["theta", "t", "v", "v_closed_form"]);
    header(&mut table, "speed", None);
    table.meta("theta", join(&a.theta));
    grid_meta(&mut table, &a.grid, &times);
    table.meta("initial_state", "up_y");
    for &theta in &a.theta {
        let h = NhHamiltonian::canonical(theta).in_subsystem("hamiltonian")?;
        for &t in &times {
            let v = speed(&h, &PureState::up_y(), t).in_subsystem("speed")?;
            table.push(vec![theta, t, v, speed_closed_form(theta, t)]);
        }
    }
    emit_table(&a.output, &table)
}

const LGI_COLUMNS: [&str; 9] = ["theta", "kappa", "t1", "t2", "t3", "C12", "C23", "C13", "K3"];

fn lgi_row(theta: f64, r: &LgiResult) -> Vec<f64> {
    let [t1, t2, t3] = r.inputs.times;
    vec![theta, r.inputs.kappa, t1, t2, t3, r.c12, r.c23, r.c13, r.k3]
}

/// Spacings `t > 0` from `--t` or from the time grid.
fn spacings(explicit: &Option<Vec<f64>>, grid: &TimeGrid) -> Result<Vec<f64>, CliError> {
    let ts = match explicit {
        Some(ts) => ts.clone(),
        None => time_grid(grid, FRAC_PI_2)?.into_iter().filter(|&t| t > 0.0).collect(),
    };
    if ts.is_empty() {
        return Err(usage("no positive time spacing"));
    }
    match ts.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        Some(t) => Err(usage(format!("time spacing {t} must be > 0"))),
        None => Ok(ts),
    }
}

fn lgi(a: &LgiArgs) -> Result<(), CliError> {
    validate_thetas(&a.theta)?;
    validate_kappas(&[a.kappa])?;
    let mut table = Table::new(&LGI_COLUMNS);
    header(&mut table, "lgi", None);
    table.meta("theta", join(&a.theta));
    table.meta("kappa", a.kappa);
    table.meta("initial_state", "up_y");
    table.meta("observable", "-sigma_y");

    if let (Some(t1), Some(t2), Some(t3)) = (a.t1, a.t2, a.t3) {
        if !(t1 >= 0.0 && t2 > t1 && t3 > t2) {
            return Err(usage(format!("need 0 ≤ t1 < t2 < t3, got {t1}, {t2}, {t3}")));
        }
        table.meta("times", format!("{t1},{t2},{t3}"));
        let rho = DensityMatrix::from_pure(&PureState::up_y());
        for &theta in &a.theta {
            let h = NhHamiltonian::canonical(theta).in_subsystem("hamiltonian")?;
            let r = k3(&h, &rho, &Observable::canonical_axis(), [t1, t2, t3], a.kappa)
                .in_subsystem("lgi protocol")?;
            table.push(lgi_row(theta, &r));
        }
    } else {
        let ts = spacings(&a.t, &a.grid)?;
        table.meta("times", "0,t,2t");
        for &theta in &a.theta {
            for &t in &ts {
                let r = k3_canonical(theta, t, a.kappa).in_subsystem("lgi protocol")?;
                table.push(lgi_row(theta, &r));
            }
        }
    }
    emit_table(&a.output, &table)
}

fn noise(a: &NoiseArgs) -> Result<(), CliError> {
    let theta = theta_or_delta(a.theta, a.delta, FRAC_PI_2 - DEFAULT_NOISE_DELTA)?;
    validate_kappas(&a.kappa)?;
    let ts = spacings(&a.t, &a.grid)?;
    let mut table = Table::new(&LGI_COLUMNS);
    header(&mut table, "noise", None);
    table.meta("theta", theta);
    table.meta("kappa", join(&a.kappa));
    table.meta("times", "0,t,2t");
    let rows: Vec<Vec<Vec<f64>>> = a
        .kappa
        .par_iter()
        .map(|&kappa| {
            ts.iter()
                .map(|&t| Ok(lgi_row(theta, &k3_canonical(theta, t, kappa)?)))
                .collect::<nhlgi::Result<Vec<_>>>()
        })
        .collect::<nhlgi::Result<Vec<_>>>()
        .in_subsystem("noisy lgi protocol")?;
    table.rows = rows.into_iter().flatten().collect();
    emit_table(&a.output, &table)
}

fn check_budget(search: &SearchArgs) -> Result<(), CliError> {
    if search.budget == 0 {
        return Err(usage("--budget must be positive"));
    }
    Ok(())
}

fn emit_scan(
    output: &OutputArgs,
    table: &Table,
    results: &[ScanResult],
) -> Result<(), CliError> {
    match output.format {
        Format::Csv => write_output(output, &table.to_csv()),
        Format::Json => {
            let meta: serde_json::Map<String, serde_json::Value> =
                table.meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            let doc = json!({ "meta": meta, "results": results });
            write_output(output, &format!("{doc:#}\n"))
        }
    }
}

fn scan_theta(a: &ScanArgs) -> Result<(), CliError> {
    validate_thetas(&a.theta)?;
    check_budget(&a.search)?;
    let SearchArgs { budget, seed } = a.search;
    let pairs: Vec<(ScanResult, ScanResult)> = a
        .theta
        .par_iter()
        .map(|&theta| {
            Ok((scan::maximize_k3(theta, 0.0, budget, seed)?, scan::maximize_speed(theta, budget, seed)?))
        })
        .collect::<nhlgi::Result<Vec<_>>>()
        .map_err(|source| match source {
            nhlgi::Error::Config(msg) => usage(msg),
            source => CliError::Numerical { subsystem: "scan", source },
        })?;
    let mut table = Table::new(&["theta", "K3max", "vmax", "K3_evals", "v_evals"]);
    header(&mut table, "scan", Some(seed));
    table.meta("theta", join(&a.theta));
    table.meta("budget", budget);
    for (k, v) in &pairs {
        table.push(vec![k.theta, k.objective, v.objective, k.evals as f64, v.evals as f64]);
    }
    let results: Vec<ScanResult> = pairs.into_iter().flat_map(|(k, v)| [k, v]).collect();
    emit_scan(&a.output, &table, &results)
}

fn noisescan(a: &NoiseScanArgs) -> Result<(), CliError> {
    let theta = theta_or_delta(a.theta, a.delta, FRAC_PI_2 - DEFAULT_NOISE_DELTA)?;
    let grid = a.kappa.clone().unwrap_or_else(scan::default_kappa_grid);
    validate_kappas(&grid)?;
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(usage("--kappa grid must be strictly increasing"));
    }
    check_budget(&a.search)?;
    let SearchArgs { budget, seed } = a.search;
    let results = scan::k3max_vs_noise(theta, &grid, budget, seed).map_err(|source| match source {
        nhlgi::Error::Config(msg) => usage(msg),
        source => CliError::Numerical { subsystem: "noise scan", source },
    })?;
    let mut table = Table::new(&["theta", "kappa", "kappa_bar", "K3max", "evals"]);
    header(&mut table, "noisescan", Some(seed));
    table.meta("theta", theta);
    table.meta("kappa", join(&grid));
    table.meta("budget", budget);
    table.meta("kappa_bar", "kappa * 1e5");
    for r in &results {
        table.push(vec![theta, r.kappa, r.kappa * 1e5, r.objective, r.evals as f64]);
    }
    emit_scan(&a.output, &table, &results)
}

fn embed(a: &EmbedArgs) -> Result<(), CliError> {
    let thetas: Vec<f64> = match &a.delta {
        Some(ds) => ds
            .iter()
            .map(|&d| theta_from_delta(d).map_err(|e| usage(e.to_string())))
            .collect::<Result<_, _>>()?,
        None => a.theta.clone(),
    };
    validate_thetas(&thetas)?;
    let times = time_grid(&a.grid, PI)?;
    let mut table = Table::new(&["theta", "t", "fidelity", "p_select", "selection_identity"]);
    header(&mut table, "embed", None);
    table.meta("theta", join(&thetas));
    grid_meta(&mut table, &a.grid, &times);
    table.meta("initial_state", "up_y");
    let psi0 = PureState::up_y();
    for &theta in &thetas {
        let k = k3_via_embedding(theta, &psi0, &Observable::canonical_axis(), [0.0, FRAC_PI_4, FRAC_PI_2])
            .in_subsystem("embedding")?;
        table.meta(&format!("k3_embedded(theta={theta})"), k.k3);
        for &t in &times {
            let s = equivalence_sample(theta, &psi0, t).in_subsystem("embedding")?;
            table.push(vec![theta, t, s.fidelity, s.p_select, s.selection_identity]);
        }
    }
    emit_table(&a.output, &table)
}

fn check(a: &OutputArgs) -> Result<(), CliError> {
    let reports = acceptance::run_all();
    let failed = reports.iter().filter(|r| !r.passed).count();
    let text = match a.format {
        Format::Csv => {
            let mut s = format!("# command: check\n# version: {VERSION}\n# seed: {}\n", acceptance::SEED);
            for r in &reports {
                s.push_str(&r.line());
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "meta": { "command": "check", "version": VERSION, "seed": acceptance::SEED.to_string() },
                "criteria": reports,
            });
            format!("{doc:#}\n")
        }
    };
    write_output(a, &text)?;
    if failed > 0 {
        return Err(CliError::Failed(failed));
    }
    Ok(())
}
