use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use softfoot::harness::{
    compliance_map, configuration_gallery, export_compliance_map, export_sweep, format_float,
    support_length, tilt_sweep, write_csv, FootModel, FootParams, SweepSpec,
};
use softfoot::planar::{
    adaptive_admissible_com_range, adaptive_arch_forces, compliant_spring_forces,
    compliant_tilt_angle, k_min_stability, k_min_support, rigid_foot_on_obstacle,
    StabilityConvention,
};
use softfoot::softfoot::{
    foot_shape, linear_state, solve_closed_form, solve_equilibrium, FootLoad, FootShape,
    SoftFootParams, SolveMethod,
};

use crate::config::{RunConfig, SweepConfig};

/// Files written and solves that failed during one command.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl Outcome {
    fn csv(&mut self, path: PathBuf, header: &[&str], records: Vec<Vec<String>>) -> Result<()> {
        write_csv(&path, header, records)?;
        self.written.push(path);
        Ok(())
    }

    fn fail(&mut self, what: String) {
        log::warn!("{what}");
        self.failures.push(what);
    }
}

fn f(v: f64) -> String {
    format_float(v)
}

/// One sweep specification per configured foot model.
pub fn sweep_specs(cfg: &SweepConfig) -> Vec<SweepSpec> {
    cfg.models
        .iter()
        .map(|&model| {
            let [start, stop] = match model {
                FootModel::Rigid => cfg.rigid_range,
                FootModel::Compliant => cfg.compliant_range,
                FootModel::Softfoot => cfg.softfoot_range,
            };
            SweepSpec {
                foot_model: model,
                start,
                stop,
                step: cfg.step,
                ankle_limit: cfg.ankle_limit,
                load: cfg.load,
            }
        })
        .collect()
}

fn shape_records(shape: &FootShape) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = shape
        .sole
        .iter()
        .enumerate()
        .map(|(i, p)| vec!["sole".into(), i.to_string(), f(p.x), f(p.y)])
        .collect();
    rows.push(vec![
        "arch_apex".into(),
        "0".into(),
        f(shape.arch_apex.x),
        f(shape.arch_apex.y),
    ]);
    rows.push(vec![
        "arch_front".into(),
        "0".into(),
        f(shape.arch_front.x),
        f(shape.arch_front.y),
    ]);
    rows
}

#[derive(Serialize)]
struct EquilibriumReport<'a> {
    load_kg: f64,
    load_n: f64,
    q_rad: Vec<f64>,
    contact_forces_n: [f64; 3],
    tension_n: f64,
    residual_norm: f64,
    iterations: usize,
    method: SolveMethod,
    arch_height_m: f64,
    params: &'a SoftFootParams,
}

pub fn equilibrium(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    let load = FootLoad::from_mass(cfg.load_kg)?;
    let state = solve_equilibrium(&cfg.foot, &load, None).context("equilibrium solve")?;
    let shape = foot_shape(&cfg.foot, &state.q)?;
    let report = EquilibriumReport {
        load_kg: cfg.load_kg,
        load_n: load.force,
        q_rad: state.q.iter().copied().collect(),
        contact_forces_n: state.forces(),
        tension_n: state.tension,
        residual_norm: state.residual_norm,
        iterations: state.iterations,
        method: state.method,
        arch_height_m: shape.arch_height(),
        params: &cfg.foot,
    };
    let path = out.join("equilibrium.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    outcome.written.push(path);
    outcome.csv(
        out.join("foot_shape.csv"),
        &["part", "index", "x_m", "y_m"],
        shape_records(&shape),
    )?;
    println!(
        "load {} kg: q = {:?}, forces = {:?} N, T = {} N, {} iterations",
        cfg.load_kg, report.q_rad, report.contact_forces_n, report.tension_n, report.iterations
    );
    Ok(outcome)
}

fn max_abs_diff<'a>(
    a: impl IntoIterator<Item = &'a f64>,
    b: impl IntoIterator<Item = &'a f64>,
) -> f64 {
    a.into_iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Compares the nonlinear solution with the linear and closed-form ones at
/// the configured load and five successive halvings.
pub fn linearize(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    let mut records = Vec::new();
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..6 {
        let kg = cfg.load_kg / f64::from(1u32 << k);
        let load = FootLoad::from_mass(kg)?;
        let solved = solve_equilibrium(&cfg.foot, &load, None).and_then(|nl| {
            let lin = linear_state(&cfg.foot, &load, SolveMethod::Linear)?;
            let cf = solve_closed_form(&cfg.foot, &load)?;
            Ok((nl, lin, cf))
        });
        match solved {
            Ok((nl, lin, cf)) => {
                let d_lin = max_abs_diff(nl.q.iter(), lin.q.iter());
                let d_cf = max_abs_diff(nl.q.iter(), cf.iter());
                let d_lin_cf = max_abs_diff(lin.q.iter(), cf.iter());
                worst = (worst.0.max(d_lin), worst.1.max(d_cf));
                let d_forces = max_abs_diff(nl.forces().iter(), lin.forces().iter());
                records.push(vec![f(kg), f(d_lin), f(d_cf), f(d_lin_cf), f(d_forces)]);
            }
            Err(e) => {
                outcome.fail(format!("linearize at {kg} kg: {e}"));
                records.push(vec![
                    f(kg),
                    f(f64::NAN),
                    f(f64::NAN),
                    f(f64::NAN),
                    f(f64::NAN),
                ]);
            }
        }
    }
    outcome.csv(
        out.join("linearize.csv"),
        &[
            "load_kg",
            "max_dq_linear_rad",
            "max_dq_closed_form_rad",
            "max_dq_linear_vs_closed_form_rad",
            "max_dF_linear_N",
        ],
        records,
    )?;
    println!(
        "max |q_nonlinear - q_linear| = {:e} rad, max |q_nonlinear - q_closed_form| = {:e} rad",
        worst.0, worst.1
    );
    Ok(outcome)
}

pub fn compliance(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    let map = compliance_map(
        &cfg.foot,
        &cfg.map_e_bar,
        &cfg.map_e0,
        &cfg.map_loads_kg,
        cfg.map_model,
    )?;
    for (eb, e0, kg, v) in map.records() {
        if v.is_none() {
            outcome.fail(format!(
                "compliance at e_bar={eb}, e0={e0}, {kg} kg did not solve"
            ));
        }
    }
    let path = out.join("compliance_map.csv");
    export_compliance_map(&map, &path)?;
    outcome.written.push(path);
    println!(
        "{} cells, compliance non-increasing in e_bar: {}",
        map.values.len(),
        map.non_increasing_in_e_bar(1e-9)
    );
    Ok(outcome)
}

pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    let mut summary = Vec::new();
    let mut soft = cfg.foot.clone();
    soft.pretension_angle = cfg.sweep.softfoot_pretension_angle;
    for spec in sweep_specs(&cfg.sweep) {
        let foot = match spec.foot_model {
            FootModel::Rigid => FootParams::Rigid(cfg.rigid.clone()),
            FootModel::Compliant => FootParams::Compliant(cfg.compliant.clone()),
            FootModel::Softfoot => FootParams::Softfoot(soft.clone()),
        };
        for terrain in &cfg.sweep.terrains {
            let model = spec.foot_model.label();
            let tables = match tilt_sweep(&spec, terrain, &foot) {
                Ok(t) => t,
                Err(e) => {
                    outcome.fail(format!("{model} on {}: {e}", terrain.name));
                    summary.push(vec![
                        model.into(),
                        terrain.name.clone(),
                        String::new(),
                        f(f64::NAN),
                        f(f64::NAN),
                        f(f64::NAN),
                        "0".into(),
                        "0".into(),
                        e.to_string(),
                    ]);
                    continue;
                }
            };
            for table in tables {
                let branch = table.branch.label();
                let failed = table.rows.iter().filter(|r| r.diagnostic.is_some()).count();
                if failed > 0 {
                    outcome.fail(format!(
                        "{model} on {} ({branch}): {failed} rows did not solve",
                        terrain.name
                    ));
                }
                let admissible = table.rows.iter().filter(|r| r.admissible).count();
                let path = out.join(format!("sweep_{model}_{}_{branch}.csv", terrain.name));
                export_sweep(&table, &path)?;
                outcome.written.push(path);
                let (length, comp, diag) = match support_length(&table) {
                    Ok(r) => {
                        let comp = r.compensation_range().unwrap_or((f64::NAN, f64::NAN));
                        (r.length(), comp, r.diagnostic.unwrap_or_default())
                    }
                    Err(e) => (f64::NAN, (f64::NAN, f64::NAN), e.to_string()),
                };
                summary.push(vec![
                    model.into(),
                    terrain.name.clone(),
                    branch.into(),
                    f(length),
                    f(comp.0),
                    f(comp.1),
                    admissible.to_string(),
                    failed.to_string(),
                    diag,
                ]);
            }
        }
    }
    outcome.csv(
        out.join("support_summary.csv"),
        &[
            "model",
            "terrain",
            "branch",
            "support_length_m",
            "ankle_comp_min_rad",
            "ankle_comp_max_rad",
            "admissible_rows",
            "failed_rows",
            "diagnostic",
        ],
        summary.clone(),
    )?;
    for row in &summary {
        println!(
            "{:<10} {:<13} {:<10} support {} m",
            row[0], row[1], row[2], row[3]
        );
    }
    Ok(outcome)
}

pub fn planar(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut outcome = Outcome::default();

    let mut rigid = Vec::new();
    for (i, sc) in cfg.rigid_scenarios.iter().enumerate() {
        match rigid_foot_on_obstacle(sc) {
            Ok(poses) => {
                for p in poses {
                    rigid.push(vec![
                        i.to_string(),
                        p.branch.label().into(),
                        f(p.tilt),
                        f(p.com_displacement),
                        f(p.compensation),
                        f(p.support_segment.0),
                        f(p.support_segment.1),
                        p.within_ankle_limit(sc.ankle_limit).to_string(),
                    ])
                }
            }
            Err(e) => outcome.fail(format!("planar rigid scenario {i}: {e}")),
        }
    }
    outcome.csv(
        out.join("planar_rigid.csv"),
        &[
            "scenario",
            "branch",
            "tilt_rad",
            "com_displacement_m",
            "ankle_comp_rad",
            "support_start_m",
            "support_end_m",
            "within_ankle_limit",
        ],
        rigid,
    )?;

    let compliant = cfg
        .compliant_scenarios
        .iter()
        .enumerate()
        .map(|(i, sc)| {
            let p = &sc.params;
            let (heel, tip) = compliant_spring_forces(p, sc.com_offset);
            let k_support = k_min_support(p.load, p.sole_length, sc.ankle_limit);
            vec![
                i.to_string(),
                f(p.spring_stiffness),
                f(sc.com_offset),
                f(compliant_tilt_angle(p, sc.com_offset)),
                f(heel),
                f(tip),
                f(k_support),
                f(k_min_stability(p, StabilityConvention::AsWritten).stiffness),
                f(k_min_stability(p, StabilityConvention::DimensionalCorrection).stiffness),
                (p.spring_stiffness >= k_support).to_string(),
            ]
        })
        .collect();
    outcome.csv(
        out.join("planar_compliant.csv"),
        &[
            "scenario",
            "k_N_per_m",
            "com_offset_m",
            "tilt_rad",
            "F_heel_N",
            "F_tip_N",
            "k_min_support_N_per_m",
            "k_min_stability_as_written",
            "k_min_stability_dimensional",
            "full_sole_support",
        ],
        compliant,
    )?;

    let adaptive = cfg
        .adaptive_scenarios
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let forces = adaptive_arch_forces(p);
            let range = adaptive_admissible_com_range(p);
            let (lo, hi) = range.interval.unwrap_or((f64::NAN, f64::NAN));
            vec![
                i.to_string(),
                f(p.com_position),
                f(forces.heel),
                f(forces.obstacle),
                f(forces.tip),
                f(forces.total()),
                forces.admissible().to_string(),
                f(range.closed_form_lower_bound),
                f(range.tip_lower_bound),
                f(lo),
                f(hi),
            ]
        })
        .collect();
    outcome.csv(
        out.join("planar_adaptive.csv"),
        &[
            "scenario",
            "com_position_m",
            "F_heel_N",
            "F_obstacle_N",
            "F_tip_N",
            "F_total_N",
            "admissible",
            "closed_form_lower_bound_m",
            "tip_lower_bound_m",
            "com_range_start_m",
            "com_range_end_m",
        ],
        adaptive,
    )?;
    println!(
        "planar comparison written for {} rigid, {} compliant, {} adaptive scenarios",
        cfg.rigid_scenarios.len(),
        cfg.compliant_scenarios.len(),
        cfg.adaptive_scenarios.len()
    );
    Ok(outcome)
}

pub fn gallery(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    let g = configuration_gallery(&cfg.foot, &cfg.gallery_loads_kg)?;
    let fractions = g.compression_fractions();
    let mut shapes = Vec::new();
    let mut summary = Vec::new();
    for (entry, frac) in g.entries.iter().zip(&fractions) {
        match &entry.outcome {
            Ok((state, shape)) => {
                for rec in shape_records(shape) {
                    let mut row = vec![f(entry.load_kg)];
                    row.extend(rec);
                    shapes.push(row);
                }
                let [f1, f2, f3] = state.forces();
                summary.push(vec![
                    f(entry.load_kg),
                    "true".into(),
                    f(shape.arch_height()),
                    f(frac.unwrap_or(f64::NAN)),
                    f(f1),
                    f(f2),
                    f(f3),
                    f(state.tension),
                    state.iterations.to_string(),
                ]);
            }
            Err(e) => {
                outcome.fail(format!("gallery at {} kg: {e}", entry.load_kg));
                let mut row = vec![f(entry.load_kg), "false".into()];
                row.extend(std::iter::repeat_n(f(f64::NAN), 6));
                row.push("0".into());
                summary.push(row);
            }
        }
    }
    outcome.csv(
        out.join("gallery.csv"),
        &["load_kg", "part", "index", "x_m", "y_m"],
        shapes,
    )?;
    outcome.csv(
        out.join("gallery_summary.csv"),
        &[
            "load_kg",
            "converged",
            "arch_height_m",
            "compression_fraction",
            "F1_N",
            "F2_N",
            "F3_N",
            "T_N",
            "iterations",
        ],
        summary.clone(),
    )?;
    for row in &summary {
        println!(
            "{:>6} kg  arch height {} m  compression {}",
            row[0], row[2], row[3]
        );
    }
    println!("arch height non-increasing: {}", g.monotone_compression);
    Ok(outcome)
}
