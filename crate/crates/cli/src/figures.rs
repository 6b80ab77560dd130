//! Analytic data for every figure panel, one CSV each.

use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use serde_json::{json, Value};

use spincorr::dynamics::{detect_sudden_changes, evolve_bd_pd_strength, gqd_parity_scan, uniform_times, Quantifier, Trajectory, PLATEAU_THRESHOLD, SLOPE_TOLERANCE};
use spincorr::io::{self, Cell, CsvTable};
use spincorr::metrology::{blackbox_suite, Setting};
use spincorr::states::CorrelationTriple;

use crate::commands::{bd_trajectory, write_file};
use crate::error::CliError;

/// Chloroform transverse relaxation times (s) of ¹H and ¹³C.
const T2_H: f64 = 0.27;
const T2_C: f64 = 0.15;

struct Panel {
    file: &'static str,
    table: CsvTable,
}

fn with_series(mut traj: Trajectory, quantifiers: &[Quantifier]) -> Result<Trajectory, CliError> {
    for &q in quantifiers {
        traj.compute(q)?;
    }
    Ok(traj)
}

fn kinks(figure: &str, traj: &Trajectory, quantifiers: &[Quantifier], out: &mut CsvTable) -> Result<(), CliError> {
    for q in quantifiers {
        for cp in detect_sudden_changes(traj, q.name(), SLOPE_TOLERANCE)? {
            let kind = serde_json::to_value(cp.kind).expect("unit enum serializes");
            out.push(vec![
                figure.into(),
                Cell::Text(cp.series),
                cp.time.into(),
                kind.as_str().unwrap_or_default().into(),
            ])?;
        }
    }
    Ok(())
}

fn panels() -> Result<Vec<Panel>, CliError> {
    let mut out = Vec::new();
    let mut change_points = CsvTable::new(&["figure", "series", "time", "kind"]);

    // Phase damping in the per-qubit strength p for the three dynamical cases.
    let entropic = [Quantifier::Mutual, Quantifier::Classical, Quantifier::Entropic];
    let names: Vec<&str> = entropic.iter().map(|q| q.name()).collect();
    let p_grid = uniform_times(1.0, 1001);
    for (file, c) in [
        ("pd_decoherence_case1.csv", CorrelationTriple::new(0.3, -0.3, 0.6)),
        ("pd_decoherence_case2.csv", CorrelationTriple::new(0.5, -0.3, 0.0)),
        ("pd_decoherence_case3.csv", CorrelationTriple::new(1.0, -0.6, 0.6)),
    ] {
        let traj = with_series(evolve_bd_pd_strength(&c, &p_grid)?, &entropic)?;
        kinks(file, &traj, &entropic, &mut change_points)?;
        out.push(Panel { file, table: io::trajectory_table(&traj, "p", &names)? });
    }

    // Double sudden change: chloroform under phase damping, and a
    // quadrupolar system under amplitude damping (time in units of T1).
    let geometric = [Quantifier::Trace, Quantifier::GeometricClassical, Quantifier::Mutual];
    let names: Vec<&str> = geometric.iter().map(|q| q.name()).collect();
    let pd = bd_trajectory(
        &CorrelationTriple::new(0.49, 0.20, 0.067),
        "pd",
        [1.0 / T2_H, 1.0 / T2_C],
        0.0,
        &uniform_times(0.5, 501),
    )?;
    let gad = bd_trajectory(&CorrelationTriple::new(0.08, 0.14, 0.16), "gad", [1.0, 1.0], 0.0, &uniform_times(3.0, 301))?;
    for (file, traj) in [("double_sudden_change_pd.csv", pd), ("double_sudden_change_gad.csv", gad)] {
        let traj = with_series(traj, &geometric)?;
        kinks(file, &traj, &geometric[..2], &mut change_points)?;
        out.push(Panel { file, table: io::trajectory_table(&traj, "t", &names)? });
    }

    // Freezing of four discord quantifiers on chloroform.
    let frozen = [Quantifier::Entropic, Quantifier::Trace, Quantifier::Bures, Quantifier::FidelityBased];
    let names: Vec<&str> = frozen.iter().map(|q| q.name()).collect();
    let traj = bd_trajectory(
        &CorrelationTriple::new(1.0, 0.7, -0.7),
        "pd",
        [1.0 / T2_H, 1.0 / T2_C],
        0.0,
        &uniform_times(0.15, 301),
    )?;
    let traj = with_series(traj, &frozen)?;
    kinks("universal_freezing.csv", &traj, &frozen, &mut change_points)?;
    out.push(Panel { file: "universal_freezing.csv", table: io::trajectory_table(&traj, "t", &names)? });

    // Global discord parity on a shared time axis (γ = 1).
    let times = uniform_times(1.25, 201);
    let scans = [
        gqd_parity_scan(2, &CorrelationTriple::new(1.0, 0.7, -0.7), 1.0, Some(&times), PLATEAU_THRESHOLD)?,
        gqd_parity_scan(3, &CorrelationTriple::new(0.7, 0.3, 0.3), 1.0, Some(&times), PLATEAU_THRESHOLD)?,
        gqd_parity_scan(4, &CorrelationTriple::new(1.0, 0.7, 0.7), 1.0, Some(&times), PLATEAU_THRESHOLD)?,
    ];
    let mut table = CsvTable::new(&["t", "gqd_n2", "gqd_n3", "gqd_n4"]);
    for (k, &t) in times.iter().enumerate() {
        let mut row = vec![Cell::Num(t)];
        row.extend(scans.iter().map(|s| Cell::Num(s.series[k])));
        table.push(row)?;
    }
    out.push(Panel { file: "gqd_parity.csv", table });

    // Black-box metrology: F/4 and IP for both probes and all settings.
    let rows = blackbox_suite(&uniform_times(1.0, 21), &Setting::ALL, FRAC_PI_4, 100)?;
    let mut table = CsvTable::new(&["probe", "p", "setting", "F", "F_over_4", "IP", "mean_phi", "var_phi"]);
    for r in rows {
        table.push(vec![
            r.probe.name().into(),
            r.p.into(),
            r.setting.name().into(),
            r.f.into(),
            (r.f / 4.0).into(),
            r.ip.into(),
            r.mean_phi.into(),
            r.var_phi.into(),
        ])?;
    }
    out.push(Panel { file: "ip_results.csv", table });

    out.push(Panel { file: "change_points.csv", table: change_points });
    Ok(out)
}

/// Writes every panel into `dir` and returns a JSON index of the files.
pub fn reproduce(dir: &Path, hash: &str) -> Result<Value, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for panel in panels()? {
        let path = dir.join(panel.file);
        write_file(&path, panel.table.to_csv_string(hash).as_bytes())?;
        files.push(json!({ "file": panel.file, "columns": panel.table.header, "rows": panel.table.rows.len() }));
    }
    Ok(json!({ "out_dir": dir.display().to_string(), "files": files, "config_sha256": hash }))
}
