//! Subcommand arguments and runners. Each argument struct doubles as the
//! JSON config schema of its command: keys are the snake_case field names.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use spincorr::bloch::{
    classical_work, field_for_larmor, quantum_work, sigma_z_expect, sigma_z_from_state, stationary, trajectory,
    BlochParams, Magnetization, SpinPulse, NUCLEAR_MAGNETON,
};
use spincorr::channels::{decay_fraction, gad_channel, gpd_channel, ChannelSpec, GadParams};
use spincorr::correlations::{
    classical_bd, entropic_discord_on, geometric_report, global_quantum_discord, luo_discord, trace_discord_bd, Side,
};
use spincorr::dynamics::{
    classify_dynamics, correlations_of, default_times, detect_sudden_changes, effective_gamma, evolve_bd_pd_rates,
    evolve_general, freezing_time, gqd_parity_scan, uniform_times, verify_freezing, ChannelLayer, EvolutionMode,
    Quantifier, Trajectory, PLATEAU_THRESHOLD, SLOPE_TOLERANCE,
};
use spincorr::io::{self, Cell, CsvTable};
use spincorr::metrology::{
    blackbox_suite, estimate, interferometric_power, interferometric_power_search,
    interferometric_power_with_spectrum, qfi, Readout, Setting,
};
use spincorr::qmatrix::Metric;
use spincorr::states::{
    bell_diagonal, m3n_state, peres_entangled, probe_state, pseudo_singlet, pseudo_singlet_threshold,
    CorrelationTriple, DensityMatrix, ProbeKind,
};

use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

/// Where results go: JSON to `out` or stdout; CSV to `out` with a JSON
/// summary on stdout, or CSV alone on stdout.
pub struct Sink {
    pub out: Option<PathBuf>,
    pub hash: String,
}

impl Sink {
    fn json(&self, mut value: Value) -> Result<()> {
        value["config_sha256"] = json!(self.hash);
        let text = serde_json::to_string_pretty(&value).expect("JSON values serialize") + "\n";
        match &self.out {
            Some(path) => write_file(path, text.as_bytes()),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn csv(&self, table: &CsvTable, mut summary: Value) -> Result<()> {
        let text = table.to_csv_string(&self.hash);
        match &self.out {
            Some(path) => {
                write_file(path, text.as_bytes())?;
                summary["out"] = json!(path.display().to_string());
                summary["rows"] = json!(table.rows.len());
                summary["config_sha256"] = json!(self.hash);
                println!("{}", serde_json::to_string_pretty(&summary).expect("JSON values serialize"));
            }
            None => print!("{text}"),
        }
        Ok(())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn need<T: Clone>(value: &Option<T>, flag: &str) -> Result<T> {
    value.clone().ok_or_else(|| CliError::Validation(format!("--{flag} is required")))
}

fn triple(c: &Option<Vec<f64>>) -> Result<CorrelationTriple> {
    match c.as_deref() {
        Some(&[c1, c2, c3]) => Ok(CorrelationTriple::new(c1, c2, c3)),
        Some(v) => Err(CliError::Validation(format!("--c takes three values, got {}", v.len()))),
        None => Err(CliError::Validation("--c is required".into())),
    }
}

fn parse<T: std::str::FromStr<Err = spincorr::Error>>(s: &str) -> Result<T> {
    Ok(s.parse::<T>()?)
}

fn time_grid(t_max: Option<f64>, n_times: Option<usize>, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>> {
    match (t_max, n_times) {
        (None, None) => Ok(default()),
        (t, n) => {
            let t = t.unwrap_or_else(|| *default().last().expect("default grid is non-empty"));
            let n = n.unwrap_or(200);
            if !(t > 0.0) || !t.is_finite() || n < 2 {
                return Err(CliError::Validation("time grid needs t_max > 0 and n_times >= 2".into()));
            }
            Ok(uniform_times(t, n))
        }
    }
}

/// Two-qubit input state: a probe (`--probe`, `--p`) or a Bell-diagonal
/// triple (`--c`).
fn two_qubit_input(probe: &Option<String>, p: Option<f64>, c: &Option<Vec<f64>>) -> Result<(DensityMatrix, Option<CorrelationTriple>)> {
    match probe {
        Some(kind) => Ok((probe_state(need(&p, "p")?, parse::<ProbeKind>(kind)?)?, None)),
        None => {
            let t = triple(c)?;
            Ok((bell_diagonal(&t)?, Some(t)))
        }
    }
}

macro_rules! config_struct {
    ($(#[$m:meta])* pub struct $name:ident { $($body:tt)* }) => {
        $(#[$m])*
        #[derive(Args, Serialize, Deserialize, Default, Debug, Clone, PartialEq)]
        #[serde(deny_unknown_fields, default)]
        pub struct $name { $($body)* }
    };
}

config_struct! {
    /// Bloch-equation trajectory.
    pub struct BlochArgs {
        #[arg(long)]
        pub m0: Option<f64>,
        /// Longitudinal relaxation time (omit for none).
        #[arg(long)]
        pub t1: Option<f64>,
        /// Transverse relaxation time (omit for none).
        #[arg(long)]
        pub t2: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        pub delta_omega: Option<f64>,
        #[arg(long)]
        pub omega1: Option<f64>,
        #[arg(long)]
        pub b0: Option<f64>,
        /// Initial magnetization `mx,my,mz` (default: equilibrium).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pub m_init: Option<Vec<f64>>,
        #[arg(long)]
        pub t_max: Option<f64>,
        #[arg(long)]
        pub n_times: Option<usize>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

pub fn bloch(a: &BlochArgs, sink: &Sink) -> Result<()> {
    let p = BlochParams {
        m0: a.m0.unwrap_or(1.0),
        t1: a.t1.unwrap_or(f64::INFINITY),
        t2: a.t2.unwrap_or(f64::INFINITY),
        delta_omega: a.delta_omega.unwrap_or(0.0),
        omega1: a.omega1.unwrap_or(1.0),
        b0: a.b0.unwrap_or(1.0),
    };
    p.validate()?;
    let m_init = match a.m_init.as_deref() {
        None => Magnetization::equilibrium(p.m0),
        Some(&[x, y, z]) => Magnetization::new(x, y, z),
        Some(v) => return Err(CliError::Validation(format!("--m-init takes three values, got {}", v.len()))),
    };
    let times = time_grid(a.t_max, a.n_times, || uniform_times(10.0, 201))?;
    let ms = trajectory(&p, m_init, &times)?;
    let table = io::bloch_table(&times, &ms)?;
    sink.csv(&table, json!({ "stationary": stationary(&p).ok() }))
}

config_struct! {
    /// Work done by a pulse, quantum and classical descriptions.
    pub struct WorkArgs {
        /// Larmor frequency (rad/s).
        #[arg(long)]
        pub omega0: Option<f64>,
        #[arg(long)]
        pub omega1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        pub delta_omega: Option<f64>,
        /// Pulse duration (s).
        #[arg(long)]
        pub tau: Option<f64>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

pub fn work(a: &WorkArgs, sink: &Sink) -> Result<()> {
    let sp = SpinPulse {
        omega0: need(&a.omega0, "omega0")?,
        omega1: need(&a.omega1, "omega1")?,
        delta_omega: a.delta_omega.unwrap_or(0.0),
        tau: need(&a.tau, "tau")?,
    };
    if !(sp.omega0 > 0.0) || !(sp.tau >= 0.0) || !sp.omega1.is_finite() || !sp.delta_omega.is_finite() {
        return Err(CliError::Validation("need omega0 > 0, tau >= 0 and finite frequencies".into()));
    }
    let b0 = field_for_larmor(sp.omega0);
    sink.json(json!({
        "flip_fraction": sp.flip_fraction(),
        "sigma_z": sigma_z_expect(&sp),
        "sigma_z_from_state": sigma_z_from_state(&sp),
        "quantum_work": quantum_work(&sp),
        "classical_work": classical_work(NUCLEAR_MAGNETON, b0, &sp),
        "b0": b0,
    }))
}

config_struct! {
    /// Build a state and report its correlations and entanglement.
    pub struct StateArgs {
        /// bell-diagonal | m3n | pseudo-singlet | probe
        #[arg(long)]
        pub kind: Option<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pub c: Option<Vec<f64>>,
        /// Qubit count for m3n states.
        #[arg(long)]
        pub n: Option<usize>,
        #[arg(long)]
        pub epsilon: Option<f64>,
        /// quantum | classical
        #[arg(long)]
        pub probe: Option<String>,
        #[arg(long)]
        pub p: Option<f64>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

pub fn state(a: &StateArgs, sink: &Sink) -> Result<()> {
    let kind = a.kind.clone().unwrap_or_else(|| "bell-diagonal".into());
    let mut threshold = None;
    let rho = match kind.as_str() {
        "bell-diagonal" | "bd" => bell_diagonal(&triple(&a.c)?)?,
        "m3n" => m3n_state(&triple(&a.c)?, a.n.unwrap_or(3))?,
        "pseudo-singlet" => {
            threshold = Some(pseudo_singlet_threshold(1e-12)?);
            pseudo_singlet(need(&a.epsilon, "epsilon")?)?
        }
        "probe" => probe_state(need(&a.p, "p")?, parse(&need(&a.probe, "probe")?)?)?,
        other => return Err(CliError::Validation(format!("unknown state kind '{other}'"))),
    };
    let mut v = io::state_json(&rho);
    v["kind"] = json!(kind);
    v["purity"] = json!(rho.purity());
    v["triple"] = json!(correlations_of(&rho));
    if rho.n_qubits() == 2 {
        v["peres"] = json!(peres_entangled(&rho)?);
    }
    if let Some(t) = threshold {
        v["entanglement_threshold"] = json!(t);
    }
    sink.json(v)
}

fn channel_spec(
    name: &str,
    q: Option<f64>,
    gamma: Option<f64>,
    t1: Option<f64>,
    t2: Option<f64>,
    alpha: Option<f64>,
    p_bias: Option<f64>,
) -> Result<ChannelSpec> {
    Ok(match name {
        "identity" => ChannelSpec::Identity,
        "pd" => ChannelSpec::Pd { q, t2 },
        "gad" => ChannelSpec::Gad { gamma, t1, alpha, p_bias },
        "gpd" => ChannelSpec::Gpd { q, t2 },
        other => return Err(CliError::Validation(format!("unknown channel '{other}'"))),
    })
}

config_struct! {
    /// Apply a channel to a Bell-diagonal or M³_N state.
    pub struct ChannelArgs {
        /// identity | pd | gad | gpd
        #[arg(long)]
        pub channel: Option<String>,
        /// Damping strength for pd and gpd.
        #[arg(long)]
        pub q: Option<f64>,
        /// Damping strength for gad.
        #[arg(long)]
        pub gamma: Option<f64>,
        #[arg(long)]
        pub p_bias: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        pub alpha: Option<f64>,
        /// Elapsed time when strengths follow from t1/t2.
        #[arg(long)]
        pub t: Option<f64>,
        #[arg(long)]
        pub t1: Option<f64>,
        #[arg(long)]
        pub t2: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pub c: Option<Vec<f64>>,
        #[arg(long)]
        pub n: Option<usize>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

pub fn channel(a: &ChannelArgs, sink: &Sink) -> Result<()> {
    let spec = channel_spec(&need(&a.channel, "channel")?, a.q, a.gamma, a.t1, a.t2, a.alpha, a.p_bias)?;
    let c = triple(&a.c)?;
    let n = a.n.unwrap_or(2);
    let rho = if n == 2 { bell_diagonal(&c)? } else { m3n_state(&c, n)? };
    let t = a.t.unwrap_or(0.0);
    let residual = spec.at_time(t)?.completeness_residual();
    let out = ChannelLayer::from_specs(std::slice::from_ref(&spec), n, t)?.apply(&rho)?;
    let mut v = io::state_json(&out);
    v["channel"] = json!(spec);
    v["completeness_residual"] = json!(residual);
    v["triple_in"] = json!(c);
    v["triple_out"] = json!(correlations_of(&out));
    sink.json(v)
}

config_struct! {
    /// Entropic and geometric discord of a two-qubit state.
    pub struct DiscordArgs {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pub c: Option<Vec<f64>>,
        #[arg(long)]
        pub probe: Option<String>,
        #[arg(long)]
        pub p: Option<f64>,
        /// entropic | trace | hilbert_schmidt | bures | fidelity | all
        #[arg(long)]
        pub metric: Option<String>,
        /// a | b | both (both applies to geometric metrics only)
        #[arg(long)]
        pub side: Option<String>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

pub fn discord(a: &DiscordArgs, sink: &Sink) -> Result<()> {
    let (rho, c) = two_qubit_input(&a.probe, a.p, &a.c)?;
    let side: Side = parse(a.side.as_deref().unwrap_or("a"))?;
    let metric = a.metric.clone().unwrap_or_else(|| "all".into());
    let names: Vec<String> = if metric == "all" {
        ["entropic", "trace", "hilbert_schmidt", "bures", "fidelity"].map(String::from).to_vec()
    } else {
        vec![metric]
    };
    let mut reports = Vec::new();
    for name in &names {
        let report = if name == "entropic" {
            entropic_discord_on(&rho, side)?
        } else {
            geometric_report(&rho, parse::<Metric>(name)?, side)?
        };
        reports.push(report);
    }
    let mut v = json!({
        "reports": reports,
        "gqd": global_quantum_discord(&rho)?.value,
    });
    if let Some(c) = c {
        v["closed_form"] = json!({
            "entropic": luo_discord(&c)?,
            "trace": trace_discord_bd(&c),
            "geometric_classical": classical_bd(&c),
        });
    }
    sink.json(v)
}

config_struct! {
    /// Correlation dynamics of a Bell-diagonal state under decoherence.
    pub struct DynamicsArgs {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pub c: Option<Vec<f64>>,
        /// pd | gad | gpd
        #[arg(long)]
        pub channel: Option<String>,
        /// Decay rate of qubit A (1/T2 for pd and gpd, 1/T1 for gad).
        #[arg(long)]
        pub gamma: Option<f64>,
        /// Decay rate of qubit B (default: same as A).
        #[arg(long)]
        pub gamma_b: Option<f64>,
        /// Temperature parameter for gad.
        #[arg(long, allow_hyphen_values = true)]
        pub alpha: Option<f64>,
        #[arg(long)]
        pub t_max: Option<f64>,
        #[arg(long)]
        pub n_times: Option<usize>,
        /// Comma-separated quantifier names.
        #[arg(long, value_delimiter = ',')]
        pub quantifiers: Option<Vec<String>>,
        /// Relative slope-jump tolerance of the change-point detector.
        #[arg(long)]
        pub tol: Option<f64>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

/// Bell-diagonal evolution under `channel` with per-qubit rates.
pub fn bd_trajectory(c0: &CorrelationTriple, channel: &str, rates: [f64; 2], alpha: f64, times: &[f64]) -> Result<Trajectory> {
    let rho0 = bell_diagonal(c0)?;
    let traj = match channel {
        "pd" => evolve_bd_pd_rates(c0, rates, times)?,
        "gad" => evolve_general(
            &rho0,
            |t| {
                let chs = rates
                    .iter()
                    .map(|&g| gad_channel(GadParams::at_time(t, 1.0 / g, alpha)?))
                    .collect::<spincorr::Result<Vec<_>>>()?;
                Ok(ChannelLayer::Local(chs))
            },
            times,
            EvolutionMode::Snapshot,
        )?,
        "gpd" => evolve_general(
            &rho0,
            |t| Ok(ChannelLayer::Global(gpd_channel(decay_fraction(t, 1.0 / rates[0])?)?)),
            times,
            EvolutionMode::Snapshot,
        )?,
        other => return Err(CliError::Validation(format!("unknown channel '{other}'"))),
    };
    Ok(traj)
}

pub fn dynamics(a: &DynamicsArgs, sink: &Sink) -> Result<()> {
    let c0 = triple(&a.c)?;
    let channel = a.channel.clone().unwrap_or_else(|| "pd".into());
    let gamma = a.gamma.unwrap_or(1.0);
    let rates = [gamma, a.gamma_b.unwrap_or(gamma)];
    if rates.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
        return Err(CliError::Validation("decay rates must be positive".into()));
    }
    let times = time_grid(a.t_max, a.n_times, || uniform_times(5.0 / (2.0 * effective_gamma(rates)), 1001))?;
    let names = a.quantifiers.clone().unwrap_or_else(|| ["mutual", "classical", "entropic"].map(String::from).to_vec());
    let quantifiers: Vec<Quantifier> = names.iter().map(|s| parse(s)).collect::<Result<_>>()?;
    let tol = a.tol.unwrap_or(SLOPE_TOLERANCE);

    let mut traj = bd_trajectory(&c0, &channel, rates, a.alpha.unwrap_or(0.0), &times)?;
    let strength = |t: f64| -(-rates[0] * t).exp_m1();
    traj.insert_series("p", times.iter().map(|&t| strength(t)).collect())?;
    let mut change_points = Vec::new();
    for &q in &quantifiers {
        traj.compute(q)?;
        for cp in detect_sudden_changes(&traj, q.name(), tol)? {
            change_points.push(json!({
                "series": cp.series,
                "time": cp.time,
                "p": strength(cp.time),
                "kind": cp.kind,
            }));
        }
    }
    let mut columns = vec!["p"];
    columns.extend(quantifiers.iter().map(|q| q.name()));
    let table = io::trajectory_table(&traj, "t", &columns)?;
    sink.csv(
        &table,
        json!({
            "channel": channel,
            "case": classify_dynamics(&c0),
            "change_points": change_points,
        }),
    )
}

config_struct! {
    /// Check discord freezing under phase damping.
    pub struct FreezeArgs {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pub c: Option<Vec<f64>>,
        #[arg(long)]
        pub gamma: Option<f64>,
        /// Quantifier to test (default entropic).
        #[arg(long)]
        pub quantifier: Option<String>,
        #[arg(long)]
        pub t_max: Option<f64>,
        #[arg(long)]
        pub n_times: Option<usize>,
        /// Relative plateau variation threshold.
        #[arg(long)]
        pub threshold: Option<f64>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

pub fn freeze(a: &FreezeArgs, sink: &Sink) -> Result<()> {
    let c0 = triple(&a.c)?;
    let gamma = a.gamma.unwrap_or(1.0);
    let q: Quantifier = parse(a.quantifier.as_deref().unwrap_or("entropic"))?;
    let nominal = freezing_time(&c0, gamma)?;
    let times = time_grid(a.t_max, a.n_times, || default_times(gamma))?;
    let report = verify_freezing(&c0, gamma, q, Some(&times), a.threshold.unwrap_or(PLATEAU_THRESHOLD))?;
    sink.json(json!({
        "quantifier": q.name(),
        "t_star": report.t_star,
        "frozen": report.frozen,
        "freezing_condition": nominal.frozen,
        "plateau_relative_variation": report.plateau_relative_variation,
        "decreasing_after": report.decreasing_after,
        "case": classify_dynamics(&c0),
    }))
}

config_struct! {
    /// Global quantum discord of an M³_N state under phase damping.
    pub struct GqdArgs {
        #[arg(long)]
        pub n: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pub c: Option<Vec<f64>>,
        #[arg(long)]
        pub gamma: Option<f64>,
        #[arg(long)]
        pub t_max: Option<f64>,
        #[arg(long)]
        pub n_times: Option<usize>,
        #[arg(long)]
        pub threshold: Option<f64>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

pub fn gqd(a: &GqdArgs, sink: &Sink) -> Result<()> {
    let n = a.n.unwrap_or(3);
    let gamma = a.gamma.unwrap_or(1.0);
    let times = match (a.t_max, a.n_times) {
        (None, None) => None,
        (t, k) => Some(time_grid(t, k, || uniform_times(5.0 / (n as f64 * gamma), 200))?),
    };
    let scan = gqd_parity_scan(n, &triple(&a.c)?, gamma, times.as_deref(), a.threshold.unwrap_or(PLATEAU_THRESHOLD))?;
    let mut table = CsvTable::new(&["t", "gqd"]);
    for (t, v) in scan.times.iter().zip(&scan.series) {
        table.push(vec![Cell::Num(*t), Cell::Num(*v)])?;
    }
    sink.csv(
        &table,
        json!({
            "n_qubits": scan.n_qubits,
            "plateau_detected": scan.plateau_detected,
            "t_star": scan.t_star,
            "plateau_relative_variation": scan.plateau_relative_variation,
            "decreasing_after": scan.decreasing_after,
        }),
    )
}

config_struct! {
    /// Interferometric power of a probe or Bell-diagonal state.
    pub struct IpArgs {
        #[arg(long)]
        pub probe: Option<String>,
        #[arg(long)]
        pub p: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pub c: Option<Vec<f64>>,
        /// Generator spectrum `a,b` (default 1,-1).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pub spectrum: Option<Vec<f64>>,
        /// Also run the brute-force search with this many samples.
        #[arg(long)]
        pub oracle_samples: Option<usize>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

pub fn ip(a: &IpArgs, sink: &Sink) -> Result<()> {
    let (rho, _) = two_qubit_input(&a.probe, a.p, &a.c)?;
    let value = match a.spectrum.as_deref() {
        None => interferometric_power(&rho)?,
        Some(&[x, y]) => interferometric_power_with_spectrum(&rho, [x, y])?,
        Some(v) => return Err(CliError::Validation(format!("--spectrum takes two values, got {}", v.len()))),
    };
    let mut qfis = serde_json::Map::new();
    for s in Setting::ALL {
        qfis.insert(s.name().into(), json!(qfi(&rho, &s.hamiltonian())?));
    }
    let mut v = json!({ "ip": value, "qfi": qfis });
    if let Some(samples) = a.oracle_samples {
        v["oracle"] = json!(interferometric_power_search(&rho, samples.max(1))?);
    }
    sink.json(v)
}

config_struct! {
    /// Optimal phase estimator for one probe and setting.
    pub struct EstimateArgs {
        #[arg(long)]
        pub probe: Option<String>,
        #[arg(long)]
        pub p: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pub c: Option<Vec<f64>>,
        /// H1 | H2 | H3
        #[arg(long)]
        pub setting: Option<String>,
        #[arg(long)]
        pub phi0: Option<f64>,
        #[arg(long)]
        pub nu: Option<u64>,
        /// Simulate shot noise with this seed (default: exact populations).
        #[arg(long)]
        pub seed: Option<u64>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

pub fn estimate_cmd(a: &EstimateArgs, sink: &Sink) -> Result<()> {
    let (rho, _) = two_qubit_input(&a.probe, a.p, &a.c)?;
    let setting: Setting = parse(a.setting.as_deref().unwrap_or("H1"))?;
    let readout = a.seed.map_or(Readout::Exact, |seed| Readout::Shots { seed });
    let outcome = estimate(&rho, &setting.hamiltonian(), a.phi0.unwrap_or(FRAC_PI_4), a.nu.unwrap_or(100), readout)?;
    let mut v = json!(outcome);
    v["setting"] = json!(setting.name());
    sink.json(v)
}

config_struct! {
    /// Black-box estimation suite over probes, strengths and settings.
    pub struct SuiteArgs {
        #[arg(long, value_delimiter = ',')]
        pub p_grid: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        pub settings: Option<Vec<String>>,
        #[arg(long)]
        pub phi0: Option<f64>,
        #[arg(long)]
        pub nu: Option<u64>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

pub fn suite(a: &SuiteArgs, sink: &Sink) -> Result<()> {
    let p_grid = a.p_grid.clone().unwrap_or_else(|| uniform_times(1.0, 11));
    let settings: Vec<Setting> = match &a.settings {
        Some(list) => list.iter().map(|s| parse(s)).collect::<Result<_>>()?,
        None => Setting::ALL.to_vec(),
    };
    let rows = blackbox_suite(&p_grid, &settings, a.phi0.unwrap_or(FRAC_PI_4), a.nu.unwrap_or(100))?;
    let pathological = rows.iter().filter(|r| r.mean_phi.is_nan()).count();
    sink.csv(&io::suite_table(&rows), json!({ "pathological_rows": pathological }))
}

config_struct! {
    /// Write the analytic data behind every figure panel.
    pub struct ReproduceArgs {
        #[arg(long)]
        pub out_dir: Option<PathBuf>,
    }
}
