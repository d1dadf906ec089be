use std::path::Path;

use emcavity::config::{parse_config, SystemParams};
use emcavity::device::{self, ResonatorLumped};
use emcavity::fitting::{
    fit_omit, fit_reflection, linear_grid, omit_model_hz, read_trace, reflection_model_hz, synthesize_trace,
    write_trace, FitResult, OmitFree, OmitMechanics, ReflectionModelParams,
};
use emcavity::physics::{
    cooperativity_with, hz_to_rad, rad_to_hz, thermal_occupation, zero_point_fluctuation, MechParams,
};
use emcavity::response::{bare_reflection, omit_reflection, optomechanical_damping};
use emcavity::tripartite::{
    critical_coupling, sweep_with, CouplingAxis, LogBase, SweepAxis, SweepGrid, SweepParam, SweepStatus,
};
use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::output::{num, write_json, CsvOut, RunManifest};
use crate::*;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut manifest = RunManifest::new();
    match &cli.command {
        Command::Thermal { f_hz, t_k } => {
            let n = thermal_occupation(hz_to_rad(*f_hz), *t_k)?;
            println!("{}", num(n));
            manifest.output(None);
        }
        Command::Reflect(a) => reflect(a, &mut manifest)?,
        Command::Omit(a) => omit(a, &mut manifest)?,
        Command::Damping(a) => damping(a, &mut manifest)?,
        Command::Tripartite(TripartiteCommand::Sweep(a)) => tripartite_sweep(a, &mut manifest)?,
        Command::Tripartite(TripartiteCommand::Critical(a)) => tripartite_critical(a, &mut manifest)?,
        Command::Fit(FitCommand::Reflect(a)) => fit_reflect_cmd(a, &mut manifest)?,
        Command::Fit(FitCommand::Omit(a)) => fit_omit_cmd(a, &mut manifest)?,
        Command::Synth(a) => synth(a, &mut manifest)?,
        Command::Device(DeviceCommand::G0(a)) => device_g0(a, &mut manifest)?,
        Command::Device(DeviceCommand::Meff(a)) => device_meff(a, &mut manifest)?,
        Command::Device(DeviceCommand::Cap(a)) => device_cap(a, &mut manifest)?,
    }
    manifest.emit(cli.manifest.as_deref())
}

fn load_system(path: &Path, manifest: &mut RunManifest) -> Result<SystemParams, CliError> {
    let bytes = manifest.read_input(path)?;
    let text = String::from_utf8(bytes).map_err(|_| CliError::Usage(format!("{}: not UTF-8", path.display())))?;
    let params = parse_config(&text)?.normalize()?;
    for w in &params.warnings {
        warn!("{}: {w}", path.display());
    }
    Ok(params)
}

fn check_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 || !(stop > start) || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Usage("grid needs start < stop and at least one point".into()));
    }
    Ok(linear_grid(start, stop, points))
}

/// Detuning and coupling for the OMIT model.
fn pump_state(sys: &SystemParams, over: &PumpOverride) -> Result<(MechParams, f64, f64), CliError> {
    let mech = sys.require_mech()?;
    let detuning = match (over.detuning_hz, sys.detuning()) {
        (Some(d), _) => hz_to_rad(d),
        (None, Some(d)) => d,
        (None, None) => {
            warn!("no pump configured; using detuning = mechanical frequency");
            mech.omega_m
        }
    };
    let g = match (over.g_hz, sys.g()) {
        (Some(g), _) => hz_to_rad(g),
        (None, Some(g)) => g,
        (None, None) => return Err(CliError::Usage("OMIT needs a coupling block or --g-hz".into())),
    };
    Ok((mech, detuning, g))
}

fn spectrum_row(out: &mut CsvOut, lead: &[String], f: f64, z: Complex64) -> Result<(), CliError> {
    let mut cells = lead.to_vec();
    cells.extend([num(f), num(z.re), num(z.im), num(20.0 * z.norm().log10()), num(z.arg())]);
    out.row(cells)
}

fn reflect(a: &ReflectArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let sys = load_system(&a.config, manifest)?;
    let grid = check_grid(a.f_start_hz, a.f_stop_hz, a.points)?;
    let mut out = CsvOut::new(a.out.as_deref(), &["f_hz", "re", "im", "mag_db", "phase_rad"])?;
    match a.model {
        Model::Bare => {
            for f in grid {
                spectrum_row(&mut out, &[], f, bare_reflection(hz_to_rad(f), &sys.cavity)?)?;
            }
        }
        Model::Omit => {
            let (mech, detuning, g) = pump_state(&sys, &a.pump)?;
            let f_p = rad_to_hz(sys.cavity.omega_c - detuning);
            for f in grid {
                let z = omit_reflection(hz_to_rad(f - f_p), &sys.cavity, &mech, g, detuning);
                spectrum_row(&mut out, &[], f, z)?;
            }
        }
    }
    out.finish()?;
    manifest.output(a.out.as_ref());
    Ok(())
}

fn omit(a: &OmitArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let sys = load_system(&a.config, manifest)?;
    let mech = sys.require_mech()?;
    let g0 = sys
        .coupling
        .ok_or_else(|| CliError::Usage("omit needs a coupling block".into()))?
        .g0;
    let detuning = match (a.detuning_hz, sys.detuning()) {
        (Some(d), _) => hz_to_rad(d),
        (None, Some(d)) => d,
        (None, None) => mech.omega_m,
    };
    let f_p = rad_to_hz(sys.cavity.omega_c - detuning);
    let center = f_p + rad_to_hz(mech.omega_m);
    let span = a.span_hz.unwrap_or(0.25 * rad_to_hz(sys.cavity.kappa()));
    let grid = check_grid(center - 0.5 * span, center + 0.5 * span, a.points)?;
    let mut out = CsvOut::new(
        a.out.as_deref(),
        &["n_cavity", "f_hz", "re", "im", "mag_db", "phase_rad"],
    )?;
    for &n in &a.n_cavity {
        if !(n >= 0.0) {
            return Err(CliError::Usage(format!("n_cavity must be non-negative, got {n}")));
        }
        let g = g0 * n.sqrt();
        for &f in &grid {
            let z = omit_reflection(hz_to_rad(f - f_p), &sys.cavity, &mech, g, detuning);
            spectrum_row(&mut out, &[num(n)], f, z)?;
        }
    }
    out.finish()?;
    manifest.output(a.out.as_ref());
    Ok(())
}

fn damping(a: &DampingArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let sys = load_system(&a.config, manifest)?;
    let mech = sys.require_mech()?;
    let g = match (a.g_hz, sys.g()) {
        (Some(g), _) => hz_to_rad(g),
        (None, Some(g)) => g,
        (None, None) => return Err(CliError::Usage("damping needs a coupling block or --g-hz".into())),
    };
    let kappa = sys.cavity.kappa();
    let c = cooperativity_with(g, kappa, mech.gamma, sys.cooperativity_convention)?;
    let grid = check_grid(a.detuning_start_hz, a.detuning_stop_hz, a.points)?;
    let mut out = CsvOut::new(a.out.as_deref(), &["detuning_hz", "gamma_opt_hz", "cooperativity"])?;
    for d in grid {
        let rate = optomechanical_damping(hz_to_rad(d), g, kappa, mech.omega_m)?;
        out.row([num(d), num(rad_to_hz(rate)), num(c)])?;
    }
    out.finish()?;
    manifest.output(a.out.as_ref());
    Ok(())
}

fn parse_axis(spec: &str) -> Result<SweepAxis, CliError> {
    let bad = || CliError::Usage(format!("axis `{spec}` is not name_hz=start:stop:points"));
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let base = name.strip_suffix("_hz").ok_or_else(bad)?;
    let param = SweepParam::from_name(base).ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    Ok(SweepAxis::linspace(param, hz_to_rad(start), hz_to_rad(stop), n)?)
}

fn tripartite_sweep(a: &SweepArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let sys = load_system(&a.config, manifest)?;
    let base = sys.require_tripartite()?;
    let mut axes = vec![parse_axis(&a.axis)?];
    if let Some(s) = &a.axis2 {
        axes.push(parse_axis(s)?);
    }
    let mut header: Vec<String> = axes.iter().map(|x| format!("{}_hz", x.param.name())).collect();
    header.extend(["stable", "max_re_eig_hz", "zeta_minus", "log_negativity"].map(String::from));
    let grid = SweepGrid { base, axes };
    let log_base = if a.log2 { LogBase::Two } else { LogBase::Natural };
    let rows = sweep_with(&grid, hz_to_rad(a.omega_hz), log_base);
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = CsvOut::new(a.out.as_deref(), &header_refs)?;
    const NA: &str = "NA";
    for row in rows {
        let mut cells: Vec<String> = row.coordinates.iter().map(|v| num(rad_to_hz(*v))).collect();
        match &row.status {
            SweepStatus::Stable {
                max_re_eigenvalue,
                zeta_minus,
                log_negativity,
            } => {
                cells.extend([
                    "true".into(),
                    num(rad_to_hz(*max_re_eigenvalue)),
                    num(*zeta_minus),
                    num(*log_negativity),
                ]);
            }
            SweepStatus::Unstable { max_re_eigenvalue } => {
                cells.extend(["false".into(), num(rad_to_hz(*max_re_eigenvalue)), NA.into(), NA.into()]);
            }
            SweepStatus::Error { message } => {
                warn!("point {:?}: {message}", row.coordinates);
                cells.extend(["error".into(), NA.into(), NA.into(), NA.into()]);
            }
        }
        out.row(cells)?;
    }
    out.finish()?;
    manifest.output(a.out.as_ref());
    Ok(())
}

fn tripartite_critical(a: &CriticalArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let sys = load_system(&a.config, manifest)?;
    let p = sys.require_tripartite()?;
    let axis = match a.axis {
        Axis::GB => CouplingAxis::GB,
        Axis::GC => CouplingAxis::GC,
    };
    let bad = || CliError::Usage(format!("bracket `{}` is not lo,hi", a.bracket_hz));
    let (lo, hi) = a.bracket_hz.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let g = critical_coupling(&p, axis, (hz_to_rad(lo), hz_to_rad(hi)))?;
    println!("{}", num(rad_to_hz(g)));
    manifest.output(None);
    Ok(())
}

/// Reflection parameters as written to and read from fit files.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectionHz {
    pub amplitude: f64,
    pub tau_s: f64,
    pub phi_rad: f64,
    pub f_c_hz: f64,
    pub kappa_in_hz: f64,
    pub kappa_ex_hz: f64,
    pub delta_hz: f64,
}

impl From<&ReflectionModelParams> for ReflectionHz {
    fn from(p: &ReflectionModelParams) -> Self {
        Self {
            amplitude: p.amplitude,
            tau_s: p.tau,
            phi_rad: p.phi,
            f_c_hz: rad_to_hz(p.omega_c),
            kappa_in_hz: rad_to_hz(p.kappa_in),
            kappa_ex_hz: rad_to_hz(p.kappa_ex),
            delta_hz: rad_to_hz(p.delta),
        }
    }
}

impl From<&ReflectionHz> for ReflectionModelParams {
    fn from(p: &ReflectionHz) -> Self {
        Self {
            amplitude: p.amplitude,
            tau: p.tau_s,
            phi: p.phi_rad,
            omega_c: hz_to_rad(p.f_c_hz),
            kappa_in: hz_to_rad(p.kappa_in_hz),
            kappa_ex: hz_to_rad(p.kappa_ex_hz),
            delta: hz_to_rad(p.delta_hz),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Convergence {
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rank_deficient: bool,
    pub message: String,
}

impl<P> From<&FitResult<P>> for Convergence {
    fn from(r: &FitResult<P>) -> Self {
        Self {
            residual_norm: r.residual_norm,
            iterations: r.iterations,
            converged: r.converged,
            rank_deficient: r.rank_deficient,
            message: r.message.clone(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReflectionFitFile {
    pub params: ReflectionHz,
    pub uncertainties: ReflectionHz,
    pub fit: Convergence,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OmitHz {
    pub g_hz: f64,
    pub gamma_hz: f64,
    pub f_m_hz: f64,
    pub detuning_hz: f64,
}

impl From<&OmitMechanics> for OmitHz {
    fn from(m: &OmitMechanics) -> Self {
        Self {
            g_hz: rad_to_hz(m.g),
            gamma_hz: rad_to_hz(m.gamma),
            f_m_hz: rad_to_hz(m.omega_m),
            detuning_hz: rad_to_hz(m.detuning),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OmitFitFile {
    pub params: OmitHz,
    pub uncertainties: OmitHz,
    pub fit: Convergence,
}

fn load_trace_input(
    path: &Path,
    format: Format,
    manifest: &mut RunManifest,
) -> Result<emcavity::fitting::ComplexTrace, CliError> {
    let bytes = manifest.read_input(path)?;
    Ok(read_trace(
        bytes.as_slice(),
        format.into(),
        &path.display().to_string(),
    )?)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, manifest: &mut RunManifest) -> Result<T, CliError> {
    let bytes = manifest.read_input(path)?;
    serde_json::from_slice(&bytes).map_err(|e| {
        CliError::Lib(emcavity::error::Error::Config {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    })
}

fn report_convergence(c: &Convergence) {
    if !c.converged {
        warn!("fit did not converge: {}", c.message);
    }
    if c.rank_deficient {
        warn!("Jacobian is rank deficient at the optimum; some parameters are not identifiable");
    }
}

fn fit_reflect_cmd(a: &FitReflectArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let trace = load_trace_input(&a.input, a.format, manifest)?;
    let guess = match &a.guess {
        Some(p) => Some(ReflectionModelParams::from(
            &read_json::<ReflectionFitFile>(p, manifest)?.params,
        )),
        None => None,
    };
    let r = fit_reflection(&trace, guess)?;
    let file = ReflectionFitFile {
        params: (&r.params).into(),
        uncertainties: (&r.param_uncertainties).into(),
        fit: (&r).into(),
    };
    report_convergence(&file.fit);
    write_json(a.out.as_deref(), &file)?;
    manifest.output(a.out.as_ref());
    Ok(())
}

fn fit_omit_cmd(a: &FitOmitArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let trace = load_trace_input(&a.input, a.format, manifest)?;
    let cavity = ReflectionModelParams::from(&read_json::<ReflectionFitFile>(&a.cavity, manifest)?.params);
    let free = match a.free {
        Free::OmegaM => OmitFree::MechanicalFrequency,
        Free::Detuning => OmitFree::Detuning,
    };
    let r = fit_omit(&trace, &cavity, hz_to_rad(a.detuning_hz), None, free)?;
    let file = OmitFitFile {
        params: (&r.params).into(),
        uncertainties: (&r.param_uncertainties).into(),
        fit: (&r).into(),
    };
    report_convergence(&file.fit);
    write_json(a.out.as_deref(), &file)?;
    manifest.output(a.out.as_ref());
    Ok(())
}

fn synth(a: &SynthArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let sys = load_system(&a.config, manifest)?;
    manifest.seed = Some(a.seed);
    let f_c = rad_to_hz(sys.cavity.omega_c);
    let half = 10.0 * rad_to_hz(sys.cavity.kappa());
    let grid = check_grid(
        a.f_start_hz.unwrap_or(f_c - half),
        a.f_stop_hz.unwrap_or(f_c + half),
        a.points,
    )?;
    let line = ReflectionModelParams {
        amplitude: a.amplitude,
        tau: a.tau_s,
        phi: a.phi_rad,
        omega_c: sys.cavity.omega_c,
        kappa_in: sys.cavity.kappa_in,
        kappa_ex: sys.cavity.kappa_ex,
        delta: hz_to_rad(a.delta_hz),
    };
    let trace = match a.model {
        Model::Bare => synthesize_trace(&grid, |f| reflection_model_hz(f, &line), a.snr_db, a.seed)?,
        Model::Omit => {
            let (mech, detuning, g) = pump_state(&sys, &a.pump)?;
            let m = OmitMechanics {
                g,
                gamma: mech.gamma,
                omega_m: mech.omega_m,
                detuning,
            };
            synthesize_trace(&grid, |f| omit_model_hz(f, &line, &m), a.snr_db, a.seed)?
        }
    };
    let w = crate::output::open_out(a.out.as_deref())?;
    write_trace(w, &trace, a.format.into())?;
    manifest.output(a.out.as_ref());
    Ok(())
}

fn load_volume(path: &Path, manifest: &mut RunManifest) -> Result<device::VolumeSampleSet, CliError> {
    let bytes = manifest.read_input(path)?;
    device::read_volume_samples(bytes.as_slice()).map_err(|e| with_file(path, e))
}

fn with_file(path: &Path, e: emcavity::error::Error) -> CliError {
    use emcavity::error::Error as E;
    match e {
        E::Load { line, msg } => CliError::Lib(E::Load {
            line,
            msg: format!("{}: {msg}", path.display()),
        }),
        other => CliError::Lib(other),
    }
}

fn load_lumped(path: &Path, manifest: &mut RunManifest) -> Result<ResonatorLumped, CliError> {
    let r: ResonatorLumped = read_json(path, manifest)?;
    r.validate()?;
    Ok(r)
}

#[derive(Debug, Serialize)]
struct G0Report {
    alpha_m: f64,
    m_eff_kg: f64,
    c_m_f: f64,
    eta: f64,
    f_c_hz: f64,
    x_zpf_m: f64,
    relative_dc_dalpha_per_m: f64,
    g0_hz: f64,
}

fn device_g0(a: &G0Args, manifest: &mut RunManifest) -> Result<(), CliError> {
    let volume = load_volume(&a.volume, manifest)?;
    let mut surfaces = Vec::new();
    for p in &a.surface {
        let bytes = manifest.read_input(p)?;
        surfaces.push(
            device::read_surface_samples(bytes.as_slice(), &p.display().to_string()).map_err(|e| with_file(p, e))?,
        );
    }
    let lumped = load_lumped(&a.lumped, manifest)?;
    let alpha = device::max_displacement(&volume)?;
    let m_eff = device::effective_mass(&volume)?;
    let c_m = device::capacitance_from_energy(&volume, a.voltage)?;
    let eta = device::participation_ratio(c_m, lumped.stray_capacitance)?;
    let omega_c = device::lc_frequency(&lumped, c_m)?;
    let x_zpf = match (a.x_zpf_m, a.f_m_hz) {
        (Some(x), _) => x,
        (None, Some(f)) => zero_point_fluctuation(m_eff, hz_to_rad(f))?,
        (None, None) => return Err(CliError::Usage("need --f-m-hz or --x-zpf-m".into())),
    };
    let rel = device::relative_capacitance_derivative(&surfaces, &volume)?;
    let g0 = device::coupling_rate_moving_boundary(&surfaces, &volume, eta, omega_c, x_zpf)?;
    let report = G0Report {
        alpha_m: alpha,
        m_eff_kg: m_eff,
        c_m_f: c_m,
        eta,
        f_c_hz: rad_to_hz(omega_c),
        x_zpf_m: x_zpf,
        relative_dc_dalpha_per_m: rel,
        g0_hz: rad_to_hz(g0),
    };
    write_json(a.out.as_deref(), &report)?;
    manifest.output(a.out.as_ref());
    Ok(())
}

fn device_meff(a: &VolumeArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let volume = load_volume(&a.volume, manifest)?;
    let report = serde_json::json!({
        "alpha_m": device::max_displacement(&volume)?,
        "m_eff_kg": device::effective_mass(&volume)?,
    });
    write_json(a.out.as_deref(), &report)?;
    manifest.output(a.out.as_ref());
    Ok(())
}

fn device_cap(a: &CapArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let volume = load_volume(&a.volume, manifest)?;
    let c_m = device::capacitance_from_energy(&volume, a.voltage)?;
    let mut report = serde_json::json!({ "c_m_f": c_m });
    if let Some(p) = &a.lumped {
        let lumped = load_lumped(p, manifest)?;
        report["eta"] = device::participation_ratio(c_m, lumped.stray_capacitance)?.into();
        report["f_c_hz"] = rad_to_hz(device::lc_frequency(&lumped, c_m)?).into();
    }
    write_json(a.out.as_deref(), &report)?;
    manifest.output(a.out.as_ref());
    Ok(())
}
