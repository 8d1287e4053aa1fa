use std::io::BufReader;

use gravdec::crosscheck::{run_crosscheck, CrosscheckConfig, Preset};
use gravdec::emission::{regime_scan, EmissionModel, RadiusScaling, RegimeScan, ScanAxis, SpectralFunction, DEFAULT_PANELS};
use gravdec::internal::load_frequencies;
use gravdec::master_equation::{
    effective_weight, evolve, high_temperature_rate, uniform_grid, CmHamiltonian, DensityMatrixGrid,
    EvolutionConfig, EvolutionForm, DEFAULT_HISTORY_BUDGET,
};
use gravdec::oracle::RNG_NAME;
use gravdec::propertime::{proper_time_difference, semiclassical_visibility, PotentialSpec, TrajectoryPair};
use gravdec::visibility::{
    decoherence_time, decoherence_time_schwarzschild, exact_visibility, gaussian_visibility, hawking_temperature,
    high_temperature_visibility, lab_proper_time_difference, SchwarzschildSpec,
};
use gravdec::{default_constants, InternalStateSpec, LawTag, PhysicalConstants};
use serde_json::{json, Value};

use crate::config::*;
use crate::error::CliError;
use crate::output::{key_value_csv, Metadata, Sink};

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let constants = file.constants.apply(default_constants());
    constants
        .validate()
        .map_err(|e| CliError::Config(format!("constants: {e}")))?;
    let sink = Sink {
        path: cli.output.or(file.output.path),
        format: cli.format.or(file.output.format).unwrap_or(Format::Csv),
    };
    let k = &constants;
    match cli.command {
        Command::Tau(a) => tau(a.overlay(file.tau), k, &sink),
        Command::Visibility(a) => visibility(a.overlay(file.visibility), k, &sink),
        Command::Evolve(a) => evolve_cmd(a.overlay(file.evolve), k, &sink),
        Command::Regime(a) => regime(a.overlay(file.regime), k, &sink),
        Command::Propertime(a) => propertime(a.overlay(file.propertime), k, &sink),
        Command::OracleCheck(a) => oracle_check(a.overlay(file.oracle_check), &sink),
    }
}

fn meta(
    command: &str,
    args: &impl serde::Serialize,
    sink: &Sink,
    k: &PhysicalConstants,
    tags: Vec<String>,
) -> Result<Metadata, CliError> {
    let format = serde_json::to_value(sink.format).map_err(gravdec::Error::from)?;
    let config = json!({ "parameters": serde_json::to_value(args).map_err(gravdec::Error::from)?, "format": format });
    Metadata::new(command, &config, *k, tags)
}

fn to_json(v: &impl serde::Serialize) -> Result<Value, CliError> {
    Ok(serde_json::to_value(v).map_err(gravdec::Error::from)?)
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Core(e.into())
}

fn frequencies(
    list: &Option<Vec<f64>>,
    file: &Option<std::path::PathBuf>,
) -> Result<Option<Vec<f64>>, CliError> {
    match (list, file) {
        (Some(_), Some(_)) => Err(CliError::Config("give either --frequencies or --frequencies-file, not both".into())),
        (Some(l), None) => Ok(Some(l.clone())),
        (None, Some(p)) => Ok(Some(load_frequencies(p)?)),
        (None, None) => Ok(None),
    }
}

fn tau(mut a: TauArgs, k: &PhysicalConstants, sink: &Sink) -> Result<(), CliError> {
    let n = required(&a.n_modes, "--N", "tau.n_modes")?;
    let t = required(&a.temperature, "--T", "tau.temperature")?;
    let dx = required(&a.dx, "--dx", "tau.dx")?;
    let g = *a.g.get_or_insert(k.g_earth);
    let tau_dec = decoherence_time(n, t, dx, g, k)?;
    let mut rows = vec![("tau_dec", tau_dec.to_string())];
    let mut result = serde_json::Map::new();
    result.insert("tau_dec".into(), to_json(&tau_dec)?);
    if let Some(mass) = a.central_mass {
        let body = match a.radius {
            Some(r) => SchwarzschildSpec::new(mass, r, k)?,
            None => SchwarzschildSpec::at_horizon(mass, k)?,
        };
        a.radius = Some(body.radius);
        let ts = decoherence_time_schwarzschild(n, t, dx, &body, k)?;
        let rs = body.schwarzschild_radius(k);
        let th = hawking_temperature(mass, k)?;
        rows.push(("schwarzschild_radius", format!("{rs:e}")));
        rows.push(("surface_gravity", format!("{:e}", body.surface_gravity(k))));
        rows.push(("tau_schwarzschild", ts.to_string()));
        rows.push(("hawking_temperature", format!("{th:e}")));
        result.insert("schwarzschild_radius".into(), json!(rs));
        result.insert("surface_gravity".into(), json!(body.surface_gravity(k)));
        result.insert("tau_schwarzschild".into(), to_json(&ts)?);
        result.insert("hawking_temperature".into(), json!(th));
    }
    let m = meta("tau", &a, sink, k, vec![LawTag::Gaussian.as_str().into()])?;
    sink.emit(&m, |buf| key_value_csv(&rows, buf), || Ok(Value::Object(result)))
}

fn visibility(mut a: VisibilityArgs, k: &PhysicalConstants, sink: &Sink) -> Result<(), CliError> {
    let freqs = frequencies(&a.frequencies, &a.frequencies_file)?;
    let law = *a.law.get_or_insert(if freqs.is_some() { Law::Exact } else { Law::HighT });
    let temperature = required(&a.temperature, "--T", "visibility.temperature")?;
    let g = *a.g.get_or_insert(k.g_earth);

    // axis values and the proper-time difference at each
    let (axis_name, axis, on_dtau) = match &a.dtau {
        Some(d) => ("dtau", d.clone(), true),
        None => {
            let t0 = *a.t_start.get_or_insert(0.0);
            let t1 = required(&a.t_end, "--t-end", "visibility.t_end")?;
            let n = *a.n_points.get_or_insert(101);
            if n < 1 || !(t1 >= t0) || t0 < 0.0 {
                return Err(CliError::Config("need 0 <= t_start <= t_end and n_points >= 1".into()));
            }
            let times = if n == 1 { vec![t0] } else { uniform_grid(t0, t1, n) };
            ("t", times, false)
        }
    };
    let dx = if on_dtau { a.dx.unwrap_or(1.0) } else { required(&a.dx, "--dx", "visibility.dx")? };

    let c2 = k.c2();
    let spec = |freqs: &Option<Vec<f64>>| -> Result<InternalStateSpec, CliError> {
        let f = freqs
            .clone()
            .ok_or_else(|| CliError::Config("this law needs --frequencies or --frequencies-file".into()))?;
        Ok(InternalStateSpec::explicit(temperature, f)?)
    };
    let mut values = Vec::with_capacity(axis.len());
    let tag = match law {
        Law::Exact | Law::Semiclassical => {
            let s = spec(&freqs)?;
            for &x in &axis {
                let dtau = if on_dtau { x } else { lab_proper_time_difference(x, dx, g, k) };
                values.push(match law {
                    Law::Exact => exact_visibility(&s, dtau, k)?,
                    _ => semiclassical_visibility(&s, dtau, k)?,
                });
            }
            if law == Law::Exact { LawTag::ExactProduct } else { LawTag::Semiclassical }
        }
        Law::HighT | Law::Gaussian => {
            let n = match (&freqs, a.n_modes) {
                (_, Some(n)) => n,
                (Some(f), None) => f.len() as f64,
                (None, None) => return Err(CliError::Config("missing --N (or `visibility.n_modes`)".into())),
            };
            a.n_modes = Some(n);
            let f = if law == Law::HighT { high_temperature_visibility } else { gaussian_visibility };
            for &x in &axis {
                // on the dtau axis, unit g and dx with t = |dtau| c^2 give the same angle
                values.push(if on_dtau { f(n, temperature, 1.0, 1.0, x.abs() * c2, k)? } else { f(n, temperature, dx, g, x, k)? });
            }
            if law == Law::HighT { LawTag::HighTemperature } else { LawTag::Gaussian }
        }
    };
    if !on_dtau {
        a.dx = Some(dx);
    }
    let m = meta("visibility", &a, sink, k, vec![tag.as_str().into()])?;
    sink.emit(
        &m,
        |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record([axis_name, "V", "law"]).map_err(csv_error)?;
            for (x, v) in axis.iter().zip(&values) {
                w.write_record([x.to_string(), v.to_string(), tag.as_str().to_string()]).map_err(csv_error)?;
            }
            w.flush()?;
            Ok(())
        },
        || Ok(json!({ "axis": axis_name, axis_name: axis, "V": values, "law": tag.as_str() })),
    )
}

fn evolve_cmd(mut a: EvolveArgs, k: &PhysicalConstants, sink: &Sink) -> Result<(), CliError> {
    let form = *a.form.get_or_insert(Form::Markovian);
    let x1 = required(&a.x1, "--x1", "evolve.x1")?;
    let x2 = required(&a.x2, "--x2", "evolve.x2")?;
    let rho0 = match &a.initial {
        Some(p) => {
            a.state = None;
            DensityMatrixGrid::read_snapshot(BufReader::new(std::fs::File::open(p)?))?.0
        }
        None => match *a.state.get_or_insert(InitialState::TwoPoint) {
            InitialState::TwoPoint => DensityMatrixGrid::two_point(x1, x2)?,
            InitialState::WavePackets => {
                let m = *a.grid_points.get_or_insert(256);
                let lo = required(&a.x_min, "--x-min", "evolve.x_min")?;
                let hi = required(&a.x_max, "--x-max", "evolve.x_max")?;
                let sigma = *a.sigma.get_or_insert((x2 - x1).abs() / 10.0);
                DensityMatrixGrid::wave_packet_pair(uniform_grid(lo, hi, m), x1, x2, sigma)?
            }
        },
    };
    let g = *a.g.get_or_insert(k.g_earth);
    let rate = match a.rate {
        Some(r) => r,
        None => {
            let n = required(&a.n_modes, "--N or --rate", "evolve.n_modes")?;
            let t = required(&a.temperature, "--T or --rate", "evolve.temperature")?;
            let r = high_temperature_rate(n, t, g, k);
            a.rate = Some(r);
            r
        }
    };
    let kind = *a.hamiltonian.get_or_insert(Hamiltonian::None);
    let needs_weight = matches!(kind, Hamiltonian::Linear | Hamiltonian::FreePlusLinear);
    if needs_weight && a.weight.is_none() {
        let mass = required(&a.mass, "--mass or --weight", "evolve.mass")?;
        let e0 = a.n_modes.unwrap_or(0.0) * k.k_b * a.temperature.unwrap_or(0.0);
        a.weight = Some(effective_weight(mass, e0, g, k));
    }
    let h = match kind {
        Hamiltonian::None => CmHamiltonian::None,
        Hamiltonian::Free => CmHamiltonian::Free { mass: required(&a.mass, "--mass", "evolve.mass")? },
        Hamiltonian::Linear => CmHamiltonian::Linear { weight: a.weight.unwrap_or_default() },
        Hamiltonian::FreePlusLinear => CmHamiltonian::FreePlusLinear {
            mass: required(&a.mass, "--mass", "evolve.mass")?,
            weight: a.weight.unwrap_or_default(),
        },
    };
    let form_core = match form {
        Form::Markovian => EvolutionForm::Markovian,
        Form::FullMemory => EvolutionForm::FullMemory,
    };
    let dt = required(&a.dt, "--dt", "evolve.dt")?;
    let t_final = required(&a.t_final, "--t-final", "evolve.t_final")?;
    let mut cfg = EvolutionConfig::new(dt, t_final, form_core, rate)?.with_record_every(*a.record_every.get_or_insert(1));
    cfg.history_budget_bytes = *a.history_budget_bytes.get_or_insert(DEFAULT_HISTORY_BUDGET);
    cfg.validate()?;

    let series = evolve(&rho0, &h, &cfg, k)?;
    if let Some(p) = &a.snapshot {
        let last = series.states.last().expect("series holds the initial state");
        let t = *series.times.last().expect("series holds the initial time");
        let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
        last.write_snapshot(&mut f, t)?;
    }
    let form_tag = match form {
        Form::Markovian => "markovian",
        Form::FullMemory => "full-memory",
    };
    let m = meta("evolve", &a, sink, k, vec![LawTag::MasterEquation.as_str().into(), form_tag.into()])?;
    sink.emit(
        &m,
        |buf| Ok(series.write_csv(buf, x1, x2)?),
        || {
            let (i, j) = (
                series.states[0].index_of(x1).ok_or_else(|| gravdec::Error::Domain(format!("x1 = {x1} is not a grid point")))?,
                series.states[0].index_of(x2).ok_or_else(|| gravdec::Error::Domain(format!("x2 = {x2} is not a grid point")))?,
            );
            let curve = gravdec::master_equation::extract_visibility(&series, x1, x2)?;
            let z: Vec<_> = series.states.iter().map(|s| s.get(i, j)).collect();
            Ok(json!({
                "t": series.times,
                "re_rho12": z.iter().map(|c| c.re).collect::<Vec<_>>(),
                "im_rho12": z.iter().map(|c| c.im).collect::<Vec<_>>(),
                "V": curve.values,
            }))
        },
    )
}

fn logspace(lo: f64, hi: f64, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && hi >= lo && n >= 1) {
        return Err(CliError::Config(format!("{what}: need 0 < min <= max and count >= 1")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

fn regime(mut a: RegimeArgs, k: &PhysicalConstants, sink: &Sink) -> Result<(), CliError> {
    let axis_kind = *a.axis.get_or_insert(Axis::Separation);
    let lo = required(&a.axis_min, "--axis-min", "regime.axis_min")?;
    let hi = required(&a.axis_max, "--axis-max", "regime.axis_max")?;
    let values = logspace(lo, hi, *a.axis_count.get_or_insert(50), "axis")?;
    let temperatures = required(&a.temperatures, "--temperatures", "regime.temperatures")?;
    let number_density = required(&a.number_density, "--number-density", "regime.number_density")?;
    let (axis, radius, separation) = match axis_kind {
        Axis::Radius => (ScanAxis::Radius(values), 0.0, required(&a.separation, "--separation", "regime.separation")?),
        Axis::Separation => (ScanAxis::Separation(values), required(&a.radius, "--radius", "regime.radius")?, 0.0),
    };
    let scaling = match a.scaling_exponent {
        Some(exponent) => RadiusScaling::Power {
            reference_radius: required(&a.reference_radius, "--reference-radius", "regime.reference_radius")?,
            exponent,
        },
        None => RadiusScaling::Fixed,
    };
    let panels = *a.panels.get_or_insert(DEFAULT_PANELS);
    let model = match &a.emission_table {
        Some(p) => EmissionModel::load_table(p)?,
        None => {
            let sigma = SpectralFunction::PowerLaw {
                amplitude: required(&a.sigma_amplitude, "--sigma-amplitude", "regime.sigma_amplitude")?,
                k0: *a.sigma_k0.get_or_insert(1.0),
                exponent: *a.sigma_exponent.get_or_insert(0.0),
            };
            let k_min = required(&a.k_min, "--k-min", "regime.k_min")?;
            let k_max = required(&a.k_max, "--k-max", "regime.k_max")?;
            EmissionModel::blackbody_stand_in(temperatures[0], sigma, k_min, k_max)?
        }
    }
    .with_panels(panels);
    let scan = RegimeScan {
        axis,
        temperatures,
        number_density,
        radius,
        separation,
        g: *a.g.get_or_insert(k.g_earth),
        scaling,
    };
    let map = regime_scan(&scan, &model, k)?;
    let tags = vec!["regime".into(), format!("emission model: {}", model.provenance)];
    let m = meta("regime", &a, sink, k, tags)?;
    sink.emit(&m, |buf| Ok(map.write_csv(buf)?), || to_json(&map))
}

fn propertime(mut a: PropertimeArgs, k: &PhysicalConstants, sink: &Sink) -> Result<(), CliError> {
    let path = required(&a.trajectories, "--trajectories", "propertime.trajectories")?;
    let pair = TrajectoryPair::load_csv(&path, k)?;
    let pot = match *a.potential.get_or_insert(Potential::Homogeneous) {
        Potential::Homogeneous => PotentialSpec::Homogeneous { g: *a.g.get_or_insert(k.g_earth) },
        Potential::SchwarzschildWeak => PotentialSpec::SchwarzschildWeak {
            mass: required(&a.central_mass, "--central-mass", "propertime.central_mass")?,
        },
        Potential::Tabulated => PotentialSpec::load_table(required(
            &a.potential_file,
            "--potential-file",
            "propertime.potential_file",
        )?)?,
    };
    let dtau = proper_time_difference(&pair, &pot, k)?;
    let mut rows = vec![("delta_tau", format!("{dtau:e}"))];
    let mut result = serde_json::Map::new();
    result.insert("delta_tau".into(), json!(dtau));
    let mut tags = vec!["propertime".to_string()];
    if let Some(f) = frequencies(&a.frequencies, &a.frequencies_file)? {
        let t = required(&a.temperature, "--T", "propertime.temperature")?;
        let v = semiclassical_visibility(&InternalStateSpec::explicit(t, f)?, dtau, k)?;
        rows.push(("visibility", v.to_string()));
        result.insert("visibility".into(), json!(v));
        tags.push(LawTag::Semiclassical.as_str().into());
    }
    let m = meta("propertime", &a, sink, k, tags)?;
    sink.emit(&m, |buf| key_value_csv(&rows, buf), || Ok(Value::Object(result)))
}

fn oracle_check(mut a: OracleCheckArgs, sink: &Sink) -> Result<(), CliError> {
    let preset = match *a.preset.get_or_insert(PresetName::Standard) {
        PresetName::Standard => Preset::Standard,
        PresetName::Quick => Preset::Quick,
    };
    let mut cfg = CrosscheckConfig::preset(preset);
    cfg.seed = *a.seed.get_or_insert(cfg.seed);
    cfg.n_cases = *a.n_cases.get_or_insert(cfg.n_cases);
    cfg.n_samples = *a.n_samples.get_or_insert(cfg.n_samples);
    let report = run_crosscheck(&cfg)?;
    let tags = vec![LawTag::Oracle.as_str().into(), format!("rng: {RNG_NAME}"), format!("seed: {}", cfg.seed)];
    // the suite runs in natural units regardless of configured constants
    let m = meta("oracle-check", &a, sink, &PhysicalConstants::natural(), tags)?;
    sink.emit(
        &m,
        |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record([
                "case", "n_modes", "delta_tau", "exact", "mc", "mc_se", "mc_pass", "fock", "fock_bound", "fock_pass",
                "joint", "joint_pass", "pass",
            ])
            .map_err(csv_error)?;
            for c in &report.cases {
                w.write_record([
                    c.index.to_string(),
                    c.frequencies.len().to_string(),
                    c.delta_tau.to_string(),
                    c.exact.to_string(),
                    c.mc.to_string(),
                    c.mc_standard_error.to_string(),
                    c.mc_pass.to_string(),
                    c.fock.to_string(),
                    c.fock_bound.to_string(),
                    c.fock_pass.to_string(),
                    c.joint.to_string(),
                    c.joint_pass.to_string(),
                    c.passed().to_string(),
                ])
                .map_err(csv_error)?;
            }
            w.flush()?;
            Ok(())
        },
        || to_json(&report),
    )?;
    let passed = report.n_passed();
    eprintln!("oracle-check: {passed}/{} cases passed", report.cases.len());
    if passed == report.cases.len() {
        Ok(())
    } else {
        Err(CliError::OracleMismatch { failed: report.cases.len() - passed, total: report.cases.len() })
    }
}
