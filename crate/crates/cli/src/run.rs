use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use halfspec::covops::{cov_point, cov_slice_fft, DEFAULT_N_GRID, DEFAULT_OMEGA_MAX};
use halfspec::dataio::{
    self, east_west_direction, read_data_path, DataHeader, PreprocessOptions, RawStationTable, TransformOrder,
};
use halfspec::exactlik::exact_loglik;
use halfspec::fit::{default_init, fit_data, FitOptions, Method};
use halfspec::model::{CovModel, Family, Param, ParamVector, ModelSpec};
use halfspec::quad::QuadSpec;
use halfspec::spectrum::{check_model, smoothness_report, ConditionOptions};
use halfspec::whittle::{whittle_loglik_model, RegularMonitoringData, DEFAULT_ALIAS_M};
use halfspec::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use crate::config::{Cli, Command, MethodArg, ModelArgs, RunConfig};

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Simulate { model, sites, random_sites, extent, n, seed } => {
            let seed = seed.or(cfg.seed).unwrap_or(0);
            let coords = load_sites(sites.as_deref(), &cfg, *random_sites, *extent, model.dim.or(cfg.d), seed)?;
            let spec = resolve_model(model, &cfg, Some(coords[0].len()), None)?;
            let n = n.or(cfg.n).ok_or_else(|| Error::Param("simulate needs --n".into()))?;
            let data = dataio::simulate(&spec.build()?, &coords, n, seed)?;
            let mut buf = Vec::new();
            dataio::write_data(&mut buf, &DataHeader::for_data(&data), &data)?;
            emit(out, &buf)
        }
        Command::Preprocess { input, drop, harmonics, per_station, harmonics_first } => {
            let raw = RawStationTable::read_csv_path(input)?;
            let opts = PreprocessOptions {
                n_harmonics: *harmonics,
                drop: drop.clone(),
                pooled: !per_station,
                order: if *harmonics_first { TransformOrder::HarmonicsFirst } else { TransformOrder::SqrtFirst },
            };
            let prep = dataio::preprocess(&raw, &opts)?;
            let mut buf = Vec::new();
            dataio::write_data(&mut buf, &prep.header(), &prep.data)?;
            emit(out, &buf)
        }
        Command::Cov { model, s, t, grid, contour, n_grid, omega_max, t_max, s_max, s_steps, direction } => {
            let spec = resolve_model(model, &cfg, None, None)?;
            let m = spec.build()?;
            let n_grid = n_grid.or(cfg.n_grid).unwrap_or(DEFAULT_N_GRID);
            let omega_max = omega_max.or(cfg.omega_max).unwrap_or(DEFAULT_OMEGA_MAX);
            let zero = vec![0.0; spec.d];
            if *contour {
                let mut u = direction.clone().unwrap_or_else(|| zero.clone());
                if direction.is_none() {
                    u[0] = 1.0;
                }
                check_len(&u, spec.d, "direction")?;
                let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(un > 0.0) || *s_steps < 2 {
                    return Err(Error::Param("contour needs a nonzero direction and at least 2 distances".into()));
                }
                let mut csv = String::from("s,t,value\n");
                for i in 0..*s_steps {
                    let r = s_max * i as f64 / (*s_steps - 1) as f64;
                    let lag: Vec<f64> = u.iter().map(|x| x / un * r).collect();
                    for (tt, v) in time_slice(&m, &lag, *t_max, n_grid, omega_max)? {
                        writeln!(csv, "{r},{tt},{v}").expect("string write");
                    }
                }
                emit(out, csv.as_bytes())
            } else if *grid {
                let lag = s.clone().unwrap_or(zero);
                check_len(&lag, spec.d, "s")?;
                let mut csv = String::from("t,value\n");
                for (tt, v) in time_slice(&m, &lag, *t_max, n_grid, omega_max)? {
                    writeln!(csv, "{tt},{v}").expect("string write");
                }
                emit(out, csv.as_bytes())
            } else {
                let lag = s.clone().unwrap_or(zero);
                check_len(&lag, spec.d, "s")?;
                let t = t.unwrap_or(0.0);
                let result = match &m {
                    CovModel::Half(h) => serde_json::to_value(cov_point(h, &lag, t, &QuadSpec::default())?)?,
                    CovModel::G(g) => json!({"value": g.cov_vec(&lag, t)}),
                };
                emit_json(out, json!({"command": "cov", "model": spec, "s": lag, "t": t, "result": result}))
            }
        }
        Command::Spectrum { model, full, s, lambda, omega } => {
            let spec = resolve_model(model, &cfg, None, None)?;
            let m = spec.build()?;
            let h = m.as_half()?;
            let zero = vec![0.0; spec.d];
            let rows: Vec<Value> = if *full {
                let l = lambda.clone().unwrap_or(zero);
                check_len(&l, spec.d, "lambda")?;
                omega
                    .iter()
                    .map(|&w| Ok(json!({"omega": w, "value": h.full_spectrum(&l, w)?})))
                    .collect::<Result<_>>()?
            } else {
                let lag = s.clone().unwrap_or(zero);
                check_len(&lag, spec.d, "s")?;
                omega
                    .iter()
                    .map(|&w| {
                        let v = h.half_spectrum(&lag, w)?;
                        Ok(json!({"omega": w, "re": v.re, "im": v.im}))
                    })
                    .collect::<Result<_>>()?
            };
            let kind = if *full { "full" } else { "half" };
            emit_json(out, json!({"command": "spectrum", "kind": kind, "model": spec, "values": rows}))
        }
        Command::CheckCond { model, radius, grid_density, norms } => {
            let spec = resolve_model(model, &cfg, None, None)?;
            let m = spec.build()?;
            let mut opts = ConditionOptions { radius: *radius, grid_density: *grid_density, ..ConditionOptions::default() };
            if let Some(n) = norms {
                opts.norms = n.clone();
            }
            let report = check_model(m.as_half()?, &opts)?;
            emit_json(out, json!({"command": "check-cond", "model": spec, "result": report}))
        }
        Command::Smoothness { model } => {
            let spec = resolve_model(model, &cfg, None, None)?;
            let m = spec.build()?;
            let report = smoothness_report(m.as_half()?)?;
            emit_json(out, json!({"command": "smoothness", "model": spec, "result": report}))
        }
        Command::Fit { method, model, data, fix, free_rho, max_evals, restarts, trace } => {
            let path = data_path(data.as_deref(), &cfg)?;
            let (header, data) = read_data_path(&path)?;
            let family = resolve_family(model, &cfg)?;
            let phi = resolve_phi(model, &cfg, &header)?;
            let mut init = default_init(family, &data);
            init.merge(&cfg.params);
            init.merge(&model.flag_params()?);
            if *free_rho && !init.contains(Param::Rho) {
                init.set(Param::Rho, 0.0);
            }
            let mut fixed = cfg.fixed.clone();
            if let Some(f) = fix {
                fixed.merge(&ParamVector::parse_pairs(f)?);
            }
            let defaults = FitOptions::default();
            let opts = FitOptions {
                max_evals: max_evals.or(cfg.max_evals).unwrap_or(defaults.max_evals),
                restarts: restarts.or(cfg.restarts).unwrap_or(defaults.restarts),
                keep_trace: trace.is_some(),
                ..defaults
            };
            let result = fit_data(to_method(*method), family, &data, phi.as_deref(), &fixed, &init, &opts)?;
            if let Some(t) = trace {
                std::fs::write(t, result.trace_csv())?;
            }
            emit_json(
                out,
                json!({
                    "command": "fit",
                    "method": to_method(*method),
                    "family": family,
                    "data": path,
                    "p": data.p(),
                    "n": data.n(),
                    "phi": phi,
                    "init": init,
                    "fixed": fixed,
                    "options": opts,
                    "result": result,
                }),
            )
        }
        Command::Loglik { method, model, data } => {
            let path = data_path(data.as_deref(), &cfg)?;
            let (header, data) = read_data_path(&path)?;
            let phi = resolve_phi(model, &cfg, &header)?;
            let spec = resolve_model(model, &cfg, Some(data.coords[0].len()), phi)?;
            let m = spec.build()?;
            let ll = loglik(*method, &m, &data, cfg.alias_m.unwrap_or(DEFAULT_ALIAS_M))?;
            emit_json(
                out,
                json!({"command": "loglik", "method": to_method(*method), "model": spec, "data": path, "loglik": ll}),
            )
        }
        Command::Report { input } => {
            let v: Value = serde_json::from_str(&std::fs::read_to_string(input)?)?;
            emit(out, report(&v)?.as_bytes())
        }
    }
}

fn to_method(m: MethodArg) -> Method {
    match m {
        MethodArg::Whittle => Method::Whittle,
        MethodArg::Exact => Method::Exact,
    }
}

fn loglik(method: MethodArg, m: &CovModel, data: &RegularMonitoringData, alias_m: usize) -> Result<f64> {
    match method {
        MethodArg::Whittle => whittle_loglik_model(m, data, alias_m),
        MethodArg::Exact => exact_loglik(m, data),
    }
}

fn check_len(v: &[f64], d: usize, what: &str) -> Result<()> {
    if v.len() != d {
        return Err(Error::Param(format!("{what} has {} components, model dimension is {d}", v.len())));
    }
    Ok(())
}

fn resolve_family(args: &ModelArgs, cfg: &RunConfig) -> Result<Family> {
    match &args.family {
        Some(f) => f.parse(),
        None => cfg.family.ok_or_else(|| Error::Param("no model family given (--family)".into())),
    }
}

fn resolve_model(args: &ModelArgs, cfg: &RunConfig, d_data: Option<usize>, phi: Option<Vec<f64>>) -> Result<ModelSpec> {
    let family = resolve_family(args, cfg)?;
    let mut params = family.defaults();
    params.merge(&cfg.params);
    params.merge(&args.flag_params()?);
    let d = match (args.dim.or(cfg.d), d_data) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Param(format!("dimension {a} given but the sites have dimension {b}")))
        }
        (a, b) => a.or(b).unwrap_or(2),
    };
    let phi = args.phase_dir.clone().or_else(|| cfg.phi.clone()).or(phi);
    Ok(ModelSpec { family, params, d, phi })
}

/// Phase direction: explicit, else east-west at the site centroid for geographic data.
fn resolve_phi(args: &ModelArgs, cfg: &RunConfig, header: &DataHeader) -> Result<Option<Vec<f64>>> {
    if let Some(p) = args.phase_dir.clone().or_else(|| cfg.phi.clone()) {
        return Ok(Some(p));
    }
    match &header.lonlat {
        Some(ll) => {
            let pts: Vec<(f64, f64)> = ll.iter().map(|p| (p[0], p[1])).collect();
            Ok(Some(east_west_direction(&pts)?.to_vec()))
        }
        None => Ok(None),
    }
}

fn data_path(flag: Option<&Path>, cfg: &RunConfig) -> Result<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.data.clone())
        .ok_or_else(|| Error::Param("no data file given (--data)".into()))
}

fn load_sites(
    path: Option<&Path>,
    cfg: &RunConfig,
    random: Option<usize>,
    extent: f64,
    d: Option<usize>,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let sites = if let Some(p) = path {
        let text = std::fs::read_to_string(p)?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                l.split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Parse(format!("sites line {}: {e}", i + 1))))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?
    } else if let Some(s) = &cfg.sites {
        s.clone()
    } else if let Some(p) = random {
        let d = d.unwrap_or(2);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(1);
        (0..p).map(|_| (0..d).map(|_| extent * rng.random::<f64>()).collect()).collect()
    } else {
        return Err(Error::Param("simulate needs --sites or --random-sites".into()));
    };
    if sites.is_empty() || sites.iter().any(|s| s.is_empty() || s.len() != sites[0].len()) {
        return Err(Error::Data("sites must be non-empty with a common dimension".into()));
    }
    Ok(sites)
}

/// Grid values of K(s, ·) for |t| ≤ t_max, thinned to roughly 200 points per unit.
fn time_slice(m: &CovModel, lag: &[f64], t_max: f64, n_grid: usize, omega_max: f64) -> Result<Vec<(f64, f64)>> {
    match m {
        CovModel::Half(h) => {
            let g = cov_slice_fft(h, lag, n_grid, omega_max)?;
            let dt = g.t_grid[1] - g.t_grid[0];
            let stride = ((0.005 / dt).round() as usize).max(1);
            let mid = n_grid / 2;
            Ok(g.t_grid
                .iter()
                .zip(&g.values)
                .enumerate()
                .filter(|(i, (t, _))| i.abs_diff(mid) % stride == 0 && t.abs() <= t_max + 1e-12)
                .map(|(_, (t, v))| (*t, *v))
                .collect())
        }
        CovModel::G(g) => {
            let steps = (t_max / 0.005).round() as i64;
            Ok((-steps..=steps).map(|j| {
                let t = j as f64 * 0.005;
                (t, g.cov_vec(lag, t))
            })
            .collect())
        }
    }
}

fn report(v: &Value) -> Result<String> {
    let r = v.get("result").unwrap_or(v);
    let params = r
        .get("params")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Parse("input is not a fit result".into()))?;
    let se = r.get("se").and_then(Value::as_object);
    let free: Vec<&str> =
        r.get("free").and_then(Value::as_array).map(|a| a.iter().filter_map(Value::as_str).collect()).unwrap_or_default();
    let ll = r.get("loglik").and_then(Value::as_f64).unwrap_or(f64::NAN);
    let mut s = String::new();
    if let Some(f) = v.get("family").or_else(|| r.get("family")).and_then(Value::as_str) {
        writeln!(s, "family      {f}").expect("string write");
    }
    if let Some(m) = v.get("method").and_then(Value::as_str) {
        writeln!(s, "method      {m}").expect("string write");
    }
    writeln!(s, "loglik      {ll:.4}").expect("string write");
    writeln!(s, "free params {}", free.len()).expect("string write");
    writeln!(s, "AIC         {:.4}", -2.0 * ll + 2.0 * free.len() as f64).expect("string write");
    writeln!(s).expect("string write");
    writeln!(s, "{:<10} {:>14} {:>14}  status", "param", "estimate", "std.err").expect("string write");
    for (k, val) in params {
        let est = val.as_f64().unwrap_or(f64::NAN);
        let is_free = free.contains(&k.as_str());
        let err = se.and_then(|m| m.get(k)).and_then(Value::as_f64);
        let err = match (is_free, err) {
            (true, Some(e)) => format!("{e:.6}"),
            (true, None) => "n/a".into(),
            (false, _) => "-".into(),
        };
        writeln!(s, "{k:<10} {est:>14.6} {err:>14}  {}", if is_free { "free" } else { "fixed" })
            .expect("string write");
    }
    if let Some(c) = r.get("converged").and_then(Value::as_bool) {
        writeln!(s, "\nconverged   {c}").expect("string write");
    }
    Ok(s)
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(bytes)?;
            o.flush()?;
        }
    }
    Ok(())
}

fn emit_json(path: Option<&Path>, v: Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    emit(path, s.as_bytes())
}
