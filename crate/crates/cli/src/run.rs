use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use adjoint::{AdjointSampling, GuardRegion};
use conditions::{ConditionReport, ConicRegion, DirectionSet, Sampling, ScanMode, ScanOptions};
use epsnet::{Complex64, EpsGrid, EpsNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use symbols::{SymbolFamily, SymbolJson};
use symexpr::{parse_with_nets, Expr, NamedNet, NetTable};
use wavefront::{SpectrumCache, WaveParams};

use crate::builtins;
use crate::config::{CheckSpec, EpsSpec, NetSpec, RunConfig, SymbolSpec};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Machine-readable error carried by a report or printed on exit 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorObject {
    pub kind: String,
    pub message: String,
}

impl From<&CliError> for ErrorObject {
    fn from(e: &CliError) -> Self {
        let kind = match e {
            CliError::Io { .. } => "io",
            CliError::Json(_) => "json",
            CliError::Config(_) => "config",
            CliError::Check(_) => "check",
        };
        ErrorObject { kind: kind.into(), message: e.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub index: usize,
    pub op: String,
    pub status: Status,
    pub witnesses: usize,
    pub summary: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    /// file names, relative to the output directory
    pub csv: Vec<String>,
    pub report: Value,
    pub error: Option<ErrorObject>,
    #[serde(skip)]
    pub csv_data: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub config_hash: String,
    pub toolkit_version: String,
    pub symbol: SymbolJson,
    pub eps_grid: Vec<f64>,
    pub checks: Vec<CheckOutcome>,
    pub exit_code: i32,
    /// the only field that differs between identical runs
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn passed(&self) -> bool {
        self.exit_code == 0
    }
}

/// sha256 of the canonical JSON (sorted keys, no whitespace) of the parsed config.
pub fn config_hash(cfg: &RunConfig) -> String {
    let v = serde_json::to_value(cfg).expect("config serializes");
    hex::encode(Sha256::digest(serde_json::to_string(&v).expect("value serializes").as_bytes()))
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Json(e.to_string()))?;
    if cfg.checks.is_empty() {
        return Err(CliError::Config("checks list is empty".into()));
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

/// `MICROHYP_CACHE_DIR`, else `$HOME/.cache/microhyp`, else a temp directory.
pub fn cache_dir() -> PathBuf {
    if let Some(d) = std::env::var_os("MICROHYP_CACHE_DIR") {
        return PathBuf::from(d);
    }
    match std::env::var_os("HOME") {
        Some(h) => PathBuf::from(h).join(".cache").join("microhyp"),
        None => std::env::temp_dir().join("microhyp-cache"),
    }
}

/// Everything a check needs, resolved once per run.
pub struct Context {
    pub symbol: SymbolFamily,
    pub nets: NetTable,
    pub grid: EpsGrid,
    pub region: ConicRegion,
    pub sampling: Sampling,
    pub adjoint: AdjointSampling,
    pub hash: String,
}

fn cfg_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn build_grid(spec: &EpsSpec) -> Result<EpsGrid, CliError> {
    match spec {
        EpsSpec::Dyadic { count } => EpsGrid::dyadic(1, *count),
        EpsSpec::Reciprocal { count } => EpsGrid::reciprocal(*count),
        EpsSpec::ReciprocalMidpoints { count } => EpsGrid::reciprocal_midpoints(*count),
        EpsSpec::Explicit { values } => {
            let mut v = values.clone();
            v.sort_by(|a, b| b.total_cmp(a));
            EpsGrid::new(v, epsnet::GridKind::Explicit)
        }
    }
    .map_err(cfg_err)
}

fn build_net(name: &str, spec: &NetSpec, grid: &EpsGrid) -> Result<NamedNet, CliError> {
    let net = match spec {
        NetSpec::Resonance { on, off } => {
            let (on, off) = (Complex64::new(on[0], on[1]), Complex64::new(off[0], off[1]));
            EpsNet::from_fn(grid, |e| if EpsGrid::is_resonant(e) { on } else { off }).map_err(cfg_err)?
        }
        NetSpec::Csv { path } => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            let net = epsnet::read_csv(&text).map_err(cfg_err)?;
            if net.grid().values() != grid.values() {
                return Err(CliError::Config(format!("net {name} does not sample the run's eps grid")));
            }
            net
        }
    };
    Ok(NamedNet { name: name.to_string(), net })
}

impl Context {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let builtin = match &cfg.symbol {
            SymbolSpec::Builtin(name) => {
                Some(builtins::info(name).ok_or_else(|| CliError::Config(format!("unknown built-in {name:?}")))?)
            }
            SymbolSpec::Inline(_) => None,
        };
        let grid = match (&cfg.grids.eps, builtin) {
            (Some(s), _) => build_grid(s)?,
            (None, Some(b)) => builtins::default_grid(b.name),
            (None, None) => EpsGrid::default_dyadic(),
        };
        let mut nets = NetTable::new();
        for (name, spec) in &cfg.nets {
            nets.insert(name.clone(), std::sync::Arc::new(build_net(name, spec, &grid)?));
        }
        let symbol = match (&cfg.symbol, builtin) {
            (_, Some(b)) => {
                let (p, own) = builtins::resolve(b.name, &grid).expect("catalog entries resolve");
                for (k, v) in own {
                    if nets.contains_key(&k) {
                        return Err(CliError::Config(format!("net {k:?} is defined by the built-in {}", b.name)));
                    }
                    nets.insert(k, v);
                }
                p
            }
            (SymbolSpec::Inline(j), None) => SymbolFamily::from_json_value(j, &nets).map_err(cfg_err)?,
            (SymbolSpec::Builtin(_), None) => unreachable!("resolved above"),
        };
        let n = symbol.dim();
        let (lo, hi, dirs) = match (&cfg.region, builtin) {
            (Some(r), _) => (r.lo.clone(), r.hi.clone(), r.directions.clone()),
            (None, Some(b)) => (b.default_lo.to_vec(), b.default_hi.to_vec(), None),
            (None, None) => return Err(CliError::Config("an inline symbol needs a region".into())),
        };
        if lo.len() != n || hi.len() != n {
            return Err(CliError::Config(format!("region of dimension {} for a symbol in {n} variables", lo.len())));
        }
        let dirs = dirs.unwrap_or(DirectionSet::Sphere {
            count: cfg.grids.directions.unwrap_or_else(|| conditions::default_direction_count(n)),
        });
        let region = ConicRegion::new(lo, hi, dirs).map_err(cfg_err)?;

        let radii = &cfg.grids.radii;
        let mut sampling = Sampling::default();
        let mut adj = AdjointSampling::default();
        let radius_net = match (radii.min, radii.radius_net, builtin.and_then(|b| builtins::default_radius(b.name))) {
            (Some(v), _, _) => Some(epsnet::RadiusNet::Constant { value: v }),
            (None, Some(r), _) => Some(r),
            (None, None, d) => d,
        };
        if let Some(r) = radius_net {
            sampling.radius_net = r;
            adj.radius_net = r;
        }
        if let Some(m) = radii.max {
            sampling.r_max = m;
            adj.r_max = m;
        }
        if let Some(c) = radii.count {
            sampling.radii = c;
            adj.radii = c;
        }
        Ok(Context { symbol, nets, grid, region, sampling, adjoint: adj, hash: config_hash(cfg) })
    }

    fn expr(&self, src: &str) -> Result<Expr, CliError> {
        parse_with_nets(src, self.symbol.dim(), &self.nets).map_err(|e| CliError::Config(format!("{src:?}: {e}")))
    }
}

fn outcome(index: usize, op: &str) -> CheckOutcome {
    CheckOutcome {
        index,
        op: op.to_string(),
        status: Status::Pass,
        witnesses: 0,
        summary: BTreeMap::new(),
        notes: Vec::new(),
        csv: Vec::new(),
        report: Value::Null,
        error: None,
        csv_data: Vec::new(),
    }
}

fn set_pass(o: &mut CheckOutcome, pass: bool) {
    o.status = if pass { Status::Pass } else { Status::Fail };
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn from_condition(o: &mut CheckOutcome, r: &ConditionReport) {
    set_pass(o, r.pass);
    o.witnesses = r.witnesses.len();
    o.summary.extend(r.fitted.iter().map(|(k, v)| (k.clone(), *v)));
    for part in &r.parts {
        o.summary.insert(format!("{}.pass", serde_json::to_string(&part.condition).unwrap_or_default().trim_matches('"')), f64::from(u8::from(part.pass)));
    }
    o.report = to_value(r);
}

fn check_err(e: impl std::fmt::Display) -> CliError {
    CliError::Check(e.to_string())
}

/// Angle in degrees folded onto `[0, 90]`, i.e. `atan(|tau| / |xi|)`.
fn folded(deg: f64) -> f64 {
    deg.to_radians().tan().abs().atan().to_degrees()
}

fn add_csv(o: &mut CheckOutcome, name: String, data: String) {
    o.csv.push(name.clone());
    o.csv_data.push((name, data));
}

fn run_check(ctx: &Context, index: usize, spec: &CheckSpec, cache: Option<&SpectrumCache>) -> Result<CheckOutcome, CliError> {
    let mut o = outcome(index, spec.op());
    let (p, g, region, s) = (&ctx.symbol, &ctx.grid, &ctx.region, &ctx.sampling);
    let ctx_key = format!("{}#{index}", ctx.hash);
    let cache = cache.map(|c| (c, ctx_key.as_str()));
    match spec {
        CheckSpec::Mh1 { m0 } => from_condition(&mut o, &conditions::check_mh1(p, region, g, *m0, s).map_err(check_err)?),
        CheckSpec::Mh2 { rho, delta, alpha_max } => {
            from_condition(&mut o, &conditions::check_mh2(p, region, g, *rho, *delta, *alpha_max, s).map_err(check_err)?)
        }
        CheckSpec::Principal { gamma_max } => {
            from_condition(&mut o, &conditions::check_principal(p, region, g, *gamma_max, s).map_err(check_err)?)
        }
        CheckSpec::Wh {} => {
            from_condition(&mut o, &conditions::check_wh_elliptic(p, &region.lo, &region.hi, g, s).map_err(check_err)?)
        }
        CheckSpec::FirstOrder { k_max } => {
            from_condition(&mut o, &conditions::check_first_order(p, region, g, *k_max, s).map_err(check_err)?)
        }
        CheckSpec::CrossCheck {} => match conditions::cross_check_st_implies_mh(p, region, g, s) {
            Ok(c) => {
                set_pass(&mut o, c.agree);
                o.witnesses = c.mh1.witnesses.len() + c.mh2.witnesses.len();
                o.report = to_value(&c);
            }
            Err(conditions::ConditionError::Precondition(msg)) => {
                set_pass(&mut o, false);
                o.notes.push(msg);
                o.witnesses = 1;
            }
            Err(e) => return Err(check_err(e)),
        },
        CheckSpec::ScanMg { principal, m0, rho, delta, alpha_max, direction_count, cells_per_dim, expect_slopes } => {
            let mode = if *principal {
                ScanMode::St { gamma_max: *alpha_max }
            } else {
                ScanMode::Mh { m0: *m0, rho: *rho, delta: *delta, alpha_max: *alpha_max }
            };
            let opts = ScanOptions { cells_per_dim: *cells_per_dim, sampling: s.clone(), ..ScanOptions::new(*direction_count) };
            let r = conditions::scan_mg(p, &region.lo, &region.hi, g, &mode, &opts).map_err(check_err)?;
            let cell = 360.0 / *direction_count as f64;
            o.summary.insert("cell_degrees".into(), cell);
            let mut all_bounds = Vec::new();
            for c in 0..r.cells.len() {
                let b = r.boundaries(c);
                o.witnesses += r.cells[c].wedges.iter().filter(|w| !w.pass).count();
                all_bounds.extend(b.iter().copied());
            }
            let mut slopes: Vec<f64> = all_bounds.iter().map(|&b| folded(b).to_radians().tan()).collect();
            slopes.sort_by(f64::total_cmp);
            slopes.dedup_by(|a, b| (folded(a.atan().to_degrees()) - folded(b.atan().to_degrees())).abs() <= cell);
            for (k, sl) in slopes.iter().enumerate() {
                o.summary.insert(format!("boundary_slope[{k}]"), *sl);
            }
            let pass = match expect_slopes {
                Some(want) => {
                    let wa: Vec<f64> = want.iter().map(|w| w.atan().to_degrees()).collect();
                    let near = |a: f64, set: &[f64]| set.iter().any(|&b| (a - b).abs() <= cell);
                    let got: Vec<f64> = all_bounds.iter().map(|&b| folded(b)).collect();
                    !got.is_empty() && got.iter().all(|&a| near(a, &wa)) && wa.iter().all(|&a| near(a, &got))
                }
                None => r.all_pass,
            };
            set_pass(&mut o, pass);
            add_csv(&mut o, format!("scan_mg_{index}.csv"), r.to_csv());
            o.report = to_value(&r);
        }
        CheckSpec::AcousticCone { gamma0, gamma1, thetas, direction_count } => {
            let mut pass = true;
            let mut all = Vec::new();
            for &theta in thetas {
                let c = conditions::acoustic_cone_bounds(p, &region.lo, &region.hi, g, *gamma0, *gamma1, theta, s, *direction_count)
                    .map_err(check_err)?;
                let ok = c.slow_side.holds() && c.fast_side_corrected.holds();
                pass &= ok;
                o.witnesses += c.slow_side.violations + c.fast_side_corrected.violations;
                o.summary.insert(format!("theta={theta}.slow_side.worst_ratio"), c.slow_side.worst_ratio);
                o.summary.insert(format!("theta={theta}.fast_side_corrected.worst_ratio"), c.fast_side_corrected.worst_ratio);
                o.summary.insert(format!("theta={theta}.fast_side_printed.violations"), c.fast_side_printed.violations as f64);
                if !c.fast_side_printed.holds() {
                    o.notes.push(format!(
                        "theta = {theta}: the fast-side bound with (tau^2 + xi^2 (gamma1+theta)^2) fails at {} of {} points; the verdict uses tau^2/(gamma1+theta)^2 + xi^2",
                        c.fast_side_printed.violations, c.fast_side_printed.samples
                    ));
                }
                all.push(c);
            }
            set_pass(&mut o, pass);
            o.report = to_value(&all);
        }
        CheckSpec::AdjointIdentity { phi, n_iter, samples, seed, min_radius, xi_max, tol } => {
            let phi = ctx.expr(phi)?;
            let guard = GuardRegion::new(region.lo.clone(), region.hi.clone(), *min_radius);
            let sol = adjoint::build_adjoint_solution(p, &phi, *n_iter, guard).map_err(check_err)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let n = p.dim();
            let pts: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..*samples)
                .map(|_| {
                    let x: Vec<f64> = region.lo.iter().zip(&region.hi).map(|(a, b)| rng.random_range(*a..=*b)).collect();
                    let dir = loop {
                        let d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
                        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if norm > 0.1 && norm <= 1.0 {
                            break d.into_iter().map(|v| v / norm).collect::<Vec<f64>>();
                        }
                    };
                    let r = rng.random_range(*min_radius..=*xi_max);
                    let e = g.values()[rng.random_range(0..g.len())];
                    (x, dir.into_iter().map(|d| d * r).collect(), e)
                })
                .collect();
            let residual = adjoint::verify_adjoint_identity(&sol, &pts).map_err(check_err)?;
            o.summary.insert("residual".into(), residual);
            o.summary.insert("tol".into(), *tol);
            set_pass(&mut o, residual <= *tol);
            if residual > *tol {
                o.witnesses = 1;
            }
            o.report = serde_json::json!({ "n_iter": n_iter, "samples": samples, "seed": seed, "residual": residual });
        }
        CheckSpec::AssumptionR { phi, n_max, tau } => {
            let v = adjoint::check_assumption_r(p, &ctx.expr(phi)?, region, *n_max, g, *tau, &ctx.adjoint).map_err(check_err)?;
            set_pass(&mut o, v.pass);
            o.witnesses = v.witnesses.len();
            o.summary.extend(v.fitted.clone());
            add_csv(&mut o, format!("assumption_r_{index}.csv"), v.to_csv());
            o.report = to_value(&v);
        }
        CheckSpec::AssumptionPsi { phi, n_iter, alpha_max } => {
            let v = adjoint::check_assumption_psi(p, &ctx.expr(phi)?, region, *n_iter, *alpha_max, g, &ctx.adjoint)
                .map_err(check_err)?;
            set_pass(&mut o, v.pass);
            o.witnesses = v.witnesses.len();
            o.summary.extend(v.fitted.clone());
            add_csv(&mut o, format!("assumption_psi_{index}.csv"), v.to_csv());
            o.report = to_value(&v);
        }
        CheckSpec::RemainderBounds { rho, delta, alpha_max } => {
            let r = adjoint::check_remainder_coefficient_bounds(p, region, g, *rho, *delta, *alpha_max, &ctx.adjoint)
                .map_err(check_err)?;
            from_condition(&mut o, &r);
        }
        CheckSpec::FourierSplit { u, phi, n_iter, xi, eps, min_radius, tol } => {
            let guard = GuardRegion::new(region.lo.clone(), region.hi.clone(), *min_radius);
            let sol = adjoint::build_adjoint_solution(p, &ctx.expr(phi)?, *n_iter, guard).map_err(check_err)?;
            let rows = adjoint::decompose_fourier(&ctx.expr(u)?, &sol, (region.lo[0], region.hi[0]), xi, *eps)
                .map_err(check_err)?;
            let worst = rows.iter().map(|r| r.identity_error).fold(0.0, f64::max);
            o.summary.insert("max_identity_error".into(), worst);
            set_pass(&mut o, worst <= *tol);
            o.witnesses = rows.iter().filter(|r| r.identity_error > *tol).count();
            let mut csv = String::from("xi,eps,total_abs,j_abs,i_abs,identity_error\n");
            for r in &rows {
                csv.push_str(&format!("{:e},{:e},{:e},{:e},{:e},{:e}\n", r.xi, r.eps, r.total.norm(), r.j.norm(), r.i.norm(), r.identity_error));
            }
            add_csv(&mut o, format!("fourier_split_{index}.csv"), csv);
            o.report = to_value(&rows);
        }
        CheckSpec::Wavefront { u, centers, window_radius, points, expect_singular_support } => {
            let u = ctx.expr(u)?;
            let params = WaveParams { points: *points, ..WaveParams::default() };
            let cs = centers.values();
            let est = wavefront::estimate_wfg(&u, &cs, *window_radius, g, &params, cache).map_err(check_err)?;
            o.witnesses = est.singular.len();
            for (k, x) in est.singular_support.iter().enumerate() {
                o.summary.insert(format!("singular_support[{k}]"), *x);
            }
            let pass = match expect_singular_support {
                Some(want) => {
                    let cell = est.cell().max(1e-12) * (1.0 + 1e-9);
                    let near = |a: f64, set: &[f64]| set.iter().any(|&b| (a - b).abs() <= cell);
                    est.singular_support.iter().all(|&a| near(a, want)) && want.iter().all(|&a| near(a, &est.singular_support))
                }
                None => true,
            };
            set_pass(&mut o, pass);
            let at = est.singular_support.first().copied().unwrap_or(cs[0]);
            let w = wavefront::WindowSpec::bump(at, *window_radius).map_err(check_err)?;
            let sampled = wavefront::SampledNetFunction::sample(&u, w.lo(), w.hi(), *points, g.values()).map_err(check_err)?;
            let spec = wavefront::windowed_fft(&sampled, &w).map_err(check_err)?;
            add_csv(&mut o, format!("decay_curves_{index}.csv"), wavefront::decay_curves_csv(&spec, &[1.0, -1.0], &params, 16).map_err(check_err)?);
            o.notes.push(format!("decay curves at the window centered at {at}"));
            o.report = to_value(&est);
        }
        CheckSpec::Microlocality { u, centers, window_radius, points } => {
            let params = WaveParams { points: *points, ..WaveParams::default() };
            let r = wavefront::microlocality_check(p, &ctx.expr(u)?, &centers.values(), *window_radius, g, &params, cache)
                .map_err(check_err)?;
            set_pass(&mut o, r.contained);
            o.witnesses = r.violations.len();
            o.summary.insert("precondition_holds".into(), f64::from(u8::from(r.precondition_holds)));
            o.summary.insert("wf_u_points".into(), r.wf_u.singular.len() as f64);
            o.summary.insert("wf_pu_points".into(), r.wf_pu.singular.len() as f64);
            o.notes.extend(r.notes.iter().cloned());
            o.report = to_value(&r);
        }
        CheckSpec::Derivatives { u, lo, hi, k_max, focus } => {
            let opts = wavefront::DerivativeOptions { focus: focus.clone(), ..wavefront::DerivativeOptions::default() };
            let r = wavefront::slow_scale_derivative_check(&ctx.expr(u)?, *lo, *hi, *k_max, g, &opts).map_err(check_err)?;
            set_pass(&mut o, r.implication_holds);
            o.witnesses = usize::from(!r.implication_holds);
            for n in &r.nets {
                if let Some(k) = n.kappa_hat {
                    o.summary.insert(format!("{}.kappa_hat", n.name), k);
                }
            }
            o.notes.extend(r.notes.iter().cloned());
            o.report = to_value(&r);
        }
        CheckSpec::Order { net, expect, tol } => {
            let e = ctx.expr(net)?;
            if e.depends_on_x() {
                return Err(CliError::Config(format!("order net {net:?} depends on x")));
            }
            let zero = vec![0.0; p.dim()];
            let vals: Vec<Complex64> = g.values().iter().map(|&x| e.eval(&zero, x)).collect::<Result<_, _>>().map_err(check_err)?;
            let n = EpsNet::new(g.clone(), vals).map_err(check_err)?;
            let est = epsnet::estimate_order(&n, s.tail_fraction).map_err(check_err)?;
            o.summary.insert("kappa_hat".into(), est.kappa_hat);
            let pass = expect.is_none_or(|k| (est.kappa_hat - k).abs() <= *tol);
            set_pass(&mut o, pass);
            o.witnesses = usize::from(!pass);
            add_csv(&mut o, format!("order_{index}.csv"), epsnet::write_csv(&n));
            o.report = to_value(&est);
        }
    }
    Ok(o)
}

/// Executes the checks in declared order. Check failures become report entries;
/// only an invalid config is an `Err`.
pub fn run(cfg: &RunConfig, cache: Option<&SpectrumCache>) -> Result<RunReport, CliError> {
    let t0 = Instant::now();
    if cfg.checks.is_empty() {
        return Err(CliError::Config("checks list is empty".into()));
    }
    let ctx = Context::new(cfg)?;
    let mut checks = Vec::with_capacity(cfg.checks.len());
    for (i, spec) in cfg.checks.iter().enumerate() {
        let c = match run_check(&ctx, i, spec, if spec.uses_cache() { cache } else { None }) {
            Ok(c) => c,
            Err(e) => {
                let mut c = outcome(i, spec.op());
                c.status = Status::Error;
                c.error = Some(ErrorObject::from(&e));
                c
            }
        };
        checks.push(c);
    }
    let exit_code = if checks.iter().any(|c| c.status == Status::Error) {
        1
    } else if checks.iter().any(|c| c.status == Status::Fail) {
        2
    } else {
        0
    };
    Ok(RunReport {
        config_hash: ctx.hash.clone(),
        toolkit_version: VERSION.to_string(),
        symbol: ctx.symbol.to_json_value(),
        eps_grid: ctx.grid.values().to_vec(),
        checks,
        exit_code,
        wall_time_s: t0.elapsed().as_secs_f64(),
    })
}

/// `report.json` plus one file per CSV output.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let target = dir.join("report.json");
    std::fs::write(&target, report.to_json()).map_err(io(&target))?;
    for c in &report.checks {
        for (name, data) in &c.csv_data {
            let f = dir.join(name);
            std::fs::write(&f, data).map_err(io(&f))?;
        }
    }
    Ok(())
}
