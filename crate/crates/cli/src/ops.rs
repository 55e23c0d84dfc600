//! One typed parameter block and one runner per operation.

use std::sync::Arc;

use nilprobe_core::algebra::{Basis, Independence, Polynomial};
use nilprobe_core::averages::{
    banach_density, gtilde_star_conjugation_check, gtilde_star_membership, integrate_haar,
    jstar_embed, multi_average_i, nilfunction_residual, potts_average, sweep_windows, ud_sup,
    Estimate, PottsOptions, TimeQuadrature, TimeSeries, DEFAULT_HIT_HALF_WIDTH,
};
use nilprobe_core::cloud::{hausdorff_distance, PointCloud};
use nilprobe_core::proximality::{
    commutation_gap, commuting_rp_transfer, cube_orbit_sample, fiber_coverage, nd_sample,
    poly_orbit_density, return_set, rp_return_first, rp_return_intersection, rp_witness_search,
    rp_witness_verify, Projection, SearchOptions, SearchOutcome, DEFAULT_HORIZON,
};
use nilprobe_core::suspension::{
    integer_part_orbit, susp_canonical, susp_equivalent, susp_evolve, susp_metric,
    susp_rp_transfer_check,
};
use nilprobe_core::systems::{
    flow_decision, map_decision, time_t_decision, HeisenbergElement, SystemHandle,
};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::config::{build_system, ExperimentConfig, GridSpec, Num, ObservableSpec};
use crate::error::{CliError, CliResult};
use crate::report::Table;

/// Operations reachable from the command line, in help order.
pub const OPERATIONS: [&str; 18] = [
    "minimal",
    "exceptional",
    "rp-certify",
    "rp-transfer",
    "cube",
    "nd-compare",
    "poly-density",
    "fiber-coverage",
    "suspend",
    "susp-rp",
    "average",
    "ud",
    "density",
    "potts",
    "nilres",
    "embed",
    "membership",
    "validate",
];

pub struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub basis: Arc<Basis>,
    pub seed: u64,
}

impl Ctx<'_> {
    pub fn system(&self) -> CliResult<SystemHandle> {
        let spec = self
            .cfg
            .system
            .as_ref()
            .ok_or_else(|| CliError::Schema("this operation needs `system`".into()))?;
        build_system(spec, &self.basis)
    }

    pub fn system_h(&self) -> CliResult<SystemHandle> {
        let spec = self
            .cfg
            .system_h
            .as_ref()
            .ok_or_else(|| CliError::Schema("this operation needs `system_h`".into()))?;
        build_system(spec, &self.basis)
    }

    /// The base of a suspension, or the system itself.
    fn suspension_base(&self) -> CliResult<SystemHandle> {
        Ok(match self.system()? {
            SystemHandle::Suspension(s) => (**s.base()).clone(),
            other => other,
        })
    }
}

/// What an operation hands back to the runner.
#[derive(Debug, Default)]
pub struct OpOutput {
    pub result: Value,
    pub budget: u64,
    pub artifacts: Vec<(String, Table)>,
    /// Set when the operation treats an exhausted budget as failure.
    pub exhausted: Option<String>,
}

impl OpOutput {
    fn new(result: Value, budget: u64) -> Self {
        Self {
            result,
            budget,
            ..Self::default()
        }
    }

    fn with(mut self, name: &str, table: Table) -> Self {
        self.artifacts.push((name.to_string(), table));
        self
    }
}

fn horizon() -> f64 {
    DEFAULT_HORIZON
}

fn default_samples() -> u64 {
    100_000
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimalParams {
    /// Time of the time-`t` map; omitted means the system itself.
    #[serde(default)]
    pub t: Option<Num>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExceptionalParams {
    pub t_values: Vec<Num>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchParams {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub d: usize,
    pub delta: f64,
    pub budget: u64,
    #[serde(default)]
    pub quantum: Option<f64>,
    #[serde(default)]
    pub refine: Option<u32>,
    #[serde(default)]
    pub near_misses: Option<usize>,
    /// rp-transfer only: tolerance and budget on the second action.
    #[serde(default)]
    pub delta_out: Option<f64>,
    #[serde(default)]
    pub budget_out: Option<u64>,
}

impl SearchParams {
    fn options(&self) -> SearchOptions {
        let mut o = SearchOptions {
            quantum: self.quantum,
            ..SearchOptions::default()
        };
        if let Some(r) = self.refine {
            o.refine = r;
        }
        if let Some(n) = self.near_misses {
            o.near_misses = n;
        }
        o
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeParams {
    pub x: Vec<f64>,
    pub d: usize,
    pub budget: u64,
    #[serde(default = "horizon")]
    pub horizon: f64,
    /// nd-compare only: multipliers of the `N_d` sample.
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    /// nd-compare only: write the four clouds as artifacts.
    #[serde(default)]
    pub write_clouds: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyDensityParams {
    /// Ascending rational coefficients per polynomial.
    pub polys: Vec<Vec<String>>,
    pub x: Vec<f64>,
    pub budget: u64,
    pub resolution: f64,
    #[serde(default = "horizon")]
    pub horizon: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberParams {
    pub projection: Projection,
    pub alphas: Vec<f64>,
    pub x: Vec<f64>,
    pub budget: u64,
    pub resolution: f64,
    #[serde(default = "horizon")]
    pub horizon: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuspPoint {
    pub x: Vec<f64>,
    pub s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegerPart {
    pub times: GridSpec,
    pub resolution: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuspendParams {
    pub x: Vec<f64>,
    pub s: f64,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub other: Option<SuspPoint>,
    #[serde(default)]
    pub integer_part: Option<IntegerPart>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuspRpParams {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub s1: f64,
    pub s2: f64,
    pub d: usize,
    pub delta: f64,
    pub budget: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AverageParams {
    pub observable: ObservableSpec,
    /// Empty: the Haar integral of the observable.
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default = "default_samples")]
    pub n_samples: u64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    #[default]
    Residual,
    Sampled,
    Predicted,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    List(Vec<(f64, f64)>),
    Sweep { from: f64, rho: f64, step: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NilresParams {
    pub observable: ObservableSpec,
    pub alphas: Vec<f64>,
    pub t_grid: GridSpec,
    #[serde(default = "default_samples")]
    pub n_samples: u64,
    /// ud only.
    #[serde(default)]
    pub series: SeriesKind,
    /// ud only.
    #[serde(default)]
    pub windows: Option<WindowSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpReturn {
    pub y: Vec<f64>,
    pub d: usize,
    pub radius: f64,
    pub y0: Vec<f64>,
    pub radius0: f64,
    pub horizon: f64,
    pub step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityParams {
    pub x: Vec<f64>,
    pub center: Vec<f64>,
    pub radius: f64,
    pub grid: GridSpec,
    pub rho: f64,
    pub step: f64,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    /// Also runs the return-time intersection test against `system_h`.
    #[serde(default)]
    pub rp_return: Option<RpReturn>,
}

fn default_half_width() -> f64 {
    DEFAULT_HIT_HALF_WIDTH
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PottsParams {
    pub polys: Vec<Vec<String>>,
    pub observables: Vec<ObservableSpec>,
    pub r: f64,
    #[serde(default)]
    pub quadrature: Option<TimeQuadrature>,
    #[serde(default)]
    pub x_samples: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedParams {
    pub g: Vec<HeisenbergElement>,
    pub alphas: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembershipParams {
    pub tuple: Vec<HeisenbergElement>,
    pub alphas: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub conjugate_by: Option<HeisenbergElement>,
}

/// Parsed parameters, tagged by operation.
#[derive(Debug)]
pub enum Params {
    Minimal(MinimalParams),
    Exceptional(ExceptionalParams),
    RpCertify(SearchParams),
    RpTransfer(SearchParams),
    Cube(CubeParams),
    NdCompare(CubeParams),
    PolyDensity(PolyDensityParams),
    FiberCoverage(FiberParams),
    Suspend(SuspendParams),
    SuspRp(SuspRpParams),
    Average(AverageParams),
    Ud(NilresParams),
    Density(DensityParams),
    Potts(PottsParams),
    Nilres(NilresParams),
    Embed(EmbedParams),
    Membership(MembershipParams),
}

fn typed<T: DeserializeOwned>(map: &Map<String, Value>) -> CliResult<T> {
    serde_json::from_value(Value::Object(map.clone()))
        .map_err(|e| CliError::Schema(format!("params: {e}")))
}

pub fn parse_params(op: &str, map: &Map<String, Value>) -> CliResult<Params> {
    Ok(match op {
        "minimal" => Params::Minimal(typed(map)?),
        "exceptional" => Params::Exceptional(typed(map)?),
        "rp-certify" => Params::RpCertify(typed(map)?),
        "rp-transfer" => Params::RpTransfer(typed(map)?),
        "cube" => Params::Cube(typed(map)?),
        "nd-compare" => Params::NdCompare(typed(map)?),
        "poly-density" => Params::PolyDensity(typed(map)?),
        "fiber-coverage" => Params::FiberCoverage(typed(map)?),
        "suspend" => Params::Suspend(typed(map)?),
        "susp-rp" => Params::SuspRp(typed(map)?),
        "average" => Params::Average(typed(map)?),
        "ud" => Params::Ud(typed(map)?),
        "density" => Params::Density(typed(map)?),
        "potts" => Params::Potts(typed(map)?),
        "nilres" => Params::Nilres(typed(map)?),
        "embed" => Params::Embed(typed(map)?),
        "membership" => Params::Membership(typed(map)?),
        other => return Err(CliError::Schema(format!("unknown operation `{other}`"))),
    })
}

pub fn execute(ctx: &Ctx, params: &Params) -> CliResult<OpOutput> {
    match params {
        Params::Minimal(p) => minimal(ctx, p),
        Params::Exceptional(p) => exceptional(ctx, p),
        Params::RpCertify(p) => rp_certify(ctx, p),
        Params::RpTransfer(p) => rp_transfer(ctx, p),
        Params::Cube(p) => cube(ctx, p),
        Params::NdCompare(p) => nd_compare(ctx, p),
        Params::PolyDensity(p) => poly_density(ctx, p),
        Params::FiberCoverage(p) => fiber(ctx, p),
        Params::Suspend(p) => suspend(ctx, p),
        Params::SuspRp(p) => susp_rp(ctx, p),
        Params::Average(p) => average(ctx, p),
        Params::Ud(p) => ud(ctx, p),
        Params::Density(p) => density(ctx, p),
        Params::Potts(p) => potts(ctx, p),
        Params::Nilres(p) => nilres(ctx, p),
        Params::Embed(p) => embed(ctx, p),
        Params::Membership(p) => membership(ctx, p),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(format!("serialize: {e}")))
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn decision(d: &Independence) -> Value {
    match d {
        Independence::Independent => json!({"minimal": true, "relation": null}),
        Independence::Dependent(q) => json!({
            "minimal": false,
            "relation": q.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        }),
    }
}

fn minimal(ctx: &Ctx, p: &MinimalParams) -> CliResult<OpOutput> {
    let sys = ctx.system()?;
    let (mode, d) = match &p.t {
        Some(t) => ("time-t", time_t_decision(&sys, &t.symbolic()?)?),
        None if sys.is_discrete() => ("map", map_decision(&sys)?),
        None => ("flow", flow_decision(&sys)?),
    };
    let mut v = decision(&d);
    v["mode"] = json!(mode);
    Ok(OpOutput::new(v, 0))
}

fn exceptional(ctx: &Ctx, p: &ExceptionalParams) -> CliResult<OpOutput> {
    let sys = ctx.system()?;
    let mut rows = Vec::with_capacity(p.t_values.len());
    let mut non_minimal = 0u64;
    for t in &p.t_values {
        let mut row = decision(&time_t_decision(&sys, &t.symbolic()?)?);
        if row["minimal"] == json!(false) {
            non_minimal += 1;
        }
        row["t"] = json!(t.text());
        rows.push(row);
    }
    let n = rows.len() as u64;
    Ok(OpOutput::new(
        json!({"table": rows, "non_minimal": non_minimal, "minimal": n - non_minimal}),
        n,
    ))
}

fn outcome_value(
    sys: &SystemHandle,
    x: &[f64],
    y: &[f64],
    o: &SearchOutcome,
    delta: f64,
) -> CliResult<Value> {
    let mut v = json!({"outcome": o.kind(), "candidates": o.candidates()});
    if let Some(w) = o.witness() {
        let mut wv = to_value(w)?;
        wv["verified"] = json!(rp_witness_verify(sys, x, y, w, delta)?);
        v["witness"] = wv;
    }
    if let Some(s) = o.stats() {
        v["stats"] = to_value(s)?;
    }
    if let SearchOutcome::ProvenAbsent { lower_bound } = o {
        v["lower_bound"] = json!(lower_bound);
    }
    Ok(v)
}

fn exhausted_note(o: &SearchOutcome, budget: u64) -> Option<String> {
    matches!(o, SearchOutcome::Exhausted(_))
        .then(|| format!("no witness within {budget} candidates"))
}

fn rp_certify(ctx: &Ctx, p: &SearchParams) -> CliResult<OpOutput> {
    let sys = ctx.system()?;
    let o = rp_witness_search(&sys, &p.x, &p.y, p.d, p.delta, p.budget, &p.options())?;
    let v = outcome_value(&sys, &p.x, &p.y, &o, p.delta)?;
    let mut out = OpOutput::new(v, o.candidates());
    out.exhausted = exhausted_note(&o, p.budget);
    Ok(out)
}

fn rp_transfer(ctx: &Ctx, p: &SearchParams) -> CliResult<OpOutput> {
    let (g, h) = (ctx.system()?, ctx.system_h()?);
    let gap = commutation_gap(&g, &h)?;
    let source = rp_witness_search(&g, &p.x, &p.y, p.d, p.delta, p.budget, &p.options())?;
    let mut v = json!({
        "commutation_gap": gap,
        "source": outcome_value(&g, &p.x, &p.y, &source, p.delta)?,
    });
    let Some(w) = source.witness() else {
        let mut out = OpOutput::new(v, source.candidates());
        out.exhausted = exhausted_note(&source, p.budget);
        return Ok(out);
    };
    let delta_out = p.delta_out.unwrap_or(p.delta);
    let budget_out = p.budget_out.unwrap_or(p.budget);
    let target = commuting_rp_transfer(&g, &h, &p.x, &p.y, w, delta_out, budget_out)?;
    v["target"] = outcome_value(&h, &p.x, &p.y, &target, delta_out)?;
    let mut out = OpOutput::new(v, source.candidates() + target.candidates());
    out.exhausted = exhausted_note(&target, budget_out);
    Ok(out)
}

fn cloud_table(c: &PointCloud) -> Table {
    let n = c.point_dim();
    let header = (0..c.arity())
        .flat_map(|i| (0..n).map(move |j| format!("p{i}_{j}")))
        .collect();
    let mut t = Table::new(header);
    for tuple in c.tuples() {
        t.push(tuple.to_vec());
    }
    t
}

fn cloud_summary(c: &PointCloud) -> CliResult<Value> {
    Ok(json!({
        "tuples": c.len(),
        "arity": c.arity(),
        "point_dim": c.point_dim(),
        "provenance": to_value(c.provenance())?,
    }))
}

fn cube(ctx: &Ctx, p: &CubeParams) -> CliResult<OpOutput> {
    let sys = ctx.system()?;
    let c = cube_orbit_sample(&sys, &p.x, p.d, p.budget, ctx.seed, p.horizon)?;
    Ok(OpOutput::new(cloud_summary(&c)?, p.budget).with("cloud", cloud_table(&c)))
}

/// Cube and `N_d` clouds of both actions, compared in the Hausdorff metric.
fn nd_compare(ctx: &Ctx, p: &CubeParams) -> CliResult<OpOutput> {
    let (g, h) = (ctx.system()?, ctx.system_h()?);
    let s = ctx.seed;
    let alphas = p.alphas.as_deref();
    let qg = cube_orbit_sample(&g, &p.x, p.d, p.budget, s, p.horizon)?;
    let qh = cube_orbit_sample(&h, &p.x, p.d, p.budget, s.wrapping_add(1), p.horizon)?;
    let ng = nd_sample(&g, &p.x, p.d, p.budget, s.wrapping_add(2), alphas, p.horizon)?;
    let nh = nd_sample(&h, &p.x, p.d, p.budget, s.wrapping_add(3), alphas, p.horizon)?;
    let dq = hausdorff_distance(&qg, &qh)?;
    let dn = hausdorff_distance(&ng, &nh)?;
    let v = json!({
        "hausdorff_cube": dq,
        "hausdorff_nd": dn,
        "hausdorff": dq.max(dn),
    });
    let mut out = OpOutput::new(v, 4 * p.budget);
    if p.write_clouds {
        out = out
            .with("cube_g", cloud_table(&qg))
            .with("cube_h", cloud_table(&qh))
            .with("nd_g", cloud_table(&ng))
            .with("nd_h", cloud_table(&nh));
    }
    Ok(out)
}

fn polys(raw: &[Vec<String>]) -> CliResult<Vec<Polynomial>> {
    raw.iter().map(|c| Ok(Polynomial::parse(c)?)).collect()
}

fn poly_density(ctx: &Ctx, p: &PolyDensityParams) -> CliResult<OpOutput> {
    let sys = ctx.system()?;
    let c = poly_orbit_density(&sys, &polys(&p.polys)?, &p.x, p.budget, p.resolution, p.horizon)?;
    Ok(OpOutput::new(json!({"coverage": c}), p.budget))
}

fn fiber(ctx: &Ctx, p: &FiberParams) -> CliResult<OpOutput> {
    let sys = ctx.system()?;
    let c = fiber_coverage(&sys, &p.projection, &p.alphas, &p.x, p.budget, p.resolution, p.horizon)?;
    Ok(OpOutput::new(json!({"coverage": c}), p.budget))
}

fn suspend(ctx: &Ctx, p: &SuspendParams) -> CliResult<OpOutput> {
    let base = ctx.suspension_base()?;
    let start = susp_canonical(&base, &p.x, p.s)?;
    let mut v = json!({"canonical": to_value(&start)?});
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((0..base.point_dim()).map(|j| format!("base_{j}")));
    header.push("height".into());
    let mut orbit = Table::new(header);
    for &t in &p.times {
        let q = susp_evolve(&base, &start, t)?;
        let mut row = vec![t];
        row.extend(q.to_flat());
        orbit.push(row);
    }
    if let Some(o) = &p.other {
        let q = susp_canonical(&base, &o.x, o.s)?;
        v["other"] = json!({
            "canonical": to_value(&q)?,
            "equivalent": susp_equivalent(&base, (&p.x, p.s), (&o.x, o.s))?,
            "metric": susp_metric(&base, &start, &q)?,
        });
    }
    let mut budget = p.times.len() as u64;
    if let Some(ip) = &p.integer_part {
        let times = ip.times.points()?;
        budget += times.len() as u64;
        v["integer_part_coverage"] = json!(integer_part_orbit(&base, &p.x, &times, ip.resolution)?);
    }
    let mut out = OpOutput::new(v, budget);
    if !p.times.is_empty() {
        out = out.with("orbit", orbit);
    }
    Ok(out)
}

fn susp_rp(ctx: &Ctx, p: &SuspRpParams) -> CliResult<OpOutput> {
    let base = ctx.suspension_base()?;
    let r = susp_rp_transfer_check(&base, &p.x1, &p.x2, p.s1, p.s2, p.d, p.delta, p.budget)?;
    let budget = r.forward_candidates + r.backward_candidates;
    Ok(OpOutput::new(to_value(&r)?, budget))
}

fn estimate(e: &Estimate) -> Value {
    json!({
        "value": complex(e.value),
        "stderr": e.stderr,
        "samples": e.samples,
        "exact": e.exact,
    })
}

fn average(ctx: &Ctx, p: &AverageParams) -> CliResult<OpOutput> {
    let sys = ctx.system()?;
    let f = p.observable.build()?;
    let e = if p.alphas.is_empty() {
        integrate_haar(&sys, &f, p.n_samples, ctx.seed)?
    } else {
        let t = p
            .t
            .ok_or_else(|| CliError::Schema("params.t is required with alphas".into()))?;
        multi_average_i(&sys, &f, &p.alphas, t, p.n_samples, ctx.seed)?
    };
    Ok(OpOutput::new(estimate(&e), e.samples))
}

fn series_table(s: &TimeSeries) -> Table {
    let mut t = Table::new(vec!["t".into(), "re".into(), "im".into()]);
    for (x, v) in s.grid().iter().zip(s.values()) {
        t.push(vec![*x, v.re, v.im]);
    }
    t
}

fn ud(ctx: &Ctx, p: &NilresParams) -> CliResult<OpOutput> {
    let sys = ctx.system()?;
    let f = p.observable.build()?;
    let grid = p.t_grid.points()?;
    let n = grid.len() as u64;
    let r = nilfunction_residual(&sys, &f, &p.alphas, &grid, p.n_samples, ctx.seed)?;
    let series = match p.series {
        SeriesKind::Residual => &r.residual,
        SeriesKind::Sampled => &r.sampled,
        SeriesKind::Predicted => &r.predicted,
    };
    let windows = match &p.windows {
        Some(WindowSpec::List(w)) => w.clone(),
        Some(WindowSpec::Sweep { from, rho, step }) => sweep_windows(series, *from, *rho, *step)?,
        None => return Err(CliError::Schema("params.windows is required for ud".into())),
    };
    let rep = ud_sup(series, &windows)?;
    let mut table = Table::new(vec!["sigma".into(), "rho".into(), "average".into()]);
    for w in &rep.table {
        table.push(vec![w.sigma, w.rho, w.average]);
    }
    let v = json!({"max": rep.max, "windows": rep.table.len(), "method": r.method});
    Ok(OpOutput::new(v, n)
        .with("windows", table)
        .with("series", series_table(series)))
}

fn density(ctx: &Ctx, p: &DensityParams) -> CliResult<OpOutput> {
    let sys = ctx.system()?;
    let grid = p.grid.points()?;
    let hits = return_set(&sys, &p.x, &p.center, p.radius, &grid)?;
    let est = banach_density(&hits, p.grid.end, p.rho, p.step, p.half_width)?;
    let mut v = to_value(&est)?;
    v["hits"] = json!(hits.len());
    if let Some(rr) = &p.rp_return {
        let nil = ctx.system_h()?;
        let first = rp_return_first(
            &sys, &p.x, &rr.y, rr.d, rr.radius, &nil, &rr.y0, rr.radius0, rr.horizon, rr.step,
        )?;
        let inter = rp_return_intersection(
            &sys, &p.x, &rr.y, rr.d, rr.radius, &nil, &rr.y0, rr.radius0, rr.horizon, rr.step,
        )?;
        v["rp_return"] = json!({"first": first, "intersects": inter});
    }
    let mut table = Table::new(vec!["t".into()]);
    for h in &hits {
        table.push(vec![*h]);
    }
    Ok(OpOutput::new(v, grid.len() as u64).with("hits", table))
}

fn potts(ctx: &Ctx, p: &PottsParams) -> CliResult<OpOutput> {
    let sys = ctx.system()?;
    let fs = p
        .observables
        .iter()
        .map(ObservableSpec::build)
        .collect::<CliResult<Vec<_>>>()?;
    let mut opts = PottsOptions {
        seed: ctx.seed,
        ..PottsOptions::default()
    };
    if let Some(q) = p.quadrature {
        opts.quadrature = q;
    }
    if let Some(n) = p.x_samples {
        opts.x_samples = n;
    }
    let r = potts_average(&sys, &polys(&p.polys)?, &fs, p.r, &opts)?;
    let budget = r.x_samples as u64;
    Ok(OpOutput::new(to_value(&r)?, budget))
}

fn nilres(ctx: &Ctx, p: &NilresParams) -> CliResult<OpOutput> {
    let sys = ctx.system()?;
    let f = p.observable.build()?;
    let grid = p.t_grid.points()?;
    let r = nilfunction_residual(&sys, &f, &p.alphas, &grid, p.n_samples, ctx.seed)?;
    let max_residual = r.residual.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_stderr = r.stderr.iter().copied().fold(0.0, f64::max);
    let prediction: Vec<Value> = r
        .prediction
        .terms
        .iter()
        .map(|(freq, c)| json!({"frequency": freq, "coeff": complex(*c)}))
        .collect();
    let v = json!({
        "method": r.method,
        "max_residual": max_residual,
        "max_stderr": max_stderr,
        "prediction": prediction,
    });
    let header = [
        "t",
        "predicted_re",
        "predicted_im",
        "sampled_re",
        "sampled_im",
        "residual_re",
        "residual_im",
        "stderr",
    ];
    let mut table = Table::new(header.iter().map(|s| s.to_string()).collect());
    for (i, t) in grid.iter().enumerate() {
        let (a, b, c) = (r.predicted.values()[i], r.sampled.values()[i], r.residual.values()[i]);
        table.push(vec![*t, a.re, a.im, b.re, b.im, c.re, c.im, r.stderr[i]]);
    }
    let budget = if r.method == "monte-carlo" {
        p.n_samples * grid.len() as u64
    } else {
        grid.len() as u64
    };
    Ok(OpOutput::new(v, budget).with("series", table))
}

fn embed(_ctx: &Ctx, p: &EmbedParams) -> CliResult<OpOutput> {
    let tuple = jstar_embed(&p.g, &p.alphas)?;
    let mut v = json!({"tuple": to_value(&tuple)?});
    if tuple.len() == 2 {
        v["member"] = json!(gtilde_star_membership(&tuple, &p.alphas, p.tol)?.member);
    }
    Ok(OpOutput::new(v, 0))
}

fn membership(_ctx: &Ctx, p: &MembershipParams) -> CliResult<OpOutput> {
    let m = gtilde_star_membership(&p.tuple, &p.alphas, p.tol)?;
    let mut v = to_value(&m)?;
    if let Some(g) = &p.conjugate_by {
        v["conjugate_member"] = if m.member {
            json!(gtilde_star_conjugation_check(g, &p.tuple, &p.alphas, p.tol)?)
        } else {
            Value::Null
        };
    }
    Ok(OpOutput::new(v, 0))
}
