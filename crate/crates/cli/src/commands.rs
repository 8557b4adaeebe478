use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use srg_core::case_studies::{value_function, value_iteration, Policy, ValueIterationReport};
use srg_core::error::{Result, SrgError};
use srg_core::geometry::{cos_left, cos_right, log_norm_closed_form, Side};
use srg_core::io::{read_cloud, read_json, render_svg, write_cloud, write_json, Overlay, PlotStyle, RunConfig};
use srg_core::pairings::{norm, pair as pairing, peak_info, sign_map, NormKind, PairingSpec, Vector};
use srg_core::sampling::{ExecMode, SamplerKind};
use srg_core::srg::{
    certify_with_tol, containment_report, contraction_factor, estimate_sigma, matched_composition, matched_sum,
    sample_increments, sample_srg_with, sigma_from_increments, srg_from_increments, srg_invert, srg_scale,
    CalculusRule, CertificateReport, ContainmentReport, Increment, Operator, Property, SampleMeta, SrgCloud,
    DEFAULT_CERT_TOL, SIGMA_SLACK,
};

use crate::args::{
    BellmanArgs, CalculusArgs, CertifyArgs, Common, OperatorArgs, PairArgs, Rule, SrgArgs, SEED_ENV,
};
use crate::operators::{self, Resolved, DEFAULT_ACTIONS, DEFAULT_ALPHA, DEFAULT_GAMMA, DEFAULT_STATES};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATED: u8 = 1;

const DEFAULT_N: usize = 5000;

// ---------------------------------------------------------------------------
// pair

fn parse_vector(s: &str, name: &str) -> Result<Vector> {
    let coords = s
        .split(',')
        .enumerate()
        .map(|(i, t)| {
            t.trim().parse::<f64>().map_err(|_| {
                SrgError::InvalidParameter(format!("--{name}: entry {} (`{}`) is not a number", i + 1, t.trim()))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Vector::new(coords)
}

#[derive(Serialize)]
struct PairRow {
    spec: PairingSpec,
    norm_x: f64,
    norm_y: f64,
    pair_xy: f64,
    pair_yx: f64,
    /// `-[[-y, x]]`, differs from `pair_yx` only for the non-SIP max pairing.
    lower_pair_yx: f64,
    cos_left: Option<f64>,
    angle_left: Option<f64>,
    cos_right: Option<f64>,
    angle_right: Option<f64>,
    peaks_x: Option<Vec<usize>>,
    peaks_y: Option<Vec<usize>>,
    sign_x: Option<Vec<f64>>,
    sign_y: Option<Vec<f64>>,
}

pub fn pair(a: &PairArgs) -> Result<u8> {
    let x = parse_vector(&a.x, "x")?;
    let y = parse_vector(&a.y, "y")?;
    x.check_same_len(&y)?;
    let specs: Vec<PairingSpec> = a.spec.map_or(PairingSpec::ALL.to_vec(), |s| vec![s]);
    let mut rows = Vec::new();
    for spec in specs {
        let linf = spec.norm_kind() == NormKind::LInf;
        let peaks = |v: &Vector| {
            (linf && !v.is_zero()).then(|| peak_info(v, 0.0).map(|p| p.display_indices())).transpose()
        };
        let l1 = spec == PairingSpec::L1Sign;
        let cl = cos_left(&x, &y, spec).ok();
        let cr = cos_right(&x, &y, spec).ok();
        rows.push(PairRow {
            spec,
            norm_x: norm(&x, spec),
            norm_y: norm(&y, spec),
            pair_xy: pairing(&x, &y, spec)?,
            pair_yx: pairing(&y, &x, spec)?,
            lower_pair_yx: -pairing(&(-&y), &x, spec)?,
            cos_left: cl.as_ref().map(|c| c.cos_value),
            angle_left: cl.as_ref().map(|c| c.angle_rad),
            cos_right: cr.as_ref().map(|c| c.cos_value),
            angle_right: cr.as_ref().map(|c| c.angle_rad),
            peaks_x: peaks(&x)?,
            peaks_y: peaks(&y)?,
            sign_x: l1.then(|| sign_map(&x).into_vec()),
            sign_y: l1.then(|| sign_map(&y).into_vec()),
        });
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
        return Ok(EXIT_OK);
    }
    let opt = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:.12}"));
    for r in &rows {
        println!("[{}]", r.spec);
        println!("  ||x|| = {}   ||y|| = {}", r.norm_x, r.norm_y);
        println!("  [[x,y]] = {}   [[y,x]] = {}", r.pair_xy, r.pair_yx);
        if !r.spec.is_sip() {
            println!("  -[[-y,x]] = {} (lower value)", r.lower_pair_yx);
        }
        if let (Some(px), Some(py)) = (&r.peaks_x, &r.peaks_y) {
            println!("  I(x) = {px:?}, m_x = {}   I(y) = {py:?}, m_y = {}", px[0], py[0]);
        }
        if let (Some(sx), Some(sy)) = (&r.sign_x, &r.sign_y) {
            println!("  sign(x) = {sx:?}   sign(y) = {sy:?}");
        }
        println!("  cos_L(x,y) = {}   angle_L = {}", opt(r.cos_left), opt(r.angle_left));
        println!("  cos_R(x,y) = {}   angle_R = {}", opt(r.cos_right), opt(r.angle_right));
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// shared settings

struct Settings {
    seed: u64,
    seed_source: &'static str,
    n: usize,
    spec: Option<PairingSpec>,
    side: Side,
    sampler: Option<SamplerKind>,
    mode: ExecMode,
    out_dir: PathBuf,
    config: Option<RunConfig>,
}

fn settings(c: &Common) -> Result<Settings> {
    let config: Option<RunConfig> = c.config.as_deref().map(read_json).transpose()?;
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| SrgError::InvalidParameter(format!("{SEED_ENV}=`{s}` is not an unsigned integer")))?,
        ),
        Err(_) => None,
    };
    let (seed, seed_source) = if let Some(s) = c.seed {
        (s, "flag")
    } else if let Some(cfg) = &config {
        (cfg.seed, "config")
    } else if let Some(s) = env_seed {
        (s, "env")
    } else {
        (0, "default")
    };
    let n = c.n.or(config.as_ref().map(|r| r.n)).unwrap_or(DEFAULT_N);
    if n == 0 {
        return Err(SrgError::InvalidParameter("--n must be at least 1".into()));
    }
    let sampler = match (c.sampler, &config) {
        (Some(k), _) => Some(k),
        (None, Some(cfg)) => Some(cfg.sampler.parse()?),
        _ => None,
    };
    Ok(Settings {
        seed,
        seed_source,
        n,
        spec: c.spec.or(config.as_ref().map(|r| r.spec)),
        side: c.side.or(config.as_ref().map(|r| r.side)).unwrap_or(Side::Left),
        sampler,
        mode: if c.sequential { ExecMode::Sequential } else { ExecMode::default() },
        out_dir: c.out_dir.clone(),
        config,
    })
}

/// Flags first, then values recorded in a replayed config.
fn operator_args(op: &OperatorArgs, cfg: Option<&RunConfig>) -> OperatorArgs {
    let mut out = op.clone();
    if let Some(cfg) = cfg {
        if out.operator.is_none() && out.matrix.is_none() {
            match cfg.operator.strip_prefix("matrix:") {
                Some(p) => out.matrix = Some(PathBuf::from(p)),
                None => out.operator = Some(cfg.operator.clone()),
            }
        }
        let p = &cfg.parameters;
        out.gamma = out.gamma.or(p.get("gamma").copied());
        out.alpha = out.alpha.or(p.get("alpha").copied());
        out.states = out.states.or(p.get("states").map(|v| *v as usize));
        out.actions = out.actions.or(p.get("actions").map(|v| *v as usize));
    }
    out
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| SrgError::Io { path: dir.to_path_buf(), source: e })
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

// ---------------------------------------------------------------------------
// srg

#[derive(Serialize)]
struct ClosedForm {
    log_norm: f64,
    log_norm_of_negative: f64,
    induced_norm: f64,
}

#[derive(Serialize)]
struct CheckSummary {
    #[serde(flatten)]
    report: CertificateReport,
    /// Verdict implied by the closed-form norms, for matrices and left SRGs.
    exact: Option<bool>,
}

#[derive(Serialize)]
struct CloudSummary {
    operator: String,
    spec: PairingSpec,
    side: Side,
    sampler: String,
    n: usize,
    seed: u64,
    points: usize,
    infinity_points: usize,
    min_re: Option<f64>,
    max_re: Option<f64>,
    max_gain: Option<f64>,
    closed_form: Option<ClosedForm>,
    checks: Vec<CheckSummary>,
}

fn parse_check(s: &str) -> Result<Property> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| SrgError::InvalidParameter(format!("check `{s}` must look like name=value")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| SrgError::InvalidParameter(format!("check `{s}`: `{value}` is not a number")))?;
    Property::from_name(name.trim(), value)
}

fn exact_verdict(cf: &ClosedForm, property: Property) -> Option<bool> {
    match property {
        Property::Lipschitz(l) => Some(cf.induced_norm <= l),
        Property::OneSided(c) => Some(cf.log_norm <= c),
        Property::StronglyMonotone(mu) => Some(-cf.log_norm_of_negative >= mu),
        Property::Cocoercive(_) => None,
    }
}

fn summarize(cloud: &SrgCloud, operator: &str, closed_form: Option<ClosedForm>, checks: &[Property]) -> Result<CloudSummary> {
    let checks = checks
        .iter()
        .map(|p| {
            Ok(CheckSummary {
                report: certify_with_tol(cloud, *p, DEFAULT_CERT_TOL)?,
                exact: closed_form
                    .as_ref()
                    .filter(|_| cloud.side == Side::Left)
                    .and_then(|cf| exact_verdict(cf, *p)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CloudSummary {
        operator: operator.to_string(),
        spec: cloud.spec,
        side: cloud.side,
        sampler: cloud.meta.sampler.clone(),
        n: cloud.meta.n,
        seed: cloud.meta.seed,
        points: cloud.len(),
        infinity_points: cloud.infinity_count(),
        min_re: cloud.min_re(),
        max_re: cloud.max_re(),
        max_gain: cloud.max_gain(),
        closed_form,
        checks,
    })
}

fn bellman_overlays(params: &BTreeMap<String, f64>) -> Vec<Overlay> {
    let mut ov = vec![Overlay::VerticalLine { re: 0.0 }];
    if let Some(&g) = params.get("gamma") {
        ov.push(Overlay::Disk { center_re: 0.0, radius: g, dashed: false });
        if let Some(&a) = params.get("alpha") {
            ov.push(Overlay::Disk { center_re: 0.0, radius: g + a, dashed: true });
        }
    }
    ov
}

pub fn srg(a: &SrgArgs) -> Result<u8> {
    let st = settings(&a.common)?;
    let op_args = operator_args(&a.op, st.config.as_ref());
    let r = operators::resolve(&op_args, st.seed)?;
    let spec = st.spec.unwrap_or(r.default_spec);
    let sampler = r.sampler(st.sampler);
    let mut checks = a.checks.iter().map(|s| parse_check(s)).collect::<Result<Vec<_>>>()?;
    if checks.is_empty() {
        if let Some(cfg) = &st.config {
            if let Some(p) = &cfg.property {
                checks.push(parse_check(p)?);
            }
        }
    }

    let cloud = sample_srg_with(&r.op, spec, st.side, &sampler, st.n, st.seed, st.mode)?;
    let closed_form = r
        .matrix
        .as_ref()
        .map(|m| -> Result<ClosedForm> {
            Ok(ClosedForm {
                log_norm: log_norm_closed_form(m, spec)?,
                log_norm_of_negative: log_norm_closed_form(&m.scaled(-1.0), spec)?,
                induced_norm: m.induced_norm(spec.norm_kind())?,
            })
        })
        .transpose()?;
    let summary = summarize(&cloud, &r.id, closed_form, &checks)?;

    prepare_dir(&st.out_dir)?;
    let paths = [
        ("cloud", st.out_dir.join("cloud.csv")),
        ("svg", st.out_dir.join("plot.svg")),
        ("summary", st.out_dir.join("summary.json")),
        ("config", st.out_dir.join("config.json")),
    ];
    write_cloud(&paths[0].1, &cloud)?;
    let mut overlays = if r.mdp.is_some() {
        bellman_overlays(&r.parameters)
    } else {
        vec![Overlay::UnitCircle, Overlay::VerticalLine { re: 0.0 }]
    };
    overlays.extend(checks.iter().filter_map(|p| match *p {
        Property::Cocoercive(g) => Some(Overlay::Disk { center_re: 0.5 / g, radius: 0.5 / g, dashed: true }),
        Property::Lipschitz(l) => Some(Overlay::Disk { center_re: 0.0, radius: l, dashed: true }),
        Property::OneSided(c) | Property::StronglyMonotone(c) if c != 0.0 => Some(Overlay::VerticalLine { re: c }),
        _ => None,
    }));
    let mut style = PlotStyle::fit(&[&cloud], &overlays);
    style.title = Some(format!("{} {} SRG of {}", spec, st.side, r.id));
    render_svg(&paths[1].1, &[&cloud], &overlays, &style)?;
    write_json(&paths[2].1, &summary)?;
    let config = RunConfig {
        command: "srg".into(),
        spec,
        side: st.side,
        sampler: sampler.id().into(),
        n: st.n,
        seed: st.seed,
        seed_source: st.seed_source.into(),
        operator: r.id.clone(),
        parameters: r.parameters.clone(),
        property: a.checks.first().cloned().or_else(|| st.config.as_ref().and_then(|c| c.property.clone())),
        outputs: paths.iter().map(|(k, p)| (k.to_string(), path_string(p))).collect(),
    };
    config.validate()?;
    write_json(&paths[3].1, &config)?;

    println!(
        "{}: {} points ({} at infinity), min re {}, max re {}, max gain {}",
        r.id,
        summary.points,
        summary.infinity_points,
        fmt_opt(summary.min_re),
        fmt_opt(summary.max_re),
        fmt_opt(summary.max_gain)
    );
    for c in &summary.checks {
        println!(
            "  {}: {:?} (margin {:.3e}){}",
            c.report.property,
            c.report.verdict,
            c.report.margin,
            c.exact.map_or(String::new(), |e| format!(", closed form says {}", if e { "holds" } else { "fails" }))
        );
    }
    println!("wrote {}", st.out_dir.display());
    Ok(EXIT_OK)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |v| format!("{v:.6}"))
}

// ---------------------------------------------------------------------------
// certify

pub fn certify(a: &CertifyArgs) -> Result<u8> {
    let cloud = read_cloud(&a.cloud)?;
    let property = Property::from_name(&a.property, a.parameter)?;
    let report = certify_with_tol(&cloud, property, a.tol)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &a.out {
        write_json(out, &report)?;
    }
    Ok(if report.holds() { EXIT_OK } else { EXIT_VIOLATED })
}

// ---------------------------------------------------------------------------
// calculus

fn resolve_named(name: &str, seed: u64) -> Result<Resolved> {
    if name.ends_with(".json") {
        operators::from_matrix_file(Path::new(name))
    } else {
        operators::builtin(name, &OperatorArgs::default(), seed)
    }
}

/// Largest discrepancy between two clouds built from the same draws: gain
/// (relative) and cosine of the phase. Infinite when the clouds do not line up.
fn cloud_deviation(a: &SrgCloud, b: &SrgCloud) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.points.iter().zip(&b.points).fold(0.0, |worst: f64, (p, q)| {
        if p.is_infinity != q.is_infinity || p.sample != q.sample {
            return f64::INFINITY;
        }
        if p.is_infinity {
            return worst;
        }
        let dg = (p.gain - q.gain).abs() / (1.0 + p.gain.abs());
        let dc = (p.phase.cos() - q.phase.cos()).abs();
        worst.max(dg).max(dc)
    })
}

#[derive(Serialize)]
struct CalculusSummary {
    rule: String,
    a: String,
    b: Option<String>,
    factor: Option<f64>,
    spec: PairingSpec,
    n: usize,
    seed: u64,
    containment: Option<ContainmentReport>,
    sigma_estimate: Option<f64>,
    sigma_used: Option<f64>,
    /// Max deviation from the directly sampled cloud (scale, invert).
    deviation: Option<f64>,
    /// Deviation when `A^{-1}` is evaluated numerically instead of read off the graph.
    evaluated_deviation: Option<f64>,
    passed: bool,
}

pub fn calculus(a: &CalculusArgs) -> Result<u8> {
    let st = settings(&a.common)?;
    let ra = resolve_named(&a.a, st.seed)?;
    let spec = st.spec.unwrap_or(ra.default_spec);
    spec.require_sip()?;
    let sampler = ra.sampler(st.sampler);
    let meta = SampleMeta::new(sampler.id(), st.n, st.seed);
    let dim = ra.op.dim();
    let mut summary = CalculusSummary {
        rule: format!("{:?}", a.rule).to_lowercase(),
        a: ra.id.clone(),
        b: None,
        factor: a.factor,
        spec,
        n: st.n,
        seed: st.seed,
        containment: None,
        sigma_estimate: None,
        sigma_used: None,
        deviation: None,
        evaluated_deviation: None,
        passed: false,
    };
    prepare_dir(&st.out_dir)?;
    let mut clouds: Vec<(&str, SrgCloud)> = Vec::new();

    match a.rule {
        Rule::Add | Rule::Compose => {
            let name_b = a
                .b
                .as_deref()
                .ok_or_else(|| SrgError::InvalidParameter("--b is required for add and compose".into()))?;
            let rb = resolve_named(name_b, st.seed)?;
            summary.b = Some(rb.id.clone());
            let pts = sampler.sample_points(st.mode, dim, st.n, st.seed);
            let (m, rule) = if a.rule == Rule::Add {
                (matched_sum(&ra.op, &rb.op, spec, &pts, meta, st.mode)?, CalculusRule::Boxplus)
            } else {
                let m = matched_composition(&ra.op, &rb.op, spec, &pts, meta, st.mode)?;
                let est = estimate_sigma(&ra.op, spec, &sampler, st.n, st.seed.wrapping_add(1))?;
                let sigma = SIGMA_SLACK * est.max(sigma_from_increments(&m.first_increments, spec)?);
                summary.sigma_estimate = Some(est);
                summary.sigma_used = Some(sigma);
                eprintln!("sigma estimate for {}: {est:.6} (using {sigma:.6})", ra.id);
                (m, CalculusRule::Diamond { sigma })
            };
            let rep = containment_report(&m.combined, &m.first, &m.second, rule, a.tol)?;
            summary.passed = rep.all_contained();
            println!("{}/{} points contained ({} via matched samples)", rep.contained, rep.tested, rep.matched_hits);
            summary.containment = Some(rep);
            clouds.push(("a", m.first));
            clouds.push(("b", m.second));
            clouds.push(("combined", m.combined));
        }
        Rule::Scale => {
            let factor = a
                .factor
                .ok_or_else(|| SrgError::InvalidParameter("--factor is required for scale".into()))?;
            let base = sample_srg_with(&ra.op, spec, Side::Left, &sampler, st.n, st.seed, st.mode)?;
            let scaled = srg_scale(&base, factor)?;
            let fresh = sample_srg_with(&ra.op.scaled(factor), spec, Side::Left, &sampler, st.n, st.seed, st.mode)?;
            let dev = cloud_deviation(&scaled, &fresh);
            summary.deviation = Some(dev);
            summary.passed = dev <= 1e-12;
            println!("max deviation from sampled {factor}*{}: {dev:.3e}", ra.id);
            clouds.push(("a", base));
            clouds.push(("combined", scaled));
        }
        Rule::Invert => {
            let m = ra
                .matrix
                .as_ref()
                .ok_or_else(|| SrgError::Unsupported("invert needs a matrix operator".into()))?;
            let inv = Operator::matrix(m.inverse()?)?;
            let incs = sample_increments(&ra.op, &sampler, st.n, st.seed, st.mode)?;
            let right = srg_from_increments(&incs, spec, Side::Right, meta.clone(), st.mode)?;
            let inverted = srg_invert(&right)?;
            let swapped: Vec<Increment> = incs.iter().map(Increment::swapped).collect();
            let graph = srg_from_increments(&swapped, spec, Side::Left, meta.clone(), st.mode)?;
            let evaluated: Vec<Increment> = incs
                .iter()
                .map(|inc| Ok(Increment::new(inc.v.clone(), inv.apply(&inc.v)?)))
                .collect::<Result<_>>()?;
            let eval_cloud = srg_from_increments(&evaluated, spec, Side::Left, meta, st.mode)?;
            let dev = cloud_deviation(&inverted, &graph);
            let eval_dev = cloud_deviation(&inverted, &eval_cloud);
            summary.deviation = Some(dev);
            summary.evaluated_deviation = Some(eval_dev);
            summary.passed = dev <= 1e-12;
            println!("max deviation from left SRG of the inverse: {dev:.3e} (numerical inverse {eval_dev:.3e})");
            clouds.push(("a", right));
            clouds.push(("combined", inverted));
        }
    }

    let mut outputs = BTreeMap::new();
    for (name, c) in &clouds {
        let p = st.out_dir.join(format!("{name}.csv"));
        write_cloud(&p, c)?;
        outputs.insert(format!("cloud_{name}"), path_string(&p));
    }
    let refs: Vec<&SrgCloud> = clouds.iter().map(|(_, c)| c).collect();
    let overlays = [Overlay::UnitCircle, Overlay::VerticalLine { re: 0.0 }];
    let svg = st.out_dir.join("calculus.svg");
    render_svg(&svg, &refs, &overlays, &PlotStyle::fit(&refs, &overlays))?;
    outputs.insert("svg".into(), path_string(&svg));
    let sp = st.out_dir.join("summary.json");
    write_json(&sp, &summary)?;
    outputs.insert("summary".into(), path_string(&sp));
    let cp = st.out_dir.join("config.json");
    outputs.insert("config".into(), path_string(&cp));
    let mut parameters = BTreeMap::new();
    if let Some(f) = a.factor {
        parameters.insert("factor".into(), f);
    }
    let config = RunConfig {
        command: format!("calculus {}", summary.rule),
        spec,
        side: Side::Left,
        sampler: sampler.id().into(),
        n: st.n,
        seed: st.seed,
        seed_source: st.seed_source.into(),
        operator: match &summary.b {
            Some(b) => format!("{},{}", ra.id, b),
            None => ra.id.clone(),
        },
        parameters,
        property: None,
        outputs,
    };
    config.validate()?;
    write_json(&cp, &config)?;
    Ok(if summary.passed { EXIT_OK } else { EXIT_VIOLATED })
}

// ---------------------------------------------------------------------------
// bellman

#[derive(Serialize)]
struct BellmanSummary {
    states: usize,
    actions: usize,
    gamma: f64,
    alpha: f64,
    seed: u64,
    spec: PairingSpec,
    n: usize,
    contraction_t: f64,
    contraction_t_reg: f64,
    /// `gamma + alpha` minus the sampled contraction factor of the regularised operator.
    regularization_margin: f64,
    certificate_t: CertificateReport,
    certificate_t_reg: CertificateReport,
    value_iteration_t: ValueIterationReport,
    value_iteration_t_reg: ValueIterationReport,
    /// `||v_T - (I - gamma P)^{-1} r||_inf` at the end of plain value iteration.
    value_function_error: f64,
}

pub fn bellman(a: &BellmanArgs) -> Result<u8> {
    let st = settings(&a.common)?;
    let cfg_param = |k: &str| st.config.as_ref().and_then(|c| c.parameters.get(k).copied());
    let gamma = a.gamma.or(cfg_param("gamma")).unwrap_or(DEFAULT_GAMMA);
    let alpha = a.alpha.or(cfg_param("alpha")).unwrap_or(DEFAULT_ALPHA);
    let states = a.states.or(cfg_param("states").map(|v| v as usize)).unwrap_or(DEFAULT_STATES);
    let actions = a.actions.or(cfg_param("actions").map(|v| v as usize)).unwrap_or(DEFAULT_ACTIONS);
    let op_args = OperatorArgs {
        gamma: Some(gamma),
        alpha: Some(alpha),
        states: Some(states),
        actions: Some(actions),
        ..OperatorArgs::default()
    };
    let t = operators::builtin("bellman", &op_args, st.seed)?;
    let treg = operators::builtin("bellman_reg", &op_args, st.seed)?;
    let mdp = t.mdp.clone().expect("bellman operators carry their MDP");
    let spec = st.spec.unwrap_or(PairingSpec::LInfMax);
    if spec.norm_kind() != NormKind::LInf {
        eprintln!("note: contraction of T_pi is guaranteed in the l-infinity norm; {spec} was requested");
    }
    let sampler = t.sampler(st.sampler);
    let c_t = sample_srg_with(&t.op, spec, st.side, &sampler, st.n, st.seed, st.mode)?;
    let c_reg = sample_srg_with(&treg.op, spec, st.side, &sampler, st.n, st.seed, st.mode)?;
    let l_t = contraction_factor(&c_t)?;
    let l_reg = contraction_factor(&c_reg)?;
    let cert_t = certify_with_tol(&c_t, Property::Lipschitz(gamma), DEFAULT_CERT_TOL)?;
    let cert_reg = certify_with_tol(&c_reg, Property::Lipschitz(gamma + alpha), DEFAULT_CERT_TOL)?;
    let v0 = Vector::zeros(states);
    let vi_t = value_iteration(&t.op, &v0, a.max_iter, a.tol_fix)?;
    let vi_reg = value_iteration(&treg.op, &v0, a.max_iter, a.tol_fix)?;
    let exact = value_function(&mdp, &Policy::first_action(states))?;
    let vf_err = (&vi_t.fixed_point - &exact).norm(NormKind::LInf);

    let summary = BellmanSummary {
        states,
        actions,
        gamma,
        alpha,
        seed: st.seed,
        spec,
        n: st.n,
        contraction_t: l_t,
        contraction_t_reg: l_reg,
        regularization_margin: gamma + alpha - l_reg,
        certificate_t: cert_t,
        certificate_t_reg: cert_reg,
        value_iteration_t: vi_t,
        value_iteration_t_reg: vi_reg,
        value_function_error: vf_err,
    };

    prepare_dir(&st.out_dir)?;
    let paths = [
        ("cloud_t", st.out_dir.join("bellman_t.csv")),
        ("cloud_t_reg", st.out_dir.join("bellman_t_reg.csv")),
        ("svg", st.out_dir.join("bellman.svg")),
        ("summary", st.out_dir.join("summary.json")),
        ("mdp", st.out_dir.join("mdp.json")),
        ("config", st.out_dir.join("config.json")),
    ];
    write_cloud(&paths[0].1, &c_t)?;
    write_cloud(&paths[1].1, &c_reg)?;
    let overlays = bellman_overlays(&treg.parameters);
    let mut style = PlotStyle::fit(&[&c_t, &c_reg], &overlays);
    style.title = Some(format!("left SRGs of T_pi and T_pi,alpha ({spec})"));
    render_svg(&paths[2].1, &[&c_t, &c_reg], &overlays, &style)?;
    write_json(&paths[3].1, &summary)?;
    write_json(&paths[4].1, &mdp)?;
    let config = RunConfig {
        command: "bellman".into(),
        spec,
        side: st.side,
        sampler: sampler.id().into(),
        n: st.n,
        seed: st.seed,
        seed_source: st.seed_source.into(),
        operator: "bellman,bellman_reg".into(),
        parameters: treg.parameters.clone(),
        property: None,
        outputs: paths.iter().map(|(k, p)| (k.to_string(), path_string(p))).collect(),
    };
    config.validate()?;
    write_json(&paths[5].1, &config)?;

    let s = &summary;
    println!("T_pi:       contraction {:.6} (gamma {gamma}), value iteration rate {:.6}", s.contraction_t, s.value_iteration_t.observed_rate);
    println!(
        "T_pi,alpha: contraction {:.6} (gamma + alpha {:.2}, margin {:.6}), value iteration rate {:.6}",
        s.contraction_t_reg,
        gamma + alpha,
        s.regularization_margin,
        s.value_iteration_t_reg.observed_rate
    );
    let ok = s.certificate_t.holds()
        && s.certificate_t_reg.holds()
        && s.value_iteration_t.converged
        && s.value_iteration_t_reg.converged
        && s.value_iteration_t.observed_rate <= s.contraction_t + 1e-3
        && s.value_iteration_t_reg.observed_rate <= s.contraction_t_reg + 1e-3;
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATED })
}
