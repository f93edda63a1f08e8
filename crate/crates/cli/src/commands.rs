//! One function per subcommand. Each returns its checks, a JSON result and a table.

use std::collections::BTreeMap;

use cfslab::acceptance::{run_criterion, summary_line, theorem_grid, validation_grid, KNOWN_FAILURES};
use cfslab::causal::{classify, closed_chain_spectrum, CausalKind};
use cfslab::kernel::{closed_form_components, kernel_p_bessel, scalar_components, trace_vac, ModelParams, ScalarComponents};
use cfslab::probes::{
    asymptotic_integral_lemma, asymptotic_integral_theorem, commutator_scaling_scan, cone_detection_scan,
    norm_boundedness_probe, nu_scan, unit_spinor, EpsGrid, PowerLawFit, ScanSeries,
};
use cfslab::sandbox::{
    build_basis, commutant_dimension, dirac_sequence_convergence, local_correlations, smeared_operator, span_check,
    ModeBasis, OperatorMatrix, Regularization,
};
use cfslab::{Exec, SpacetimePoint, SpinMatrix, C64};
use serde_json::{json, Value};

use crate::config::{GridConfig, KernelMethodArg, RunConfig};
use crate::error::CliError;
use crate::output::{num, Table};
use crate::specs::{parse_point_set, parse_test_function};

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: BTreeMap<String, bool>,
    pub result: Value,
    pub table: Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    Nu,
    ConeDetect,
    Commutator,
    LemmaIntegral,
    TheoremIntegral,
    NormProbe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraKind {
    Commutant,
    Timeslice,
    Span,
    TraceCheck,
    DiracSeq,
}

fn point(a: [f64; 4]) -> SpacetimePoint {
    SpacetimePoint::from_array(a)
}

fn point_cells(a: [f64; 4]) -> Vec<String> {
    a.iter().map(|c| num(*c)).collect()
}

fn complex_cells(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn grid(cfg: &RunConfig) -> Result<EpsGrid, CliError> {
    cfg.grid.ok_or_else(|| CliError::Invalid("no ε grid resolved".into()))?.to_grid()
}

/// Largest `|a_ij − b_ij|/|b_ij|`, with entries below `1e-12 max|b|` measured against that floor.
fn entrywise_deviation(a: &SpinMatrix, b: &SpinMatrix) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = 1e-12 * scale;
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm() / y.norm().max(floor).max(1e-300)).fold(0.0, f64::max)
}

fn components_json(c: &ScalarComponents) -> Value {
    json!({
        "v": c.v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "beta": [c.beta.re, c.beta.im],
        "est_error": c.est_error,
    })
}

/// `P^{nε}` on the configured points.
pub fn kernel(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.params()?;
    let method = cfg.kernel.method;
    let mut header: Vec<String> = ["t", "x", "y", "z"].map(String::from).to_vec();
    for r in 0..4 {
        for c in 0..4 {
            header.push(format!("p{r}{c}_re"));
            header.push(format!("p{r}{c}_im"));
        }
    }
    for j in 0..4 {
        header.push(format!("v{j}_re"));
        header.push(format!("v{j}_im"));
    }
    header.extend(["beta_re", "beta_im", "est_error", "method"].map(String::from));
    if method == KernelMethodArg::Both {
        header.push("cross_dev".into());
    }
    let mut table = Table::new(header);
    let mut rows = Vec::new();
    let mut max_dev: f64 = 0.0;
    for &xi in &cfg.kernel.xi {
        let z = point(xi);
        let quad = || scalar_components(&p, z);
        let bessel = || -> Result<ScalarComponents, CliError> {
            kernel_p_bessel(&p.single_power(), z, SpacetimePoint::ORIGIN, cfg.kernel.cone_tol)?;
            Ok(closed_form_components(p.mass, p.eps_eff(), z)?)
        };
        let (primary, label, other) = match method {
            KernelMethodArg::Quadrature => (quad()?, "quadrature", None),
            KernelMethodArg::Bessel => (bessel()?, "bessel", None),
            KernelMethodArg::Both => (quad()?, "quadrature", Some(bessel()?)),
        };
        let m = primary.to_matrix();
        let mut row = point_cells(xi);
        row.extend(m.transpose().iter().flat_map(|z| complex_cells(*z)));
        row.extend(primary.v.iter().flat_map(|z| complex_cells(*z)));
        row.extend(complex_cells(primary.beta));
        row.push(num(primary.est_error));
        row.push(label.into());
        let mut entry = json!({"xi": xi, "method": label, "components": components_json(&primary)});
        if let Some(b) = other {
            let dev = entrywise_deviation(&m, &b.to_matrix());
            max_dev = max_dev.max(dev);
            row.push(num(dev));
            entry["bessel_components"] = components_json(&b);
            entry["cross_dev"] = json!(dev);
        }
        table.push(row);
        rows.push(entry);
    }
    let mut checks = BTreeMap::new();
    let mut result = json!({"params": p, "points": rows});
    if method == KernelMethodArg::Both {
        checks.insert(format!("cross deviation < {:e}", cfg.kernel.max_cross_dev), max_dev < cfg.kernel.max_cross_dev);
        result["max_cross_dev"] = json!(max_dev);
    }
    Ok(Outcome { checks, result, table })
}

/// Spectral classification of closed chains `A_{ξ,0}`.
pub fn classify_points(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.params()?;
    let c = &cfg.classify;
    let validation = c.xi.is_empty();
    let points: Vec<(SpacetimePoint, Option<CausalKind>)> = if validation {
        validation_grid(c.space_margin * cfg.epsilon, c.time_margin * cfg.epsilon).into_iter().map(|(x, k)| (x, Some(k))).collect()
    } else {
        c.xi.iter().map(|x| (point(*x), None)).collect()
    };
    let mut header: Vec<String> = ["t", "x", "y", "z", "kind", "expected", "correct"].map(String::from).to_vec();
    for i in 1..=4 {
        header.push(format!("lambda{i}_re"));
        header.push(format!("lambda{i}_im"));
    }
    header.extend(["modulus_spread", "max_imag", "residual", "tol_modulus", "tol_imag"].map(String::from));
    let mut table = Table::new(header);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut correct = 0;
    for (xi, expected) in &points {
        let spec = closed_chain_spectrum(&p, *xi, SpacetimePoint::ORIGIN)?;
        let cls = classify(&spec, c.tol_modulus, c.tol_imag);
        *counts.entry(cls.kind.to_string()).or_default() += 1;
        let ok = expected.map(|e| e == cls.kind);
        correct += usize::from(ok == Some(true));
        let mut row = point_cells(xi.to_array());
        row.push(cls.kind.to_string());
        row.push(expected.map(|e| e.to_string()).unwrap_or_default());
        row.push(ok.map(|o| o.to_string()).unwrap_or_default());
        row.extend(spec.eigenvalues.iter().flat_map(|z| complex_cells(*z)));
        row.extend([spec.modulus_spread, spec.max_imag, spec.residual, cls.tol_modulus, cls.tol_imag].map(num));
        table.push(row);
    }
    let mut checks = BTreeMap::new();
    let mut result = json!({"points": points.len(), "counts": counts, "grid": if validation { "validation" } else { "explicit" }});
    if validation {
        checks.insert("all validation points classified correctly".into(), correct == points.len());
        result["correct"] = json!(correct);
    }
    Ok(Outcome { checks, result, table })
}

/// Fills the grid, box and thresholds a scan leaves unset.
pub fn resolve_scan(cfg: &mut RunConfig, kind: ScanKind) {
    let s = &mut cfg.scan;
    let default_box = match kind {
        ScanKind::Nu => None,
        ScanKind::ConeDetect | ScanKind::Commutator => Some("on-cone-default"),
        ScanKind::LemmaIntegral => Some("lemma-default"),
        ScanKind::TheoremIntegral => Some("theorem-default"),
        ScanKind::NormProbe => Some("off-cone-default"),
    };
    if s.box_spec.is_none() {
        s.box_spec = default_box.map(String::from);
    }
    if cfg.grid.is_none() {
        cfg.grid = Some(match kind {
            ScanKind::TheoremIntegral => {
                let g = theorem_grid();
                GridConfig { hi: g.values[0], lo: g.values[g.len() - 1], count: g.len() }
            }
            ScanKind::Commutator => GridConfig { hi: 1e-1, lo: 1e-3, count: 6 },
            ScanKind::NormProbe => GridConfig { hi: 1e-1, lo: 1e-2, count: 6 },
            _ => GridConfig { hi: 1e-1, lo: 1e-3, count: 12 },
        });
    }
    // Thresholds apply only to the named presets they were established for.
    let preset = s.box_spec.as_deref();
    let (lo, hi, r2) = match (kind, preset) {
        (ScanKind::Nu, _) => (Some(-3.05), Some(-2.95), Some(0.99)),
        (ScanKind::ConeDetect, Some("on-cone-default")) => (None, Some(-1.8), Some(0.98)),
        (ScanKind::ConeDetect, Some("off-cone-default")) => (Some(-0.2), None, None),
        (ScanKind::Commutator, Some("off-cone-default")) => (Some(1.4), None, None),
        (ScanKind::Commutator, Some("on-cone-default")) => (None, Some(1.1), None),
        (ScanKind::LemmaIntegral, Some("lemma-default")) => (Some(-3.1), Some(-2.9), Some(0.98)),
        (ScanKind::TheoremIntegral, Some("theorem-default")) => (Some(-2.1), Some(-1.9), Some(0.98)),
        (ScanKind::NormProbe, Some("off-cone-default")) => (Some(1.4), None, None),
        _ => (None, None, None),
    };
    if s.exponent_min.is_none() && s.exponent_max.is_none() && s.r_squared_min.is_none() {
        s.exponent_min = lo;
        s.exponent_max = hi;
        s.r_squared_min = r2;
    }
}

fn series_rows(table: &mut Table, s: &ScanSeries) {
    for p in &s.points {
        table.push(vec![s.label.clone(), num(p.eps), num(p.value.re), num(p.value.im), num(p.value.norm()), num(p.est_error)]);
    }
}

fn fit_checks(cfg: &RunConfig, name: &str, fit: &PowerLawFit, checks: &mut BTreeMap<String, bool>) {
    let s = &cfg.scan;
    if let Some(lo) = s.exponent_min {
        checks.insert(format!("{name} exponent >= {lo}"), fit.exponent >= lo);
    }
    if let Some(hi) = s.exponent_max {
        checks.insert(format!("{name} exponent <= {hi}"), fit.exponent <= hi);
    }
    if let Some(r2) = s.r_squared_min {
        checks.insert(format!("{name} r_squared >= {r2}"), fit.r_squared >= r2);
    }
}

/// Scaling runs over an ε grid. `cfg` must already be resolved.
pub fn scan(cfg: &RunConfig, kind: ScanKind, exec: Exec) -> Result<Outcome, CliError> {
    let g = grid(cfg)?;
    let s = &cfg.scan;
    let f = s.box_spec.as_deref().map(parse_test_function).transpose()?;
    let need_f = || f.clone().ok_or_else(|| CliError::Invalid("this scan needs a test function (--box)".into()));
    let mut checks = BTreeMap::new();
    let mut table = Table::new(["label", "eps", "re", "im", "abs", "est_error"]);
    let mut result = json!({"grid": g.values});
    let mut fits = serde_json::Map::new();
    let primary = |series: &ScanSeries, table: &mut Table, fits: &mut serde_json::Map<String, Value>| -> Result<PowerLawFit, CliError> {
        series_rows(table, series);
        let fit = series.fit()?;
        fits.insert(series.label.clone(), json!(fit));
        Ok(fit)
    };
    match kind {
        ScanKind::Nu => {
            let (nu, tr) = nu_scan(cfg.mass, &g)?;
            let fit = primary(&nu, &mut table, &mut fits)?;
            primary(&tr, &mut table, &mut fits)?;
            fit_checks(cfg, "nu_plus", &fit, &mut checks);
        }
        ScanKind::ConeDetect => {
            let series = cone_detection_scan(cfg.mass, &need_f()?, &unit_spinor(s.chi)?, &unit_spinor(s.zeta)?, &g, s.mode, s.outer, exec)?;
            let fit = primary(&series, &mut table, &mut fits)?;
            fit_checks(cfg, "detection", &fit, &mut checks);
        }
        ScanKind::Commutator => {
            let spec = cfg.basis_spec()?;
            let series = commutator_scaling_scan(point(s.x), &need_f()?, &g, &spec, exec)?;
            let fit = primary(&series, &mut table, &mut fits)?;
            fit_checks(cfg, "commutator ratio", &fit, &mut checks);
        }
        ScanKind::LemmaIntegral => {
            let series = asymptotic_integral_lemma(&need_f()?, &g, s.outer, exec)?;
            let fit = primary(&series, &mut table, &mut fits)?;
            fit_checks(cfg, "lemma integral", &fit, &mut checks);
        }
        ScanKind::TheoremIntegral => {
            let series = asymptotic_integral_theorem(cfg.mass, &need_f()?, &g, s.outer, exec)?;
            let fit = primary(&series, &mut table, &mut fits)?;
            fits.insert(format!("{}_re", series.label), json!(series.fit_re()?));
            fits.insert(format!("{}_im", series.label), json!(series.fit_im()?));
            fit_checks(cfg, "theorem integral", &fit, &mut checks);
        }
        ScanKind::NormProbe => {
            let probe = norm_boundedness_probe(cfg.mass, &need_f()?, &unit_spinor(s.chi)?, &g, s.nodes, exec)?;
            table = Table::new(["eps", "image_norm", "state_norm", "ratio"]);
            for p in &probe.points {
                table.push(vec![num(p.eps), num(p.image_norm), num(p.state_norm), num(p.ratio)]);
            }
            fits.insert("ratio".into(), json!(probe.ratio_fit));
            result["sup_image_norm"] = json!(probe.sup_image_norm);
            fit_checks(cfg, "norm ratio", &probe.ratio_fit, &mut checks);
        }
    }
    result["fits"] = Value::Object(fits);
    Ok(Outcome { checks, result, table })
}

/// Fills the point set an algebra check leaves unset.
pub fn resolve_algebra(cfg: &mut RunConfig, kind: AlgebraKind) {
    if cfg.algebra.points.is_none() {
        cfg.algebra.points = match kind {
            AlgebraKind::Commutant | AlgebraKind::Span => Some("ball:8".into()),
            AlgebraKind::Timeslice => Some("slice:8".into()),
            AlgebraKind::TraceCheck | AlgebraKind::DiracSeq => None,
        };
    }
}

fn dumps(result: &mut Value, basis: &ModeBasis, ops: &[OperatorMatrix]) {
    result["basis"] = json!(basis.dump());
    result["operators"] = json!(ops.iter().map(OperatorMatrix::dump).collect::<Vec<_>>());
}

/// Sandbox checks on the truncated mode basis. `cfg` must already be resolved.
pub fn algebra(cfg: &RunConfig, kind: AlgebraKind, exec: Exec) -> Result<Outcome, CliError> {
    let a = &cfg.algebra;
    let eps = cfg.epsilon;
    let spec = cfg.basis_spec()?;
    let basis = build_basis(&spec)?;
    let mut checks = BTreeMap::new();
    let mut result = json!({"basis_spec": spec, "modes": basis.len(), "eps": eps});
    let mut table: Table;
    let points = || -> Result<Vec<SpacetimePoint>, CliError> {
        let s = a.points.as_deref().ok_or_else(|| CliError::Invalid("this check needs a point set (--points)".into()))?;
        parse_point_set(s, a.center, a.radius, cfg.seed)
    };
    match kind {
        AlgebraKind::Commutant | AlgebraKind::Timeslice | AlgebraKind::Span => {
            let pts = points()?;
            let ops = local_correlations(&basis, eps, &pts, exec)?;
            table = Table::new(["t", "x", "y", "z"]);
            for p in &pts {
                table.push(point_cells(p.to_array()));
            }
            result["points"] = json!(pts.iter().map(|p| p.to_array()).collect::<Vec<_>>());
            if kind == AlgebraKind::Span {
                let rep = span_check(&ops, a.rank_tol)?;
                checks.insert("ranges span the truncated space".into(), rep.full);
                result["span"] = json!(rep);
            } else {
                let rep = commutant_dimension(&ops, a.rank_tol, exec)?;
                checks.insert("commutant dimension = 1".into(), rep.dimension == 1);
                result["commutant"] = json!(rep);
            }
            if a.dump {
                dumps(&mut result, &basis, &ops);
            }
        }
        AlgebraKind::TraceCheck => {
            let f = parse_test_function(&a.f)?;
            let op = smeared_operator(&basis, &f, Regularization::Eps(eps), exec)?;
            let tr = op.data.trace();
            let want = f.integral() * trace_vac(&ModelParams::new(cfg.mass, spec.eps_ref, 1)?)?;
            let dev = (tr - want).norm() / want.norm().max(1e-300);
            checks.insert(format!("relative trace residual < {:e}", a.max_trace_dev), dev < a.max_trace_dev);
            result["trace"] = json!([tr.re, tr.im]);
            result["expected"] = json!([want.re, want.im]);
            result["relative_residual"] = json!(dev);
            result["test_function"] = json!(f);
            table = Table::new(["trace_re", "trace_im", "expected_re", "expected_im", "relative_residual"]);
            table.push(vec![num(tr.re), num(tr.im), num(want.re), num(want.im), num(dev)]);
            if a.dump {
                dumps(&mut result, &basis, std::slice::from_ref(&op));
            }
        }
        AlgebraKind::DiracSeq => {
            let steps = dirac_sequence_convergence(&basis, eps, point(a.center), &a.ns, exec)?;
            table = Table::new(["n", "gap", "relative_gap"]);
            for s in &steps {
                table.push(vec![s.n.to_string(), num(s.gap), num(s.relative_gap)]);
            }
            let last = steps.last().map(|s| s.relative_gap).unwrap_or(f64::INFINITY);
            checks.insert(format!("final relative gap < {:e}", a.max_dirac_gap), last < a.max_dirac_gap);
            result["steps"] = json!(steps);
            if a.dump {
                dumps(&mut result, &basis, &[]);
            }
        }
    }
    Ok(Outcome { checks, result, table })
}

/// Runs the acceptance criteria; progress lines go to stderr.
pub fn acceptance(cfg: &RunConfig, exec: Exec) -> Result<Outcome, CliError> {
    let ids: Vec<u8> = if cfg.acceptance.only.is_empty() { (1..=10).collect() } else { cfg.acceptance.only.clone() };
    let mut table = Table::new(["id", "title", "passed", "known_failure", "error"]);
    let mut checks = BTreeMap::new();
    let mut outcomes: Vec<Value> = Vec::new();
    for id in ids {
        let known = KNOWN_FAILURES.contains(&id);
        let (passed, title, error, value) = match run_criterion(id, exec) {
            Ok(o) => {
                eprintln!("{}", summary_line(&o));
                (o.passed, o.title.clone(), String::new(), json!(o))
            }
            Err(e) => {
                eprintln!("criterion {id}: FAIL ({e})");
                (false, String::new(), e.to_string(), json!({"id": id, "passed": false, "error": e.to_string()}))
            }
        };
        let allowed = !passed && known && cfg.acceptance.allow_known_failures;
        let key = if allowed { format!("criterion {id:02} (known failure, allowed)") } else { format!("criterion {id:02}") };
        checks.insert(key, passed || allowed);
        table.push(vec![id.to_string(), title, passed.to_string(), known.to_string(), error]);
        outcomes.push(value);
    }
    let result = json!({"known_failures": KNOWN_FAILURES, "criteria": outcomes});
    Ok(Outcome { checks, result, table })
}
