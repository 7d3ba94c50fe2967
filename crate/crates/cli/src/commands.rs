use photon_position::berry::{
    berry_phase_closed, berry_phase_integral, transport, Curve, ExampleGauge, LoopSpec,
};
use photon_position::connection::{gamma_closed_form, ConnectionParams};
use photon_position::eigenstates::{energy_density, helicity_polarization, ClosedForm, DensityGrid};
use photon_position::geometry;
use photon_position::ode::OdeTolerance;
use photon_position::phasespace::{phase_space_image, GridPoint};
use photon_position::quadrature::Tolerance;
use photon_position::{Constants, Gauge, MomentumPoint, Vec3R, C64};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::output::{complex, cvec3, mat3, num, report, vec3};
use crate::{Failure, Format, FormArg, Global, Rendered};

fn json_only(g: &Global, command: &str) -> Result<(), Failure> {
    if g.format == Some(Format::Csv) {
        return Err(Failure::Usage(format!("`{command}` only produces JSON")));
    }
    Ok(())
}

fn ok(text: String) -> Rendered {
    Rendered { text, failed: false }
}

#[allow(clippy::too_many_arguments)]
pub fn eigen_density(
    g: &Global,
    constants: &Constants,
    distance: f64,
    c1: C64,
    c2: C64,
    n_theta: usize,
    n_phi: usize,
    margin: f64,
    form: FormArg,
) -> Result<Rendered, Failure> {
    if !(distance > 0.0) || !(margin >= 0.0) {
        return Err(Failure::Usage("distance must be positive and margin nonnegative".into()));
    }
    let grid = DensityGrid { n_theta, n_phi, margin };
    let form = match form {
        FormArg::Printed => ClosedForm::Printed,
        FormArg::Amended => ClosedForm::Amended,
    };
    let cells = energy_density(&grid, distance, c1, c2, constants, form);
    let mut skipped = Vec::new();
    let mut kept = Vec::new();
    for cell in &cells {
        match &cell.density {
            Ok(d) => kept.push((cell.theta1, cell.phi1, *d)),
            Err(e) => {
                eprintln!("skipped θ₁={} φ₁={}: {e}", cell.theta1, cell.phi1);
                skipped.push(json!({"theta1": num(cell.theta1), "phi1": num(cell.phi1), "error": e.to_string()}));
            }
        }
    }
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Failure::Usage(e.to_string());
            w.write_record(["theta1", "phi1", "density"]).map_err(io)?;
            for (t, p, d) in kept {
                w.write_record([t.to_string(), p.to_string(), d.to_string()]).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(ok(String::from_utf8(bytes).expect("ascii")))
        }
        Format::Json => {
            let mut body = Map::new();
            body.insert("distance".into(), num(distance));
            body.insert("c1".into(), complex(c1));
            body.insert("c2".into(), complex(c2));
            body.insert(
                "cells".into(),
                Value::Array(
                    kept.into_iter()
                        .map(|(t, p, d)| json!({"theta1": num(t), "phi1": num(p), "density": num(d)}))
                        .collect(),
                ),
            );
            body.insert("skipped".into(), Value::Array(skipped));
            Ok(ok(report("eigen-density", body)))
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GaugeJson {
    Index(u8),
    Name(String),
}

impl GaugeJson {
    fn resolve(&self) -> Result<Gauge, Failure> {
        let name = match self {
            GaugeJson::Index(i) => i.to_string(),
            GaugeJson::Name(s) => s.clone(),
        };
        Gauge::from_name(&name).ok_or_else(|| Failure::Usage(format!("unknown gauge `{name}` in loop spec")))
    }
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum LoopJson {
    Circle {
        theta: f64,
        #[serde(default = "unit_radius")]
        radius: f64,
        gauge: Option<GaugeJson>,
        lambda: i32,
    },
    Polyline {
        nodes: Vec<[f64; 3]>,
        gauge: Option<GaugeJson>,
        lambda: i32,
    },
}

fn unit_radius() -> f64 {
    1.0
}

pub fn berry(g: &Global, spec: &str) -> Result<Rendered, Failure> {
    json_only(g, "berry")?;
    let text = match spec.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?,
        None => spec.to_string(),
    };
    let parsed: LoopJson = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("loop spec: {e}")))?;
    let default_gauge = || Gauge::from_name(&g.gauge).expect("validated");
    let (spec, closed_form) = match parsed {
        LoopJson::Circle {
            theta,
            radius,
            gauge,
            lambda,
        } => {
            let gauge = gauge.map(|x| x.resolve()).transpose()?.unwrap_or_else(default_gauge);
            let which = match gauge {
                Gauge::StereoNorth => Some(ExampleGauge::North),
                Gauge::Spherical => Some(ExampleGauge::Spherical),
                Gauge::StereoSouth => Some(ExampleGauge::South),
                _ => None,
            };
            let closed = which.and_then(|w| berry_phase_closed(theta, lambda, w).ok());
            (LoopSpec::circle(theta, radius, gauge, lambda)?, closed)
        }
        LoopJson::Polyline { nodes, gauge, lambda } => {
            let gauge = gauge.map(|x| x.resolve()).transpose()?.unwrap_or_else(default_gauge);
            let nodes: Vec<Vec3R> = nodes.into_iter().map(Vec3R).collect();
            let closed = nodes.len() >= 2 && (nodes[0] - nodes[nodes.len() - 1]).norm() <= 1e-12;
            (LoopSpec::new(Curve::Polyline(nodes), closed, gauge, lambda)?, None)
        }
    };
    let quad = Tolerance::new(1e-14, g.tol.unwrap_or(1e-12), 1_000_000)?;
    let est = berry_phase_integral(&spec, &quad)?;
    let ode = OdeTolerance {
        rel: g.tol.unwrap_or(1e-10),
        ..OdeTolerance::default()
    };
    let k0 = MomentumPoint::in_gauge(spec.curve.point(spec.curve.range().0), &spec.gauge)?;
    let psi0 = helicity_polarization(&k0, spec.lambda, &spec.gauge)?;
    let t = transport(&spec, &psi0, &ode)?;
    let gamma = est.value;
    let factor = C64::from_polar(1.0, gamma);
    let mut body = Map::new();
    body.insert("gauge".into(), json!(spec.gauge.name()));
    body.insert("lambda".into(), json!(spec.lambda));
    body.insert("gamma".into(), num(gamma));
    body.insert("phase_factor_re".into(), num(factor.re));
    body.insert("phase_factor_im".into(), num(factor.im));
    body.insert("closed_form".into(), closed_form.map_or(Value::Null, num));
    body.insert("abs_error".into(), closed_form.map_or(Value::Null, |c| num((gamma - c).abs())));
    body.insert("quadrature_error".into(), num(est.error));
    body.insert("transport_phase".into(), num(t.phase));
    body.insert("transport_max_drift".into(), num(t.max_drift));
    Ok(ok(report("berry", body)))
}

pub fn frame(g: &Global, gauge: &Gauge, k: Vec3R) -> Result<Rendered, Failure> {
    json_only(g, "frame")?;
    let pt = MomentumPoint::in_gauge(k, gauge)?;
    let f = geometry::frame(&pt, gauge)?;
    let params = ConnectionParams::new(g.s, gauge.clone())?;
    let gamma = gamma_closed_form(&pt, &params)?;
    let mut body = Map::new();
    body.insert("gauge".into(), json!(gauge.name()));
    body.insert("s".into(), num(g.s));
    body.insert("k".into(), vec3(&k));
    body.insert("E1".into(), cvec3(&f.legs[0]));
    body.insert("E2".into(), cvec3(&f.legs[1]));
    body.insert("E3".into(), cvec3(&f.legs[2]));
    body.insert("orthonormality_defect".into(), num(f.orthonormality_defect()));
    body.insert("sigma_coefficient".into(), vec3(&gauge.sigma_coefficient(&k)?));
    body.insert("gamma".into(), Value::Array(gamma.gamma.iter().map(mat3).collect()));
    Ok(ok(report("frame", body)))
}

#[allow(clippy::too_many_arguments)]
pub fn phasespace(
    g: &Global,
    gauge: &Gauge,
    constants: &Constants,
    p: Vec3R,
    x: Vec3R,
    m: usize,
    n: usize,
    l: Option<usize>,
) -> Result<Rendered, Failure> {
    json_only(g, "phasespace")?;
    let point = GridPoint::new(m, n)?;
    let image = phase_space_image(&p, &x, point, gauge, constants)?;
    let mut body = Map::new();
    body.insert("gauge".into(), json!(gauge.name()));
    body.insert("hbar".into(), num(constants.hbar()));
    body.insert("p".into(), vec3(&p));
    body.insert("x".into(), vec3(&x));
    body.insert("m".into(), json!(m));
    body.insert("n".into(), json!(n));
    body.insert("phi_m".into(), num(point.phi()));
    match l {
        Some(l) if l < 3 => {
            body.insert("l".into(), json!(l));
            body.insert("value".into(), num(image[l]));
        }
        Some(l) => return Err(Failure::Usage(format!("component index {l} out of range"))),
        None => {
            body.insert("X".into(), vec3(&image));
        }
    }
    Ok(ok(report("phasespace", body)))
}
