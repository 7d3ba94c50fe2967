//! The invariant suite behind `verify`.

use std::f64::consts::PI;
use std::sync::Arc;

use photon_position::berry::{berry_phase_closed, berry_phase_integral, ExampleGauge, LoopSpec};
use photon_position::connection::{curvature_residual, gamma_closed_form, gamma_from_frame, torsion, ConnectionParams};
use photon_position::eigenstates::{eigenfunction_momentum, EigenParams};
use photon_position::geometry::FnField;
use photon_position::inner_product::{antihermiticity_residual, QuadratureSpec};
use photon_position::operator::{
    apply_position, commutator_residual, transversality_residual, FlatPosition, PositionOperator, PryceOperator,
};
use photon_position::phasespace::{grid_d_operator, grid_d_operator_form, phase_space_image, GridPoint, D_FORMS};
use photon_position::quadrature::Tolerance;
use photon_position::section::{gaussian_bump, Differentiation, WaveSection};
use photon_position::{Constants, Gauge, MomentumPoint, Result, Vec3C, Vec3R, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::output::{num, report};
use crate::{Failure, Fault, Format, Global, Rendered};

struct Check {
    name: &'static str,
    points: usize,
    max_residual: f64,
    tolerance: f64,
    /// `true` when the residual must exceed the tolerance.
    lower_bound: bool,
}

impl Check {
    fn pass(&self) -> bool {
        if self.lower_bound {
            self.max_residual > self.tolerance
        } else {
            self.max_residual < self.tolerance
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "points": self.points,
            "max_residual": num(self.max_residual),
            "tolerance": num(self.tolerance),
            "pass": self.pass(),
        })
    }
}

/// Point with `0.3 < |k| < 3` at least 0.1 rad from the `k₃`-axis.
fn random_point(rng: &mut ChaCha8Rng) -> MomentumPoint {
    loop {
        let r = rng.gen_range(0.3..3.0);
        let ct: f64 = rng.gen_range(-1.0..1.0);
        let phi = rng.gen_range(0.0..2.0 * PI);
        let st = (1.0 - ct * ct).sqrt();
        if st > 0.1 {
            return MomentumPoint::new(Vec3R::new(r * st * phi.cos(), r * st * phi.sin(), r * ct)).expect("nonzero");
        }
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_bump(rng: &mut ChaCha8Rng, center: Vec3R, widths: (f64, f64)) -> Result<WaveSection> {
    let pol = Vec3C::new(random_complex(rng), random_complex(rng), random_complex(rng));
    gaussian_bump(center, pol, rng.gen_range(widths.0..widths.1))
}

fn max_over(points: usize, mut f: impl FnMut() -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        worst = worst.max(f()?);
    }
    Ok(worst)
}

pub fn run(g: &Global, gauge: &Gauge, constants: &Constants) -> std::result::Result<Rendered, Failure> {
    if g.format == Some(Format::Csv) {
        return Err(Failure::Usage("`verify` only produces JSON".into()));
    }
    let checks = suite(g, gauge, constants)?;
    let all = checks.iter().all(Check::pass);
    let mut body = Map::new();
    body.insert("seed".into(), json!(g.seed));
    body.insert("gauge".into(), json!(gauge.name()));
    body.insert("s".into(), num(g.s));
    body.insert("fault".into(), json!(g.fault.map(|_| "pryce")));
    body.insert("invariants".into(), Value::Array(checks.iter().map(Check::to_json).collect()));
    body.insert("pass".into(), json!(all));
    Ok(Rendered {
        text: report("verify", body),
        failed: !all,
    })
}

fn suite(g: &Global, gauge: &Gauge, constants: &Constants) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let params = ConnectionParams::new(g.s, gauge.clone())?;
    let mut checks = Vec::new();

    let n = 30;
    let r = max_over(n, || curvature_residual(&random_point(&mut rng), &params, None))?;
    checks.push(Check {
        name: "flatness",
        points: n,
        max_residual: r,
        tolerance: 1e-6,
        lower_bound: false,
    });

    let r = max_over(n, || {
        let k = random_point(&mut rng);
        Ok(gamma_closed_form(&k, &params)?.max_abs_diff(&gamma_from_frame(&k, &params, None)?))
    })?;
    checks.push(Check {
        name: "closed-form connection",
        points: n,
        max_residual: r,
        tolerance: 1e-6,
        lower_bound: false,
    });

    let op: Arc<dyn PositionOperator> = match g.fault {
        Some(Fault::Pryce) => Arc::new(PryceOperator),
        None => Arc::new(FlatPosition { params: params.clone() }),
    };
    let fd = Differentiation::FiniteDifference(None);
    let n_ops = 20;
    let (mut comm, mut trans): (f64, f64) = (0.0, 0.0);
    for _ in 0..n_ops {
        let k = random_point(&mut rng);
        let offset = Vec3R::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
        let section = random_bump(&mut rng, *k.k() + offset, (0.3, 0.6))?;
        let (l, m) = [(0, 1), (0, 2), (1, 2)][rng.gen_range(0..3)];
        comm = comm.max(commutator_residual(op.clone(), &section, &k, l, m, fd, None)?.max_abs());
        for axis in 0..3 {
            let v = op.apply_with(&section, &k, axis, Differentiation::Auto)?;
            trans = trans.max(transversality_residual(&v, k.k()) / k.norm());
        }
    }
    checks.push(Check {
        name: "commutativity",
        points: n_ops,
        max_residual: comm,
        tolerance: 1e-5,
        lower_bound: false,
    });
    checks.push(Check {
        name: "transversality",
        points: n_ops,
        max_residual: trans,
        tolerance: 1e-8,
        lower_bound: false,
    });

    // one pair of bumps kept away from the origin and the k₃-axis
    let dir = Vec3R::new(0.8, 0.3, -0.5);
    let center = dir.scale(2.0 / dir.norm());
    let a = random_bump(&mut rng, center, (0.3, 0.4))?;
    let b = random_bump(&mut rng, center + Vec3R::new(0.1, -0.1, 0.05), (0.3, 0.4))?;
    let q = QuadratureSpec {
        tolerance: Tolerance::new(1e-300, g.tol.unwrap_or(1e-7), 10_000_000)?,
        ..Default::default()
    };
    let r = antihermiticity_residual(&a, &b, rng.gen_range(0..3), &params, &q)?;
    checks.push(Check {
        name: "anti-hermiticity",
        points: 1,
        max_residual: r.relative(),
        tolerance: 1e-6,
        lower_bound: false,
    });

    let r = max_over(n, || {
        let e = EigenParams {
            x: Vec3R::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            c1: random_complex(&mut rng),
            c2: random_complex(&mut rng),
            s: g.s,
            gauge: gauge.clone(),
        };
        let psi = eigenfunction_momentum(&e);
        let k = random_point(&mut rng);
        let v = psi.value(k.k())?;
        let mut worst: f64 = 0.0;
        for l in 0..3 {
            worst = worst.max((apply_position(&psi, &k, l, &params)? - v.scale_re(e.x[l])).max_abs());
        }
        Ok(worst)
    })?;
    checks.push(Check {
        name: "eigen-relation",
        points: n,
        max_residual: r,
        tolerance: 1e-8,
        lower_bound: false,
    });

    let q = torsion(&MomentumPoint::new(Vec3R::new(1.0, 0.0, 0.0))?, 0.5, &FnField::constant(0.0))?;
    checks.push(Check {
        name: "torsion witness",
        points: 1,
        max_residual: (q.get(1, 1, 0) - 0.5).abs().max(q.antisymmetry_defect()),
        tolerance: 1e-9,
        lower_bound: false,
    });

    let tol = Tolerance::new(1e-13, 1e-12, 1_000_000)?;
    let mut worst: f64 = 0.0;
    let mut loops = 0;
    for which in [ExampleGauge::North, ExampleGauge::Spherical, ExampleGauge::South] {
        for theta in [PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
            for lambda in [1, -1] {
                let spec = LoopSpec::circle(theta, 1.0, which.gauge(), lambda)?;
                let got = berry_phase_integral(&spec, &tol)?.value;
                worst = worst.max((got - berry_phase_closed(theta, lambda, which)?).abs());
                loops += 1;
            }
        }
    }
    checks.push(Check {
        name: "berry phases",
        points: loops,
        max_residual: worst,
        tolerance: 1e-8,
        lower_bound: false,
    });

    let mut worst: f64 = 0.0;
    for k in 0..3 {
        for l in 0..3 {
            let base = grid_d_operator(k, l)?;
            worst = worst.max(base.unitarity_defect());
            for form in D_FORMS {
                worst = worst.max((grid_d_operator_form(k, l, form)?.0 - base.0).max_abs());
            }
        }
    }
    let p = random_point(&mut rng);
    let x = Vec3R::new(0.3, -1.1, 0.7);
    for n in 0..3 {
        let v = phase_space_image(p.k(), &x, GridPoint::new(0, n)?, gauge, constants)?;
        worst = worst.max((v - x).norm());
    }
    checks.push(Check {
        name: "grid algebra",
        points: 9,
        max_residual: worst,
        tolerance: 1e-14,
        lower_bound: false,
    });
    Ok(checks)
}
