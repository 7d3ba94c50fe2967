//! Acceptance run: one line per criterion.
//!
//! The process exits 0 after reporting; set `ACCEPTANCE_STRICT=1` to exit 1
//! when any criterion fails.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use photon_position::algebra::{Constants, Mat3C, Vec3C, Vec3R, C64};
use photon_position::berry::{berry_phase_closed, berry_phase_integral, transport, ExampleGauge, LoopSpec};
use photon_position::connection::{curvature_residual, gamma_closed_form, gamma_from_frame, torsion, ConnectionParams};
use photon_position::eigenstates::{
    eigenfunction_momentum, energy_density, f_three, helicity_polarization, normalization_integrand,
    position_wavefunction_closed_with, position_wavefunction_extrapolated, ClosedForm, ClosedFormPoint,
    DensityGrid, EigenParams,
};
use photon_position::geometry::{FnField, Gauge, MomentumPoint};
use photon_position::inner_product::{antihermiticity_residual, antihermiticity_residual_weighted, QuadratureSpec};
use photon_position::ode::OdeTolerance;
use photon_position::operator::{
    apply_position, commutator_residual, transversality_residual, FlatPosition, PositionOperator, PryceOperator,
};
use photon_position::phasespace::{grid_d_operator, grid_d_operator_form, phase_space_image, GridPoint, D_FORMS};
use photon_position::quadrature::Tolerance;
use photon_position::section::{gaussian_bump, Differentiation, WaveSection};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn gauges() -> [Gauge; 3] {
    [Gauge::StereoNorth, Gauge::Spherical, Gauge::StereoSouth]
}

/// Point in the shell `0.3 < |k| < 3`, at least 0.1 rad from the `k₃`-axis.
fn random_point(rng: &mut ChaCha8Rng) -> MomentumPoint {
    loop {
        let r = rng.gen_range(0.3..3.0);
        let ct: f64 = rng.gen_range(-1.0..1.0);
        let phi = rng.gen_range(0.0..2.0 * PI);
        let st = (1.0 - ct * ct).sqrt();
        if st > 0.1 {
            return MomentumPoint::new(Vec3R::new(r * st * phi.cos(), r * st * phi.sin(), r * ct)).unwrap();
        }
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_bump(rng: &mut ChaCha8Rng, near: &Vec3R) -> WaveSection {
    let offset = Vec3R::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
    let pol = Vec3C::new(random_complex(rng), random_complex(rng), random_complex(rng));
    gaussian_bump(*near + offset, pol, rng.gen_range(0.3..0.6)).unwrap()
}

fn flatness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for g in gauges() {
        for s in [0.0, 0.5, 1.0] {
            let p = ConnectionParams::new(s, g.clone()).unwrap();
            for _ in 0..100 {
                let k = random_point(&mut rng);
                worst = worst.max(curvature_residual(&k, &p, None).unwrap());
            }
        }
    }
    Outcome {
        pass: worst < 1e-6,
        detail: format!("max curvature residual {worst:.2e} over 900 points (tol 1e-6)"),
    }
}

struct Sample {
    k: MomentumPoint,
    section: WaveSection,
    l: usize,
    m: usize,
}

fn operator_samples() -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    (0..50)
        .map(|_| {
            let k = random_point(&mut rng);
            let section = random_bump(&mut rng, k.k());
            let (l, m) = [(0, 1), (0, 2), (1, 2)][rng.gen_range(0..3)];
            Sample { k, section, l, m }
        })
        .collect()
}

fn commutativity(samples: &[Sample]) -> Outcome {
    let flat: Arc<dyn PositionOperator> =
        Arc::new(FlatPosition { params: ConnectionParams::new(0.5, Gauge::StereoNorth).unwrap() });
    let pryce: Arc<dyn PositionOperator> = Arc::new(PryceOperator);
    let fd = Differentiation::FiniteDifference(None);
    let (mut worst, mut pryce_max): (f64, f64) = (0.0, 0.0);
    for s in samples {
        let r = commutator_residual(flat.clone(), &s.section, &s.k, s.l, s.m, fd, None).unwrap();
        worst = worst.max(r.max_abs());
        let q = commutator_residual(pryce.clone(), &s.section, &s.k, s.l, s.m, fd, None).unwrap();
        pryce_max = pryce_max.max(q.max_abs());
    }
    Outcome {
        pass: worst < 1e-5 && pryce_max > 1e-2,
        detail: format!("max |[X_l, X_m]Ψ| {worst:.2e} (tol 1e-5); Pryce fault max {pryce_max:.2e} (needs > 1e-2)"),
    }
}

fn transversality(samples: &[Sample]) -> Outcome {
    let mut worst: f64 = 0.0;
    for g in gauges() {
        let p = ConnectionParams::new(0.5, g).unwrap();
        for s in samples {
            for l in 0..3 {
                let v = apply_position(&s.section, &s.k, l, &p).unwrap();
                worst = worst.max(transversality_residual(&v, s.k.k()) / s.k.norm());
            }
        }
    }
    Outcome {
        pass: worst < 1e-8,
        detail: format!("max |k·X_lΨ|/(|k||X_lΨ|) {worst:.2e} (tol 1e-8)"),
    }
}

fn anti_hermiticity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let q = QuadratureSpec {
        tolerance: Tolerance::new(1e-300, 1e-7, 10_000_000).unwrap(),
        ..Default::default()
    };
    let p = ConnectionParams::new(0.5, Gauge::StereoNorth).unwrap();
    let (mut matched, mut mismatched): (f64, f64) = (0.0, 0.0);
    for _ in 0..2 {
        // keep the bumps well inside the domain, away from the origin and the cut
        let center = loop {
            let k = random_point(&mut rng);
            if k.unit()[2] < -0.3 {
                break k.unit().scale(rng.gen_range(1.5..2.5));
            }
        };
        let mut bump = || {
            let offset = Vec3R::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
            let pol = Vec3C::new(random_complex(&mut rng), random_complex(&mut rng), random_complex(&mut rng));
            gaussian_bump(center + offset, pol, rng.gen_range(0.3..0.4)).unwrap()
        };
        let (a, b) = (bump(), bump());
        let l = rng.gen_range(0..3);
        matched = matched.max(antihermiticity_residual(&a, &b, l, &p, &q).unwrap().relative());
        let r = antihermiticity_residual_weighted(&a, &b, l, &p, 0.0, &q).unwrap();
        mismatched = mismatched.max(r.relative());
    }
    Outcome {
        pass: matched < 1e-6 && mismatched > 1e-3,
        detail: format!("matched weight {matched:.2e} (tol 1e-6); mismatched weight {mismatched:.2e} (needs > 1e-3)"),
    }
}

fn closed_form_connection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut worst: f64 = 0.0;
    for g in gauges() {
        let p = ConnectionParams::new(0.5, g).unwrap();
        for _ in 0..100 {
            let k = random_point(&mut rng);
            let a = gamma_closed_form(&k, &p).unwrap();
            let b = gamma_from_frame(&k, &p, None).unwrap();
            worst = worst.max(a.max_abs_diff(&b));
        }
    }
    Outcome {
        pass: worst < 1e-6,
        detail: format!("max |Γ_closed − Γ_frame| {worst:.2e} over 300 points (tol 1e-6)"),
    }
}

fn torsion_witness() -> Outcome {
    let k = MomentumPoint::new(Vec3R::new(1.0, 0.0, 0.0)).unwrap();
    let q = torsion(&k, 0.5, &FnField::constant(0.0)).unwrap();
    let v = q.get(1, 1, 0);
    let anti = q.antisymmetry_defect();
    Outcome {
        pass: (v - 0.5).abs() < 1e-9 && anti == 0.0,
        detail: format!("Q_221 = {v} (want 0.5); antisymmetry defect {anti:e}"),
    }
}

fn berry_phases() -> Outcome {
    let tol = Tolerance::new(1e-13, 1e-12, 1_000_000).unwrap();
    let mut worst: f64 = 0.0;
    let mut transport_worst: f64 = 0.0;
    for which in [ExampleGauge::North, ExampleGauge::Spherical, ExampleGauge::South] {
        for theta in [PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
            for lambda in [1, -1] {
                let spec = LoopSpec::circle(theta, 1.0, which.gauge(), lambda).unwrap();
                let g = berry_phase_integral(&spec, &tol).unwrap().value;
                worst = worst.max((g - berry_phase_closed(theta, lambda, which).unwrap()).abs());
                let k0 = MomentumPoint::new(spec.curve.point(0.0)).unwrap();
                let psi0 = helicity_polarization(&k0, lambda, &spec.gauge).unwrap();
                let t = transport(&spec, &psi0, &OdeTolerance::default()).unwrap();
                transport_worst = transport_worst.max((t.phase_factor() - C64::from_polar(1.0, g)).norm());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut invariance: f64 = 0.0;
    for _ in 0..20 {
        let theta = rng.gen_range(0.1..PI - 0.1);
        let radius = rng.gen_range(0.5..2.0);
        let lambda = if rng.gen_bool(0.5) { 1 } else { -1 };
        let factors: Vec<C64> = gauges()
            .into_iter()
            .map(|g| {
                let spec = LoopSpec::circle(theta, radius, g, lambda).unwrap();
                C64::from_polar(1.0, berry_phase_integral(&spec, &tol).unwrap().value)
            })
            .collect();
        invariance = invariance.max((factors[0] - factors[1]).norm()).max((factors[1] - factors[2]).norm());
    }
    Outcome {
        pass: worst < 1e-8 && transport_worst < 1e-6 && invariance < 1e-10,
        detail: format!(
            "loop integral vs closed form {worst:.2e} (tol 1e-8); transport {transport_worst:.2e} (tol 1e-6); \
             gauge spread of exp(iγ) {invariance:.2e} (tol 1e-10)"
        ),
    }
}

fn eigen_relation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut worst: f64 = 0.0;
    for g in gauges() {
        for s in [0.0, 0.5, 1.0] {
            let cp = ConnectionParams::new(s, g.clone()).unwrap();
            for _ in 0..20 {
                let e = EigenParams {
                    x: Vec3R::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                    c1: random_complex(&mut rng),
                    c2: random_complex(&mut rng),
                    s,
                    gauge: g.clone(),
                };
                let psi = eigenfunction_momentum(&e);
                let k = random_point(&mut rng);
                let v = psi.value(k.k()).unwrap();
                for l in 0..3 {
                    let lhs = apply_position(&psi, &k, l, &cp).unwrap();
                    worst = worst.max((lhs - v.scale_re(e.x[l])).max_abs());
                }
            }
        }
    }
    let mut norm_worst: f64 = 0.0;
    for g in gauges() {
        for _ in 0..20 {
            let x = Vec3R::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let y = Vec3R::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let t = rng.gen_range(0.0..2.0 * PI);
            let (c1, c2) = (C64::new(t.cos(), 0.0), C64::new(0.0, t.sin()));
            let a = EigenParams {
                x,
                c1,
                c2,
                s: 0.5,
                gauge: g.clone(),
            };
            let b = EigenParams { x: y, ..a.clone() };
            let k = random_point(&mut rng);
            let got = normalization_integrand(&a, &b, &k).unwrap();
            let want = C64::from_polar(1.0, k.k().dot(&(x - y))) / (2.0 * PI).powi(3);
            norm_worst = norm_worst.max((got - want).norm());
        }
    }
    Outcome {
        pass: worst < 1e-8 && norm_worst < 1e-14,
        detail: format!("max |X_lΨ − X_lΨ| {worst:.2e} (tol 1e-8); normalization {norm_worst:.2e} (tol 1e-14)"),
    }
}

fn closed_form_samples() -> Vec<(ClosedFormPoint, C64, C64)> {
    let pts = [
        (0.5, PI / 4.0, 0.0),
        (0.5, 3.0 * PI / 4.0, PI / 3.0),
        (1.0, 0.0, 0.0),
        (1.0, PI / 4.0, PI / 3.0),
        (1.0, 3.0 * PI / 4.0, 0.0),
        (1.0, PI, 0.0),
        (2.0, PI / 4.0, PI / 3.0),
        (2.0, 3.0 * PI / 4.0, PI / 3.0),
    ];
    let coeffs = [(C64::new(1.0, 0.0), C64::new(0.0, 0.0)), (C64::new(0.0, 0.0), C64::new(1.0, 0.0))];
    let mut out = Vec::new();
    for (x, theta1, phi1) in pts {
        for (c1, c2) in coeffs {
            out.push((ClosedFormPoint { x, theta1, phi1 }, c1, c2));
        }
    }
    out
}

/// Returns the printed-form outcome and a note on the amended form.
fn position_space() -> (Outcome, String) {
    let c = Constants::default();
    let tol = Tolerance::new(1e-300, 1e-9, 20_000_000).unwrap();
    let (mut printed, mut amended): (f64, f64) = (0.0, 0.0);
    let mut count = 0;
    for (cf, c1, c2) in closed_form_samples() {
        let e = EigenParams {
            x: Vec3R::new(0.2, -0.1, 0.4),
            c1,
            c2,
            s: 0.5,
            gauge: Gauge::StereoNorth,
        };
        let num = position_wavefunction_extrapolated(&e, e.x + cf.offset(), &tol, &c).unwrap().value;
        let rel = |form| {
            let v = position_wavefunction_closed_with(&cf, c1, c2, &c, form).unwrap();
            (num - v).max_abs() / v.max_abs()
        };
        printed = printed.max(rel(ClosedForm::Printed));
        amended = amended.max(rel(ClosedForm::Amended));
        count += 1;
    }
    let f3 = f_three(&ClosedFormPoint { x: 1.0, theta1: 0.0, phi1: 0.0 }, &c).unwrap();
    let want = C64::new(-3.0, -5.0) / (8.0 * 2f64.sqrt() * PI.powf(1.5));
    let f3_err = (f3 - want).norm();
    let outcome = Outcome {
        pass: printed < 1e-2 && f3_err < 1e-12,
        detail: format!(
            "{count} samples: max rel deviation from printed F column {printed:.2e} (tol 1e-2); F_III(1, 0) error {f3_err:.1e} (tol 1e-12)"
        ),
    };
    (outcome, format!("amended F_I/F_II coefficients: max rel deviation {amended:.2e} over the same samples"))
}

fn density_homogeneity() -> Outcome {
    let c = Constants::default();
    let grid = DensityGrid {
        n_theta: 13,
        n_phi: 8,
        margin: 0.05,
    };
    let mut worst: f64 = 0.0;
    let mut cells = 0;
    for (c1, c2) in [(C64::new(1.0, 0.0), C64::new(0.0, 0.0)), (C64::new(0.0, 0.0), C64::new(1.0, 0.0))] {
        let near = energy_density(&grid, 0.01, c1, c2, &c, ClosedForm::Printed);
        let far = energy_density(&grid, 1.0, c1, c2, &c, ClosedForm::Printed);
        for (a, b) in near.iter().zip(&far) {
            if let (Ok(x), Ok(y)) = (&a.density, &b.density) {
                if *y > 0.0 {
                    worst = worst.max((x / y / 1e14 - 1.0).abs());
                    cells += 1;
                }
            }
        }
    }
    Outcome {
        pass: cells > 0 && worst < 1e-3,
        detail: format!("{cells} cells: max |ratio/1e14 − 1| {worst:.2e} (tol 1e-3)"),
    }
}

fn grid_algebra() -> Outcome {
    let (mut spread, mut unitary): (f64, f64) = (0.0, 0.0);
    for k in 0..3 {
        for l in 0..3 {
            let base = grid_d_operator(k, l).unwrap();
            unitary = unitary.max(base.unitarity_defect());
            for form in D_FORMS {
                let d: Mat3C = grid_d_operator_form(k, l, form).unwrap().0;
                spread = spread.max((d - base.0).max_abs());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut exact = true;
    for _ in 0..20 {
        let p = random_point(&mut rng);
        let x = Vec3R::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        for n in 0..3 {
            let v = phase_space_image(p.k(), &x, GridPoint::new(0, n).unwrap(), &Gauge::StereoNorth, &Constants::default())
                .unwrap();
            exact &= v == x;
        }
    }
    Outcome {
        pass: spread < 1e-14 && unitary < 1e-14 && exact,
        detail: format!("form spread {spread:.1e}, unitarity {unitary:.1e} (tol 1e-14); m = 0 gives x exactly: {exact}"),
    }
}

fn report(n: usize, name: &str, start: Instant, o: Outcome) -> bool {
    let status = if o.pass { "PASS" } else { "FAIL" };
    println!("[{status}] {n:>2} {name}: {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
    o.pass
}

fn main() {
    // `cargo test` passes harness flags such as `--list`; nothing to list here
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut results = Vec::new();
    let t = Instant::now();
    results.push(report(1, "flatness", t, flatness()));
    let samples = operator_samples();
    let t = Instant::now();
    results.push(report(2, "commutativity", t, commutativity(&samples)));
    let t = Instant::now();
    results.push(report(3, "transversality", t, transversality(&samples)));
    let t = Instant::now();
    results.push(report(4, "anti-hermiticity", t, anti_hermiticity()));
    let t = Instant::now();
    results.push(report(5, "closed-form connection", t, closed_form_connection()));
    let t = Instant::now();
    results.push(report(6, "torsion witness", t, torsion_witness()));
    let t = Instant::now();
    results.push(report(7, "berry phases", t, berry_phases()));
    let t = Instant::now();
    results.push(report(8, "eigen-relation", t, eigen_relation()));
    let t = Instant::now();
    let (outcome, note) = position_space();
    results.push(report(9, "position-space closed forms", t, outcome));
    println!("       note: {note}");
    let t = Instant::now();
    results.push(report(10, "density homogeneity", t, density_homogeneity()));
    let t = Instant::now();
    results.push(report(11, "grid algebra", t, grid_algebra()));
    let passed = results.iter().filter(|p| **p).count();
    println!("{passed}/{} criteria passed", results.len());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < results.len() {
        std::process::exit(1);
    }
}
