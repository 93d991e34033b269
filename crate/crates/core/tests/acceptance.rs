//! Acceptance criteria AC1-AC9, one PASS/FAIL line each. Tolerances and runtime
//! limits are pinned here, independent of the tolerances carried by the reports.
//!
//! The process exits nonzero on any failure except the documented AC7 witness:
//! the trace stays symmetric for every multiplier, so that clause cannot hold and
//! is reported as FAIL together with the measured residual.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dq_core::multipliers::{CutoffSchedule, Tau};
use dq_core::products::{trace_symmetry_check, ProductConfig, Route};
use dq_core::report::Report;
use dq_core::verify::{
    algebra_suite, borel_taylor_mismatch, cochain_identities, commutator_slope, connection_checks, formal_associativity_defect, idempotent_residual,
    n1_route_agreement, non_tracial_witness, phase_identities, polynomial_borel_coefficients, product_inputs, products_suite, symmetric_space_axioms,
    transforms_suite, SuiteOptions,
};
use dq_core::{GridSpec, Result, SpaceParams};

const SEED: u64 = 20240611;

struct Outcome {
    passed: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { passed: true, lines: Vec::new() }
    }

    fn record(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn below(&mut self, what: &str, value: f64, tol: f64) {
        self.record(value < tol, format!("{what}: {value:.3e} < {tol:.0e}"));
    }

    fn above(&mut self, what: &str, value: f64, tol: f64) {
        self.record(value >= tol, format!("{what}: {value:.4} >= {tol}"));
    }

    fn near(&mut self, what: &str, value: f64, target: f64, tol: f64) {
        self.record((value - target).abs() <= tol, format!("{what}: {value:.4} = {target} +- {tol}"));
    }

    fn residual(&mut self, rep: &Report, id: &str, tol: f64) {
        match rep.get(id) {
            Some(c) => self.below(id, c.residual, tol),
            None => self.record(false, format!("{id}: missing")),
        }
    }

    fn runtime(&mut self, t: Duration, limit: Duration) {
        self.record(t < limit, format!("runtime {:.2}s < {}s", t.as_secs_f64(), limit.as_secs()));
    }
}

fn opts() -> SuiteOptions {
    SuiteOptions { n: 0, theta: 0.5, grid: 128, seed: SEED, tau: Tau::One, route: Route::Pipeline, samples: 1000 }
}

fn ac1() -> Result<Outcome> {
    let mut o = Outcome::new();
    let t = Instant::now();
    for n in 0..=2 {
        let r = symmetric_space_axioms(n, 1000, SEED + n as u64);
        o.residual(&r, "geometry.involution", 1e-12);
        o.residual(&r, "geometry.triple", 1e-9);
    }
    o.runtime(t.elapsed(), Duration::from_secs(5));
    Ok(o)
}

fn ac2() -> Result<Outcome> {
    let mut o = Outcome::new();
    let t = Instant::now();
    for n in 0..=3 {
        let r = algebra_suite(n, 1000)?;
        for id in ["algebra.jacobi", "algebra.solvable_jacobi", "triple.involution", "triple.pp_in_k", "triple.cocycle"] {
            o.residual(&r, id, 1e-12);
        }
        if (1..=2).contains(&n) {
            let dim = r.get("algebra.bivector_dim").map_or(f64::NAN, |c| c.residual);
            o.record(dim == 0.0, format!("n={n} invariant bivector dimension 1+2n (offset {dim})"));
            let h2 = r.get("algebra.h2_dim").map_or(f64::NAN, |c| c.residual);
            o.record(h2 == 0.0, format!("n={n} invariant H2 dimension {h2}"));
            o.above("algebra.bivector_gap", r.get("algebra.bivector_gap").map_or(f64::NAN, |c| c.residual), 10.0);
        }
    }
    o.runtime(t.elapsed(), Duration::from_secs(30));
    Ok(o)
}

fn ac3() -> Result<Outcome> {
    let mut o = Outcome::new();
    let t = Instant::now();
    for n in 0..=2 {
        let r = phase_identities(n, 1000, SEED + n as u64)?;
        for id in ["phase.invariance", "amplitude.a1_invariance", "amplitude.acan_invariance", "cochain.admissible"] {
            o.residual(&r, id, 1e-9);
        }
    }
    o.runtime(t.elapsed(), Duration::from_secs(5));
    Ok(o)
}

fn ac4() -> Result<Outcome> {
    let mut o = Outcome::new();
    for n in 0..=1 {
        let r = cochain_identities(n, 200, SEED + n as u64)?;
        for id in ["cochain.delta_squared", "cochain.delta_op_squared", "cochain.multiplier_ratio"] {
            o.residual(&r, id, 1e-12);
        }
    }
    Ok(o)
}

fn ac5() -> Result<Outcome> {
    let mut o = Outcome::new();
    let t = Instant::now();
    for theta in [0.5, 1.0] {
        o.below(&format!("idempotent theta={theta} 256^2"), idempotent_residual(theta, 256, 6.0)?, 1e-6);
    }
    let (slope, _) = commutator_slope(&[0.4, 0.2, 0.1, 0.05], 128, 8.0)?;
    o.near("commutator slope", slope, 2.0, 0.2);
    for n in 0..=1 {
        let d = formal_associativity_defect(n, 3, 4, SEED + n as u64)?;
        o.record(d == 0, format!("n={n} formal associativity defect through theta^4: {d} terms"));
    }
    o.runtime(t.elapsed(), Duration::from_secs(60));
    Ok(o)
}

/// AC6 runs the product battery once; AC7 and AC8 read from the same report.
fn ac6(products: &Report, elapsed: Duration) -> Result<Outcome> {
    let mut o = Outcome::new();
    o.residual(products, "products.associativity", 1e-4);
    o.residual(products, "products.kernel_vs_pipeline", 1e-3);
    let t = Instant::now();
    o.below("n=1 kernel vs pipeline (16x16x16x32, theta=1)", n1_route_agreement()?, 5e-2);
    o.runtime(elapsed + t.elapsed(), Duration::from_secs(600));
    Ok(o)
}

fn ac7(products: &Report) -> Result<(Outcome, f64)> {
    let mut o = Outcome::new();
    for id in ["products.hilbert_compatibility", "products.inner_invariance", "trace.unitary", "trace.symmetry"] {
        o.residual(products, id, 1e-6);
    }
    let spec = GridSpec::cube(0, -6.0, 6.0, 128)?;
    let [u, v, _] = product_inputs(&spec)?;
    let cfg = ProductConfig::new(SpaceParams::new(0), 0.5, spec)?.with_tau(Tau::Multiplier(non_tracial_witness()));
    let nt = trace_symmetry_check(&cfg, &u, &v)?;
    let witness = nt.get("trace.symmetry").map_or(f64::NAN, |c| c.residual);
    o.record(witness > 1e-3, format!("non-tracial trace asymmetry: {witness:.3e} > 1e-3"));
    let closed = nt.get("trace.closed").map_or(f64::NAN, |c| c.residual);
    o.lines.push(format!("info non-tracial closedness defect |int u*v - int uv|: {closed:.3e}"));
    Ok((o, witness))
}

fn ac8(products: &Report) -> Result<Outcome> {
    let mut o = Outcome::new();
    let tr = transforms_suite(&opts())?;
    let slope = tr.get("transport.second_order").and_then(|c| c.note.as_deref()).and_then(|s| s.strip_prefix("slope ")).and_then(|s| s.parse().ok());
    o.near("|T^-1 u - u| slope", slope.unwrap_or(f64::NAN), 2.0, 0.2);
    o.above("order-0 residual slope", products.get("asymptotic.order0").map_or(f64::NAN, |c| c.residual), 1.0);
    o.above("order-1 residual slope", products.get("asymptotic.order1").map_or(f64::NAN, |c| c.residual), 2.0);
    o.below("Borel FD-Taylor mismatch through order 4", borel_taylor_mismatch(polynomial_borel_coefficients(), CutoffSchedule::default())?, 1e-4);
    Ok(o)
}

fn ac9() -> Result<Outcome> {
    let mut o = Outcome::new();
    for n in 0..=1 {
        let r = connection_checks(n, 20, SEED + n as u64)?;
        o.residual(&r, "connection.torsion", 1e-6);
        o.residual(&r, "connection.parallel_omega", 1e-6);
    }
    Ok(o)
}

fn print(label: &str, title: &str, o: &Outcome) {
    println!("{label} {} {title}", if o.passed { "PASS" } else { "FAIL" });
    for l in &o.lines {
        println!("    {l}");
    }
}

fn run() -> Result<bool> {
    let mut unexpected = Vec::new();
    let check = |label: &str, title: &str, o: Outcome, unexpected: &mut Vec<String>| {
        print(label, title, &o);
        if !o.passed {
            unexpected.push(label.to_string());
        }
    };
    check("AC1", "symmetric-space axioms", ac1()?, &mut unexpected);
    check("AC2", "algebra suite", ac2()?, &mut unexpected);
    check("AC3", "phase and amplitude identities", ac3()?, &mut unexpected);
    check("AC4", "cochain identities", ac4()?, &mut unexpected);
    check("AC5", "Moyal core", ac5()?, &mut unexpected);
    let t = Instant::now();
    let products = products_suite(&opts())?;
    let elapsed = t.elapsed();
    check("AC6", "star-product battery", ac6(&products, elapsed)?, &mut unexpected);

    let (o7, witness) = ac7(&products)?;
    print("AC7", "Hilbert structure", &o7);
    let only_witness = o7.lines.iter().filter(|l| l.starts_with("FAIL")).all(|l| l.contains("non-tracial trace asymmetry"));
    if !o7.passed {
        if only_witness && witness < 1e-10 {
            println!("    note: int T(W) = exp(tau(0)) int W and the Weyl product is tracial, so int u*v = int v*u for every multiplier;");
            println!("    note: the asymmetry witness cannot exceed rounding, the closedness defect above is the observable break");
        } else {
            unexpected.push("AC7".into());
        }
    }
    check("AC8", "asymptotics", ac8(&products)?, &mut unexpected);
    check("AC9", "connection", ac9()?, &mut unexpected);
    if unexpected.is_empty() {
        println!("acceptance: all criteria pass except the AC7 asymmetry witness, which fails as analysed");
    } else {
        println!("acceptance: unexpected failures in {}", unexpected.join(", "));
    }
    Ok(unexpected.is_empty())
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            println!("acceptance: error {e}");
            ExitCode::FAILURE
        }
    }
}
