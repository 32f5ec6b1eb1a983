//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{E, PI};
use std::process::ExitCode;

use switchbif_core::analytic::{classify_origin, delta, delta_prime, OriginClass};
use switchbif_core::bifurcation::{
    analyze_direction, check_global_conditions, continue_branch, fit_joint, fit_scaling_law, fit_with_known_delta,
    verify_orbit, BranchOptions, CheckStatus, Direction, ExpansionOptions, Seeding,
};
use switchbif_core::config::{emit_config, parse_config, RunConfig};
use switchbif_core::numeric::{delta_numeric, integrate, poincare_numeric, return_residual, IntegratorConfig, StopCondition};
use switchbif_core::{Error, SwitchedSystem, SystemParams};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn grid() -> Vec<(f64, f64, f64)> {
    let mut out = vec![];
    for a in [0.1, 1.0, 2.0] {
        for b in [1.0, 6.0] {
            for c in [1.0, 3.0] {
                out.push((a, b, c));
            }
        }
    }
    out
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

fn c1_delta_closed_form() -> Check {
    let mut worst = 0.0f64;
    for (a, b, c) in grid() {
        let sys = SwitchedSystem::linear(SystemParams::constant(a, b, c));
        let num = delta_numeric(&sys, 0.0, &cfg()).map_err(|e| format!("({a},{b},{c}): {e}"))?;
        let exact = delta(&sys.params, 0.0).unwrap();
        let rel = ((num - exact) / exact).abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-6, format!("({a},{b},{c}): numeric {num} vs closed form {exact}"))?;
    }
    Ok(format!("max relative error {worst:.2e} over 12 systems"))
}

fn c2_trichotomy() -> Check {
    let bench = SwitchedSystem::paper_example().linearized();
    ensure(
        classify_origin(&bench.params, 0.0).unwrap() == OriginClass::PeriodicFamily,
        "benchmark at λ=0 is not PeriodicFamily".into(),
    )?;
    let r = return_residual(&bench, 1.0, 0.0, &cfg()).map_err(|e| e.to_string())?;
    ensure(r.abs() <= 1e-8, format!("benchmark return residual {r:e}"))?;

    let stable = SwitchedSystem::linear(SystemParams::constant(1.0, 1.0, 1.0));
    ensure(
        classify_origin(&stable.params, 0.0).unwrap() == OriginClass::AsymptoticallyStable,
        "a=b=c=1 is not AsymptoticallyStable".into(),
    )?;
    let ratio_s = poincare_numeric(&stable, 1.0, 0.0, &cfg()).map_err(|e| e.to_string())?.ratio();
    ensure((ratio_s - (-2.0 * PI).exp()).abs() <= 1e-6, format!("stable ratio {ratio_s}"))?;

    let unstable = SwitchedSystem::linear(SystemParams::constant(0.1, 6.0, 1.0));
    ensure(
        classify_origin(&unstable.params, 0.0).unwrap() == OriginClass::Unstable,
        "a=0.1, b=6, c=1 is not Unstable".into(),
    )?;
    let ratio_u = poincare_numeric(&unstable, 1.0, 0.0, &cfg()).map_err(|e| e.to_string())?.ratio();
    ensure((ratio_u - 27.855).abs() <= 1e-3, format!("unstable ratio {ratio_u}"))?;
    Ok(format!("residual {r:.1e}, ratios {ratio_s:.6e} and {ratio_u:.6}"))
}

fn c3_derivative() -> Check {
    let p = SwitchedSystem::paper_example().params;
    let dp = delta_prime(&p, 0.0).unwrap();
    let exact = 4.0 / (E * PI);
    ensure((dp - exact).abs() <= 1e-10, format!("Δ'(0) = {dp}, expected {exact}"))?;
    let h = 1e-5;
    let fd = (delta(&p, h).unwrap() - delta(&p, -h).unwrap()) / (2.0 * h);
    ensure((dp - fd).abs() <= 1e-6, format!("finite difference {fd} vs {dp}"))?;
    Ok(format!("Δ'(0) = {dp:.12}, central difference off by {:.1e}", (dp - fd).abs()))
}

fn c4_direction() -> Check {
    let sys = SwitchedSystem::paper_example();
    let rep = analyze_direction(&sys, &cfg(), &ExpansionOptions::default()).map_err(|e| e.to_string())?;
    ensure(
        rep.direction == Direction::BranchForPositiveLambda,
        format!("direction {}", rep.direction),
    )?;
    let r = continue_branch(&sys, &[-0.05], &cfg(), &BranchOptions::default(), None);
    ensure(matches!(r[0], Err(Error::NoOrbit { .. })), format!("λ=-0.05 gave {:?}", r[0]))?;
    Ok(format!(
        "{} (δ = {:.4}, k = {:.4}); λ=-0.05 has no orbit",
        rep.direction, rep.expansion.delta_coeff, rep.expansion.k_exp
    ))
}

/// Regression values from the residual-scan solver.
const FROZEN_BRANCH: [(f64, f64); 5] = [
    (0.02, 0.097_638_815_718_076),
    (0.05, 0.155_511_110_251_939),
    (0.1, 0.222_529_145_019_48),
    (0.5, 0.531_291_810_186_302),
    (1.0, 0.754_448_095_776_677),
];

fn c5_branch() -> Check {
    let sys = SwitchedSystem::paper_example();
    let lambdas: Vec<f64> = FROZEN_BRANCH.iter().map(|p| p.0).collect();
    let pts = continue_branch(&sys, &lambdas, &cfg(), &BranchOptions::default(), None)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    for (p, &(l, frozen)) in pts.iter().zip(&FROZEN_BRANCH) {
        ensure(p.x1_fixed > 0.0 && p.residual <= 1e-8, format!("λ={l}: {p:?}"))?;
        ensure(
            (p.x1_fixed - frozen).abs() <= 1e-9 * frozen,
            format!("λ={l}: x1 = {} drifted from {frozen}", p.x1_fixed),
        )?;
        let (x_out, events) = verify_orbit(&sys, p, &cfg()).map_err(|e| e.to_string())?;
        ensure(events == 4, format!("λ={l}: {events} switching events"))?;
        ensure(
            (x_out - p.x1_fixed).abs() <= 10.0 * p.residual,
            format!("λ={l}: re-integration returns {x_out}, orbit at {}", p.x1_fixed),
        )?;
    }
    ensure(
        pts.windows(2).all(|w| w[0].x1_fixed < w[1].x1_fixed),
        "x1 not strictly increasing".into(),
    )?;
    ensure(pts[0].x1_fixed < pts[2].x1_fixed / 2.0, "branch does not shrink".into())?;
    let xs: Vec<String> = pts.iter().map(|p| format!("{:.6}", p.x1_fixed)).collect();
    Ok(format!("x1 = [{}]", xs.join(", ")))
}

fn c6_scaling() -> Check {
    let sys = SwitchedSystem::paper_example();
    let rep = analyze_direction(&sys, &cfg(), &ExpansionOptions::default()).map_err(|e| e.to_string())?;
    let opts = BranchOptions {
        seeding: Seeding::ScalingLaw,
        ..Default::default()
    };
    let pts = continue_branch(&sys, &[0.0025, 0.005, 0.01, 0.02], &cfg(), &opts, Some(&rep.expansion))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let fit = fit_scaling_law(&pts).map_err(|e| e.to_string())?;
    let predicted = rep.gamma_predicted;
    ensure(fit.exponent_est > 0.0, format!("exponent {}", fit.exponent_est))?;
    ensure(
        (fit.gamma_est - predicted).abs() <= 0.2 * predicted.abs(),
        format!("γ fit {} vs predicted {predicted}", fit.gamma_est),
    )?;
    Ok(format!(
        "γ = {:.4} vs -δ/Δ'(0) = {predicted:.4}, exponent {:.4}",
        fit.gamma_est, fit.exponent_est
    ))
}

fn c7_global() -> Check {
    let sys = SwitchedSystem::paper_example();
    let mut used = 0;
    for l in [0.1, 0.5, 1.0] {
        let rep = check_global_conditions(&sys, l, 10.0, 100_000).map_err(|e| e.to_string())?;
        ensure(
            rep.lyapunov_ok.status == CheckStatus::PassSampled
                && rep.rotation_ok.status == CheckStatus::PassSampled
                && rep.delta_conditions_ok,
            format!("λ={l}: {rep:?}"),
        )?;
        ensure(
            rep.max_abs_perturbation_rotation <= 1e-14,
            format!("λ={l}: |<f̄, Sx>| up to {:e}", rep.max_abs_perturbation_rotation),
        )?;
        used += rep.samples_used;
    }
    Ok(format!("all conditions pass-sampled, {used} samples, <f̄, Sx> = 0"))
}

fn c8_event_times() -> Check {
    let mut worst = 0.0f64;
    for (a, b, c) in grid() {
        let sys = SwitchedSystem::linear(SystemParams::constant(a, b, c));
        let tr = integrate(&sys, [1.0, 0.0], 0.0, StopCondition::Events(8), &cfg()).map_err(|e| e.to_string())?;
        let quarter = PI / (2.0 * (b * c).sqrt());
        for (k, ev) in tr.events.iter().enumerate() {
            let err = (ev.time - (k + 1) as f64 * quarter).abs();
            worst = worst.max(err);
            ensure(err <= 1e-8, format!("({a},{b},{c}) event {}: t = {}", k + 1, ev.time))?;
        }
        ensure(tr.events.len() == 8, format!("({a},{b},{c}): {} events", tr.events.len()))?;
    }
    Ok(format!("max switching-time error {worst:.2e}"))
}

fn c9_properties() -> Check {
    // quadratic decay on each linear arc
    let mut worst_q = 0.0f64;
    for (a, b, c) in grid() {
        let sys = SwitchedSystem::linear(SystemParams::constant(a, b, c));
        let tr = integrate(&sys, [0.7, -0.2], 0.0, StopCondition::Events(6), &cfg()).map_err(|e| e.to_string())?;
        for arc in &tr.arcs {
            let q = |x: [f64; 2]| {
                if arc.quadrant.uses_a() {
                    c * x[0] * x[0] + b * x[1] * x[1]
                } else {
                    b * x[0] * x[0] + c * x[1] * x[1]
                }
            };
            let (t0, x0) = arc.samples[0];
            for &(t, x) in &arc.samples {
                let expect = q(x0) * (-2.0 * a * (t - t0)).exp();
                let rel = (q(x) - expect).abs() / expect;
                worst_q = worst_q.max(rel);
                ensure(rel <= 1e-8, format!("({a},{b},{c}) quadratic form off by {rel:e} at t={t}"))?;
            }
        }
    }

    // return-map homogeneity of the linear system
    let lin = SwitchedSystem::linear(SystemParams::constant(0.3, 2.0, 1.5));
    let base = poincare_numeric(&lin, 1.0, 0.0, &cfg()).map_err(|e| e.to_string())?.x1_out;
    for s in [1e-3, 0.37, 25.0] {
        let scaled = poincare_numeric(&lin, s, 0.0, &cfg()).map_err(|e| e.to_string())?.x1_out;
        ensure(
            (scaled - s * base).abs() <= 1e-8 * s * base,
            format!("π({s}) = {scaled}, expected {}", s * base),
        )?;
    }

    // synthetic return map π(x) = Δx + δx³
    let xs = ExpansionOptions::default().grid();
    let samples: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 1.02 * x - 0.7 * x.powi(3))).collect();
    let known = fit_with_known_delta(&samples, 1.02, |_| 0.0).map_err(|e| e.to_string())?;
    let joint = fit_joint(&samples).map_err(|e| e.to_string())?;
    ensure(
        (known.k_exp - 3.0).abs() <= 1e-6 && (known.delta_coeff + 0.7).abs() <= 1e-6,
        format!("known-Δ fit {known:?}"),
    )?;
    ensure(
        (joint.delta_lin - 1.02).abs() <= 1e-6 && (joint.delta_coeff + 0.7).abs() <= 1e-6 && (joint.k_exp - 3.0).abs() <= 1e-6,
        format!("joint fit {joint:?}"),
    )?;

    // configuration round trip
    let mut rc = RunConfig::paper_example();
    rc.run.lambdas = Some(vec![0.02, 0.05, 0.1, 0.5, 1.0]);
    let text = emit_config(&rc);
    let back = parse_config(&text).map_err(|e| e.to_string())?;
    ensure(back == rc && emit_config(&back) == text, "config round trip differs".into())?;

    Ok(format!("quadratic decay within {worst_q:.1e}, homogeneity, expansion fit and config round trip hold"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("closed-form Δ vs brute force", c1_delta_closed_form),
        ("stability trichotomy", c2_trichotomy),
        ("Δ'(0) of the benchmark", c3_derivative),
        ("bifurcation direction", c4_direction),
        ("periodic-orbit branch", c5_branch),
        ("scaling law", c6_scaling),
        ("global conditions", c7_global),
        ("event-location accuracy", c8_event_times),
        ("property suites", c9_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        match check() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail} [{:.2?}]", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
