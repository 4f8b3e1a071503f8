//! End-to-end acceptance checks. Runs as a plain binary (`harness = false`)
//! so every criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmetro::estimation::{
    agnosticity_certificate, classical_fi_matrix, classical_fi_scalar, generator_variance_bound,
    mle_monte_carlo, qfi_pure, qfi_sld, McConfig, NumericalConfig, Verdict,
};
use qmetro::harness::{
    fullprob_default_spec, labeling_rows, render_fullprob, supported_labeling, Labeling,
    CERTIFICATE_TOL, DEFAULT_SEED,
};
use qmetro::protocols::{
    analytic_fi_ccs, analytic_fi_ent, ccs_ancilla_distribution, ccs_joint_distribution,
    ccs_joint_state, hindsight_distribution, reference, CcsConfig, HindsightConfig,
};
use qmetro::qstate::{measure, projective_povm, Param};
use qmetro::{Axis, DensityMatrix, Ket, MeasurementSetting, ParamVector};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5EED_0000 + stream)
}

fn random_axis(r: &mut ChaCha8Rng) -> Axis {
    // uniform on the sphere
    let theta = (1.0 - 2.0 * r.random::<f64>()).acos();
    Axis::new(theta, r.random_range(0.0..TAU)).unwrap()
}

fn ancilla_only() -> CcsConfig {
    CcsConfig::standard().with_probe_measurement(None)
}

fn numerics() -> NumericalConfig {
    NumericalConfig::default()
}

fn axis_agnostic_probabilities() -> Outcome {
    let start = Instant::now();
    let cfg = ancilla_only();
    let mut r = rng(1);
    let axes: Vec<Axis> = (0..400).map(|_| random_axis(&mut r)).collect();
    let mut worst = 0.0f64;
    for k in 0..50 {
        let tau = TAU * k as f64 / 49.0;
        let want = [(tau / 2.0).cos().powi(2), (tau / 2.0).sin().powi(2)];
        for a in &axes {
            let d = ccs_ancilla_distribution(&cfg, &ParamVector::new(tau, a.theta, a.phi)).unwrap();
            for (p, w) in d.probabilities().iter().zip(want) {
                worst = worst.max((p - w).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-12 && elapsed < Duration::from_secs(1),
        format!("max deviation {worst:.3e} over 20000 points in {elapsed:.2?}"),
    )
}

fn optimal_agnostic_fi() -> Outcome {
    let cfg = ancilla_only();
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let tau = r.random_range(0.05..PI - 0.05);
        let a = random_axis(&mut r);
        let fi = classical_fi_scalar(
            |t| ccs_ancilla_distribution(&cfg, &ParamVector::new(t, a.theta, a.phi)),
            tau,
            &numerics(),
        )
        .unwrap();
        worst = worst.max((fi - 1.0).abs());
    }
    outcome(worst < 1e-6, format!("max |F - 1| = {worst:.3e} at 100 points"))
}

fn fisher_matrix_reproduction() -> Outcome {
    let cfg = CcsConfig::standard();
    let mut r = rng(3);
    let mut worst = 0.0f64;
    let mut not_agnostic = 0;
    for _ in 0..50 {
        let a = random_axis(&mut r);
        let lambda = ParamVector::new(r.random_range(0.05..PI - 0.05), a.theta, a.phi);
        let fm = classical_fi_matrix(|l| ccs_joint_distribution(&cfg, l), &lambda, &numerics())
            .unwrap();
        let want = reference::fisher_matrix_xy(&lambda);
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((fm.entries()[i][j] - want[i][j]).abs());
            }
        }
        if agnosticity_certificate(&fm, CERTIFICATE_TOL).verdict != Verdict::Agnostic {
            not_agnostic += 1;
        }
    }
    outcome(
        worst < 1e-6 && not_agnostic == 0,
        format!("max entry error {worst:.3e}; {not_agnostic} of 50 points not agnostic"),
    )
}

fn maximally_mixed_probe() -> Outcome {
    let axes = [
        Axis::x(),
        Axis::y(),
        Axis::z(),
        Axis::new(0.7, 2.1).unwrap(),
        Axis::new(2.4, 5.3).unwrap(),
    ];
    let lambda = ParamVector::new(1.1, 0.9, 2.6);
    let mut worst = 0.0f64;
    for m in axes {
        let cfg = CcsConfig::standard()
            .with_probe(DensityMatrix::maximally_mixed(2).unwrap())
            .with_probe_measurement(Some(MeasurementSetting::new(m)));
        let fm = classical_fi_matrix(|l| ccs_joint_distribution(&cfg, l), &lambda, &numerics())
            .unwrap();
        let want = [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((fm.entries()[i][j] - want[i][j]).abs());
            }
        }
    }
    outcome(worst < 1e-8, format!("max |F - diag(1,0,0)| = {worst:.3e} over 5 probe axes"))
}

fn hindsight_contrast() -> Outcome {
    let cfg = HindsightConfig::standard();
    let lambda0 = ParamVector::new(FRAC_PI_4, PI / 3.0, PI / 5.0);
    let fm = classical_fi_matrix(|l| hindsight_distribution(&cfg, l), &lambda0, &numerics())
        .unwrap();
    let cert = agnosticity_certificate(&fm, CERTIFICATE_TOL);
    let off = cert.max_offdiag();
    let fi = classical_fi_scalar(
        |t| hindsight_distribution(&cfg, &ParamVector::new(t, 0.0, 0.0)),
        1e-3,
        &numerics(),
    )
    .unwrap();
    outcome(
        off > 1e-3 && cert.verdict == Verdict::NotAgnostic && (fi - 1.0).abs() < 1e-4,
        format!(
            "max off-diagonal {off:.4}, verdict {}; F(tau=1e-3, theta=0) = {fi:.10}",
            cert.verdict.as_str()
        ),
    )
}

fn noise_comparison() -> Outcome {
    let mut violations = Vec::new();
    let mut worst_numeric = 0.0f64;
    let mut strict_at_half_pi = true;
    for f in [0.95, 0.97, 0.99] {
        let cfg = ancilla_only().with_noise(f).unwrap();
        for k in 1..=100 {
            let tau = PI * k as f64 / 101.0;
            let coh = analytic_fi_ccs(f, tau).unwrap();
            let ent = analytic_fi_ent(f, tau).unwrap();
            if coh < ent {
                violations.push((f, tau, coh, ent));
            }
            let numeric = classical_fi_scalar(
                |t| ccs_ancilla_distribution(&cfg, &ParamVector::new(t, 1.0, 2.0)),
                tau,
                &numerics(),
            )
            .unwrap();
            worst_numeric = worst_numeric.max((numeric - coh).abs());
        }
        let coh = analytic_fi_ccs(f, FRAC_PI_2).unwrap();
        let ent = analytic_fi_ent(f, FRAC_PI_2).unwrap();
        strict_at_half_pi &= coh > ent;
    }
    let half = (
        analytic_fi_ccs(0.95, FRAC_PI_2).unwrap(),
        analytic_fi_ent(0.95, FRAC_PI_2).unwrap(),
    );
    let mut detail = format!(
        "f=0.95 tau=pi/2: coh {:.4} vs ent {:.4}; numeric-vs-closed-form max {worst_numeric:.2e}; \
         coh >= ent fails at {} of 300 points",
        half.0,
        half.1,
        violations.len()
    );
    if let Some((f, tau, coh, ent)) = violations.first() {
        detail.push_str(&format!(
            " (first: f={f} tau={tau:.4} coh {coh:.4} < ent {ent:.4})"
        ));
    }
    outcome(
        violations.is_empty() && strict_at_half_pi && worst_numeric < 1e-8,
        detail,
    )
}

fn coherence_monotone() -> Outcome {
    let mut worst_fi = 0.0f64;
    let mut worst_balanced = 0.0f64;
    let mut min_gap = f64::INFINITY;
    let mut worst_qfi_form = 0.0f64;
    for alpha in [PI / 12.0, PI / 8.0, PI / 6.0, FRAC_PI_4] {
        let c = (2.0 * alpha).sin();
        let anc = ancilla_only().with_alpha(alpha).unwrap();
        let joint = CcsConfig::standard().with_alpha(alpha).unwrap();
        for theta in [0.0, PI / 6.0, PI / 3.0, FRAC_PI_2] {
            for tau in [0.4, 1.0, FRAC_PI_2, 2.3] {
                let phi = 0.8;
                let cfi = classical_fi_scalar(
                    |t| ccs_ancilla_distribution(&anc, &ParamVector::new(t, theta, phi)),
                    tau,
                    &numerics(),
                )
                .unwrap();
                worst_fi = worst_fi.max((cfi - analytic_fi_ccs(c, tau).unwrap()).abs());
                let qfi = qfi_sld(
                    |l| ccs_joint_state(&joint, l),
                    &ParamVector::new(tau, theta, phi),
                    Param::Tau,
                    &numerics(),
                )
                .unwrap();
                worst_qfi_form =
                    worst_qfi_form.max((qfi - reference::joint_qfi_candidates(alpha, theta).1).abs());
                if alpha == FRAC_PI_4 {
                    worst_balanced = worst_balanced.max((cfi - qfi).abs());
                } else {
                    let analytic_gap =
                        reference::joint_qfi_candidates(alpha, theta).1 - analytic_fi_ccs(c, tau).unwrap();
                    if analytic_gap > 1e-9 {
                        min_gap = min_gap.min(qfi - cfi);
                    }
                }
            }
        }
    }
    outcome(
        worst_fi < 1e-8 && worst_balanced < 1e-6 && min_gap >= 1e-3,
        format!(
            "FI error {worst_fi:.2e}; |CFI-QFI| at pi/4 {worst_balanced:.2e}; \
             min gap elsewhere {min_gap:.4}; QFI vs C^2+(1-C^2)sin^2(theta) {worst_qfi_form:.2e}"
        ),
    )
}

fn bound_chain() -> Outcome {
    let mut r = rng(8);
    let slack = 1e-6;
    let mut broken = 0;
    let mut worst = [f64::NEG_INFINITY; 3];
    for _ in 0..1000 {
        let probe = Ket::along(&random_axis(&mut r));
        let axis = random_axis(&mut r);
        let povm = projective_povm(&MeasurementSetting::new(random_axis(&mut r)));
        let tau = r.random_range(0.05..TAU - 0.05);
        let lambda = ParamVector::new(tau, axis.theta, axis.phi);
        let state = |l: &ParamVector| probe.evolve(&l.unitary());
        let cfi = classical_fi_scalar(
            |t| measure(&state(&ParamVector::new(t, axis.theta, axis.phi))?.density(), &povm),
            tau,
            &numerics(),
        )
        .unwrap();
        let qfi = qfi_pure(state, &lambda, &numerics()).unwrap().get(Param::Tau, Param::Tau);
        let var = generator_variance_bound(&probe, &axis).unwrap();
        let margins = [cfi - qfi, qfi - var, var - 1.0];
        for (w, m) in worst.iter_mut().zip(margins) {
            *w = w.max(m);
        }
        if margins.iter().any(|&m| m > slack) {
            broken += 1;
        }
    }
    outcome(
        broken == 0,
        format!(
            "{broken} of 1000 triples violate; max CFI-QFI {:.2e}, QFI-4dH {:.2e}, 4dH-1 {:.2e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn cr_saturation() -> Outcome {
    let start = Instant::now();
    let cfg = ancilla_only();
    let mc = McConfig::new(100_000, 200, DEFAULT_SEED).unwrap();
    let dist = |t: f64| ccs_ancilla_distribution(&cfg, &ParamVector::new(t, 1.0, 2.0));
    let a = mle_monte_carlo(dist, FRAC_PI_2, &mc, &numerics()).unwrap();
    let b = mle_monte_carlo(dist, FRAC_PI_2, &mc, &numerics()).unwrap();
    let elapsed = start.elapsed();
    let ratio = a.sample_variance * 100_000.0;
    outcome(
        (0.85..=1.15).contains(&ratio) && a == b && elapsed < Duration::from_secs(10),
        format!(
            "Var * N = {ratio:.4} (seed {DEFAULT_SEED}), reruns identical: {}, {elapsed:.2?}",
            a == b
        ),
    )
}

fn labeling_resolution() -> Outcome {
    let spec = fullprob_default_spec();
    let rows = labeling_rows(&spec).unwrap();
    let marginal = rows.iter().map(|r| r.marginal_error).fold(0.0, f64::max);
    let verdict = supported_labeling(&rows);
    let report = render_fullprob(None).unwrap().content;
    let documented = report.contains(&format!("\"supported\": \"{}\"", verdict.as_str()));
    outcome(
        marginal <= 1e-12 && documented && verdict != Labeling::Neither,
        format!(
            "marginal error {marginal:.2e} over {} points; report supports the {} labeling",
            rows.len(),
            verdict.as_str()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("axis-agnostic ancilla probabilities", axis_agnostic_probabilities),
        ("optimal agnostic Fisher information", optimal_agnostic_fi),
        ("Fisher matrix closed form and certificate", fisher_matrix_reproduction),
        ("maximally mixed probe", maximally_mixed_probe),
        ("hindsight contrast", hindsight_contrast),
        ("noise comparison", noise_comparison),
        ("coherence monotone", coherence_monotone),
        ("bound chain CFI <= QFI <= 4dH <= 1", bound_chain),
        ("Cramer-Rao saturation", cr_saturation),
        ("joint-outcome labeling", labeling_resolution),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} -- {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
