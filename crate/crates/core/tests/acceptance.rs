//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::process::ExitCode;
use std::time::Instant;

use memfhn::io::parse_config;
use memfhn::metrics::DEFAULT_ENVELOPE_SLACK;
use memfhn::verify::{self, EULER_ORDER_DTS};
use memfhn::{
    absorbing_check, fit_decay_rate, init_random, integrate, integrate_from, l4_bound_check, sync_envelope_check,
    threshold_report, Component, DecayTarget, NoopObserver, RunOutput, Scheme, State,
};

const REFERENCE_CONFIG: &str = include_str!("../../../configs/paper.json");
const TABLE_CONFIG: &str = include_str!("../../../configs/paper_tables.json");

/// Grid point sampled for the table comparison (0-based).
const PROBE: (usize, usize) = (10, 10);

struct Line {
    id: u8,
    passed: bool,
    detail: String,
}

fn spread(s: &State, c: Component) -> f64 {
    let v = s.point_values(c, PROBE.0, PROBE.1);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn single_threaded<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(f)
}

fn constants() -> Line {
    let doc = parse_config(REFERENCE_CONFIG).expect("paper.json parses");
    let started = Instant::now();
    let r = threshold_report(&doc.run.params, &doc.run.bounds, doc.c_star, &doc.conventions).expect("constants");
    let elapsed = started.elapsed();
    let c = r.constants;
    let checks = [
        ("C1", c.c1, 437.5, 0.0),
        ("mu", c.mu, 0.175, 0.0),
        ("alpha", c.alpha, 0.35, 0.0),
        ("C2", c.c2, 876.4, 0.01),
        ("K", c.k, 41_345_645.6, 1.0),
        ("1+Q", c.one_plus_q(), 1_220_899.6, 1.0),
        ("Gamma", c.gamma, 0.45, 0.01),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, got, want, tol) in checks {
        let ok = if tol == 0.0 {
            got == want
        } else {
            (got - want).abs() <= tol
        };
        passed &= ok;
        parts.push(format!("{name}={got}{}", if ok { "" } else { " (out of tolerance)" }));
    }
    Line {
        id: 1,
        passed,
        detail: format!("{} [{:.2} ms]", parts.join(", "), elapsed.as_secs_f64() * 1e3),
    }
}

fn table_run() -> (RunOutput<f64>, f64) {
    let doc = parse_config(TABLE_CONFIG).expect("paper_tables.json parses");
    let started = Instant::now();
    let out = single_threaded(|| integrate(&doc.run, &mut NoopObserver).expect("run completes"));
    (out, started.elapsed().as_secs_f64())
}

fn simulation(out: &RunOutput<f64>, seconds: f64) -> Line {
    let u0 = spread(&out.initial, Component::Potential);
    let u1 = spread(&out.final_state, Component::Potential);
    let r0 = spread(&out.initial, Component::Memductance);
    let r1 = spread(&out.final_state, Component::Memductance);
    let u_final = out.final_state.point_values(Component::Potential, PROBE.0, PROBE.1);
    let rho_final = out.final_state.point_values(Component::Memductance, PROBE.0, PROBE.1);
    let shrink_u = u0 / u1;
    let shrink_rho = r0 / r1;
    let u_ok = u_final.iter().all(|v| (0.85..=0.95).contains(v));
    let rho_ok = rho_final.iter().all(|v| (0.025..=0.035).contains(v));
    let time_ok = seconds < 60.0;
    Line {
        id: 2,
        passed: shrink_u >= 100.0 && shrink_rho >= 1000.0 && u_ok && rho_ok && time_ok,
        detail: format!(
            "u spread {u0:.3e} -> {u1:.3e} ({shrink_u:.3e}x), rho spread {r0:.3e} -> {r1:.3e} ({shrink_rho:.3e}x), \
             final u {u_final:.4?}, final rho {rho_final:.5?}, {seconds:.1} s single-threaded"
        ),
    }
}

fn small_k_info() -> String {
    let doc = parse_config(REFERENCE_CONFIG).expect("paper.json parses");
    let out = integrate(&doc.run, &mut NoopObserver).expect("run completes");
    let u = out.final_state.point_values(Component::Potential, PROBE.0, PROBE.1);
    format!(
        "info: same run with k = {} ends with u {u:.4?}",
        doc.run.params.memristor_strength
    )
}

fn envelope(out: &RunOutput<f64>) -> Line {
    let env = sync_envelope_check(&out.series, 0.35, 0.25, DEFAULT_ENVELOPE_SLACK).expect("envelope");
    let fit = fit_decay_rate(&out.series, DecayTarget::Total, (0.5, 2.5)).expect("fit");
    Line {
        id: 3,
        passed: env.passed() && fit.rate >= 0.35,
        detail: format!(
            "worst envelope ratio {:.4} (pair {:?} at t={:?}), fitted rate {:.4} (R^2 {:.5}, {} samples)",
            env.worst_ratio, env.worst_pair, env.worst_time, fit.rate, fit.r_squared, fit.samples
        ),
    }
}

fn dissipativity(out: &RunOutput<f64>) -> Line {
    let doc = parse_config(REFERENCE_CONFIG).expect("paper.json parses");
    let c = threshold_report(&doc.run.params, &doc.run.bounds, doc.c_star, &doc.conventions)
        .expect("constants")
        .constants;
    let initial_energy = memfhn::MetricsRecord::from_state(&out.initial).total_energy;
    let ball = absorbing_check(&out.series, c.k);
    let l4 = l4_bound_check(&out.series, c.q);
    Line {
        id: 4,
        passed: ball.passed() && initial_energy <= c.k && ball.max_energy <= c.k && l4.passed(),
        detail: format!(
            "max energy {:.4e} <= K {:.4e}, tail max sum ||u||_4^4 {:.4e} < 1+Q {:.4e}",
            ball.max_energy.max(initial_energy),
            c.k,
            l4.tail_max,
            l4.bound
        ),
    }
}

fn oracles() -> Line {
    let coupling = verify::coupling_deviation(&[2, 3, 4, 8], 20).expect("coupling oracle");
    let worst = coupling.iter().map(|&(_, d)| d).fold(0.0, f64::max);
    let euler = verify::ode_reduction(Scheme::Euler).expect("euler reduction");
    let rk4 = verify::ode_reduction(Scheme::Rk4).expect("rk4 reduction");
    Line {
        id: 5,
        passed: worst <= 1e-12 && euler <= 1e-3 && rk4 <= 1e-8,
        detail: format!("coupling max diff {worst:.3e}, ODE deviation Euler {euler:.3e}, RK4 {rk4:.3e}"),
    }
}

fn orders() -> Line {
    let started = Instant::now();
    let (space, _) = verify::spatial_order();
    let (euler, _) = verify::temporal_order(Scheme::Euler, &EULER_ORDER_DTS).expect("euler order");
    let seconds = started.elapsed().as_secs_f64();
    Line {
        id: 6,
        passed: (space - 2.0).abs() <= 0.2 && (euler - 1.0).abs() <= 0.2 && seconds < 30.0,
        detail: format!("spatial order {space:.4}, Euler order {euler:.4}, {seconds:.1} s"),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn invariants() -> Line {
    let doc = parse_config(TABLE_CONFIG).expect("paper_tables.json parses");
    let cfg = doc.run;

    // Four copies of one random neuron.
    let seed_state = init_random(cfg.grid, 1, cfg.amplitude, cfg.seed).expect("init");
    let stack = |f: &[f64]| f.repeat(4);
    let identical = State::from_stacks(
        cfg.grid,
        4,
        stack(seed_state.u(0)),
        stack(seed_state.w(0)),
        stack(seed_state.rho(0)),
        0.0,
    )
    .expect("identical state");
    let out = integrate_from(&cfg, identical, &mut NoopObserver).expect("identical run");
    let mut drift = 0.0f64;
    for i in 1..4 {
        for c in [Component::Potential, Component::Recovery, Component::Memductance] {
            drift = drift.max(max_abs_diff(
                out.final_state.component(c, 0),
                out.final_state.component(c, i),
            ));
        }
    }

    let order = [2, 0, 3, 1];
    let init = init_random(cfg.grid, 4, cfg.amplitude, cfg.seed).expect("init");
    let plain = integrate_from(&cfg, init.clone(), &mut NoopObserver).expect("plain run");
    let perm = integrate_from(&cfg, init.permuted(&order), &mut NoopObserver).expect("permuted run");
    let expected = plain.final_state.permuted(&order);
    let perm_dev = max_abs_diff(expected.u_stack(), perm.final_state.u_stack())
        .max(max_abs_diff(expected.w_stack(), perm.final_state.w_stack()))
        .max(max_abs_diff(expected.rho_stack(), perm.final_state.rho_stack()));

    Line {
        id: 7,
        passed: drift <= 1e-12 && perm_dev <= 1e-12,
        detail: format!(
            "{} steps: identical-neuron drift {drift:.3e}, permutation deviation {perm_dev:.3e}",
            cfg.n_steps
        ),
    }
}

fn main() -> ExitCode {
    let mut lines = vec![constants()];
    let (run, seconds) = table_run();
    lines.push(simulation(&run, seconds));
    let info = small_k_info();
    lines.push(envelope(&run));
    lines.push(dissipativity(&run));
    lines.push(oracles());
    lines.push(orders());
    lines.push(invariants());

    let mut all = true;
    for l in &lines {
        all &= l.passed;
        println!(
            "criterion {} {}: {}",
            l.id,
            if l.passed { "PASS" } else { "FAIL" },
            l.detail
        );
        if l.id == 2 {
            println!("  {info}");
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        lines.iter().filter(|l| l.passed).count(),
        lines.len()
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
