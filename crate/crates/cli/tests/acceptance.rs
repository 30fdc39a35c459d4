//! Acceptance suite A1–A10. Prints one PASS/FAIL line per criterion.
//!
//! Criterion failures are reported but only change the exit status when
//! `ACCEPTANCE_STRICT=1`; a criterion that cannot run at all always fails
//! the process. `ACCEPTANCE_ONLY=A1,A8` restricts the run.

use giant_sse::dynamics::{initial_density, master_equation_solve};
use giant_sse::hilbert::trace_distance;
use giant_sse::noise::vacuum_statistics;
use giant_sse::osolver::{evolve_coefficient_field, evolve_matrix_field};
use giant_sse::thermal::{evolve_dual_field_thermal, thermal_master_solve};
use giant_sse::{
    Atom, CorrelationKernel, CouplingDistribution, ModeCouplings, ModeGrid, NoiseSampler, StateVector,
    ThermalKernelPair, C,
};
use giant_sse_cli::config::{EnsembleSpec, Initial, Method};
use giant_sse_cli::run::{couplings, run};
use giant_sse_cli::sweep::sweep;
use giant_sse_cli::{scenario, validate, ExperimentConfig};
use std::time::Instant;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn close(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

/// α_{μν}(τ) summed directly over the mode table.
fn alpha_direct(mc: &ModeCouplings<f64>, mu: Atom, nu: Atom, tau: f64) -> C<f64> {
    let (gm, gn) = (mc.atom(mu), mc.atom(nu));
    (0..mc.grid.len())
        .map(|j| gm[j].conj() * gn[j] * C::from_polar(1.0, -mc.grid.frequency(j) * tau))
        .sum()
}

/// Peak positions of |α_aa| and |α_ab| for two-point combs, at cutoff `k_max`
/// with Δt = 0.1/k_max and twice the horizon-safe mode count.
fn comb_peaks(d: f64, gap: f64, k_max: f64) -> Result<(f64, Vec<f64>, Vec<f64>, f64), Box<dyn std::error::Error>> {
    let t = 5.0;
    let dt = 0.1 / k_max;
    let n = ((4.0 * k_max * t / std::f64::consts::PI).ceil() as usize + 2) / 2 * 2;
    let a = CouplingDistribution::comb(vec![0.0, d], 0.5)?;
    let b = CouplingDistribution::comb(vec![gap, gap + d], 0.5)?;
    let mc = ModeCouplings::new(&a, &b, ModeGrid::new(k_max, n, t)?, [1.0, 1.0]);
    let k = CorrelationKernel::from_modes(&mc, dt, t)?;
    let locate = |mu, nu| -> Vec<f64> { k.peak_indices(mu, nu, 0.35).iter().map(|&i| i as f64 * dt).collect() };
    // Direct mode sums reproduce the tabulated kernel.
    let table_err = [gap - d, gap, gap + d]
        .iter()
        .map(|&tau| {
            let i = (tau / dt).round() as usize;
            (alpha_direct(&mc, Atom::A, Atom::B, i as f64 * dt) - k.at(Atom::A, Atom::B, i)).norm()
        })
        .fold(0.0, f64::max);
    Ok((dt, locate(Atom::A, Atom::A), locate(Atom::A, Atom::B), table_err))
}

fn a1() -> Outcome {
    let start = Instant::now();
    let (d, gap) = (1.0, 2.5);
    let want_auto = [0.0, d];
    let want_cross = [gap - d, gap, gap + d];
    let offset = |got: &[f64], want: &[f64]| -> f64 {
        if got.len() != want.len() {
            return f64::INFINITY;
        }
        got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max)
    };
    let mut notes = Vec::new();
    let mut last = (false, 0.0);
    for k_max in [10.0, 40.0, 160.0] {
        let (dt, auto, cross, table_err) = comb_peaks(d, gap, k_max)?;
        let off = offset(&auto, &want_auto).max(offset(&cross, &want_cross));
        let within = off <= dt * (1.0 + 1e-9) && table_err < 1e-9;
        notes.push(format!(
            "k_max = {k_max}: |α_aa| peaks {}, |α_ab| peaks {}, worst offset {:.2} Δt",
            fmt_list(&auto),
            fmt_list(&cross),
            off / dt
        ));
        last = (within, table_err);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        last.0 && secs < 10.0,
        format!(
            "want |α_aa| at {want_auto:?}, |α_ab| at {want_cross:?}; {}; table vs direct sum {:.1e}; {secs:.2} s",
            notes.join("; "),
            last.1
        ),
    ))
}

fn fmt_list(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", "))
}

fn comb2(method: Method, trajectories: usize, seed: u64) -> Result<ExperimentConfig, Box<dyn std::error::Error>> {
    let mut cfg = scenario::builtin("comb2")?;
    cfg.method = method;
    if method == Method::Sse {
        cfg.ensemble = Some(EnsembleSpec { trajectories, seed });
    } else {
        cfg.ensemble = None;
    }
    Ok(cfg)
}

fn max_trace_distance(x: &giant_sse::DensitySeries<f64>, y: &giant_sse::DensitySeries<f64>) -> f64 {
    x.states.iter().zip(&y.states).map(|(a, b)| trace_distance(a, b)).fold(0.0, f64::max)
}

fn a2() -> Outcome {
    let me = run(&comb2(Method::Master, 0, 0)?.resolve(Default::default())?)?.series;
    let start = Instant::now();
    let sse = run(&comb2(Method::Sse, 2000, 42)?.resolve(Default::default())?)?;
    let secs = start.elapsed().as_secs_f64();
    let worst = max_trace_distance(&me, &sse.series);

    let seeds = 1..=6u64;
    let ns = [500usize, 2000, 8000];
    let mut rms = Vec::new();
    for &n in &ns {
        let mut acc = 0.0;
        for seed in seeds.clone() {
            let s = run(&comb2(Method::Sse, n, seed)?.resolve(Default::default())?)?.series;
            acc += max_trace_distance(&me, &s).powi(2);
        }
        rms.push((acc / seeds.clone().count() as f64).sqrt());
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = rms.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    Ok((
        worst < 0.02 && sse.excluded == 0 && close(slope, -0.5, 0.15) && secs < 300.0,
        format!(
            "seed 42, n = 2000: max trace distance {worst:.4} (limit 0.02), {secs:.1} s; RMS over 6 seeds at n = {ns:?}: {:.4}/{:.4}/{:.4}, log-log slope {slope:.3} (want −0.5 ± 0.15)",
            rms[0], rms[1], rms[2]
        ),
    ))
}

fn a3() -> Outcome {
    let c = validate::master_vs_single_oracle()?;
    Ok((c.passed, c.detail))
}

fn a4() -> Outcome {
    let (gamma, bandwidth, dt, t) = (1.0, 200.0, 2e-3, 3.0);
    let k = CorrelationKernel::near_delta([C::new(gamma, 0.0); 4], bandwidth, dt, t)?;
    let field = evolve_matrix_field(&k, [1.0, 1.0], dt, t)?;
    let singlet = master_equation_solve(&initial_density(&StateVector::bell(-1.0))?, &field, field.hamiltonian(), dt, t)?;
    let drift = singlet
        .states
        .iter()
        .map(|r| {
            let p = r.populations();
            (p.eg + p.ge - 1.0f64).abs()
        })
        .fold(0.0, f64::max);
    let ee = master_equation_solve(&initial_density(&StateVector::ee())?, &field, field.hamiltonian(), dt, t)?;
    let times = ee.times();
    let p_ee: Vec<f64> = ee.states.iter().map(|r| r.populations().ee).collect();
    // Collective decay with Γ_{μν} = Γ: |ee⟩ → |T⟩ → |gg⟩, each at rate 2Γ.
    let curve = times
        .iter()
        .zip(&ee.states)
        .map(|(&s, r)| {
            let p = r.populations();
            let want_t = 2.0 * gamma * s * (-2.0 * gamma * s).exp();
            ((p.ee - (-2.0 * gamma * s).exp()).abs()).max((p.eg + p.ge - want_t).abs())
        })
        .fold(0.0, f64::max);
    let rate = validate::decay_rate(&times, &p_ee, 0.5, 2.5) / 2.0;
    let rel = (rate / gamma - 1.0).abs();
    Ok((
        drift < 1e-3 && rel < 0.02,
        format!("singlet drift {drift:.2e} (limit 1e-3), per-atom decay rate {rate:.5} vs Γ = {gamma} (rel {rel:.2e}, limit 2e-2), max deviation from analytic populations {curve:.2e}"),
    ))
}

fn delta_coefficients(bandwidth: f64) -> Result<Vec<C<f64>>, giant_sse::Error> {
    let dt = 0.02 / bandwidth;
    let t = 20.0 / bandwidth;
    let k = CorrelationKernel::near_delta([C::new(1.0, 0.0); 4], bandwidth, dt, t)?;
    let cf = evolve_coefficient_field(&k, [1.0, 1.0], dt, t)?;
    let n = cf.steps();
    let mut v = Vec::new();
    for mu in Atom::BOTH {
        v.extend(cf.p_convolution(mu, n));
        v.extend(cf.q_convolution(mu, n));
    }
    Ok(v)
}

fn a5() -> Outcome {
    let gamma = 1.0;
    let target = |i: usize| if i % 4 == 0 { gamma / 2.0 } else { 0.0 };
    let bands = [25.0, 50.0, 100.0, 200.0, 400.0];
    let runs: Vec<Vec<C<f64>>> = bands.iter().map(|&b| delta_coefficients(b)).collect::<Result<_, _>>()?;
    let dev: Vec<f64> = runs
        .iter()
        .map(|v| v.iter().enumerate().map(|(i, z)| (z - target(i)).norm()).fold(0.0, f64::max))
        .collect();
    let monotone = dev.windows(2).all(|w| w[1] < w[0]);
    let order = (dev[dev.len() - 2] / dev[dev.len() - 1]).log2();
    // Three-level Richardson extrapolation in 1/b to the delta limit.
    let (x1, x2, x3) = (&runs[2], &runs[3], &runs[4]);
    let limit = (0..x1.len())
        .map(|i| ((x3[i] * 8.0 - x2[i] * 6.0 + x1[i]) / 3.0 - target(i)).norm())
        .fold(0.0, f64::max);
    // The singular kernel itself.
    let k = CorrelationKernel::delta([C::new(gamma, 0.0); 4], 0.01, 1.0)?;
    let cf = evolve_coefficient_field(&k, [1.0, 1.0], 0.01, 1.0)?;
    let exact = Atom::BOTH
        .iter()
        .flat_map(|&mu| {
            let (p, q) = (cf.p_convolution(mu, cf.steps()), cf.q_convolution(mu, cf.steps()));
            p.into_iter().chain(q)
        })
        .enumerate()
        .map(|(i, z)| (z - target(i)).norm())
        .fold(0.0, f64::max);
    Ok((
        monotone && order > 0.9 && limit < 1e-6 && exact < 1e-6,
        format!(
            "max |Δ| at b = {bands:?}: {}; order {order:.2}; extrapolated b → ∞ {limit:.1e}; singular kernel {exact:.1e} (limit 1e-6)",
            dev.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join("/")
        ),
    ))
}

fn a6() -> Outcome {
    let cfg = comb2(Method::Master, 0, 0)?;
    let r = cfg.resolve(Default::default())?;
    let mc = couplings(&r)?;
    let (dt, t) = (1e-3, cfg.time.t_max);
    let k = CorrelationKernel::from_modes(&mc, dt, t)?;
    let f = evolve_matrix_field(&k, cfg.omega, dt, t)?;
    let cf = evolve_coefficient_field(&k, cfg.omega, dt, t)?;
    let mut worst = 0.0f64;
    for mu in Atom::BOTH {
        for n in 0..=f.steps() {
            let (x, y) = (f.obar_step(0, mu, n), cf.obar_step(mu, n));
            for i in 0..4 {
                for j in 0..4 {
                    worst = worst.max((x[(i, j)] - y[(i, j)]).norm());
                }
            }
        }
    }
    let span = f.report.max_span_residual;
    Ok((
        worst < 1e-6 && span < 1e-8,
        format!("max entrywise |Ō_matrix − Ō_coef| {worst:.2e} over ωt ∈ [0, {t}] at Δt = {dt} (limit 1e-6), span residual {span:.2e} (limit 1e-8)"),
    ))
}

fn a7() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let counts = sweep(&scenario::builtin("comb_count")?, None)?;
    let peaks: Vec<f64> = [1, 2, 10].iter().map(|&m| counts.group(Some(m), None).map_or(f64::NAN, |g| g.peak)).collect();
    let i = peaks.windows(2).all(|w| w[1] > w[0]);
    ok &= i;
    notes.push(format!(
        "(i) {} C_max m=1/2/10 {:.3}/{:.3}/{:.3} (reference 0.2/0.3/0.5)",
        if i { "ok" } else { "FAILED" },
        peaks[0],
        peaks[1],
        peaks[2]
    ));

    let doubles = sweep(&scenario::builtin("double_gaussian")?, None)?;
    let contrast: Vec<f64> =
        [0.1, 1.0, 1.5].iter().map(|&s| doubles.group(None, Some(s)).and_then(|g| g.contrast).unwrap_or(f64::NAN)).collect();
    let ii = contrast.windows(2).all(|w| w[1] < w[0]);
    ok &= ii;
    notes.push(format!(
        "(ii) {} contrast at ωt = 2 for s = 0.1/1/1.5: {:.3}/{:.3}/{:.3}",
        if ii { "ok" } else { "FAILED" },
        contrast[0],
        contrast[1],
        contrast[2]
    ));

    let loc = sweep(&scenario::builtin("ee_localized")?, None)?;
    let deloc = sweep(&scenario::builtin("ee_delocalized")?, None)?;
    let (gl, gd) = (&loc.groups[0], &deloc.groups[0]);
    let (vl, vd) = (gl.variance.unwrap_or(f64::NAN), gd.variance.unwrap_or(f64::NAN));
    let iii = vl >= 10.0 * vd && gl.peak < 0.6 && gd.peak > gl.peak;
    ok &= iii;
    notes.push(format!(
        "(iii) {} variance at ωt = 1.8: s = 0.1 {vl:.2e} vs s = 2 {vd:.2e}; peak C {:.3} (s = 0.1) vs {:.3} (s = 2)",
        if iii { "ok" } else { "FAILED" },
        gl.peak,
        gd.peak
    ));

    let widths = sweep(&scenario::builtin("gaussian_width")?, None)?;
    let by_width: Vec<_> = [0.01, 0.1, 2.0].iter().map(|&s| widths.group(None, Some(s))).collect::<Option<_>>().ok_or("gaussian_width group missing")?;
    let iv = by_width.windows(2).all(|w| w[1].peak > w[0].peak && w[1].mean > w[0].mean);
    ok &= iv;
    notes.push(format!(
        "(iv) {} s = 0.01/0.1/2: peak C {:.3}/{:.3}/{:.3}, mean C {:.3}/{:.3}/{:.3}",
        if iv { "ok" } else { "FAILED" },
        by_width[0].peak,
        by_width[1].peak,
        by_width[2].peak,
        by_width[0].mean,
        by_width[1].mean,
        by_width[2].mean
    ));
    Ok((ok, notes.join("; ")))
}

fn a8() -> Outcome {
    let cfg = comb2(Method::Sse, 2, 42)?;
    let r = cfg.resolve(Default::default())?;
    let mc = couplings(&r)?;
    let (dt, t) = (r.dt, cfg.time.t_max);
    let sampler = NoiseSampler::vacuum(&mc, dt, t)?;
    let steps = sampler.steps();
    let pairs = [(Atom::A, Atom::A), (Atom::A, Atom::B), (Atom::B, Atom::A), (Atom::B, Atom::B)];
    let probes: Vec<_> = (0..20)
        .map(|i| {
            let t_step = (i * 53 + 7) % (steps + 1);
            let s_step = t_step.saturating_sub((i * 31) % 160);
            let (mu, nu) = pairs[i % 4];
            (t_step, s_step, mu, nu)
        })
        .collect();
    let start = Instant::now();
    let stats = vacuum_statistics(&sampler, 42, 100_000, &probes, |p| alpha_direct(&mc, p.2, p.3, (p.0 - p.1) as f64 * dt));
    let secs = start.elapsed().as_secs_f64();
    let passed = stats.iter().filter(|s| s.passes(4.0)).count();
    let worst = stats
        .iter()
        .map(|s| {
            let (d, se) = (s.covariance.mean() - s.expected, s.covariance.std_error());
            (d.re.abs() / se.re.max(1e-300)).max(d.im.abs() / se.im.max(1e-300))
        })
        .fold(0.0, f64::max);
    Ok((
        passed == probes.len() && secs < 60.0,
        format!("{passed}/{} probes within 4σ on M[z], M[zz], M[zz*] (10⁵ samples, {secs:.1} s); worst covariance deviation {worst:.2}σ", probes.len()),
    ))
}

fn a9() -> Outcome {
    let cold = validate::cold_thermal_vs_vacuum()?;

    let (gamma, beta, bandwidth, t) = (1.0f64, 2.0f64, 40.0, 5.0);
    let dt = 0.05 / bandwidth;
    let pair = ThermalKernelPair::near_delta_local(gamma, beta, 1.0, bandwidth, dt, t)?;
    let h = giant_sse::QubitOperator::atomic_hamiltonian(1.0, 1.0);
    let dual = evolve_dual_field_thermal(&pair, h, dt, t)?;
    let series = thermal_master_solve(&initial_density(&StateVector::gg())?, &dual, dt, t)?;
    let nbar = 1.0 / (beta.exp() - 1.0);
    let heating = |s: f64| nbar / (2.0 * nbar + 1.0) * (1.0 - (-gamma * (2.0 * nbar + 1.0) * s).exp());
    let mut worst = 0.0f64;
    for (s, rho) in series.times().iter().zip(&series.states) {
        if *s >= 1.0 {
            let p = rho.populations();
            for pe in [p.ee + p.eg, p.ee + p.ge] {
                worst = worst.max((pe / heating(*s) - 1.0).abs());
            }
        }
    }
    let p = series.last().populations();
    let final_pe = p.ee + p.eg;
    Ok((
        cold.passed && final_pe > 1e-3 && worst < 0.05,
        format!(
            "{}; β = 2: excited population {final_pe:.4} at ωt = 5 (analytic {:.4}), max relative deviation over ωt ∈ [1, 5] {worst:.2e} (limit 5e-2)",
            cold.detail,
            heating(t)
        ),
    ))
}

fn a10() -> Outcome {
    let curvature = validate::double_oracle_short_time()?;
    let mut cfg = scenario::builtin("comb2")?;
    cfg.initial = Initial::Ee;
    cfg.ensemble = None;
    cfg.time.t_max = 2.0;
    cfg.time.dt = Some(0.005);
    cfg.time.output_stride = 1;
    cfg.method = Method::Master;
    let r = cfg.resolve(Default::default())?;
    let me = run(&r)?;
    cfg.method = Method::Dressed2;
    let r2 = cfg.resolve(Default::default())?;
    let ex = run(&r2)?;
    let (cm, cx) = (me.concurrence()?, ex.concurrence()?);
    let worst = cm.iter().zip(&cx).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let peak = cx.iter().cloned().fold(0.0, f64::max);
    let td = max_trace_distance(&me.series, &ex.series);
    Ok((
        curvature.passed && worst <= 0.05 && r2.modes == 200,
        format!(
            "{}; over ωt ∈ [0, 2] at N = {}: max |ΔC| {worst:.3e} (limit 0.05, oracle max C {peak:.3e}), max trace distance {td:.2e}",
            curvature.detail, r2.modes
        ),
    ))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 10] = [
        ("A1", "kernel geometry", a1),
        ("A2", "SSE ensemble vs master equation", a2),
        ("A3", "single-excitation oracle", a3),
        ("A4", "Lindblad reduction", a4),
        ("A5", "delta-limit coefficients", a5),
        ("A6", "O-representation equivalence", a6),
        ("A7", "qualitative trends", a7),
        ("A8", "noise statistics", a8),
        ("A9", "thermal consistency", a9),
        ("A10", "two-excitation oracle", a10),
    ];
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let only: Option<Vec<String>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').map(|x| x.trim().to_uppercase()).collect());
    let (mut failed, mut errored, mut ran) = (Vec::new(), false, 0);
    for (id, name, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.iter().any(|x| x == id)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok((true, detail)) => println!("PASS {id} {name}: {detail} [{secs:.1} s]"),
            Ok((false, detail)) => {
                println!("FAIL {id} {name}: {detail} [{secs:.1} s]");
                failed.push(id);
            }
            Err(e) => {
                println!("FAIL {id} {name}: could not run: {e} [{secs:.1} s]");
                failed.push(id);
                errored = true;
            }
        }
    }
    println!("acceptance: {}/{ran} passed{}", ran - failed.len(), if failed.is_empty() { String::new() } else { format!("; failing: {}", failed.join(", ")) });
    if errored || (strict && !failed.is_empty()) {
        std::process::exit(1);
    }
}
