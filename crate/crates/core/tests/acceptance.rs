//! Acceptance gate. Every criterion runs at its stated tolerance and prints
//! one PASS/FAIL line; the process exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use janus_core::evolution::{self, EvolveOptions};
use janus_core::janus::{commutator_residual_in_sector, self_commutator_norm, DEFAULT_MARGIN};
use janus_core::tfd::{
    self, build_liouvillian_with, kronecker_liouvillian, lift, tilde, trace_form_check,
};
use janus_core::{
    build_liouvillian, build_pair, commutator_residual, expm_oracle, fidelity, short_term_state,
    steady_state, Complex64, DissipatorOrdering, FockSpace, JanusConfig, JanusKind,
    JanusRealization, NullSpaceMethod, Parity, ReferenceState, Sector, VectorizedState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<Vec<String>, Vec<String>>;

struct Report {
    lines: Vec<String>,
    failures: usize,
}

impl Report {
    fn run(&mut self, id: u32, title: &str, budget: Duration, check: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (mut ok, details) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let mut details = details;
        if elapsed > budget {
            ok = false;
            details.push(format!(
                "runtime {:.2?} over budget {:.0?}",
                elapsed, budget
            ));
        }
        if !ok {
            self.failures += 1;
        }
        let line = format!(
            "criterion {id} [{}] {title} ({:.2?}): {}",
            if ok { "PASS" } else { "FAIL" },
            elapsed,
            details.join("; ")
        );
        println!("{line}");
        self.lines.push(line);
    }
}

/// Collects named measurements against bounds; the outcome fails if any
/// bound is violated.
#[derive(Default)]
struct Checks {
    notes: Vec<String>,
    failed: bool,
}

impl Checks {
    fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        let ok = value <= bound;
        self.record(name, value, "<=", bound, ok);
    }

    fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        let ok = value >= bound;
        self.record(name, value, ">=", bound, ok);
    }

    fn greater(&mut self, name: &str, value: f64, bound: f64) {
        let ok = value > bound;
        self.record(name, value, ">", bound, ok);
    }

    fn within(&mut self, name: &str, value: f64, target: f64, tol: f64) {
        let ok = (value - target).abs() <= tol;
        self.notes.push(format!(
            "{name} = {value:.9} (target {target:.9} ± {tol:.0e}){}",
            if ok { "" } else { " VIOLATED" }
        ));
        self.failed |= !ok;
    }

    fn record(&mut self, name: &str, value: f64, op: &str, bound: f64, ok: bool) {
        self.notes.push(format!(
            "{name} = {value:.3e} {op} {bound:.0e}{}",
            if ok { "" } else { " VIOLATED" }
        ));
        self.failed |= !ok;
    }

    fn note(&mut self, text: String) {
        self.notes.push(text);
    }

    fn fail(&mut self, text: String) {
        self.notes.push(text);
        self.failed = true;
    }

    fn finish(self) -> Outcome {
        if self.failed {
            Err(self.notes)
        } else {
            Ok(self.notes)
        }
    }
}

fn realization(kind: JanusKind, cutoffs: &[usize], beta: Complex64) -> JanusRealization {
    let space = FockSpace::new(cutoffs).expect("valid cutoffs");
    build_pair(&JanusConfig::new(kind, space).with_beta(beta)).expect("valid realization")
}

fn real_beta(b: f64) -> Complex64 {
    Complex64::new(b, 0.0)
}

fn cutoffs_for(kind: JanusKind, pair: usize, single: usize) -> Vec<usize> {
    if kind.required_modes() == 2 {
        vec![pair, pair]
    } else {
        vec![single]
    }
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let mut c = Checks::default();
    let mut worst = 0.0f64;
    let mut spaces: Vec<Vec<usize>> = (2..=8).map(|n| vec![n]).collect();
    for na in 2..=8 {
        for nb in 2..=8 {
            spaces.push(vec![na, nb]);
        }
    }
    for cutoffs in &spaces {
        let space = FockSpace::new(cutoffs).unwrap();
        let id: Vec<Complex64> = tfd::identity_vector(&space).into_amplitudes();
        for mode in 0..space.mode_count() {
            let a = space.lower(mode).unwrap();
            let la = lift(&space, &a).unwrap();
            let ta = tilde(&space, &a).unwrap();
            let lhs1 = la.matvec(&id).unwrap();
            let rhs1 = ta.adjoint().matvec(&id).unwrap();
            let lhs2 = la.adjoint().matvec(&id).unwrap();
            let rhs2 = ta.matvec(&id).unwrap();
            worst = worst
                .max(max_diff(&lhs1, &rhs1))
                .max(max_diff(&lhs2, &rhs2));
        }
    }
    c.note(format!("{} spaces up to [8,8]", spaces.len()));
    c.at_most("max |a|I> - a~^dag|I>|, |a^dag|I> - a~|I>|", worst, 1e-13);
    c.finish()
}

fn criterion_2() -> Outcome {
    let mut c = Checks::default();
    let beta = Complex64::new(0.2, 0.1);
    for kind in JanusKind::ALL {
        for n in [2usize, 4, 6, 8] {
            let cutoffs = cutoffs_for(kind, n, n);
            let r = realization(kind, &cutoffs, beta);
            for (g, kappa) in [(0.5, 1.0), (0.5, 0.0), (0.0, 2.0)] {
                let l = build_liouvillian_with(&r, g, kappa, DissipatorOrdering::Standard, false)
                    .unwrap();
                let direct = kronecker_liouvillian(&r, g, kappa).unwrap();
                let diff = l.op.max_abs_diff(&direct).unwrap();
                let trace = trace_form_check(&l);
                if n == 8 && g == 0.5 && kappa == 1.0 {
                    c.at_most(&format!("{kind} {cutoffs:?} kron diff"), diff, 1e-13);
                    c.at_most(&format!("{kind} {cutoffs:?} <I|L"), trace, 1e-12);
                } else if diff > 1e-13 || trace > 1e-12 {
                    c.fail(format!(
                        "{kind} {cutoffs:?} g={g} kappa={kappa}: diff {diff:.3e} trace {trace:.3e}"
                    ));
                }
            }
        }
    }
    let r = realization(JanusKind::PairAb, &[6, 6], real_beta(0.0));
    let literal = build_liouvillian_with(&r, 0.5, 1.0, DissipatorOrdering::Literal, false).unwrap();
    c.greater(
        "literal ordering <I|L, pair_ab [6,6]",
        trace_form_check(&literal),
        1e-6,
    );
    c.finish()
}

fn criterion_3() -> Outcome {
    let mut c = Checks::default();
    let cases = [
        (JanusKind::PairAb, vec![12usize, 12]),
        (JanusKind::SquareA2, vec![16]),
        (JanusKind::PairBeta, vec![12, 12]),
    ];
    for (kind, cutoffs) in &cases {
        let beta = if kind.uses_beta() {
            real_beta(0.2)
        } else {
            real_beta(0.0)
        };
        let r = realization(*kind, cutoffs, beta);
        for which in 0..r.g_daggers.len() {
            let full = commutator_residual(&r, which, DEFAULT_MARGIN).unwrap();
            c.at_most(&format!("{kind} G{which}^dag interior"), full, 1e-12);
            if let Some(sector) = r.canonical_sector(which) {
                let restricted =
                    commutator_residual_in_sector(&r, which, DEFAULT_MARGIN, sector).unwrap();
                c.note(format!(
                    "(diagnostic) {kind} G{which}^dag on {sector:?}: {restricted:.3e}"
                ));
            }
        }
    }
    c.finish()
}

fn tmss_run() -> (Checks, Vec<VectorizedState>) {
    let mut c = Checks::default();
    let (g, t) = (0.5, 1.0);
    let r = realization(JanusKind::PairAb, &[30, 30], real_beta(0.0));
    let vacuum = VectorizedState::basis_projector(&r.space, 0);
    let rho = short_term_state(&r, g, t, &vacuum).unwrap();
    let tmss = ReferenceState::two_mode_squeezed(&r.space, g * t, 0.0).unwrap();
    c.at_most(
        "1 - fidelity vs TMSS(r=0.5) at [30,30]",
        1.0 - fidelity(&rho, &tmss).unwrap(),
        1e-8,
    );
    let sech = 1.0 / (g * t).cosh();
    c.within("p0", rho.entry(0, 0).re, sech * sech, 1e-6);
    c.within("p0 (closed form)", rho.entry(0, 0).re, 0.786448, 1e-6);

    let small = realization(JanusKind::PairAb, &[8, 8], real_beta(0.0));
    let vac8 = VectorizedState::basis_projector(&small.space, 0);
    let evolved = short_term_state(&small, g, t, &vac8).unwrap();
    let l8 = build_liouvillian(&small, g, 0.0).unwrap();
    let oracle = expm_oracle(&l8, t, &vac8).unwrap();
    c.at_most(
        "evolve vs expm oracle at [8,8]",
        evolved.distance(&oracle),
        1e-9,
    );

    let l = build_liouvillian(&r, g, 0.0).unwrap();
    let grid: Vec<f64> = (0..=10).map(|k| t * k as f64 / 10.0).collect();
    let trajectory =
        evolution::evolve_with(&l, &vacuum, &grid, &EvolveOptions::new(1e-12)).unwrap();
    (c, trajectory.states)
}

fn squeeze_run() -> (Checks, Vec<VectorizedState>) {
    let mut c = Checks::default();
    let r = realization(JanusKind::SquareA2, &[30], real_beta(0.0));
    let vacuum = VectorizedState::basis_projector(&r.space, 0);
    let l = build_liouvillian(&r, 0.5, 0.0).unwrap();
    let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let trajectory =
        evolution::evolve_with(&l, &vacuum, &grid, &EvolveOptions::new(1e-12)).unwrap();
    let odd = trajectory
        .states
        .iter()
        .map(|s| {
            s.populations()
                .iter()
                .skip(1)
                .step_by(2)
                .map(|p| p.abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    c.at_most("square_a2 odd-level population", odd, 1e-12);
    c.note(format!(
        "square_a2 top-level leak {:.3e}",
        trajectory.max_leak()
    ));
    (c, trajectory.states)
}

fn criterion_4() -> Outcome {
    let (mut c, _) = tmss_run();
    let (s, _) = squeeze_run();
    c.notes.extend(s.notes);
    c.failed |= s.failed;
    c.finish()
}

/// `I_ν(2) = Σ 1/(k!(k+ν)!)`.
fn bessel_i_at_two(nu: u32) -> f64 {
    let mut term = 1.0;
    for k in 1..=nu {
        term /= k as f64;
    }
    let mut sum = 0.0;
    for k in 0..60u32 {
        sum += term;
        term /= ((k + 1) * (k + 1 + nu)) as f64;
    }
    sum
}

fn pair_steady() -> (Checks, Vec<VectorizedState>) {
    let mut c = Checks::default();
    let r = realization(JanusKind::PairAb, &[24, 24], real_beta(0.0));
    let l = build_liouvillian(&r, 0.5, 1.0).unwrap();
    let ss = steady_state(
        &l,
        Some(Sector::Difference(0)),
        NullSpaceMethod::Auto,
        1e-10,
    )
    .unwrap();
    c.at_most("null residual", ss.null_residual, 1e-8);
    c.note(format!("lambda target {:?}", ss.lambda_target));
    c.at_most("resid_F (lambda = -i)", ss.resid_f, 1e-5);
    c.note(format!("resid_Ftilde {:.3e}", ss.resid_ftilde));
    let pc = ReferenceState::pair_coherent(&r.space, Complex64::new(0.0, -1.0), 0).unwrap();
    c.at_most(
        "1 - fidelity vs pair coherent(-i, 0)",
        1.0 - fidelity(&ss.state, &pc).unwrap(),
        1e-6,
    );
    let expected = bessel_i_at_two(1) / bessel_i_at_two(0);
    c.within("<n_a>", ss.state.mean_occupation(0), expected, 1e-4);

    let si = steady_state(
        &l,
        Some(Sector::Difference(0)),
        NullSpaceMethod::ShiftInvert,
        1e-10,
    )
    .unwrap();
    c.at_most("shift-invert vs dense", si.state.distance(&ss.state), 1e-8);

    let vacuum = VectorizedState::basis_projector(&r.space, 0);
    let grid: Vec<f64> = (0..=8).map(|k| k as f64).collect();
    let trajectory =
        evolution::evolve_with(&l, &vacuum, &grid, &EvolveOptions::new(1e-10)).unwrap();
    let mut states = trajectory.states;
    states.push(ss.state);
    (c, states)
}

fn criterion_5() -> Outcome {
    pair_steady().0.finish()
}

fn cat_steady() -> (Checks, Vec<VectorizedState>) {
    let mut c = Checks::default();
    let r = realization(JanusKind::SquareA2, &[30], real_beta(0.0));
    let l = build_liouvillian(&r, 0.5, 1.0).unwrap();
    let even = Sector::Parity(Parity::Even);
    let ss = steady_state(&l, Some(even), NullSpaceMethod::Auto, 1e-10).unwrap();
    c.at_most("resid_F (lambda = -i)", ss.resid_f, 1e-4);
    c.note(format!(
        "resid_Ftilde {:.3e}, null residual {:.3e}",
        ss.resid_ftilde, ss.null_residual
    ));
    let alpha = Complex64::new(0.0, -1.0).sqrt();
    let cat = ReferenceState::cat(&r.space, alpha, Parity::Even).unwrap();
    c.at_most(
        "1 - fidelity vs even cat(sqrt(-i))",
        1.0 - fidelity(&ss.state, &cat).unwrap(),
        1e-4,
    );

    let odd = steady_state(
        &l,
        Some(Sector::Parity(Parity::Odd)),
        NullSpaceMethod::Auto,
        1e-10,
    )
    .unwrap();
    let odd_cat = ReferenceState::cat(&r.space, alpha, Parity::Odd).unwrap();
    c.note(format!(
        "(diagnostic) odd sector: resid_F {:.3e}, 1 - fidelity vs odd cat {:.3e}",
        odd.resid_f,
        1.0 - fidelity(&odd.state, &odd_cat).unwrap()
    ));

    let vacuum = VectorizedState::basis_projector(&r.space, 0);
    let grid: Vec<f64> = (0..=8).map(|k| k as f64).collect();
    let trajectory =
        evolution::evolve_with(&l, &vacuum, &grid, &EvolveOptions::new(1e-10)).unwrap();
    let mut states = trajectory.states;
    states.push(ss.state);
    (c, states)
}

fn criterion_6() -> Outcome {
    cat_steady().0.finish()
}

fn criterion_7() -> Outcome {
    let mut c = Checks::default();
    let runs = [
        ("short-term pair_ab", tmss_run().1),
        ("short-term square_a2", squeeze_run().1),
        ("pair_ab steady", pair_steady().1),
        ("square_a2 cat", cat_steady().1),
    ];
    for (name, states) in &runs {
        let mut trace_dev = 0.0f64;
        let mut herm = 0.0f64;
        let mut min_eig = f64::INFINITY;
        for s in states {
            trace_dev = trace_dev.max((s.trace() - Complex64::new(1.0, 0.0)).norm());
            herm = herm.max(s.hermiticity_deviation());
            match evolution::min_eigenvalue(s) {
                Some(m) => min_eig = min_eig.min(m),
                None => c.fail(format!("{name}: min eigenvalue not computed")),
            }
        }
        c.at_most(
            &format!("{name} ({} states) trace dev", states.len()),
            trace_dev,
            1e-9,
        );
        c.at_most(&format!("{name} herm dev"), herm, 1e-9);
        c.at_least(&format!("{name} min eig"), min_eig, -1e-8);
    }
    c.finish()
}

fn random_density(space: &FockSpace, rng: &mut ChaCha8Rng) -> VectorizedState {
    let d = space.dim();
    let a: Vec<Complex64> = (0..d * d)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mut rho = vec![Complex64::new(0.0, 0.0); d * d];
    for n in 0..d {
        for m in 0..d {
            rho[n * d + m] = (0..d).map(|k| a[n * d + k] * a[m * d + k].conj()).sum();
        }
    }
    let trace: Complex64 = (0..d).map(|n| rho[n * d + n]).sum();
    let rho: Vec<Complex64> = rho.into_iter().map(|x| x / trace).collect();
    VectorizedState::from_amplitudes(space.clone(), rho).unwrap()
}

fn criterion_8() -> Outcome {
    let mut c = Checks::default();
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for kind in JanusKind::ALL {
        let cutoffs = cutoffs_for(kind, 4, 12);
        let r = realization(kind, &cutoffs, real_beta(0.2));
        let l = build_liouvillian(&r, 0.5, 1.0).unwrap();
        let rho0 = random_density(&r.space, &mut rng);
        let mut times: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..2.0)).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut grid = vec![0.0];
        grid.extend(&times);
        let trajectory = evolution::evolve(&l, &rho0, &grid, tol).unwrap();
        let mut worst = 0.0f64;
        for (state, &t) in trajectory.states.iter().zip(&grid).skip(1) {
            let oracle = expm_oracle(&l, t, &rho0).unwrap();
            worst = worst.max(state.distance(&oracle));
        }
        c.at_most(
            &format!("{kind} {cutoffs:?} |evolve - expm|_F"),
            worst,
            10.0 * tol,
        );
    }
    c.finish()
}

fn criterion_9() -> Outcome {
    let mut c = Checks::default();
    let beta = real_beta(0.2);
    let runs = [
        (JanusKind::SingleBeta, vec![24usize], None),
        (
            JanusKind::PairBeta,
            vec![16, 16],
            Some(Sector::Difference(0)),
        ),
    ];
    for (kind, cutoffs, sector) in runs {
        let r = realization(kind, &cutoffs, beta);
        let l = build_liouvillian(&r, 0.5, 1.0).unwrap();
        let self_comm = self_commutator_norm(&r, DEFAULT_MARGIN).unwrap();
        match steady_state(&l, sector, NullSpaceMethod::Auto, 1e-10) {
            Ok(ss) => {
                let finite = [ss.resid_f, ss.resid_ftilde, ss.null_residual, self_comm]
                    .iter()
                    .all(|x| x.is_finite());
                let line = format!(
                    "{kind} {cutoffs:?}: resid_F {:.3e}, resid_Ftilde {:.3e}, null residual {:.3e}, |[F,F^dag]| {:.3e}, <n_a> {:.4}",
                    ss.resid_f,
                    ss.resid_ftilde,
                    ss.null_residual,
                    self_comm,
                    ss.state.mean_occupation(0)
                );
                if finite {
                    c.note(line);
                } else {
                    c.fail(line);
                }
            }
            Err(e) => c.fail(format!("{kind}: steady state failed: {e}")),
        }
    }
    c.finish()
}

fn main() {
    // honour `cargo test -- --list` and filters without running anything
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut report = Report {
        lines: Vec::new(),
        failures: 0,
    };
    let s = Duration::from_secs;
    report.run(1, "TFD identity suite", s(1), criterion_1);
    report.run(
        2,
        "Liouvillian equivalence and trace form",
        s(5),
        criterion_2,
    );
    report.run(3, "Janus contract on the interior", s(5), criterion_3);
    report.run(4, "short-term squeezing", s(60), criterion_4);
    report.run(5, "pair coherent steady state", s(120), criterion_5);
    report.run(6, "cat steady state", s(120), criterion_6);
    report.run(7, "physicality along trajectories", s(300), criterion_7);
    report.run(8, "evolve vs expm oracle", s(60), criterion_8);
    report.run(9, "beta-deformed diagnostics", s(120), criterion_9);
    println!(
        "acceptance: {} passed, {} failed",
        report.lines.len() - report.failures,
        report.failures
    );
    if report.failures > 0 {
        std::process::exit(1);
    }
}
