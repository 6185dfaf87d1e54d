//! The fifteen acceptance criteria. Each test writes one `PASS`/`FAIL` line straight to
//! the stdout handle, so the line survives output capture, then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kahler_lab::bergman::{
    assemble, assemble_potential, bergman_measure, decomposition_inequality, mixed_positivity,
    psh_variation_check, tv_convergence,
};
use kahler_lab::experiments::{corpus_pairs, generate_corpus, skew_twist, PERTURBATION_S};
use kahler_lab::fields::{
    energy_ev, futaki, hamiltonian_residual, ibp_identity_check, inner_product, linearized_data,
    perturbation_order_check, solve_linearized, sup_distance_mod_affine, sup_distance_mod_constants,
    twisted_csc_solve, GradientField,
};
use kahler_lab::functionals::radial::{default_direction, gradient_check, RadialFunctional, GRADIENT_STEPS};
use kahler_lab::functionals::{
    convexity_scan, entropy_legendre_gap, log_density, mabuchi, strict_convexity_imu, subslope_check,
};
use kahler_lab::geodesic::{hmae_residual, subgeodesic_make, weak_geodesic};
use kahler_lab::numerics::UniformGrid;
use kahler_lab::potential::{ricci_reference, Coordinate, GridMeasure, SymplecticPotential, TwistForm};
use kahler_lab::LabError;

const SEED: u64 = 0;
const CORPUS: usize = 21;
const N: usize = 1024;
const T_NODES: usize = 65;

const C1_REL: f64 = 1e-6;
const C1_TIME: Duration = Duration::from_secs(60);
const C2_TOL: f64 = 1e-8;
/// Offset from the ends for the one-sided continuity check.
const C2_DT: f64 = 1e-9;
const C3_SLACK: f64 = 1e-4;
const C3_CSC: f64 = 1e-6;
const C4_TOL: f64 = 1e-8;
const C4_LEVELS: [usize; 5] = [8, 16, 32, 64, 128];
const C5_LEVELS: [usize; 4] = [16, 32, 64, 128];
/// `TV(64)` of Fubini–Study at `N = 1024`, locked from the first run.
const C5_FS_TV64: f64 = 0.015625;
const C5_LOCK_TOL: f64 = 1e-8;
const C6_N: usize = 256;
const C6_T_NODES: usize = 17;
const C6_LEVELS: [usize; 2] = [16, 32];
const C6_TOL: f64 = 1e-6;
const C6_BULGE: f64 = 0.2;
const C6_MUTATION: f64 = 50.0;
const C7_K: usize = 16;
const C7_DECOMPOSITION: f64 = 1e-6;
const C7_PAIRING: f64 = 1e-8;
const C7_A: f64 = 5.0;
const C7_STABILITY: f64 = 1e-4;
const C8_RATIO: f64 = 3.5;
const C8_PAIRS: usize = 5;
const C8_LADDER: [(usize, usize); 3] = [(256, 17), (512, 33), (1024, 65)];
const C9_ORDER: f64 = 1.9;
const C9_PAIRING: f64 = 1e-5;
const C9_ELEMENTS: usize = 5;
const C10_TRIALS: usize = 100;
const C10_GAP: f64 = 1e-9;
const C10_OPTIMAL: f64 = 1e-6;
const C11_CONTRACTION: f64 = 1e-6;
const C11_IBP: f64 = 1e-5;
const C11_SPREAD: f64 = 1e-5;
const C11_NORM: f64 = 1e-6;
const C11_FUTAKI: f64 = 1e-5;
const C11_LINEARITY: f64 = 1e-5;
const C12_N: usize = 128;
const C12_RESIDUAL: f64 = 1e-8;
const C13_SLOPE: f64 = 1.9;
const C13_CONTROL: f64 = 0.15;
const C14_N: usize = 128;
const C14_TWIST: f64 = 0.2;
const C14_STARTS: usize = 3;
const C14_AGREEMENT: f64 = 1e-4;
const C14_RECOVERY: f64 = 1e-4;
const C14_TIME: Duration = Duration::from_secs(300);
const C15_N: usize = 128;
const C15_T_NODES: usize = 17;
const C15_TOL: f64 = 1e-6;

fn report(criterion: u8, title: &str, passed: bool, detail: String) {
    let line = format!(
        "{} criterion {criterion:>2} ({title}): {detail}\n",
        if passed { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(passed, "{}", line.trim_end());
}

fn corpus(n: usize) -> Vec<SymplecticPotential> {
    generate_corpus(SEED, CORPUS, n).unwrap()
}

fn fold_min(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::INFINITY, f64::min)
}

fn fold_max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn c01_k_energy_convexity() {
    let c = corpus(N);
    let pairs = corpus_pairs(&c);
    let (mut worst, mut slowest) = (f64::INFINITY, Duration::ZERO);
    for (a, b) in &pairs {
        let start = Instant::now();
        let r = convexity_scan(&weak_geodesic(a, b, T_NODES).unwrap()).unwrap();
        slowest = slowest.max(start.elapsed());
        worst = worst.min(r.min_second_diff / r.scale());
    }
    report(
        1,
        "K-energy convexity",
        pairs.len() >= 20 && worst >= -C1_REL && slowest < C1_TIME,
        format!(
            "{} pairs, min second difference / scale {worst:.3e} >= {:.0e}, slowest pair {:.2?}",
            pairs.len(),
            -C1_REL,
            slowest
        ),
    );
}

#[test]
fn c02_endpoint_continuity() {
    let c = corpus(N);
    let mut gap = 0.0f64;
    for (a, b) in corpus_pairs(&c) {
        let r = convexity_scan(&weak_geodesic(a, b, T_NODES).unwrap()).unwrap();
        let (m0, m1) = (mabuchi(a).unwrap(), mabuchi(b).unwrap());
        let at = |t: f64| {
            let g = a.g_values().iter().zip(b.g_values()).map(|(x, y)| (1.0 - t) * x + t * y).collect();
            mabuchi(&SymplecticPotential::with_window(g, a.window()).unwrap()).unwrap()
        };
        gap = gap
            .max((r.values[0] - m0).abs())
            .max((r.values[T_NODES - 1] - m1).abs())
            .max((at(C2_DT) - m0).abs())
            .max((at(1.0 - C2_DT) - m1).abs());
    }
    report(
        2,
        "endpoint continuity",
        gap <= C2_TOL,
        format!("max endpoint gap {gap:.3e} <= {C2_TOL:.0e}"),
    );
}

#[test]
fn c03_subslope_inequality() {
    let c = corpus(N);
    let slack = fold_min(corpus_pairs(&c).into_iter().map(|(a, b)| subslope_check(a, b).unwrap().slack));
    let m_fs = mabuchi(&c[0]).unwrap();
    let csc = fold_min(c.iter().map(|u| mabuchi(u).unwrap() - m_fs));
    report(
        3,
        "sub-slope inequality",
        slack >= -C3_SLACK && csc >= -C3_CSC,
        format!("min slack {slack:.3e} >= {:.0e}, min M(u1) - M(FS) {csc:.3e} >= {:.0e}", -C3_SLACK, -C3_CSC),
    );
}

#[test]
fn c04_bergman_mass() {
    let c = corpus(N);
    let mut err = 0.0f64;
    for u in [&c[0], &c[1], &c[CORPUS - 1]] {
        for k in C4_LEVELS {
            let m = bergman_measure(&assemble_potential(u, k).unwrap(), 0);
            err = err.max((m.mass - (k - 1) as f64 / k as f64).abs());
        }
    }
    report(
        4,
        "Bergman mass identity",
        err <= C4_TOL,
        format!("max |mass - (k-1)/k| {err:.3e} <= {C4_TOL:.0e} for k in {C4_LEVELS:?}"),
    );
}

#[test]
fn c05_tv_convergence() {
    let c = corpus(N);
    let mut rise = f64::NEG_INFINITY;
    let mut fs64 = f64::NAN;
    for (i, u) in c.iter().enumerate() {
        let tv = tv_convergence(u, &C5_LEVELS).unwrap();
        rise = rise.max(fold_max(tv.windows(2).map(|w| w[1] - w[0])));
        if i == 0 {
            fs64 = tv[2];
        }
    }
    let lock = (fs64 - C5_FS_TV64).abs();
    report(
        5,
        "TV convergence",
        rise < 0.0 && lock <= C5_LOCK_TOL,
        format!(
            "largest TV increment {rise:.3e} < 0 on {CORPUS} elements, FS TV(64) {fs64:.12} (locked {C5_FS_TV64}, gap {lock:.1e})"
        ),
    );
}

#[test]
fn c06_psh_variation() {
    let c = generate_corpus(SEED, 6, C6_N).unwrap();
    let (mut min_eig, mut mutated) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut count = 0;
    for (a, b) in corpus_pairs(&c) {
        let paths = [
            weak_geodesic(a, b, C6_T_NODES).unwrap(),
            subgeodesic_make(a, b, C6_BULGE, C6_T_NODES).unwrap(),
        ];
        for p in &paths {
            for k in C6_LEVELS {
                let sys = assemble(p, k).unwrap();
                min_eig = min_eig.min(psh_variation_check(&sys).unwrap());
                mutated = mutated.max(psh_variation_check(&sys.convexified(C6_MUTATION)).unwrap());
                count += 1;
            }
        }
    }
    report(
        6,
        "psh variation",
        min_eig >= -C6_TOL && mutated < -C6_TOL,
        format!("{count} scans, min eigenvalue {min_eig:.3e} >= {:.0e}, mutation max {mutated:.3e} (must fail)", -C6_TOL),
    );
}

#[test]
fn c07_decomposition_and_mixed_positivity() {
    let c = generate_corpus(SEED, 6, C6_N).unwrap();
    let (mut dec, mut pairing, mut stability) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for (a, b) in corpus_pairs(&c) {
        let p = weak_geodesic(a, b, C6_T_NODES).unwrap();
        let sys = assemble(&p, C7_K).unwrap();
        dec = dec.min(decomposition_inequality(&sys, &p).unwrap().min_eig);
        let finite = mixed_positivity(&sys, &p, Some(C7_A)).unwrap().min_pairing;
        let infinite = mixed_positivity(&sys, &p, None).unwrap().min_pairing;
        pairing = pairing.min(finite).min(infinite);
        stability = stability.max((finite - infinite).abs());
    }
    report(
        7,
        "decomposition and mixed positivity",
        dec >= -C7_DECOMPOSITION && pairing >= -C7_PAIRING && stability <= C7_STABILITY,
        format!(
            "min eigenvalue {dec:.3e} >= {:.0e}, min pairing {pairing:.3e} >= {:.0e}, A-stability {stability:.1e} <= {C7_STABILITY:.0e}",
            -C7_DECOMPOSITION, -C7_PAIRING
        ),
    );
}

#[test]
fn c08_hmae_refinement() {
    let corpora: Vec<_> = C8_LADDER.iter().map(|&(n, _)| corpus(n)).collect();
    let mut ratios = Vec::new();
    for i in 0..C8_PAIRS {
        let r: Vec<f64> = C8_LADDER
            .iter()
            .zip(&corpora)
            .map(|(&(_, t), c)| hmae_residual(&weak_geodesic(&c[i], &c[i + 1], t).unwrap()).unwrap())
            .collect();
        ratios.extend(r.windows(2).map(|w| w[0] / w[1]));
    }
    let worst = fold_min(ratios.iter().copied());
    report(
        8,
        "HMAE residual refinement",
        worst >= C8_RATIO,
        format!("{C8_PAIRS} pairs, min ratio per doubling {worst:.3} >= {C8_RATIO}"),
    );
}

#[test]
fn c09_gradient_checks() {
    let c = corpus(N);
    let ric = ricci_reference();
    let (mut order, mut gap, mut exact) = (f64::INFINITY, 0.0f64, 0);
    for u in c.iter().take(C9_ELEMENTS) {
        for f in [RadialFunctional::Energy, RadialFunctional::Twisted(&ric), RadialFunctional::Mabuchi] {
            let g = gradient_check(u, &f, &default_direction, &GRADIENT_STEPS).unwrap();
            match g.order {
                Some(o) => order = order.min(o),
                None => exact += 1,
            }
            gap = gap.max(g.pairing_gap());
        }
    }
    report(
        9,
        "gradient checks",
        order >= C9_ORDER && gap <= C9_PAIRING,
        format!("min observed order {order:.4} >= {C9_ORDER} ({exact} exact to rounding), max pairing gap {gap:.3e} <= {C9_PAIRING:.0e}"),
    );
}

#[test]
fn c10_entropy_duality() {
    let grid = UniformGrid::new(-30.0, 30.0, 3000);
    let c = corpus(N);
    let curvature = |u: &SymplecticPotential| {
        GridMeasure::new(Coordinate::SAxis, grid, grid.nodes().iter().map(|&s| u.radial_point(s).curvature).collect())
            .unwrap()
    };
    let mu0 = curvature(&c[0]);
    let measures: Vec<GridMeasure> = c[1..].iter().map(curvature).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut gap = f64::INFINITY;
    for trial in 0..C10_TRIALS {
        let f: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-4.0..=4.0)).collect();
        gap = gap.min(entropy_legendre_gap(&measures[trial % measures.len()], &mu0, &f).unwrap());
    }
    let optimal = fold_max(
        measures
            .iter()
            .map(|mu| entropy_legendre_gap(mu, &mu0, &log_density(mu, &mu0).unwrap()).unwrap()),
    );
    report(
        10,
        "entropy duality",
        gap >= -C10_GAP && optimal <= C10_OPTIMAL,
        format!("min gap over {C10_TRIALS} random f {gap:.3e} >= {:.0e}, gap at log density {optimal:.3e} <= {C10_OPTIMAL:.0e}", -C10_GAP),
    );
}

#[test]
fn c11_field_identities() {
    let c = corpus(N);
    let metrics = &c[..3];
    let v = GradientField::model();
    let contraction = fold_max(metrics.iter().map(|u| hamiltonian_residual(&v, u)));
    let grid = UniformGrid::new(-30.0, 30.0, 30000);
    let s = grid.nodes();
    let a: Vec<f64> = s.iter().map(|s| 0.3 / s.cosh()).collect();
    let b: Vec<f64> = s.iter().map(|s| (0.5 * s).tanh() + 0.2 / (1.0 + s * s)).collect();
    let ibp = fold_max(metrics.iter().map(|u| ibp_identity_check(&a, &b, u, &grid)));
    let norms: Vec<f64> = metrics.iter().map(|u| inner_product(&v, &v, u)).collect();
    let spread = fold_max(norms.iter().copied()) - fold_min(norms.iter().copied());
    let norm = (inner_product(&v, &v, &c[0]) - 1.0 / 12.0).abs();
    let fut: Vec<f64> = metrics.iter().map(|u| futaki(&v, u).unwrap()).collect();
    let fspread = fold_max(fut.iter().copied()) - fold_min(fut.iter().copied());
    let ev = energy_ev(&weak_geodesic(&c[1], &c[2], T_NODES).unwrap(), &v).unwrap();
    let linearity = ev.max_abs_second_diff() / ev.scale();
    report(
        11,
        "field identities",
        contraction < C11_CONTRACTION
            && ibp < C11_IBP
            && spread < C11_SPREAD
            && norm <= C11_NORM
            && fspread < C11_FUTAKI
            && linearity < C11_LINEARITY,
        format!(
            "contraction {contraction:.1e}, ibp {ibp:.1e}, pairing spread {spread:.1e}, |<V,V>_FS - 1/12| {norm:.1e}, Futaki spread {fspread:.1e}, E_V slack {linearity:.1e}"
        ),
    );
}

#[test]
fn c12_linearized_solvability() {
    let u0 = SymplecticPotential::fubini_study(C12_N);
    let data = linearized_data(&u0, &skew_twist()).unwrap();
    let x = data.base.nodes();
    let cosine: Vec<f64> = x.iter().map(|x| (2.0 * std::f64::consts::PI * x).cos()).collect();
    let residual = solve_linearized(&data.base, &data.nu)
        .unwrap()
        .residual
        .max(solve_linearized(&data.base, &cosine).unwrap().residual);
    let rejected = [x.iter().map(|x| x - 0.5).collect::<Vec<_>>(), vec![1.0; x.len()]]
        .iter()
        .filter(|nu| matches!(solve_linearized(&data.base, nu), Err(LabError::Incompatible { .. })))
        .count();
    report(
        12,
        "linearized solvability",
        residual < C12_RESIDUAL && rejected == 2,
        format!("compatible residual {residual:.3e} < {C12_RESIDUAL:.0e}, incompatible rejected {rejected}/2"),
    );
}

#[test]
fn c13_perturbation_order() {
    let r = perturbation_order_check(&SymplecticPotential::fubini_study(C12_N), &skew_twist(), &PERTURBATION_S).unwrap();
    report(
        13,
        "perturbation order",
        r.slope >= C13_SLOPE && (r.control_slope - 1.0).abs() <= C13_CONTROL,
        format!("slope {:.4} >= {C13_SLOPE}, control {:.4} within 1 +/- {C13_CONTROL}", r.slope, r.control_slope),
    );
}

#[test]
fn c14_twisted_uniqueness() {
    let c = generate_corpus(SEED, CORPUS, C14_N).unwrap();
    let starts = &c[1..=C14_STARTS];
    let time = Instant::now();
    let twisted = twisted_csc_solve(&TwistForm::multiple_of_reference(C14_TWIST, C14_N).unwrap(), starts).unwrap();
    let t_twisted = time.elapsed();
    let mut agreement = 0.0f64;
    for i in 0..twisted.len() {
        for j in 0..i {
            agreement = agreement.max(sup_distance_mod_constants(&twisted[i].potential, &twisted[j].potential).unwrap());
        }
    }
    let time = Instant::now();
    let plain = twisted_csc_solve(&TwistForm::zero(C14_N), starts).unwrap();
    let t_plain = time.elapsed();
    let recovery = fold_max(plain.iter().map(|o| sup_distance_mod_affine(&o.potential, &c[0]).unwrap()));
    report(
        14,
        "twisted uniqueness",
        agreement <= C14_AGREEMENT && recovery <= C14_RECOVERY && t_twisted.max(t_plain) < C14_TIME,
        format!(
            "{C14_STARTS} starts agree to {agreement:.2e}, alpha = 0 recovers FS to {recovery:.2e}, runs {t_twisted:.2?} and {t_plain:.2?}"
        ),
    );
}

#[test]
fn c15_strict_convexity() {
    let c = generate_corpus(SEED, CORPUS, C15_N).unwrap();
    let mu = TwistForm::multiple_of_reference(C14_TWIST, C15_N).unwrap();
    let mut worst = (f64::INFINITY, None);
    for (a, b) in corpus_pairs(&c) {
        let r = strict_convexity_imu(&weak_geodesic(a, b, C15_T_NODES).unwrap(), &mu).unwrap();
        if r.gap - r.bound < worst.0 {
            worst = (r.gap - r.bound, Some(r));
        }
    }
    let r = worst.1.unwrap();
    report(
        15,
        "strict convexity",
        worst.0 >= -C15_TOL,
        format!(
            "min f'(1) - f'(0) - bound {:.3e} >= {:.0e} (worst pair: A {:.3}, C {:.3}, delta {:.3e}, d {:.3e})",
            worst.0, -C15_TOL, r.a, r.c, r.delta, r.distance
        ),
    );
}
