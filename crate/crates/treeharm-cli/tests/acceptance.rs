//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measurements (visible under `--nocapture`). The
//! criteria pin exact tolerances; nothing here is calibrated after the
//! fact.
//!
//! Criterion 2 is split: the round-trip accuracy target passes, while the
//! demanded error reduction from doubling an already-huge spectral grid
//! is measured honestly and fails — both grid sizes sit at the f64
//! rounding floor, so there is no error left to reduce. The analysis is
//! printed by the test itself.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::time::Instant;
use treeharm::{
    ball, conjugate_exponent, delta_exponent, hf_transform, invert, lorentz_norm, lp_norm,
    parseval, poisson_kernel_power, poisson_transform_ball, recover_boundary_martingale,
    restriction_lhs, sector_average, weak_norm_growth, CylinderFunction, Error, PlancherelMeasure,
    SpectralParam, TreeFunction, TreeParams, Vertex,
};

fn params(q: u32) -> TreeParams {
    TreeParams::new(q).unwrap()
}

fn tau(p: TreeParams) -> f64 {
    SpectralParam::real(p, 0.0).tau()
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Gaussian tree function scaled to keep intermediate sums O(1), so that
/// absolute 1e-12 identity tolerances are meaningful.
fn random_tree_fn(p: TreeParams, radius: usize, seed: u64, scale: f64) -> TreeFunction {
    let mut rng = rng_for(seed, 1);
    TreeFunction::from_fn(p, radius, |_| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * scale
    })
    .unwrap()
}

fn random_cylinder(p: TreeParams, depth: usize, seed: u64, scale: f64) -> CylinderFunction {
    let mut rng = rng_for(seed, 2);
    let len = p.checked_sphere_len(depth).unwrap();
    let values = (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * scale)
        .collect();
    CylinderFunction::new(p, depth, values).unwrap()
}

/// Lexicographic sphere index computed directly from the label word —
/// an independent reimplementation of the enumeration used everywhere
/// else, kept here so the kernel two-route check does not lean on the
/// library's own index arithmetic.
fn word_index(word: &[u8], q: usize) -> usize {
    let mut index = 0usize;
    for (pos, &label) in word.iter().enumerate() {
        index = if pos == 0 {
            label as usize
        } else {
            index * q + label as usize
        };
    }
    index
}

/// The kernel power as a cylinder function built from the ring
/// decomposition along the root geodesic of `x`: the boundary splits into
/// `E(x_j) \ E(x_(j+1))`, and on the `j`-th ring the power is
/// `q^(w (2j - |x|))`. Written against raw words and index ranges.
fn kernel_by_rings(p: TreeParams, w: Complex64, x: &Vertex) -> CylinderFunction {
    let q = p.q() as usize;
    let n = x.len();
    let len = p.checked_sphere_len(n).unwrap();
    let ln_q = (p.q() as f64).ln();
    let power = |h: i64| -> Complex64 { (w * ln_q * h as f64).exp() };
    let mut values = vec![power(-(n as i64)); len];
    // overwrite ring by ring: cylinders under the level-j ancestor form a
    // contiguous index block of width q^(n-j)
    for j in 1..=n {
        let anc = word_index(&x.word()[..j], q);
        let width = q.pow((n - j) as u32);
        for slot in values.iter_mut().skip(anc * width).take(width) {
            *slot = power(2 * j as i64 - n as i64);
        }
    }
    CylinderFunction::new(p, n, values).unwrap()
}

#[test]
fn criterion_01_exact_identity_suite() {
    let start = Instant::now();
    let mut worst: Vec<(&str, f64)> = vec![
        ("duality", 0.0),
        ("sector-average identity", 0.0),
        ("difference orthogonality", 0.0),
        ("telescoping", 0.0),
        ("kernel two-route", 0.0),
        ("transform of 1", 0.0),
        ("eigen residual", 0.0),
    ];
    for q in [2u32, 3] {
        let p = params(q);
        let t8 = tau(p) / 8.0;
        let z = SpectralParam::new(p, Complex64::new(t8, -0.2));

        // duality: the transform slice paired against F equals the vertex
        // sum of f against the transform of F (bilinear, no conjugation)
        let f = random_tree_fn(p, 5, 100 + q as u64, 0.1);
        let big_f = random_cylinder(p, 5, 200 + q as u64, 0.1);
        let slice = hf_transform(&f, z).unwrap();
        let lhs = slice.pairing(&big_f).unwrap();
        let u = poisson_transform_ball(z, &big_f, 5).unwrap();
        let mut rhs = Complex64::ZERO;
        for (level, values) in f.levels().iter().enumerate() {
            for (i, v) in values.iter().enumerate() {
                rhs += v * u.level(level)[i];
            }
        }
        worst[0].1 = worst[0].1.max((lhs - rhs).norm());

        // resolution-n sector averages of a transform are transforms of
        // the conditional expectations, wherever both are defined
        let u6 = poisson_transform_ball(z, &big_f, 6).unwrap();
        for n in 0..=5usize {
            let averaged = sector_average(&u6, n);
            let truncated = poisson_transform_ball(z, &big_f.cond_expect(n).unwrap(), 6).unwrap();
            for m in n..=6 {
                for (a, b) in averaged.level(m).iter().zip(truncated.level(m)) {
                    worst[1].1 = worst[1].1.max((a - b).norm());
                }
            }
        }

        // martingale differences at distinct levels are orthogonal
        let big_g = random_cylinder(p, 5, 300 + q as u64, 0.1);
        for n in 0..=5usize {
            for m in 0..=5usize {
                if n == m {
                    continue;
                }
                let inner = big_f
                    .diff(n)
                    .unwrap()
                    .inner(&big_g.diff(m).unwrap())
                    .unwrap();
                worst[2].1 = worst[2].1.max(inner.norm());
            }
        }

        // conditional expectations telescope into difference sums
        for n in 0..=5usize {
            let expect = big_f.cond_expect(n).unwrap().refine(5).unwrap();
            let mut sum = vec![Complex64::ZERO; expect.values().len()];
            for j in 0..=n {
                for (slot, v) in sum
                    .iter_mut()
                    .zip(big_f.diff(j).unwrap().refine(5).unwrap().values())
                {
                    *slot += v;
                }
            }
            for (a, b) in expect.values().iter().zip(&sum) {
                worst[3].1 = worst[3].1.max((a - b).norm());
            }
        }

        // kernel powers: height route vs explicit ring decomposition, at
        // the plain kernel (power 1) and at a generic complex parameter
        for zz in [
            SpectralParam::new(p, Complex64::new(0.0, -0.5)),
            z,
            SpectralParam::new(p, Complex64::new(0.37, 0.11)),
        ] {
            let w = Complex64::new(0.5, 0.0) + Complex64::I * zz.z();
            for x in ball(p, 5).unwrap() {
                let height_route = poisson_kernel_power(zz, &x).unwrap();
                let ring_route = kernel_by_rings(p, w, &x);
                for (a, b) in height_route.values().iter().zip(ring_route.values()) {
                    worst[4].1 = worst[4].1.max((a - b).norm());
                }
            }
        }

        // the transform of the constant 1 is the spherical function
        let one = CylinderFunction::constant(p, Complex64::ONE);
        let phi = poisson_transform_ball(z, &one, 8).unwrap();
        for (n, level) in phi.levels().iter().enumerate() {
            for v in level {
                worst[5].1 = worst[5].1.max((v - z.spherical(n)).norm());
            }
        }

        // transforms satisfy the eigenvalue equation
        let u8 = poisson_transform_ball(z, &big_f, 8).unwrap();
        worst[6].1 = worst[6].1.max(u8.eigen_residual(z.eigenvalue()));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let summary: Vec<String> = worst
        .iter()
        .map(|(name, v)| format!("{name} {v:.2e}"))
        .collect();
    println!(
        "criterion 1: PASS — {} (q in {{2,3}}, {elapsed:.2}s)",
        summary.join(", ")
    );
    for (name, v) in &worst {
        assert!(*v < 1e-12, "{name} residual {v:.3e} breaches 1e-12");
    }
    assert!(
        elapsed < 10.0,
        "identity suite took {elapsed:.2}s, budget 10s"
    );
}

#[test]
fn criterion_02a_inversion_round_trip() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for q in [2u32, 3] {
        let p = params(q);
        let measure = PlancherelMeasure::calibrate(p).unwrap();
        let f = random_tree_fn(p, 4, 400 + q as u64, 1.0);
        let report = invert(&f, &measure, 2048).unwrap();
        worst = worst.max(report.max_abs_error);
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!("criterion 2a: PASS — round-trip error {worst:.2e} at 2048 nodes ({elapsed:.2}s)");
    assert!(worst < 1e-8, "round-trip error {worst:.3e} breaches 1e-8");
    assert!(elapsed < 5.0, "inversion took {elapsed:.2}s, budget 5s");
}

#[test]
fn criterion_02b_doubling_gain() {
    // demanded: doubling 2048 -> 4096 nodes reduces the round-trip error
    // by a factor of 10. Measured: both grids are already exact to the
    // f64 rounding floor (the periodic quadrature of these analytic
    // slices converges like q^(-m/2) and bottoms out near m = 100), so
    // the two errors are rounding noise of the same size and the factor
    // hovers near 1. Asserted as demanded; fails honestly.
    let mut factors = Vec::new();
    for q in [2u32, 3] {
        let p = params(q);
        let measure = PlancherelMeasure::calibrate(p).unwrap();
        let f = random_tree_fn(p, 4, 400 + q as u64, 1.0);
        let coarse = invert(&f, &measure, 2048).unwrap().max_abs_error;
        let fine = invert(&f, &measure, 4096).unwrap().max_abs_error;
        factors.push((q, coarse, fine, coarse / fine));
    }
    let verdict = if factors.iter().all(|(_, _, _, g)| *g >= 10.0) {
        "PASS"
    } else {
        "FAIL"
    };
    for (q, coarse, fine, gain) in &factors {
        println!(
            "criterion 2b: {verdict} — q={q}: {coarse:.2e} -> {fine:.2e}, improvement x{gain:.2} \
             (both at the rounding floor; demanded x10)"
        );
    }
    for (q, coarse, fine, gain) in &factors {
        assert!(
            *gain >= 10.0,
            "q={q}: doubling 2048->4096 improved the error x{gain:.2} \
             ({coarse:.2e} -> {fine:.2e}); both grids sit at the f64 rounding \
             floor, so a x10 reduction is not observable at this precision"
        );
    }
}

#[test]
fn criterion_03_parseval_and_weights() {
    let mut worst_residual = 0.0f64;
    let mut worst_weights = 0.0f64;
    for q in [2u32, 3] {
        let p = params(q);
        let measure = PlancherelMeasure::calibrate(p).unwrap();
        let weight_sum: f64 = measure.grid(2048).unwrap().weights().iter().sum();
        worst_weights = worst_weights.max((weight_sum - 1.0).abs());
        for k in 0..50u64 {
            let f1 = random_tree_fn(p, 4, 500 + 4 * k + q as u64, 1.0);
            let f2 = random_tree_fn(p, 4, 700 + 4 * k + q as u64, 1.0);
            let report = parseval(&f1, &f2, &measure, 2048).unwrap();
            let scale = (f1.norm_sq() * f2.norm_sq()).sqrt();
            worst_residual = worst_residual.max(report.residual / scale);
        }
    }
    println!(
        "criterion 3: PASS — worst relative pairing residual {worst_residual:.2e}, \
         weight-sum error {worst_weights:.2e} (50 pairs, q in {{2,3}})"
    );
    assert!(worst_residual < 1e-8);
    assert!(worst_weights <= 1e-10);
}

#[test]
fn criterion_04_endpoint_constant_one() {
    // at p = 1 the restriction constant is exactly 1, for every boundary
    // exponent; the transform is tested on the matching line
    let p = params(2);
    let t8 = tau(p) / 8.0;
    let mut worst = 0.0f64;
    for r in [1.0, 2.0, 4.0, f64::INFINITY] {
        let delta = delta_exponent(conjugate_exponent(r)).unwrap();
        let z = SpectralParam::new(p, Complex64::new(t8, delta));
        for k in 0..1000u64 {
            let f = random_tree_fn(p, 3, 900_000 + k, 1.0);
            let lhs = restriction_lhs(&f, z, r).unwrap();
            let l1: f64 = f.levels().iter().flatten().map(|v| v.norm()).sum();
            worst = worst.max(lhs / l1);
        }
    }
    println!("criterion 4: PASS — max ratio {worst:.15} over 1000 samples x 4 exponents");
    assert!(worst <= 1.0 + 1e-12, "endpoint ratio {worst} exceeds 1");
}

#[test]
fn criterion_05_coefficient_partial_sums() {
    let start = Instant::now();
    let p = params(2);
    let s = tau(p) / 8.0;
    let z = SpectralParam::real(p, s);
    let c = z.c_function().unwrap();
    let target = 2.0 * c.norm_sqr();
    let cutoff = 20000usize;
    let mut worst_gap = 0.0f64;
    let mut worst_cesaro = 0.0f64;
    for n in [0usize, 1, 5] {
        let direct = treeharm::b_prime_sumsq(n, cutoff, &z).unwrap();
        let closed = treeharm::b_prime_sumsq_closed(n, cutoff, &z).unwrap();
        worst_gap = worst_gap.max((direct - closed).abs() / direct.abs());
        let cesaro = direct / cutoff as f64;
        worst_cesaro = worst_cesaro.max((cesaro / target - 1.0).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "criterion 5: PASS — Cesàro deviation {worst_cesaro:.2e} (limit {target:.6}), \
         closed-vs-direct gap {worst_gap:.2e} ({elapsed:.2}s)"
    );
    assert!(worst_cesaro < 0.02);
    assert!(worst_gap < 1e-9);
    assert!(elapsed < 5.0, "partial sums took {elapsed:.2}s, budget 5s");
}

#[test]
fn criterion_06_martingale_recovery() {
    let mut worst = 0.0f64;
    for q in [2u32, 3] {
        let p = params(q);
        let z = SpectralParam::real(p, tau(p) / 8.0);
        let f = random_cylinder(p, 4, 600 + q as u64, 1.0);
        // one sphere beyond the recovery depth: the level-4 one-sphere
        // system is singular at this parameter and recovery goes through
        // the stacked solve
        let u = poisson_transform_ball(z, &f, 5).unwrap();
        let recovered = recover_boundary_martingale(z, &u, 4).unwrap();
        for n in 0..=4usize {
            let expected = f.cond_expect(n).unwrap();
            for (a, b) in recovered.level(n).values().iter().zip(expected.values()) {
                worst = worst.max((a - b).norm());
            }
        }
    }
    // at z = i/2 the kernel power is identically 1 and level 1 cannot be
    // determined from any number of spheres
    let p = params(2);
    let z = SpectralParam::new(p, Complex64::new(0.0, 0.5));
    let constant = TreeFunction::from_fn(p, 3, |_| Complex64::ONE).unwrap();
    let singular_level = match recover_boundary_martingale(z, &constant, 2) {
        Err(Error::SingularSystem { level }) => level,
        other => panic!("expected a singular system, got {other:?}"),
    };
    println!(
        "criterion 6: PASS — recovery error {worst:.2e} through depth 4 (q in {{2,3}}), \
         degenerate parameter reported singular at level {singular_level}"
    );
    assert!(worst < 1e-9);
    assert!(singular_level >= 1);
}

#[test]
fn criterion_07_spherical_trichotomy() {
    let p = params(2);
    let t8 = tau(p) / 8.0;

    // interior of the strip for p' = 4: strong ball norms settle
    let z_interior = SpectralParam::new(p, Complex64::new(t8, -1.0 / 8.0));
    let phi_interior = TreeFunction::from_fn(p, 14, |x| z_interior.spherical(x.len())).unwrap();
    let rows = weak_norm_growth(&phi_interior, 4.0, &[12, 14]).unwrap();
    let interior_increment = rows[1].lp / rows[0].lp - 1.0;

    // degenerate real parameter: the weak statistic keeps growing
    let z_zero = SpectralParam::real(p, 0.0);
    let phi_zero = TreeFunction::from_fn(p, 14, |x| z_zero.spherical(x.len())).unwrap();
    let rows = weak_norm_growth(&phi_zero, 2.0, &[8, 14]).unwrap();
    let degenerate_growth = rows[1].weak / rows[0].weak - 1.0;

    // generic real parameter: the weak statistic is stable
    let z_generic = SpectralParam::real(p, t8);
    let phi_generic = TreeFunction::from_fn(p, 14, |x| z_generic.spherical(x.len())).unwrap();
    let rows = weak_norm_growth(&phi_generic, 2.0, &[10, 14]).unwrap();
    let generic_drift = (rows[1].weak / rows[0].weak - 1.0).abs();

    println!(
        "criterion 7: PASS — interior increment {:.3}%, degenerate growth {:.1}%, \
         generic drift {:.2}%",
        interior_increment * 100.0,
        degenerate_growth * 100.0,
        generic_drift * 100.0
    );
    assert!((0.0..0.01).contains(&interior_increment));
    assert!(degenerate_growth >= 0.20);
    assert!(generic_drift < 0.10);
}

#[test]
fn criterion_08_weak_norm_stability() {
    let p = params(2);
    let t8 = tau(p) / 8.0;
    let delta4 = delta_exponent(4.0).unwrap();
    let cases = [
        (Complex64::new(t8, delta4), 4.0),
        (Complex64::new(t8, 0.0), 2.0),
    ];
    let mut worst: f64 = 0.0;
    for (zc, exponent) in cases {
        let z = SpectralParam::new(p, zc);
        for seed in 0..5u64 {
            let f = random_cylinder(p, 4, 800 + seed, 1.0);
            let u = poisson_transform_ball(z, &f, 14).unwrap();
            let rows = weak_norm_growth(&u, exponent, &[12, 14]).unwrap();
            let increment = rows[1].weak / rows[0].weak - 1.0;
            assert!(
                (0.0..0.05).contains(&increment),
                "weak increment {increment:.4} out of [0, 5%) at z={zc}, p'={exponent}"
            );
            worst = worst.max(increment);
        }
    }
    println!(
        "criterion 8: PASS — worst ball weak-norm increment {:.2}% (5 seeds x 2 lines)",
        worst * 100.0
    );
}

#[test]
fn criterion_09_lorentz_functionals() {
    let mut rng = rng_for(9000, 1);
    // diagonal: the (p, p) functional is the plain l^p norm
    let mut worst_diag = 0.0f64;
    for _ in 0..40 {
        let len = rng.gen_range(1..400);
        let values: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let a = lorentz_norm(p, p, &values).unwrap();
            let b = lp_norm(p, &values).unwrap();
            worst_diag = worst_diag.max((a - b).abs() / b);
        }
    }
    // (2,1) functional of a k-point indicator is sqrt(k)
    let mut worst_indicator = 0.0f64;
    for k in [1usize, 2, 3, 10, 64, 1000] {
        let values = vec![Complex64::ONE; k];
        let got = lorentz_norm(2.0, 1.0, &values).unwrap();
        worst_indicator = worst_indicator.max((got - (k as f64).sqrt()).abs());
    }
    // second-index nesting on random data
    let mut nesting_ok = true;
    for _ in 0..100 {
        let len = rng.gen_range(1..300);
        let values: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for p in [1.5, 2.0, 4.0] {
            let weak = lorentz_norm(p, f64::INFINITY, &values).unwrap();
            let mid = lorentz_norm(p, 2.0, &values).unwrap();
            let strong = lorentz_norm(p, 1.0, &values).unwrap();
            nesting_ok &= weak <= mid * (1.0 + 1e-12) && mid <= strong * (1.0 + 1e-12);
        }
    }
    println!(
        "criterion 9: PASS — diagonal gap {worst_diag:.2e}, indicator gap {worst_indicator:.2e}, \
         nesting holds on 100 samples"
    );
    assert!(worst_diag < 1e-12);
    assert!(worst_indicator < 1e-12);
    assert!(nesting_ok);
}

#[test]
fn criterion_10_byte_determinism() {
    let binary = env!("CARGO_BIN_EXE_treeharm");
    let dir = std::env::temp_dir();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let path = dir.join(format!("acceptance_determinism_{threads}.csv"));
        let status = std::process::Command::new(binary)
            .args([
                "restriction",
                "--q",
                "2",
                "--p",
                "1.5",
                "--r",
                "2",
                "--samples",
                "48",
                "--support-radius",
                "4",
                "--seed",
                "7",
                "--out",
            ])
            .arg(&path)
            .env("RAYON_NUM_THREADS", threads)
            .stdout(std::process::Stdio::null())
            .status()
            .expect("spawn the experiment binary");
        assert!(status.success(), "run with {threads} thread(s) failed");
        outputs.push(std::fs::read(&path).unwrap());
        let _ = std::fs::remove_file(&path);
    }
    assert_eq!(
        outputs[0], outputs[1],
        "CSV bytes differ between thread counts"
    );
    println!(
        "criterion 10: PASS — {} identical bytes from 1-thread and 4-thread runs",
        outputs[0].len()
    );
}
