use approx::assert_abs_diff_eq;
use cell_solver::*;
use nalgebra::DVector;
use periodic_core::linalg::{hermitian_eigenvalues, loewner_le, min_eigenvalue, spectral_norm};
use periodic_core::{cell_mean, harmonic_mean, make_cubic_lattice, sample_field, CMat, FieldSpec, PeriodicField, SymbolB, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn scalar(v: C64) -> CMat {
    CMat::from_element(1, 1, v)
}

fn coefficients(d: usize, n: usize, g: FieldSpec, a: Vec<FieldSpec>, q: FieldSpec, q0: FieldSpec) -> Coefficients {
    let l = make_cubic_lattice(d).unwrap();
    let b = SymbolB::gradient(d, 1);
    Coefficients::new(
        l.clone(),
        b,
        sample_field(&g, &l, n, true).unwrap(),
        a.iter().map(|s| sample_field(s, &l, n, false).unwrap()).collect(),
        sample_field(&q, &l, n, false).unwrap(),
        sample_field(&q0, &l, n, true).unwrap(),
    )
    .unwrap()
}

#[test]
fn sine_coefficient_has_effective_value_sqrt3() {
    let co = coefficients(
        1,
        1024,
        FieldSpec::expr(1, "2 + sin(2*pi*x1)"),
        vec![FieldSpec::zero(1, 1)],
        FieldSpec::zero(1, 1),
        FieldSpec::scalar_constant(1, 1.0),
    );
    let cell = solve_cell(&co).unwrap();
    assert_abs_diff_eq!(cell.g0[(0, 0)].re, 3f64.sqrt(), epsilon = 1e-10);
    // m = n: g̃ is the constant g⁰
    for v in &cell.g_tilde.values {
        assert_abs_diff_eq!(v.re, 3f64.sqrt(), epsilon = 1e-8);
    }
    assert!(cell.residuals[0] <= 1e-10);
    assert_abs_diff_eq!(cell_mean(&cell.g_tilde)[(0, 0)].re, cell.g0[(0, 0)].re, epsilon = 1e-14);
}

#[test]
fn laminate_effective_matrix() {
    let g = FieldSpec::piecewise(0, &[0.0, 0.5], &[CMat::identity(2, 2) * c(1.0, 0.0), CMat::identity(2, 2) * c(3.0, 0.0)]);
    let l = make_cubic_lattice(2).unwrap();
    let gf = sample_field(&g, &l, 64, true).unwrap();
    let b = SymbolB::gradient(2, 1);
    let z = sample_field(&FieldSpec::zero(1, 1), &l, 64, false).unwrap();
    let one = sample_field(&FieldSpec::scalar_constant(1, 1.0), &l, 64, true).unwrap();
    // g is 2×2 here because b(D) = ∇ maps scalars to ℂ²; the laminate is γ(x₁)·1₂
    let co = Coefficients::new(l, b, gf, vec![z.clone(), z.clone()], z, one).unwrap();
    let cell = solve_cell(&co).unwrap();
    let expect = CMat::from_diagonal(&DVector::from_vec(vec![c(1.5, 0.0), c(2.0, 0.0)]));
    assert!((&cell.g0 - expect).norm() < 1e-8, "g0 = {}", cell.g0);
    assert!(cell.drift.unwrap() <= 1e-4);
}

#[test]
fn divergence_free_columns_give_arithmetic_mean() {
    // first row of g is constant, so b(D)* annihilates each column
    let g = FieldSpec::expr_entries(&[vec!["2", "0.5"], vec!["0.5", "3 + 2*cos(2*pi*x1)"]]);
    let l = make_cubic_lattice(2).unwrap();
    let gf = sample_field(&g, &l, 32, true).unwrap();
    let gbar = cell_mean(&gf);
    let lam = solve_lambda(&gf, &SymbolB::gradient(2, 1)).unwrap();
    let g0 = effective_matrix(&assemble_g_tilde(&gf, &lam.b_field), &gf).unwrap();
    assert!((g0 - gbar).norm() < 1e-8);
}

#[test]
fn lambda_tilde_against_dense_difference_oracle() {
    let n = 1024;
    let l = make_cubic_lattice(1).unwrap();
    let g = sample_field(&FieldSpec::scalar_constant(1, 1.0), &l, n, true).unwrap();
    let a = sample_field(&FieldSpec::expr(1, "i*sin(2*pi*x1)"), &l, n, false).unwrap();
    let sol = solve_lambda_tilde(&g, &SymbolB::gradient(1, 1), std::slice::from_ref(&a)).unwrap();

    // independent oracle: periodic second differences for −Λ̃'' = −i (a₁*)',
    // with (a₁*)' by centred differences and the mean pinned through a bordered system
    let h = 1.0 / n as f64;
    let astar: Vec<C64> = a.values.iter().map(|z| z.conj()).collect();
    let mut mat = CMat::zeros(n + 1, n + 1);
    let mut rhs = DVector::from_element(n + 1, c(0.0, 0.0));
    for k in 0..n {
        let (km, kp) = ((k + n - 1) % n, (k + 1) % n);
        mat[(k, k)] += c(2.0 / (h * h), 0.0);
        mat[(k, km)] -= c(1.0 / (h * h), 0.0);
        mat[(k, kp)] -= c(1.0 / (h * h), 0.0);
        mat[(k, n)] = c(1.0, 0.0);
        mat[(n, k)] = c(1.0, 0.0);
        // D² Λ̃ = −Λ̃'' and D a* = −i (a*)'
        rhs[k] = c(0.0, 1.0) * (astar[kp] - astar[km]) / (2.0 * h);
    }
    let oracle = mat.lu().solve(&rhs).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        worst = worst.max((sol.field.values[k] - oracle[k]).norm());
    }
    assert!(worst < 1e-5, "max deviation {worst}");
    // the difference oracle converges to cos(2πx)/(2π)
    for k in 0..n {
        let x = (k as f64 + 0.5) * h;
        assert_abs_diff_eq!(sol.field.values[k].re, (2.0 * PI * x).cos() / (2.0 * PI), epsilon = 1e-12);
    }
    // W by direct quadrature of g |Λ̃'|² = sin²
    let w = compute_w(&sol.b_field, &g);
    let quad: f64 = (0..n).map(|k| (2.0 * PI * (k as f64 + 0.5) * h).sin().powi(2)).sum::<f64>() * h;
    assert_abs_diff_eq!(w[(0, 0)].re, quad, epsilon = 1e-9);
}

#[test]
fn zero_and_constant_a_give_zero_lambda_tilde() {
    let l = make_cubic_lattice(2).unwrap();
    let g = sample_field(&FieldSpec::expr_entries(&[vec!["2 + cos(2*pi*x2)", "0"], vec!["0", "2"]]), &l, 16, true).unwrap();
    let b = SymbolB::gradient(2, 1);
    for a in [FieldSpec::zero(1, 1), FieldSpec::constant(&scalar(c(0.4, -1.0)))] {
        let af = sample_field(&a, &l, 16, false).unwrap();
        let s = solve_lambda_tilde(&g, &b, &[af.clone(), af]).unwrap();
        assert!(s.field.values.iter().all(|z| z.norm() < 1e-13));
        let lam = solve_lambda(&g, &b).unwrap();
        assert!(compute_v(&lam.b_field, &s.b_field, &g).norm() < 1e-13);
    }
}

#[test]
fn shift_for_negative_potential_is_coercive() {
    let co = coefficients(
        1,
        64,
        FieldSpec::scalar_constant(1, 1.0),
        vec![FieldSpec::zero(1, 1)],
        FieldSpec::scalar_constant(1, -5.0),
        FieldSpec::scalar_constant(1, 1.0),
    );
    let (_, op) = homogenize(&co).unwrap();
    assert!(op.lambda_shift >= 5.0);
    // oracle: the constant mode carries −5 + λ, every other mode |2πk|²(1 − c_*) − 5 + λ
    let mut small = CMat::zeros(9, 9);
    for k in -4i64..=4 {
        let xi = 2.0 * PI * k as f64;
        let i = (k + 4) as usize;
        small[(i, i)] = c(xi * xi - op.c_star * xi * xi - 5.0 + op.lambda_shift, 0.0);
    }
    assert!(hermitian_eigenvalues(&small)[0] >= 0.0);
}

#[test]
fn effective_symbol_without_lower_order_terms() {
    let co = coefficients(
        2,
        16,
        FieldSpec::expr_entries(&[vec!["2 + cos(2*pi*x1)", "0"], vec!["0", "2 + cos(2*pi*x1)"]]),
        vec![FieldSpec::zero(1, 1), FieldSpec::zero(1, 1)],
        FieldSpec::zero(1, 1),
        FieldSpec::scalar_constant(1, 2.0),
    );
    let (cell, op) = homogenize(&co).unwrap();
    assert_eq!(op.lambda_shift, 0.0);
    for xi in [[1.0, 0.0], [0.3, -2.0], [7.0, 7.0]] {
        let bx = co.b.at(&xi);
        let expect = bx.adjoint() * &cell.g0 * &bx;
        assert!((op.symbol(&xi) - expect).norm() < 1e-12);
    }
}

#[test]
fn cell_solution_round_trips_through_json() {
    let co = coefficients(
        1,
        32,
        FieldSpec::expr(1, "2 + sin(2*pi*x1)"),
        vec![FieldSpec::expr(1, "0.3*cos(2*pi*x1)")],
        FieldSpec::zero(1, 1),
        FieldSpec::scalar_constant(1, 1.0),
    );
    let cell = solve_cell(&co).unwrap();
    let text = serde_json::to_string(&cell).unwrap();
    let back: CellSolution = serde_json::from_str(&text).unwrap();
    assert_eq!(back.g0, cell.g0);
    assert_eq!(back.lambda, cell.lambda);
}

fn random_scalar_spec(coefs: &[(i64, i64, f64, f64)]) -> FieldSpec {
    // 3 + Σ small real cosines/sines keeps g ⩾ 3 − Σ|c| > 0
    let mut modes = vec![(vec![0, 0], scalar(c(3.0, 0.0)))];
    for &(k1, k2, re, im) in coefs {
        if k1 == 0 && k2 == 0 {
            continue;
        }
        modes.push((vec![k1, k2], scalar(c(re, im))));
        modes.push((vec![-k1, -k2], scalar(c(re, -im))));
    }
    FieldSpec::fourier([1, 1], &modes)
}

fn mode_strategy() -> impl Strategy<Value = Vec<(i64, i64, f64, f64)>> {
    prop::collection::vec((-3i64..=3, -3i64..=3, -0.25f64..0.25, -0.25f64..0.25), 1..5)
}

fn bounds_hold(g: &PeriodicField, b: &SymbolB, lam: &CellFieldSolution) {
    let m = b.m() as f64;
    let gs = g.sup_norm();
    let gi = g.inverse_sup_norm().unwrap();
    assert!(lam.b_field.l2_norm() <= m.sqrt() * (gs * gi).sqrt() * (1.0 + 1e-10));
    let m1 = m.sqrt() / (2.0 * PI) / b.alpha0.sqrt() * (gs * gi).sqrt();
    assert!(lam.field.l2_norm() <= m1 * (1.0 + 1e-10));
    assert!(cell_mean(&lam.field).norm() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn voigt_reuss_bracket(modes in mode_strategy(), aniso in 0.5f64..2.0) {
        let l = make_cubic_lattice(2).unwrap();
        let s = random_scalar_spec(&modes);
        let gamma = sample_field(&s, &l, 16, true).unwrap();
        let g = gamma.map(2, 2, |v| CMat::from_diagonal(&DVector::from_vec(vec![v[(0, 0)], v[(0, 0)] * aniso])));
        let b = SymbolB::gradient(2, 1);
        let lam = solve_lambda(&g, &b).unwrap();
        let g0 = effective_matrix(&assemble_g_tilde(&g, &lam.b_field), &g).unwrap();
        prop_assert!(loewner_le(&harmonic_mean(&g).unwrap(), &g0, 1e-8));
        prop_assert!(loewner_le(&g0, &cell_mean(&g), 1e-8));
        bounds_hold(&g, &b, &lam);
    }

    #[test]
    fn equal_dimensions_give_harmonic_mean(coefs in prop::collection::vec((1i64..6, -0.15f64..0.15, -0.15f64..0.15), 1..4)) {
        let l = make_cubic_lattice(1).unwrap();
        let mut modes = vec![(vec![0], scalar(c(2.0, 0.0)))];
        for (k, re, im) in coefs {
            modes.push((vec![k], scalar(c(re, im))));
            modes.push((vec![-k], scalar(c(re, -im))));
        }
        let g = sample_field(&FieldSpec::fourier([1, 1], &modes), &l, 256, true).unwrap();
        let lam = solve_lambda(&g, &SymbolB::gradient(1, 1)).unwrap();
        let g0 = effective_matrix(&assemble_g_tilde(&g, &lam.b_field), &g).unwrap();
        prop_assert!((g0 - harmonic_mean(&g).unwrap()).norm() <= 1e-8);
    }

    #[test]
    fn lambda_tilde_is_real_linear_and_w_nonnegative(
        modes in mode_strategy(),
        are in -1.0f64..1.0, aim in -1.0f64..1.0,
        sre in -2.0f64..2.0, sim in -2.0f64..2.0,
    ) {
        let l = make_cubic_lattice(2).unwrap();
        let g = sample_field(&random_scalar_spec(&modes), &l, 16, true).unwrap();
        let g = g.map(2, 2, |v| CMat::identity(2, 2) * v[(0, 0)]);
        let b = SymbolB::gradient(2, 1);
        let a1 = sample_field(&FieldSpec::expr(1, &format!("({are} + {aim}*i)*cos(2*pi*x2)")), &l, 16, false).unwrap();
        let a2 = sample_field(&FieldSpec::expr(1, &format!("({aim} - {are}*i)*sin(2*pi*(x1 + x2))")), &l, 16, false).unwrap();
        let base = solve_lambda_tilde(&g, &b, &[a1.clone(), a2.clone()]).unwrap();
        // the right-hand side involves a_j*, so complex scalars come out conjugated
        for s in [c(sre, 0.0), c(sre, sim)] {
            let scaled = solve_lambda_tilde(&g, &b, &[a1.map(1, 1, |v| v * s), a2.map(1, 1, |v| v * s)]).unwrap();
            for (x, y) in base.field.values.iter().zip(&scaled.field.values) {
                prop_assert!((x * s.conj() - y).norm() <= 1e-10 * (1.0 + y.norm()));
            }
        }
        let w = compute_w(&base.b_field, &g);
        prop_assert!(min_eigenvalue(&w) >= -1e-12);
        prop_assert!(cell_mean(&base.field).norm() < 1e-12);
        let lam = solve_lambda(&g, &b).unwrap();
        let v = compute_v(&lam.b_field, &base.b_field, &g);
        prop_assert!(spectral_norm(&v) <= g.sup_norm() * lam.b_field.l2_norm() * base.b_field.l2_norm() * (1.0 + 1e-10));
    }
}
