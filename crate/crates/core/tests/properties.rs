use lagflow_core::angle::{
    angle_complex_form, induced_metric, lagrangian_angle, log_det_metric, s_eigenvalues, star_omega,
};
use lagflow_core::grid::make_grid;
use lagflow_core::unitary::{
    adapted_frame, apply_j, complex_structure, corollary_b_condition, make_unitary, s_form,
    s_u_diagonal, UnitaryBlock,
};
use lagflow_core::{sym_eigen, Mat, SymMat};
use proptest::prelude::*;

fn sym_strategy(range: f64) -> impl Strategy<Value = SymMat> {
    (1usize..=4, prop::collection::vec(-range..range, 10)).prop_map(|(n, vals)| {
        let mut k = 0;
        let mut m = SymMat::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, vals[k]);
                k += 1;
            }
        }
        m
    })
}

fn pair_strategy() -> impl Strategy<Value = (SymMat, SymMat)> {
    (1usize..=4, prop::collection::vec(-2.0..2.0, 32)).prop_map(|(n, vals)| {
        let a = SymMat::from_fn(n, |i, j| vals[i * 4 + j]);
        let b = SymMat::from_fn(n, |i, j| vals[16 + i * 4 + j]);
        (a, b)
    })
}

fn conj(q: &Mat, a: &SymMat) -> SymMat {
    q.mul(&a.as_mat()).mul(&q.transpose()).symmetric_part()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eigen_reconstructs(a in sym_strategy(5.0)) {
        let e = sym_eigen(&a);
        prop_assert!(e.reconstruct().sub(&a).max_abs() <= 1e-12 * (1.0 + a.max_abs()));
        let f = e.frame;
        let ortho = f.transpose().mul(&f).sub(&Mat::identity(a.dim())).max_abs();
        prop_assert!(ortho <= 1e-13);
        prop_assert!(e.lambdas().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((e.lambdas().iter().sum::<f64>() - a.trace()).abs() <= 1e-12 * (1.0 + a.max_abs()));
    }

    #[test]
    fn angle_is_orthogonally_invariant_and_odd((a, b) in pair_strategy()) {
        let q = sym_eigen(&b).frame;
        let rotated = conj(&q, &a);
        prop_assert!((lagrangian_angle(&rotated) - lagrangian_angle(&a)).abs() <= 1e-12);
        prop_assert!((lagrangian_angle(&a.scale(-1.0)) + lagrangian_angle(&a)).abs() <= 1e-14);
        prop_assert!((angle_complex_form(&a) - lagrangian_angle(&a)).abs() <= 1e-12);
    }

    #[test]
    fn metric_quantities(a in sym_strategy(3.0)) {
        let n = a.dim();
        let (g, g_inv) = induced_metric(&a);
        let id = g.as_mat().mul(&g_inv.as_mat()).sub(&Mat::identity(n)).max_abs();
        prop_assert!(id <= 1e-12);

        let lam = sym_eigen(&a).lambdas().to_vec();
        let det = g.as_mat().det();
        prop_assert!((det.ln() - log_det_metric(&lam)).abs() <= 1e-11);

        let w = star_omega(&a);
        prop_assert!(w > 0.0 && w <= 1.0);
        prop_assert!((w - det.sqrt().recip()).abs() <= 1e-12);
    }

    #[test]
    fn s_eigenvalues_solve_the_pencil(a in sym_strategy(3.0)) {
        // S-eigenvalues are the roots of det(A - s g) with g = I + A^2
        let (g, _) = induced_metric(&a);
        let scale = g.max_abs().powi(a.dim() as i32);
        for s in s_eigenvalues(&a) {
            prop_assert!((-0.5..=0.5).contains(&s));
            let d = a.sub(&g.scale(s)).as_mat().det();
            prop_assert!(d.abs() <= 1e-10 * scale, "s = {s}, det = {d}");
        }
    }

    #[test]
    fn random_unitary_s_u_matches_ambient(
        (n, vals) in (1usize..=4, prop::collection::vec(-2.0..2.0, 40)),
    ) {
        let o1 = sym_eigen(&SymMat::from_fn(n, |i, j| vals[i * 4 + j])).frame;
        let o2 = sym_eigen(&SymMat::from_fn(n, |i, j| vals[16 + i * 4 + j])).frame;
        let theta = &vals[32..32 + n];
        let lam: Vec<f64> = vals[36..36 + n].iter().map(|v| 1.5 * v).collect();
        let cos = Mat::from_fn(n, |i, j| if i == j { theta[i].cos() } else { 0.0 });
        let sin = Mat::from_fn(n, |i, j| if i == j { theta[i].sin() } else { 0.0 });
        let p = o1.mul(&cos).mul(&o2.transpose());
        let q = o1.mul(&sin).mul(&o2.transpose());
        let u = make_unitary(p, q).unwrap();
        let (orth, sym) = u.residuals();
        prop_assert!(orth <= 1e-12 && sym <= 1e-12);
        let b = u.block();
        let j = complex_structure(n);
        let m = 2 * n;
        for r in 0..m {
            for c in 0..m {
                let btb: f64 = (0..m).map(|k| b[k][r] * b[k][c]).sum();
                let delta = if r == c { 1.0 } else { 0.0 };
                prop_assert!((btb - delta).abs() <= 1e-12);
                let jb: f64 = (0..m).map(|k| j[r][k] * b[k][c]).sum();
                let bj: f64 = (0..m).map(|k| b[r][k] * j[k][c]).sum();
                prop_assert!((jb - bj).abs() <= 1e-12);
            }
        }

        let e = adapted_frame(&lam);
        let je: Vec<Vec<f64>> = e.iter().map(|v| apply_j(v)).collect();
        let got = s_u_diagonal(&u, &lam).unwrap();
        for (i, want) in got.iter().enumerate() {
            let mut w = vec![0.0; 2 * n];
            for k in 0..n {
                for c in 0..2 * n {
                    w[c] += u.p().get(k, i) * e[k][c] + u.q().get(k, i) * je[k][c];
                }
            }
            prop_assert!((s_form(&w, &w) - want).abs() <= 1e-12);
        }
        for l in 0..n {
            for m in 0..n {
                prop_assert!((s_form(&je[l], &je[m]) + s_form(&e[l], &e[m])).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn grid_derivatives(
        (n, coeffs) in (1usize..=3, prop::collection::vec(-1.0..1.0, 8)),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let g = make_grid(n, 16).unwrap();
        let f = g.sample(|x| {
            coeffs[0] * x[0].sin() + coeffs[1] * (2.0 * x[0]).cos()
                + coeffs[2] * (x[0] + 3.0 * x[n - 1]).sin() + coeffs[3]
        });
        let h = g.sample(|x| coeffs[4] * (x[n - 1] - x[0]).cos() + coeffs[5] * (4.0 * x[0]).sin());
        let mut d1 = vec![0; n];
        d1[0] = 1;
        let lin = g.diff(&f.axpby(a, &h, b).unwrap(), &d1).unwrap();
        let sep = g.diff(&f, &d1).unwrap().axpby(a, &g.diff(&h, &d1).unwrap(), b).unwrap();
        for (x, y) in lin.values().iter().zip(sep.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert!(g.diff(&f, &d1).unwrap().mean().abs() <= 1e-13);

        // exact derivative of the first factor
        let want = g.sample(|x| {
            coeffs[0] * x[0].cos() - 2.0 * coeffs[1] * (2.0 * x[0]).sin()
                + coeffs[2] * (x[0] + 3.0 * x[n - 1]).cos() * if n == 1 { 4.0 } else { 1.0 }
        });
        for (x, y) in g.diff(&f, &d1).unwrap().values().iter().zip(want.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }

        if n >= 2 {
            let (mut o01, mut o10) = (vec![0; n], vec![0; n]);
            o01[0] = 1;
            o01[1] = 1;
            o10[1] = 1;
            let via = g.diff(&g.diff(&f, &o10).unwrap(), &d1).unwrap();
            let direct = g.diff(&f, &o01).unwrap();
            for (x, y) in via.values().iter().zip(direct.values()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn unit_ball_matches_quarter_turn_positivity() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let qt = [1, 2, 3, 4].map(UnitaryBlock::quarter_turn);
    for i in 0..10_000 {
        let n = 1 + i % 4;
        let lam: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let by_eig = corollary_b_condition(&SymMat::from_diag(&lam))
            .unwrap()
            .holds;
        let min = s_u_diagonal(&qt[n - 1], &lam)
            .unwrap()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(by_eig, min > 0.0, "{lam:?}");
    }
}
