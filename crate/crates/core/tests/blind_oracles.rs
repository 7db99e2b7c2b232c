use mimome_core::blind::{gradients, hessians, mse_matrix_mc, objective, BlindConfig};
use mimome_core::linalg::{
    c, commutation, hermitian_eigenvalues, max_abs, unvec, vec_of, CMat, CVec,
};
use mimome_core::rng::{cn_matrix, substream};

const STEP: f64 = 1e-5;

fn random_point(seed: u64, n_a: usize, k2: usize, n_e: usize) -> (CMat, CMat) {
    let mut rng = substream(seed, 7);
    let s = cn_matrix(&mut rng, n_a, k2);
    let y = cn_matrix(&mut rng, n_e, k2);
    (s, y.adjoint() * y)
}

fn perturb(s: &CMat, k: usize, delta: mimome_core::linalg::C64) -> CMat {
    let mut v = vec_of(s);
    v[k] += delta;
    unvec(&v, s.nrows(), s.ncols())
}

// Central differences of `h` along the real and imaginary parts of entry k.
fn partials<T>(s: &CMat, k: usize, h: impl Fn(&CMat) -> T, sub: impl Fn(&T, &T) -> T) -> (T, T) {
    let re = sub(
        &h(&perturb(s, k, c(STEP, 0.0))),
        &h(&perturb(s, k, c(-STEP, 0.0))),
    );
    let im = sub(
        &h(&perturb(s, k, c(0.0, STEP))),
        &h(&perturb(s, k, c(0.0, -STEP))),
    );
    (re, im)
}

fn rel_err(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1e-12)
}

fn check_instance(seed: u64, n_a: usize, k2: usize, n_e: usize) -> (f64, f64) {
    let (s, z) = random_point(seed, n_a, k2, n_e);
    let n = n_a * k2;
    let f = |m: &CMat| objective(m, &z).value;
    let g = |m: &CMat| gradients(m, &z).wrt_conj_s;

    // df/ds* = (df/dx + i df/dy) / 2
    let mut fd_grad = CVec::zeros(n);
    for k in 0..n {
        let (dx, dy) = partials(&s, k, f, |a, b| a - b);
        fd_grad[k] = c(dx, dy) / (4.0 * STEP);
    }
    let grad_err = rel_err(
        &CMat::from_column_slice(n, 1, gradients(&s, &z).wrt_conj_s.as_slice()),
        &CMat::from_column_slice(n, 1, fd_grad.as_slice()),
    );

    // column k of d g / ds = (dg/dx - i dg/dy) / 2, of d g / ds* = (dg/dx + i dg/dy) / 2
    let hess = hessians(&s, &z);
    let mut fd_ss = CMat::zeros(n, n);
    let mut fd_conj = CMat::zeros(n, n);
    for k in 0..n {
        let (dx, dy) = partials(&s, k, g, |a, b| a - b);
        let dx = dx.scale(1.0 / (2.0 * STEP));
        let dy = dy.scale(1.0 / (2.0 * STEP));
        fd_ss.set_column(k, &((&dx - &dy * c(0.0, 1.0)) * c(0.5, 0.0)));
        fd_conj.set_column(k, &((&dx + &dy * c(0.0, 1.0)) * c(0.5, 0.0)));
    }
    let hess_err = rel_err(&hess.ss, &fd_ss).max(rel_err(&hess.conj_s, &fd_conj));
    (grad_err, hess_err)
}

#[test]
fn calculus_matches_finite_differences_on_several_shapes() {
    for (i, &(n_a, k2, n_e)) in [(2, 4, 3), (1, 3, 2), (3, 5, 4), (2, 6, 6)]
        .iter()
        .enumerate()
    {
        for t in 0..10u64 {
            let (ge, he) = check_instance(100 * i as u64 + t, n_a, k2, n_e);
            assert!(ge <= 1e-6, "({n_a},{k2}) gradient error {ge}");
            assert!(he <= 1e-5, "({n_a},{k2}) hessian error {he}");
        }
    }
}

#[test]
fn commutation_matrices_transpose_and_invert() {
    for (rows, cols) in [(2, 4), (3, 5), (1, 6)] {
        let s = cn_matrix(&mut substream(3, rows as u64), rows, cols);
        let pi = commutation(rows, cols);
        assert!((&pi * vec_of(&s) - vec_of(&s.transpose())).norm() < 1e-15);
        let id = commutation(cols, rows) * &pi;
        assert!(max_abs(&(id - CMat::identity(rows * cols, rows * cols))) < 1e-15);
    }
}

#[test]
fn symbol_hessian_loses_exactly_n_a_squared_directions() {
    for (n_a, k2, n_e) in [(2, 4, 3), (3, 6, 5), (1, 3, 2)] {
        let (s, z) = random_point(9, n_a, k2, n_e);
        let eig = hermitian_eigenvalues(&hessians(&s, &z).ss);
        let top = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let small = eig.iter().filter(|v| v.abs() < 1e-8 * top).count();
        assert_eq!(small, n_a * n_a, "n_a = {n_a}, k2 = {k2}");
    }
}

#[test]
fn mse_matrix_is_hermitian_positive_semidefinite() {
    let cfg = BlindConfig {
        n_a: 2,
        n_b: 2,
        n_e: 4,
        k2: 4,
        trials: 20,
        seed: 5,
        ..BlindConfig::default()
    };
    let m = mse_matrix_mc(&cfg).unwrap().m_bar;
    assert!(max_abs(&(&m - m.adjoint())) <= 1e-12 * max_abs(&m));
    let eig = hermitian_eigenvalues(&m);
    let top = eig.iter().cloned().fold(0.0, f64::max);
    assert!(eig.iter().all(|&v| v >= -1e-12 * top), "{eig:?}");
}
