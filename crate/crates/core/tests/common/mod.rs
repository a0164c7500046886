//! Independent reference computations shared by the integration tests.

#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

pub type Mat3 = [[f64; 3]; 3];

/// Lame constants in MPa for `e` in GPa.
pub fn lame_mpa(e_gpa: f64, nu: f64) -> (f64, f64) {
    let e = e_gpa * 1000.0;
    let mu = e / (2.0 * (1.0 + nu));
    let lam = 2.0 * mu * nu / (1.0 - 2.0 * nu);
    (lam, mu)
}

fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn transpose(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

/// `P = F S` with `S = lambda tr(E) I + 2 mu E` (MPa).
pub fn svk_pk1(f: &Mat3, e_gpa: f64, nu: f64) -> Mat3 {
    let (lam, mu) = lame_mpa(e_gpa, nu);
    let c = matmul(&transpose(f), f);
    let mut green = c;
    for i in 0..3 {
        green[i][i] -= 1.0;
        for j in 0..3 {
            green[i][j] *= 0.5;
        }
    }
    let tr = green[0][0] + green[1][1] + green[2][2];
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = 2.0 * mu * green[i][j] + if i == j { lam * tr } else { 0.0 };
        }
    }
    matmul(f, &s)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One-dimensional laminate with layers normal to x1 under mean
/// `diag(1, f22, 1)`. Returns per-layer `F11` and the common traction `P11`.
/// `layers` holds `(width_fraction, E, nu)`.
pub fn laminate_oracle(layers: &[(f64, f64, f64)], f22: f64) -> (Vec<f64>, f64) {
    let p11 = |f11: f64, e: f64, nu: f64| svk_pk1(&diag(f11, f22, 1.0), e, nu)[0][0];
    let f11_for = |sigma: f64, e: f64, nu: f64| bisect(0.9, 1.1, |x| p11(x, e, nu) - sigma);
    let mean_f11 = |sigma: f64| {
        layers
            .iter()
            .map(|&(w, e, nu)| w * f11_for(sigma, e, nu))
            .sum::<f64>()
    };
    let sigma = bisect(-5.0e3, 5.0e3, |s| mean_f11(s) - 1.0);
    let f11 = layers
        .iter()
        .map(|&(_, e, nu)| f11_for(sigma, e, nu))
        .collect();
    (f11, sigma)
}

pub fn diag(a: f64, b: f64, c: f64) -> Mat3 {
    [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]]
}

/// Central finite difference of a scalar function along coordinate `i`.
pub fn central_difference(f: &mut dyn FnMut(usize, f64) -> f64, i: usize, x: f64, h: f64) -> f64 {
    (f(i, x + h) - f(i, x - h)) / (2.0 * h)
}
