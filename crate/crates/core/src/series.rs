//! Truncated complex power series in a local variable `w`.
//!
//! A series is a coefficient vector `c` with `c[j]` the coefficient of `w^j`.

use num_complex::Complex64 as C;

pub(crate) fn zeros(len: usize) -> Vec<C> {
    vec![C::new(0.0, 0.0); len]
}

/// Generalized binomial coefficient n(n-1)...(n-j+1)/j! for integer n of any sign.
pub(crate) fn binom(n: i64, j: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..j {
        acc *= (n - i as i64) as f64 / (i + 1) as f64;
    }
    acc
}

/// Coefficients of `(p + w)^n` up to `w^order`; `p` must be nonzero when `n < 0`.
pub(crate) fn shifted_power(p: C, n: i64, order: usize) -> Vec<C> {
    let mut out = zeros(order + 1);
    for (j, c) in out.iter_mut().enumerate() {
        if n >= 0 && j as i64 > n {
            break;
        }
        *c = p.powi((n - j as i64) as i32) * binom(n, j);
    }
    out
}

pub(crate) fn mul(a: &[C], b: &[C], order: usize) -> Vec<C> {
    let mut out = zeros(order + 1);
    for (i, &ai) in a.iter().enumerate().take(order + 1) {
        if ai == C::new(0.0, 0.0) {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `a / b`; requires `b[0] != 0`.
pub(crate) fn div(a: &[C], b: &[C], order: usize) -> Vec<C> {
    let mut out = zeros(order + 1);
    for k in 0..=order {
        let mut acc = a.get(k).copied().unwrap_or_default();
        for j in 1..=k {
            acc -= b.get(j).copied().unwrap_or_default() * out[k - j];
        }
        out[k] = acc / b[0];
    }
    out
}

pub(crate) fn exp(a: &[C], order: usize) -> Vec<C> {
    let mut out = zeros(order + 1);
    out[0] = a[0].exp();
    for k in 1..=order {
        let mut acc = C::new(0.0, 0.0);
        for j in 1..=k {
            acc += a.get(j).copied().unwrap_or_default() * out[k - j] * j as f64;
        }
        out[k] = acc / k as f64;
    }
    out
}

pub(crate) fn add_scaled(acc: &mut [C], a: &[C], s: C) {
    for (x, &y) in acc.iter_mut().zip(a) {
        *x += s * y;
    }
}

/// Taylor coefficients of the displacement `w(t) = z(t) - q` of `z' = F(z)`,
/// `z(0) = q`, given the local expansion `field[j]` of `F(q + w)`.
/// Entry `k` is the coefficient of `t^k`; entry 0 is zero.
pub(crate) fn flow_series(field: &[C], order: usize) -> Vec<C> {
    let mut a = zeros(order + 1);
    if order == 0 {
        return a;
    }
    a[1] = field[0];
    for k in 1..order {
        let mut sum = zeros(k + 1);
        let mut pw = zeros(k + 1);
        pw[0] = C::new(1.0, 0.0);
        add_scaled(&mut sum, &pw, field[0]);
        for &cj in field.iter().take(k + 1).skip(1) {
            pw = mul(&pw, &a[..=k], k);
            add_scaled(&mut sum, &pw, cj);
        }
        a[k + 1] = sum[k] / (k + 1) as f64;
    }
    a
}
