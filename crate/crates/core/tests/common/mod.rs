//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

/// Every set partition of `0..n` as a restricted-growth label vector.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut labels = vec![0usize; n];
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == labels.len() {
            out.push(labels.clone());
            return;
        }
        for l in 0..=max + 1 {
            labels[i] = l;
            rec(i + 1, max.max(l), labels, out);
        }
    }
    rec(1, 0, &mut labels, &mut out);
    out
}

/// Relabels by first appearance so equal partitions compare equal.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

pub fn block_sizes(labels: &[usize]) -> Vec<usize> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut s = vec![0; k];
    for &l in labels {
        s[l] += 1;
    }
    s
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Minimum assignment cost by enumerating every permutation.
pub fn brute_force_assignment(n: usize, cost: &[f64]) -> f64 {
    permutations(n)
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let x = h * XGK[k];
        let s = f(c - x) + f(c + x);
        kron += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature on `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut stack = vec![(a, b, tol, 0usize)];
    let mut total = 0.0;
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (v, err) = gk15(f, lo, hi);
        if err <= t || depth > 40 {
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, t / 2.0, depth + 1));
            stack.push((mid, hi, t / 2.0, depth + 1));
        }
    }
    total
}

fn log_normal_pdf(x: f64, mean: f64, precision: f64) -> f64 {
    0.5 * (precision.ln() - (2.0 * std::f64::consts::PI).ln()) - 0.5 * precision * (x - mean) * (x - mean)
}

fn log_gamma_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - statrs::function::gamma::ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// `∫∫ Π N(x|μ,1/λ) N(μ|0,1/λ) Gamma(λ|a,b) dμ dλ` by nested adaptive
/// quadrature over mapped infinite ranges.
pub fn normal_gamma_marginal_quadrature(points: &[f64], a: f64, b: f64) -> f64 {
    let n = points.len() as f64;
    let center = points.iter().sum::<f64>() / (n + 1.0);
    // scale of the λ integrand, used to map (0, ∞) onto (0, 1)
    let ss = points.iter().map(|x| x * x).sum::<f64>() - center * center * (n + 1.0);
    let lam_scale = (a + n / 2.0) / (b + 0.5 * ss.max(0.0));
    let mut outer = |u: f64| -> f64 {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let lam = lam_scale * u / (1.0 - u);
        let dlam = lam_scale / ((1.0 - u) * (1.0 - u));
        let width = 1.0 / (lam * (n + 1.0)).sqrt();
        let mut inner = |v: f64| -> f64 {
            if v <= -1.0 || v >= 1.0 {
                return 0.0;
            }
            let mu = center + width * v / (1.0 - v * v);
            let dmu = width * (1.0 + v * v) / ((1.0 - v * v) * (1.0 - v * v));
            let mut l = log_normal_pdf(mu, 0.0, lam);
            for &x in points {
                l += log_normal_pdf(x, mu, lam);
            }
            l.exp() * dmu
        };
        let inner_val = integrate(&mut inner, -1.0, 1.0, 1e-14);
        inner_val * log_gamma_pdf(lam, a, b).exp() * dlam
    };
    integrate(&mut outer, 0.0, 1.0, 1e-13)
}

/// `V_n(t)` by summing the series in linear space over enough components
/// that the Geometric(κ) tail is negligible.
pub fn v_coefficient(n: usize, t: usize, gamma: f64, kappa: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let mut total = 0.0;
    for k in t.max(1)..t.max(1) + 20_000 {
        let kf = k as f64;
        let falling = ln_gamma(kf + 1.0) - ln_gamma((k - t) as f64 + 1.0);
        let rising = ln_gamma(gamma * kf + n as f64) - ln_gamma(gamma * kf);
        total += (falling - rising + kappa.ln() + (kf - 1.0) * (1.0 - kappa).ln()).exp();
    }
    total
}

/// Rising factorial `x (x+1) ... (x+n-1)`.
pub fn rising(x: f64, n: usize) -> f64 {
    (0..n).map(|i| x + i as f64).product()
}

/// `Δ` computed directly from per-group cluster labels.
pub fn delta_direct(labels: &[Vec<usize>]) -> f64 {
    let k = labels.iter().flatten().max().map_or(0, |m| m + 1);
    let props: Vec<Vec<f64>> = labels
        .iter()
        .map(|g| {
            let mut c = vec![0.0; k];
            for &l in g {
                c[l] += 1.0;
            }
            c.iter().map(|x| x / g.len() as f64).collect()
        })
        .collect();
    let b = labels.len();
    let mut s = 0.0;
    for g in &props[1..] {
        for c in 0..k {
            s += (props[0][c] - g[c]).abs();
        }
    }
    s / (2.0 * (b as f64 - 1.0))
}
