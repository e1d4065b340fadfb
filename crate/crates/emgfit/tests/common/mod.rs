//! Shared oracles for the integration suites: quadrature of the variance
//! mixture integral and rank statistics. Kept independent of the library's
//! closed-form code paths.

/// Adaptive Simpson on [a, b], pre-split into panels so narrow peaks cannot
/// slip between the initial nodes.
pub fn integrate_panels(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, left, tol / 2.0, depth - 1) + rec(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    let step = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * step;
            rec(f, lo, lo + step, simpson(f, lo, lo + step), tol, 40)
        })
        .sum()
}

/// Quadrature of ∫ N(x|v) IG(v; α, β) dv on the log-variance axis, written
/// from the raw density formulas.
pub fn mixture_quadrature(x: f64, alpha: f64, beta: f64) -> f64 {
    let ln_norm_const = -0.5 * (2.0 * std::f64::consts::PI).ln();
    let ln_ig_const = alpha * beta.ln() - ln_gamma_oracle(alpha);
    let f = move |u: f64| {
        let v = u.exp();
        let ln_gauss = ln_norm_const - 0.5 * v.ln() - x * x / (2.0 * v);
        let ln_ig = ln_ig_const - (alpha + 1.0) * v.ln() - beta / v;
        (ln_gauss + ln_ig + u).exp() // + u for the dv = v du Jacobian
    };
    integrate_panels(&f, -60.0, 60.0, 120, 1e-13)
}

/// Independent ln Γ via the Lanczos approximation (g = 7, n = 9), a different
/// scheme from the library's Stirling-series path.
pub fn ln_gamma_oracle(z: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if z < 0.5 {
        let pi = std::f64::consts::PI;
        (pi / (pi * z).sin()).ln() - ln_gamma_oracle(1.0 - z)
    } else {
        let z = z - 1.0;
        let mut x = COEF[0];
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            x += c / (z + i as f64);
        }
        let t = z + G + 0.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
    }
}

/// Spearman rank correlation.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rank = |vals: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let mut ranks = vec![0.0; vals.len()];
        for (r, &i) in idx.iter().enumerate() {
            ranks[i] = r as f64;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..xs.len() {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx).powi(2);
        dy += (ry[i] - my).powi(2);
    }
    num / (dx * dy).sqrt()
}
