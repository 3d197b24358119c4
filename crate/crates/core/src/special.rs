//! Special functions used by the spatial covariance machinery.

pub(crate) use statrs::function::gamma::ln_gamma;

/// Natural log of the modified Bessel function of the second kind,
/// `ln K_nu(x)` for real order `nu >= 0` and argument `x > 0`.
///
/// Evaluates the integral representation
/// `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt`
/// by Simpson's rule on the log scale, so large orders and tiny arguments
/// stay in range (the result can be on the order of +-1e3 in log space).
pub(crate) fn ln_bessel_k(nu: f64, x: f64) -> f64 {
    assert!(nu >= 0.0 && x > 0.0, "ln_bessel_k domain: nu >= 0, x > 0");

    // log integrand: -x cosh t + ln cosh(nu t)
    let log_f = |t: f64| -> f64 {
        let z = nu * t;
        let log_cosh = z + (-2.0 * z).exp().ln_1p() - std::f64::consts::LN_2;
        -x * t.cosh() + log_cosh
    };

    // the integrand peaks near asinh(nu / x); march right until it has
    // dropped ~60 nats below the peak
    let t_peak = (nu / x).asinh();
    let peak = log_f(t_peak);
    let mut t_max = t_peak + 1.0;
    while log_f(t_max) > peak - 60.0 && t_max < 700.0 {
        t_max += 1.0;
    }

    const N: usize = 4096; // even
    let h = t_max / N as f64;
    let mut max_g = f64::NEG_INFINITY;
    let mut gs = Vec::with_capacity(N + 1);
    for i in 0..=N {
        let g = log_f(i as f64 * h);
        max_g = max_g.max(g);
        gs.push(g);
    }
    let mut sum = 0.0;
    for (i, g) in gs.iter().enumerate() {
        let w = if i == 0 || i == N {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * (g - max_g).exp();
    }
    max_g + (sum * h / 3.0).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matches_half_integer_closed_forms() {
        // K_{1/2}(x) = sqrt(pi / 2x) e^{-x}
        for &x in &[0.1, 0.5, 1.0, 3.0, 10.0, 50.0] {
            let exact = (std::f64::consts::PI / (2.0 * x)).sqrt().ln() - x;
            assert_relative_eq!(ln_bessel_k(0.5, x), exact, max_relative = 1e-8);
        }
        // K_{3/2}(x) = sqrt(pi / 2x) e^{-x} (1 + 1/x)
        for &x in &[0.2, 1.0, 4.0, 20.0] {
            let exact = (std::f64::consts::PI / (2.0 * x)).sqrt().ln() - x + (1.0 + 1.0 / x).ln();
            assert_relative_eq!(ln_bessel_k(1.5, x), exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn small_argument_limit_large_order() {
        // K_nu(x) ~ Gamma(nu)/2 * (2/x)^nu as x -> 0
        let nu = 40.0;
        let x = 1e-6f64;
        let exact = ln_gamma(nu) - std::f64::consts::LN_2 + nu * (2.0 / x).ln();
        assert_relative_eq!(ln_bessel_k(nu, x), exact, max_relative = 1e-8);
    }

    #[test]
    fn decreasing_in_argument() {
        let nu = 40.0;
        let mut last = f64::INFINITY;
        for i in 1..=30 {
            let v = ln_bessel_k(nu, i as f64 * 5.0);
            assert!(v < last);
            last = v;
        }
    }
}
