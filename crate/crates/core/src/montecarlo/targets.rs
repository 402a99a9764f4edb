//! Closed forms for length-measure integrals under the reflected bridge
//! law, and the quadratures they are checked against.

use std::f64::consts::{FRAC_PI_2, PI};

use libm::{erf, erfc};

const SERIES_TERMS: usize = 200;

/// `∫P₊(df) ∫da Σ_v 1{ζ > t}` for `0 < t ≤ 1`.
pub fn duration_tail(t: f64) -> f64 {
    assert!(t > 0.0 && t <= 1.0, "t = {t} must lie in (0, 1]");
    ((1.0 / t - 1.0).max(0.0).sqrt() + t.sqrt().asin() - FRAC_PI_2) / (2.0 * PI).sqrt()
}

/// `∫P₊(df) ∫da Σ_v ζ²`.
pub fn duration_second_moment() -> f64 {
    PI.sqrt() / (16.0 * 2f64.sqrt())
}

/// `∫P₊(df) ∫da Σ_v 1{max > x} = Σ_n ∫_{2nx}^∞ e^{−z²/2} dz`.
pub fn max_tail(x: f64) -> f64 {
    assert!(x > 0.0, "x = {x} must be positive");
    // terms decay like a Gaussian in n once 2nx is past a few units
    let c = (PI / 2.0).sqrt();
    let mut sum = 0.0;
    for n in 1.. {
        let t = c * erfc(2.0 * n as f64 * x / 2f64.sqrt());
        sum += t;
        if t <= 1e-17 * sum {
            break;
        }
    }
    sum
}

/// `∫P₊(df) ∫da Σ_v max²`.
pub fn max_second_moment() -> f64 {
    PI.powf(2.5) / (24.0 * 2f64.sqrt())
}

/// `P₊₊{max > y} = 2 Σ_n (4n²y² − 1) e^{−2n²y²}`.
pub fn excursion_max_tail(y: f64) -> f64 {
    assert!(y > 0.0, "y = {y} must be positive");
    let s: f64 = (1..=SERIES_TERMS)
        .map(|n| {
            let n2 = (n * n) as f64;
            (4.0 * n2 * y * y - 1.0) * (-2.0 * n2 * y * y).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

/// `P{|N(0, σ²)| ≤ x}`.
pub fn half_normal_cdf(x: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        erf(x / (sigma * 2f64.sqrt()))
    }
}

/// `P{2e(1/2) ≤ x}` for a standard excursion `e`: the chi law with three
/// degrees of freedom.
pub fn doubled_excursion_midpoint_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        erf(x / 2f64.sqrt()) - (2.0 / PI).sqrt() * x * (-x * x / 2.0).exp()
    }
}

/// Which duration density the disintegration integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DurationDensity {
    /// `1/√((1−r) r³)`: straddles of an excursion.
    Excursion,
    /// `√((1−r)/r³)`: the uniform-mark form, equivalently straddles of a
    /// reflected bridge.
    UniformMark,
}

/// `(1/(2√(2π))) ∫_c^1 density(r) dr` by Simpson's rule after `r = 1 − s²`,
/// which removes the endpoint singularity at `r = 1`.
pub fn duration_integral(c: f64, density: DurationDensity, panels: usize) -> f64 {
    assert!(c > 0.0 && c <= 1.0, "cutoff {c} must lie in (0, 1]");
    let top = (1.0 - c).sqrt();
    if top == 0.0 {
        return 0.0;
    }
    // integrand in s, dr = 2s ds
    let g = |s: f64| {
        let r = 1.0 - s * s;
        match density {
            DurationDensity::Excursion => 2.0 / r.powf(1.5),
            DurationDensity::UniformMark => 2.0 * s * s / r.powf(1.5),
        }
    };
    let m = panels.max(2) & !1;
    let h = top / m as f64;
    let mut acc = g(0.0) + g(top);
    for k in 1..m {
        acc += g(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0 / (2.0 * (2.0 * PI).sqrt())
}

/// Closed form of the excursion-form integral: `√((1−c)/c)/√(2π)`.
pub fn excursion_duration_tail(c: f64) -> f64 {
    ((1.0 - c) / c).sqrt() / (2.0 * PI).sqrt()
}

/// Asymptotic Kolmogorov critical value `√(−ln(α/2)/2)/√m`.
pub fn ks_critical(m: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (m as f64).sqrt()
}

/// `sup_x |F_m(x) − F(x)|` for a continuous reference `F`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut k = 0;
    while k < xs.len() {
        let x = xs[k];
        let mut j = k;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((j as f64 / m - f).abs()).max((f - k as f64 / m).abs());
        k = j;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert!((duration_tail(0.5) - 0.08561).abs() < 5e-6);
        assert_eq!(duration_tail(1.0), 0.0);
        assert!((duration_second_moment() - 0.07833).abs() < 5e-6);
        assert!((max_second_moment() - 0.51540).abs() < 5e-6);
        assert!((max_tail(0.5) - 0.45819).abs() < 5e-5);
        assert!((excursion_max_tail(1.0) - 0.8222).abs() < 1e-3);
        assert!((half_normal_cdf(1.0, 1.0) - 0.682689).abs() < 1e-6);
        assert!((ks_critical(2000, 0.001) - 0.0436).abs() < 1e-4);
        // chi(3) median
        assert!((doubled_excursion_midpoint_cdf(1.5381722) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn moments_are_integrated_tails() {
        // ∫ 2t Q(t) dt and ∫ 2x tail(x) dx by the midpoint rule
        let m = 20_000;
        let q: f64 = (0..m).map(|k| (k as f64 + 0.5) / m as f64).map(|t| 2.0 * t * duration_tail(t)).sum::<f64>() / m as f64;
        assert!((q - duration_second_moment()).abs() < 1e-6);
        let top = 6.0;
        let x: f64 = (0..m)
            .map(|k| (k as f64 + 0.5) * top / m as f64)
            .map(|x| 2.0 * x * max_tail(x))
            .sum::<f64>()
            * top
            / m as f64;
        assert!((x - max_second_moment()).abs() < 1e-5, "{x}");
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        for c in [0.05, 0.2, 0.5, 0.8] {
            let a = duration_integral(c, DurationDensity::UniformMark, 4000);
            assert!((a - duration_tail(c)).abs() < 1e-9, "{c}: {a}");
            let b = duration_integral(c, DurationDensity::Excursion, 4000);
            assert!((b - excursion_duration_tail(c)).abs() < 1e-9, "{c}: {b}");
        }
        assert_eq!(duration_integral(1.0, DurationDensity::Excursion, 100), 0.0);
        assert!((duration_integral(0.2, DurationDensity::Excursion, 4000) - 0.79788).abs() < 1e-5);
    }

    #[test]
    fn tail_series_against_a_numeric_integral() {
        // Σ_n ∫_{2nx}^∞ e^{−z²/2} dz with the integrals done by Simpson
        let x = 0.5;
        let mut total = 0.0;
        for n in 1..40 {
            let a = 2.0 * n as f64 * x;
            let b = a + 12.0;
            let m = 4000;
            let h = (b - a) / m as f64;
            let f = |z: f64| (-z * z / 2.0).exp();
            let mut s = f(a) + f(b);
            for k in 1..m {
                s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            total += s * h / 3.0;
        }
        assert!((total - max_tail(x)).abs() < 1e-9);
    }

    #[test]
    fn ks_of_a_perfect_sample() {
        let m = 1000;
        let xs: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) / m as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / m as f64).abs() < 1e-12);
    }
}
