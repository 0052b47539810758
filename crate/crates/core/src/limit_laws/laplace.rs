//! Laplace transforms of additive limit statistics and the distribution of
//! the limiting sum of fixed points.

use rayon::prelude::*;

use super::bessel::ln_bessel_i;
use crate::logspace::ln_factorial;
use crate::statistics::CycleFunctional;
use crate::weights::WeightSequence;

/// Budget for the tensor midpoint rule on `X_m`.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    /// Maximum integrand evaluations per level at the fine resolution.
    pub budget: usize,
    /// Cap on nodes per dimension.
    pub max_nodes: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            budget: 1 << 23,
            max_nodes: 1 << 14,
        }
    }
}

impl Quadrature {
    fn nodes(&self, dims: usize) -> usize {
        let per_dim = (self.budget as f64).powf(1.0 / dims as f64).floor() as usize;
        let n = per_dim.min(self.max_nodes).max(4);
        n - n % 2
    }
}

/// `∫_{[0,1]^d} g` by the composite midpoint rule with `nodes` per axis.
fn midpoint(dims: usize, nodes: usize, g: &(dyn Fn(&[f64]) -> f64 + Sync)) -> f64 {
    let h = 1.0 / nodes as f64;
    if dims == 0 {
        return g(&[]);
    }
    // outer axis in parallel; slices are summed in index order
    let slices: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|i0| {
            let mut x = vec![0.0; dims];
            x[0] = (i0 as f64 + 0.5) * h;
            let mut idx = vec![0usize; dims];
            let mut acc = 0.0;
            'grid: loop {
                for d in 1..dims {
                    x[d] = (idx[d] as f64 + 0.5) * h;
                }
                acc += g(&x);
                for d in 1..dims {
                    idx[d] += 1;
                    if idx[d] < nodes {
                        continue 'grid;
                    }
                    idx[d] = 0;
                }
                break;
            }
            acc
        })
        .collect();
    slices.iter().sum::<f64>() * h.powi(dims as i32)
}

/// `∫_{X_m} (1 - e^{-t f_m(x)}) dx` and a Richardson error estimate.
///
/// Symmetric families integrate over the cube and divide by `m`. Otherwise
/// `X_m` is mapped onto the cube by `x_1 = u`, `x_i = u + (1-u) s_i`.
pub fn level_integral(
    f: &dyn CycleFunctional,
    level: usize,
    t: f64,
    quad: Quadrature,
) -> (f64, f64) {
    let integrand: Box<dyn Fn(&[f64]) -> f64 + Sync> = if f.is_symmetric() || level == 1 {
        Box::new(move |x: &[f64]| -(-t * f.eval(level, x)).exp_m1() / level as f64)
    } else {
        Box::new(move |s: &[f64]| {
            let u = s[0];
            let mut x = Vec::with_capacity(level);
            x.push(u);
            x.extend(s[1..].iter().map(|&si| u + (1.0 - u) * si));
            (1.0 - u).powi(level as i32 - 1) * -(-t * f.eval(level, &x)).exp_m1()
        })
    };
    let fine_nodes = quad.nodes(level);
    let fine = midpoint(level, fine_nodes, integrand.as_ref());
    let coarse = midpoint(level, fine_nodes / 2, integrand.as_ref());
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    (extrapolated, (fine - coarse).abs() / 3.0)
}

/// `E exp(-t S) = exp(-Σ_m θ_m ∫_{X_m} (1 - e^{-t f_m}))` for the limit `S`
/// of `Σ_m Σ_{m-cycles c} f_m(c/n)`.
pub fn laplace_additive(ws: &WeightSequence, f: &dyn CycleFunctional, t: f64, quad: Quadrature) -> f64 {
    assert!(t >= 0.0, "Laplace argument must be non-negative");
    if t == 0.0 {
        return 1.0;
    }
    let exponent: f64 = (1..=f.max_level())
        .filter(|&m| ws.theta(m) > 0.0)
        .map(|m| ws.theta(m) * level_integral(f, m, t, quad).0)
        .sum();
    (-exponent).exp()
}

/// `E exp(-t S^{(k)}) = exp{(θ_k/k)(((1 - e^{-t})/t)^k - 1)}` for the limit
/// of `S_n^{(k)}/n`. Returns 1 at `t = 0`.
pub fn laplace_sum_k(theta_k: f64, k: usize, t: f64) -> f64 {
    assert!(t >= 0.0, "Laplace argument must be non-negative");
    if t == 0.0 || theta_k == 0.0 {
        return 1.0;
    }
    let mean_exp = -(-t).exp_m1() / t;
    (theta_k / k as f64 * (mean_exp.powi(k as i32) - 1.0)).exp()
}

/// `G(t) = Σ_j ((-θ)^j / j!) e^{-θ} t^{-j-1} e^{θ/t} e^{-jt}`, the series
/// whose term-wise inverse Laplace transforms give the CDF of `S^{(1)}`.
/// Satisfies `t G(t) = laplace_sum_k(θ, 1, t)`. The series alternates and
/// loses accuracy once `θ e^{-t} / t` is much above 10.
pub fn laplace_series_sum_fixed(theta_1: f64, t: f64) -> f64 {
    assert!(t > 0.0);
    let z = -theta_1 * (-t).exp() / t;
    let mut term: f64 = 1.0;
    let mut sum: f64 = 1.0;
    let mut j = 0.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) || j < z.abs() {
        j += 1.0;
        term *= z / j;
        sum += term;
        if j > 10_000.0 {
            break;
        }
    }
    (-theta_1 + theta_1 / t).exp() / t * sum
}

/// Largest series term, in absolute value, tolerated before switching to
/// the mixture form.
const MAX_SERIES_TERM: f64 = 1e2;

/// `P(S^{(1)} <= x) = e^{-θ} Σ_{j=0}^{⌊x⌋} ((-1)^j / j!) (θ(x-j))^{j/2} I_j(2√(θ(x-j)))`.
///
/// The alternating series loses `1e-16` times its largest term; when that
/// term exceeds [`MAX_SERIES_TERM`] the value comes from
/// [`cdf_sum_fixed_points_mixture`] instead.
pub fn cdf_sum_fixed_points(x: f64, theta_1: f64, eps: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let last = x.floor() as u32;
    let mut ln_terms = Vec::with_capacity(last as usize + 1);
    for j in 0..=last {
        let y = theta_1 * (x - j as f64);
        if y == 0.0 {
            if j == 0 {
                ln_terms.push(-theta_1);
            }
            continue;
        }
        ln_terms.push(
            0.5 * j as f64 * y.ln() + ln_bessel_i(j, 2.0 * y.sqrt(), eps)
                - ln_factorial(j as usize)
                - theta_1,
        );
    }
    if ln_terms.iter().any(|&t| t > MAX_SERIES_TERM.ln()) {
        return cdf_sum_fixed_points_mixture(x, theta_1);
    }
    let total: f64 = ln_terms
        .iter()
        .enumerate()
        .map(|(j, t)| if j % 2 == 0 { t.exp() } else { -t.exp() })
        .sum();
    total.clamp(0.0, 1.0)
}

/// CDF of a sum of `r` iid uniforms, evaluated on whichever side of `r/2`
/// keeps the alternating sum short.
fn irwin_hall_cdf(r: usize, x: f64) -> f64 {
    if r == 0 {
        return if x >= 0.0 { 1.0 } else { 0.0 };
    }
    let rf = r as f64;
    if x <= 0.0 {
        return 0.0;
    }
    if x >= rf {
        return 1.0;
    }
    if x > 0.5 * rf {
        return 1.0 - irwin_hall_cdf(r, rf - x);
    }
    let mut total = 0.0;
    for j in 0..=(x.floor() as usize) {
        let base = x - j as f64;
        if base <= 0.0 {
            continue;
        }
        // C(r, j) base^r / r!
        let ln_term = rf * base.ln() - ln_factorial(j) - ln_factorial(r - j);
        total += if j % 2 == 0 { ln_term.exp() } else { -ln_term.exp() };
    }
    total.clamp(0.0, 1.0)
}

/// `P(S^{(1)} <= x) = Σ_r Pois_θ(r) P(U_1 + ... + U_r <= x)`, the same law
/// written as a Poisson mixture of Irwin-Hall distributions.
pub fn cdf_sum_fixed_points_mixture(x: f64, theta_1: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let total: f64 = super::spacings::poisson_weights(theta_1, 1e-16)
        .iter()
        .enumerate()
        .map(|(r, p)| p * irwin_hall_cdf(r, x))
        .sum();
    total.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit_laws::quadrature::gauss_legendre;
    use crate::statistics::{ComponentSum, FnFunctional};
    use crate::rng::RngStream;
    use crate::point_process::poisson;

    const EPS: f64 = 1e-16;

    #[test]
    fn laplace_sum_k_values() {
        assert_eq!(laplace_sum_k(1.0, 1, 0.0), 1.0);
        assert!((laplace_sum_k(1.0, 1, 1e-9) - 1.0).abs() < 1e-8);
        assert_eq!(laplace_sum_k(0.0, 3, 2.0), 1.0);
        // exp((1 - e^{-1}) - 1) = exp(-e^{-1})
        let expected = (-(-1.0f64).exp()).exp();
        assert!((laplace_sum_k(1.0, 1, 1.0) - expected).abs() < 1e-15);
        assert!((expected - 0.6922).abs() < 1e-4);
    }

    #[test]
    fn laplace_additive_trivial_cases() {
        let ws = WeightSequence::Uniform;
        let f = ComponentSum { level: 2 };
        assert_eq!(laplace_additive(&ws, &f, 0.0, Quadrature::default()), 1.0);
        let zero = FnFunctional::new(3, |_, _| 0.0);
        assert_eq!(laplace_additive(&ws, &zero, 1.5, Quadrature::default()), 1.0);
    }

    #[test]
    fn laplace_additive_fixed_point_sum() {
        let v = laplace_additive(&WeightSequence::Uniform, &ComponentSum { level: 1 }, 1.0, Quadrature::default());
        assert!((v - (-(-1.0f64).exp()).exp()).abs() < 1e-9);
    }

    #[test]
    fn laplace_additive_matches_closed_form_for_component_sums() {
        let ws = WeightSequence::ewens(1.3).unwrap();
        let quad = Quadrature { budget: 1 << 20, ..Quadrature::default() };
        for k in 1..=4 {
            for t in [0.5, 1.0, 2.0] {
                let q = laplace_additive(&ws, &ComponentSum { level: k }, t, quad);
                let exact = laplace_sum_k(1.3, k, t);
                assert!((q - exact).abs() < 1e-6, "k={k} t={t}: {q} vs {exact}");
                // the non-symmetric path (change of variables) must agree too
                let asym = FnFunctional::new(k, move |level, x: &[f64]| {
                    if level == k { x.iter().sum() } else { 0.0 }
                });
                let q2 = laplace_additive(&ws, &asym, t, quad);
                assert!((q2 - exact).abs() < 1e-6, "asym k={k} t={t}: {q2} vs {exact}");
            }
        }
    }

    #[test]
    fn laplace_additive_range_indicator_matches_range_law() {
        // f = 1{range <= a} at level k integrates to vol{x ∈ X_k : range <= a}
        // = a^{k-1}(1-a) + a^k/k; its Laplace transform at large t tends to
        // P(no such cycle) = exp(-θ_k vol).
        let k = 3;
        let a: f64 = 0.4;
        let f = FnFunctional::new(k, move |level, x: &[f64]| {
            let max = x.iter().cloned().fold(f64::MIN, f64::max);
            if level == k && max - x[0] <= a { 1.0 } else { 0.0 }
        });
        let (integral, _) = level_integral(&f, k, 50.0, Quadrature::default());
        let vol = a.powi(k as i32 - 1) * (1.0 - a) + a.powi(k as i32) / k as f64;
        assert!((integral - vol).abs() < 5e-3, "{integral} vs {vol}");
    }

    #[test]
    fn series_g_matches_closed_form() {
        for theta in [0.5, 1.0, 3.0] {
            for t in [0.1, 0.5, 1.0, 5.0, 10.0] {
                if theta / t > 10.0 {
                    continue;
                }
                let g = laplace_series_sum_fixed(theta, t);
                let expected = laplace_sum_k(theta, 1, t);
                assert!((t * g - expected).abs() < 1e-8 * expected, "θ={theta} t={t}");
            }
        }
    }

    #[test]
    fn series_and_mixture_forms_agree() {
        for theta in [0.3, 1.0, 2.0] {
            for i in 0..=120 {
                let x = i as f64 * 0.05;
                let series = cdf_sum_fixed_points(x, theta, EPS);
                let mixture = cdf_sum_fixed_points_mixture(x, theta);
                assert!((series - mixture).abs() < 1e-11, "θ={theta} x={x}: {series} vs {mixture}");
            }
        }
    }

    #[test]
    fn irwin_hall_values() {
        assert_eq!(irwin_hall_cdf(0, 0.0), 1.0);
        assert!((irwin_hall_cdf(1, 0.3) - 0.3).abs() < 1e-15);
        assert!((irwin_hall_cdf(2, 0.5) - 0.125).abs() < 1e-15);
        assert!((irwin_hall_cdf(2, 1.5) - 0.875).abs() < 1e-15);
        assert!((irwin_hall_cdf(7, 3.5) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn large_theta_stays_monotone() {
        for theta in [5.0, 12.0] {
            let mut prev = 0.0;
            for i in 0..4000 {
                let x = i as f64 * 0.01;
                let v = cdf_sum_fixed_points(x, theta, EPS);
                assert!(v + 1e-12 >= prev, "θ={theta} decreases at {x}");
                prev = v;
            }
        }
    }

    #[test]
    fn cdf_sum_fixed_points_edges() {
        assert_eq!(cdf_sum_fixed_points(-0.1, 1.0, EPS), 0.0);
        assert!((cdf_sum_fixed_points(0.0, 1.0, EPS) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(cdf_sum_fixed_points(3.0, 0.0, EPS), 1.0);
        let mut prev = 0.0;
        for i in 0..1000 {
            let x = i as f64 * 0.01;
            let v = cdf_sum_fixed_points(x, 1.0, EPS);
            assert!(v + 1e-12 >= prev, "not monotone at {x}");
            prev = v;
        }
        assert!(cdf_sum_fixed_points(12.0, 1.0, EPS) > 1.0 - 1e-9);
    }

    /// `t ∫_0^∞ e^{-tx} F(x) dx` with Gauss-Legendre on each unit interval
    /// (F is smooth between integers) and the remainder treated as F = 1.
    fn laplace_of_cdf(theta: f64, t: f64) -> f64 {
        let (nodes, weights) = gauss_legendre(40);
        let upper = 60usize;
        let mut total = 0.0;
        for j in 0..upper {
            let (a, b) = (j as f64, j as f64 + 1.0);
            for (z, w) in nodes.iter().zip(&weights) {
                let x = 0.5 * (b - a) * z + 0.5 * (a + b);
                total += 0.5 * (b - a) * w * (-t * x).exp() * cdf_sum_fixed_points(x, theta, EPS);
            }
        }
        t * total + (-t * upper as f64).exp()
    }

    #[test]
    fn cdf_sum_fixed_points_inverts_laplace_transform() {
        for theta in [0.5, 1.0, 2.0] {
            for t in [0.1, 0.5, 1.0, 5.0, 10.0] {
                let lhs = laplace_of_cdf(theta, t);
                let rhs = laplace_sum_k(theta, 1, t);
                assert!((lhs - rhs).abs() < 1e-6, "θ={theta} t={t}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn cdf_sum_fixed_points_matches_limit_object() {
        // S^{(1)} is a Poisson(θ) number of iid uniforms summed.
        let draws = 10_000_000u64;
        let x = 2.5;
        let hits = (0..draws)
            .into_par_iter()
            .filter(|&i| {
                let mut rng = RngStream::new(808, i);
                let count = poisson(1.0, &mut rng);
                let s: f64 = (0..count).map(|_| rng.uniform()).sum();
                s <= x
            })
            .count();
        let p = hits as f64 / draws as f64;
        let f = cdf_sum_fixed_points(x, 1.0, EPS);
        assert!((p - f).abs() < 1e-3, "mc={p} cdf={f}");
    }
}
