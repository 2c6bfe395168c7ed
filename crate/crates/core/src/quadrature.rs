//! Gauss rules on intervals.
//!
//! Node sets come from `gauss-quad` (Golub-Welsch); each node is then polished
//! by a few Newton steps on the three-term recurrence and the weights are
//! recomputed from the Christoffel formula, so that every rule integrates its
//! weight function to full double precision. The crate pins the middle node of
//! odd-degree rules to zero, which is wrong for alpha != beta; the polish step
//! restarts that node from the midpoint of its neighbours.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi};

use crate::special::ln_gamma;

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect();
        terms.iter().sum()
    }

    /// Affine map of a rule on [-1, 1] to [a, b]. `weight_degree` is the
    /// homogeneity of the weight function, so a Jacobi rule with exponents
    /// (alpha, beta) passes alpha + beta and keeps integrating
    /// (b - x)^alpha (x - a)^beta f(x).
    pub fn mapped(&self, a: f64, b: f64, weight_degree: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let scale = half.powf(weight_degree + 1.0);
        Rule {
            nodes: self.nodes.iter().map(|t| mid + half * t).collect(),
            weights: self.weights.iter().map(|w| w * scale).collect(),
        }
    }
}

/// Evaluates P_n^{(a,b)}(x) and P_{n-1}^{(a,b)}(x).
fn jacobi_pair(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p = 0.5 * (2.0 * (a + 1.0) + (a + b + 2.0) * (x - 1.0));
    for k in 2..=n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let c1 = 2.0 * kf * (kf + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * s;
        let next = (c2 * p - c3 * p_prev) / c1;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

fn jacobi_derivative(n: usize, a: f64, b: f64, x: f64, p: f64, p_prev: f64) -> f64 {
    let nf = n as f64;
    let s = 2.0 * nf + a + b;
    (nf * (a - b - s * x) * p + 2.0 * (nf + a) * (nf + b) * p_prev) / (s * (1.0 - x * x))
}

fn polish(n: usize, a: f64, b: f64, mut nodes: Vec<f64>) -> Rule {
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if n % 2 == 1 && n > 1 && a != b {
        let mid = n / 2;
        nodes[mid] = 0.5 * (nodes[mid - 1] + nodes[mid + 1]);
    }
    let log_c = (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(n as f64 + a + 1.0)
        + ln_gamma(n as f64 + b + 1.0)
        - ln_gamma(n as f64 + a + b + 1.0)
        - ln_gamma(n as f64 + 1.0);
    let c = log_c.exp();
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..8 {
            let (p, q) = jacobi_pair(n, a, b, *x);
            let dp = jacobi_derivative(n, a, b, *x, p, q);
            let step = p / dp;
            *x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (p, q) = jacobi_pair(n, a, b, *x);
        let dp = jacobi_derivative(n, a, b, *x, p, q);
        weights.push(c / ((1.0 - *x * *x) * dp * dp));
    }
    // Rescale to the exact total mass 2^{a+b+1} B(a+1, b+1).
    let mass = ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(a + b + 2.0))
    .exp();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w *= mass / total;
    }
    Rule { nodes, weights }
}

type RuleKey = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<RuleKey, Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss-Jacobi rule on [-1, 1] for the weight (1 - x)^alpha (1 + x)^beta.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Arc<Rule> {
    assert!(n >= 1, "quadrature rule needs at least one node");
    assert!(alpha > -1.0 && beta > -1.0, "Jacobi exponents must exceed -1");
    let key = (n, alpha.to_bits(), beta.to_bits());
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return Arc::clone(rule);
    }
    let rule = if n == 1 {
        let mass = ((alpha + beta + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0)
            + ln_gamma(beta + 1.0)
            - ln_gamma(alpha + beta + 2.0))
        .exp();
        Rule {
            nodes: vec![(beta - alpha) / (alpha + beta + 2.0)],
            weights: vec![mass],
        }
    } else {
        let raw = GaussJacobi::new(
            NonZeroUsize::new(n).unwrap(),
            FiniteAboveNegOneF64::new(alpha).unwrap(),
            FiniteAboveNegOneF64::new(beta).unwrap(),
        );
        polish(n, alpha, beta, raw.nodes().copied().collect())
    };
    let rule = Arc::new(rule);
    cache().lock().unwrap().insert(key, Arc::clone(&rule));
    rule
}

pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Legendre rule on [a, b].
pub fn legendre_on(n: usize, a: f64, b: f64) -> Rule {
    gauss_legendre(n).mapped(a, b, 0.0)
}

/// Rule on [a, b] for the weight (x - a)^beta (nodes cluster at a).
pub fn left_singular_on(n: usize, beta: f64, a: f64, b: f64) -> Rule {
    if beta == 0.0 {
        return legendre_on(n, a, b);
    }
    gauss_jacobi(n, 0.0, beta).mapped(a, b, beta)
}

/// Rule on [a, b] for the weight (b - x)^alpha.
pub fn right_singular_on(n: usize, alpha: f64, a: f64, b: f64) -> Rule {
    if alpha == 0.0 {
        return legendre_on(n, a, b);
    }
    gauss_jacobi(n, alpha, 0.0).mapped(a, b, alpha)
}

/// Gauss rule on [-1, 1] for the even weight |x|^{2g} with 2m nodes,
/// symmetric about the origin. Obtained from the Jacobi rule in t = x^2.
pub fn symmetric_power_rule(m: usize, g: f64) -> Rule {
    let base = gauss_jacobi(m, 0.0, g - 0.5);
    // int_0^1 x^{2g} q(x^2) dx = (1/2) int_0^1 t^{g-1/2} q(t) dt and the
    // Jacobi rule lives on s in [-1, 1] with t = (1 + s)/2.
    let scale = 0.5f64.powf(g + 0.5) * 0.5;
    let mut half: Vec<(f64, f64)> = base
        .nodes
        .iter()
        .zip(&base.weights)
        .map(|(&s, &w)| ((0.5 * (1.0 + s)).sqrt(), w * scale))
        .collect();
    half.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut nodes = Vec::with_capacity(2 * m);
    let mut weights = Vec::with_capacity(2 * m);
    for &(x, w) in half.iter().rev() {
        nodes.push(-x);
        weights.push(w);
    }
    for &(x, w) in &half {
        nodes.push(x);
        weights.push(w);
    }
    Rule { nodes, weights }
}

/// Barycentric weights for arbitrary distinct nodes, scaled to unit maximum.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let span = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = if span > 0.0 { 4.0 / span } else { 1.0 };
    let mut w: Vec<f64> = (0..n)
        .map(|i| {
            let mut prod = 1.0;
            for j in 0..n {
                if j != i {
                    prod *= scale * (nodes[i] - nodes[j]);
                }
            }
            1.0 / prod
        })
        .collect();
    let max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for v in w.iter_mut() {
        *v /= max;
    }
    w
}

/// Spectral differentiation matrix (row-major) for the interpolant on `nodes`.
pub fn differentiation_matrix(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let w = barycentric_weights(nodes);
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

/// Barycentric interpolation of values given on `nodes` at the point `x`.
pub fn barycentric_eval(nodes: &[f64], bary: &[f64], values: &[f64], x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..nodes.len() {
        let dx = x - nodes[i];
        if dx == 0.0 {
            return values[i];
        }
        let t = bary[i] / dx;
        num += t * values[i];
        den += t;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{beta as beta_fn, gamma};

    #[test]
    fn legendre_integrates_polynomials() {
        let rule = legendre_on(12, -1.0, 3.0);
        for k in 0..24 {
            let exact = (3f64.powi(k + 1) - (-1f64).powi(k + 1)) / (k + 1) as f64;
            let got = rule.integrate(|x| x.powi(k));
            assert!((got - exact).abs() < 1e-12 * exact.abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn jacobi_moments_match_beta_function() {
        for &(a, b) in &[(0.0, 0.7), (-0.5, 1.5), (0.3, -0.4), (0.0, 5.0), (1.5, 2.5)] {
            for &n in &[1usize, 4, 7, 20, 33] {
                let rule = gauss_jacobi(n, a, b);
                // int (1-x)^a (1+x)^b ((1+x)/2)^k dx = 2^{a+b+1} B(a+1, b+k+1)
                for k in 0..(2 * n).min(30) {
                    let exact = 2f64.powf(a + b + 1.0) * beta_fn(a + 1.0, b + k as f64 + 1.0);
                    let got = rule.integrate(|x| (0.5 * (1.0 + x)).powi(k as i32));
                    assert!((got - exact).abs() < 1e-13 * exact, "a={a} b={b} n={n} k={k} err={}", (got - exact) / exact);
                }
            }
        }
    }

    #[test]
    fn odd_degree_middle_node_is_recovered() {
        let rule = gauss_jacobi(5, 0.0, 2.0);
        let mut sorted = rule.nodes.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(sorted[2].abs() > 1e-3);
        for &x in &rule.nodes {
            let (p, _) = jacobi_pair(5, 0.0, 2.0, x);
            assert!(p.abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_power_rule_moments() {
        for &g in &[0.0, 0.5, 1.0, 2.5] {
            let rule = symmetric_power_rule(10, g);
            for k in 0..20 {
                // int_{-1}^{1} |x|^{2g} x^{2k} dx = 2 / (2g + 2k + 1)
                let exact = 2.0 / (2.0 * g + 2.0 * k as f64 + 1.0);
                let got = rule.integrate(|x| x.powi(2 * k));
                assert!((got - exact).abs() < 1e-14, "g={g} k={k}");
                let odd = rule.integrate(|x| x.powi(2 * k + 1));
                assert!(odd.abs() < 1e-15);
            }
        }
        assert!((gamma(1.5) - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn differentiation_is_exact_on_polynomials() {
        let rule = legendre_on(10, 0.0, 2.0);
        let d = differentiation_matrix(&rule.nodes);
        let vals: Vec<f64> = rule.nodes.iter().map(|x| x.powi(7) - 2.0 * x).collect();
        for i in 0..10 {
            let got: f64 = (0..10).map(|j| d[i * 10 + j] * vals[j]).sum();
            let x = rule.nodes[i];
            assert!((got - (7.0 * x.powi(6) - 2.0)).abs() < 1e-10);
        }
    }
}
