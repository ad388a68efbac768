//! Gauss–Legendre rules, composite panel meshes and adaptive Gauss–Kronrod.

use std::sync::Arc;

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, CMat, Real};

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
///
/// Also carries the barycentric weights, the spectral differentiation matrix
/// and the cumulative integration matrix for its node set.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    bary: Vec<T>,
    diff: Vec<Vec<T>>,
    cumul: Vec<Vec<T>>,
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf: T = lit(k as f64);
        let p2 = ((lit::<T>(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf: T = lit(n as f64);
    let dp = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let eps = T::default_epsilon() * lit(4.0);
        for i in 0..n {
            // Tricomi-style initial guess, refined by Newton.
            let guess = ((i as f64 + 0.75) / (n as f64 + 0.5) * std::f64::consts::PI).cos();
            let mut x: T = lit(guess);
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= eps {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes.push(x);
            weights.push(lit::<T>(2.0) / ((T::one() - x * x) * dp * dp));
        }
        nodes.reverse();
        weights.reverse();
        // Barycentric weights for Legendre points: (-1)^j sqrt((1 - x^2) w).
        let bary: Vec<T> = (0..n)
            .map(|j| {
                let s = ((T::one() - nodes[j] * nodes[j]) * weights[j]).sqrt();
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        let mut rule = GaussLegendre { nodes, weights, bary, diff: Vec::new(), cumul: Vec::new() };
        rule.diff = rule.build_diff();
        rule.cumul = rule.build_cumul();
        rule
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Lagrange basis values at `x` (reference coordinate).
    pub fn lagrange_basis(&self, x: T) -> Vec<T> {
        let n = self.nodes.len();
        if let Some(j) = self.nodes.iter().position(|&xj| xj == x) {
            let mut v = vec![T::zero(); n];
            v[j] = T::one();
            return v;
        }
        let terms: Vec<T> = (0..n).map(|j| self.bary[j] / (x - self.nodes[j])).collect();
        let denom = terms.iter().fold(T::zero(), |a, &b| a + b);
        terms.into_iter().map(|t| t / denom).collect()
    }

    fn build_diff(&self) -> Vec<Vec<T>> {
        let n = self.nodes.len();
        let mut d = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            let mut diag = T::zero();
            for j in 0..n {
                if i != j {
                    let v = (self.bary[j] / self.bary[i]) / (self.nodes[i] - self.nodes[j]);
                    d[i][j] = v;
                    diag -= v;
                }
            }
            d[i][i] = diag;
        }
        d
    }

    fn build_cumul(&self) -> Vec<Vec<T>> {
        // Q[i][j] = integral of l_j from -1 to x_i, exact with the same rule.
        let n = self.nodes.len();
        let half = lit::<T>(0.5);
        let mut q = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            let hw = (self.nodes[i] + T::one()) * half;
            for k in 0..n {
                let x = -T::one() + hw * (self.nodes[k] + T::one());
                let basis = self.lagrange_basis(x);
                for j in 0..n {
                    q[i][j] += hw * self.weights[k] * basis[j];
                }
            }
        }
        q
    }

    /// `d/dx l_j (x_i)` on the reference interval.
    pub fn diff_matrix(&self) -> &[Vec<T>] {
        &self.diff
    }

    /// `int_{-1}^{x_i} l_j` on the reference interval.
    pub fn cumulative_matrix(&self) -> &[Vec<T>] {
        &self.cumul
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * lit(0.5);
        let mid = (a + b) * lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(mid + half * x))
            * half
    }
}

/// Composite mesh of panels on `[a, b]`, each carrying the same
/// Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    edges: Vec<T>,
    rule: Arc<GaussLegendre<T>>,
}

/// Sorted union of break lists with near-duplicates removed.
pub fn merge_breaks<T: Real>(lists: &[&[T]]) -> Vec<T> {
    let mut all: Vec<T> = lists.iter().flat_map(|l| l.iter().copied()).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let span = match (all.first(), all.last()) {
        (Some(&lo), Some(&hi)) => (hi - lo).abs().max(T::one()),
        _ => T::one(),
    };
    let tol = span * T::default_epsilon() * lit(64.0);
    let mut out: Vec<T> = Vec::with_capacity(all.len());
    for x in all {
        match out.last() {
            Some(&last) if (x - last).abs() <= tol => {}
            _ => out.push(x),
        }
    }
    out
}

impl<T: Real> Mesh<T> {
    /// Panels between the given breaks, each segment split evenly so that no
    /// panel is wider than `max_width`.
    pub fn new(breaks: &[T], max_width: T, order: usize) -> Result<Self> {
        Self::with_rule(breaks, max_width, Arc::new(GaussLegendre::new(order)))
    }

    pub fn with_rule(breaks: &[T], max_width: T, rule: Arc<GaussLegendre<T>>) -> Result<Self> {
        let breaks = merge_breaks(&[breaks]);
        if breaks.len() < 2 {
            return Err(Error::InvalidInput("mesh needs at least two distinct breaks".into()));
        }
        if !(max_width > T::zero()) {
            return Err(Error::InvalidInput("mesh panel width must be positive".into()));
        }
        let mut edges = vec![breaks[0]];
        for w in breaks.windows(2) {
            let len = w[1] - w[0];
            let k = to_f64(len / max_width).ceil().max(1.0) as usize;
            let step = len / lit(k as f64);
            for i in 1..k {
                edges.push(w[0] + step * lit(i as f64));
            }
            edges.push(w[1]);
        }
        Ok(Mesh { edges, rule })
    }

    /// Subdivides every panel so that widths do not exceed `max_width`.
    /// The result's edges are a superset of `self`'s.
    pub fn refined(&self, max_width: T) -> Self {
        Mesh::with_rule(&self.edges, max_width, self.rule.clone()).expect("valid mesh stays valid")
    }

    /// Same panels, different rule order.
    pub fn with_order(&self, order: usize) -> Self {
        Mesh { edges: self.edges.clone(), rule: Arc::new(GaussLegendre::new(order)) }
    }

    /// Mesh whose edges are the union of both meshes' edges.
    pub fn union(&self, other: &Mesh<T>) -> Self {
        let order = self.order().max(other.order());
        let edges = merge_breaks(&[&self.edges, &other.edges]);
        let rule = if self.order() == order { self.rule.clone() } else { other.rule.clone() };
        Mesh { edges, rule }
    }

    pub fn with_extra_breaks(&self, extra: &[T]) -> Self {
        let lo = self.a();
        let hi = self.b();
        let inside: Vec<T> = extra.iter().copied().filter(|&x| x > lo && x < hi).collect();
        Mesh { edges: merge_breaks(&[&self.edges, &inside]), rule: self.rule.clone() }
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn rule(&self) -> &GaussLegendre<T> {
        &self.rule
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    pub fn num_panels(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.num_panels() * self.order()
    }

    pub fn a(&self) -> T {
        self.edges[0]
    }

    pub fn b(&self) -> T {
        *self.edges.last().expect("non-empty")
    }

    pub fn panel_bounds(&self, p: usize) -> (T, T) {
        (self.edges[p], self.edges[p + 1])
    }

    /// Panel containing `t`; interior edges belong to the panel on their right.
    pub fn panel_of(&self, t: T) -> usize {
        let idx = self.edges.partition_point(|&e| e <= t);
        idx.saturating_sub(1).min(self.num_panels() - 1)
    }

    pub fn node(&self, p: usize, j: usize) -> T {
        let (l, r) = self.panel_bounds(p);
        let half = (r - l) * lit(0.5);
        l + half + half * self.rule.nodes[j]
    }

    pub fn weight(&self, p: usize, j: usize) -> T {
        let (l, r) = self.panel_bounds(p);
        (r - l) * lit(0.5) * self.rule.weights[j]
    }

    /// All nodes, panel-major.
    pub fn nodes(&self) -> Vec<T> {
        (0..self.num_panels()).flat_map(|p| (0..self.order()).map(move |j| (p, j))).map(|(p, j)| self.node(p, j)).collect()
    }

    pub fn weights(&self) -> Vec<T> {
        (0..self.num_panels()).flat_map(|p| (0..self.order()).map(move |j| (p, j))).map(|(p, j)| self.weight(p, j)).collect()
    }

    /// Reference coordinate of `t` in panel `p`.
    pub fn to_reference(&self, p: usize, t: T) -> T {
        let (l, r) = self.panel_bounds(p);
        (lit::<T>(2.0) * t - l - r) / (r - l)
    }

    pub fn same_panels(&self, other: &Mesh<T>) -> bool {
        self.order() == other.order() && self.edges == other.edges
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1] (symmetric half).
const GK_XK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration of a matrix-valued function.
#[derive(Debug, Clone)]
pub struct AdaptiveIntegral<T: Real> {
    pub value: CMat<T>,
    pub error: T,
    pub evaluations: usize,
}

fn gk15<T: Real, F>(f: &F, a: T, b: T) -> Result<(CMat<T>, T)>
where
    F: Fn(T) -> Result<CMat<T>>,
{
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    let fc = f(mid)?;
    let mut kron = &fc * Complex::new(lit::<T>(GK_WK[7]), T::zero());
    let mut gauss = &fc * Complex::new(lit::<T>(GK_WG[3]), T::zero());
    for k in 0..7 {
        let dx = half * lit(GK_XK[k]);
        let fl = f(mid - dx)?;
        let fr = f(mid + dx)?;
        let s = fl + fr;
        kron += &s * Complex::new(lit::<T>(GK_WK[k]), T::zero());
        if k % 2 == 1 {
            gauss += &s * Complex::new(lit::<T>(GK_WG[k / 2]), T::zero());
        }
    }
    let hc = Complex::new(half, T::zero());
    let kron = kron * hc;
    let gauss = gauss * hc;
    let err = (&kron - &gauss).norm();
    Ok((kron, err))
}

/// Globally adaptive Gauss–Kronrod 7/15 integration of a matrix-valued
/// function. `breaks` seeds the initial subdivision (must lie inside
/// `[a, b]`).
pub fn integrate_adaptive<T: Real, F>(f: F, breaks: &[T], abs_tol: T, rel_tol: T, max_intervals: usize) -> Result<AdaptiveIntegral<T>>
where
    F: Fn(T) -> Result<CMat<T>>,
{
    let breaks = merge_breaks(&[breaks]);
    if breaks.len() < 2 {
        return Err(Error::InvalidInput("integration interval is empty".into()));
    }
    let mut pieces: Vec<(T, T, CMat<T>, T)> = Vec::new();
    for w in breaks.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1])?;
        pieces.push((w[0], w[1], v, e));
    }
    let mut evals = 15 * pieces.len();
    loop {
        let total = pieces.iter().fold(pieces[0].2.clone() * Complex::new(T::zero(), T::zero()), |acc, p| acc + &p.2);
        let err = pieces.iter().fold(T::zero(), |acc, p| acc + p.3);
        let target = abs_tol.max(rel_tol * total.norm());
        if err <= target {
            return Ok(AdaptiveIntegral { value: total, error: err, evaluations: evals });
        }
        if pieces.len() >= max_intervals {
            return Err(Error::QuadratureFailure { estimate: to_f64(err), tol: to_f64(target) });
        }
        // Bisect the worst piece.
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -T::one()), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (l, r, _, _) = pieces.swap_remove(worst);
        let m = (l + r) * lit(0.5);
        let (v1, e1) = gk15(&f, l, m)?;
        let (v2, e2) = gk15(&f, m, r)?;
        evals += 30;
        pieces.push((l, m, v1, e1));
        pieces.push((m, r, v2, e2));
        // Keep summation order deterministic.
        pieces.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::creal;

    #[test]
    fn legendre_rule_exact_for_degree_2n_minus_1() {
        for n in [1usize, 2, 5, 16, 24] {
            let rule = GaussLegendre::<f64>::new(n);
            let deg = 2 * n - 1;
            let got = rule.integrate(0.0, 2.0, |x| x.powi(deg as i32));
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert!((got - exact).abs() < 1e-12 * exact, "n={n}: {got} vs {exact}");
        }
    }

    #[test]
    fn single_precision_rule_works() {
        let rule = GaussLegendre::<f32>::new(8);
        let got = rule.integrate(0.0, 1.0, |x| x * x);
        assert!((got - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn barycentric_interpolation_reproduces_polynomials() {
        let rule = GaussLegendre::<f64>::new(7);
        let p = |x: f64| 1.0 - 2.0 * x + 3.0 * x.powi(4) - x.powi(6);
        for &x in &[-1.0, -0.3, 0.11, 1.0] {
            let basis = rule.lagrange_basis(x);
            let v: f64 = basis.iter().zip(rule.nodes()).map(|(l, &xj)| l * p(xj)).sum();
            assert!((v - p(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn differentiation_and_cumulative_matrices() {
        let rule = GaussLegendre::<f64>::new(9);
        let f = |x: f64| x.powi(5) - x;
        let df = |x: f64| 5.0 * x.powi(4) - 1.0;
        let big_f = |x: f64| x.powi(6) / 6.0 - x * x / 2.0;
        let vals: Vec<f64> = rule.nodes().iter().map(|&x| f(x)).collect();
        for (i, &xi) in rule.nodes().iter().enumerate() {
            let d: f64 = rule.diff_matrix()[i].iter().zip(&vals).map(|(a, b)| a * b).sum();
            let q: f64 = rule.cumulative_matrix()[i].iter().zip(&vals).map(|(a, b)| a * b).sum();
            assert!((d - df(xi)).abs() < 1e-11);
            assert!((q - (big_f(xi) - big_f(-1.0))).abs() < 1e-13);
        }
    }

    #[test]
    fn mesh_respects_breaks_and_width() {
        let m = Mesh::<f64>::new(&[0.0, 1.0, 3.0], 0.3, 4).unwrap();
        assert!(m.edges().contains(&1.0));
        assert!(m.edges().windows(2).all(|w| w[1] - w[0] <= 0.3 + 1e-12));
        let total: f64 = m.weights().iter().sum();
        assert!((total - 3.0).abs() < 1e-13);
        assert_eq!(m.panel_of(1.0), m.edges().iter().position(|&e| e == 1.0).unwrap());
        assert_eq!(m.panel_of(3.0), m.num_panels() - 1);
    }

    #[test]
    fn adaptive_kronrod_resolves_lorentzian() {
        let eps = 1e-3;
        let f = |s: f64| -> Result<CMat<f64>> { Ok(CMat::from_element(1, 1, creal(eps / ((s - 0.5).powi(2) + eps * eps)))) };
        let r = integrate_adaptive(f, &[0.0, 1.0], 1e-12, 1e-12, 2000).unwrap();
        let exact = 2.0 * (0.5f64 / eps).atan();
        assert!((r.value[(0, 0)].re - exact).abs() < 1e-10);
    }
}
