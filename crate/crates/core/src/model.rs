//! Domain types shared by every analysis: model parameters, phase states,
//! the two parametric signed networks, order parameters and the
//! classification of phase-locked configurations.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;

/// Coupling weights `κ_ij`, static or coevolving.
pub type CouplingMatrix = SquareMatrix;

/// Parameters of the adaptive phase-lag model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Natural frequency shared by all oscillators.
    #[serde(default)]
    pub omega: f64,
    /// Phase lag in the coupling term.
    #[serde(default)]
    pub alpha: f64,
    /// Phase lag in the plasticity rule.
    pub beta: f64,
    /// Adaptation rate; zero freezes the coupling matrix.
    #[serde(default)]
    pub epsilon: f64,
}

impl ModelParams {
    pub fn new(omega: f64, alpha: f64, beta: f64, epsilon: f64) -> Result<Self> {
        let p = Self {
            omega,
            alpha,
            beta: wrap_to_pi(beta),
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    /// Static model (`ε = 0`) with the given lags.
    pub fn frozen(alpha: f64, beta: f64) -> Self {
        Self {
            omega: 0.0,
            alpha,
            beta: wrap_to_pi(beta),
            epsilon: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("epsilon", self.epsilon),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.epsilon < 0.0 {
            return Err(Error::invalid("epsilon", "must be >= 0"));
        }
        if !(self.beta > -PI && self.beta <= PI) {
            return Err(Error::invalid("beta", "must lie in (-pi, pi]"));
        }
        Ok(())
    }

    /// Checks `β ∈ (−π, 0)`, required by the invariant-set results.
    pub fn require_negative_beta(&self) -> Result<()> {
        require_negative_beta(self.beta)
    }
}

pub(crate) fn require_negative_beta(beta: f64) -> Result<()> {
    if beta > -PI && beta < 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("beta", "must lie in (-pi, 0)"))
    }
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_to_pi(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Maps an angle into `[0, 2π)`.
pub fn canonical_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if y >= TAU {
        0.0
    } else {
        y
    }
}

/// Oscillator phases, stored as lifted reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseState(Vec<f64>);

impl PhaseState {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("theta", "phases must be finite"));
        }
        Ok(Self(theta))
    }

    /// Builds without validation; callers guarantee a nonempty finite vector.
    pub(crate) fn from_vec_unchecked(theta: Vec<f64>) -> Self {
        Self(theta)
    }

    /// Rotating wave `θ_j = 2π m j / N`, `j = 0..N`.
    pub fn rotating_wave(n: usize, m: usize) -> Self {
        Self(
            (0..n)
                .map(|j| TAU * (m * j % n.max(1)) as f64 / n as f64)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Phases reduced into `[0, 2π)`.
    pub fn canonicalize(&self) -> Self {
        Self(self.0.iter().map(|&t| canonical_angle(t)).collect())
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self(self.0.iter().map(|t| t + c).collect())
    }
}

/// Block-constant coupling: `a` within a group, `b` across groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockNetworkSpec {
    pub group_sizes: Vec<usize>,
    pub a: f64,
    pub b: f64,
    /// Per-group phase class for antipodal equilibria.
    #[serde(default, rename = "classes", skip_serializing_if = "Option::is_none")]
    pub class_assignment: Option<Vec<PhaseClass>>,
}

/// Which antipodal cluster a group sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum PhaseClass {
    /// Phase 0.
    Zero,
    /// Phase π.
    Pi,
}

impl PhaseClass {
    pub fn phase(self) -> f64 {
        match self {
            PhaseClass::Zero => 0.0,
            PhaseClass::Pi => PI,
        }
    }
}

impl TryFrom<u8> for PhaseClass {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(PhaseClass::Zero),
            1 => Ok(PhaseClass::Pi),
            other => Err(format!("phase class must be 0 or 1, got {other}")),
        }
    }
}

impl From<PhaseClass> for u8 {
    fn from(c: PhaseClass) -> u8 {
        match c {
            PhaseClass::Zero => 0,
            PhaseClass::Pi => 1,
        }
    }
}

impl BlockNetworkSpec {
    pub fn new(group_sizes: Vec<usize>, a: f64, b: f64) -> Result<Self> {
        let s = Self {
            group_sizes,
            a,
            b,
            class_assignment: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_classes(mut self, classes: Vec<PhaseClass>) -> Result<Self> {
        self.class_assignment = Some(classes);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.group_sizes.is_empty() {
            return Err(Error::invalid("group_sizes", "need at least one group"));
        }
        if self.group_sizes.contains(&0) {
            return Err(Error::invalid("group_sizes", "groups must be nonempty"));
        }
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::invalid("a/b", "weights must be finite"));
        }
        if let Some(classes) = &self.class_assignment {
            if classes.len() != self.group_sizes.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.group_sizes.len(),
                    found: classes.len(),
                });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    pub fn groups(&self) -> usize {
        self.group_sizes.len()
    }

    /// Group index of every node, groups laid out contiguously.
    pub fn node_groups(&self) -> Vec<usize> {
        self.group_sizes
            .iter()
            .enumerate()
            .flat_map(|(g, &size)| std::iter::repeat_n(g, size))
            .collect()
    }

    /// Node populations `(N_0, N_π)` of the two classes.
    pub fn class_populations(&self) -> Option<(usize, usize)> {
        let classes = self.class_assignment.as_ref()?;
        let mut pops = (0, 0);
        for (&size, class) in self.group_sizes.iter().zip(classes) {
            match class {
                PhaseClass::Zero => pops.0 += size,
                PhaseClass::Pi => pops.1 += size,
            }
        }
        Some(pops)
    }

    /// Equilibrium phases: all zero, or 0/π per class when classes are set.
    pub fn equilibrium_phases(&self) -> PhaseState {
        let groups = self.node_groups();
        let theta = match &self.class_assignment {
            Some(classes) => groups.iter().map(|&g| classes[g].phase()).collect(),
            None => vec![0.0; groups.len()],
        };
        PhaseState(theta)
    }
}

/// Ring with unit excitation inside half-bandwidth `w` and inhibition `−p` beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandNetworkSpec {
    pub n: usize,
    pub w: usize,
    pub p: f64,
}

impl BandNetworkSpec {
    pub fn new(n: usize, w: usize, p: f64) -> Result<Self> {
        let s = Self { n, w, p };
        s.validate()?;
        Ok(s)
    }

    /// Largest admissible half-bandwidth for `n` nodes.
    pub fn max_bandwidth(n: usize) -> usize {
        ((n - n % 2) / 2).saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        validate_band(self.n, self.w)?;
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::invalid("p", "must be a positive finite number"));
        }
        Ok(())
    }
}

pub(crate) fn validate_band(n: usize, w: usize) -> Result<()> {
    let max_w = BandNetworkSpec::max_bandwidth(n);
    if w < 1 || w > max_w {
        return Err(Error::invalid(
            "w",
            format!("need 1 <= w <= {max_w} for n = {n}, got {w}"),
        ));
    }
    Ok(())
}

/// Index distance on the ring of `n` nodes.
pub fn ring_distance(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

/// Either parametric family; the JSON form carries a `type` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum NetworkSpec {
    Block(BlockNetworkSpec),
    Band(BandNetworkSpec),
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            NetworkSpec::Block(s) => s.validate(),
            NetworkSpec::Band(s) => s.validate(),
        }
    }

    pub fn build(&self) -> Result<CouplingMatrix> {
        self.validate()?;
        Ok(match self {
            NetworkSpec::Block(s) => build_block_network(s),
            NetworkSpec::Band(s) => build_band_network(s),
        })
    }

    pub fn n(&self) -> usize {
        match self {
            NetworkSpec::Block(s) => s.n(),
            NetworkSpec::Band(s) => s.n,
        }
    }
}

/// Magnitude and angle of the `n`-th order parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParameters {
    pub n: u32,
    pub r: f64,
    pub psi: f64,
}

/// Phase-configuration classes, tested in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConfigurationClass {
    Synchronized,
    Antipodal,
    Splay,
    DoubleAntipodal { psi: f64, m: usize },
    Other,
}

/// Phase-locked solution `θ_i(t) = Ω t + φ_i` together with its induced coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLockedSolution {
    pub capital_omega: f64,
    pub offsets: PhaseState,
    pub induced_kappa: CouplingMatrix,
}

impl PhaseLockedSolution {
    pub fn new(capital_omega: f64, offsets: PhaseState, beta: f64) -> Self {
        let induced_kappa = induced_coupling(&offsets, beta);
        Self {
            capital_omega,
            offsets,
            induced_kappa,
        }
    }
}

/// `Z_n = (1/N) Σ_j exp(i n θ_j)`, returned as magnitude and angle in `[0, 2π)`.
pub fn order_parameter(theta: &[f64], n: u32) -> Result<OrderParameters> {
    if theta.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    if n == 0 {
        return Err(Error::invalid("n", "order index must be >= 1"));
    }
    let k = n as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for &t in theta {
        let (s, c) = (k * t).sin_cos();
        re += c;
        im += s;
    }
    let len = theta.len() as f64;
    let (re, im) = (re / len, im / len);
    let r = re.hypot(im).min(1.0);
    let psi = if r == 0.0 {
        0.0
    } else {
        canonical_angle(im.atan2(re))
    };
    Ok(OrderParameters { n, r, psi })
}

/// `max θ − min θ` over lifted phases.
pub fn phase_diameter(theta: &[f64]) -> f64 {
    if theta.is_empty() {
        return 0.0;
    }
    let (lo, hi) = theta
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
            (lo.min(t), hi.max(t))
        });
    hi - lo
}

/// Length of the shortest arc of the circle containing every phase.
pub fn circular_diameter(theta: &[f64]) -> f64 {
    if theta.len() < 2 {
        return 0.0;
    }
    let gaps = sorted_gaps(theta);
    let widest = gaps.iter().map(|g| g.1).fold(0.0, f64::max);
    (TAU - widest).max(0.0)
}

/// Canonical sorted phases and, for each, the gap to its successor (wrapping).
fn sorted_gaps(theta: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = theta.iter().map(|&t| canonical_angle(t)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    (0..n)
        .map(|i| {
            let next = if i + 1 < n {
                sorted[i + 1]
            } else {
                sorted[0] + TAU
            };
            (sorted[i], next - sorted[i])
        })
        .collect()
}

/// Splits phases into two arcs by cutting the circle at its two widest gaps.
///
/// Returns node indices of each arc; the arc holding node 0 comes first.
pub fn split_two_clusters(theta: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let n = theta.len();
    if n < 2 {
        return ((0..n).collect(), Vec::new());
    }
    let mut order: Vec<usize> = (0..n).collect();
    let canon: Vec<f64> = theta.iter().map(|&t| canonical_angle(t)).collect();
    order.sort_by(|&a, &b| canon[a].total_cmp(&canon[b]).then(a.cmp(&b)));
    let gap = |pos: usize| {
        let next = if pos + 1 < n {
            canon[order[pos + 1]]
        } else {
            canon[order[0]] + TAU
        };
        next - canon[order[pos]]
    };
    let mut by_gap: Vec<usize> = (0..n).collect();
    by_gap.sort_by(|&x, &y| gap(y).total_cmp(&gap(x)).then(x.cmp(&y)));
    let (c1, c2) = (by_gap[0].min(by_gap[1]), by_gap[0].max(by_gap[1]));
    // arc (c1, c2] in sorted order versus the rest
    let inner: Vec<usize> = order[c1 + 1..=c2].to_vec();
    let outer: Vec<usize> = order[..=c1]
        .iter()
        .chain(&order[c2 + 1..])
        .copied()
        .collect();
    let (mut first, mut second) = if inner.contains(&0) {
        (inner, outer)
    } else {
        (outer, inner)
    };
    first.sort_unstable();
    second.sort_unstable();
    (first, second)
}

/// Classifies a configuration; see [`ConfigurationClass`] for the order.
pub fn classify_configuration(theta: &[f64], tol: f64) -> Result<ConfigurationClass> {
    if theta.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    if !(tol > 0.0 && tol < 0.1) {
        return Err(Error::invalid("tol", "must lie in (0, 0.1)"));
    }
    if circular_diameter(theta) < tol {
        return Ok(ConfigurationClass::Synchronized);
    }
    let r2 = order_parameter(theta, 2)?.r;
    if r2 > 1.0 - tol {
        return Ok(ConfigurationClass::Antipodal);
    }
    if r2 < tol {
        return Ok(ConfigurationClass::Splay);
    }
    Ok(match fit_double_antipodal(theta, tol) {
        Some((psi, m)) => ConfigurationClass::DoubleAntipodal { psi, m },
        None => ConfigurationClass::Other,
    })
}

/// On the doubled circle `{0, π, ψ, ψ+π}` collapses to two points; fit them.
fn fit_double_antipodal(theta: &[f64], tol: f64) -> Option<(f64, usize)> {
    let doubled: Vec<f64> = theta.iter().map(|&t| canonical_angle(2.0 * t)).collect();
    let (first, second) = split_two_clusters(&doubled);
    if second.is_empty() {
        return None;
    }
    let centre = |idx: &[usize]| -> f64 {
        let (s, c) = idx.iter().fold((0.0, 0.0), |(s, c), &i| {
            (s + doubled[i].sin(), c + doubled[i].cos())
        });
        canonical_angle(s.atan2(c))
    };
    let within = |idx: &[usize], ctr: f64| {
        idx.iter()
            .all(|&i| wrap_to_pi(doubled[i] - ctr).abs() <= 2.0 * tol)
    };
    let (c1, c2) = (centre(&first), centre(&second));
    if !within(&first, c1) || !within(&second, c2) {
        return None;
    }
    // reference cluster: the larger one; on ties the one giving psi <= pi/2
    let d12 = canonical_angle(c2 - c1);
    let (reference_size, d) = match first.len().cmp(&second.len()) {
        std::cmp::Ordering::Greater => (first.len(), d12),
        std::cmp::Ordering::Less => (second.len(), TAU - d12),
        std::cmp::Ordering::Equal => {
            if d12 <= PI {
                (first.len(), d12)
            } else {
                (second.len(), TAU - d12)
            }
        }
    };
    let psi = d / 2.0;
    if psi <= tol || psi >= PI - tol {
        return None;
    }
    Some((psi, reference_size))
}

/// Solves `((N−m)/m) sin(ψ−α−β) = sin(ψ+α+β)` for `ψ ∈ (0, π)`.
pub fn solve_psi_m(n_total: usize, m: usize, alpha: f64, beta: f64) -> Result<f64> {
    if m < 1 || m >= n_total {
        return Err(Error::invalid("m", "need 1 <= m <= N-1"));
    }
    let s = alpha + beta;
    let (n, mf) = (n_total as f64, m as f64);
    let ratio = (n - mf) / mf;
    let residual = |psi: f64| ratio * (psi - s).sin() - (psi + s).sin();

    let sin_s_zero = s.sin().abs() <= 1e-14;
    if n_total == 2 * m {
        if sin_s_zero {
            return Err(Error::Degenerate);
        }
        return Ok(PI / 2.0);
    }
    if sin_s_zero {
        return Err(Error::NoSolution);
    }

    // F(0+) and F(π−) have opposite signs whenever sin(α+β) != 0
    let (mut lo, mut hi) = (0.0, PI);
    let mut f_lo = residual(lo);
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = residual(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `κ_ij = a` inside a group, `b` across groups (diagonal included).
pub fn build_block_network(spec: &BlockNetworkSpec) -> CouplingMatrix {
    let groups = spec.node_groups();
    SquareMatrix::from_fn(groups.len(), |i, j| {
        if groups[i] == groups[j] {
            spec.a
        } else {
            spec.b
        }
    })
}

/// `κ_ij = 1` when the ring distance is at most `w`, else `−p`.
pub fn build_band_network(spec: &BandNetworkSpec) -> CouplingMatrix {
    let n = spec.n;
    SquareMatrix::from_fn(n, |i, j| {
        if ring_distance(i, j, n) <= spec.w {
            1.0
        } else {
            -spec.p
        }
    })
}

/// Coupling induced by a phase-locked configuration: `κ_ij = −sin(φ_i − φ_j + β)`.
pub fn induced_coupling(offsets: &PhaseState, beta: f64) -> CouplingMatrix {
    let phi = offsets.as_slice();
    SquareMatrix::from_fn(phi.len(), |i, j| -(phi[i] - phi[j] + beta).sin())
}
