//! Closed-form linear stability of the block-structured and circulant
//! equilibria, plus the numeric Jacobian and eigenvalue oracle used to check them.
//!
//! Sign conventions: block spectra are Laplacian spectra (`D − M`, positive
//! means stable), while rotating-wave `λ_k` and [`stability_verdict`] use
//! Jacobian signs (negative means stable). The published `λ_k` equal `N` times
//! the Jacobian eigenvalues.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, SquareMatrix};
use crate::model::{
    build_band_network, build_block_network, validate_band, BandNetworkSpec, BlockNetworkSpec,
    CouplingMatrix, PhaseClass, PhaseState,
};

/// Closed-form values closer than this are merged into one entry.
pub const MERGE_TOL: f64 = 1e-9;

/// Eigenvalues with multiplicities, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub entries: Vec<(f64, usize)>,
}

impl Spectrum {
    /// Merges `(value, multiplicity)` pairs, dropping zero multiplicities.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, usize)>) -> Self {
        let mut pairs: Vec<(f64, usize)> = pairs.into_iter().filter(|p| p.1 > 0).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut entries: Vec<(f64, usize)> = Vec::with_capacity(pairs.len());
        for (v, m) in pairs {
            match entries.last_mut() {
                Some(last) if (v - last.0).abs() <= MERGE_TOL => {
                    let total = last.1 + m;
                    last.0 = (last.0 * last.1 as f64 + v * m as f64) / total as f64;
                    last.1 = total;
                }
                _ => entries.push((v, m)),
            }
        }
        Self { entries }
    }

    pub fn from_values(values: &[f64]) -> Self {
        Self::from_pairs(values.iter().map(|&v| (v, 1)))
    }

    /// Total multiplicity.
    pub fn len(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every eigenvalue repeated by multiplicity, ascending.
    pub fn values(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v, m))
            .collect()
    }

    pub fn negated(&self) -> Self {
        Self::from_pairs(self.entries.iter().map(|&(v, m)| (-v, m)))
    }
}

/// Laplacian spectrum of the block network at complete synchronization.
pub fn complete_sync_spectrum(spec: &BlockNetworkSpec) -> Result<Spectrum> {
    spec.validate()?;
    let n = spec.n() as f64;
    let (a, b) = (spec.a, spec.b);
    let mut pairs = vec![(0.0, 1), (b * n, spec.groups() - 1)];
    for &g in &spec.group_sizes {
        let gf = g as f64;
        pairs.push((a * gf + b * (n - gf), g - 1));
    }
    Ok(Spectrum::from_pairs(pairs))
}

/// Per-node phase class, or an error when no assignment is present.
fn node_classes(spec: &BlockNetworkSpec) -> Result<Vec<PhaseClass>> {
    let classes = spec
        .class_assignment
        .as_ref()
        .ok_or_else(|| Error::Precondition("missing class assignment".into()))?;
    Ok(spec.node_groups().into_iter().map(|g| classes[g]).collect())
}

/// `A_ij = ±κ_ij`, negated across classes: the coupling seen at the antipodal state.
pub fn antipodal_matrix_a(spec: &BlockNetworkSpec) -> Result<CouplingMatrix> {
    spec.validate()?;
    let classes = node_classes(spec)?;
    let k = build_block_network(spec);
    Ok(SquareMatrix::from_fn(k.dim(), |i, j| {
        if classes[i] == classes[j] {
            k.get(i, j)
        } else {
            -k.get(i, j)
        }
    }))
}

/// Laplacian spectrum at the antipodal state `D_A − A`.
///
/// With one class empty the state is complete synchronization and the call
/// delegates to [`complete_sync_spectrum`].
pub fn antipodal_spectrum(spec: &BlockNetworkSpec) -> Result<Spectrum> {
    spec.validate()?;
    let classes = spec
        .class_assignment
        .as_ref()
        .ok_or_else(|| Error::Precondition("missing class assignment".into()))?;
    let (n0, npi) = spec.class_populations().expect("classes checked above");
    if n0 == 0 || npi == 0 {
        return complete_sync_spectrum(spec);
    }
    let n = spec.n() as f64;
    let (a, b) = (spec.a, spec.b);
    let groups_in = |c: PhaseClass| classes.iter().filter(|&&x| x == c).count();

    let mut pairs = vec![
        (0.0, 1),
        (-b * n, 1),
        (b * (2.0 * n0 as f64 - n), groups_in(PhaseClass::Zero) - 1),
        (b * (2.0 * npi as f64 - n), groups_in(PhaseClass::Pi) - 1),
    ];
    let imbalance = b * (n0 as f64 - npi as f64);
    for (&g, &class) in spec.group_sizes.iter().zip(classes) {
        let side = if class == PhaseClass::Zero { 1.0 } else { -1.0 };
        pairs.push(((a - b) * g as f64 + imbalance * side, g - 1));
    }
    Ok(Spectrum::from_pairs(pairs))
}

/// Jacobian of the static phase dynamics at `theta_star`.
pub fn numeric_jacobian(
    kappa: &CouplingMatrix,
    theta_star: &PhaseState,
    alpha: f64,
) -> Result<SquareMatrix> {
    let n = theta_star.len();
    if kappa.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: kappa.dim(),
        });
    }
    let th = theta_star.as_slice();
    let inv_n = 1.0 / n as f64;
    let mut j = SquareMatrix::from_fn(n, |r, c| {
        if r == c {
            0.0
        } else {
            inv_n * kappa.get(r, c) * (th[r] - th[c] + alpha).cos()
        }
    });
    for r in 0..n {
        let off: f64 = (0..n).filter(|&c| c != r).map(|c| j.get(r, c)).sum();
        j.set(r, r, -off);
    }
    Ok(j)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn numeric_spectrum(matrix: &SquareMatrix) -> Result<Vec<f64>> {
    symmetric_eigenvalues(matrix)
}

/// `cos(2π·num/n)` with the numerator reduced mod `n` first, so large
/// products keep full precision.
fn cos_frac(num: usize, n: usize) -> f64 {
    (TAU * (num % n) as f64 / n as f64).cos()
}

/// Partial sum `S_J(m,k) = Σ_{j=1..J} cos(2πmj/N)(1 − cos(2πkj/N))`.
pub fn s_sum(j_max: usize, m: usize, k: usize, n: usize) -> f64 {
    (1..=j_max)
        .map(|j| cos_frac(m * j, n) * (1.0 - cos_frac(k * j, n)))
        .sum()
}

/// Closed form of the full sum `S_N(m,k)`.
pub fn s_full(m: usize, k: usize, n: usize) -> f64 {
    let nf = n as f64;
    let ind = |x: usize| if x.is_multiple_of(n) { 1.0 } else { 0.0 };
    let (m, k) = (m % n, k % n);
    nf * ind(m) - 0.5 * nf * (ind(m + k) + ind(m + n - k))
}

/// `λ_k = −2(1+p)·S_W(m,k) + p·S_N(m,k)` for `k = 0..N`, at the rotating wave of winding `m`.
pub fn rotating_wave_eigenvalues(spec: &BandNetworkSpec, m: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.n;
    if m >= n {
        return Err(Error::invalid("m", format!("need m < n = {n}")));
    }
    let p = spec.p;
    Ok((0..n)
        .map(|k| -2.0 * (1.0 + p) * s_sum(spec.w, m, k, n) + p * s_full(m, k, n))
        .collect())
}

/// Jacobian of the band network at the rotating wave (`α = 0`).
pub fn rotating_wave_jacobian(spec: &BandNetworkSpec, m: usize) -> Result<SquareMatrix> {
    spec.validate()?;
    numeric_jacobian(
        &build_band_network(spec),
        &PhaseState::rotating_wave(spec.n, m),
        0.0,
    )
}

/// Set of `p > 0` keeping every `λ_k ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AdmissiblePRange {
    Empty,
    Bounded {
        lower: f64,
        upper: f64,
    },
    #[serde(rename = "lower")]
    LowerBoundedUnbounded {
        lower: f64,
    },
    #[serde(rename = "upper")]
    UpperBounded {
        upper: f64,
    },
}

impl AdmissiblePRange {
    pub fn is_empty(&self) -> bool {
        matches!(self, AdmissiblePRange::Empty)
    }

    pub fn contains(&self, p: f64) -> bool {
        p > 0.0
            && match *self {
                AdmissiblePRange::Empty => false,
                AdmissiblePRange::Bounded { lower, upper } => lower <= p && p <= upper,
                AdmissiblePRange::LowerBoundedUnbounded { lower } => lower <= p,
                AdmissiblePRange::UpperBounded { upper } => p <= upper,
            }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AdmissiblePRange::Empty => "empty",
            AdmissiblePRange::Bounded { .. } => "bounded",
            AdmissiblePRange::LowerBoundedUnbounded { .. } => "lower",
            AdmissiblePRange::UpperBounded { .. } => "upper",
        }
    }

    pub fn lower(&self) -> Option<f64> {
        match *self {
            AdmissiblePRange::Bounded { lower, .. }
            | AdmissiblePRange::LowerBoundedUnbounded { lower } => Some(lower),
            _ => None,
        }
    }

    pub fn upper(&self) -> Option<f64> {
        match *self {
            AdmissiblePRange::Bounded { upper, .. } | AdmissiblePRange::UpperBounded { upper } => {
                Some(upper)
            }
            _ => None,
        }
    }
}

/// Solves `p(S_N − 2S_W) − 2S_W ≤ 0` for every `k` and intersects the results.
///
/// Each `k` contributes one linear inequality in `p`, solved exactly.
pub fn admissible_p(n: usize, w: usize, m: usize) -> Result<AdmissiblePRange> {
    validate_band(n, w)?;
    if m >= n {
        return Err(Error::invalid("m", format!("need m < n = {n}")));
    }
    let snap = |x: f64| if x.abs() <= 1e-12 * n as f64 { 0.0 } else { x };
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for k in 1..n {
        let sw = snap(s_sum(w, m, k, n));
        let c = snap(s_full(m, k, n) - 2.0 * sw);
        if c > 0.0 {
            if sw <= 0.0 {
                return Ok(AdmissiblePRange::Empty);
            }
            hi = hi.min(2.0 * sw / c);
        } else if c < 0.0 {
            if sw < 0.0 {
                lo = lo.max(2.0 * sw / c);
            }
        } else if sw < 0.0 {
            return Ok(AdmissiblePRange::Empty);
        }
    }
    Ok(if lo > hi {
        AdmissiblePRange::Empty
    } else if hi.is_infinite() {
        AdmissiblePRange::LowerBoundedUnbounded { lower: lo }
    } else if lo == 0.0 {
        AdmissiblePRange::UpperBounded { upper: hi }
    } else {
        AdmissiblePRange::Bounded {
            lower: lo,
            upper: hi,
        }
    })
}

/// Linear stability in Jacobian sign convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "count")]
pub enum StabilityVerdict {
    Stable,
    /// Number of modes above `+tol`.
    Unstable(usize),
    /// Number of near-zero modes besides the rotation mode.
    Marginal(usize),
}

/// Classifies Jacobian eigenvalues after discounting the global-rotation mode.
pub fn stability_verdict(lambdas: &[f64], tol_marginal: f64) -> Result<StabilityVerdict> {
    let rotation = lambdas
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() < tol_marginal)
        .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .map(|(i, _)| i)
        .ok_or(Error::MissingRotationMode)?;
    let rest = lambdas
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != rotation)
        .map(|(_, &v)| v);
    let (mut positive, mut near_zero) = (0, 0);
    for v in rest {
        if v > tol_marginal {
            positive += 1;
        } else if v >= -tol_marginal {
            near_zero += 1;
        }
    }
    Ok(if positive > 0 {
        StabilityVerdict::Unstable(positive)
    } else if near_zero > 0 {
        StabilityVerdict::Marginal(near_zero)
    } else {
        StabilityVerdict::Stable
    })
}

/// Complete-sync stability read off the parameter-plane inequalities alone.
///
/// `b < 0` with two or more groups destabilizes the inter-group mode; a group
/// of size `g ≥ 2` is locally stable iff `a·g + b·(N − g) > 0`, which for
/// `a < 0 < b` reads `g/N < b/(b − a)`. Singleton groups carry no local mode.
pub fn sync_stability_region(a: f64, b: f64, group_sizes: &[usize], tol: f64) -> StabilityVerdict {
    let n: usize = group_sizes.iter().sum();
    let nf = n as f64;
    let (mut positive, mut near_zero) = (0, 0);
    let mut tally = |laplacian_value: f64, mult: usize| {
        // Jacobian eigenvalue is −λ/N
        let jac = -laplacian_value / nf;
        if jac > tol {
            positive += mult;
        } else if jac >= -tol {
            near_zero += mult;
        }
    };
    if group_sizes.len() >= 2 {
        tally(b * nf, group_sizes.len() - 1);
    }
    if a < 0.0 && b > 0.0 {
        let threshold = b / (b - a);
        for &g in group_sizes.iter().filter(|&&g| g >= 2) {
            let frac = g as f64 / nf;
            // the same test as a·g + b(N−g) > 0, phrased as the boundary curve
            tally((threshold - frac) * (b - a) * nf, g - 1);
        }
    } else {
        for &g in group_sizes.iter().filter(|&&g| g >= 2) {
            tally(a * g as f64 + b * (nf - g as f64), g - 1);
        }
    }
    if positive > 0 {
        StabilityVerdict::Unstable(positive)
    } else if near_zero > 0 {
        StabilityVerdict::Marginal(near_zero)
    } else {
        StabilityVerdict::Stable
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::multiset_distance;

    fn block(sizes: &[usize], a: f64, b: f64) -> BlockNetworkSpec {
        BlockNetworkSpec::new(sizes.to_vec(), a, b).unwrap()
    }

    fn with_classes(spec: BlockNetworkSpec, classes: &[u8]) -> BlockNetworkSpec {
        spec.with_classes(
            classes
                .iter()
                .map(|&c| PhaseClass::try_from(c).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn assert_entries(s: &Spectrum, want: &[(f64, usize)]) {
        assert_eq!(s.entries.len(), want.len(), "{s:?}");
        for (g, w) in s.entries.iter().zip(want) {
            assert!((g.0 - w.0).abs() < 1e-12 && g.1 == w.1, "{s:?} vs {want:?}");
        }
    }

    #[test]
    fn complete_sync_examples() {
        let spec = block(&[2, 2], 2.0, 1.0);
        let s = complete_sync_spectrum(&spec).unwrap();
        assert_entries(&s, &[(0.0, 1), (4.0, 1), (6.0, 2)]);
        let num = numeric_spectrum(&build_block_network(&spec).laplacian()).unwrap();
        assert!(multiset_distance(&s.values(), &num) < 1e-12);

        assert_entries(
            &complete_sync_spectrum(&block(&[5], 1.5, 9.0)).unwrap(),
            &[(0.0, 1), (7.5, 4)],
        );
        assert_entries(
            &complete_sync_spectrum(&block(&[3, 3], 1.0, -1.0)).unwrap(),
            &[(-6.0, 1), (0.0, 5)],
        );
    }

    #[test]
    fn antipodal_matrix_examples() {
        let spec = with_classes(block(&[2, 3], 1.0, -0.5), &[0, 0]);
        assert_eq!(
            antipodal_matrix_a(&spec).unwrap(),
            build_block_network(&spec)
        );

        let spec = with_classes(block(&[1, 1], 1.0, -1.0), &[0, 1]);
        assert_eq!(
            antipodal_matrix_a(&spec).unwrap().as_slice(),
            &[1.0, 1.0, 1.0, 1.0]
        );

        let spec = with_classes(block(&[1, 1, 1], 2.0, 0.5), &[0, 0, 1]);
        let a = antipodal_matrix_a(&spec).unwrap();
        assert_eq!(a.get(0, 1), 0.5);
        assert_eq!(a.get(0, 2), -0.5);
        assert_eq!(a.get(2, 2), 2.0);

        assert!(antipodal_matrix_a(&block(&[2], 1.0, 0.0)).is_err());
    }

    #[test]
    fn antipodal_spectrum_examples() {
        let s = antipodal_spectrum(&with_classes(block(&[1, 1], 1.0, -1.0), &[0, 1])).unwrap();
        assert_entries(&s, &[(0.0, 1), (2.0, 1)]);

        let spec = with_classes(block(&[2, 2], 1.0, -1.0), &[0, 1]);
        let s = antipodal_spectrum(&spec).unwrap();
        assert_entries(&s, &[(0.0, 1), (4.0, 3)]);
        let num = numeric_spectrum(&antipodal_matrix_a(&spec).unwrap().laplacian()).unwrap();
        assert!(multiset_distance(&s.values(), &num) < 1e-12);

        // balanced populations: every local mode is (a − b)|G|
        let spec = with_classes(block(&[3, 1, 2, 2], 0.7, -0.4), &[0, 0, 1, 1]);
        let s = antipodal_spectrum(&spec).unwrap();
        for g in [2.0, 3.0] {
            let v = 1.1 * g;
            assert!(s.entries.iter().any(|e| (e.0 - v).abs() < 1e-12));
        }
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn antipodal_with_one_class_delegates() {
        let spec = with_classes(block(&[2, 3], 1.0, 0.3), &[1, 1]);
        assert_eq!(
            antipodal_spectrum(&spec).unwrap(),
            complete_sync_spectrum(&spec).unwrap()
        );
    }

    #[test]
    fn jacobian_at_sync_is_scaled_laplacian() {
        let spec = block(&[2, 3, 1], 1.2, -0.4);
        let k = build_block_network(&spec);
        let j = numeric_jacobian(&k, &PhaseState::new(vec![0.3; 6]).unwrap(), 0.0).unwrap();
        let want = k.laplacian().scaled(-1.0 / 6.0);
        assert!(j.max_abs_diff(&want) < 1e-14);
        assert_eq!(j.max_asymmetry(), 0.0);
    }

    #[test]
    fn rotating_wave_jacobian_is_circulant() {
        let j = rotating_wave_jacobian(&BandNetworkSpec::new(15, 3, 0.8).unwrap(), 2).unwrap();
        assert!(j.is_circulant(1e-14));
    }

    #[test]
    fn s_sum_examples() {
        for n in [7usize, 10, 16] {
            for k in 1..n {
                assert!((s_sum(n, 0, k, n) - n as f64).abs() < 1e-9 * n as f64);
            }
            for m in 1..n {
                if 2 * m != n {
                    assert!((s_sum(n, m, m, n) + 0.5 * n as f64).abs() < 1e-9 * n as f64);
                }
                for k in 0..n {
                    let direct = s_sum(n, m, k, n);
                    assert!((direct - s_full(m, k, n)).abs() < 1e-9 * n as f64);
                }
            }
        }
        // m = k = N/2 hits both indicators
        assert_eq!(s_full(5, 5, 10), -10.0);
        assert!((s_sum(10, 5, 5, 10) + 10.0).abs() < 1e-12);
    }

    #[test]
    fn rotating_wave_k0_is_zero() {
        for m in 0..9 {
            let l =
                rotating_wave_eigenvalues(&BandNetworkSpec::new(9, 2, 3.0).unwrap(), m).unwrap();
            assert_eq!(l[0], 0.0);
        }
    }

    #[test]
    fn rotating_wave_matches_scaled_jacobian() {
        let spec = BandNetworkSpec::new(12, 3, 0.4).unwrap();
        for m in 0..12 {
            let closed = rotating_wave_eigenvalues(&spec, m).unwrap();
            let num: Vec<f64> = numeric_spectrum(&rotating_wave_jacobian(&spec, m).unwrap())
                .unwrap()
                .into_iter()
                .map(|v| v * 12.0)
                .collect();
            assert!(multiset_distance(&closed, &num) < 1e-10, "m={m}");
        }
    }

    #[test]
    fn admissible_examples() {
        assert!(!admissible_p(100, 10, 2).unwrap().is_empty());
        assert!(admissible_p(100, 40, 4).unwrap().is_empty());
        let mut prev = 0.0;
        for w in 1..=49 {
            match admissible_p(100, w, 0).unwrap() {
                AdmissiblePRange::UpperBounded { upper } => {
                    assert!(upper >= prev, "w={w}");
                    prev = upper;
                }
                other => panic!("w={w}: {other:?}"),
            }
        }
    }

    #[test]
    fn admissible_m1_w10_is_stable_at_lower_bound() {
        let r = admissible_p(100, 10, 1).unwrap();
        let lo = r.lower().unwrap();
        let p = r.upper().map_or(lo * 1.5 + 0.1, |u| 0.5 * (lo + u));
        let l = rotating_wave_eigenvalues(&BandNetworkSpec::new(100, 10, p).unwrap(), 1).unwrap();
        assert!(l.iter().all(|&v| v <= 1e-9));
    }

    #[test]
    fn verdict_examples() {
        assert_eq!(
            stability_verdict(&[0.0, -1.0, -2.0], 1e-9).unwrap(),
            StabilityVerdict::Stable
        );
        assert_eq!(
            stability_verdict(&[0.0, 0.5, -2.0], 1e-9).unwrap(),
            StabilityVerdict::Unstable(1)
        );
        assert_eq!(
            stability_verdict(&[0.0, 0.0, -1.0], 1e-9).unwrap(),
            StabilityVerdict::Marginal(1)
        );
        assert_eq!(
            stability_verdict(&[-1.0, 2.0], 1e-9),
            Err(Error::MissingRotationMode)
        );
    }

    #[test]
    fn region_matches_spectrum_examples() {
        assert_eq!(
            sync_stability_region(1.0, -1.0, &[3, 3], 1e-9),
            StabilityVerdict::Unstable(1)
        );
        assert_eq!(
            sync_stability_region(1.0, 0.0, &[4], 1e-9),
            StabilityVerdict::Stable
        );
        // a < 0 < b: boundary at g/N = b/(b−a) = 0.5
        assert_eq!(
            sync_stability_region(-1.0, 1.0, &[3, 7], 1e-9),
            StabilityVerdict::Unstable(6)
        );
        assert_eq!(
            sync_stability_region(-1.0, 1.0, &[4, 4, 2], 1e-9),
            StabilityVerdict::Stable
        );
        assert_eq!(
            sync_stability_region(-1.0, 1.0, &[5, 5], 1e-9),
            StabilityVerdict::Marginal(8)
        );
    }
}
