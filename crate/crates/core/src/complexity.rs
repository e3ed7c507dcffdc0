//! Closed-form hardness analytics over an arm-group decomposition, plus the
//! information-theoretic utilities used by the tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{epsilon_r, ArmGroupDecomposition};

/// ln of a group size with the convention ln 0 = ln 1 = 0, so vacuous terms
/// drop out of every sum and max.
#[inline]
fn ln_size(n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (n as f64).ln()
    }
}

/// Per-gap weight for the doubly-logarithmic sums: max(1, ln ln(1/gap)).
/// ln ln is negative or undefined for gaps above e^-e, hence the clamp.
#[inline]
pub fn lnln_clamped(gap: f64) -> f64 {
    let l = (1.0 / gap).ln();
    if l <= 1.0 {
        1.0
    } else {
        l.ln().max(1.0)
    }
}

/// Sum per-arm contributions in a canonical order so the result is exactly
/// invariant under arm relabeling.
fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    terms.iter().sum()
}

/// H = sum over arms of gap^-2.
pub fn h_term(d: &ArmGroupDecomposition) -> f64 {
    sorted_sum(d.gaps.iter().map(|g| g.powi(-2)).collect())
}

/// H~ = sum over arms of gap^-2 * max(1, ln ln gap^-1).
pub fn h_tilde(d: &ArmGroupDecomposition) -> f64 {
    sorted_sum(d.gaps.iter().map(|&g| g.powi(-2) * lnln_clamped(g)).collect())
}

/// Sum over levels i of |G^large_i| * max_{j<=i} eps_j^-2 ln|G^small_{>=j}|.
pub fn h_large_lb(d: &ArmGroupDecomposition) -> f64 {
    group_max_sum(d, true)
}

/// Mirror image of `h_large_lb` with the group roles swapped.
pub fn h_small_lb(d: &ArmGroupDecomposition) -> f64 {
    group_max_sum(d, false)
}

fn group_max_sum(d: &ArmGroupDecomposition, large_outer: bool) -> f64 {
    let (outer, count_other_ge): (_, &dyn Fn(u32) -> usize) = if large_outer {
        (&d.groups_large, &|r| d.count_small_ge(r))
    } else {
        (&d.groups_small, &|r| d.count_large_ge(r))
    };
    let mut total = 0.0;
    for (&i, members) in outer {
        let mut best = 0.0f64;
        for j in 1..=i {
            best = best.max(epsilon_r(j).powi(-2) * ln_size(count_other_ge(j)));
        }
        total += members.len() as f64 * best;
    }
    total
}

/// Cumulative form: sum over levels i of eps_i^-2 |G^large_{>=i}| ln|G^small_{>=i}|.
pub fn h_tilde_large_cumulative(d: &ArmGroupDecomposition) -> f64 {
    (1..=d.max_level)
        .map(|i| {
            epsilon_r(i).powi(-2) * d.count_large_ge(i) as f64 * ln_size(d.count_small_ge(i))
        })
        .sum()
}

pub fn h_tilde_small_cumulative(d: &ArmGroupDecomposition) -> f64 {
    (1..=d.max_level)
        .map(|i| {
            epsilon_r(i).powi(-2) * d.count_small_ge(i) as f64 * ln_size(d.count_large_ge(i))
        })
        .sum()
}

/// Per-level form: sum over levels i of |G^large_i| sum_{j<=i} eps_j^-2 ln|G^small_j|.
pub fn h_tilde_large_per_level(d: &ArmGroupDecomposition) -> f64 {
    group_inner_sum(d, true, &|j| d.count_small(j))
}

pub fn h_tilde_small_per_level(d: &ArmGroupDecomposition) -> f64 {
    group_inner_sum(d, false, &|j| d.count_large(j))
}

/// Double-sum form with the cumulative inner count; equals the cumulative
/// single-sum form exactly by interchanging the order of summation. Exposed
/// for the identity tests.
pub fn h_tilde_large_double_sum(d: &ArmGroupDecomposition) -> f64 {
    group_inner_sum(d, true, &|j| d.count_small_ge(j))
}

pub fn h_tilde_small_double_sum(d: &ArmGroupDecomposition) -> f64 {
    group_inner_sum(d, false, &|j| d.count_large_ge(j))
}

fn group_inner_sum(
    d: &ArmGroupDecomposition,
    large_outer: bool,
    inner_count: &dyn Fn(u32) -> usize,
) -> f64 {
    let outer = if large_outer {
        &d.groups_large
    } else {
        &d.groups_small
    };
    let mut total = 0.0;
    for (&i, members) in outer {
        let inner: f64 = (1..=i)
            .map(|j| epsilon_r(j).powi(-2) * ln_size(inner_count(j)))
            .sum();
        total += members.len() as f64 * inner;
    }
    total
}

/// KL divergence between unit-variance Gaussians: (mu1 - mu2)^2 / 2.
#[inline]
pub fn kl_gauss_unit(mu1: f64, mu2: f64) -> f64 {
    let d = mu1 - mu2;
    d * d / 2.0
}

/// Binary relative entropy d(x, y) = x ln(x/y) + (1-x) ln((1-x)/(1-y)).
/// Boundary conventions: d(0,y) = ln(1/(1-y)), d(1,y) = ln(1/y) by
/// continuity; y on the boundary with x interior saturates to +infinity.
pub fn bin_rel_entropy(x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::validation(format!(
            "bin_rel_entropy arguments ({}, {}) outside [0, 1]",
            x, y
        )));
    }
    let part = |a: f64, b: f64| -> f64 {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    };
    Ok(part(x, y) + part(1.0 - x, 1.0 - y))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelBreakdown {
    pub level: u32,
    pub eps: f64,
    pub n_large: usize,
    pub n_small: usize,
    pub n_large_ge: usize,
    pub n_small_ge: usize,
}

/// Every hardness term for one instance; `h_tilde_large` / `h_tilde_small`
/// are the cumulative variants, the per-level variants ride alongside.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub h: f64,
    pub h_tilde: f64,
    pub h_large_lb: f64,
    pub h_small_lb: f64,
    pub h_tilde_large: f64,
    pub h_tilde_small: f64,
    pub h_tilde_large_per_level: f64,
    pub h_tilde_small_per_level: f64,
    pub h_ln_k: f64,
    pub ratio_vs_lb_lnln_n: f64,
    pub ratio_vs_h_ln_k: f64,
    pub per_level_breakdown: Vec<LevelBreakdown>,
}

impl ComplexityReport {
    pub fn from_decomposition(d: &ArmGroupDecomposition, k: usize) -> Self {
        let n = d.gaps.len();
        let h = h_term(d);
        let htl = h_tilde_large_cumulative(d);
        let hts = h_tilde_small_cumulative(d);
        let hl = h_large_lb(d);
        let hs = h_small_lb(d);
        let upper = htl + hts;
        let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
        ComplexityReport {
            h,
            h_tilde: h_tilde(d),
            h_large_lb: hl,
            h_small_lb: hs,
            h_tilde_large: htl,
            h_tilde_small: hts,
            h_tilde_large_per_level: h_tilde_large_per_level(d),
            h_tilde_small_per_level: h_tilde_small_per_level(d),
            h_ln_k: h * (k as f64).ln(),
            ratio_vs_lb_lnln_n: ratio(upper, (hl + hs) * lnln_clamped(1.0 / n as f64)),
            ratio_vs_h_ln_k: ratio(upper, h * (k as f64).ln().max(1.0)),
            per_level_breakdown: (1..=d.max_level)
                .map(|r| LevelBreakdown {
                    level: r,
                    eps: epsilon_r(r),
                    n_large: d.count_large(r),
                    n_small: d.count_small(r),
                    n_large_ge: d.count_large_ge(r),
                    n_small_ge: d.count_small_ge(r),
                })
                .collect(),
        }
    }

    /// Aligned-text rendering for the CLI.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mut row = |name: &str, v: f64| {
            out.push_str(&format!("{:<28} {:>18.9}\n", name, v));
        };
        row("H", self.h);
        row("H_tilde", self.h_tilde);
        row("H_large_lb", self.h_large_lb);
        row("H_small_lb", self.h_small_lb);
        row("H_tilde_large (cumulative)", self.h_tilde_large);
        row("H_tilde_small (cumulative)", self.h_tilde_small);
        row("H_tilde_large (per-level)", self.h_tilde_large_per_level);
        row("H_tilde_small (per-level)", self.h_tilde_small_per_level);
        row("H * ln k", self.h_ln_k);
        row("ratio vs lb*lnln(n)", self.ratio_vs_lb_lnln_n);
        row("ratio vs H*ln(k)", self.ratio_vs_h_ln_k);
        out.push_str(&format!(
            "{:<6} {:>12} {:>8} {:>8} {:>10} {:>10}\n",
            "level", "eps", "large", "small", "large_ge", "small_ge"
        ));
        for b in &self.per_level_breakdown {
            out.push_str(&format!(
                "{:<6} {:>12.6} {:>8} {:>8} {:>10} {:>10}\n",
                b.level, b.eps, b.n_large, b.n_small, b.n_large_ge, b.n_small_ge
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate_appendix_a;
    use crate::instance::Instance;
    use crate::arm::ArmSpec;

    fn mini() -> ArmGroupDecomposition {
        generate_appendix_a(4, 1.0 / 16.0)
            .unwrap()
            .decompose_groups()
            .unwrap()
    }

    #[test]
    fn h_appendix_a_mini() {
        assert!((h_term(&mini()) - 209.92).abs() < 1e-9);
    }

    #[test]
    fn h_single_pair() {
        let i = Instance::new(
            vec![ArmSpec::gaussian(0, 0.5), ArmSpec::gaussian(1, 0.0)],
            1,
        )
        .unwrap();
        assert!((h_term(&i.decompose_groups().unwrap()) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn h_large_lb_appendix_a_mini() {
        // both levels see inner max at j=1: 4 ln 5; 5 arms total on the large side
        let want = 20.0 * 5.0f64.ln();
        assert!((h_large_lb(&mini()) - want).abs() < 1e-9);
        assert!((h_small_lb(&mini()) - want).abs() < 1e-9);
    }

    #[test]
    fn h_tilde_cumulative_appendix_a_mini() {
        let d = mini();
        let want = 20.0 * 5.0f64.ln(); // level 1 only; levels 2,3 have ln 1 = 0
        assert!((h_tilde_large_cumulative(&d) - want).abs() < 1e-9);
        assert!((h_tilde_small_cumulative(&d) - want).abs() < 1e-9);
    }

    #[test]
    fn lnln_clamp() {
        // gap 1/8: ln ln 8 < 1, clamped
        assert_eq!(lnln_clamped(0.125), 1.0);
        // gap e^-e: exactly 1
        let g = (-std::f64::consts::E).exp();
        assert!((lnln_clamped(g) - 1.0).abs() < 1e-12);
        // deep gap: unclamped and > 1
        assert!(lnln_clamped(1e-6) > 1.0);
        let d = mini();
        assert!(h_tilde(&d) >= h_term(&d));
    }

    #[test]
    fn h_tilde_tracks_doubly_log_growth() {
        // ratio to n + eps^-2 max(1, ln ln eps^-1) stays in a narrow band
        // as the middle gap shrinks
        let n = 8usize;
        let mut ratios = Vec::new();
        for e in 4..=10 {
            let eps = 0.5f64.powi(e);
            let d = generate_appendix_a(n, eps)
                .unwrap()
                .decompose_groups()
                .unwrap();
            let target = n as f64 + eps.powi(-2) * lnln_clamped(eps);
            ratios.push(h_tilde(&d) / target);
        }
        for &r in &ratios {
            assert!((0.25..=2.0).contains(&r), "ratio {}", r);
        }
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min <= 4.0, "band [{}, {}]", min, max);
    }

    #[test]
    fn interchange_identity_mini() {
        let d = mini();
        let lhs = h_tilde_large_double_sum(&d);
        let rhs = h_tilde_large_cumulative(&d);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn permutation_invariance() {
        let i = generate_appendix_a(4, 1.0 / 16.0).unwrap();
        let (p, _) = i.permute(1234);
        let a = ComplexityReport::from_decomposition(&i.decompose_groups().unwrap(), i.k);
        let b = ComplexityReport::from_decomposition(&p.decompose_groups().unwrap(), p.k);
        assert_eq!(a.h, b.h);
        assert_eq!(a.h_tilde, b.h_tilde);
        assert_eq!(a.h_large_lb, b.h_large_lb);
        assert_eq!(a.h_tilde_large, b.h_tilde_large);
    }

    #[test]
    fn kl_examples() {
        assert!((kl_gauss_unit(0.5, 0.3) - 0.02).abs() < 1e-15);
        assert_eq!(kl_gauss_unit(0.4, 0.4), 0.0);
        assert_eq!(kl_gauss_unit(0.1, 0.3), kl_gauss_unit(0.3, 0.1));
    }

    #[test]
    fn bin_rel_entropy_examples() {
        assert_eq!(bin_rel_entropy(0.3, 0.3).unwrap(), 0.0);
        let d = bin_rel_entropy(0.75, 0.25).unwrap();
        assert!((d - 0.5 * 3.0f64.ln()).abs() < 1e-12);
        // boundary conventions
        assert!((bin_rel_entropy(0.0, 0.5).unwrap() - 2.0f64.ln()).abs() < 1e-12);
        assert!((bin_rel_entropy(1.0, 0.5).unwrap() - 2.0f64.ln()).abs() < 1e-12);
        assert!(bin_rel_entropy(0.3, 0.0).unwrap().is_infinite());
        assert!(bin_rel_entropy(0.3, 1.0).unwrap().is_infinite());
        assert!(bin_rel_entropy(1.5, 0.3).is_err());
        assert!(bin_rel_entropy(0.3, -0.1).is_err());
    }

    #[test]
    fn fact2_monotone_spot_checks() {
        // 0 <= y <= y0 <= x0 <= x <= 1 implies d(x,y) >= d(x0,y0)
        let quads = [
            (0.9, 0.1, 0.6, 0.4),
            (0.8, 0.05, 0.5, 0.3),
            (1.0, 0.0, 0.7, 0.2),
        ];
        for &(x, y, x0, y0) in &quads {
            let outer = bin_rel_entropy(x, y).unwrap();
            let inner = bin_rel_entropy(x0, y0).unwrap();
            assert!(outer >= inner - 1e-12, "({},{}) vs ({},{})", x, y, x0, y0);
        }
    }
}
