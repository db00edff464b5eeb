//! Mann-Whitney U test with Bonferroni-corrected verdicts.

use serde::{Deserialize, Serialize};

/// Largest group size for which p-values are computed exactly.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    /// `a` tends to be larger than `b`.
    Greater,
    Less,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    pub u: f64,
    pub p: f64,
    pub exact: bool,
}

/// #{(i, j): a_i > b_j} + ½ #{(i, j): a_i = b_j}.
pub fn u_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut twice = 0u64;
    for x in a {
        for y in b {
            twice += if x > y { 2 } else if x == y { 1 } else { 0 };
        }
    }
    twice as f64 / 2.0
}

/// Counts of 2U over all ways of drawing `n_a` values from the pooled
/// sample, indexed by 2U. Tie groups are chosen from as blocks so ties are
/// handled exactly.
fn exact_distribution(a: &[f64], b: &[f64]) -> Vec<u128> {
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let mut groups: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        groups.push(j - i);
        i = j;
    }
    let (na, nb) = (a.len(), b.len());
    let max2u = 2 * na * nb;
    // dist[k][s]: ways to have chosen k values for `a` so far with 2U = s
    let mut dist = vec![vec![0u128; max2u + 1]; na + 1];
    dist[0][0] = 1;
    let mut seen = 0;
    for &c in &groups {
        let mut next = vec![vec![0u128; max2u + 1]; na + 1];
        for k in 0..=na.min(seen) {
            let b_below = seen - k;
            if b_below > nb {
                continue;
            }
            for (s, &ways) in dist[k].iter().enumerate() {
                if ways == 0 {
                    continue;
                }
                for take in 0..=c.min(na - k) {
                    let ties = c - take;
                    if b_below + ties > nb {
                        continue;
                    }
                    let add = take * (2 * b_below + ties);
                    next[k + take][s + add] += ways * binomial(c, take);
                }
            }
        }
        dist = next;
        seen += c;
    }
    dist.swap_remove(na)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn exact_p(a: &[f64], b: &[f64], u: f64, alt: Alternative) -> f64 {
    let dist = exact_distribution(a, b);
    let total: u128 = dist.iter().sum();
    let twice = (2.0 * u).round() as usize;
    let upper: u128 = dist[twice..].iter().sum();
    let lower: u128 = dist[..=twice].iter().sum();
    let frac = |n: u128| n as f64 / total as f64;
    match alt {
        Alternative::Greater => frac(upper),
        Alternative::Less => frac(lower),
        Alternative::TwoSided => (2.0 * frac(upper.min(lower))).min(1.0),
    }
}

fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

fn normal_p(a: &[f64], b: &[f64], u: f64, alt: Alternative) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let mu = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        // every value tied: U sits at its mean with certainty
        return 1.0;
    }
    let sd = var.sqrt();
    let greater = normal_sf((u - mu - 0.5) / sd);
    let less = normal_sf((mu - u - 0.5) / sd);
    match alt {
        Alternative::Greater => greater,
        Alternative::Less => less,
        Alternative::TwoSided => (2.0 * greater.min(less)).min(1.0),
    }
}

/// U statistic and p-value. `Auto` is exact when neither sample exceeds
/// [`EXACT_LIMIT`] values and otherwise uses the tie-corrected normal
/// approximation with continuity correction. Panics on an empty sample.
pub fn mann_whitney_with(a: &[f64], b: &[f64], alt: Alternative, method: Method) -> MannWhitney {
    assert!(!a.is_empty() && !b.is_empty(), "samples must be non-empty");
    let u = u_statistic(a, b);
    let exact = match method {
        Method::Auto => a.len().max(b.len()) <= EXACT_LIMIT,
        Method::Exact => true,
        Method::Normal => false,
    };
    let p = if exact { exact_p(a, b, u, alt) } else { normal_p(a, b, u, alt) };
    MannWhitney { u, p, exact }
}

pub fn mann_whitney(a: &[f64], b: &[f64], alt: Alternative) -> MannWhitney {
    mann_whitney_with(a, b, alt, Method::Auto)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Better,
    Same,
    Worse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub u: f64,
    /// One-sided p for `a` greater than `b`.
    pub p_greater: f64,
    pub p_less: f64,
    pub alpha: f64,
    pub comparisons: usize,
    pub corrected_alpha: f64,
    pub verdict: Verdict,
}

/// Compares sample `a` against `b` at level `alpha / comparisons`.
pub fn significance(a: &[f64], b: &[f64], alpha: f64, comparisons: usize) -> Significance {
    let g = mann_whitney(a, b, Alternative::Greater);
    let l = mann_whitney(a, b, Alternative::Less);
    let corrected = alpha / comparisons.max(1) as f64;
    let verdict = if g.p < corrected {
        Verdict::Better
    } else if l.p < corrected {
        Verdict::Worse
    } else {
        Verdict::Same
    };
    Significance {
        u: g.u,
        p_greater: g.p,
        p_less: l.p,
        alpha,
        comparisons,
        corrected_alpha: corrected,
        verdict,
    }
}
