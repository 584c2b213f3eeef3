//! Metric certification of point sets: packing and covering radii,
//! relative density, syndeticity.
//!
//! The metric is Euclidean on the physical space. Packing radii are computed
//! exactly; covering radii are grid estimates with a reported uncertainty.

use serde_json::json;
use std::cmp::Ordering;

use crate::arith::{vec_norm_sq, vec_sub, QuadRat};
use crate::boxes::ExactBox;
use crate::cert::{CertKind, Certificate, Verdict};
use crate::error::{CoreError, Result};
use crate::scheme::{LatticeElement, PointSet};

/// Delone parameters of a truncated point set. `r` is the exact minimum
/// pairwise distance (its square is stored exactly; for `d = 1` the gap
/// itself is exact). `big_r` is a grid estimate of the covering radius with
/// additive uncertainty `grid_step * sqrt(d)`.
#[derive(Clone, Debug)]
pub struct DeloneParams {
    pub r: f64,
    pub r_exact: Option<QuadRat>,
    pub r_sq_exact: QuadRat,
    pub big_r: f64,
    pub big_r_uncertainty: f64,
    pub grid_step: f64,
    pub border_margin: f64,
    pub shrunk_region: ExactBox,
}

impl DeloneParams {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "r": self.r,
            "r_exact": self.r_exact.as_ref().map(|q| q.to_string()),
            "r_sq_exact": self.r_sq_exact.to_string(),
            "R": self.big_r,
            "R_uncertainty": self.big_r_uncertainty,
            "grid_step": self.grid_step,
            "border_margin": self.border_margin,
            "shrunk_region": self.shrunk_region.to_strings(),
        })
    }
}

fn shrink_region_f64(region: &ExactBox, margin: f64) -> Vec<(f64, f64)> {
    region
        .lo
        .iter()
        .zip(&region.hi)
        .map(|(l, h)| (l.to_f64() + margin, h.to_f64() - margin))
        .collect()
}

/// Exact minimum pairwise distance. Sorted consecutive gaps for `d = 1`;
/// in higher dimensions a float prefilter picks the near-minimal pairs and
/// the winner is confirmed exactly.
fn min_pairwise(points: &[LatticeElement], d: usize) -> Result<(QuadRat, Option<QuadRat>)> {
    if points.len() < 2 {
        return Err(CoreError::InsufficientPoints);
    }
    if d == 1 {
        // Elements are sorted by physical coordinate.
        let mut best: Option<QuadRat> = None;
        for pair in points.windows(2) {
            let gap = pair[1].phys_exact[0].clone() - pair[0].phys_exact[0].clone();
            best = Some(match best {
                None => gap,
                Some(b) => QuadRat::min_of(b, gap)?,
            });
        }
        let gap = best.unwrap();
        return Ok((gap.clone() * gap.clone(), Some(gap)));
    }
    let mut best_f = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let ds: f64 = points[i]
                .phys
                .iter()
                .zip(&points[j].phys)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            best_f = best_f.min(ds);
        }
    }
    let cutoff = best_f * (1.0 + 1e-9) + 1e-12;
    let mut best: Option<QuadRat> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let ds: f64 = points[i]
                .phys
                .iter()
                .zip(&points[j].phys)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if ds <= cutoff {
                let diff = vec_sub(&points[i].phys_exact, &points[j].phys_exact);
                let sq = vec_norm_sq(&diff);
                best = Some(match best {
                    None => sq,
                    Some(b) => QuadRat::min_of(b, sq)?,
                });
            }
        }
    }
    Ok((best.unwrap(), None))
}

fn grid_points(shrunk: &[(f64, f64)], step: f64) -> Vec<Vec<f64>> {
    let counts: Vec<usize> = shrunk
        .iter()
        .map(|&(l, h)| if h < l { 0 } else { ((h - l) / step).floor() as usize + 1 })
        .collect();
    if counts.iter().any(|&c| c == 0) {
        return Vec::new();
    }
    let total: usize = counts.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; shrunk.len()];
    loop {
        out.push(
            idx.iter()
                .zip(shrunk)
                .map(|(&i, &(l, _))| l + i as f64 * step)
                .collect(),
        );
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn nearest_distance(point: &[f64], sorted_phys: &[f64], all: &[LatticeElement]) -> f64 {
    if point.len() == 1 {
        let x = point[0];
        match sorted_phys.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(_) => 0.0,
            Err(pos) => {
                let mut best = f64::INFINITY;
                if pos > 0 {
                    best = best.min(x - sorted_phys[pos - 1]);
                }
                if pos < sorted_phys.len() {
                    best = best.min(sorted_phys[pos] - x);
                }
                best
            }
        }
    } else {
        all.iter()
            .map(|e| {
                e.phys
                    .iter()
                    .zip(point)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Packing radius (exact) and covering radius (grid estimate) of a point
/// set, measured away from the truncation boundary.
pub fn delone_parameters(
    ps: &PointSet,
    border_margin: f64,
    grid_step: Option<f64>,
) -> Result<DeloneParams> {
    let d = ps.scheme.d;
    let shrunk = shrink_region_f64(&ps.region, border_margin);
    if shrunk.iter().any(|&(l, h)| h < l) {
        return Err(CoreError::EmptyShrunkRegion);
    }
    let inside: Vec<&LatticeElement> = ps
        .elements
        .iter()
        .filter(|e| e.phys.iter().zip(&shrunk) .all(|(x, &(l, h))| *x >= l && *x <= h))
        .collect();
    if inside.is_empty() {
        return Err(CoreError::EmptyShrunkRegion);
    }
    let (r_sq_exact, r_exact) = min_pairwise(&ps.elements, d)?;
    let r = r_sq_exact.to_f64().sqrt();
    let step = grid_step.unwrap_or(r / 10.0);
    let sorted_phys = ps.phys_f64_sorted();
    let mut big_r: f64 = 0.0;
    for g in grid_points(&shrunk, step) {
        big_r = big_r.max(nearest_distance(&g, &sorted_phys, &ps.elements));
    }
    let margin_q = QuadRat::from_rational(
        num_rational::BigRational::from_float(border_margin)
            .ok_or(CoreError::DivisionByZero)?,
    );
    Ok(DeloneParams {
        r,
        r_exact,
        r_sq_exact,
        big_r,
        big_r_uncertainty: step * (d as f64).sqrt(),
        grid_step: step,
        border_margin,
        shrunk_region: ps.region.shrink(&margin_q),
    })
}

/// PASS iff every grid point of the region shrunk by `R_claim` lies within
/// `R_claim` of some element. A FAIL certificate carries the uncovered grid
/// point.
pub fn certify_relative_dense(ps: &PointSet, r_claim: f64, grid_step: Option<f64>) -> Certificate {
    let step = grid_step.unwrap_or(r_claim / 10.0);
    let shrunk = shrink_region_f64(&ps.region, r_claim);
    let sorted_phys = ps.phys_f64_sorted();
    let params = json!({
        "R_claim": r_claim,
        "grid_step": step,
        "region": ps.region.to_strings(),
        "points": ps.len(),
    });
    let mut witness: Option<(Vec<f64>, f64)> = None;
    for g in grid_points(&shrunk, step) {
        let dist = nearest_distance(&g, &sorted_phys, &ps.elements);
        if dist > r_claim {
            witness = Some((g, dist));
            break;
        }
    }
    match witness {
        None => Certificate::new(
            CertKind::RelativeDense,
            Verdict::Pass,
            params,
            json!({"grid_covered": true}),
        ),
        Some((g, dist)) => Certificate::new(
            CertKind::RelativeDense,
            Verdict::Fail,
            params,
            json!({"uncovered_point": g, "nearest_distance": dist}),
        ),
    }
}

/// Finds a finite `F` inside the difference set with `Lambda ⊂ Sigma F` on
/// the shrunk region, by greedy set cover over bounded differences. The
/// returned certificate carries `F` and the verified region so the inclusion
/// can be re-checked by a naive double loop.
pub fn certify_syndetic(
    sigma: &PointSet,
    lambda: &PointSet,
    border_margin: f64,
    diff_bound: Option<f64>,
) -> Result<Certificate> {
    let diff_bound = diff_bound.unwrap_or(border_margin);
    let sigma_set = sigma.z_set();
    let lambda_set = lambda.z_set();
    if let Some(bad) = sigma_set.iter().find(|z| !lambda_set.contains(*z)) {
        return Err(CoreError::Precondition(format!(
            "sigma is not a subset of lambda: witness z = {bad:?}"
        )));
    }
    let shrunk = shrink_region_f64(&lambda.region, border_margin);
    let targets: Vec<&LatticeElement> = lambda
        .elements
        .iter()
        .filter(|e| e.phys.iter().zip(&shrunk).all(|(x, &(l, h))| *x >= l && *x <= h))
        .collect();
    let params = json!({
        "border_margin": border_margin,
        "diff_bound": diff_bound,
        "sigma_points": sigma.len(),
        "lambda_points": lambda.len(),
        "targets": targets.len(),
    });
    // Candidate differences per target.
    let mut cand_of_target: Vec<Vec<Vec<i64>>> = Vec::with_capacity(targets.len());
    for t in &targets {
        let mut cands = Vec::new();
        for s in &sigma.elements {
            let dist: f64 = t
                .phys
                .iter()
                .zip(&s.phys)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dist <= diff_bound {
                let f: Vec<i64> = t.z.iter().zip(&s.z).map(|(a, b)| a - b).collect();
                cands.push(f);
            }
        }
        if cands.is_empty() {
            return Ok(Certificate::new(
                CertKind::Syndetic,
                Verdict::Fail,
                params,
                json!({
                    "uncovered_lambda_z": t.z,
                    "uncovered_lambda_phys": t.phys,
                    "detail": "no sigma partner within the difference bound",
                }),
            ));
        }
        cand_of_target.push(cands);
    }
    // Greedy set cover; ties resolved by smaller physical norm then lex z.
    let mut uncovered: Vec<usize> = (0..targets.len()).collect();
    let mut f_set: Vec<Vec<i64>> = Vec::new();
    while !uncovered.is_empty() {
        use std::collections::BTreeMap;
        let mut gain: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
        for &ti in &uncovered {
            for f in &cand_of_target[ti] {
                *gain.entry(f.clone()).or_insert(0) += 1;
            }
        }
        let best = gain
            .iter()
            .max_by(|(fa, ga), (fb, gb)| {
                ga.cmp(gb)
                    .then_with(|| {
                        let na: f64 = phys_norm(lambda, fa);
                        let nb: f64 = phys_norm(lambda, fb);
                        nb.partial_cmp(&na).unwrap_or(Ordering::Equal)
                    })
                    .then_with(|| fb.cmp(fa))
            })
            .map(|(f, _)| f.clone())
            .expect("nonempty gain map");
        uncovered.retain(|&ti| !cand_of_target[ti].contains(&best));
        f_set.push(best);
    }
    f_set.sort();
    // Independent pointwise re-check of Lambda ⊂ Sigma F on the targets.
    for t in &targets {
        let ok = f_set.iter().any(|f| {
            let sz: Vec<i64> = t.z.iter().zip(f).map(|(a, b)| a - b).collect();
            sigma_set.contains(&sz)
        });
        if !ok {
            return Err(CoreError::Precondition(format!(
                "internal error: greedy cover missed target {:?}",
                t.z
            )));
        }
    }
    let f_json: Vec<serde_json::Value> = f_set
        .iter()
        .map(|f| {
            json!({
                "z": f,
                "phys": lambda.scheme.phys_of(f).iter().map(|q| q.to_f64()).collect::<Vec<f64>>(),
            })
        })
        .collect();
    Ok(Certificate::new(
        CertKind::Syndetic,
        Verdict::Pass,
        params,
        json!({"F": f_json, "F_size": f_set.len()}),
    ))
}

fn phys_norm(ps: &PointSet, z: &[i64]) -> f64 {
    ps.scheme
        .phys_of(z)
        .iter()
        .map(|q| q.to_f64() * q.to_f64())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ExactMat;
    use crate::scheme::test_support::*;
    use crate::scheme::Scheme;

    #[test]
    fn silver_delone_parameters() {
        let s = silver();
        let ps = s
            .enumerate_model_set(&window_sym("1/2"), &region("-100", "100"))
            .unwrap();
        let dp = delone_parameters(&ps, 10.0, None).unwrap();
        // Gaps take exactly the two values 1+sqrt2 and 2+sqrt2.
        assert_eq!(dp.r_exact.as_ref().unwrap(), &q("1+sqrt(2)"));
        let expected_r = (2.0 + 2f64.sqrt()) / 2.0;
        assert!((dp.big_r - expected_r).abs() <= dp.grid_step, "R={} vs {}", dp.big_r, expected_r);
        // Exhaustive gap census.
        let phys = ps.phys_f64_sorted();
        let g1 = 1.0 + 2f64.sqrt();
        let g2 = 2.0 + 2f64.sqrt();
        for w in phys.windows(2) {
            let gap = w[1] - w[0];
            assert!((gap - g1).abs() < 1e-9 || (gap - g2).abs() < 1e-9, "gap {gap}");
        }
    }

    #[test]
    fn integer_lattice_parameters() {
        let s = Scheme::new("int", 1, 1, ExactMat::identity(2).unwrap()).unwrap();
        let ps = s
            .enumerate_model_set(&window_sym("1/2"), &region("-50", "50"))
            .unwrap();
        let dp = delone_parameters(&ps, 5.0, Some(0.05)).unwrap();
        assert_eq!(dp.r_exact.as_ref().unwrap(), &q("1"));
        assert!((dp.big_r - 0.5).abs() <= 0.05);
    }

    #[test]
    fn single_point_is_an_error() {
        let s = silver();
        let ps = s.enumerate_model_set(&window_sym("1/2"), &region("0", "0")).unwrap();
        assert!(matches!(
            delone_parameters(&ps, 0.0, None),
            Err(CoreError::InsufficientPoints)
        ));
    }

    #[test]
    fn r_exact_cross_validated_against_full_difference_scan() {
        let s = silver();
        let ps = s
            .enumerate_model_set(&window_sym("1/2"), &region("-60", "60"))
            .unwrap();
        let dp = delone_parameters(&ps, 6.0, None).unwrap();
        let mut best: Option<QuadRat> = None;
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                let diff =
                    (ps.elements[i].phys_exact[0].clone() - ps.elements[j].phys_exact[0].clone())
                        .abs();
                best = Some(match best {
                    None => diff,
                    Some(b) => QuadRat::min_of(b, diff).unwrap(),
                });
            }
        }
        assert_eq!(dp.r_exact.unwrap(), best.unwrap());
    }

    #[test]
    fn delone_monotone_in_window() {
        let s = silver();
        let reg = region("-150", "150");
        let mut last_r = f64::INFINITY;
        let mut last_big_r = f64::INFINITY;
        for w in ["1/4", "1/2", "3/4"] {
            let ps = s.enumerate_model_set(&window_sym(w), &reg).unwrap();
            let dp = delone_parameters(&ps, 12.0, Some(0.05)).unwrap();
            assert!(dp.r <= last_r + 1e-9);
            assert!(dp.big_r <= last_big_r + 2.0 * dp.grid_step);
            last_r = dp.r;
            last_big_r = dp.big_r;
        }
    }

    #[test]
    fn relative_dense_pass_and_fail() {
        let s = silver();
        let ps = s
            .enumerate_model_set(&window_sym("1/2"), &region("-100", "100"))
            .unwrap();
        let cert = certify_relative_dense(&ps, 1.8, None);
        assert_eq!(cert.verdict, Verdict::Pass);
        let cert = certify_relative_dense(&ps, 1.5, None);
        assert_eq!(cert.verdict, Verdict::Fail);
        // The witness sits in a long gap: nearest distance beats the claim.
        let dist = cert.witnesses["nearest_distance"].as_f64().unwrap();
        assert!(dist > 1.5);
    }

    #[test]
    fn grid_itself_is_dense_at_step() {
        let s = Scheme::new("int", 1, 1, ExactMat::identity(2).unwrap()).unwrap();
        let ps = s
            .enumerate_model_set(&window_sym("1/2"), &region("-20", "20"))
            .unwrap();
        let cert = certify_relative_dense(&ps, 1.0, Some(1.0));
        assert_eq!(cert.verdict, Verdict::Pass);
    }

    #[test]
    fn syndetic_trivial_and_nested() {
        let s = silver();
        let reg = region("-60", "60");
        let lam = s.enumerate_model_set(&window_sym("1/2"), &reg).unwrap();
        let cert = certify_syndetic(&lam, &lam, 6.0, None).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        assert_eq!(cert.witnesses["F_size"], 1);
        assert_eq!(cert.witnesses["F"][0]["z"], json!([0, 0]));

        let sig = s.enumerate_model_set(&window_sym("1/4"), &reg).unwrap();
        let cert = certify_syndetic(&sig, &lam, 15.0, None).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass, "{}", cert.witnesses);
        let size = cert.witnesses["F_size"].as_u64().unwrap();
        assert!(size <= 3, "F has {size} elements");
    }

    #[test]
    fn syndetic_half_line_fails() {
        let s = silver();
        let reg = region("-60", "60");
        let lam = s.enumerate_model_set(&window_sym("1/2"), &reg).unwrap();
        let mut half = lam.clone();
        half.elements.retain(|e| e.phys[0] >= 0.0);
        let cert = certify_syndetic(&half, &lam, 6.0, Some(6.0)).unwrap();
        assert_eq!(cert.verdict, Verdict::Fail);
        assert!(cert.witnesses["uncovered_lambda_phys"][0].as_f64().unwrap() < 0.0);
    }

    #[test]
    fn syndetic_requires_subset() {
        let s = silver();
        let reg = region("-30", "30");
        let lam = s.enumerate_model_set(&window_sym("1/4"), &reg).unwrap();
        let big = s.enumerate_model_set(&window_sym("1/2"), &reg).unwrap();
        assert!(matches!(
            certify_syndetic(&big, &lam, 5.0, None),
            Err(CoreError::Precondition(_))
        ));
    }
}
