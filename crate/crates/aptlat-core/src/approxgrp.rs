//! Approximate-subgroup certification and Meyer-set machinery: the finite
//! set `F` with `Lambda^2 ⊂ Lambda F`, quasi-commensurator witnesses,
//! enlargements, and the enveloping-group index.
//!
//! Window-level evidence is produced by an exact greedy box covering; the
//! point-level inclusions are then re-verified exhaustively on a region. The
//! point-level check is the authoritative one.

use rayon::prelude::*;
use serde_json::json;
use std::cmp::Ordering;

use crate::arith::{lattice_index, vec_add, vec_norm_sq, QuadRat};
use crate::boxes::{ExactBox, Window};
use crate::cert::{CertKind, Certificate, Verdict};
use crate::error::{CoreError, Result};
use crate::scheme::{LatticeElement, Scheme};

pub const DEFAULT_CANDIDATE_ZBOUND: i64 = 5;
const MAX_COVER_STEPS: usize = 64;

#[derive(Clone, Debug)]
struct CoverCandidate {
    z: Vec<i64>,
    tau: Vec<QuadRat>,
    tau_norm_sq: QuadRat,
    phys_norm_sq: QuadRat,
}

impl CoverCandidate {
    fn build(scheme: &Scheme, z: Vec<i64>) -> CoverCandidate {
        let tau = scheme.internal_of(&z);
        let phys = scheme.phys_of(&z);
        CoverCandidate {
            tau_norm_sq: vec_norm_sq(&tau),
            phys_norm_sq: vec_norm_sq(&phys),
            tau,
            z,
        }
    }

    fn is_identity(&self) -> bool {
        self.z.iter().all(|&v| v == 0)
    }
}

/// Greedy pick order: larger gain, then outward reach (larger |tau|), then
/// smaller physical norm, then lexicographic z. The outward preference makes
/// the greedy close the far ends of the target first and keeps `F` small.
fn better_candidate(
    gain_a: &QuadRat,
    a: &CoverCandidate,
    gain_b: &QuadRat,
    b: &CoverCandidate,
) -> Ordering {
    match gain_a.try_cmp(gain_b).expect("common field") {
        Ordering::Equal => {}
        o => return o,
    }
    match a.tau_norm_sq.try_cmp(&b.tau_norm_sq).expect("common field") {
        Ordering::Equal => {}
        o => return o,
    }
    match b.phys_norm_sq.try_cmp(&a.phys_norm_sq).expect("common field") {
        Ordering::Equal => {}
        o => return o,
    }
    b.z.cmp(&a.z)
}

struct CoverOutcome {
    chosen: Vec<usize>,
    /// Newly covered pieces of the target, per chosen candidate.
    covered: Vec<Vec<ExactBox>>,
    complete: bool,
}

/// Covers the target boxes by translates `shape + tau(candidate)`, greedily.
/// When `seed_identity` is set, the identity candidate is taken first
/// unconditionally (the certified `F` must contain it).
fn greedy_cover(
    target: &[ExactBox],
    shape: &Window,
    cands: &[CoverCandidate],
    seed_identity: bool,
) -> CoverOutcome {
    let mut uncovered: Vec<ExactBox> = target.to_vec();
    let mut chosen = Vec::new();
    let mut covered = Vec::new();
    let mut used = vec![false; cands.len()];

    let apply = |idx: usize, uncovered: &mut Vec<ExactBox>| {
        let translate = shape.translate(&cands[idx].tau);
        let mut next = Vec::new();
        let mut newly = Vec::new();
        for u in uncovered.drain(..) {
            let mut pieces = vec![u];
            for b in &translate.boxes {
                let mut rest = Vec::new();
                for p in pieces {
                    let inter = p.intersect(b);
                    if !inter.is_empty() && inter.volume().sign() > 0 {
                        newly.push(inter);
                    }
                    rest.extend(p.subtract(b));
                }
                pieces = rest;
            }
            next.extend(pieces);
        }
        *uncovered = next;
        newly
    };

    if seed_identity {
        if let Some(idx) = cands.iter().position(|c| c.is_identity()) {
            used[idx] = true;
            let newly = apply(idx, &mut uncovered);
            chosen.push(idx);
            covered.push(newly);
        }
    }
    for _ in 0..MAX_COVER_STEPS {
        if uncovered.is_empty() {
            break;
        }
        let mut best: Option<(usize, QuadRat)> = None;
        for (idx, cand) in cands.iter().enumerate() {
            if used[idx] {
                continue;
            }
            let translate = shape.translate(&cand.tau);
            let mut gain = QuadRat::zero();
            for u in &uncovered {
                // Uncovered boxes are interior-disjoint, and so are the
                // shape boxes, so intersection volumes add up exactly.
                for b in &translate.boxes {
                    gain += u.intersect(b).volume();
                }
            }
            if gain.sign() <= 0 {
                continue;
            }
            best = match best {
                None => Some((idx, gain)),
                Some((bi, bg)) => {
                    if better_candidate(&gain, cand, &bg, &cands[bi]) == Ordering::Greater {
                        Some((idx, gain))
                    } else {
                        Some((bi, bg))
                    }
                }
            };
        }
        let Some((idx, _)) = best else { break };
        used[idx] = true;
        let newly = apply(idx, &mut uncovered);
        chosen.push(idx);
        covered.push(newly);
    }
    CoverOutcome { chosen, covered, complete: uncovered.is_empty() }
}

/// All integer vectors with sup-norm at most `bound`.
fn z_cube(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut z = vec![-bound; n];
    loop {
        out.push(z.clone());
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            z[k] += 1;
            if z[k] <= bound {
                break;
            }
            z[k] = -bound;
            k += 1;
        }
    }
}

/// Evidence that `Lambda` is an approximate subgroup: a finite `F` with an
/// exact window covering `W + W ⊆ ∪ (tau(f) + W)` and the point-level
/// inclusion `Lambda^2 ∩ (checked pairs) ⊂ Lambda F`.
#[derive(Debug)]
pub struct ApproxSubgroupCert {
    pub verdict: Verdict,
    pub f: Vec<LatticeElement>,
    /// Membership level of each f: 0 for the identity, k when f is a sum of
    /// k window elements (our candidates keep k <= 2).
    pub f_levels: Vec<u32>,
    pub verified_region: ExactBox,
    pub window_cover: Vec<(Vec<i64>, Vec<ExactBox>)>,
    pub pairs_checked: usize,
    pub point_witness: Option<(Vec<i64>, Vec<i64>)>,
}

impl ApproxSubgroupCert {
    pub fn certificate(&self, scheme: &Scheme, window: &Window) -> Certificate {
        Certificate::new(
            CertKind::ApproxSubgroup,
            self.verdict,
            json!({
                "scheme": scheme.name,
                "window": window.to_file(),
                "region": self.verified_region.to_strings(),
            }),
            json!({
                "F": self.f.iter().zip(&self.f_levels).map(|(e, lvl)| json!({
                    "z": e.z,
                    "phys": e.phys,
                    "internal": e.internal.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                    "level": lvl,
                })).collect::<Vec<_>>(),
                "window_cover": self.window_cover.iter().map(|(z, boxes)| json!({
                    "f_z": z,
                    "covered": boxes.iter().map(|b| b.to_strings()).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "pairs_checked": self.pairs_checked,
                "point_witness": self.point_witness.as_ref().map(|(a, b)| json!({
                    "lambda_z": a, "mu_z": b,
                })),
            }),
        )
    }
}

/// Certifies `Lambda^2 ⊂ Lambda F` for a finite `F` found by greedy exact
/// covering of `W + W` with window translates. Candidate `tau(f)` values are
/// drawn from pairwise sums of window elements with `|z|_inf <= cand_zbound`.
pub fn certify_approximate_subgroup(
    scheme: &Scheme,
    window: &Window,
    region: &ExactBox,
    cand_zbound: i64,
) -> Result<ApproxSubgroupCert> {
    if !window.is_symmetric_exact() {
        return Err(CoreError::Precondition("window must be symmetric".into()));
    }
    if !window.has_dense_interior() {
        return Err(CoreError::Precondition(
            "window must have dense interior (degenerate boxes rejected)".into(),
        ));
    }
    let zero = vec![QuadRat::zero(); scheme.m];
    if !window.contains(&zero) {
        return Err(CoreError::Precondition("window must contain 0".into()));
    }
    // Window elements with small coordinates, then their pairwise sums.
    let n = scheme.dim_total();
    let small: Vec<Vec<i64>> = z_cube(n, cand_zbound)
        .into_iter()
        .filter(|z| window.contains(&scheme.internal_of(z)))
        .collect();
    let mut sums = std::collections::BTreeSet::new();
    for a in &small {
        for b in &small {
            sums.insert(vec_add_i64(a, b));
        }
    }
    let cands: Vec<CoverCandidate> = sums
        .into_iter()
        .map(|z| CoverCandidate::build(scheme, z))
        .collect();
    let target = window.minkowski_sum(window);
    let outcome = greedy_cover(&target.boxes, window, &cands, true);
    if !outcome.complete {
        return Ok(ApproxSubgroupCert {
            verdict: Verdict::Inconclusive,
            f: Vec::new(),
            f_levels: Vec::new(),
            verified_region: region.clone(),
            window_cover: Vec::new(),
            pairs_checked: 0,
            point_witness: None,
        });
    }
    let f: Vec<LatticeElement> = outcome
        .chosen
        .iter()
        .map(|&i| scheme.element(cands[i].z.clone()))
        .collect();
    let f_levels: Vec<u32> = f
        .iter()
        .map(|e| {
            if e.is_zero() {
                0
            } else if window.contains(&e.internal) {
                1
            } else {
                2
            }
        })
        .collect();
    let window_cover: Vec<(Vec<i64>, Vec<ExactBox>)> = outcome
        .chosen
        .iter()
        .zip(outcome.covered)
        .map(|(&i, boxes)| (cands[i].z.clone(), boxes))
        .collect();

    // Point-level verification: every ordered product of window points on
    // the region factors through Lambda F.
    let lam = scheme.enumerate_model_set(window, region)?;
    let pairs: Vec<(usize, usize)> = (0..lam.len())
        .flat_map(|i| (0..lam.len()).map(move |j| (i, j)))
        .collect();
    let point_witness = pairs
        .par_iter()
        .find_first(|&&(i, j)| {
            let tau_sum = vec_add(&lam.elements[i].internal, &lam.elements[j].internal);
            !f.iter().any(|fe| {
                let shifted = crate::arith::vec_sub(&tau_sum, &fe.internal);
                window.contains(&shifted)
            })
        })
        .map(|&(i, j)| (lam.elements[i].z.clone(), lam.elements[j].z.clone()));
    let verdict = if point_witness.is_none() { Verdict::Pass } else { Verdict::Fail };
    Ok(ApproxSubgroupCert {
        verdict,
        f,
        f_levels,
        verified_region: region.clone(),
        window_cover,
        pairs_checked: pairs.len(),
        point_witness,
    })
}

fn vec_add_i64(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// A quasi-commensurator witness: finite `F_a` with
/// `tau(a) + W ⊆ ∪ (W + tau(f))`, which in the abelian case witnesses both
/// `a Sigma ⊂ Sigma F_a` and `Sigma a ⊂ F_a Sigma`.
#[derive(Debug)]
pub struct QcommWitness {
    pub a: Vec<i64>,
    pub f_a: Vec<LatticeElement>,
    pub complete: bool,
}

pub fn quasi_commensurator_witness(
    scheme: &Scheme,
    w_l: &Window,
    a: &LatticeElement,
    cand_zbound: i64,
) -> Result<QcommWitness> {
    let n = scheme.dim_total();
    let cands: Vec<CoverCandidate> = z_cube(n, cand_zbound)
        .into_iter()
        .map(|z| CoverCandidate::build(scheme, z))
        .collect();
    let target = w_l.translate(&a.internal);
    let outcome = greedy_cover(&target.boxes, w_l, &cands, false);
    if !outcome.complete {
        return Err(CoreError::Inconclusive);
    }
    Ok(QcommWitness {
        a: a.z.clone(),
        f_a: outcome
            .chosen
            .iter()
            .map(|&i| scheme.element(cands[i].z.clone()))
            .collect(),
        complete: true,
    })
}

/// The enlargement `Sigma_F = F Sigma ∪ Sigma F^(-1)` together with the
/// product bound set `F' = F_Sigma * F_0^3` from the covering witnesses, and
/// a pointwise verification of `(Sigma_F)^2 ⊂ Sigma_F F'` on the region.
#[derive(Debug)]
pub struct EnlargementCert {
    pub verdict: Verdict,
    pub sigma_f: Vec<LatticeElement>,
    pub f_prime: Vec<Vec<i64>>,
    pub f_prime_bound: usize,
    pub pairs_checked: usize,
    pub witness_pair: Option<(Vec<i64>, Vec<i64>)>,
}

impl EnlargementCert {
    pub fn certificate(&self, scheme: &Scheme) -> Certificate {
        Certificate::new(
            CertKind::Enlargement,
            self.verdict,
            json!({"scheme": scheme.name, "sigma_f_points": self.sigma_f.len()}),
            json!({
                "f_prime_size": self.f_prime.len(),
                "f_prime_bound": self.f_prime_bound,
                "pairs_checked": self.pairs_checked,
                "witness_pair": self.witness_pair,
            }),
        )
    }
}

pub fn enlarge(
    scheme: &Scheme,
    sigma_window: &Window,
    f_list: &[LatticeElement],
    region: &ExactBox,
    cand_zbound: i64,
) -> Result<EnlargementCert> {
    // Identity is always part of the enlarging set.
    let mut f_all: Vec<Vec<i64>> = vec![vec![0; scheme.dim_total()]];
    for f in f_list {
        if !f.is_zero() {
            f_all.push(f.z.clone());
        }
    }
    // Quasi-commensurator witnesses; a missing witness is a precondition
    // failure. F_0 collects the witnesses and their inverses.
    let mut f0: std::collections::BTreeSet<Vec<i64>> = std::collections::BTreeSet::new();
    f0.insert(vec![0; scheme.dim_total()]);
    for fz in &f_all {
        let fe = scheme.element(fz.clone());
        let w = quasi_commensurator_witness(scheme, sigma_window, &fe, cand_zbound)
            .map_err(|_| {
                CoreError::Precondition(format!("no quasi-commensurator witness for {fz:?}"))
            })?;
        for g in &w.f_a {
            f0.insert(g.z.clone());
            f0.insert(g.z_neg());
        }
    }
    // F_Sigma from the approximate-subgroup certificate of Sigma.
    let approx = certify_approximate_subgroup(scheme, sigma_window, region, cand_zbound)?;
    if approx.verdict == Verdict::Inconclusive {
        return Err(CoreError::Inconclusive);
    }
    let f_sigma: Vec<Vec<i64>> = approx.f.iter().map(|e| e.z.clone()).collect();
    let f0: Vec<Vec<i64>> = f0.into_iter().collect();
    let f_prime_bound = f_sigma.len() * f0.len().pow(3);
    let mut f_prime: std::collections::BTreeSet<Vec<i64>> = std::collections::BTreeSet::new();
    for s in &f_sigma {
        for g1 in &f0 {
            for g2 in &f0 {
                for g3 in &f0 {
                    let mut z = vec_add_i64(s, g1);
                    z = vec_add_i64(&z, g2);
                    z = vec_add_i64(&z, g3);
                    f_prime.insert(z);
                }
            }
        }
    }
    let f_prime: Vec<Vec<i64>> = f_prime.into_iter().collect();

    // Sigma_F membership is a pure window test, so products that leave the
    // region are still decided exactly.
    let in_sigma_f = |z: &[i64]| -> bool {
        f_all.iter().any(|f| {
            let zf: Vec<i64> = z.iter().zip(f).map(|(a, b)| a - b).collect();
            if sigma_window.contains(&scheme.internal_of(&zf)) {
                return true;
            }
            let zf: Vec<i64> = z.iter().zip(f).map(|(a, b)| a + b).collect();
            sigma_window.contains(&scheme.internal_of(&zf))
        })
    };

    // Sigma_F as a point set on the region.
    let pad = f_all
        .iter()
        .map(|f| phys_norm_f64(scheme, f))
        .fold(0.0f64, f64::max)
        .ceil() as i64
        + 1;
    let padded = ExactBox {
        lo: region.lo.iter().map(|l| l.clone() - QuadRat::from_int(pad)).collect(),
        hi: region.hi.iter().map(|h| h.clone() + QuadRat::from_int(pad)).collect(),
    };
    let sigma = scheme.enumerate_model_set(sigma_window, &padded)?;
    let mut sigma_f_set: std::collections::BTreeSet<Vec<i64>> = std::collections::BTreeSet::new();
    for f in &f_all {
        for s in &sigma.elements {
            let plus = vec_add_i64(&s.z, f);
            sigma_f_set.insert(plus);
            let minus: Vec<i64> = s.z.iter().zip(f).map(|(a, b)| a - b).collect();
            sigma_f_set.insert(minus);
        }
    }
    let sigma_f: Vec<LatticeElement> = sigma_f_set
        .into_iter()
        .map(|z| scheme.element(z))
        .filter(|e| region.contains(&e.phys_exact))
        .collect();

    // Verify (Sigma_F)^2 ⊂ Sigma_F F' on the region.
    let pairs: Vec<(usize, usize)> = (0..sigma_f.len())
        .flat_map(|i| (0..sigma_f.len()).map(move |j| (i, j)))
        .collect();
    let witness_pair = pairs
        .par_iter()
        .find_first(|&&(i, j)| {
            let prod = vec_add_i64(&sigma_f[i].z, &sigma_f[j].z);
            !f_prime.iter().any(|fp| {
                let rest: Vec<i64> = prod.iter().zip(fp).map(|(a, b)| a - b).collect();
                in_sigma_f(&rest)
            })
        })
        .map(|&(i, j)| (sigma_f[i].z.clone(), sigma_f[j].z.clone()));
    Ok(EnlargementCert {
        verdict: if witness_pair.is_none() { Verdict::Pass } else { Verdict::Fail },
        sigma_f,
        f_prime,
        f_prime_bound,
        pairs_checked: pairs.len(),
        witness_pair,
    })
}

fn phys_norm_f64(scheme: &Scheme, z: &[i64]) -> f64 {
    scheme
        .phys_of(z)
        .iter()
        .map(|q| {
            let v = q.to_f64();
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Index of the subgroup of Z^n generated by `delta_gens` (Hermite normal
/// form): the staircase determinant when full rank, `None` for infinite.
pub fn enveloping_index(n: usize, delta_gens: &[Vec<i64>]) -> Option<u128> {
    lattice_index(n, delta_gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::test_support::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn silver_approx_subgroup_matches_worked_covering() {
        let s = silver();
        let w = window_sym("1/2");
        let cert =
            certify_approximate_subgroup(&s, &w, &region("-50", "50"), DEFAULT_CANDIDATE_ZBOUND)
                .unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        let zs: Vec<Vec<i64>> = cert.f.iter().map(|e| e.z.clone()).collect();
        assert!(zs.contains(&vec![0, 0]), "identity always in F");
        // tau-values {0, -+(2-2sqrt2)} cover [-1,1]: F = {0, ±(2+2sqrt2)}.
        assert_eq!(zs.len(), 3);
        assert!(zs.contains(&vec![2, 2]) && zs.contains(&vec![-2, -2]), "{zs:?}");
        assert_eq!(cert.f_levels.iter().max(), Some(&2));
    }

    #[test]
    fn point_level_recheck_with_naive_double_loop() {
        let s = silver();
        let w = window_sym("1/2");
        let reg = region("-50", "50");
        let cert = certify_approximate_subgroup(&s, &w, &reg, DEFAULT_CANDIDATE_ZBOUND).unwrap();
        let lam = s.enumerate_model_set(&w, &reg).unwrap();
        // Independent re-check on point sets: lambda+mu must equal some
        // nu + f with nu enumerated on a padded region.
        let big = s
            .enumerate_model_set(&w, &region("-120", "120"))
            .unwrap()
            .z_set();
        for a in &lam.elements {
            for b in &lam.elements {
                let prod = vec_add_i64(&a.z, &b.z);
                let ok = cert.f.iter().any(|f| {
                    let nu: Vec<i64> = prod.iter().zip(&f.z).map(|(x, y)| x - y).collect();
                    big.contains(&nu)
                });
                assert!(ok, "pair {:?} {:?}", a.z, b.z);
            }
        }
    }

    #[test]
    fn degenerate_window_rejected() {
        let s = silver();
        let w = Window::new(
            vec![ExactBox::interval(q("0"), q("0"))],
            true,
        )
        .unwrap();
        assert!(matches!(
            certify_approximate_subgroup(&s, &w, &region("-10", "10"), 5),
            Err(CoreError::Precondition(_))
        ));
    }

    #[test]
    fn qcomm_identity_and_silver_example() {
        let s = silver();
        let w = window_sym("1/2");
        let id = s.element(vec![0, 0]);
        let wit = quasi_commensurator_witness(&s, &w, &id, 5).unwrap();
        assert_eq!(wit.f_a.len(), 1);
        assert!(wit.f_a[0].is_zero());

        // a = 1 + sqrt2 has tau(a) = 1 - sqrt2 ~ -0.414.
        let a = s.element(vec![1, 1]);
        let wit = quasi_commensurator_witness(&s, &w, &a, 5).unwrap();
        assert!(wit.f_a.len() <= 2, "{:?}", wit.f_a);
        // Window-level inclusion re-check: tau(a) + W inside the union.
        let target = w.translate(&a.internal);
        let mut cover = Vec::new();
        for f in &wit.f_a {
            cover.extend(w.translate(&f.internal).boxes);
        }
        let union = Window { boxes: cover, symmetric: false };
        for t in &target.boxes {
            assert!(union.covers_box(t));
        }
    }

    #[test]
    fn qcomm_batch_of_random_elements() {
        let s = silver();
        let w = window_sym("1/2");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let z = vec![rng.gen_range(-8..=8), rng.gen_range(-8..=8)];
            let a = s.element(z);
            let wit = quasi_commensurator_witness(&s, &w, &a, 14).unwrap();
            assert!(wit.complete);
        }
    }

    #[test]
    fn enlarge_by_identity_is_identity() {
        let s = silver();
        let w = window_sym("1/2");
        let id = s.element(vec![0, 0]);
        let cert = enlarge(&s, &w, &[id], &region("-40", "40"), 5).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        let sigma = s.enumerate_model_set(&w, &region("-40", "40")).unwrap();
        let a: Vec<Vec<i64>> = cert.sigma_f.iter().map(|e| e.z.clone()).collect();
        let b: Vec<Vec<i64>> = sigma.elements.iter().map(|e| e.z.clone()).collect();
        assert_eq!(
            a.iter().collect::<std::collections::BTreeSet<_>>(),
            b.iter().collect::<std::collections::BTreeSet<_>>()
        );
    }

    #[test]
    fn enlarge_silver_with_commensurating_element() {
        let s = silver();
        let w = window_sym("1/2");
        let a = s.element(vec![1, 1]);
        let cert = enlarge(&s, &w, &[a], &region("-50", "50"), 5).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        assert!(cert.f_prime.len() <= cert.f_prime_bound);
        assert!(cert.f_prime_bound <= 27 * 27, "bound {}", cert.f_prime_bound);
    }

    #[test]
    fn enveloping_index_examples() {
        assert_eq!(enveloping_index(2, &[vec![1, 0], vec![0, 1]]), Some(1));
        assert_eq!(enveloping_index(2, &[vec![2, 0], vec![0, 2]]), Some(4));

        // Silver Delta = points with |tau| <= 1/4: finite index, stable in
        // the truncation radius.
        let s = silver();
        let w = window_sym("1/4");
        let mut last = None;
        for reg in ["50", "200"] {
            let ps = s
                .enumerate_model_set(&w, &region(&format!("-{reg}"), reg))
                .unwrap();
            let gens: Vec<Vec<i64>> = ps.elements.iter().map(|e| e.z.clone()).collect();
            let idx = enveloping_index(2, &gens);
            assert!(idx.is_some());
            if let Some(prev) = last {
                assert_eq!(idx, prev);
            }
            last = Some(idx);
        }
    }

    #[test]
    fn enveloping_index_invariant_under_unimodular_change() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let gens = vec![
                vec![rng.gen_range(-6..=6i64), rng.gen_range(-6..=6)],
                vec![rng.gen_range(-6..=6), rng.gen_range(-6..=6)],
                vec![rng.gen_range(-6..=6), rng.gen_range(-6..=6)],
            ];
            let base = enveloping_index(2, &gens);
            // Unimodular recombination: g0 += k*g1 and a swap.
            let k = rng.gen_range(-3..=3i64);
            let mut gens2 = gens.clone();
            for i in 0..2 {
                gens2[0][i] += k * gens2[1][i];
            }
            gens2.swap(1, 2);
            assert_eq!(enveloping_index(2, &gens2), base);
        }
    }
}
