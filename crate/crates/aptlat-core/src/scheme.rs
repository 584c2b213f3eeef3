//! Cut-and-project schemes: lattice data, the star map, exact model-set
//! enumeration, scheme validation and window regularity checks.
//!
//! A scheme is `(G, H, Gamma)` with `G = R^d`, `H = R^m` and `Gamma = B Z^(d+m)`
//! for an exact basis matrix `B` whose columns generate the lattice. The first
//! `d` coordinates of a lattice vector are its physical position, the last `m`
//! its internal (star-map) image.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::cmp::Ordering;

use crate::arith::{vec_to_f64, zspan_solve, ExactMat, QuadRat};
use crate::boxes::{ExactBox, Window};
use crate::cert::{CertKind, Certificate, Verdict};
use crate::error::{CoreError, Result};

pub const DEFAULT_DENSITY_EPSILON: f64 = 1e-3;
const DENSITY_POINT_CAP: f64 = 4_000_000.0;
const DENSITY_OVERSAMPLE: f64 = 8.0;

#[derive(Clone, Debug)]
pub struct Scheme {
    pub name: String,
    pub d: usize,
    pub m: usize,
    basis: ExactMat,
    basis_inv: ExactMat,
    covolume: QuadRat,
    pub radicand: u64,
}

/// A lattice point: integer coordinates plus cached projections. The internal
/// (and physical) projections are stored exactly; `phys` is the float shadow.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeElement {
    pub z: Vec<i64>,
    pub phys: Vec<f64>,
    pub phys_exact: Vec<QuadRat>,
    pub internal: Vec<QuadRat>,
}

impl LatticeElement {
    pub fn is_zero(&self) -> bool {
        self.z.iter().all(|&v| v == 0)
    }

    pub fn z_neg(&self) -> Vec<i64> {
        self.z.iter().map(|&v| -v).collect()
    }
}

/// A finite truncation of a model set: every element satisfies
/// `internal in window` and `phys in region`, both decided exactly.
#[derive(Clone, Debug)]
pub struct PointSet {
    pub scheme: Scheme,
    pub window: Window,
    pub region: ExactBox,
    pub elements: Vec<LatticeElement>,
}

impl Scheme {
    pub fn new(name: impl Into<String>, d: usize, m: usize, basis: ExactMat) -> Result<Self> {
        let n = d + m;
        if basis.rows() != n || basis.cols() != n {
            return Err(CoreError::Dimension(format!(
                "basis must be {n}x{n} for d={d}, m={m}"
            )));
        }
        let mut radicand = 1u64;
        for i in 0..n {
            for j in 0..n {
                let dd = basis.entry(i, j).radicand();
                if dd != 1 {
                    if radicand != 1 && radicand != dd {
                        return Err(CoreError::MixedRadicands(radicand, dd));
                    }
                    radicand = dd;
                }
            }
        }
        let det = basis.det()?;
        if det.sign() == 0 {
            return Err(CoreError::DegenerateLattice);
        }
        let basis_inv = basis.inverse()?;
        Ok(Scheme {
            name: name.into(),
            d,
            m,
            covolume: det.abs(),
            basis,
            basis_inv,
            radicand,
        })
    }

    pub fn dim_total(&self) -> usize {
        self.d + self.m
    }

    pub fn basis(&self) -> &ExactMat {
        &self.basis
    }

    pub fn basis_inv(&self) -> &ExactMat {
        &self.basis_inv
    }

    /// `|det B|`, the covolume of the lattice.
    pub fn covolume(&self) -> &QuadRat {
        &self.covolume
    }

    pub fn element(&self, z: Vec<i64>) -> LatticeElement {
        let x = self.basis.mul_int_vec(&z);
        let phys_exact = x[..self.d].to_vec();
        let internal = x[self.d..].to_vec();
        LatticeElement {
            phys: vec_to_f64(&phys_exact),
            phys_exact,
            internal,
            z,
        }
    }

    /// Exact physical projection of an integer vector.
    pub fn phys_of(&self, z: &[i64]) -> Vec<QuadRat> {
        self.basis.mul_int_vec(z)[..self.d].to_vec()
    }

    /// Exact star-map image of an integer vector.
    pub fn internal_of(&self, z: &[i64]) -> Vec<QuadRat> {
        self.basis.mul_int_vec(z)[self.d..].to_vec()
    }

    /// Exact integer ranges for `z` such that `B z` can lie in the given
    /// per-coordinate intervals.
    fn exact_z_ranges(&self, bounds: &[(QuadRat, QuadRat)]) -> Result<Vec<(i64, i64)>> {
        let n = self.dim_total();
        debug_assert_eq!(bounds.len(), n);
        let mut ranges = Vec::with_capacity(n);
        for i in 0..n {
            let mut lo = QuadRat::zero();
            let mut hi = QuadRat::zero();
            for j in 0..n {
                let c = self.basis_inv.entry(i, j).clone();
                let a = c.clone() * bounds[j].0.clone();
                let b = c * bounds[j].1.clone();
                let (abod_lo, abod_hi) = match a.try_cmp(&b)? {
                    Ordering::Greater => (b, a),
                    _ => (a, b),
                };
                lo += abod_lo;
                hi += abod_hi;
            }
            let zlo = -((-lo).floor()); // ceil
            let zhi = hi.floor();
            use num_traits::ToPrimitive;
            ranges.push((
                zlo.to_i64().ok_or_else(|| CoreError::Dimension("z range overflow".into()))?,
                zhi.to_i64().ok_or_else(|| CoreError::Dimension("z range overflow".into()))?,
            ));
        }
        Ok(ranges)
    }

    /// Streams integer candidates `z` with `B z` possibly inside the bounds,
    /// using padded float interval propagation. Sound as a superset: callers
    /// filter exactly. Returns the number of candidates visited.
    fn scan_candidates(
        &self,
        bounds: &[(QuadRat, QuadRat)],
        visit: &mut dyn FnMut(&[i64]),
    ) -> Result<u64> {
        let n = self.dim_total();
        let ranges = self.exact_z_ranges(bounds)?;
        if ranges.iter().any(|&(lo, hi)| lo > hi) {
            return Ok(0);
        }
        let b: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.basis.entry(i, j).to_f64()).collect())
            .collect();
        const PAD: f64 = 1e-6;
        let lo: Vec<f64> = bounds.iter().map(|(l, _)| l.to_f64() - PAD).collect();
        let hi: Vec<f64> = bounds.iter().map(|(_, h)| h.to_f64() + PAD).collect();
        // Suffix slack: interval of sum_{i >= k} B[j][i] * range_i.
        let mut slack_lo = vec![vec![0.0; n + 1]; n];
        let mut slack_hi = vec![vec![0.0; n + 1]; n];
        for j in 0..n {
            for k in (0..n).rev() {
                let (rlo, rhi) = (ranges[k].0 as f64, ranges[k].1 as f64);
                let (a, c) = (b[j][k] * rlo, b[j][k] * rhi);
                slack_lo[j][k] = slack_lo[j][k + 1] + a.min(c);
                slack_hi[j][k] = slack_hi[j][k + 1] + a.max(c);
            }
        }
        let mut res_lo = lo;
        let mut res_hi = hi;
        let mut z = vec![0i64; n];
        let mut count = 0u64;
        fn rec(
            k: usize,
            n: usize,
            b: &[Vec<f64>],
            ranges: &[(i64, i64)],
            slack_lo: &[Vec<f64>],
            slack_hi: &[Vec<f64>],
            res_lo: &mut Vec<f64>,
            res_hi: &mut Vec<f64>,
            z: &mut Vec<i64>,
            count: &mut u64,
            visit: &mut dyn FnMut(&[i64]),
        ) {
            if k == n {
                *count += 1;
                visit(z);
                return;
            }
            let mut zlo = ranges[k].0 as f64;
            let mut zhi = ranges[k].1 as f64;
            for j in 0..n {
                let c = b[j][k];
                if c.abs() < 1e-9 {
                    continue;
                }
                let lo_j = res_lo[j] - slack_hi[j][k + 1];
                let hi_j = res_hi[j] - slack_lo[j][k + 1];
                let (a, bb) = if c > 0.0 {
                    (lo_j / c, hi_j / c)
                } else {
                    (hi_j / c, lo_j / c)
                };
                zlo = zlo.max(a - 1e-6);
                zhi = zhi.min(bb + 1e-6);
            }
            let start = zlo.ceil() as i64;
            let end = zhi.floor() as i64;
            for v in start.max(ranges[k].0)..=end.min(ranges[k].1) {
                z[k] = v;
                for j in 0..n {
                    res_lo[j] -= b[j][k] * v as f64;
                    res_hi[j] -= b[j][k] * v as f64;
                }
                rec(k + 1, n, b, ranges, slack_lo, slack_hi, res_lo, res_hi, z, count, visit);
                for j in 0..n {
                    res_lo[j] += b[j][k] * v as f64;
                    res_hi[j] += b[j][k] * v as f64;
                }
            }
        }
        rec(
            0, n, &b, &ranges, &slack_lo, &slack_hi, &mut res_lo, &mut res_hi, &mut z, &mut count,
            visit,
        );
        Ok(count)
    }

    /// Enumerates the model set truncation `{x in Lambda : phys in region}`,
    /// deciding window and region membership exactly. Empty window or region
    /// yields an empty set, not an error.
    pub fn enumerate_model_set(&self, window: &Window, region: &ExactBox) -> Result<PointSet> {
        if region.dim() != self.d {
            return Err(CoreError::Dimension("region dimension must equal d".into()));
        }
        let empty = PointSet {
            scheme: self.clone(),
            window: window.clone(),
            region: region.clone(),
            elements: Vec::new(),
        };
        if window.is_empty() || region.is_empty() {
            return Ok(empty);
        }
        if let Some(wd) = window.dim() {
            if wd != self.m {
                return Err(CoreError::Dimension("window dimension must equal m".into()));
            }
        }
        let hull = window.hull().expect("non-empty window has a hull");
        let mut bounds: Vec<(QuadRat, QuadRat)> = Vec::with_capacity(self.dim_total());
        for i in 0..self.d {
            bounds.push((region.lo[i].clone(), region.hi[i].clone()));
        }
        for i in 0..self.m {
            bounds.push((hull.lo[i].clone(), hull.hi[i].clone()));
        }
        let mut candidates: Vec<Vec<i64>> = Vec::new();
        self.scan_candidates(&bounds, &mut |z| candidates.push(z.to_vec()))?;
        let mut elements: Vec<LatticeElement> = candidates
            .into_par_iter()
            .filter_map(|z| {
                let el = self.element(z);
                if region.contains(&el.phys_exact) && window.contains(&el.internal) {
                    Some(el)
                } else {
                    None
                }
            })
            .collect();
        elements.sort_by(|a, b| cmp_elements(a, b));
        Ok(PointSet {
            scheme: self.clone(),
            window: window.clone(),
            region: region.clone(),
            elements,
        })
    }

    /// Validates the cut-and-project axioms on a finite search window:
    /// (a) injectivity of the physical projection restricted to the lattice,
    /// exact and exhaustive up to `search_bound`; (b) a density heuristic for
    /// the internal projection, at resolution `epsilon`.
    pub fn validate(&self, search_bound: i64, epsilon: f64) -> Result<Certificate> {
        let n = self.dim_total();
        // (a) exhaustive injectivity scan.
        let mut inj_witness: Option<Vec<i64>> = None;
        let mut z = vec![-search_bound; n];
        'outer: loop {
            if z.iter().any(|&v| v != 0) {
                let phys = self.phys_of(&z);
                if phys.iter().all(|p| p.sign() == 0) {
                    inj_witness = Some(z.clone());
                    break;
                }
            }
            let mut k = 0;
            loop {
                if k == n {
                    break 'outer;
                }
                z[k] += 1;
                if z[k] <= search_bound {
                    break;
                }
                z[k] = -search_bound;
                k += 1;
            }
        }
        let injective = inj_witness.is_none();

        // (b) density heuristic. Internal points are collected from a slab
        // wide enough to oversample every epsilon-cell of the reference box
        // (the internal hull of the fundamental domain); the shared search
        // bound cannot reach the default resolution, so the slab extent is
        // derived from epsilon itself and recorded.
        let fd = self.fundamental_domain();
        let href = fd.h_hull.clone();
        let lens: Vec<f64> = (0..self.m)
            .map(|i| (href.hi[i].clone() - href.lo[i].clone()).to_f64())
            .collect();
        let mut eff_eps = epsilon.max(1e-9);
        let cells_for = |eps: f64| -> f64 {
            lens.iter().map(|l| (l / eps).ceil().max(1.0)).product()
        };
        while DENSITY_OVERSAMPLE * cells_for(eff_eps) > DENSITY_POINT_CAP {
            eff_eps *= 2.0;
        }
        let n_cells: Vec<usize> = lens
            .iter()
            .map(|l| ((l / eff_eps).ceil() as usize).max(1))
            .collect();
        let total_cells: usize = n_cells.iter().product();
        let target_points = DENSITY_OVERSAMPLE * total_cells as f64;
        let hull_vol: f64 = lens.iter().product::<f64>().max(1e-12);
        let extent = ((target_points * self.covolume.to_f64() / hull_vol).powf(1.0 / self.d as f64)
            / 2.0)
            .ceil()
            .max(search_bound as f64) as i64;
        let mut bounds: Vec<(QuadRat, QuadRat)> = Vec::new();
        for _ in 0..self.d {
            bounds.push((QuadRat::from_int(-extent), QuadRat::from_int(extent)));
        }
        for i in 0..self.m {
            bounds.push((href.lo[i].clone(), href.hi[i].clone()));
        }
        let mut occupied = vec![false; total_cells];
        let basis_f: Vec<Vec<f64>> = (self.d..n)
            .map(|i| (0..n).map(|j| self.basis.entry(i, j).to_f64()).collect())
            .collect();
        let href_lo: Vec<f64> = href.lo.iter().map(|x| x.to_f64()).collect();
        let mut scanned = 0u64;
        self.scan_candidates(&bounds, &mut |zc| {
            scanned += 1;
            let mut idx = 0usize;
            for axis in 0..self.m {
                let val: f64 = (0..n).map(|j| basis_f[axis][j] * zc[j] as f64).sum();
                let rel = (val - href_lo[axis]) / eff_eps;
                if !(0.0..(n_cells[axis] as f64)).contains(&rel) {
                    return;
                }
                idx = idx * n_cells[axis] + rel as usize;
            }
            occupied[idx] = true;
        })?;
        let empty_cell = occupied.iter().position(|&o| !o);
        let dense = empty_cell.is_none();
        let density_witness = empty_cell.map(|flat| {
            let mut rem = flat;
            let mut coords = vec![0.0; self.m];
            for axis in (0..self.m).rev() {
                coords[axis] = href_lo[axis] + ((rem % n_cells[axis]) as f64 + 0.5) * eff_eps;
                rem /= n_cells[axis];
            }
            coords
        });

        let verdict = if injective && dense { Verdict::Pass } else { Verdict::Fail };
        Ok(Certificate::new(
            CertKind::SchemeValid,
            verdict,
            json!({
                "scheme": self.name,
                "search_bound": search_bound,
                "epsilon": epsilon,
            }),
            json!({
                "injectivity": {
                    "method": "EXACT",
                    "bound": search_bound,
                    "ok": injective,
                    "witness_z": inj_witness,
                },
                "density": {
                    "method": "HEURISTIC",
                    "epsilon_requested": epsilon,
                    "epsilon_effective": eff_eps,
                    "phys_extent": extent,
                    "reference_box": href.to_strings(),
                    "cells": total_cells,
                    "candidates_scanned": scanned,
                    "ok": dense,
                    "empty_cell_center": density_witness,
                },
            }),
        ))
    }

    /// Checks window regularity: symmetry when flagged, dense interior,
    /// aperiodicity (automatic for bounded boxes) and boundary avoidance
    /// `boundary(W) ∩ Gamma_H = {}`. For `m = 1` the boundary clause is
    /// certified algebraically (endpoint membership in the internal lattice
    /// decided by an integer solve); otherwise exhaustively up to the bound.
    pub fn check_regular_window(&self, window: &Window, search_bound: i64) -> Result<Certificate> {
        let params = json!({
            "scheme": self.name,
            "window": window.to_file(),
            "search_bound": search_bound,
        });
        if window.symmetric && !window.is_symmetric_exact() {
            return Ok(Certificate::new(
                CertKind::RegularWindow,
                Verdict::Fail,
                params,
                json!({"clause": "symmetry", "detail": "window flagged symmetric but W != -W"}),
            ));
        }
        if !window.has_dense_interior() {
            return Ok(Certificate::new(
                CertKind::RegularWindow,
                Verdict::Fail,
                params,
                json!({"clause": "interior", "detail": "window has a degenerate box"}),
            ));
        }
        // Boundary avoidance.
        let n = self.dim_total();
        let mut method = "exhaustive";
        let mut witness: Option<Vec<i64>> = None;
        if self.m == 1 {
            method = "algebraic";
            // Internal lattice generators as (rational, radical) pairs.
            let gens: Vec<Vec<BigRational>> = (0..n)
                .map(|j| {
                    let v = self.basis.entry(self.d, j);
                    vec![v.rational_part().clone(), v.radical_part().clone()]
                })
                .collect();
            'boxes: for b in &window.boxes {
                for endpoint in [&b.lo[0], &b.hi[0]] {
                    let target =
                        vec![endpoint.rational_part().clone(), endpoint.radical_part().clone()];
                    if let Some(coeffs) = zspan_solve(&gens, &target) {
                        use num_traits::ToPrimitive;
                        let zc: Option<Vec<i64>> = coeffs.iter().map(|c| c.to_i64()).collect();
                        if let Some(zc) = zc {
                            // Only a failure if the endpoint is genuinely on
                            // the boundary of the union.
                            if window.on_boundary(std::slice::from_ref(endpoint)) {
                                witness = Some(zc);
                                break 'boxes;
                            }
                        }
                    }
                }
            }
        } else {
            let mut z = vec![-search_bound; n];
            'outer: loop {
                if z.iter().any(|&v| v != 0) || true {
                    let internal = self.internal_of(&z);
                    if window.on_boundary(&internal) {
                        witness = Some(z.clone());
                        break;
                    }
                }
                let mut k = 0;
                loop {
                    if k == n {
                        break 'outer;
                    }
                    z[k] += 1;
                    if z[k] <= search_bound {
                        break;
                    }
                    z[k] = -search_bound;
                    k += 1;
                }
            }
        }
        let verdict = if witness.is_none() { Verdict::Pass } else { Verdict::Fail };
        Ok(Certificate::new(
            CertKind::RegularWindow,
            verdict,
            params,
            json!({
                "symmetry": {"flagged": window.symmetric, "ok": true},
                "aperiodicity": {
                    "ok": true,
                    "detail": "bounded box unions have trivial translation stabilizer",
                },
                "jordan_measurable": true,
                "boundary": {
                    "method": method,
                    "bound": search_bound,
                    "ok": witness.is_none(),
                    "witness_z": witness,
                },
            }),
        ))
    }

    /// The fundamental domain `F = B [0,1)^(d+m)` described through the exact
    /// interval hulls of its physical and internal projections (computed over
    /// the closure's vertices).
    pub fn fundamental_domain(&self) -> FundamentalDomain {
        let n = self.dim_total();
        let mut lo = vec![QuadRat::zero(); n];
        let mut hi = vec![QuadRat::zero(); n];
        for mask in 0u32..(1 << n) {
            let u: Vec<i64> = (0..n).map(|i| ((mask >> i) & 1) as i64).collect();
            let x = self.basis.mul_int_vec(&u);
            if mask == 0 {
                lo = x.clone();
                hi = x;
            } else {
                for i in 0..n {
                    lo[i] = QuadRat::min_of(lo[i].clone(), x[i].clone()).expect("common field");
                    hi[i] = QuadRat::max_of(hi[i].clone(), x[i].clone()).expect("common field");
                }
            }
        }
        FundamentalDomain {
            g_hull: ExactBox { lo: lo[..self.d].to_vec(), hi: hi[..self.d].to_vec() },
            h_hull: ExactBox { lo: lo[self.d..].to_vec(), hi: hi[self.d..].to_vec() },
        }
    }
}

/// Exact interval hulls of the projections of `F = B [0,1)^(d+m)`.
#[derive(Clone, Debug)]
pub struct FundamentalDomain {
    pub g_hull: ExactBox,
    pub h_hull: ExactBox,
}

impl FundamentalDomain {
    /// Exact test for the large-window property `W ⊇ F_H` (against the
    /// closed hull of `F_H`).
    pub fn is_large(&self, window: &Window) -> bool {
        window.covers_box(&self.h_hull)
    }
}

/// Total order on lattice elements: physical coordinate lexicographically,
/// then integer coordinates.
pub fn cmp_elements(a: &LatticeElement, b: &LatticeElement) -> Ordering {
    for (pa, pb) in a.phys_exact.iter().zip(&b.phys_exact) {
        match pa.try_cmp(pb).expect("common field") {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.z.cmp(&b.z)
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Construct directly from integer vectors (no window/region filter).
    /// Used for explicit point sets like `Z` in tests and sequences.
    pub fn from_z_vectors(scheme: &Scheme, z: Vec<Vec<i64>>) -> PointSet {
        let mut elements: Vec<LatticeElement> =
            z.into_iter().map(|v| scheme.element(v)).collect();
        elements.sort_by(cmp_elements);
        PointSet {
            scheme: scheme.clone(),
            window: Window::empty(),
            region: ExactBox {
                lo: vec![QuadRat::zero(); scheme.d],
                hi: vec![QuadRat::zero(); scheme.d],
            },
            elements,
        }
    }

    pub fn z_set(&self) -> std::collections::BTreeSet<Vec<i64>> {
        self.elements.iter().map(|e| e.z.clone()).collect()
    }

    /// Sorted physical float shadows (d = 1 convenience).
    pub fn phys_f64_sorted(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.elements.iter().map(|e| e.phys[0]).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// CSV export: z coordinates, float physical coordinates, internal
    /// coordinates both exactly and as floats.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        let n = self.scheme.dim_total();
        let mut header: Vec<String> = (1..=n).map(|i| format!("z{i}")).collect();
        for i in 1..=self.scheme.d {
            header.push(format!("phys{i}"));
        }
        for i in 1..=self.scheme.m {
            header.push(format!("internal{i}_exact"));
            header.push(format!("internal{i}_float"));
        }
        writeln!(out, "{}", header.join(","))?;
        for e in &self.elements {
            let mut row: Vec<String> = e.z.iter().map(|v| v.to_string()).collect();
            row.extend(e.phys.iter().map(|v| format!("{v}")));
            for q in &e.internal {
                row.push(q.to_string());
                row.push(format!("{}", q.to_f64()));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// On-disk scheme format. The basis is stored as a list of lattice
/// generators (matrix columns), each with `d` physical coordinates followed
/// by `m` internal ones.
#[derive(Serialize, Deserialize)]
pub struct SchemeFile {
    pub name: String,
    pub d: usize,
    pub m: usize,
    #[serde(rename = "D")]
    pub radicand: u64,
    pub basis: Vec<Vec<String>>,
}

impl Scheme {
    pub fn to_file(&self) -> SchemeFile {
        let n = self.dim_total();
        SchemeFile {
            name: self.name.clone(),
            d: self.d,
            m: self.m,
            radicand: self.radicand,
            basis: (0..n)
                .map(|j| self.basis.column(j).iter().map(|q| q.to_string()).collect())
                .collect(),
        }
    }

    pub fn from_file(f: &SchemeFile) -> Result<Scheme> {
        let mut cols = Vec::with_capacity(f.basis.len());
        for raw in &f.basis {
            let col: Result<Vec<QuadRat>> = raw.iter().map(|s| s.parse()).collect();
            cols.push(col?);
        }
        let basis = ExactMat::from_columns(&cols)?;
        let s = Scheme::new(f.name.clone(), f.d, f.m, basis)?;
        if s.radicand != f.radicand && !(s.radicand == 1) {
            return Err(CoreError::Parse {
                input: f.name.clone(),
                msg: format!("declared D={} but basis uses sqrt({})", f.radicand, s.radicand),
            });
        }
        Ok(s)
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn q(s: &str) -> QuadRat {
        s.parse().unwrap()
    }

    /// The silver-mean scheme: columns (1, 1) and (sqrt 2, -sqrt 2).
    pub fn silver() -> Scheme {
        let basis = ExactMat::from_columns(&[
            vec![q("1"), q("1")],
            vec![q("sqrt(2)"), q("-sqrt(2)")],
        ])
        .unwrap();
        Scheme::new("silver", 1, 1, basis).unwrap()
    }

    pub fn window_sym(r: &str) -> Window {
        Window::symmetric_interval(q(r))
    }

    pub fn region(lo: &str, hi: &str) -> ExactBox {
        ExactBox::interval(q(lo), q(hi))
    }

    /// Integer-only comparison of p vs q*sqrt(2), independent of QuadRat.
    pub fn cmp_int_sqrt2(p: i128, qc: i128) -> Ordering {
        if qc == 0 {
            return p.cmp(&0);
        }
        if p <= 0 && qc > 0 {
            return Ordering::Less;
        }
        if p >= 0 && qc < 0 {
            return Ordering::Greater;
        }
        let p2 = p * p;
        let q2 = 2 * qc * qc;
        if p > 0 {
            p2.cmp(&q2)
        } else {
            q2.cmp(&p2)
        }
    }

    /// Brute-force silver model set oracle: all a + b*sqrt(2) with
    /// |a|,|b| <= zmax, |a - b*sqrt(2)| <= wr (rational window radius
    /// num/den), phys in [lo, hi]. Pure integer arithmetic.
    pub fn silver_oracle(zmax: i64, w_num: i128, w_den: i128, lo: i128, hi: i128) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for a in -zmax..=zmax {
            for b in -zmax..=zmax {
                // internal = a - b sqrt 2; |internal| <= w_num/w_den
                // <=> -w_num <= w_den*a - w_den*b sqrt2 <= w_num
                let p1 = w_den * a as i128 + w_num; // a - b sqrt2 + w >= 0
                let p2 = w_den * a as i128 - w_num; // a - b sqrt2 - w <= 0
                let c = w_den * b as i128;
                if cmp_int_sqrt2(p1, c) == Ordering::Less {
                    continue;
                }
                if cmp_int_sqrt2(p2, c) == Ordering::Greater {
                    continue;
                }
                // phys = a + b sqrt2 in [lo, hi]
                if cmp_int_sqrt2(a as i128 - lo, -(b as i128)) == Ordering::Less {
                    continue;
                }
                if cmp_int_sqrt2(a as i128 - hi, -(b as i128)) == Ordering::Greater {
                    continue;
                }
                out.push((a, b));
            }
        }
        out
    }
}
