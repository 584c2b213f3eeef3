//! Axis-aligned boxes with exact endpoints, and windows as finite box unions.

use serde::{Deserialize, Serialize};

use crate::arith::{vec_to_f64, QuadRat};
use crate::error::{CoreError, Result};

/// A closed axis-aligned box with exact endpoints, `lo[i] <= x[i] <= hi[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactBox {
    pub lo: Vec<QuadRat>,
    pub hi: Vec<QuadRat>,
}

impl ExactBox {
    pub fn new(lo: Vec<QuadRat>, hi: Vec<QuadRat>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(CoreError::Dimension("box lo/hi lengths differ".into()));
        }
        Ok(ExactBox { lo, hi })
    }

    /// 1-dimensional interval.
    pub fn interval(lo: QuadRat, hi: QuadRat) -> Self {
        ExactBox { lo: vec![lo], hi: vec![hi] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Empty as a set: some axis has `lo > hi`.
    pub fn is_empty(&self) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .any(|(l, h)| (l.clone() - h.clone()).sign() > 0)
    }

    /// Degenerate: empty or zero volume on some axis.
    pub fn has_interior(&self) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .all(|(l, h)| (h.clone() - l.clone()).sign() > 0)
    }

    pub fn contains(&self, x: &[QuadRat]) -> bool {
        debug_assert_eq!(x.len(), self.dim());
        self.lo.iter().zip(&self.hi).zip(x).all(|((l, h), v)| {
            (v.clone() - l.clone()).sign() >= 0 && (h.clone() - v.clone()).sign() >= 0
        })
    }

    pub fn contains_interior(&self, x: &[QuadRat]) -> bool {
        self.lo.iter().zip(&self.hi).zip(x).all(|((l, h), v)| {
            (v.clone() - l.clone()).sign() > 0 && (h.clone() - v.clone()).sign() > 0
        })
    }

    pub fn on_boundary(&self, x: &[QuadRat]) -> bool {
        self.contains(x) && !self.contains_interior(x)
    }

    pub fn volume(&self) -> QuadRat {
        if self.is_empty() {
            return QuadRat::zero();
        }
        let mut v = QuadRat::one();
        for (l, h) in self.lo.iter().zip(&self.hi) {
            v = v * (h.clone() - l.clone());
        }
        v
    }

    pub fn translate(&self, shift: &[QuadRat]) -> ExactBox {
        ExactBox {
            lo: crate::arith::vec_add(&self.lo, shift),
            hi: crate::arith::vec_add(&self.hi, shift),
        }
    }

    pub fn negate(&self) -> ExactBox {
        ExactBox {
            lo: self.hi.iter().map(|h| -h.clone()).collect(),
            hi: self.lo.iter().map(|l| -l.clone()).collect(),
        }
    }

    pub fn minkowski_sum(&self, other: &ExactBox) -> ExactBox {
        ExactBox {
            lo: crate::arith::vec_add(&self.lo, &other.lo),
            hi: crate::arith::vec_add(&self.hi, &other.hi),
        }
    }

    pub fn intersect(&self, other: &ExactBox) -> ExactBox {
        let lo = self
            .lo
            .iter()
            .zip(&other.lo)
            .map(|(a, b)| QuadRat::max_of(a.clone(), b.clone()).expect("common field"))
            .collect();
        let hi = self
            .hi
            .iter()
            .zip(&other.hi)
            .map(|(a, b)| QuadRat::min_of(a.clone(), b.clone()).expect("common field"))
            .collect();
        ExactBox { lo, hi }
    }

    /// Set difference `self \ other` as disjoint boxes (axis-sweep split).
    pub fn subtract(&self, other: &ExactBox) -> Vec<ExactBox> {
        let inter = self.intersect(other);
        if inter.is_empty() {
            return vec![self.clone()];
        }
        let mut pieces = Vec::new();
        let mut core = self.clone();
        for axis in 0..self.dim() {
            // Left slab.
            if (inter.lo[axis].clone() - core.lo[axis].clone()).sign() > 0 {
                let mut slab = core.clone();
                slab.hi[axis] = inter.lo[axis].clone();
                pieces.push(slab);
            }
            // Right slab.
            if (core.hi[axis].clone() - inter.hi[axis].clone()).sign() > 0 {
                let mut slab = core.clone();
                slab.lo[axis] = inter.hi[axis].clone();
                pieces.push(slab);
            }
            core.lo[axis] = inter.lo[axis].clone();
            core.hi[axis] = inter.hi[axis].clone();
        }
        pieces.retain(|b| !b.is_empty() && b.volume().sign() > 0);
        pieces
    }

    /// Shrinks every axis by `margin` on both sides.
    pub fn shrink(&self, margin: &QuadRat) -> ExactBox {
        ExactBox {
            lo: self.lo.iter().map(|l| l.clone() + margin.clone()).collect(),
            hi: self.hi.iter().map(|h| h.clone() - margin.clone()).collect(),
        }
    }

    pub fn lo_f64(&self) -> Vec<f64> {
        vec_to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> Vec<f64> {
        vec_to_f64(&self.hi)
    }

    pub fn to_strings(&self) -> Vec<[String; 2]> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| [l.to_string(), h.to_string()])
            .collect()
    }
}

/// A window: a finite union of closed boxes in the internal space, with
/// pairwise disjoint interiors. Compact with dense interior by construction
/// (when every box is non-degenerate).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub boxes: Vec<ExactBox>,
    pub symmetric: bool,
}

impl Window {
    pub fn new(boxes: Vec<ExactBox>, symmetric: bool) -> Result<Self> {
        let boxes: Vec<ExactBox> = boxes.into_iter().filter(|b| !b.is_empty()).collect();
        if let Some(d) = boxes.first().map(|b| b.dim()) {
            if boxes.iter().any(|b| b.dim() != d) {
                return Err(CoreError::Dimension("window boxes have mixed dimensions".into()));
            }
        }
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                let inter = boxes[i].intersect(&boxes[j]);
                if !inter.is_empty() && inter.volume().sign() > 0 {
                    return Err(CoreError::Precondition(
                        "window boxes overlap in their interiors".into(),
                    ));
                }
            }
        }
        Ok(Window { boxes, symmetric })
    }

    /// The empty window.
    pub fn empty() -> Self {
        Window { boxes: Vec::new(), symmetric: true }
    }

    /// Symmetric interval `[-r, r]` in a 1-dimensional internal space.
    pub fn symmetric_interval(r: QuadRat) -> Self {
        Window { boxes: vec![ExactBox::interval(-r.clone(), r)], symmetric: true }
    }

    pub fn dim(&self) -> Option<usize> {
        self.boxes.first().map(|b| b.dim())
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn contains(&self, x: &[QuadRat]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    /// Boundary test. For unions of boxes whose closed faces touch, this is
    /// conservative: a shared face counts as boundary.
    pub fn on_boundary(&self, x: &[QuadRat]) -> bool {
        self.boxes.iter().any(|b| b.contains(x)) && !self.boxes.iter().any(|b| b.contains_interior(x))
    }

    /// Exact `W = -W` test: the negated box list equals the box list as a set.
    pub fn is_symmetric_exact(&self) -> bool {
        let negated: Vec<ExactBox> = self.boxes.iter().map(|b| b.negate()).collect();
        negated.iter().all(|nb| self.boxes.contains(nb))
            && self.boxes.iter().all(|b| negated.contains(b))
    }

    /// Every box non-degenerate, so the union has dense interior.
    pub fn has_dense_interior(&self) -> bool {
        !self.boxes.is_empty() && self.boxes.iter().all(|b| b.has_interior())
    }

    pub fn translate(&self, shift: &[QuadRat]) -> Window {
        Window {
            boxes: self.boxes.iter().map(|b| b.translate(shift)).collect(),
            symmetric: false,
        }
    }

    pub fn negate(&self) -> Window {
        Window {
            boxes: self.boxes.iter().map(|b| b.negate()).collect(),
            symmetric: self.symmetric,
        }
    }

    /// Minkowski sum; the result may have overlapping boxes, which is fine
    /// for covering targets and membership tests.
    pub fn minkowski_sum(&self, other: &Window) -> Window {
        let mut boxes = Vec::new();
        for a in &self.boxes {
            for b in &other.boxes {
                boxes.push(a.minkowski_sum(b));
            }
        }
        Window { boxes, symmetric: self.symmetric && other.symmetric }
    }

    /// Interval hull across all boxes.
    pub fn hull(&self) -> Option<ExactBox> {
        let first = self.boxes.first()?;
        let mut lo = first.lo.clone();
        let mut hi = first.hi.clone();
        for b in &self.boxes[1..] {
            for i in 0..lo.len() {
                lo[i] = QuadRat::min_of(lo[i].clone(), b.lo[i].clone()).expect("common field");
                hi[i] = QuadRat::max_of(hi[i].clone(), b.hi[i].clone()).expect("common field");
            }
        }
        Some(ExactBox { lo, hi })
    }

    pub fn volume(&self) -> QuadRat {
        let mut v = QuadRat::zero();
        for b in &self.boxes {
            v += b.volume();
        }
        v
    }

    /// Does the union of this window's boxes cover `target` exactly?
    pub fn covers_box(&self, target: &ExactBox) -> bool {
        let mut uncovered = vec![target.clone()];
        for b in &self.boxes {
            let mut next = Vec::new();
            for u in uncovered {
                next.extend(u.subtract(b));
            }
            uncovered = next;
            if uncovered.is_empty() {
                return true;
            }
        }
        uncovered.is_empty()
    }
}

/// On-disk window format.
#[derive(Serialize, Deserialize)]
pub struct WindowFile {
    /// Each box is a list of `[lo, hi]` pairs, one per internal axis.
    pub boxes: Vec<Vec<[String; 2]>>,
    pub symmetric: bool,
}

impl Window {
    pub fn to_file(&self) -> WindowFile {
        WindowFile {
            boxes: self.boxes.iter().map(|b| b.to_strings()).collect(),
            symmetric: self.symmetric,
        }
    }

    pub fn from_file(f: &WindowFile) -> Result<Window> {
        let mut boxes = Vec::new();
        for raw in &f.boxes {
            let mut lo = Vec::new();
            let mut hi = Vec::new();
            for [l, h] in raw {
                lo.push(l.parse::<QuadRat>()?);
                hi.push(h.parse::<QuadRat>()?);
            }
            boxes.push(ExactBox::new(lo, hi)?);
        }
        Window::new(boxes, f.symmetric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QuadRat {
        s.parse().unwrap()
    }

    #[test]
    fn subtract_splits_correctly() {
        let a = ExactBox::new(vec![q("0"), q("0")], vec![q("4"), q("4")]).unwrap();
        let b = ExactBox::new(vec![q("1"), q("1")], vec![q("2"), q("2")]).unwrap();
        let pieces = a.subtract(&b);
        let total: QuadRat = pieces
            .iter()
            .fold(QuadRat::zero(), |acc, p| acc + p.volume());
        assert_eq!(total, q("15"));
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                let inter = pieces[i].intersect(&pieces[j]);
                assert!(inter.is_empty() || inter.volume().sign() == 0);
            }
        }
    }

    #[test]
    fn covering_detects_gaps() {
        let target = ExactBox::interval(q("-1"), q("1"));
        let w = Window::new(
            vec![
                ExactBox::interval(q("-1"), q("-1/4")),
                ExactBox::interval(q("0"), q("1")),
            ],
            false,
        )
        .unwrap();
        assert!(!w.covers_box(&target));
        let w2 = Window::new(
            vec![
                ExactBox::interval(q("-1"), q("0")),
                ExactBox::interval(q("0"), q("1")),
            ],
            false,
        )
        .unwrap();
        assert!(w2.covers_box(&target));
    }

    #[test]
    fn symmetry_check_is_exact() {
        let sym = Window::symmetric_interval(q("1/2"));
        assert!(sym.is_symmetric_exact());
        let asym = Window::new(vec![ExactBox::interval(q("0"), q("1"))], true).unwrap();
        assert!(!asym.is_symmetric_exact());
    }

    #[test]
    fn overlapping_interiors_rejected() {
        let res = Window::new(
            vec![
                ExactBox::interval(q("0"), q("2")),
                ExactBox::interval(q("1"), q("3")),
            ],
            false,
        );
        assert!(res.is_err());
    }
}
