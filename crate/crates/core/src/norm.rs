//! Norms on `R^n`: Euclidean, max, and block-product norms.
//!
//! A product norm splits a vector into consecutive blocks, measures each block
//! with its own norm and takes the maximum, e.g. `max{|x - x'|, |a - a'|}` on
//! `R^n x R` for epigraphs or `max{|x|_a, |y|_b}` for graphs of mappings.
//!
//! Every norm here is *absolute and monotone*: its value depends only on the
//! absolute values of the coordinates and is nondecreasing in each of them.
//! The nearest-neighbour index relies on this to lower-bound distances to
//! bounding boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    #[default]
    Euclidean,
    Max,
    /// Ordered `(block dimension, block norm)` pairs combined by the maximum.
    Product {
        blocks: Vec<(usize, NormSpec)>,
    },
}

impl NormSpec {
    /// `max{inner, |.|}` on `R^dim x R`.
    pub fn epigraph(dim: usize, inner: NormSpec) -> NormSpec {
        NormSpec::Product { blocks: vec![(dim, inner), (1, NormSpec::Max)] }
    }

    /// `max{|.|_a, |.|_b}` on `R^n x R^m`.
    pub fn graph(in_dim: usize, input: NormSpec, out_dim: usize, output: NormSpec) -> NormSpec {
        NormSpec::Product { blocks: vec![(in_dim, input), (out_dim, output)] }
    }

    /// Checks that block dimensions add up to `dim` (recursively).
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            NormSpec::Euclidean | NormSpec::Max => Ok(()),
            NormSpec::Product { blocks } => {
                if blocks.is_empty() {
                    return Err(Error::invalid("product norm needs at least one block"));
                }
                let mut total = 0usize;
                for (d, spec) in blocks {
                    if *d == 0 {
                        return Err(Error::invalid("product norm block of dimension 0"));
                    }
                    spec.validate(*d)?;
                    total = total
                        .checked_add(*d)
                        .ok_or_else(|| Error::invalid("product norm block dimensions overflow"))?;
                }
                if total != dim {
                    return Err(Error::invalid(format!(
                        "product norm blocks sum to {total}, ambient dimension is {dim}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Norm of a vector.
    pub fn eval(&self, v: &[f64]) -> f64 {
        self.eval_abs(0, v.len(), &|i| v[i].abs())
    }

    /// Distance `|a - b|`.
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        self.eval_abs(0, a.len(), &|i| (a[i] - b[i]).abs())
    }

    /// Lower bound on the distance from `x` to any point of the box `[lo, hi]`.
    ///
    /// Coordinate gaps are computed with the same rounding direction as the
    /// per-coordinate differences in [`NormSpec::dist`], so the bound never
    /// exceeds the floating-point distance to a point inside the box.
    pub fn dist_to_box(&self, x: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
        self.eval_abs(0, x.len(), &|i| {
            if x[i] < lo[i] {
                lo[i] - x[i]
            } else if x[i] > hi[i] {
                x[i] - hi[i]
            } else {
                0.0
            }
        })
    }

    // Evaluates the norm on coordinates [start, start+len) given their absolute values.
    fn eval_abs(&self, start: usize, len: usize, abs: &dyn Fn(usize) -> f64) -> f64 {
        match self {
            NormSpec::Euclidean => {
                let mut s = 0.0;
                let mut m: f64 = 0.0;
                for i in start..start + len {
                    let a = abs(i);
                    s += a * a;
                    m = m.max(a);
                }
                // Taking the max with the largest entry keeps the value positive
                // when the squares underflow, and stays monotone in every entry.
                s.sqrt().max(m)
            }
            NormSpec::Max => {
                let mut m: f64 = 0.0;
                for i in start..start + len {
                    m = m.max(abs(i));
                }
                m
            }
            NormSpec::Product { blocks } => {
                let mut m: f64 = 0.0;
                let mut offset = start;
                for (d, spec) in blocks {
                    m = m.max(spec.eval_abs(offset, *d, abs));
                    offset += d;
                }
                m
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn product() -> NormSpec {
        NormSpec::Product { blocks: vec![(2, NormSpec::Euclidean), (1, NormSpec::Max)] }
    }

    #[test]
    fn basic_values() {
        assert_eq!(NormSpec::Euclidean.eval(&[3.0, 4.0]), 5.0);
        assert_eq!(NormSpec::Max.eval(&[3.0, -4.0]), 4.0);
        assert_eq!(product().eval(&[3.0, 4.0, -6.0]), 6.0);
        assert_eq!(product().eval(&[3.0, 4.0, 1.0]), 5.0);
    }

    #[test]
    fn validate_block_dimensions() {
        assert!(product().validate(3).is_ok());
        assert!(product().validate(4).is_err());
        let empty = NormSpec::Product { blocks: vec![] };
        assert!(empty.validate(0).is_err());
    }

    #[test]
    fn json_format() {
        let s = serde_json::to_string(&product()).unwrap();
        assert_eq!(s, r#"{"kind":"product","blocks":[[2,{"kind":"euclidean"}],[1,{"kind":"max"}]]}"#);
        let back: NormSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, product());
        assert!(serde_json::from_str::<NormSpec>(r#"{"kind":"l7"}"#).is_err());
    }

    #[test]
    fn zero_only_at_origin() {
        for n in [NormSpec::Euclidean, NormSpec::Max, product()] {
            assert_eq!(n.eval(&[0.0, 0.0, 0.0]), 0.0);
            assert!(n.eval(&[0.0, 1e-300, 0.0]) > 0.0);
        }
    }

    fn norms() -> impl Strategy<Value = NormSpec> {
        prop_oneof![
            Just(NormSpec::Euclidean),
            Just(NormSpec::Max),
            Just(product()),
            Just(NormSpec::Product { blocks: vec![(1, NormSpec::Max), (2, NormSpec::Max)] }),
        ]
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1e3f64..1e3, 3)
    }

    proptest! {
        #[test]
        fn triangle_inequality(n in norms(), a in vec3(), b in vec3(), c in vec3()) {
            let ab = n.dist(&a, &b);
            let bc = n.dist(&b, &c);
            let ac = n.dist(&a, &c);
            prop_assert!(ac <= (ab + bc) * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn absolute_homogeneity(n in norms(), a in vec3(), t in -50.0f64..50.0) {
            let scaled: Vec<f64> = a.iter().map(|v| v * t).collect();
            let lhs = n.eval(&scaled);
            let rhs = t.abs() * n.eval(&a);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
        }

        #[test]
        fn box_bound_is_a_lower_bound(
            n in norms(),
            x in vec3(),
            corner in vec3(),
            widths in proptest::collection::vec(0.0f64..10.0, 3),
            frac in proptest::collection::vec(0.0f64..=1.0, 3),
        ) {
            let lo = corner.clone();
            let hi: Vec<f64> = corner.iter().zip(&widths).map(|(c, w)| c + w).collect();
            let p: Vec<f64> = (0..3).map(|i| (lo[i] + frac[i] * widths[i]).min(hi[i])).collect();
            prop_assert!(n.dist_to_box(&x, &lo, &hi) <= n.dist(&x, &p));
        }
    }
}
