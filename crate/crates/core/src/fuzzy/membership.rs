use serde::{Deserialize, Serialize};

use super::FuzzyError;

/// Triangle `(a, b, c)` with feet `a`, `c` and peak `b`.
///
/// `a == b` is a left shoulder: the degree is 1 everywhere left of the peak.
/// `b == c` is a right shoulder, symmetrically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct TriangularMf {
    a: f64,
    b: f64,
    c: f64,
}

impl TriangularMf {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, FuzzyError> {
        let finite = a.is_finite() && b.is_finite() && c.is_finite();
        if !finite || a > b || b > c || a >= c {
            return Err(FuzzyError::MalformedMf { a, b, c });
        }
        Ok(Self { a, b, c })
    }

    /// Vertices from a range `[l, u]` on the universe `[lo, hi]`.
    ///
    /// A range starting at `lo` becomes a left shoulder, one ending at `hi` a
    /// right shoulder, anything else a symmetric triangle. A range spanning
    /// the whole universe is treated as interior.
    pub fn from_range(l: f64, u: f64, lo: f64, hi: f64) -> Result<Self, FuzzyError> {
        match (l == lo, u == hi) {
            (true, false) => Self::new(l, l, u),
            (false, true) => Self::new(l, u, u),
            _ => Self::new(l, (l + u) / 2.0, u),
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn vertices(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn is_left_shoulder(&self) -> bool {
        self.a == self.b
    }

    pub fn is_right_shoulder(&self) -> bool {
        self.b == self.c
    }

    pub fn membership(&self, x: f64) -> f64 {
        let Self { a, b, c } = *self;
        if x <= b && a == b {
            return 1.0;
        }
        if x >= b && b == c {
            return 1.0;
        }
        if x <= a || x >= c {
            0.0
        } else if x <= b {
            (x - a) / (b - a)
        } else {
            (c - x) / (c - b)
        }
    }

    /// Open interval on which the degree is strictly positive.
    pub(crate) fn positive_region(&self) -> (f64, f64) {
        let lo = if self.is_left_shoulder() {
            f64::NEG_INFINITY
        } else {
            self.a
        };
        let hi = if self.is_right_shoulder() {
            f64::INFINITY
        } else {
            self.c
        };
        (lo, hi)
    }
}

impl TryFrom<[f64; 3]> for TriangularMf {
    type Error = FuzzyError;

    fn try_from([a, b, c]: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(a, b, c)
    }
}

impl From<TriangularMf> for [f64; 3] {
    fn from(mf: TriangularMf) -> Self {
        mf.vertices()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tri(a: f64, b: f64, c: f64) -> TriangularMf {
        TriangularMf::new(a, b, c).unwrap()
    }

    #[test]
    fn peak_and_feet() {
        let mf = tri(3.0, 5.0, 7.0);
        assert_eq!(mf.membership(5.0), 1.0);
        assert_eq!(mf.membership(8.0), 0.0);
        assert_eq!(mf.membership(3.0), 0.0);
        assert_eq!(mf.membership(7.0), 0.0);
    }

    #[test]
    fn rising_edge() {
        // (4.8 - 3) / (5 - 3)
        assert!((tri(3.0, 5.0, 7.0).membership(4.8) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn shoulders() {
        let left = tri(0.0, 0.0, 4.0);
        assert_eq!(left.membership(0.0), 1.0);
        assert_eq!(left.membership(-3.0), 1.0);
        assert_eq!(left.membership(2.0), 0.5);
        assert_eq!(left.membership(4.0), 0.0);
        let right = tri(6.0, 10.0, 10.0);
        assert_eq!(right.membership(10.0), 1.0);
        assert_eq!(right.membership(12.0), 1.0);
        assert_eq!(right.membership(8.0), 0.5);
    }

    #[test]
    fn malformed_is_rejected_at_construction() {
        assert!(TriangularMf::new(5.0, 3.0, 7.0).is_err());
        assert!(TriangularMf::new(3.0, 8.0, 7.0).is_err());
        assert!(TriangularMf::new(2.0, 2.0, 2.0).is_err());
        assert!(TriangularMf::new(f64::NAN, 2.0, 3.0).is_err());
        assert!(serde_json::from_str::<TriangularMf>("[3, 1, 2]").is_err());
    }

    #[test]
    fn range_conversion() {
        let v = |l, u, lo, hi| TriangularMf::from_range(l, u, lo, hi).unwrap().vertices();
        assert_eq!(v(0.0, 4.0, 0.0, 10.0), [0.0, 0.0, 4.0]);
        assert_eq!(v(3.0, 7.0, 0.0, 10.0), [3.0, 5.0, 7.0]);
        assert_eq!(v(6.0, 10.0, 0.0, 10.0), [6.0, 10.0, 10.0]);
        assert_eq!(v(8.0, 25.0, 0.0, 100.0), [8.0, 16.5, 25.0]);
        assert_eq!(v(60.0, 100.0, 0.0, 100.0), [60.0, 100.0, 100.0]);
    }

    fn arb_mf() -> impl Strategy<Value = TriangularMf> {
        (-50.0..50.0f64, 0.0..20.0f64, 0.0..20.0f64, 0usize..3).prop_filter_map(
            "zero width",
            |(a, l, r, shape)| {
                let (l, r) = match shape {
                    0 => (0.0, r),
                    1 => (l, 0.0),
                    _ => (l, r),
                };
                TriangularMf::new(a, a + l, a + l + r).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn degree_in_unit_interval(mf in arb_mf(), x in -100.0..100.0f64) {
            let m = mf.membership(x);
            prop_assert!((0.0..=1.0).contains(&m));
        }

        #[test]
        fn lipschitz_continuous(mf in arb_mf(), x in -100.0..100.0f64) {
            let eps = 1e-6;
            let mut steepest: f64 = 0.0;
            if mf.b() > mf.a() { steepest = steepest.max(1.0 / (mf.b() - mf.a())); }
            if mf.c() > mf.b() { steepest = steepest.max(1.0 / (mf.c() - mf.b())); }
            let jump = (mf.membership(x + eps) - mf.membership(x)).abs();
            prop_assert!(jump <= eps * steepest + 1e-12);
        }

        #[test]
        fn zero_outside_positive_region(mf in arb_mf(), x in -100.0..100.0f64) {
            let (lo, hi) = mf.positive_region();
            let inside = x > lo && x < hi;
            prop_assert_eq!(mf.membership(x) > 0.0, inside);
        }
    }
}
