//! Minimal double-double arithmetic and error-free transformations.
//!
//! Internal support for the two places the crate needs more than one
//! double of working precision: keeping the Λ recursion correctly rounded
//! (`gamma_ratio`) and compensated accumulation in the test oracles
//! (`oracle`). Only the handful of operations those callers need is
//! implemented.

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2` when normalized.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum: returns (s, e) with s = fl(a+b) and a+b = s+e exactly.
#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: e }
}

/// Like `two_sum` but requires |a| >= |b|.
#[inline]
pub(crate) fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    // Dekker split at 2^27 + 1; safe for the magnitudes this crate handles.
    let t = 134_217_729.0 * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Error-free product: returns (p, e) with p = fl(a*b) and a*b = p+e exactly.
#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    Dd { hi: p, lo: e }
}

impl Dd {
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        quick_two_sum(s.hi, s.lo + self.lo + o.lo)
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Dd {
        let s = two_sum(self.hi, b);
        quick_two_sum(s.hi, s.lo + self.lo)
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let p = two_prod(self.hi, b);
        quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self.sub(two_prod(q1, b));
        let q2 = (r.hi + r.lo) / b;
        quick_two_sum(q1, q2)
    }

    #[inline]
    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = (r.hi + r.lo) / o.hi;
        quick_two_sum(q1, q2)
    }

    /// Square root by one Newton correction of the double-precision root.
    /// Requires a positive, normalized value.
    #[inline]
    pub fn sqrt(self) -> Dd {
        let y = self.hi.sqrt();
        let r = self.sub(two_prod(y, y));
        let c = (r.hi + r.lo) / (2.0 * y);
        quick_two_sum(y, c)
    }
}
