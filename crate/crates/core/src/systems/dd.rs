//! Double-double arithmetic for the central coordinate of long nilflow orbits.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {

    #[inline]
    pub fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    pub fn prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, v: f64) -> Dd {
        self.add(Dd::from_f64(v))
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, v: f64) -> Dd {
        self.mul(Dd::from_f64(v))
    }

    #[inline]
    pub fn scale_pow2(self, v: f64) -> Dd {
        Dd {
            hi: self.hi * v,
            lo: self.lo * v,
        }
    }

    #[inline]
    pub fn floor(self) -> f64 {
        let f = self.hi.floor();
        if f == self.hi {
            // hi is an integer; the tail decides
            if self.lo < 0.0 {
                f - 1.0
            } else {
                f
            }
        } else {
            f
        }
    }

    /// Fractional part in `[0, 1)` and the floor.
    #[inline]
    pub fn split_floor(self) -> (f64, f64) {
        let f = self.floor();
        let r = (self.hi - f) + self.lo;
        if r >= 1.0 {
            (0.0, f + 1.0)
        } else if r < 0.0 {
            (0.0, f)
        } else {
            (r, f)
        }
    }
}
