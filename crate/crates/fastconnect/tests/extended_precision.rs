//! Double-double audit of the reference evaluator and the ratio table.
//!
//! Everything here is built from scratch on f64::mul_add and shares no
//! code with the library internals: an independent 106-bit evaluation
//! of both dense transforms pins down the compensated oracle, the
//! diagonal-band inverse formula, and the Λ table at the same time.

use fastconnect::{lambda_vector, oracle_transform, random_decaying, Direction, RandomSpec};

/// Unevaluated double-double value hi + lo with |lo| <= ulp(hi) / 2.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

/// pi to 106 bits; the low word is the remainder of pi after the
/// nearest double, frozen from an independent multiprecision source.
/// Spelled as literals on purpose: the audit must not borrow the
/// library's constants.
#[allow(clippy::approx_constant)]
const PI_DD: Dd = Dd {
    hi: 3.141592653589793,
    lo: 1.2246467991473532e-16,
};

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

/// Requires |a| >= |b| or a == 0.
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        quick_two_sum(s.hi, s.lo + self.lo + o.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    fn mul_f64(self, b: f64) -> Dd {
        let p = two_prod(self.hi, b);
        quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    fn div_f64(self, b: f64) -> Dd {
        let q0 = self.hi / b;
        let r = self.add(two_prod(q0, b).neg());
        let q1 = (r.hi + r.lo) / b;
        quick_two_sum(q0, q1)
    }

    fn div(self, o: Dd) -> Dd {
        let q0 = self.hi / o.hi;
        let r = self.add(o.mul_f64(q0).neg());
        let q1 = r.hi / o.hi;
        let r2 = r.add(o.mul_f64(q1).neg());
        let q2 = r2.hi / o.hi;
        let q = quick_two_sum(q0, q1);
        quick_two_sum(q.hi, q.lo + q2)
    }
}

/// One Newton step on the double square root; accurate to O(eps^2).
fn dd_sqrt(a: Dd) -> Dd {
    let s0 = a.hi.sqrt();
    let r = a.add(two_prod(s0, s0).neg());
    let e = r.value() / (2.0 * s0);
    quick_two_sum(s0, e)
}

/// Λ(k) = Γ(k + 1/2) / Γ(k + 1) by the exact-integer ratio recurrence
/// from Λ(0) = sqrt(pi); each step costs two dd roundings, so the whole
/// table stays far below one f64 ulp of drift.
fn lambda_dd(n: usize) -> Vec<Dd> {
    let mut v = Vec::with_capacity(n);
    let mut cur = dd_sqrt(PI_DD);
    v.push(cur);
    for k in 1..n {
        cur = cur
            .mul_f64((2 * k - 1) as f64)
            .div_f64((2 * k) as f64);
        v.push(cur);
    }
    v
}

/// Dense forward map z_i = scale_i Σ_k Λ_k Λ_{k+i} f_{i+2k} in dd.
fn l2c_dd(f: &[f64], lam: &[Dd]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let mut acc = Dd::from(0.0);
            let mut k = 0;
            while i + 2 * k < n {
                acc = acc.add(lam[k].mul(lam[k + i]).mul_f64(f[i + 2 * k]));
                k += 1;
            }
            let acc = if i == 0 { acc } else { acc.mul_f64(2.0) };
            acc.div(PI_DD).value()
        })
        .collect()
}

/// Band prefactor of the inverse map at row x = i, column y = i + 2k.
/// Numerator and denominator are exact integers below 2^53, so the
/// quotient is one correctly rounded division plus its fma remainder.
fn pref_dd(i: usize, k: usize) -> Dd {
    if k == 0 {
        return Dd::from(0.5);
    }
    let x = i as f64;
    let y = (i + 2 * k) as f64;
    let num = (2.0 * x + 1.0) * y;
    let den = (x + y) * (x + y + 1.0) * (x - y + 1.0);
    let q0 = num / den;
    let q1 = (-q0).mul_add(den, num) / den;
    quick_two_sum(q0, q1)
}

/// Dense inverse map via the explicit diagonal-band formula, nothing
/// shared with the oracle's triangular back-substitution.
fn c2l_dd(g: &[f64], lam: &[Dd]) -> Vec<f64> {
    let n = g.len();
    let mut gmod = g.to_vec();
    if n > 0 {
        gmod[0] *= 2.0;
    }
    (0..n)
        .map(|i| {
            let mut acc = Dd::from(0.0);
            let mut k = 0;
            while i + 2 * k < n {
                let term = pref_dd(i, k)
                    .mul(lam[k].div(lam[k + i]))
                    .mul_f64(gmod[i + 2 * k]);
                acc = acc.add(term);
                k += 1;
            }
            acc.value()
        })
        .collect()
}

fn rel_inf(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let scale = want.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(scale > 0.0);
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale
}

#[test]
fn dd_pi_is_normalized_and_roots_the_table() {
    let renorm = two_sum(PI_DD.hi, PI_DD.lo);
    assert_eq!(renorm.hi.to_bits(), PI_DD.hi.to_bits());
    assert_eq!(renorm.lo.to_bits(), PI_DD.lo.to_bits());
    // The dd square root lands on the correctly rounded sqrt(pi), one
    // ulp above PI.sqrt(), and the library table starts at the same
    // double.
    let root = dd_sqrt(PI_DD);
    assert_eq!(root.hi.to_bits(), 1.772453850905516f64.to_bits());
    let lam = lambda_vector(1).unwrap();
    assert_eq!(lam[0].to_bits(), root.hi.to_bits());
}

#[test]
fn lambda_table_stays_within_two_ulps_of_dd() {
    let n = 4096;
    let lam = lambda_vector(n).unwrap();
    let dd = lambda_dd(n);
    let mut worst = 0.0f64;
    for k in 0..n {
        let want = dd[k].value();
        let ulps = (lam[k] - want).abs() / (want * f64::EPSILON);
        worst = worst.max(ulps);
    }
    assert!(worst <= 2.0, "table drifts {worst:.2} ulps from dd");
}

#[test]
fn oracle_forward_matches_dd_dense() {
    for (len, decay, seed, limit) in [(1024usize, 0.5, 2024u64, 1e-15), (2048, 0.0, 77, 1e-15)] {
        let f = random_decaying(&RandomSpec { len, seed, decay });
        let lam = lambda_dd(len);
        let want = l2c_dd(&f, &lam);
        let got = oracle_transform(Direction::LegendreToChebyshev, &f).unwrap();
        let err = rel_inf(&got, &want);
        assert!(err <= limit, "n = {len}: oracle off dd by {err:.3e}");
    }
}

#[test]
fn oracle_backsolve_matches_dd_band_formula() {
    for (len, decay, seed, limit) in [(1024usize, 0.5, 2024u64, 2e-15), (2048, 0.0, 77, 2e-15)] {
        let g = random_decaying(&RandomSpec { len, seed, decay });
        let lam = lambda_dd(len);
        let want = c2l_dd(&g, &lam);
        let got = oracle_transform(Direction::ChebyshevToLegendre, &g).unwrap();
        let err = rel_inf(&got, &want);
        assert!(err <= limit, "n = {len}: backsolve off band formula by {err:.3e}");
    }
}

#[test]
fn compensated_summation_earns_its_keep() {
    // Plain left-to-right accumulation of the same dense sum, measured
    // against the dd truth alongside the compensated oracle.
    let len = 4096;
    let f = random_decaying(&RandomSpec { len, seed: 9, decay: 0.0 });
    let lamf = lambda_vector(len).unwrap();
    let lam = lambda_dd(len);
    let truth = l2c_dd(&f, &lam);

    let mut plain = vec![0.0f64; len];
    for (i, zi) in plain.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut k = 0;
        while i + 2 * k < len {
            acc += lamf[k] * lamf[k + i] * f[i + 2 * k];
            k += 1;
        }
        *zi = if i == 0 {
            acc / std::f64::consts::PI
        } else {
            acc * std::f64::consts::FRAC_2_PI
        };
    }
    let comp = oracle_transform(Direction::LegendreToChebyshev, &f).unwrap();

    let err_plain = rel_inf(&plain, &truth);
    let err_comp = rel_inf(&comp, &truth);
    assert!(err_comp <= 5e-16, "compensated error {err_comp:.3e}");
    assert!(
        err_comp * 4.0 <= err_plain,
        "compensation gained too little: plain {err_plain:.3e}, compensated {err_comp:.3e}"
    );
}
