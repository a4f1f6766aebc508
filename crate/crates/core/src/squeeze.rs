//! Two-sideband transfer functions.
//!
//! A [`TransferSet`] maps the input vacuum pair `(q(f+F), q†(f-F))` about a
//! reference `f` onto the output pair `(s(f+F), s†(f-F))`:
//!
//! ```text
//! s (f+F) = t00 q(f+F) + t01 q†(f-F)
//! s†(f-F) = t10 q(f+F) + t11 q†(f-F)
//! ```
//!
//! Only frequency-independent transfers are represented. Inside the validity
//! band each function evaluates to its constant; outside it the set acts as
//! the identity.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{SqueezerSpec, DEFAULT_COINCIDENCE_TOL_HZ};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferSet {
    pub t00: Complex64,
    pub t01: Complex64,
    pub t10: Complex64,
    pub t11: Complex64,
    pub ref_offset_hz: f64,
    /// Half-width of the band around the reference where the transfers apply.
    pub halfwidth_hz: f64,
}

impl TransferSet {
    pub fn identity(ref_offset_hz: f64, halfwidth_hz: f64) -> Self {
        Self {
            t00: ONE,
            t01: ZERO,
            t10: ZERO,
            t11: ONE,
            ref_offset_hz,
            halfwidth_hz,
        }
    }

    fn in_band(&self, offset_hz: f64) -> bool {
        (offset_hz - self.ref_offset_hz).abs() <= self.halfwidth_hz
    }

    pub fn t00_at(&self, offset_hz: f64) -> Complex64 {
        if self.in_band(offset_hz) { self.t00 } else { ONE }
    }

    pub fn t01_at(&self, offset_hz: f64) -> Complex64 {
        if self.in_band(offset_hz) { self.t01 } else { ZERO }
    }

    pub fn t10_at(&self, offset_hz: f64) -> Complex64 {
        if self.in_band(offset_hz) { self.t10 } else { ZERO }
    }

    pub fn t11_at(&self, offset_hz: f64) -> Complex64 {
        if self.in_band(offset_hz) { self.t11 } else { ONE }
    }

    pub fn determinant(&self) -> Complex64 {
        self.t00 * self.t11 - self.t01 * self.t10
    }

    /// Maps an input pair `(q(f+F), conj q(f-F))` to `(s(f+F), conj s(f-F))`.
    pub fn apply(&self, upper: Complex64, lower_conj: Complex64) -> (Complex64, Complex64) {
        (
            self.t00 * upper + self.t01 * lower_conj,
            self.t10 * upper + self.t11 * lower_conj,
        )
    }
}

/// Pure squeezing, `s(f±F) = cosh r q(f±F) + sinh r e^{2i phi} q†(f∓F)`, over
/// `ref ± halfwidth_hz`.
pub fn pure_squeeze_transfers(spec: &SqueezerSpec, halfwidth_hz: f64) -> TransferSet {
    let (ch, sh) = (spec.r.cosh(), spec.r.sinh());
    TransferSet {
        t00: Complex64::new(ch, 0.0),
        t01: Complex64::from_polar(sh, 2.0 * spec.phi_rad),
        t10: Complex64::from_polar(sh, -2.0 * spec.phi_rad),
        t11: Complex64::new(ch, 0.0),
        ref_offset_hz: spec.ref_offset_hz,
        halfwidth_hz,
    }
}

/// Transfer set of applying `inner` first, then `outer`.
pub fn compose_transfers(outer: &TransferSet, inner: &TransferSet) -> Result<TransferSet> {
    if (outer.ref_offset_hz - inner.ref_offset_hz).abs() > DEFAULT_COINCIDENCE_TOL_HZ
        || (outer.halfwidth_hz - inner.halfwidth_hz).abs() > DEFAULT_COINCIDENCE_TOL_HZ
    {
        return Err(Error::MismatchedReference);
    }
    Ok(TransferSet {
        t00: outer.t00 * inner.t00 + outer.t01 * inner.t10,
        t01: outer.t00 * inner.t01 + outer.t01 * inner.t11,
        t10: outer.t10 * inner.t00 + outer.t11 * inner.t10,
        t11: outer.t10 * inner.t01 + outer.t11 * inner.t11,
        ref_offset_hz: outer.ref_offset_hz,
        halfwidth_hz: outer.halfwidth_hz,
    })
}
