//! The seven fixed semirings, their scalar values, casting, and the
//! encoding into the extended-real carrier used when a multi-semiring
//! program is simulated over a single semiring.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// One of the fixed semirings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemiringId {
    Bool,
    Int,
    Real,
    IntMinPlus,
    RealMinPlus,
    IntMaxPlus,
    RealMaxPlus,
}

/// The underlying domain of a semiring. Casting only looks at this.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Bool,
    Int,
    Real,
}

impl SemiringId {
    pub const ALL: [SemiringId; 7] = [
        SemiringId::Bool,
        SemiringId::Int,
        SemiringId::Real,
        SemiringId::IntMinPlus,
        SemiringId::RealMinPlus,
        SemiringId::IntMaxPlus,
        SemiringId::RealMaxPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SemiringId::Bool => "bool",
            SemiringId::Int => "int",
            SemiringId::Real => "real",
            SemiringId::IntMinPlus => "int_min_plus",
            SemiringId::RealMinPlus => "real_min_plus",
            SemiringId::IntMaxPlus => "int_max_plus",
            SemiringId::RealMaxPlus => "real_max_plus",
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            SemiringId::Bool => Domain::Bool,
            SemiringId::Int | SemiringId::IntMinPlus | SemiringId::IntMaxPlus => Domain::Int,
            SemiringId::Real | SemiringId::RealMinPlus | SemiringId::RealMaxPlus => Domain::Real,
        }
    }

    pub fn is_min_plus(self) -> bool {
        matches!(self, SemiringId::IntMinPlus | SemiringId::RealMinPlus)
    }

    pub fn is_max_plus(self) -> bool {
        matches!(self, SemiringId::IntMaxPlus | SemiringId::RealMaxPlus)
    }

    /// Rings whose values are compared with a relative tolerance.
    pub fn is_real_family(self) -> bool {
        self.domain() == Domain::Real
    }
}

impl fmt::Display for SemiringId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown semiring `{0}`")]
pub struct UnknownSemiring(pub String);

impl FromStr for SemiringId {
    type Err = UnknownSemiring;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SemiringId::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| UnknownSemiring(s.to_string()))
    }
}

/// Raw payload of a scalar. Which variants are legal depends on the ring;
/// see [`in_carrier`].
#[derive(Debug, Clone, Copy)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    /// Always finite and never `-0.0`.
    Real(f64),
    PosInf,
    NegInf,
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Bool(a), Scalar::Bool(b)) => a == b,
            (Scalar::Int(a), Scalar::Int(b)) => a == b,
            (Scalar::Real(a), Scalar::Real(b)) => a.to_bits() == b.to_bits(),
            (Scalar::PosInf, Scalar::PosInf) | (Scalar::NegInf, Scalar::NegInf) => true,
            _ => false,
        }
    }
}

impl Eq for Scalar {}

impl Scalar {
    /// Builds a real payload, mapping IEEE infinities to the sentinel
    /// variants and normalizing `-0.0`. NaN has no representation.
    pub fn from_f64(x: f64) -> Option<Scalar> {
        if x.is_nan() {
            None
        } else if x == f64::INFINITY {
            Some(Scalar::PosInf)
        } else if x == f64::NEG_INFINITY {
            Some(Scalar::NegInf)
        } else if x == 0.0 {
            Some(Scalar::Real(0.0))
        } else {
            Some(Scalar::Real(x))
        }
    }

    pub fn as_f64(self) -> Option<f64> {
        match self {
            Scalar::Int(i) => Some(i as f64),
            Scalar::Real(x) => Some(x),
            Scalar::PosInf => Some(f64::INFINITY),
            Scalar::NegInf => Some(f64::NEG_INFINITY),
            Scalar::Bool(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("semiring mismatch: {0} vs {1}")]
    RingMismatch(SemiringId, SemiringId),
    #[error("operation `{op}` is not defined over {ring}")]
    Unsupported { op: &'static str, ring: SemiringId },
    #[error("integer overflow in `{0}`")]
    IntOverflow(&'static str),
    #[error("real overflow in `{0}`")]
    RealOverflow(&'static str),
    #[error("division by zero")]
    DivisionByZero,
    #[error("undefined operation on infinities in `{0}`")]
    UndefinedInfinity(&'static str),
    #[error("cast of {value} from {src} to {dst} is out of range")]
    CastOutOfRange { value: String, src: SemiringId, dst: SemiringId },
    #[error("value {value} is not in the carrier of {ring}")]
    NotInCarrier { value: String, ring: SemiringId },
}

/// Whether `s` is a legal payload for `ring` under the strict carriers.
pub fn in_carrier(ring: SemiringId, s: Scalar) -> bool {
    match (ring.domain(), s) {
        (Domain::Bool, Scalar::Bool(_)) => true,
        (Domain::Int, Scalar::Int(_)) | (Domain::Real, Scalar::Real(_)) => true,
        (_, Scalar::PosInf) => ring.is_min_plus(),
        (_, Scalar::NegInf) => ring.is_max_plus(),
        _ => false,
    }
}

/// Carrier of the encoding target: plain reals extended with both
/// infinities. Other rings keep their strict carrier.
pub fn in_encoded_carrier(ring: SemiringId, s: Scalar) -> bool {
    match (ring, s) {
        (SemiringId::Real, Scalar::PosInf | Scalar::NegInf) => true,
        _ => in_carrier(ring, s),
    }
}

/// A scalar tagged with the semiring it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarValue {
    ring: SemiringId,
    scalar: Scalar,
}

/// A value of the encoding target: ring `Real`, payload possibly ±∞.
pub type EncodedValue = ScalarValue;

impl ScalarValue {
    pub fn new(ring: SemiringId, scalar: Scalar) -> Result<Self, ArithError> {
        let scalar = normalize(scalar);
        if in_carrier(ring, scalar) {
            Ok(ScalarValue { ring, scalar })
        } else {
            Err(not_in_carrier(ring, scalar))
        }
    }

    /// Builds a value in the extended-real carrier (or any strict carrier).
    pub fn new_encoded(ring: SemiringId, scalar: Scalar) -> Result<Self, ArithError> {
        let scalar = normalize(scalar);
        if in_encoded_carrier(ring, scalar) {
            Ok(ScalarValue { ring, scalar })
        } else {
            Err(not_in_carrier(ring, scalar))
        }
    }

    pub(crate) fn from_parts_unchecked(ring: SemiringId, scalar: Scalar) -> Self {
        ScalarValue { ring, scalar }
    }

    pub fn bool(b: bool) -> Self {
        ScalarValue { ring: SemiringId::Bool, scalar: Scalar::Bool(b) }
    }

    pub fn int(i: i64) -> Self {
        ScalarValue { ring: SemiringId::Int, scalar: Scalar::Int(i) }
    }

    /// Panics on non-finite input; use [`ScalarValue::new`] for fallible construction.
    pub fn real(x: f64) -> Self {
        assert!(x.is_finite(), "real scalar must be finite");
        ScalarValue { ring: SemiringId::Real, scalar: normalize(Scalar::Real(x)) }
    }

    pub fn ring(&self) -> SemiringId {
        self.ring
    }

    pub fn scalar(&self) -> Scalar {
        self.scalar
    }

    pub fn is_zero(&self) -> bool {
        self.scalar == zero_scalar(self.ring)
    }
}

impl fmt::Display for ScalarValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_scalar(self.scalar))
    }
}

/// Canonical value token: `true`/`false`, integers, shortest round-trip
/// reals, `inf`, `-inf`.
pub fn format_scalar(s: Scalar) -> String {
    match s {
        Scalar::Bool(b) => b.to_string(),
        Scalar::Int(i) => i.to_string(),
        Scalar::Real(x) => format!("{x:?}"),
        Scalar::PosInf => "inf".to_string(),
        Scalar::NegInf => "-inf".to_string(),
    }
}

/// Parses a value token into the carrier of `ring` (extended carrier if
/// `encoded` is set).
pub fn parse_scalar(ring: SemiringId, token: &str, encoded: bool) -> Result<ScalarValue, ArithError> {
    let bad = || ArithError::NotInCarrier { value: token.to_string(), ring };
    let scalar = match token {
        "inf" | "+inf" => Scalar::PosInf,
        "-inf" => Scalar::NegInf,
        "true" => Scalar::Bool(true),
        "false" => Scalar::Bool(false),
        _ => match ring.domain() {
            Domain::Bool => return Err(bad()),
            Domain::Int => Scalar::Int(token.parse::<i64>().map_err(|_| bad())?),
            Domain::Real => {
                if !token.bytes().any(|b| b.is_ascii_digit()) {
                    return Err(bad());
                }
                let x = token.parse::<f64>().map_err(|_| bad())?;
                if !x.is_finite() {
                    return Err(bad());
                }
                Scalar::Real(x)
            }
        },
    };
    if encoded {
        ScalarValue::new_encoded(ring, scalar)
    } else {
        ScalarValue::new(ring, scalar)
    }
}

pub(crate) fn normalize(s: Scalar) -> Scalar {
    match s {
        Scalar::Real(x) => Scalar::from_f64(x).unwrap_or(s),
        other => other,
    }
}

fn not_in_carrier(ring: SemiringId, s: Scalar) -> ArithError {
    ArithError::NotInCarrier { value: format_scalar(s), ring }
}

pub(crate) fn zero_scalar(r: SemiringId) -> Scalar {
    match r {
        SemiringId::Bool => Scalar::Bool(false),
        SemiringId::Int => Scalar::Int(0),
        SemiringId::Real => Scalar::Real(0.0),
        SemiringId::IntMinPlus | SemiringId::RealMinPlus => Scalar::PosInf,
        SemiringId::IntMaxPlus | SemiringId::RealMaxPlus => Scalar::NegInf,
    }
}

pub(crate) fn one_scalar(r: SemiringId) -> Scalar {
    match r.domain() {
        Domain::Bool => Scalar::Bool(true),
        Domain::Int => {
            if r == SemiringId::Int {
                Scalar::Int(1)
            } else {
                Scalar::Int(0)
            }
        }
        Domain::Real => {
            if r == SemiringId::Real {
                Scalar::Real(1.0)
            } else {
                Scalar::Real(0.0)
            }
        }
    }
}

/// Additive identity of `r`.
pub fn zero(r: SemiringId) -> ScalarValue {
    ScalarValue { ring: r, scalar: zero_scalar(r) }
}

/// Multiplicative identity of `r`.
pub fn one(r: SemiringId) -> ScalarValue {
    ScalarValue { ring: r, scalar: one_scalar(r) }
}

fn same_ring(a: &ScalarValue, b: &ScalarValue) -> Result<SemiringId, ArithError> {
    if a.ring == b.ring {
        Ok(a.ring)
    } else {
        Err(ArithError::RingMismatch(a.ring, b.ring))
    }
}

fn real_result(x: f64, op: &'static str) -> Result<Scalar, ArithError> {
    if x.is_finite() {
        Ok(normalize(Scalar::Real(x)))
    } else {
        Err(ArithError::RealOverflow(op))
    }
}

fn checked_int(a: i64, b: i64, f: fn(i64, i64) -> Option<i64>, op: &'static str) -> Result<Scalar, ArithError> {
    f(a, b).map(Scalar::Int).ok_or(ArithError::IntOverflow(op))
}

/// Sum in the extended reals. Zero is neutral, `+∞ + −∞` is undefined.
fn ext_real_add(a: Scalar, b: Scalar) -> Result<Scalar, ArithError> {
    match (a, b) {
        (Scalar::Real(x), Scalar::Real(y)) => real_result(x + y, "+"),
        (Scalar::PosInf, Scalar::NegInf) | (Scalar::NegInf, Scalar::PosInf) => Err(ArithError::UndefinedInfinity("+")),
        (inf @ (Scalar::PosInf | Scalar::NegInf), _) | (_, inf @ (Scalar::PosInf | Scalar::NegInf)) => Ok(inf),
        _ => unreachable!("non-real payload in real ring"),
    }
}

fn sign_of(s: Scalar) -> f64 {
    match s {
        Scalar::Real(x) => x.signum(),
        Scalar::PosInf => 1.0,
        Scalar::NegInf => -1.0,
        _ => unreachable!("non-real payload in real ring"),
    }
}

/// Product in the extended reals with `0 · ±∞ = 0`.
fn ext_real_mul(a: Scalar, b: Scalar) -> Result<Scalar, ArithError> {
    match (a, b) {
        (Scalar::Real(x), Scalar::Real(y)) => real_result(x * y, "*"),
        (Scalar::Real(z), _) | (_, Scalar::Real(z)) if z == 0.0 => Ok(Scalar::Real(0.0)),
        _ => Ok(if sign_of(a) * sign_of(b) > 0.0 { Scalar::PosInf } else { Scalar::NegInf }),
    }
}

fn ext_real_sub(a: Scalar, b: Scalar) -> Result<Scalar, ArithError> {
    let neg = match b {
        Scalar::Real(y) => Scalar::Real(-y),
        Scalar::PosInf => Scalar::NegInf,
        Scalar::NegInf => Scalar::PosInf,
        _ => unreachable!("non-real payload in real ring"),
    };
    ext_real_add(a, normalize(neg)).map_err(|e| match e {
        ArithError::UndefinedInfinity(_) => ArithError::UndefinedInfinity("-"),
        ArithError::RealOverflow(_) => ArithError::RealOverflow("-"),
        e => e,
    })
}

pub(crate) fn add_scalar(r: SemiringId, a: Scalar, b: Scalar) -> Result<Scalar, ArithError> {
    match (r, a, b) {
        (SemiringId::Bool, Scalar::Bool(x), Scalar::Bool(y)) => Ok(Scalar::Bool(x || y)),
        (SemiringId::Int, Scalar::Int(x), Scalar::Int(y)) => checked_int(x, y, i64::checked_add, "+"),
        (SemiringId::Real, _, _) => ext_real_add(a, b),
        (SemiringId::IntMinPlus | SemiringId::RealMinPlus, _, _) => Ok(tropical_min(a, b)),
        (SemiringId::IntMaxPlus | SemiringId::RealMaxPlus, _, _) => Ok(tropical_max(a, b)),
        _ => Err(not_in_carrier(r, a)),
    }
}

pub(crate) fn mul_scalar(r: SemiringId, a: Scalar, b: Scalar) -> Result<Scalar, ArithError> {
    match (r, a, b) {
        (SemiringId::Bool, Scalar::Bool(x), Scalar::Bool(y)) => Ok(Scalar::Bool(x && y)),
        (SemiringId::Int, Scalar::Int(x), Scalar::Int(y)) => checked_int(x, y, i64::checked_mul, "*"),
        (SemiringId::Real, _, _) => ext_real_mul(a, b),
        (_, inf @ (Scalar::PosInf | Scalar::NegInf), _) | (_, _, inf @ (Scalar::PosInf | Scalar::NegInf)) => Ok(inf),
        (_, Scalar::Int(x), Scalar::Int(y)) => checked_int(x, y, i64::checked_add, "*"),
        (_, Scalar::Real(x), Scalar::Real(y)) => real_result(x + y, "*"),
        _ => Err(not_in_carrier(r, a)),
    }
}

fn order_key(s: Scalar) -> (i8, f64, i64) {
    match s {
        Scalar::NegInf => (-1, 0.0, 0),
        Scalar::PosInf => (1, 0.0, 0),
        Scalar::Int(i) => (0, 0.0, i),
        Scalar::Real(x) => (0, x, 0),
        Scalar::Bool(b) => (0, 0.0, b as i64),
    }
}

fn less(a: Scalar, b: Scalar) -> bool {
    let (ta, xa, ia) = order_key(a);
    let (tb, xb, ib) = order_key(b);
    (ta, ia) < (tb, ib) || ((ta, ia) == (tb, ib) && xa < xb)
}

fn tropical_min(a: Scalar, b: Scalar) -> Scalar {
    if less(b, a) {
        b
    } else {
        a
    }
}

fn tropical_max(a: Scalar, b: Scalar) -> Scalar {
    if less(a, b) {
        b
    } else {
        a
    }
}

/// `a ⊕ b`.
pub fn sr_add(a: &ScalarValue, b: &ScalarValue) -> Result<ScalarValue, ArithError> {
    let r = same_ring(a, b)?;
    Ok(ScalarValue { ring: r, scalar: add_scalar(r, a.scalar, b.scalar)? })
}

/// `a ⊗ b`.
pub fn sr_mul(a: &ScalarValue, b: &ScalarValue) -> Result<ScalarValue, ArithError> {
    let r = same_ring(a, b)?;
    Ok(ScalarValue { ring: r, scalar: mul_scalar(r, a.scalar, b.scalar)? })
}

pub(crate) fn sub_scalar(r: SemiringId, a: Scalar, b: Scalar) -> Result<Scalar, ArithError> {
    match (r, a, b) {
        (SemiringId::Int, Scalar::Int(x), Scalar::Int(y)) => checked_int(x, y, i64::checked_sub, "-"),
        (SemiringId::Real, _, _) => ext_real_sub(a, b),
        _ => Err(ArithError::Unsupported { op: "-", ring: r }),
    }
}

pub(crate) fn div_scalar(r: SemiringId, a: Scalar, b: Scalar) -> Result<Scalar, ArithError> {
    if r != SemiringId::Real {
        return Err(ArithError::Unsupported { op: "/", ring: r });
    }
    match (a, b) {
        (_, Scalar::Real(0.0)) => Err(ArithError::DivisionByZero),
        (Scalar::Real(x), Scalar::Real(y)) => real_result(x / y, "/"),
        (Scalar::Real(_), _) => Ok(Scalar::Real(0.0)),
        (Scalar::PosInf | Scalar::NegInf, Scalar::Real(_)) => {
            Ok(if sign_of(a) * sign_of(b) > 0.0 { Scalar::PosInf } else { Scalar::NegInf })
        }
        _ => Err(ArithError::UndefinedInfinity("/")),
    }
}

/// Subtraction, defined over `int` and `real` only.
pub fn sr_sub(a: &ScalarValue, b: &ScalarValue) -> Result<ScalarValue, ArithError> {
    let r = same_ring(a, b)?;
    Ok(ScalarValue { ring: r, scalar: sub_scalar(r, a.scalar, b.scalar)? })
}

/// Division, defined over `real` only.
pub fn sr_div(a: &ScalarValue, b: &ScalarValue) -> Result<ScalarValue, ArithError> {
    let r = same_ring(a, b)?;
    Ok(ScalarValue { ring: r, scalar: div_scalar(r, a.scalar, b.scalar)? })
}

/// Exact equality, yielding a `bool` value.
pub fn sr_eq(a: &ScalarValue, b: &ScalarValue) -> Result<ScalarValue, ArithError> {
    same_ring(a, b)?;
    Ok(ScalarValue::bool(a.scalar == b.scalar))
}

/// Casts `v` from `src` to `dst`. Additive identities map to additive
/// identities before any domain rule applies.
pub fn cast_value(src: SemiringId, dst: SemiringId, v: &ScalarValue) -> Result<ScalarValue, ArithError> {
    if v.ring != src {
        return Err(ArithError::RingMismatch(v.ring, src));
    }
    if src == dst {
        return Ok(*v);
    }
    if v.is_zero() {
        return Ok(zero(dst));
    }
    if dst.domain() == Domain::Bool {
        return Ok(one(dst));
    }
    if src.domain() == Domain::Bool {
        return Ok(one(dst));
    }
    let out_of_range = || ArithError::CastOutOfRange { value: format_scalar(v.scalar), src, dst };
    let scalar = match (v.scalar, dst.domain()) {
        (Scalar::Int(i), Domain::Int) => Scalar::Int(i),
        (Scalar::Int(i), Domain::Real) => Scalar::Real(i as f64),
        (Scalar::Real(x), Domain::Real) => Scalar::Real(x),
        (Scalar::Real(x), Domain::Int) => {
            let f = x.floor();
            // i64::MAX as f64 rounds up to 2^63, which is itself out of range.
            if f < -(2f64.powi(63)) || f >= 2f64.powi(63) {
                return Err(out_of_range());
            }
            Scalar::Int(f as i64)
        }
        (inf @ (Scalar::PosInf | Scalar::NegInf), _) => inf,
        _ => return Err(out_of_range()),
    };
    ScalarValue::new_encoded(dst, scalar).map_err(|_| out_of_range())
}

/// Injective, zero-preserving embedding of a value of `r` into the
/// extended reals. Tropical rings swap their additive identity with the
/// payload `0` so that `enc(zero(r)) = 0.0`.
pub fn enc_value(r: SemiringId, v: &ScalarValue) -> Result<EncodedValue, ArithError> {
    if v.ring != r {
        return Err(ArithError::RingMismatch(v.ring, r));
    }
    let scalar = match v.scalar {
        Scalar::Bool(b) => Scalar::Real(if b { 1.0 } else { 0.0 }),
        Scalar::Int(0) if r.is_min_plus() => Scalar::PosInf,
        Scalar::Int(0) if r.is_max_plus() => Scalar::NegInf,
        Scalar::Real(x) if x == 0.0 && r.is_min_plus() => Scalar::PosInf,
        Scalar::Real(x) if x == 0.0 && r.is_max_plus() => Scalar::NegInf,
        Scalar::PosInf | Scalar::NegInf => Scalar::Real(0.0),
        Scalar::Int(i) => Scalar::Real(i as f64),
        Scalar::Real(x) => Scalar::Real(x),
    };
    Ok(ScalarValue { ring: SemiringId::Real, scalar })
}

/// Left inverse of [`enc_value`]; values outside its image map to `zero(r)`.
pub fn dec_value(r: SemiringId, w: &EncodedValue) -> ScalarValue {
    let scalar = match (r.domain(), w.scalar) {
        (Domain::Bool, Scalar::Real(1.0)) => Scalar::Bool(true),
        (Domain::Bool, _) => Scalar::Bool(false),
        (_, Scalar::Real(0.0)) => zero_scalar(r),
        (_, Scalar::PosInf) if r.is_min_plus() => one_scalar(r),
        (_, Scalar::NegInf) if r.is_max_plus() => one_scalar(r),
        (Domain::Int, Scalar::Real(x)) if x.fract() == 0.0 && x >= -(2f64.powi(63)) && x < 2f64.powi(63) => {
            Scalar::Int(x as i64)
        }
        (Domain::Real, Scalar::Real(x)) => Scalar::Real(x),
        _ => zero_scalar(r),
    };
    ScalarValue { ring: r, scalar }
}
