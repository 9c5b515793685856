//! The protected operator set.
//!
//! Every operator is total on finite inputs: the partial functions fall
//! back to a fixed value outside their domain, and any overflow is
//! saturated to the largest finite magnitude, so no NaN or infinity can
//! leave an evaluation.

use std::fmt;

use crate::Scalar;

/// Denominator magnitude at or below which division returns [`DIV_FALLBACK`].
pub const DIV_THRESHOLD: f64 = 1e-6;
pub const DIV_FALLBACK: f64 = 1.0;
/// Argument at or below which the logarithm returns [`LOG_FALLBACK`].
pub const LOG_THRESHOLD: f64 = 1e-6;
pub const LOG_FALLBACK: f64 = 0.0;
/// Default symmetric clamp on the argument of `exp_clip`.
pub const EXP_CLIP_BOUND: f64 = 50.0;
/// Base magnitude interval for `pow_clip`.
pub const POW_BASE_MIN: f64 = 1e-6;
pub const POW_BASE_MAX: f64 = 1e6;
/// Symmetric clamp on the `pow_clip` exponent.
pub const POW_EXP_BOUND: f64 = 10.0;

/// Operator tags. Names follow the canonical text form used by
/// [`OperatorKind::name`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorKind {
    Add,
    Sub,
    Mul,
    ProtectedDiv,
    Neg,
    Sin,
    Cos,
    ProtectedSqrt,
    ProtectedLog,
    ExpClip,
    PowClip,
    Min,
    Max,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 13] = [
        OperatorKind::Add,
        OperatorKind::Sub,
        OperatorKind::Mul,
        OperatorKind::ProtectedDiv,
        OperatorKind::Neg,
        OperatorKind::Sin,
        OperatorKind::Cos,
        OperatorKind::ProtectedSqrt,
        OperatorKind::ProtectedLog,
        OperatorKind::ExpClip,
        OperatorKind::PowClip,
        OperatorKind::Min,
        OperatorKind::Max,
    ];

    pub fn arity(self) -> usize {
        use OperatorKind::*;
        match self {
            Neg | Sin | Cos | ProtectedSqrt | ProtectedLog | ExpClip => 1,
            Add | Sub | Mul | ProtectedDiv | PowClip | Min | Max => 2,
        }
    }

    pub fn name(self) -> &'static str {
        use OperatorKind::*;
        match self {
            Add => "add",
            Sub => "sub",
            Mul => "mul",
            ProtectedDiv => "protected_div",
            Neg => "neg",
            Sin => "sin",
            Cos => "cos",
            ProtectedSqrt => "protected_sqrt",
            ProtectedLog => "protected_log",
            ExpClip => "exp_clip",
            PowClip => "pow_clip",
            Min => "min",
            Max => "max",
        }
    }

    /// Resolves a function name, including the unprotected aliases
    /// `div`, `log`, `sqrt`, `exp` and `pow`.
    pub fn from_name(name: &str) -> Option<Self> {
        use OperatorKind::*;
        let kind = match name {
            "add" => Add,
            "sub" => Sub,
            "mul" => Mul,
            "protected_div" | "div" => ProtectedDiv,
            "neg" => Neg,
            "sin" => Sin,
            "cos" => Cos,
            "protected_sqrt" | "sqrt" => ProtectedSqrt,
            "protected_log" | "log" => ProtectedLog,
            "exp_clip" | "exp" => ExpClip,
            "pow_clip" | "pow" => PowClip,
            "min" => Min,
            "max" => Max,
            _ => return None,
        };
        Some(kind)
    }

    #[inline]
    pub fn apply1<T: Scalar>(self, a: T) -> T {
        use OperatorKind::*;
        let r = match self {
            Neg => -a,
            Sin => a.sin(),
            Cos => a.cos(),
            ProtectedSqrt => protected_sqrt(a),
            ProtectedLog => protected_log(a),
            ExpClip => exp_clip(a),
            _ => unreachable!("{} is not unary", self.name()),
        };
        saturate(r)
    }

    #[inline]
    pub fn apply2<T: Scalar>(self, a: T, b: T) -> T {
        use OperatorKind::*;
        let r = match self {
            Add => a + b,
            Sub => a - b,
            Mul => a * b,
            ProtectedDiv => protected_div(a, b),
            PowClip => pow_clip(a, b),
            Min => a.min(b),
            Max => a.max(b),
            _ => unreachable!("{} is not binary", self.name()),
        };
        saturate(r)
    }
}

impl serde::Serialize for OperatorKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for OperatorKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        OperatorKind::from_name(&name)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown operator `{name}`")))
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Maps overflow to the largest finite value of the same sign. NaN cannot
/// arise from finite operands of the protected set; it maps to zero.
#[inline]
pub fn saturate<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        T::zero()
    } else if x.is_infinite() {
        if x > T::zero() {
            T::max_value()
        } else {
            T::min_value()
        }
    } else {
        x
    }
}

#[inline]
pub fn protected_div<T: Scalar>(a: T, b: T) -> T {
    if b.abs() > T::lit(DIV_THRESHOLD) {
        a / b
    } else {
        T::lit(DIV_FALLBACK)
    }
}

#[inline]
pub fn protected_log<T: Scalar>(a: T) -> T {
    if a > T::lit(LOG_THRESHOLD) {
        a.ln()
    } else {
        T::lit(LOG_FALLBACK)
    }
}

#[inline]
pub fn protected_sqrt<T: Scalar>(a: T) -> T {
    a.abs().sqrt()
}

#[inline]
pub fn exp_clip<T: Scalar>(a: T) -> T {
    exp_clip_with(a, T::lit(EXP_CLIP_BOUND))
}

#[inline]
pub fn exp_clip_with<T: Scalar>(a: T, bound: T) -> T {
    a.max(-bound).min(bound).exp()
}

/// `sign(a) * clamp(|a|, 1e-6, 1e6) ^ clamp(b, -10, 10)` with `sign(0) = +1`.
#[inline]
pub fn pow_clip<T: Scalar>(a: T, b: T) -> T {
    let base = a.abs().max(T::lit(POW_BASE_MIN)).min(T::lit(POW_BASE_MAX));
    let bound = T::lit(POW_EXP_BOUND);
    let exponent = b.max(-bound).min(bound);
    let magnitude = base.powf(exponent);
    if a < T::zero() {
        -magnitude
    } else {
        magnitude
    }
}
