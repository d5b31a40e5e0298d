use std::fmt;
use std::sync::Arc;

use super::signed_log::SignedLog;
use crate::Scalar;

type LogFn<T> = dyn Fn(T) -> SignedLog<T> + Send + Sync;

/// A pure map `eps -> R`, the raw representative of a generalized number.
///
/// Values are produced in [`SignedLog`] form so that nets like `eps^49` or `exp(-1/eps)`
/// keep their magnitude at `eps = 2^-40`.
#[derive(Clone)]
pub struct ScalarNet<T> {
    f: Arc<LogFn<T>>,
    label: Arc<str>,
}

impl<T: Scalar> ScalarNet<T> {
    /// Net from a plain float closure.
    pub fn new(label: impl Into<String>, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::from_log(label, move |e| SignedLog::from_value(f(e)))
    }

    /// Net from a closure already producing signed-log values.
    pub fn from_log(
        label: impl Into<String>,
        f: impl Fn(T) -> SignedLog<T> + Send + Sync + 'static,
    ) -> Self {
        ScalarNet {
            f: Arc::new(f),
            label: label.into().into(),
        }
    }

    pub fn constant(c: T) -> Self {
        Self::from_log(format!("{c}"), move |_| SignedLog::from_value(c))
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    /// `c · eps^p`, computed in log-space.
    pub fn power(c: T, p: T) -> Self {
        let c_log = SignedLog::from_value(c);
        Self::from_log(format!("{c}*eps^{p}"), move |e| {
            c_log * SignedLog::exp_of(p * e.ln())
        })
    }

    /// `c · exp(-a / eps)`: below every power of eps.
    pub fn exp_decay(c: T, a: T) -> Self {
        let c_log = SignedLog::from_value(c);
        Self::from_log(format!("{c}*exp(-{a}/eps)"), move |e| {
            c_log * SignedLog::exp_of(-a / e)
        })
    }

    pub fn eval(&self, eps: T) -> T {
        (self.f)(eps).to_value()
    }

    pub fn eval_log(&self, eps: T) -> SignedLog<T> {
        (self.f)(eps)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(&self, label: impl Into<String>) -> Self {
        ScalarNet {
            f: self.f.clone(),
            label: label.into().into(),
        }
    }

    fn zip(
        &self,
        other: &Self,
        label: String,
        op: impl Fn(SignedLog<T>, SignedLog<T>) -> SignedLog<T> + Send + Sync + 'static,
    ) -> Self {
        let (a, b) = (self.f.clone(), other.f.clone());
        Self::from_log(label, move |e| op(a(e), b(e)))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(
            other,
            format!("({} + {})", self.label, other.label),
            |a, b| a + b,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(
            other,
            format!("({} - {})", self.label, other.label),
            |a, b| a - b,
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(
            other,
            format!("({} * {})", self.label, other.label),
            |a, b| a * b,
        )
    }

    pub fn neg(&self) -> Self {
        let a = self.f.clone();
        Self::from_log(format!("-({})", self.label), move |e| -a(e))
    }

    pub fn abs(&self) -> Self {
        let a = self.f.clone();
        Self::from_log(format!("|{}|", self.label), move |e| a(e).abs())
    }

    pub fn recip(&self) -> Self {
        let a = self.f.clone();
        Self::from_log(format!("1/({})", self.label), move |e| a(e).recip())
    }

    /// Pointwise minimum of a non-empty list, evaluated left to right.
    pub fn pointwise_min(nets: &[Self]) -> Option<Self> {
        let first = nets.first()?;
        let fs: Vec<_> = nets.iter().map(|n| n.f.clone()).collect();
        let label = format!(
            "min({})",
            nets.iter()
                .map(|n| n.label.as_ref())
                .collect::<Vec<_>>()
                .join(", ")
        );
        if nets.len() == 1 {
            return Some(first.relabel(label));
        }
        Some(Self::from_log(label, move |e| {
            fs[1..].iter().fold(fs[0](e), |acc, f| acc.min(f(e)))
        }))
    }
}

impl<T> fmt::Debug for ScalarNet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarNet")
            .field("label", &self.label)
            .finish()
    }
}
