//! Field abstractions: anything that can be evaluated at a point and has a
//! declared support ball.

use crate::geometry::Ball;
use crate::scalar::Scalar;
use crate::symtensor::SymTensor;

pub trait ScalarField<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[T]) -> T;

    /// Ball outside which the field vanishes.
    fn support(&self) -> &Ball<T>;
}

pub trait TensorField<T: Scalar>: Send + Sync {
    fn order(&self) -> usize;

    fn dim(&self) -> usize;

    fn value(&self, x: &[T]) -> SymTensor<T>;

    /// `<f(x), w>` where `weighted` holds the multiplicity-weighted
    /// coefficients of `w` (see [`SymTensor::weighted`]).
    fn pair(&self, x: &[T], weighted: &[T]) -> T {
        self.value(x)
            .coeffs()
            .iter()
            .zip(weighted)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    fn support(&self) -> &Ball<T>;
}

impl<T: Scalar, F: ScalarField<T> + ?Sized> ScalarField<T> for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[T]) -> T {
        (**self).value(x)
    }
    fn support(&self) -> &Ball<T> {
        (**self).support()
    }
}

impl<T: Scalar, F: TensorField<T> + ?Sized> TensorField<T> for &F {
    fn order(&self) -> usize {
        (**self).order()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[T]) -> SymTensor<T> {
        (**self).value(x)
    }
    fn pair(&self, x: &[T], weighted: &[T]) -> T {
        (**self).pair(x, weighted)
    }
    fn support(&self) -> &Ball<T> {
        (**self).support()
    }
}

type ScalarFn<T> = Box<dyn Fn(&[T]) -> T + Send + Sync>;
type TensorFn<T> = Box<dyn Fn(&[T]) -> SymTensor<T> + Send + Sync>;

/// Scalar field given by a closure.
pub struct FnScalarField<T: Scalar> {
    support: Ball<T>,
    f: ScalarFn<T>,
}

impl<T: Scalar> FnScalarField<T> {
    pub fn new(support: Ball<T>, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        FnScalarField {
            support,
            f: Box::new(f),
        }
    }
}

impl<T: Scalar> ScalarField<T> for FnScalarField<T> {
    fn dim(&self) -> usize {
        self.support.dim()
    }
    fn value(&self, x: &[T]) -> T {
        (self.f)(x)
    }
    fn support(&self) -> &Ball<T> {
        &self.support
    }
}

/// Tensor field given by a closure.
pub struct FnTensorField<T: Scalar> {
    order: usize,
    support: Ball<T>,
    f: TensorFn<T>,
}

impl<T: Scalar> FnTensorField<T> {
    pub fn new(order: usize, support: Ball<T>, f: impl Fn(&[T]) -> SymTensor<T> + Send + Sync + 'static) -> Self {
        FnTensorField {
            order,
            support,
            f: Box::new(f),
        }
    }
}

impl<T: Scalar> TensorField<T> for FnTensorField<T> {
    fn order(&self) -> usize {
        self.order
    }
    fn dim(&self) -> usize {
        self.support.dim()
    }
    fn value(&self, x: &[T]) -> SymTensor<T> {
        (self.f)(x)
    }
    fn support(&self) -> &Ball<T> {
        &self.support
    }
}

/// `x -> <f(x), w>` for a fixed tensor `w`.
pub struct Paired<'a, T: Scalar, F: TensorField<T> + ?Sized> {
    field: &'a F,
    weighted: Vec<T>,
}

impl<'a, T: Scalar, F: TensorField<T> + ?Sized> Paired<'a, T, F> {
    pub fn new(field: &'a F, w: &SymTensor<T>) -> Self {
        Paired {
            field,
            weighted: w.weighted(),
        }
    }
}

impl<T: Scalar, F: TensorField<T> + ?Sized> ScalarField<T> for Paired<'_, T, F> {
    fn dim(&self) -> usize {
        self.field.dim()
    }
    fn value(&self, x: &[T]) -> T {
        self.field.pair(x, &self.weighted)
    }
    fn support(&self) -> &Ball<T> {
        self.field.support()
    }
}

/// The zero field of a given order, with a nominal support ball.
pub struct ZeroField<T: Scalar> {
    order: usize,
    support: Ball<T>,
}

impl<T: Scalar> ZeroField<T> {
    pub fn new(order: usize, support: Ball<T>) -> Self {
        ZeroField { order, support }
    }
}

impl<T: Scalar> TensorField<T> for ZeroField<T> {
    fn order(&self) -> usize {
        self.order
    }
    fn dim(&self) -> usize {
        self.support.dim()
    }
    fn value(&self, _x: &[T]) -> SymTensor<T> {
        SymTensor::zeros(self.order, self.support.dim())
    }
    fn pair(&self, _x: &[T], _weighted: &[T]) -> T {
        T::zero()
    }
    fn support(&self) -> &Ball<T> {
        &self.support
    }
}
