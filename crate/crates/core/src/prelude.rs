#![allow(unused_imports)]

pub(crate) use alloc::boxed::Box;
pub(crate) use alloc::vec;
pub(crate) use alloc::vec::Vec;
pub(crate) use num_traits::Float;

pub(crate) use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};

/// Non-negative remainder, `x mod m ∈ [0, m)`.
pub(crate) fn modulo(x: f64, m: f64) -> f64 {
    let r = x % m;
    if r < 0.0 { r + m } else { r }
}
