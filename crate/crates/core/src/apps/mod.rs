//! Ready-made systems with closed-form resets.

pub mod frequency;
pub mod reactor;
pub mod scalar;
