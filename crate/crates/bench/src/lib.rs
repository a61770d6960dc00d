//! Shared fixtures for the kernel benchmarks.

use cbmw::params::rat;
use cbmw::{Params, RhoBranch};

pub fn universal(r: usize) -> Params {
    Params::universal(r, RhoBranch::default_for(r)).expect("universal parameters")
}

/// A generic rational point: q = 7/5, u = (11/3, -13/7, 5/17).
pub fn numeric(r: usize) -> Params {
    let u = [rat(11, 3), rat(-13, 7), rat(5, 17)];
    Params::numeric(r, RhoBranch::default_for(r), rat(7, 5), u[..r].to_vec()).expect("generic point")
}

/// Every `step`-th element of `items`, wrapping, `count` times: a fixed,
/// well-spread sample without a random number generator.
pub fn spread<T: Clone>(items: &[T], count: usize, step: usize) -> Vec<T> {
    (0..count).map(|k| items[(k * step) % items.len()].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(universal(2).r(), 2);
        assert_eq!(numeric(3).u().len(), 3);
        assert_eq!(spread(&[1, 2, 3], 4, 2), vec![1, 3, 2, 1]);
    }
}
