//! Execution mode for the data-parallel loops of the crate.
//!
//! Every batch operation takes a [`Mode`]. With the `parallel` feature
//! disabled, [`Mode::Parallel`] silently runs sequentially, so callers never
//! need their own `cfg` gates.

/// How a batch loop is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Sequential,
    #[default]
    Parallel,
}

impl Mode {
    /// `Parallel` when the feature is compiled in, else `Sequential`.
    pub fn available() -> Self {
        if cfg!(feature = "parallel") {
            Mode::Parallel
        } else {
            Mode::Sequential
        }
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(mode: Mode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Mode::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<T, R, F>(mode: Mode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Mode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Counts the items of `0..n` satisfying `pred`.
pub fn count_range<F>(mode: Mode, n: usize, pred: F) -> usize
where
    F: Fn(usize) -> bool + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Mode::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().filter(|&i| pred(i)).count()
        }
        _ => (0..n).filter(|&i| pred(i)).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let seq = map_range(Mode::Sequential, 1000, |i| i * i);
        let par = map_range(Mode::Parallel, 1000, |i| i * i);
        assert_eq!(seq, par);
        let data: Vec<u64> = (0..500).collect();
        assert_eq!(
            map_slice(Mode::Sequential, &data, |x| x + 1),
            map_slice(Mode::Parallel, &data, |x| x + 1)
        );
        assert_eq!(count_range(Mode::Parallel, 100, |i| i % 3 == 0), 34);
    }
}
