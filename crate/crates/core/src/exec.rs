//! Parallel/sequential execution of per-node kernels.
//!
//! Grid sweeps and pair scans are embarrassingly parallel: every kernel is a
//! pure function of immutable inputs. With the `parallel` feature (default)
//! they run on rayon's pool; without it the same code runs sequentially.
//! Results are collected by index, so the output is identical in both modes.
//! Reductions that are sensitive to evaluation order (sums) are always done
//! sequentially on the collected vector.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Which execution path to use. `Par` degrades to `Seq` when the crate is
/// built without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Seq,
    Par,
}

impl ExecMode {
    /// The default mode for this build.
    pub fn auto() -> Self {
        #[cfg(feature = "parallel")]
        {
            ExecMode::Par
        }
        #[cfg(not(feature = "parallel"))]
        {
            ExecMode::Seq
        }
    }
}

/// Configure the global worker pool. Returns an error when the pool was
/// already initialized or the build lacks the `parallel` feature.
pub fn configure_threads(n: usize) -> std::result::Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Err("built without the parallel feature; running sequentially".to_string())
    }
}

/// Map `f` over `0..n` collecting results in index order.
pub fn map_collect_mode<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Seq => (0..n).map(f).collect(),
        ExecMode::Par => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

/// Map over `0..n` in the build's default mode.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_collect_mode(ExecMode::auto(), n, f)
}

/// Maximum of a per-index kernel. Max is order-independent, so the parallel
/// result matches the sequential one bit for bit.
pub fn max_value<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_collect(n, f).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let seq = map_collect_mode(ExecMode::Seq, 1000, |i| (i as f64).sin());
        let par = map_collect_mode(ExecMode::Par, 1000, |i| (i as f64).sin());
        assert_eq!(seq, par);
    }

    #[test]
    fn max_of_known_sequence() {
        let m = max_value(100, |i| -((i as f64) - 37.0).abs());
        assert_eq!(m, 0.0);
    }
}
