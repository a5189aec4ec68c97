//! Worker pool shared by sweeps and batch propagation.

use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

/// Caps the worker count when set to a positive integer.
pub const THREADS_ENV: &str = "ADIABAT_THREADS";

/// Worker count from [`THREADS_ENV`], or `None` for rayon's default.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidArgument(format!(
                "{THREADS_ENV} must be a positive integer, got {s:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Local pool honoring [`THREADS_ENV`].
pub fn pool() -> Result<ThreadPool> {
    let mut b = ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}
