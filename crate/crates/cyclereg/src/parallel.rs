//! Thread pool sizing. `CYCLEREG_THREADS` caps the worker count; every
//! parallel stage collects results by index, so the count never changes
//! the output.

use anyhow::{bail, Context};

pub const THREADS_ENV: &str = "CYCLEREG_THREADS";

pub fn thread_count() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV}={v:?} is not a count"))?;
            if n == 0 {
                bail!("{THREADS_ENV} must be at least 1");
            }
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context(THREADS_ENV),
    }
}

pub fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        b = b.num_threads(n);
    }
    b.build().context("building thread pool")
}
