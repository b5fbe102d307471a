//! Data-parallel evaluation over independent inputs. With the `parallel`
//! feature this runs on rayon; without it, sequentially. Output order always
//! follows input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// [`par_map`] restricted to at most `jobs` worker threads (`0` means the default).
pub fn par_map_jobs<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if jobs > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                return pool.install(|| par_map(items, f));
            }
        }
        par_map(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        par_map(items, f)
    }
}

pub fn seq_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..200).collect();
        let want: Vec<u64> = xs.iter().map(|x| x * x).collect();
        assert_eq!(par_map(&xs, |x| x * x), want);
        assert_eq!(par_map_jobs(&xs, 2, |x| x * x), want);
        assert_eq!(seq_map(&xs, |x| x * x), want);
    }
}
