//! Replica fan-out. With the `parallel` feature replicas run on the rayon
//! pool; without it they run in order on the calling thread. Results come
//! back in replica order either way, and every replica draws only from its
//! own streams, so outputs do not depend on the choice.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to `0..n` and collects the results in index order.
#[cfg(feature = "parallel")]
pub fn map_replicas<T, F>(n: u32, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u32) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_replicas<T, F>(n: u32, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u32) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential version, always available (benchmarks compare against it).
pub fn map_replicas_seq<T, F>(n: u32, f: F) -> Vec<T>
where
    F: Fn(u32) -> T,
{
    (0..n).map(f).collect()
}

/// Like [`map_replicas`] for fallible work; the first error in index order wins.
pub fn try_map_replicas<T, E, F>(n: u32, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u32) -> Result<T, E> + Sync + Send,
{
    map_replicas(n, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_results() {
        let v = map_replicas(100, |i| i * 2);
        assert_eq!(v, (0..100).map(|i| i * 2).collect::<Vec<_>>());
        assert_eq!(map_replicas_seq(5, |i| i), vec![0, 1, 2, 3, 4]);
        let r: Result<Vec<u32>, u32> = try_map_replicas(10, |i| if i >= 3 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(3));
    }
}
