//! Maps over basis inputs `0..count`. Each input is independent, so the
//! default build spreads them over the rayon pool; without the `parallel`
//! feature the same API runs on the calling thread.

/// Sequential map, always available.
pub fn map_inputs_seq<T, F>(count: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_inputs_par<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

/// Results in input order.
#[cfg(feature = "parallel")]
pub fn map_inputs<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    map_inputs_par(count, f)
}

#[cfg(not(feature = "parallel"))]
pub fn map_inputs<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    map_inputs_seq(count, f)
}

/// Applies `f` to each listed input, preserving order.
pub fn map_listed<T, F>(inputs: &[u64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        inputs.par_iter().map(|&x| f(x)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        inputs.iter().map(|&x| f(x)).collect()
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_inputs_seq(1000, |x| x * x);
        assert_eq!(map_inputs(1000, |x| x * x), seq);
        assert_eq!(map_listed(&[5, 1, 3], |x| x + 1), vec![6, 2, 4]);
        assert!(map_inputs(0, |x| x).is_empty());
    }
}
