use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

/// Applies `f` to every item on at most `max_in_flight` scoped threads.
/// Results keep input order. After the first failure no new items are
/// started, and the error of the earliest failed item is returned.
pub fn try_map_bounded<T, R, E, F>(items: &[T], max_in_flight: usize, f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<R, E>>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    let workers = max_in_flight.max(1).min(items.len());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(item) = items.get(i) else { break };
                let result = f(item);
                let failed = result.is_err();
                slots.lock().expect("result slots")[i] = Some(result);
                if failed {
                    next.fetch_max(items.len(), Ordering::SeqCst);
                }
            });
        }
    });
    let mut out = Vec::with_capacity(items.len());
    for slot in slots.into_inner().expect("result slots") {
        match slot {
            Some(Ok(r)) => out.push(r),
            Some(Err(e)) => return Err(e),
            // only items after a failure are skipped
            None => break,
        }
    }
    Ok(out)
}
