//! Single-writer / many-reader cell with cheap consistent snapshots.
//!
//! The writer mutates through [`Shared::update`]; readers call
//! [`Shared::snapshot`] and get an `Arc` to a state that was complete when
//! taken. A snapshot never observes a half-applied update. Updates clone the
//! inner value only while some reader still holds an older snapshot.

use std::sync::{Arc, RwLock};

#[derive(Debug, Default)]
pub struct Shared<T> {
    inner: RwLock<Arc<T>>,
}

impl<T: Clone> Shared<T> {
    pub fn new(value: T) -> Self {
        Self {
            inner: RwLock::new(Arc::new(value)),
        }
    }

    pub fn snapshot(&self) -> Arc<T> {
        Arc::clone(&self.inner.read().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn update<R>(&self, f: impl FnOnce(&mut T) -> R) -> R {
        let mut guard = self.inner.write().unwrap_or_else(|e| e.into_inner());
        f(Arc::make_mut(&mut guard))
    }

    pub fn into_inner(self) -> T {
        let arc = self.inner.into_inner().unwrap_or_else(|e| e.into_inner());
        Arc::try_unwrap(arc).unwrap_or_else(|shared| (*shared).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_is_isolated_from_later_updates() {
        let cell = Shared::new(vec![1, 2, 3]);
        let before = cell.snapshot();
        cell.update(|v| v.push(4));
        assert_eq!(*before, vec![1, 2, 3]);
        assert_eq!(*cell.snapshot(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn concurrent_readers_see_whole_states() {
        // each update writes one value into every slot, so a torn read
        // would show mixed values
        let cell = Arc::new(Shared::new(vec![0u64; 64]));
        let writer = {
            let cell = Arc::clone(&cell);
            std::thread::spawn(move || {
                for i in 1..=500u64 {
                    cell.update(|v| v.iter_mut().for_each(|x| *x = i));
                }
            })
        };
        let readers: Vec<_> = (0..4)
            .map(|_| {
                let cell = Arc::clone(&cell);
                std::thread::spawn(move || {
                    for _ in 0..500 {
                        let snap = cell.snapshot();
                        assert!(snap.iter().all(|&x| x == snap[0]));
                    }
                })
            })
            .collect();
        writer.join().unwrap();
        for r in readers {
            r.join().unwrap();
        }
        assert!(cell.snapshot().iter().all(|&x| x == 500));
    }
}
