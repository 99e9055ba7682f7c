use rand::seq::index;
use rand::Rng;

/// Fixed-capacity ring buffer; once full, each push overwrites the oldest entry.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    items: Vec<T>,
    capacity: usize,
    next: usize,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            items: Vec::with_capacity(capacity.min(1 << 16)),
            capacity,
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.next] = item;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// `batch` distinct slots chosen uniformly, or `None` if fewer are stored.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Option<Vec<&T>> {
        if batch > self.items.len() {
            return None;
        }
        Some(
            index::sample(rng, self.items.len(), batch)
                .into_iter()
                .map(|i| &self.items[i])
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ring_overwrites_oldest() {
        let mut buf = ReplayBuffer::new(3);
        for i in 0..5 {
            buf.push(i);
        }
        assert_eq!(buf.len(), 3);
        let mut all: Vec<i32> = buf
            .sample(3, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap()
            .into_iter()
            .copied()
            .collect();
        all.sort();
        assert_eq!(all, vec![2, 3, 4]);
    }

    #[test]
    fn samples_are_distinct_and_require_enough_items() {
        let mut buf = ReplayBuffer::new(100);
        for i in 0..50 {
            buf.push(i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(buf.sample(51, &mut rng).is_none());
        for _ in 0..100 {
            let mut s: Vec<i32> = buf.sample(20, &mut rng).unwrap().into_iter().copied().collect();
            s.sort();
            s.dedup();
            assert_eq!(s.len(), 20);
        }
    }

    #[test]
    fn slot_frequencies_are_uniform() {
        let slots = 50;
        let mut buf = ReplayBuffer::new(slots);
        for i in 0..slots {
            buf.push(i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = vec![0u32; slots];
        let draws = 100_000;
        for _ in 0..draws {
            counts[*buf.sample(1, &mut rng).unwrap()[0]] += 1;
        }
        let p = 1.0 / slots as f64;
        let expected = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        // Union bound over 50 slots at 4 sigma keeps the false-alarm rate negligible; at least
        // 95% of slots must also sit inside 3 sigma.
        let within3 = counts
            .iter()
            .filter(|&&c| (c as f64 - expected).abs() <= 3.0 * sigma)
            .count();
        assert!(counts.iter().all(|&c| (c as f64 - expected).abs() <= 4.0 * sigma));
        assert!(within3 as f64 >= 0.95 * slots as f64);
    }
}
