use rand::seq::index::sample;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub drug: usize,
    pub protein: usize,
    pub reward: f64,
}

/// Unbounded store of one-step transitions.
#[derive(Debug, Clone, Default)]
pub struct ReplayBuffer {
    items: Vec<Transition>,
}

impl ReplayBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: Transition) {
        self.items.push(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// The whole buffer while it holds at most `batch` transitions, otherwise
    /// `batch` distinct transitions drawn uniformly.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<Transition> {
        if self.items.len() <= batch {
            return self.items.clone();
        }
        sample(rng, self.items.len(), batch)
            .into_iter()
            .map(|k| self.items[k])
            .collect()
    }
}
