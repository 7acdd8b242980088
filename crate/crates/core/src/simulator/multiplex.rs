//! Phase sequences with an exact type and the slot schedule of the
//! generalized scheme.

use serde::Serialize;

/// Phase labels of one block together with their exact type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplexSequence {
    pub t_seq: Vec<usize>,
    /// Number of positions per phase; the type vector is `counts / n`.
    pub counts: Vec<usize>,
}

impl MultiplexSequence {
    pub fn type_vector(&self) -> Vec<f64> {
        let n = self.t_seq.len() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Position range of phase `t` (phases are laid out as contiguous blocks).
    pub fn block(&self, t: usize) -> std::ops::Range<usize> {
        let start: usize = self.counts[..t].iter().sum();
        start..start + self.counts[t]
    }
}

/// Largest-remainder rounding of `n·p_t`, ties going to the lower phase.
pub fn build_multiplex(p_t: &[f64], n: usize) -> MultiplexSequence {
    let exact: Vec<f64> = p_t.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..p_t.len()).filter(|&t| p_t[t] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &t in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[t] += 1;
    }
    let t_seq = counts.iter().enumerate().flat_map(|(t, &c)| std::iter::repeat(t).take(c)).collect();
    MultiplexSequence { t_seq, counts }
}

/// What the covert users do at one position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Slot {
    /// Both users send codeword symbols.
    Both,
    /// The leading user sends its codeword, the other one local randomness.
    Leader,
    /// Both users send 0.
    Silent,
}

/// Slot plan for the fractions (φ₁, φ₂).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub slots: Vec<Slot>,
    /// Index (0 or 1) of the user with the larger fraction.
    pub leader: usize,
}

impl Schedule {
    /// In each phase block the first `round(|L(t)|·φ_min)` positions are shared,
    /// the next ones up to `round(|L(t)|·φ_max)` belong to the leader alone.
    pub fn new(mux: &MultiplexSequence, phi: [f64; 2]) -> Self {
        let leader = if phi[1] > phi[0] { 1 } else { 0 };
        let (hi, lo) = (phi[leader], phi[1 - leader]);
        let mut slots = Vec::with_capacity(mux.t_seq.len());
        for &c in &mux.counts {
            let both = (c as f64 * lo).round() as usize;
            let lead = ((c as f64 * hi).round() as usize).max(both).min(c);
            slots.extend(std::iter::repeat(Slot::Both).take(both));
            slots.extend(std::iter::repeat(Slot::Leader).take(lead - both));
            slots.extend(std::iter::repeat(Slot::Silent).take(c - lead));
        }
        Self { slots, leader }
    }

    /// Whether user `l` sends its own codeword symbol at position `i`.
    pub fn sends_codeword(&self, l: usize, i: usize) -> bool {
        match self.slots[i] {
            Slot::Both => true,
            Slot::Leader => l == self.leader,
            Slot::Silent => false,
        }
    }

    pub fn count(&self, slot: Slot) -> usize {
        self.slots.iter().filter(|s| **s == slot).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_phase_is_constant() {
        let m = build_multiplex(&[1.0], 5);
        assert_eq!(m.t_seq, vec![0; 5]);
        assert_eq!(m.type_vector(), vec![1.0]);
    }

    #[test]
    fn ties_go_to_lower_phase() {
        let m = build_multiplex(&[0.5, 0.5], 7);
        assert_eq!(m.counts, vec![4, 3]);
    }

    #[test]
    fn empty_phase_never_appears() {
        let m = build_multiplex(&[0.3, 0.0, 0.7], 10);
        assert!(!m.t_seq.contains(&1));
        assert_eq!(m.counts, vec![3, 0, 7]);
    }

    #[test]
    fn slot_counts() {
        let m = build_multiplex(&[1.0], 1000);
        let s = Schedule::new(&m, [0.8, 0.4]);
        assert_eq!((s.count(Slot::Both), s.count(Slot::Leader), s.count(Slot::Silent)), (400, 400, 200));
        assert_eq!(s.leader, 0);
        let full = Schedule::new(&m, [1.0, 1.0]);
        assert_eq!(full.count(Slot::Both), 1000);
    }
}
