//! Deterministic inputs shared by the benchmarks.

use fluency_core::adaptive::{ListOutcomes, Registry};
use fluency_core::metrics::{ItemOutcome, Metric, ScoreMatrix};

/// Small linear congruential generator, so inputs are identical across runs.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn unit(&mut self) -> f64 {
        self.next_u64() as f64 / (1u64 << 31) as f64
    }
}

/// Word pairs of lengths 4..16 over a small alphabet.
pub fn word_pairs(n: usize) -> Vec<(String, String)> {
    let mut rng = Lcg::new(7);
    let word = |rng: &mut Lcg| -> String {
        let len = 4 + rng.below(12) as usize;
        (0..len).map(|_| (b'a' + rng.below(6) as u8) as char).collect()
    };
    (0..n).map(|_| (word(&mut rng), word(&mut rng))).collect()
}

/// A functions x lists matrix of uniform scores.
pub fn score_matrix(functions: usize, lists: usize) -> ScoreMatrix {
    let mut rng = Lcg::new(11);
    let cells = (0..functions)
        .map(|_| (0..lists).map(|_| rng.unit()).collect())
        .collect();
    ScoreMatrix::new(
        Metric::TopK(5),
        (0..functions).map(|i| format!("f{i}")).collect(),
        (0..lists).map(|i| format!("l{i}")).collect(),
        cells,
    )
    .expect("dense matrix")
}

/// A registry of `functions` and `lists` lists of `len` random outcomes.
pub fn adaptive_fixture(functions: usize, lists: usize, len: usize) -> (Registry, Vec<ListOutcomes>) {
    let mut rng = Lcg::new(13);
    let registry = Registry::new(
        (0..functions).map(|i| format!("f{i}")).collect(),
        (0..functions).map(|i| format!("g{}", i % 4)).collect(),
    )
    .expect("registry");
    let lists = (0..lists)
        .map(|l| ListOutcomes {
            list_id: format!("l{l}"),
            category: "animals".into(),
            by_function: (0..functions)
                .map(|_| {
                    (1..=len)
                        .map(|position| {
                            let covered = rng.below(5) > 0;
                            let rank = (covered && rng.below(3) > 0).then(|| 1 + rng.below(200) as usize);
                            ItemOutcome {
                                position,
                                in_coverage: covered,
                                probability: rank.map(|r| 1.0 / (r as f64 + 1.0)),
                                rank,
                            }
                        })
                        .collect()
                })
                .collect(),
        })
        .collect();
    (registry, lists)
}
