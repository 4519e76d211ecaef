//! Instance fixtures and random corpora.

use rand::Rng;

use super::{Instance, SingleCellInstance};

/// One RU, two users, four RBs: `γ_0k = 1`, `γ_1k = 4`, `R = (1, 2)` so
/// `w = (1, 1/2)`, total capacity `capacity`.
pub fn counterexample(capacity: f64) -> Instance {
    Instance::new(
        4,
        vec![f64::INFINITY],
        capacity,
        vec![vec![1.0, 0.5]],
        vec![vec![vec![1.0; 4], vec![4.0; 4]]],
    )
    .expect("valid fixture")
}

/// Shape bounds for random corpora; counts are drawn uniformly in `1..=max`.
#[derive(Debug, Clone, Copy)]
pub struct CorpusParams {
    pub max_users: usize,
    pub max_rbs: usize,
    pub max_gamma: u32,
    pub max_capacity: u32,
    /// Integer weights in `1..=4` instead of reals in `(0, 2]`.
    pub integer_weights: bool,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams { max_users: 3, max_rbs: 4, max_gamma: 6, max_capacity: 12, integer_weights: false }
    }
}

impl CorpusParams {
    fn weight<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.integer_weights {
            rng.gen_range(1..=4) as f64
        } else {
            // keep weights away from zero so the multiplicative-weights solver applies
            rng.gen_range(1..=200) as f64 / 100.0
        }
    }

    /// Single cell with integer rates in `0..=max_gamma` and capacity in `0..=max_capacity`.
    pub fn single_cell<R: Rng>(&self, rng: &mut R) -> SingleCellInstance {
        let n = rng.gen_range(1..=self.max_users);
        let kappa = rng.gen_range(1..=self.max_rbs);
        let weight = (0..n).map(|_| self.weight(rng)).collect();
        let gamma = (0..n)
            .map(|_| (0..kappa).map(|_| rng.gen_range(0..=self.max_gamma) as f64).collect())
            .collect();
        let c = rng.gen_range(0..=self.max_capacity) as f64;
        SingleCellInstance::new(kappa, c, weight, gamma).expect("valid random instance")
    }

    /// `ru_count` RUs whose per-RU and total capacities are both below the
    /// full-rate demand, so both constraint families can bind. Rates are drawn
    /// from `2..=max_gamma` so every RU capacity can sit strictly below demand.
    pub fn multi_ru<R: Rng>(&self, rng: &mut R, ru_count: usize) -> Instance {
        let kappa = rng.gen_range(1..=self.max_rbs);
        let mut weight = Vec::new();
        let mut gamma = Vec::new();
        let mut ru_cap = Vec::new();
        let mut demand_total = 0.0;
        for _ in 0..ru_count {
            let n = rng.gen_range(1..=self.max_users);
            weight.push((0..n).map(|_| self.weight(rng)).collect::<Vec<_>>());
            let g: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..kappa).map(|_| rng.gen_range(2..=self.max_gamma.max(2)) as f64).collect())
                .collect();
            let demand: f64 = (0..kappa).map(|k| g.iter().map(|r| r[k]).fold(0.0, f64::max)).sum();
            let cap = (rng.gen_range(0.3..0.9) * demand).floor().clamp(1.0, demand - 1.0);
            demand_total += cap;
            ru_cap.push(cap);
            gamma.push(g);
        }
        let c = (rng.gen_range(0.5..0.9) * demand_total).floor().clamp(1.0, (demand_total - 1.0).max(1.0));
        Instance::new(kappa, ru_cap, c, weight, gamma).expect("valid random instance")
    }
}
