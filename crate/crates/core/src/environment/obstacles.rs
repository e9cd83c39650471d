use rand::seq::index;
use rand::Rng;

use super::{Cell, GridMap};

/// Obstructs `round(fraction * sidewalk_count)` sidewalk cells, sampled
/// uniformly without replacement. Fraction 0 returns an identical map.
pub fn place_obstacles<R: Rng + ?Sized>(grid: &GridMap, fraction: f64, rng: &mut R) -> GridMap {
    let sidewalks = grid.sidewalk_cells();
    place_obstacles_among(grid, &sidewalks, fraction, rng)
}

/// Like [`place_obstacles`] but restricted to `candidates`; the count is
/// `round(fraction * candidates.len())`, capped by the cells not already obstructed.
pub fn place_obstacles_among<R: Rng + ?Sized>(
    grid: &GridMap,
    candidates: &[Cell],
    fraction: f64,
    rng: &mut R,
) -> GridMap {
    let fraction = fraction.clamp(0.0, 1.0);
    let wanted = (fraction * candidates.len() as f64).round() as usize;
    if wanted == 0 {
        return grid.clone();
    }
    let free: Vec<Cell> = candidates
        .iter()
        .copied()
        .filter(|&c| grid.contains(c) && !grid.is_obstacle(c))
        .collect();
    let k = wanted.min(free.len());
    let picked = index::sample(rng, free.len(), k).into_iter().map(|i| free[i]);
    grid.with_obstacles(picked)
        .expect("candidates are in-bounds non-building cells")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{generate_layout, GroundType, LayoutSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn base() -> GridMap {
        generate_layout(&LayoutSpec::standard(5, 5)).unwrap()
    }

    #[test]
    fn zero_fraction_is_identity() {
        let g = base();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(place_obstacles(&g, 0.0, &mut rng), g);
    }

    #[test]
    fn five_percent_of_sidewalks() {
        let g = base();
        let sidewalks = g.count(GroundType::Sidewalk);
        assert_eq!(sidewalks, 1400);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let o = place_obstacles(&g, 0.05, &mut rng);
        assert_eq!(o.obstacles().len(), 70);
        assert!(o.obstacles().iter().all(|&c| o.ground(c) == GroundType::Sidewalk));
    }

    #[test]
    fn same_seed_same_obstacles() {
        let g = base();
        let a = place_obstacles(&g, 0.1, &mut ChaCha8Rng::seed_from_u64(3));
        let b = place_obstacles(&g, 0.1, &mut ChaCha8Rng::seed_from_u64(3));
        let c = place_obstacles(&g, 0.1, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a.obstacles(), b.obstacles());
        assert_ne!(a.obstacles(), c.obstacles());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn count_is_exact(fraction in 0.0f64..=1.0, seed in any::<u64>()) {
            let g = generate_layout(&LayoutSpec::standard(2, 1)).unwrap();
            let n = g.count(GroundType::Sidewalk);
            let o = place_obstacles(&g, fraction, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(o.obstacles().len(), (fraction * n as f64).round() as usize);
        }
    }
}
