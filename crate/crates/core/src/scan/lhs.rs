use rand::seq::SliceRandom;
use rand::Rng;

/// Latin-hypercube sample of `n` points in `[0, 1]^dim`: every axis is cut
/// into `n` strata and each stratum holds exactly one point.
pub fn latin_hypercube<R: Rng>(n: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dim]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for d in 0..dim {
        perm.shuffle(rng);
        for (i, p) in points.iter_mut().enumerate() {
            p[d] = (perm[i] as f64 + rng.gen::<f64>()) / n as f64;
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_point_per_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = latin_hypercube(64, 5, &mut rng);
        for d in 0..5 {
            let mut seen = [false; 64];
            for p in &pts {
                let k = (p[d] * 64.0).floor() as usize;
                assert!(!seen[k]);
                seen[k] = true;
            }
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let a = latin_hypercube(10, 3, &mut ChaCha8Rng::seed_from_u64(9));
        let b = latin_hypercube(10, 3, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
