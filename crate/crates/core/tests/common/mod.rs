use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Random walk with precision `tau` observed with noise of precision `kappa`,
/// centred. Returns the observations and `1 / sample variance`.
pub fn rw1_series(n: usize, tau: f64, kappa: f64, seed: u64) -> (Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = Normal::new(0.0, 1.0 / tau.sqrt()).unwrap();
    let noise = Normal::new(0.0, 1.0 / kappa.sqrt()).unwrap();
    let mut x = 0.0;
    let mut y: Vec<f64> = (0..n)
        .map(|_| {
            x += step.sample(&mut rng);
            x + noise.sample(&mut rng)
        })
        .collect();
    let mean = y.iter().sum::<f64>() / n as f64;
    y.iter_mut().for_each(|v| *v -= mean);
    let var = y.iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64;
    (y, 1.0 / var)
}
