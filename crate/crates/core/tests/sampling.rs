use polyconv::dist::DiscreteDistribution;
use polyconv::models::{simulate_t_with_counts, RareEventModel};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

/// Pearson chi-square of the Poisson(1) multiplicities against the exact pmf.
#[test]
fn multiplicities_are_poisson_one() {
    let loss = DiscreteDistribution::from_pairs(1, &[(&[1.0], 1.0)]).unwrap();
    let model = RareEventModel::uniform(10, 0.3, &loss).unwrap();
    let draws = simulate_t_with_counts(&model, 20_000, 42).unwrap();
    let cells = 6;
    let mut observed = vec![0.0; cells];
    for &k in &draws.counts {
        observed[(k as usize).min(cells - 1)] += 1.0;
    }
    let total = draws.counts.len() as f64;
    let pois = Poisson::new(1.0).unwrap();
    let mut expected: Vec<f64> = (0..cells - 1).map(|k| pois.pmf(k as u64) * total).collect();
    expected.push(total - expected.iter().sum::<f64>());
    let stat: f64 = observed.iter().zip(&expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    let p_value = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat);
    assert!(p_value > 0.001, "chi-square {stat}, p = {p_value}");
}

#[test]
fn simulation_is_seeded() {
    let loss = DiscreteDistribution::from_pairs(1, &[(&[1.0], 0.5), (&[3.0], 0.5)]).unwrap();
    let model = RareEventModel::uniform(8, 0.2, &loss).unwrap();
    let a = simulate_t_with_counts(&model, 9000, 7).unwrap();
    let b = simulate_t_with_counts(&model, 9000, 7).unwrap();
    let c = simulate_t_with_counts(&model, 9000, 8).unwrap();
    assert_eq!(a.counts, b.counts);
    assert_ne!(a.counts, c.counts);
}
