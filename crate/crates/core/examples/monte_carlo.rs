//! Finite-horizon survival three ways: dynamic programming, exhaustive path
//! enumeration, and reproducible Monte Carlo.

use seasonal_ruin::oracle::{enum_survival_exact, mc_survival, DEFAULT_ENUM_CAP};
use seasonal_ruin::{survival_finite, IntegerPmf, SeasonalModel};

fn main() -> seasonal_ruin::Result<()> {
    let model = SeasonalModel::new(vec![
        IntegerPmf::from_table(&[0.6, 0.3, 0.1])?,
        IntegerPmf::from_table(&[0.3, 0.3, 0.2, 0.2])?,
    ])?;
    let (u, t) = (1, 8);

    let dp = survival_finite(&model, u, t)?.at(u, t);
    let exact = enum_survival_exact(&model, u, t, DEFAULT_ENUM_CAP)?;
    println!("dynamic programming {dp:.12}");
    println!("enumeration         {exact:.12}");

    for seed in 0..3 {
        let est = mc_survival(&model, u, t, 1_000_000, seed)?;
        println!(
            "monte carlo seed {seed}  {:.5} ± {:.5}  covers: {}",
            est.point,
            est.half_width_95,
            est.covers(dp, 1.0)
        );
    }
    Ok(())
}
