//! A single claim law: the classical recursions against the seasonal
//! pipeline run with the same law in every season.

use seasonal_ruin::oracle::{homogeneous_finite_ruin, homogeneous_ultimate_ruin};
use seasonal_ruin::{survival_ultimate, IntegerPmf, SeasonalModel};

fn main() -> seasonal_ruin::Result<()> {
    let z = IntegerPmf::from_table(&[0.5, 0.3, 0.1, 0.1])?;
    println!("E Z = {}", z.mean());

    let ruin = homogeneous_ultimate_ruin(&z, 10)?;
    let seasonal = survival_ultimate(&SeasonalModel::new(vec![z.clone(); 3])?, 10)?;
    println!(
        "{:>3} {:>14} {:>14} {:>14}",
        "u", "psi(u)", "1 - phi(u)", "psi(u, 50)"
    );
    for u in 0..=10 {
        println!(
            "{u:>3} {:>14.10} {:>14.10} {:>14.10}",
            ruin.psi[u],
            1.0 - seasonal.phi[u],
            homogeneous_finite_ruin(&z, u, 50)?
        );
    }
    Ok(())
}
