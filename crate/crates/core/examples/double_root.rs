//! Bernoulli-type seasons where `s = -4/11` is a double root. The second
//! equation comes from differentiating the root row.

use seasonal_ruin::survival::{self, SolverConfig};
use seasonal_ruin::{IntegerPmf, SeasonalModel};

fn main() -> seasonal_ruin::Result<()> {
    let model = SeasonalModel::new(vec![
        IntegerPmf::from_table(&[0.8, 0.2])?,
        IntegerPmf::from_table(&[0.2, 0.8])?,
        IntegerPmf::from_table(&[0.8, 0.2])?,
    ])?;
    let sol = survival::solve_ultimate(&model, 5, &SolverConfig::default())?;

    for r in sol.roots.as_ref().unwrap().roots() {
        println!("root {:.12} multiplicity {}", r.value.re, r.multiplicity);
    }
    let system = sol.system.unwrap();
    println!("{:.4}", system.matrix);
    println!("rhs {:?}", system.rhs.as_slice());
    println!("phi = {:?}", sol.table.phi);
    Ok(())
}
