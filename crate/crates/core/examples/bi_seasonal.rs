//! Two Poisson seasons (rates 0.3 and 1.4): the single interior root, the
//! initial values, and the survival curve, checked against the closed form.

use seasonal_ruin::initvals::{self, bi_seasonal_closed_form};
use seasonal_ruin::pmf::DEFAULT_EPS_TAIL;
use seasonal_ruin::{
    find_unit_disk_roots, survival_ultimate, IntegerPmf, RootConfig, SeasonalModel,
};

fn main() -> seasonal_ruin::Result<()> {
    let model = SeasonalModel::new(vec![
        IntegerPmf::poisson(0.3, DEFAULT_EPS_TAIL)?,
        IntegerPmf::poisson(1.4, DEFAULT_EPS_TAIL)?,
    ])?;

    let roots = find_unit_disk_roots(&model, &RootConfig::default())?;
    for r in roots.roots() {
        println!("root {:.10} (residual {:.1e})", r.value.re, r.residual);
    }

    let system = initvals::build_initial_system(&model, &roots)?;
    let m0 = initvals::solve_initial_values(&system)?;
    println!("m0 = {:?}", m0.m0);

    let (phi0, phi1) = bi_seasonal_closed_form(&model)?;
    println!("closed form: phi(0) = {phi0:.10}, phi(1) = {phi1:.10}");

    let table = survival_ultimate(&model, 10)?;
    for (u, p) in table.phi.iter().enumerate() {
        println!("phi({u:>2}) = {p:.10}");
    }
    Ok(())
}
