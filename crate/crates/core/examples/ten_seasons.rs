//! Ten Poisson seasons with rates k/(k+1): ultimate and finite-time survival.

use seasonal_ruin::pmf::DEFAULT_EPS_TAIL;
use seasonal_ruin::{survival_finite, survival_ultimate, IntegerPmf, SeasonalModel};

fn main() -> seasonal_ruin::Result<()> {
    let claims = (1..=10)
        .map(|k| IntegerPmf::poisson(k as f64 / (k as f64 + 1.0), DEFAULT_EPS_TAIL))
        .collect::<Result<Vec<_>, _>>()?;
    let model = SeasonalModel::new(claims)?;
    println!("E S_10 = {:.6}", model.mean_s_n());

    let us = [0usize, 1, 2, 3, 4, 5, 10, 15];
    let ts = [1usize, 2, 3, 4, 5, 10, 15];
    let ultimate = survival_ultimate(&model, 15)?;
    let finite = survival_finite(&model, 15, 15)?;

    print!("{:>4}", "T");
    for u in us {
        print!("{:>8}", format!("u={u}"));
    }
    println!();
    for t in ts {
        print!("{t:>4}");
        for u in us {
            print!("{:>8.3}", finite.at(u, t));
        }
        println!();
    }
    print!("{:>4}", "inf");
    for u in us {
        print!("{:>8.3}", ultimate.phi[u]);
    }
    println!();
    Ok(())
}
