//! Interval index of `−t² + ½ t|t|` at the kink and beside it.

use ncindex_core::{compute_interval, make_builtin, FunctionSpec, SamplingConfig};

fn main() -> ncindex_core::Result<()> {
    let f = make_builtin(&FunctionSpec::new("kink"))?;
    for cfg in [SamplingConfig::default(), SamplingConfig::sampled_only()] {
        for x in [-0.5, 0.0, 0.5] {
            let i = compute_interval(f.as_ref(), &[x], &cfg)?;
            println!(
                "x = {x:>4}  exact = {:<5}  loc in [{:.6}, {:.6}]  rho = {:.6}",
                i.exact, i.loc_low, i.loc_high, i.rho
            );
        }
    }
    Ok(())
}
