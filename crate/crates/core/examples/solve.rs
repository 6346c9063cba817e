use homoclinic::{refine_domain, verify, GridSpec, ProblemSpec, SolverConfig, WeightProfile};

fn main() -> homoclinic::Result<()> {
    let spec = ProblemSpec::new(1.5, 1, WeightProfile::sech_squared(1.0, 1.0)?)?;
    let config = SolverConfig::default();
    let levels = refine_domain(&spec, &config, &GridSpec::new(10.0, 1001, 1)?, 1e-8, 3)?;
    for r in &levels {
        println!(
            "T = {:>5}  action = {:.10}  |grad| = {:.2e}  iterations = {}",
            r.grid.half_length(),
            r.action.total,
            r.grad_norm,
            r.iterations
        );
    }
    let last = levels.last().expect("at least one level");
    println!("{:?}", verify(&last.orbit, &spec, config.grad_tol)?);
    Ok(())
}
