// Builds a run manifest in code, executes it as the command-line tool would,
// and replays the manifest embedded in the output.

use parabound::cli::{execute, Command, DataSpec, RunManifest};
use parabound::{BoundKind, ProblemSpec, QuadratureConfig};

fn main() -> parabound::Result<()> {
    let spec = ProblemSpec::heat(1, 10.0)?.with_reaction(-0.5)?;
    let command = Command::Solve {
        kind: BoundKind::Homogeneous,
        data: DataSpec::Constant { value: 1.0 },
        points: vec![(vec![0.0], 2.0), (vec![3.0], 2.0)],
    };
    let manifest = RunManifest::new(&spec, command, QuadratureConfig::default(), 1);
    let first = execute(&manifest);
    print!("{}", first.stdout);
    println!("exit code {}; u should be e^-1 = {:.16e}", first.code, (-1f64).exp());

    let again = execute(&RunManifest::extract(&first.stdout)?);
    println!("replay identical: {}", again.stdout == first.stdout);
    Ok(())
}
