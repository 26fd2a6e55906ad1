//! Transform a boundary function into a Laplacian eigenfunction and
//! recover its martingale from the eigenfunction alone.

use num_complex::Complex64;
use treeharm::{
    poisson_transform_ball, recover_boundary_martingale, CylinderFunction, Martingale,
    SpectralParam, TreeParams,
};

fn main() -> treeharm::Result<()> {
    // the 3-regular tree (branching number q = 2)
    let params = TreeParams::new(2)?;
    let z = SpectralParam::real(params, 0.7);

    // a boundary datum, constant on the six cylinders of depth 2
    let values: Vec<Complex64> = (0..params.checked_sphere_len(2)?)
        .map(|i| Complex64::new(1.0 + i as f64, 0.3 * i as f64))
        .collect();
    let f = CylinderFunction::new(params, 2, values)?;

    // its Poisson transform is an eigenfunction of the tree Laplacian,
    // here tabulated on the ball of radius 4 around the root
    let u = poisson_transform_ball(z, &f, 4)?;

    // the eigenfunction determines the conditional expectations of f
    let recovered = recover_boundary_martingale(z, &u, 2)?;
    let expected = Martingale::from_function(&f);
    let worst = (0..=2)
        .flat_map(|n| {
            recovered
                .level(n)
                .values()
                .iter()
                .zip(expected.level(n).values())
                .map(|(a, b)| (a - b).norm())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    println!("martingale recovered through the eigenfunction, error {worst:.3e}");
    assert!(worst < 1e-10);
    Ok(())
}
