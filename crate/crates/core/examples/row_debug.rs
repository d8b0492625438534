use hyperfit::mesh::{generate_plate_mesh, HoleSpec};

fn main() {
    let mesh = generate_plate_mesh(
        100.0,
        350.0,
        &[
            HoleSpec { cx: 36.0, cy: 198.0, a: 12.0, b: 7.0, angle_deg: -25.0 },
            HoleSpec { cx: 66.0, cy: 152.0, a: 10.0, b: 6.0, angle_deg: 15.0 },
        ],
        4.0,
        5.0,
    )
    .unwrap();
    let mut ys: Vec<f64> = mesh.nodes().iter().map(|p| p[1]).collect();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    // Rows near y = 282.386
    for y in ys.iter().filter(|&&y| (270.0..292.0).contains(&y)) {
        let count = mesh.nodes().iter().filter(|p| p[1] == *y).count();
        println!("row y={y:.15} count={count}");
    }
}
