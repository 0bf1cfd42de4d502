//! Generates seeded synthetic scenes and writes the four tensor groups with
//! their manifests.

use qkscreen::wxdata::{generate_synthetic, read_tensor, write_tensor, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate_synthetic(&SyntheticConfig::new(12, 42))?;
    let dir = std::env::temp_dir().join("qkscreen_synthetic");
    std::fs::create_dir_all(&dir)?;
    for (stem, tensor) in data.parts() {
        write_tensor(tensor, &dir.join(stem))?;
        let back = read_tensor(&dir.join(stem))?;
        let (lo, hi) = back.data().iter().fold((f32::MAX, f32::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        println!("{stem:>4}: {:?} channels {:?} range [{lo:.2}, {hi:.2}]", back.shape(), back.channels);
    }
    println!("written to {}", dir.display());
    Ok(())
}
