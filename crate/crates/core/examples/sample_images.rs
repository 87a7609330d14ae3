//! Draws the images referenced by `data/sample/catalog.csv`.
//!
//! Usage: cargo run -p paintinfo --example sample_images -- data/sample

use std::path::PathBuf;

use paintinfo::catalog::draw_composition;
use paintinfo::RgbRaster;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/sample".into()));
    let dir = root.join("images");
    std::fs::create_dir_all(&dir).expect("create image directory");
    for i in 1..=10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let mut img = draw_composition(&mut rng, 128);
        // the last pair is one composition and its left-right mirror
        if i == 10 {
            img = mirror_of(9);
        }
        let path = dir.join(format!("s{i:02}.png"));
        std::fs::write(&path, img.encode_png()).expect("write image");
        println!("{}", path.display());
    }
}

fn mirror_of(i: u64) -> RgbRaster {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
    draw_composition(&mut rng, 128).mirrored()
}
