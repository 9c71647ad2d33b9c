//! Yrast table with a warm sector cache.
//!
//! Prints I(L), the spectral gap and the kernel dimension per sector,
//! assembling each interaction operator once and reloading it from the
//! binary cache on later runs.
//!
//! Run:
//!   cargo run --example yrast_table -p lll --release

use lll::basis::SectorBasis;
use lll::operators::{assemble_interaction, cache_file_name, read_operator, write_operator};
use lll::spectra;
use std::fs::File;
use std::path::PathBuf;

fn main() {
    let n = 5u32;
    let l_max = n * (n - 1) + 4;
    let cache_dir = std::env::temp_dir().join("lll-sector-cache");
    std::fs::create_dir_all(&cache_dir).expect("cache dir");
    eprintln!("=== yrast table for N={n}, cache at {} ===", cache_dir.display());

    println!("l\tdim\ti_l\tgap\tkernel_dim");
    for l in 0..=l_max {
        let basis = SectorBasis::new(n, l).expect("valid sector");
        let path: PathBuf = cache_dir.join(cache_file_name(n, l));
        let op = match File::open(&path) {
            Ok(mut f) => read_operator(&mut f).expect("cached sector reads back"),
            Err(_) => {
                let op = assemble_interaction(&basis).expect("assembly");
                let mut f = File::create(&path).expect("cache file");
                write_operator(&op, &mut f).expect("cache write");
                op
            }
        };
        let threshold = spectra::zero_threshold(&op);
        let spectrum = spectra::full_spectrum(&op);
        let kernel_dim = spectrum.iter().filter(|v| **v < threshold).count();
        let gap = spectrum.iter().find(|v| **v >= threshold).copied().unwrap_or(f64::INFINITY);
        let i_l = if spectrum[0].abs() < threshold { 0.0 } else { spectrum[0] };
        println!("{l}\t{}\t{i_l:.9}\t{gap:.9}\t{kernel_dim}", basis.dim());
    }
    eprintln!("=== done ===");
}
