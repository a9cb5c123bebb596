use nslab::cgns::{self, RawSnapshot, MAGIC};
use nslab_core::conditions::{example_grid, make_example, ExampleSpec};
use nslab_core::{Complex64, SpectralField, TorusGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn f32_close(a: &SpectralField, b: &SpectralField) -> bool {
    let scale = a.max_amplitude().max(1.0);
    a.sub(b).unwrap().max_amplitude() <= 1e-6 * scale
}

#[test]
fn header_layout() {
    let u = SpectralField::zeros(TorusGrid::cube(2, 8).unwrap(), 3);
    let bytes = cgns::encode(&u);
    assert_eq!(&bytes[..5], MAGIC);
    assert_eq!(u32::from_le_bytes(bytes[5..9].try_into().unwrap()), 2);
    assert_eq!(u32::from_le_bytes(bytes[9..13].try_into().unwrap()), 8);
    assert_eq!(u32::from_le_bytes(bytes[13..17].try_into().unwrap()), 8);
    assert_eq!(u32::from_le_bytes(bytes[17..21].try_into().unwrap()), 3);
    assert_eq!(bytes.len(), 21 + 8 * 64 * 3);
}

#[test]
fn strided_example_folds_back() {
    let grid = example_grid(16, 16, 8).unwrap();
    let spec = ExampleSpec::random(16, 2, 1.0, grid, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let u = make_example(&spec).unwrap();
    let raw = cgns::to_raw(&u);
    assert_eq!(raw.shape, vec![16, 16, 128]);
    let back = cgns::decode(&cgns::encode(&u)).unwrap();
    assert_eq!(back.grid().stride(2), 16);
    assert_eq!(back.grid().resolution(2), 8);
    assert!(f32_close(&u, &back));
}

#[test]
fn rejects_bad_files() {
    assert!(cgns::decode(b"CGNS2\0\0\0\0").is_err());
    let mut bytes = cgns::encode(&SpectralField::zeros(TorusGrid::cube(2, 8).unwrap(), 1));
    bytes.pop();
    assert!(cgns::decode(&bytes).is_err());
    let raw = RawSnapshot {
        shape: vec![12, 8],
        ncomp: 1,
        coeffs: vec![Complex64::new(0.0, 0.0); 96],
    };
    assert!(cgns::from_raw(&raw).is_err());
}

#[test]
fn file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let u = SpectralField::random(TorusGrid::cube(3, 8).unwrap(), 3, 3.0, 1.0, &mut ChaCha8Rng::seed_from_u64(1));
    let path = dir.path().join("u.cgns");
    cgns::write(&path, &u).unwrap();
    assert!(f32_close(&u, &cgns::read(&path).unwrap()));
}

#[test]
fn spectrum_csv_lists_nonzero_modes() {
    let mut u = SpectralField::zeros(TorusGrid::cube(2, 16).unwrap(), 1);
    u.add_cos(0, [3, 4, 0], 1.0).unwrap();
    let mut out = Vec::new();
    cgns::write_spectrum_csv(&mut out, &u).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "|k|,component,re,im");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("5.00000000000000000e0,0,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn roundtrip_within_f32(seed in any::<u64>(), dim in 2usize..=3, res_pow in 3u32..=4, ncomp in 1usize..=3) {
        let g = TorusGrid::cube(dim, 1 << res_pow).unwrap();
        let u = SpectralField::random(g, ncomp, 5.0, 1.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let back = cgns::decode(&cgns::encode(&u)).unwrap();
        prop_assert_eq!(back.grid().total(), g.total());
        prop_assert!(f32_close(&u, &back));
    }

    #[test]
    fn encoding_is_deterministic(seed in any::<u64>()) {
        let g = TorusGrid::cube(2, 8).unwrap();
        let u = SpectralField::random(g, 2, 4.0, 1.0, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(cgns::encode(&u), cgns::encode(&u.clone()));
    }
}
