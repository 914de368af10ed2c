use std::fs;
use std::io::Write;

use flate2::write::GzEncoder;
use flate2::Compression;
use synmem_core::quantnet::Split;
use synmem_harness::idx::{load_idx, read_images, read_labels, write_images, write_labels};
use synmem_harness::HarnessError;

fn pair(dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let (img, lab) = (dir.join("img.idx"), dir.join("lab.idx"));
    let pixels: Vec<u8> = (0..3 * 4)
        .map(|i| (i * 23) as u8)
        .chain([255, 0, 0, 0])
        .collect();
    write_images(&img, 2, 2, &pixels).unwrap();
    write_labels(&lab, &[3, 1, 4, 1]).unwrap();
    (img, lab)
}

#[test]
fn round_trip_and_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let (img, lab) = pair(dir.path());
    let d = load_idx(&img, &lab, Split::Test).unwrap();
    assert_eq!(d.len(), 4);
    assert_eq!(d.inputs().ncols(), 4);
    assert_eq!(d.labels(), &[3, 1, 4, 1]);
    assert_eq!(d.inputs()[[3, 0]], 1.0);
    assert_eq!(d.inputs()[[0, 1]], 23.0 / 255.0);
}

#[test]
fn header_layout_is_big_endian() {
    let dir = tempfile::tempdir().unwrap();
    let (img, _) = pair(dir.path());
    let bytes = fs::read(&img).unwrap();
    assert_eq!(
        &bytes[..16],
        &[0, 0, 8, 3, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0, 2]
    );
    assert_eq!(bytes.len(), 16 + 16);
}

#[test]
fn gzip_input() {
    let dir = tempfile::tempdir().unwrap();
    let (img, lab) = pair(dir.path());
    let gz = |src: &std::path::Path| {
        let dst = src.with_extension("gz");
        let mut e = GzEncoder::new(Vec::new(), Compression::default());
        e.write_all(&fs::read(src).unwrap()).unwrap();
        fs::write(&dst, e.finish().unwrap()).unwrap();
        dst
    };
    let plain = load_idx(&img, &lab, Split::Train).unwrap();
    let packed = load_idx(&gz(&img), &gz(&lab), Split::Train).unwrap();
    assert_eq!(plain, packed);
}

#[test]
fn truncated_file_names_offset() {
    let dir = tempfile::tempdir().unwrap();
    let (img, _) = pair(dir.path());
    let bytes = fs::read(&img).unwrap();
    fs::write(&img, &bytes[..bytes.len() - 5]).unwrap();
    match read_images(&img) {
        Err(HarnessError::Truncated { offset, needed, .. }) => {
            assert_eq!(offset, 27);
            assert_eq!(needed, 5);
        }
        other => panic!("expected truncation error, got {other:?}"),
    }
    fs::write(&img, &bytes[..6]).unwrap();
    assert!(matches!(
        read_images(&img),
        Err(HarnessError::Truncated { offset: 6, .. })
    ));
}

#[test]
fn bad_magic() {
    let dir = tempfile::tempdir().unwrap();
    let (img, lab) = pair(dir.path());
    assert!(matches!(
        read_labels(&img),
        Err(HarnessError::BadMagic {
            found: 0x803,
            expected: 0x801,
            ..
        })
    ));
    assert!(matches!(
        read_images(&lab),
        Err(HarnessError::BadMagic { .. })
    ));
}

#[test]
fn count_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let (img, lab) = pair(dir.path());
    write_labels(&lab, &[1, 2, 3]).unwrap();
    assert!(matches!(
        load_idx(&img, &lab, Split::Test),
        Err(HarnessError::CountMismatch {
            images: 4,
            labels: 3
        })
    ));
}

#[test]
fn absurd_header_is_truncation_not_panic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("big.idx");
    let mut b = Vec::new();
    for w in [0x803u32, u32::MAX, u32::MAX, u32::MAX] {
        b.extend_from_slice(&w.to_be_bytes());
    }
    fs::write(&p, b).unwrap();
    assert!(matches!(
        read_images(&p),
        Err(HarnessError::Truncated { .. })
    ));
}
