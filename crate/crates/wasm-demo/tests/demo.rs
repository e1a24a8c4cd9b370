use ecg_phase::rasterizer::IMAGE_SIZE;
use ecg_phase_wasm::*;

#[test]
fn portrait_has_ink_and_is_seeded() {
    let strip = synth_strip(72.0, 0.01, 0.0, 3).unwrap();
    let img = portrait(&strip, true).unwrap();
    assert!(img.count([0, 0, 0]) > IMAGE_SIZE);
    assert_eq!(img.to_rgba().len(), IMAGE_SIZE * IMAGE_SIZE * 4);
    assert_eq!(img, portrait(&synth_strip(72.0, 0.01, 0.0, 3).unwrap(), true).unwrap());
}

#[test]
fn trajectory_ends_with_chord() {
    let strip = synth_strip(60.0, 0.0, 0.5, 1).unwrap();
    let pts = trajectory_points(&strip, false).unwrap();
    assert_eq!(pts.len(), 2 * (strip.len() - 1) + 4);
    let r_v = pts[pts.len() - 2];
    let max_v = pts[..pts.len() - 4].iter().step_by(2).cloned().fold(f64::MIN, f64::max);
    assert_eq!(r_v, max_v);
}

#[test]
fn augmentation_without_ranges_is_identity() {
    let img = portrait(&synth_strip(72.0, 0.0, 0.0, 1).unwrap(), true).unwrap();
    for (_, out) in augmentations(&img, 0.0, 0.0, false, 4, 9).unwrap() {
        assert_eq!(out, img);
    }
    assert_eq!(augmentations(&img, 0.2, 0.2, true, 6, 9).unwrap().len(), 6);
    assert!(augmentations(&img, -1.0, 0.0, false, 1, 0).is_err());
}

#[test]
fn third_order_beats_first_order() {
    let [first, third] = scheme_errors(0.01).unwrap();
    assert!(third < first * 1e-3, "{first} vs {third}");
    assert!(scheme_errors(0.0).is_err());
}
