/// Output size when the shortest edge of `(h, w)` is scaled to `target`,
/// keeping the aspect ratio (long edge rounded to the nearest pixel).
pub fn scale_shortest_edge((h, w): (usize, usize), target: usize) -> (usize, usize) {
    assert!(h >= 1 && w >= 1, "frame dims must be positive");
    let scaled = |long: usize, short: usize| ((long as f64 * target as f64 / short as f64).round() as usize).max(1);
    if h <= w {
        (target, scaled(w, h))
    } else {
        (scaled(h, w), target)
    }
}

/// Top-left corner of the centered `side × side` window, or `None` if the
/// frame is smaller than the window.
pub fn center_crop_window((h, w): (usize, usize), side: usize) -> Option<(usize, usize)> {
    (h >= side && w >= side).then(|| ((h - side) / 2, (w - side) / 2))
}
