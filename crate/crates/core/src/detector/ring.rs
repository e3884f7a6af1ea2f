//! Per-pixel saddle tests on the two concentric rings.
//!
//! The inner ring holds the `+` quadruple at Chebyshev radius 2 and the `x`
//! quadruple on the diagonals; the outer ring is the 16-pixel discrete circle of
//! radius 3. The diagonal inner pixels are shared with the outer ring.

use std::fmt;
use std::str::FromStr;

use crate::imageio::GrayImage;

/// `+` shaped inner quadruple: N, E, S, W.
pub const INNER_PLUS: [(i32, i32); 4] = [(0, -2), (2, 0), (0, 2), (-2, 0)];

/// `x` shaped inner quadruple: NE, SE, SW, NW.
pub const INNER_CROSS: [(i32, i32); 4] = [(2, -2), (2, 2), (-2, 2), (-2, -2)];

/// Outer ring `b_1 .. b_16` in cyclic order, starting at `(0, -3)`.
pub const OUTER: [(i32, i32); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

/// Distance from the border a pixel needs for all ring offsets to be in bounds.
pub const RING_RADIUS: usize = 3;

/// The fixed offsets used by the detector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RingGeometry {
    pub inner_plus: [(i32, i32); 4],
    pub inner_cross: [(i32, i32); 4],
    pub outer: [(i32, i32); 16],
}

impl RingGeometry {
    pub const STANDARD: RingGeometry = RingGeometry {
        inner_plus: INNER_PLUS,
        inner_cross: INNER_CROSS,
        outer: OUTER,
    };
}

/// Which inner quadruples showed an alternating pattern.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Shapes {
    pub plus: bool,
    pub cross: bool,
}

impl Shapes {
    pub fn any(self) -> bool {
        self.plus || self.cross
    }
}

/// Outcome of the inner ring test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerResult {
    pub shapes: Shapes,
    /// Median of the pixels of the passing quadruples; `None` when nothing passed.
    pub rho: Option<f32>,
}

impl InnerResult {
    pub fn passed(&self) -> bool {
        self.shapes.any()
    }
}

/// Both pixels on one axis strictly brighter than both on the orthogonal axis.
#[inline(always)]
fn alternates(q: [u8; 4]) -> bool {
    // q = [a, b, c, d] with (a, c) on one axis and (b, d) on the other
    let (ac_min, ac_max) = (q[0].min(q[2]), q[0].max(q[2]));
    let (bd_min, bd_max) = (q[1].min(q[3]), q[1].max(q[3]));
    ac_min > bd_max || bd_min > ac_max
}

#[inline(always)]
fn median4(mut v: [u8; 4]) -> f32 {
    v.sort_unstable();
    (f32::from(v[1]) + f32::from(v[2])) * 0.5
}

#[inline(always)]
fn median8(mut v: [u8; 8]) -> f32 {
    v.sort_unstable();
    (f32::from(v[3]) + f32::from(v[4])) * 0.5
}

/// Inner test on a raw row-major buffer; `idx` must be at least 3 px from every border.
#[inline(always)]
pub(crate) fn inner_at(data: &[u8], idx: usize, stride: usize) -> Option<(Shapes, f32)> {
    let s2 = 2 * stride;
    let plus = [data[idx - s2], data[idx + 2], data[idx + s2], data[idx - 2]];
    let cross = [
        data[idx - s2 + 2],
        data[idx + s2 + 2],
        data[idx + s2 - 2],
        data[idx - s2 - 2],
    ];
    let shapes = Shapes {
        plus: alternates(plus),
        cross: alternates(cross),
    };
    let rho = match (shapes.plus, shapes.cross) {
        (false, false) => return None,
        (true, false) => median4(plus),
        (false, true) => median4(cross),
        (true, true) => median8([
            plus[0], plus[1], plus[2], plus[3], cross[0], cross[1], cross[2], cross[3],
        ]),
    };
    Some((shapes, rho))
}

fn check_border(image: &GrayImage, px: usize, py: usize) {
    assert!(
        px >= RING_RADIUS
            && py >= RING_RADIUS
            && px + RING_RADIUS < image.width()
            && py + RING_RADIUS < image.height(),
        "pixel ({px}, {py}) closer than {RING_RADIUS} px to the border of a {}x{} image",
        image.width(),
        image.height()
    );
}

/// Alternating-pattern test on the inner ring at `(px, py)`.
///
/// # Panics
/// If the pixel is closer than 3 px to a border.
pub fn inner_test(image: &GrayImage, px: usize, py: usize) -> InnerResult {
    check_border(image, px, py);
    match inner_at(image.data(), py * image.width() + px, image.width()) {
        Some((shapes, rho)) => InnerResult {
            shapes,
            rho: Some(rho),
        },
        None => InnerResult {
            shapes: Shapes::default(),
            rho: None,
        },
    }
}

/// Label of one outer ring pixel relative to the central intensity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Label {
    Dark = 0,
    Similar = 1,
    Light = 2,
}

impl Label {
    pub fn as_char(self) -> char {
        match self {
            Label::Dark => 'd',
            Label::Similar => 's',
            Label::Light => 'l',
        }
    }

    #[inline(always)]
    pub fn classify(value: u8, rho: f32, epsilon: f32) -> Label {
        // the difference is exact for half-integer rho
        let diff = f32::from(value) - rho;
        if diff < -epsilon {
            Label::Dark
        } else if diff > epsilon {
            Label::Light
        } else {
            Label::Similar
        }
    }
}

/// Cyclic 16-symbol labelling of the outer ring.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingLabels(pub [Label; 16]);

impl fmt::Display for RingLabels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|l| write!(f, "{}", l.as_char()))
    }
}

impl fmt::Debug for RingLabels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingLabels({self})")
    }
}

impl FromStr for RingLabels {
    type Err = String;

    /// Parses 16 symbols from `d`, `s`, `l`; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut labels = [Label::Similar; 16];
        let mut n = 0;
        for c in s.chars().filter(|c| !c.is_whitespace()) {
            let label = match c {
                'd' => Label::Dark,
                's' => Label::Similar,
                'l' => Label::Light,
                other => return Err(format!("unknown label {other:?}")),
            };
            if n == 16 {
                return Err("more than 16 labels".into());
            }
            labels[n] = label;
            n += 1;
        }
        if n != 16 {
            return Err(format!("expected 16 labels, got {n}"));
        }
        Ok(RingLabels(labels))
    }
}

/// Labels the 16 outer pixels around `(px, py)` against `rho +- epsilon` (inclusive band).
///
/// # Panics
/// If the pixel is closer than 3 px to a border.
pub fn label_outer_ring(
    image: &GrayImage,
    px: usize,
    py: usize,
    rho: f32,
    epsilon: f32,
) -> RingLabels {
    check_border(image, px, py);
    let mut labels = [Label::Similar; 16];
    for (label, &(dx, dy)) in labels.iter_mut().zip(OUTER.iter()) {
        let v = image.get((px as i32 + dx) as usize, (py as i32 + dy) as usize);
        *label = Label::classify(v, rho, epsilon);
    }
    RingLabels(labels)
}

// Automaton over one rotation of the ring that starts at the first pixel of an
// l-arc. Phases 0..4 are the arcs l, d, l, d; each arc runs 2..=8 pixels and may
// be followed by up to two s pixels before the next arc of the other label.
const MAX_ARC: u8 = 8;
const MIN_ARC: u8 = 2;
const MAX_GAP: u8 = 2;
const N_PHASES: u8 = 4;

const GAP_BASE: u8 = N_PHASES * MAX_ARC;
const REJECT: u8 = GAP_BASE + N_PHASES * MAX_GAP;
const INIT: u8 = REJECT + 1;
const N_STATES: usize = INIT as usize + 1;

const fn arc_state(phase: u8, len: u8) -> u8 {
    phase * MAX_ARC + (len - 1)
}

const fn gap_state(phase: u8, len: u8) -> u8 {
    GAP_BASE + phase * MAX_GAP + (len - 1)
}

const fn phase_label(phase: u8) -> u8 {
    if phase.is_multiple_of(2) {
        Label::Light as u8
    } else {
        Label::Dark as u8
    }
}

/// Successor of `phase`, or `REJECT` if a fifth arc would start.
const fn next_arc(phase: u8) -> u8 {
    if phase + 1 < N_PHASES {
        arc_state(phase + 1, 1)
    } else {
        REJECT
    }
}

const fn build_transitions() -> [[u8; 3]; N_STATES] {
    let mut t = [[REJECT; 3]; N_STATES];
    t[INIT as usize][Label::Light as usize] = arc_state(0, 1);

    let mut phase = 0;
    while phase < N_PHASES {
        let same = phase_label(phase) as usize;
        let other = phase_label(phase + 1) as usize;
        let s = Label::Similar as usize;

        let mut len = 1;
        while len <= MAX_ARC {
            let st = arc_state(phase, len) as usize;
            if len < MAX_ARC {
                t[st][same] = arc_state(phase, len + 1);
            }
            if len >= MIN_ARC {
                t[st][s] = gap_state(phase, 1);
                t[st][other] = next_arc(phase);
            }
            len += 1;
        }

        let mut gap = 1;
        while gap <= MAX_GAP {
            let st = gap_state(phase, gap) as usize;
            if gap < MAX_GAP {
                t[st][s] = gap_state(phase, gap + 1);
            }
            t[st][other] = next_arc(phase);
            gap += 1;
        }
        phase += 1;
    }
    t
}

const fn build_accepting() -> [bool; N_STATES] {
    let mut acc = [false; N_STATES];
    let last = N_PHASES - 1;
    let mut len = MIN_ARC;
    while len <= MAX_ARC {
        acc[arc_state(last, len) as usize] = true;
        len += 1;
    }
    let mut gap = 1;
    while gap <= MAX_GAP {
        acc[gap_state(last, gap) as usize] = true;
        gap += 1;
    }
    acc
}

static TRANSITIONS: [[u8; 3]; N_STATES] = build_transitions();
static ACCEPTING: [bool; N_STATES] = build_accepting();

/// True iff the cyclic labelling is exactly two l-arcs and two d-arcs, alternating,
/// each 2..=8 long, separated by at most two s pixels at every l/d boundary.
///
/// Runs one pass of a finite automaton, anchored at the first pixel that starts
/// an l-arc. A valid ring has exactly two such anchors and both lead to the same
/// verdict, so no rotation search is needed.
#[inline]
pub fn outer_test(labels: &RingLabels) -> bool {
    outer_test_raw(&labels.0)
}

#[inline(always)]
pub(crate) fn outer_test_raw(labels: &[Label; 16]) -> bool {
    let Some(start) =
        (0..16).find(|&k| labels[k] == Label::Light && labels[(k + 15) % 16] != Label::Light)
    else {
        return false;
    };
    let mut state = INIT;
    for i in 0..16 {
        state = TRANSITIONS[state as usize][labels[(start + i) % 16] as usize];
        if state == REJECT {
            return false;
        }
    }
    ACCEPTING[state as usize]
}

/// Sum of absolute deviations of the 16 outer pixels from `rho`.
///
/// # Panics
/// If the pixel is closer than 3 px to a border.
pub fn response(image: &GrayImage, px: usize, py: usize, rho: f32) -> f32 {
    check_border(image, px, py);
    OUTER
        .iter()
        .map(|&(dx, dy)| {
            let v = image.get((px as i32 + dx) as usize, (py as i32 + dy) as usize);
            (f32::from(v) - rho).abs()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patch(values: &[((i32, i32), u8)], background: u8) -> GrayImage {
        let mut img = GrayImage::filled(7, 7, background);
        for &((dx, dy), v) in values {
            img.set((3 + dx) as usize, (3 + dy) as usize, v);
        }
        img
    }

    fn labels(s: &str) -> RingLabels {
        s.parse().unwrap()
    }

    #[test]
    fn geometry_invariants() {
        let g = RingGeometry::STANDARD;
        let mut outer = g.outer.to_vec();
        outer.sort_unstable();
        outer.dedup();
        assert_eq!(outer.len(), 16);
        for c in g.inner_cross {
            assert!(g.outer.contains(&c));
        }
        for &(dx, dy) in g.outer.iter().chain(&g.inner_plus).chain(&g.inner_cross) {
            assert!(dx.abs().max(dy.abs()) <= 3);
        }
        // consecutive outer pixels are 8-neighbours, including the wrap-around
        for i in 0..16 {
            let (a, b) = (g.outer[i], g.outer[(i + 1) % 16]);
            assert_eq!((a.0 - b.0).abs().max((a.1 - b.1).abs()), 1);
        }
    }

    #[test]
    fn inner_plus_only() {
        let img = patch(
            &[
                ((0, -2), 200),
                ((0, 2), 190),
                ((2, 0), 100),
                ((-2, 0), 110),
                ((2, -2), 150),
                ((2, 2), 150),
                ((-2, 2), 150),
                ((-2, -2), 150),
            ],
            150,
        );
        let r = inner_test(&img, 3, 3);
        assert_eq!(
            r.shapes,
            Shapes {
                plus: true,
                cross: false
            }
        );
        assert_eq!(r.rho, Some(150.0));
    }

    #[test]
    fn inner_both_shapes_median_of_eight() {
        let img = patch(
            &[
                ((0, -2), 200),
                ((0, 2), 190),
                ((2, 0), 100),
                ((-2, 0), 110),
                ((2, -2), 90),
                ((-2, 2), 120),
                ((2, 2), 180),
                ((-2, -2), 210),
            ],
            0,
        );
        let r = inner_test(&img, 3, 3);
        assert!(r.shapes.plus && r.shapes.cross);
        assert_eq!(r.rho, Some(150.0));
    }

    #[test]
    fn inner_median_keeps_half() {
        let img = patch(&[((0, -2), 11), ((0, 2), 12), ((2, 0), 1), ((-2, 0), 2)], 5);
        let r = inner_test(&img, 3, 3);
        assert!(r.shapes.plus && !r.shapes.cross);
        assert_eq!(r.rho, Some(6.5));
    }

    #[test]
    fn inner_constant_fails() {
        let img = GrayImage::filled(7, 7, 99);
        let r = inner_test(&img, 3, 3);
        assert!(!r.passed());
        assert_eq!(r.rho, None);
    }

    #[test]
    fn inner_ties_fail() {
        // equal pixels across the two axes are not strictly brighter
        let img = patch(
            &[((0, -2), 10), ((0, 2), 10), ((2, 0), 10), ((-2, 0), 9)],
            0,
        );
        assert!(!inner_test(&img, 3, 3).shapes.plus);
    }

    #[test]
    fn inner_ramp_fails() {
        for (a, b) in [(1i32, 0i32), (0, 1), (3, -2), (-5, 7), (10, 10)] {
            let img = GrayImage::from_fn(7, 7, |x, y| {
                (128 + a * x as i32 + b * y as i32 - 3 * (a + b)) as u8
            });
            assert!(!inner_test(&img, 3, 3).passed(), "slope ({a}, {b})");
        }
    }

    #[test]
    #[should_panic]
    fn inner_requires_margin() {
        inner_test(&GrayImage::filled(7, 7, 0), 2, 3);
    }

    #[test]
    fn label_all_similar() {
        let img = GrayImage::filled(7, 7, 150);
        let l = label_outer_ring(&img, 3, 3, 150.0, 0.0);
        assert_eq!(l.to_string(), "s".repeat(16));
    }

    #[test]
    fn label_thresholds_alternating() {
        let mut values = Vec::new();
        for (i, &off) in OUTER.iter().enumerate() {
            values.push((off, if (i / 4) % 2 == 0 { 170 } else { 130 }));
        }
        let img = patch(&values, 150);
        let l = label_outer_ring(&img, 3, 3, 150.0, 10.0);
        assert_eq!(l, labels("llll dddd llll dddd"));
    }

    #[test]
    fn label_band_is_inclusive() {
        let img = patch(
            &[
                (OUTER[0], 160),
                (OUTER[1], 140),
                (OUTER[2], 161),
                (OUTER[3], 139),
            ],
            150,
        );
        let l = label_outer_ring(&img, 3, 3, 150.0, 10.0);
        assert_eq!(
            &l.0[..4],
            &[Label::Similar, Label::Similar, Label::Light, Label::Dark]
        );
    }

    #[test]
    fn label_half_integer_rho() {
        assert_eq!(Label::classify(151, 150.5, 0.5), Label::Similar);
        assert_eq!(Label::classify(152, 150.5, 0.5), Label::Light);
        assert_eq!(Label::classify(149, 150.5, 1.0), Label::Dark);
    }

    #[test]
    fn outer_accepts_canonical() {
        assert!(outer_test(&labels("llll dddd llll dddd")));
        assert!(outer_test(&labels("dddd llll dddd llll")));
        assert!(outer_test(&labels("lll ss ddd s lll s dd s")));
        // every rotation of a valid ring is valid
        let base = labels("lll ss ddd s lll s dd s");
        for r in 1..16 {
            let mut rot = base.0;
            rot.rotate_left(r);
            assert!(outer_test(&RingLabels(rot)), "rotation {r}");
        }
    }

    #[test]
    fn outer_rejects() {
        for s in [
            "llllllllllllllll",
            "ssssssssssssssss",
            "lldd lldd lldd lldd",
            "lllllllll dd lll dd",
            "lll sss ddd lll ddd s",
            "llll dddd llll ssss",
            "l ddddddd lllllll d",
            "llllllll dddddddd",
            // s may only separate arcs of different labels
            "lll s ll dddd llll dd",
            "llll dd s dd lll dddd",
        ] {
            assert_eq!(s.replace(' ', "").len(), 16, "{s}");
            assert!(!outer_test(&labels(s)), "{s}");
        }
    }

    #[test]
    fn outer_arc_length_bounds() {
        assert!(outer_test(&labels("llllllll dd ll dddd")));
        assert!(!outer_test(&labels("lllllllll dd ll ddd")));
        assert!(outer_test(&labels("ll dd ll dddddddd ss")));
        assert!(!outer_test(&labels("l ddd llll dddd ssss")));
    }

    #[test]
    fn response_sums() {
        let vals: Vec<_> = OUTER
            .iter()
            .enumerate()
            .map(|(i, &o)| (o, if i % 2 == 0 { 170 } else { 130 }))
            .collect();
        let img = patch(&vals, 150);
        assert_eq!(response(&img, 3, 3, 150.0), 320.0);
        assert_eq!(response(&GrayImage::filled(7, 7, 150), 3, 3, 150.0), 0.0);
        let vals: Vec<_> = OUTER
            .iter()
            .enumerate()
            .map(|(i, &o)| (o, if i < 8 { 180 } else { 110 }))
            .collect();
        assert_eq!(response(&patch(&vals, 0), 3, 3, 150.0), 560.0);
    }
}
