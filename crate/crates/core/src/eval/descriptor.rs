//! Fixed-pattern 256-bit binary descriptor on box-smoothed pyramid levels.

use rayon::prelude::*;

use crate::detector::Keypoint;
use crate::imageio::{GrayImage, Pyramid};

/// Largest pattern offset from the keypoint (Euclidean).
pub const PATTERN_RADIUS: i32 = 15;
/// Half-width of the smoothing box.
pub const BOX_RADIUS: i32 = 2;
/// Keypoints closer than this to a level border are not described.
pub const DESCRIBE_MARGIN: usize = (PATTERN_RADIUS + BOX_RADIUS) as usize;
pub const DESCRIPTOR_BITS: usize = 256;

/// One comparison: bit is set iff `I(p + a) < I(p + b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TestPair {
    pub a: (i8, i8),
    pub b: (i8, i8),
}

const fn splitmix64(state: u64) -> (u64, u64) {
    let state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    (state, z ^ (z >> 31))
}

const fn sample_offset(mut state: u64) -> (u64, (i8, i8)) {
    let span = (2 * PATTERN_RADIUS + 1) as u64;
    loop {
        let (s, r) = splitmix64(state);
        state = s;
        let dx = (r % span) as i32 - PATTERN_RADIUS;
        let dy = ((r >> 32) % span) as i32 - PATTERN_RADIUS;
        if dx * dx + dy * dy <= PATTERN_RADIUS * PATTERN_RADIUS {
            return (state, (dx as i8, dy as i8));
        }
    }
}

const fn build_pattern(seed: u64) -> [TestPair; DESCRIPTOR_BITS] {
    let mut out = [TestPair {
        a: (0, 0),
        b: (0, 0),
    }; DESCRIPTOR_BITS];
    let mut state = seed;
    let mut k = 0;
    while k < DESCRIPTOR_BITS {
        let (s, a) = sample_offset(state);
        let (s, b) = sample_offset(s);
        state = s;
        if a.0 != b.0 || a.1 != b.1 {
            out[k] = TestPair { a, b };
            k += 1;
        }
    }
    out
}

/// The comparison pattern, generated at compile time from a fixed seed.
pub const PATTERN: [TestPair; DESCRIPTOR_BITS] = build_pattern(0x5add_1e00_2016_0001);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Descriptor(pub [u64; 4]);

impl Descriptor {
    pub const ZERO: Descriptor = Descriptor([0; 4]);

    #[inline]
    pub fn hamming(&self, other: &Descriptor) -> u32 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    #[inline]
    pub fn bit(&self, k: usize) -> bool {
        self.0[k / 64] >> (k % 64) & 1 == 1
    }
}

/// Summed-area table used for 5x5 box sums.
pub struct BoxFilter {
    width: usize,
    height: usize,
    sums: Vec<u32>,
}

impl BoxFilter {
    pub fn new(image: &GrayImage) -> Self {
        let (w, h) = (image.width(), image.height());
        let stride = w + 1;
        let mut sums = vec![0u32; stride * (h + 1)];
        for y in 0..h {
            let mut acc = 0u32;
            for (x, &v) in image.row(y).iter().enumerate() {
                acc += u32::from(v);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + acc;
            }
        }
        Self {
            width: w,
            height: h,
            sums,
        }
    }

    /// Sum over the box of radius [`BOX_RADIUS`] centered at `(x, y)`; the box must be inside.
    #[inline]
    pub fn box_sum(&self, x: usize, y: usize) -> u32 {
        let r = BOX_RADIUS as usize;
        let stride = self.width + 1;
        let (x0, y0, x1, y1) = (x - r, y - r, x + r + 1, y + r + 1);
        self.sums[y1 * stride + x1] + self.sums[y0 * stride + x0]
            - self.sums[y0 * stride + x1]
            - self.sums[y1 * stride + x0]
    }

    /// Whether a descriptor can be computed at `(x, y)`.
    pub fn fits(&self, x: i64, y: i64) -> bool {
        let m = DESCRIBE_MARGIN as i64;
        x >= m && y >= m && x + m < self.width as i64 && y + m < self.height as i64
    }

    /// Descriptor at an integer position; `None` inside the border margin.
    pub fn describe_at(&self, x: i64, y: i64) -> Option<Descriptor> {
        if !self.fits(x, y) {
            return None;
        }
        let at = |(dx, dy): (i8, i8)| {
            self.box_sum((x + i64::from(dx)) as usize, (y + i64::from(dy)) as usize)
        };
        let mut d = Descriptor::ZERO;
        for (k, pair) in PATTERN.iter().enumerate() {
            if at(pair.a) < at(pair.b) {
                d.0[k / 64] |= 1 << (k % 64);
            }
        }
        Some(d)
    }
}

/// Descriptors for the keypoints that survived the border check.
#[derive(Clone, Debug, Default)]
pub struct Described {
    /// Index of each described keypoint in the input slice.
    pub indices: Vec<usize>,
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<Descriptor>,
    /// Keypoints too close to their level's border.
    pub dropped: usize,
}

impl Described {
    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }
}

/// Describes each keypoint on its own pyramid level at the rounded level coordinates.
pub fn describe(pyramid: &Pyramid, keypoints: &[Keypoint]) -> Described {
    let mut filters: Vec<Option<BoxFilter>> = (0..pyramid.len()).map(|_| None).collect();
    filters
        .par_iter_mut()
        .enumerate()
        .filter(|(level, _)| keypoints.iter().any(|k| k.level == *level))
        .for_each(|(level, slot)| *slot = Some(BoxFilter::new(pyramid.level(level))));

    let computed: Vec<Option<Descriptor>> = keypoints
        .par_iter()
        .map(|k| {
            let filter = filters.get(k.level)?.as_ref()?;
            let (lx, ly) = pyramid.from_base(k.level, k.x, k.y);
            filter.describe_at(lx.round() as i64, ly.round() as i64)
        })
        .collect();

    let mut out = Described::default();
    for (i, (k, d)) in keypoints.iter().zip(computed).enumerate() {
        match d {
            Some(d) => {
                out.indices.push(i);
                out.keypoints.push(*k);
                out.descriptors.push(d);
            }
            None => out.dropped += 1,
        }
    }
    out
}
