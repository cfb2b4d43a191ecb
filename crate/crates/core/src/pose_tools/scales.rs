//! Per-body-part length ratios between two skeletons and their hierarchical application.

use super::skeleton::{kp, Skeleton2D};

pub const MIN_CONFIDENCE: f64 = 0.3;
pub const NUM_PARTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BodyPart {
    Neck,
    Face,
    Shoulders,
    ArmUpper,
    ArmLower,
    Hands,
    Torso,
    LegUpper,
    LegLower,
    Feet,
}

pub const PARTS: [BodyPart; NUM_PARTS] = [
    BodyPart::Neck,
    BodyPart::Face,
    BodyPart::Shoulders,
    BodyPart::ArmUpper,
    BodyPart::ArmLower,
    BodyPart::Hands,
    BodyPart::Torso,
    BodyPart::LegUpper,
    BodyPart::LegLower,
    BodyPart::Feet,
];

/// Segment endpoint of the table below: a keypoint or the midpoint of both hips.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Kp(usize),
    MidHip,
}

/// How one side of a part is measured and scaled: the segment runs from the anchor
/// to `moved`; `carried` keypoints follow `moved` rigidly.
#[derive(Clone, Copy, Debug)]
pub struct Segment {
    pub anchor: Endpoint,
    pub moved: usize,
    pub carried: &'static [usize],
}

const fn seg(anchor: Endpoint, moved: usize, carried: &'static [usize]) -> Segment {
    Segment { anchor, moved, carried }
}

use Endpoint::{Kp, MidHip};

impl BodyPart {
    pub fn name(self) -> &'static str {
        match self {
            BodyPart::Neck => "neck",
            BodyPart::Face => "face",
            BodyPart::Shoulders => "shoulders",
            BodyPart::ArmUpper => "arm_upper",
            BodyPart::ArmLower => "arm_lower",
            BodyPart::Hands => "hands",
            BodyPart::Torso => "torso",
            BodyPart::LegUpper => "leg_upper",
            BodyPart::LegLower => "leg_lower",
            BodyPart::Feet => "feet",
        }
    }

    /// Measured segments; bilateral parts list right then left. Hands and feet have
    /// no keypoints in the 17-point set and are always undefined.
    ///
    /// | part      | segments (anchor → moved)        |
    /// |-----------|----------------------------------|
    /// | neck      | neck → nose                      |
    /// | face      | nose → right eye, nose → left eye |
    /// | shoulders | neck → shoulder                  |
    /// | arm_upper | shoulder → elbow                 |
    /// | arm_lower | elbow → wrist                    |
    /// | torso     | mid-hip → neck                   |
    /// | leg_upper | hip → knee                       |
    /// | leg_lower | knee → ankle                     |
    ///
    /// The face part is measured on the eye distance and scales the eyes and head
    /// top about the nose.
    pub fn segments(self) -> &'static [Segment] {
        use kp::*;
        const NECK_S: [Segment; 1] = [seg(Kp(NECK), NOSE, &[R_EYE, L_EYE, HEAD_TOP])];
        const SHOULDERS: [Segment; 2] = [
            seg(Kp(NECK), R_SHOULDER, &[R_ELBOW, R_WRIST]),
            seg(Kp(NECK), L_SHOULDER, &[L_ELBOW, L_WRIST]),
        ];
        const ARM_UPPER: [Segment; 2] = [
            seg(Kp(R_SHOULDER), R_ELBOW, &[R_WRIST]),
            seg(Kp(L_SHOULDER), L_ELBOW, &[L_WRIST]),
        ];
        const ARM_LOWER: [Segment; 2] = [seg(Kp(R_ELBOW), R_WRIST, &[]), seg(Kp(L_ELBOW), L_WRIST, &[])];
        const TORSO: [Segment; 1] = [seg(
            MidHip,
            NECK,
            &[NOSE, R_SHOULDER, R_ELBOW, R_WRIST, L_SHOULDER, L_ELBOW, L_WRIST, R_EYE, L_EYE, HEAD_TOP],
        )];
        const LEG_UPPER: [Segment; 2] = [seg(Kp(R_HIP), R_KNEE, &[R_ANKLE]), seg(Kp(L_HIP), L_KNEE, &[L_ANKLE])];
        const LEG_LOWER: [Segment; 2] = [seg(Kp(R_KNEE), R_ANKLE, &[]), seg(Kp(L_KNEE), L_ANKLE, &[])];
        match self {
            BodyPart::Neck => &NECK_S,
            BodyPart::Face => &[],
            BodyPart::Shoulders => &SHOULDERS,
            BodyPart::ArmUpper => &ARM_UPPER,
            BodyPart::ArmLower => &ARM_LOWER,
            BodyPart::Hands | BodyPart::Feet => &[],
            BodyPart::Torso => &TORSO,
            BodyPart::LegUpper => &LEG_UPPER,
            BodyPart::LegLower => &LEG_LOWER,
        }
    }
}

/// Ratio of reference to source length per part. `defined[i]` is false when the
/// part fell back to 1 (missing keypoints, low confidence, or zero source length);
/// `degenerate[i]` marks the zero-length fallback.
#[derive(Clone, Debug, PartialEq)]
pub struct BodyPartScales {
    pub values: [f64; NUM_PARTS],
    pub defined: [bool; NUM_PARTS],
    pub degenerate: [bool; NUM_PARTS],
}

impl BodyPartScales {
    pub fn ones() -> Self {
        Self {
            values: [1.0; NUM_PARTS],
            defined: [false; NUM_PARTS],
            degenerate: [false; NUM_PARTS],
        }
    }

    pub fn get(&self, part: BodyPart) -> f64 {
        self.values[part_index(part)]
    }
}

pub fn part_index(part: BodyPart) -> usize {
    PARTS.iter().position(|p| *p == part).unwrap()
}

fn endpoint(s: &Skeleton2D, e: Endpoint) -> ([f64; 2], f64) {
    match e {
        Endpoint::Kp(i) => (s.point(i), s.confidence(i)),
        Endpoint::MidHip => {
            let (a, b) = (s.point(kp::R_HIP), s.point(kp::L_HIP));
            (
                [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
                s.confidence(kp::R_HIP).min(s.confidence(kp::L_HIP)),
            )
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Measured (start, end) pairs of each part, as keypoint endpoints.
fn measured(part: BodyPart) -> Vec<(Endpoint, Endpoint)> {
    if part == BodyPart::Face {
        return vec![(Kp(kp::R_EYE), Kp(kp::L_EYE))];
    }
    part.segments().iter().map(|s| (s.anchor, Kp(s.moved))).collect()
}

/// Per-part ratios `|ref segment| / |src segment|`, averaged over both sides for
/// bilateral parts. A part falls back to 1 unless every endpoint it uses has
/// confidence ≥ 0.3 in both skeletons and no source segment has zero length.
pub fn compute_scales(reference: &Skeleton2D, source: &Skeleton2D) -> BodyPartScales {
    let mut out = BodyPartScales::ones();
    for (pi, part) in PARTS.iter().enumerate() {
        let pairs = measured(*part);
        if pairs.is_empty() {
            continue;
        }
        let mut ratios = Vec::with_capacity(pairs.len());
        let mut ok = true;
        for (a, b) in pairs {
            let (ra, rca) = endpoint(reference, a);
            let (rb, rcb) = endpoint(reference, b);
            let (sa, sca) = endpoint(source, a);
            let (sb, scb) = endpoint(source, b);
            if [rca, rcb, sca, scb].iter().any(|c| *c < MIN_CONFIDENCE) {
                ok = false;
                break;
            }
            let src_len = dist(sa, sb);
            if src_len == 0.0 {
                out.degenerate[pi] = true;
                ok = false;
                break;
            }
            ratios.push(dist(ra, rb) / src_len);
        }
        if ok {
            out.values[pi] = ratios.iter().sum::<f64>() / ratios.len() as f64;
            out.defined[pi] = true;
        }
    }
    out
}

/// Order in which parts are applied: torso first, then outward.
pub const APPLY_ORDER: [BodyPart; NUM_PARTS] = [
    BodyPart::Torso,
    BodyPart::Neck,
    BodyPart::Face,
    BodyPart::Shoulders,
    BodyPart::ArmUpper,
    BodyPart::ArmLower,
    BodyPart::Hands,
    BodyPart::LegUpper,
    BodyPart::LegLower,
    BodyPart::Feet,
];

/// Rescales each part about its anchor, `p' = c + s·(p − c)`, moving the points
/// distal to it rigidly with their parent point.
pub fn apply_scales(source: &Skeleton2D, scales: &BodyPartScales) -> Skeleton2D {
    let mut out = source.clone();
    for part in APPLY_ORDER {
        let s = scales.get(part);
        if s == 1.0 {
            continue;
        }
        if part == BodyPart::Face {
            let c = out.point(kp::NOSE);
            for i in [kp::R_EYE, kp::L_EYE, kp::HEAD_TOP] {
                let p = out.point(i);
                out.keypoints[i][0] = c[0] + s * (p[0] - c[0]);
                out.keypoints[i][1] = c[1] + s * (p[1] - c[1]);
            }
            continue;
        }
        for seg in part.segments() {
            let (c, _) = endpoint(&out, seg.anchor);
            let p = out.point(seg.moved);
            let moved = [c[0] + s * (p[0] - c[0]), c[1] + s * (p[1] - c[1])];
            let delta = [moved[0] - p[0], moved[1] - p[1]];
            out.keypoints[seg.moved][0] = moved[0];
            out.keypoints[seg.moved][1] = moved[1];
            for &i in seg.carried {
                out.keypoints[i][0] += delta[0];
                out.keypoints[i][1] += delta[1];
            }
        }
    }
    out
}
