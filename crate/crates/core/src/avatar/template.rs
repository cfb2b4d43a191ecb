//! Articulated body template and the procedural capsule human.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub const NUM_SHAPE: usize = 10;

pub type ShapeDirs = [Vector3<f64>; NUM_SHAPE];

/// Canonical mesh with a joint tree and linear skinning weights.
///
/// Shape coefficients act linearly: rest vertex `v(β) = v + Σ_k β_k · vertex_shape_dirs[v][k]`,
/// and likewise for joints.
#[derive(Clone, Debug, PartialEq)]
pub struct BodyTemplate {
    pub canonical_vertices: Vec<Vector3<f64>>,
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<[usize; 3]>,
    pub joints: Vec<Vector3<f64>>,
    /// Parent joint index, `-1` for the root.
    pub parents: Vec<i32>,
    /// N×J dense weights, each row sums to 1.
    pub skin_weights: Vec<Vec<f64>>,
    pub vertex_shape_dirs: Vec<ShapeDirs>,
    pub joint_shape_dirs: Vec<ShapeDirs>,
}

/// Joint names of the reduced 16-joint body, in index order.
pub const JOINT_NAMES: [&str; 16] = [
    "pelvis",
    "chest",
    "neck",
    "head",
    "l_shoulder",
    "l_elbow",
    "l_wrist",
    "r_shoulder",
    "r_elbow",
    "r_wrist",
    "l_hip",
    "l_knee",
    "l_ankle",
    "r_hip",
    "r_knee",
    "r_ankle",
];

pub mod joint {
    pub const PELVIS: usize = 0;
    pub const CHEST: usize = 1;
    pub const NECK: usize = 2;
    pub const HEAD: usize = 3;
    pub const L_SHOULDER: usize = 4;
    pub const L_ELBOW: usize = 5;
    pub const L_WRIST: usize = 6;
    pub const R_SHOULDER: usize = 7;
    pub const R_ELBOW: usize = 8;
    pub const R_WRIST: usize = 9;
    pub const L_HIP: usize = 10;
    pub const L_KNEE: usize = 11;
    pub const L_ANKLE: usize = 12;
    pub const R_HIP: usize = 13;
    pub const R_KNEE: usize = 14;
    pub const R_ANKLE: usize = 15;
}

impl BodyTemplate {
    pub fn vertex_count(&self) -> usize {
        self.canonical_vertices.len()
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    pub fn parent(&self, j: usize) -> Option<usize> {
        usize::try_from(self.parents[j]).ok()
    }

    /// Joints ordered so that every parent precedes its children.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.joints.len();
        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for (j, &p) in self.parents.iter().enumerate() {
            match usize::try_from(p) {
                Ok(p) if p < n => children[p].push(j),
                Ok(p) => return Err(Error::input(format!("joint {j}: parent {p} out of range"))),
                Err(_) => roots.push(j),
            }
        }
        if roots != [0] {
            return Err(Error::input(format!("joint tree must have exactly joint 0 as root, found roots {roots:?}")));
        }
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![0usize];
        while let Some(j) = stack.pop() {
            order.push(j);
            stack.extend(children[j].iter().rev());
        }
        if order.len() != n {
            return Err(Error::input("joint parents contain a cycle or unreachable joints"));
        }
        Ok(order)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.canonical_vertices.len();
        let j = self.joints.len();
        if self.parents.len() != j || self.joint_shape_dirs.len() != j {
            return Err(Error::input("joint arrays disagree in length"));
        }
        if self.skin_weights.len() != n || self.vertex_shape_dirs.len() != n {
            return Err(Error::input("vertex arrays disagree in length"));
        }
        self.topological_order()?;
        for (v, row) in self.skin_weights.iter().enumerate() {
            if row.len() != j {
                return Err(Error::input(format!("vertex {v}: weight row has {} entries, expected {j}", row.len())));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-6 || row.iter().any(|w| *w < 0.0) {
                return Err(Error::input(format!("vertex {v}: weights not row-stochastic (sum {s})")));
            }
        }
        for e in &self.edges {
            if e[0] >= n || e[1] >= n || e[0] == e[1] {
                return Err(Error::input(format!("bad edge {e:?}")));
            }
        }
        for f in &self.faces {
            if f.iter().any(|&i| i >= n) {
                return Err(Error::input(format!("bad face {f:?}")));
            }
        }
        Ok(())
    }

    pub fn rest_joints(&self, shape: &[f64; NUM_SHAPE]) -> Vec<Vector3<f64>> {
        apply_shape(&self.joints, &self.joint_shape_dirs, shape)
    }

    pub fn rest_vertices(&self, shape: &[f64; NUM_SHAPE]) -> Vec<Vector3<f64>> {
        apply_shape(&self.canonical_vertices, &self.vertex_shape_dirs, shape)
    }

    /// Mean length of the mesh edges.
    pub fn mean_edge_length(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        let v = &self.canonical_vertices;
        self.edges.iter().map(|[a, b]| (v[*a] - v[*b]).norm()).sum::<f64>() / self.edges.len() as f64
    }

    /// Text mesh format, one record per line:
    ///
    /// ```text
    /// template 1
    /// counts <vertices> <edges> <faces> <joints> <shape>
    /// v x y z                      (per vertex)
    /// e a b                        (per edge)
    /// f a b c                      (per face)
    /// j parent x y z               (per joint, parent -1 for root)
    /// w w_0 .. w_{J-1}             (per vertex)
    /// vs dx_0 dy_0 dz_0 .. dz_9    (per vertex shape directions)
    /// js dx_0 dy_0 dz_0 .. dz_9    (per joint shape directions)
    /// ```
    ///
    /// Floats are written in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "template 1").unwrap();
        writeln!(
            s,
            "counts {} {} {} {} {}",
            self.canonical_vertices.len(),
            self.edges.len(),
            self.faces.len(),
            self.joints.len(),
            NUM_SHAPE
        )
        .unwrap();
        for v in &self.canonical_vertices {
            writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z).unwrap();
        }
        for e in &self.edges {
            writeln!(s, "e {} {}", e[0], e[1]).unwrap();
        }
        for f in &self.faces {
            writeln!(s, "f {} {} {}", f[0], f[1], f[2]).unwrap();
        }
        for (j, p) in self.joints.iter().zip(&self.parents) {
            writeln!(s, "j {} {:?} {:?} {:?}", p, j.x, j.y, j.z).unwrap();
        }
        for row in &self.skin_weights {
            s.push('w');
            for w in row {
                write!(s, " {w:?}").unwrap();
            }
            s.push('\n');
        }
        for (tag, dirs) in [("vs", &self.vertex_shape_dirs), ("js", &self.joint_shape_dirs)] {
            for d in dirs.iter() {
                s.push_str(tag);
                for v in d {
                    write!(s, " {:?} {:?} {:?}", v.x, v.y, v.z).unwrap();
                }
                s.push('\n');
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut t = BodyTemplate {
            canonical_vertices: Vec::new(),
            edges: Vec::new(),
            faces: Vec::new(),
            joints: Vec::new(),
            parents: Vec::new(),
            skin_weights: Vec::new(),
            vertex_shape_dirs: Vec::new(),
            joint_shape_dirs: Vec::new(),
        };
        let mut counts: Option<[usize; 5]> = None;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::input(format!("template line {}: {what}", ln + 1));
            let mut parts = line.split_whitespace();
            let tag = parts.next().unwrap();
            let nums: Vec<&str> = parts.collect();
            let floats = || -> Result<Vec<f64>> {
                nums.iter()
                    .map(|s| s.parse::<f64>().map_err(|_| bad("invalid number")))
                    .collect()
            };
            let ints = || -> Result<Vec<usize>> {
                nums.iter()
                    .map(|s| s.parse::<usize>().map_err(|_| bad("invalid index")))
                    .collect()
            };
            match tag {
                "template" => {
                    if nums != ["1"] {
                        return Err(bad("unsupported template version"));
                    }
                }
                "counts" => {
                    let c = ints()?;
                    if c.len() != 5 || c[4] != NUM_SHAPE {
                        return Err(bad("counts needs 5 entries with 10 shape coefficients"));
                    }
                    counts = Some([c[0], c[1], c[2], c[3], c[4]]);
                }
                "v" => {
                    let f = floats()?;
                    if f.len() != 3 {
                        return Err(bad("vertex needs 3 coordinates"));
                    }
                    t.canonical_vertices.push(Vector3::new(f[0], f[1], f[2]));
                }
                "e" => {
                    let i = ints()?;
                    if i.len() != 2 {
                        return Err(bad("edge needs 2 indices"));
                    }
                    t.edges.push([i[0], i[1]]);
                }
                "f" => {
                    let i = ints()?;
                    if i.len() != 3 {
                        return Err(bad("face needs 3 indices"));
                    }
                    t.faces.push([i[0], i[1], i[2]]);
                }
                "j" => {
                    if nums.len() != 4 {
                        return Err(bad("joint needs parent and 3 coordinates"));
                    }
                    let p: i32 = nums[0].parse().map_err(|_| bad("invalid parent"))?;
                    let f: Vec<f64> = nums[1..]
                        .iter()
                        .map(|s| s.parse::<f64>().map_err(|_| bad("invalid number")))
                        .collect::<Result<_>>()?;
                    t.parents.push(p);
                    t.joints.push(Vector3::new(f[0], f[1], f[2]));
                }
                "w" => t.skin_weights.push(floats()?),
                "vs" | "js" => {
                    let f = floats()?;
                    if f.len() != 3 * NUM_SHAPE {
                        return Err(bad("shape direction row needs 30 numbers"));
                    }
                    let dirs: ShapeDirs = std::array::from_fn(|k| Vector3::new(f[3 * k], f[3 * k + 1], f[3 * k + 2]));
                    if tag == "vs" {
                        t.vertex_shape_dirs.push(dirs);
                    } else {
                        t.joint_shape_dirs.push(dirs);
                    }
                }
                _ => return Err(bad("unknown record tag")),
            }
        }
        let c = counts.ok_or_else(|| Error::input("template is missing the counts line"))?;
        if [t.canonical_vertices.len(), t.edges.len(), t.faces.len(), t.joints.len()] != [c[0], c[1], c[2], c[3]] {
            return Err(Error::input("template record counts do not match the counts line"));
        }
        t.validate()?;
        Ok(t)
    }
}

fn apply_shape(base: &[Vector3<f64>], dirs: &[ShapeDirs], shape: &[f64; NUM_SHAPE]) -> Vec<Vector3<f64>> {
    base.iter()
        .zip(dirs)
        .map(|(b, d)| {
            let mut p = *b;
            for k in 0..NUM_SHAPE {
                if shape[k] != 0.0 {
                    p += d[k] * shape[k];
                }
            }
            p
        })
        .collect()
}

/// Parameters of the procedural capsule human.
#[derive(Clone, Debug)]
pub struct CapsuleParams {
    /// Target spacing between neighboring surface vertices.
    pub spacing: f64,
    /// Relative change of the affected lengths/radii per unit shape coefficient.
    pub shape_gain: f64,
}

impl Default for CapsuleParams {
    fn default() -> Self {
        Self {
            spacing: 0.045,
            shape_gain: 0.05,
        }
    }
}

// Shape coefficient roles.
const SHAPE_GLOBAL: usize = 0;
const SHAPE_ARMS: usize = 1;
const SHAPE_LEGS: usize = 2;
const SHAPE_TORSO: usize = 3;
const SHAPE_LIMB_RADIUS: usize = 4;
const SHAPE_TORSO_RADIUS: usize = 5;
const SHAPE_SHOULDERS: usize = 6;
const SHAPE_HIPS: usize = 7;
const SHAPE_HEAD: usize = 8;
const SHAPE_NECK: usize = 9;

struct Bone {
    from: usize,
    /// Offset of the segment end from its start at β = 0.
    offset: Vector3<f64>,
    length_groups: &'static [usize],
    joint: usize,
}

struct Capsule {
    /// Joint the surface is rigidly attached to.
    driver: usize,
    /// Start point: a joint position.
    start_joint: usize,
    /// Segment end: either another joint or a free end point offset from `start_joint`.
    end: CapsuleEnd,
    radius: f64,
    radius_groups: &'static [usize],
}

enum CapsuleEnd {
    Joint(usize),
    Free {
        offset: Vector3<f64>,
        length_groups: &'static [usize],
    },
}

fn group_scale(groups: &[usize], shape: &[f64; NUM_SHAPE], gain: f64) -> f64 {
    1.0 + gain * (shape[SHAPE_GLOBAL] + groups.iter().map(|&g| shape[g]).sum::<f64>())
}

fn capsule_layout() -> (Vector3<f64>, Vec<Bone>, Vec<Capsule>) {
    use joint::*;
    let v = Vector3::new;
    let pelvis = v(0.0, 0.95, 0.0);
    let bones = vec![
        Bone { from: PELVIS, offset: v(0.0, 0.33, 0.0), length_groups: &[SHAPE_TORSO], joint: CHEST },
        Bone { from: CHEST, offset: v(0.0, 0.20, 0.0), length_groups: &[SHAPE_TORSO], joint: NECK },
        Bone { from: NECK, offset: v(0.0, 0.17, 0.0), length_groups: &[SHAPE_NECK], joint: HEAD },
        Bone { from: CHEST, offset: v(0.19, 0.13, 0.0), length_groups: &[SHAPE_SHOULDERS], joint: L_SHOULDER },
        Bone { from: L_SHOULDER, offset: v(0.28, 0.0, 0.0), length_groups: &[SHAPE_ARMS], joint: L_ELBOW },
        Bone { from: L_ELBOW, offset: v(0.25, 0.0, 0.0), length_groups: &[SHAPE_ARMS], joint: L_WRIST },
        Bone { from: CHEST, offset: v(-0.19, 0.13, 0.0), length_groups: &[SHAPE_SHOULDERS], joint: R_SHOULDER },
        Bone { from: R_SHOULDER, offset: v(-0.28, 0.0, 0.0), length_groups: &[SHAPE_ARMS], joint: R_ELBOW },
        Bone { from: R_ELBOW, offset: v(-0.25, 0.0, 0.0), length_groups: &[SHAPE_ARMS], joint: R_WRIST },
        Bone { from: PELVIS, offset: v(0.10, -0.06, 0.0), length_groups: &[SHAPE_HIPS], joint: L_HIP },
        Bone { from: L_HIP, offset: v(0.0, -0.42, 0.0), length_groups: &[SHAPE_LEGS], joint: L_KNEE },
        Bone { from: L_KNEE, offset: v(0.0, -0.40, 0.0), length_groups: &[SHAPE_LEGS], joint: L_ANKLE },
        Bone { from: PELVIS, offset: v(-0.10, -0.06, 0.0), length_groups: &[SHAPE_HIPS], joint: R_HIP },
        Bone { from: R_HIP, offset: v(0.0, -0.42, 0.0), length_groups: &[SHAPE_LEGS], joint: R_KNEE },
        Bone { from: R_KNEE, offset: v(0.0, -0.40, 0.0), length_groups: &[SHAPE_LEGS], joint: R_ANKLE },
    ];
    let limb = &[SHAPE_LIMB_RADIUS][..];
    let torso = &[SHAPE_TORSO_RADIUS][..];
    let free = |offset, length_groups| CapsuleEnd::Free { offset, length_groups };
    let capsules = vec![
        Capsule { driver: PELVIS, start_joint: PELVIS, end: CapsuleEnd::Joint(CHEST), radius: 0.13, radius_groups: torso },
        Capsule { driver: CHEST, start_joint: CHEST, end: CapsuleEnd::Joint(NECK), radius: 0.14, radius_groups: torso },
        Capsule { driver: NECK, start_joint: NECK, end: free(v(0.0, 0.08, 0.0), &[SHAPE_NECK]), radius: 0.05, radius_groups: limb },
        Capsule { driver: HEAD, start_joint: HEAD, end: free(v(0.0, 0.10, 0.0), &[SHAPE_HEAD]), radius: 0.095, radius_groups: &[SHAPE_HEAD] },
        Capsule { driver: L_SHOULDER, start_joint: L_SHOULDER, end: CapsuleEnd::Joint(L_ELBOW), radius: 0.05, radius_groups: limb },
        Capsule { driver: L_ELBOW, start_joint: L_ELBOW, end: CapsuleEnd::Joint(L_WRIST), radius: 0.04, radius_groups: limb },
        Capsule { driver: L_WRIST, start_joint: L_WRIST, end: free(v(0.13, 0.0, 0.0), &[SHAPE_ARMS]), radius: 0.035, radius_groups: limb },
        Capsule { driver: R_SHOULDER, start_joint: R_SHOULDER, end: CapsuleEnd::Joint(R_ELBOW), radius: 0.05, radius_groups: limb },
        Capsule { driver: R_ELBOW, start_joint: R_ELBOW, end: CapsuleEnd::Joint(R_WRIST), radius: 0.04, radius_groups: limb },
        Capsule { driver: R_WRIST, start_joint: R_WRIST, end: free(v(-0.13, 0.0, 0.0), &[SHAPE_ARMS]), radius: 0.035, radius_groups: limb },
        Capsule { driver: L_HIP, start_joint: L_HIP, end: CapsuleEnd::Joint(L_KNEE), radius: 0.075, radius_groups: limb },
        Capsule { driver: L_KNEE, start_joint: L_KNEE, end: CapsuleEnd::Joint(L_ANKLE), radius: 0.055, radius_groups: limb },
        Capsule { driver: L_ANKLE, start_joint: L_ANKLE, end: free(v(0.0, -0.03, 0.16), &[SHAPE_LEGS]), radius: 0.04, radius_groups: limb },
        Capsule { driver: R_HIP, start_joint: R_HIP, end: CapsuleEnd::Joint(R_KNEE), radius: 0.075, radius_groups: limb },
        Capsule { driver: R_KNEE, start_joint: R_KNEE, end: CapsuleEnd::Joint(R_ANKLE), radius: 0.055, radius_groups: limb },
        Capsule { driver: R_ANKLE, start_joint: R_ANKLE, end: free(v(0.0, -0.03, 0.16), &[SHAPE_LEGS]), radius: 0.04, radius_groups: limb },
    ];
    (pelvis, bones, capsules)
}

fn perpendicular_frame(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if axis.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
    let u = axis.cross(&helper).normalize();
    let w = axis.cross(&u);
    (u, w)
}

struct Built {
    joints: Vec<Vector3<f64>>,
    parents: Vec<i32>,
    vertices: Vec<Vector3<f64>>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    weights: Vec<Vec<f64>>,
}

/// Builds the capsule human for one shape vector. Topology depends only on
/// β = 0 geometry, and positions are affine in β.
fn build_capsule_human(params: &CapsuleParams, shape: &[f64; NUM_SHAPE]) -> Built {
    let (pelvis, bones, capsules) = capsule_layout();
    let gain = params.shape_gain;
    let nj = JOINT_NAMES.len();
    let layout_joints = |s: &[f64; NUM_SHAPE]| {
        let mut js = vec![Vector3::zeros(); nj];
        js[joint::PELVIS] = pelvis * group_scale(&[], s, gain);
        for b in &bones {
            js[b.joint] = js[b.from] + b.offset * group_scale(b.length_groups, s, gain);
        }
        js
    };
    let mut parents = vec![-1i32; nj];
    for b in &bones {
        parents[b.joint] = b.from as i32;
    }
    let joints = layout_joints(shape);
    // topology comes from the β = 0 layout so every shape shares it
    let joints0 = layout_joints(&[0.0; NUM_SHAPE]);

    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut faces = Vec::new();
    let mut weights = Vec::new();
    for cap in &capsules {
        let segment = |js: &[Vector3<f64>], s: &[f64; NUM_SHAPE]| {
            let st = js[cap.start_joint];
            let en = match &cap.end {
                CapsuleEnd::Joint(e) => js[*e],
                CapsuleEnd::Free { offset, length_groups } => st + offset * group_scale(length_groups, s, gain),
            };
            (st, en)
        };
        let (start0, end0) = segment(&joints0, &[0.0; NUM_SHAPE]);
        let (start, end) = segment(&joints, shape);
        let axis = (end0 - start0).normalize();
        let len0 = (end0 - start0).norm();
        let r0 = cap.radius;
        let r = cap.radius * group_scale(cap.radius_groups, shape, gain);
        let (u, w) = perpendicular_frame(&axis);
        let around = ((2.0 * std::f64::consts::PI * r0 / params.spacing).round() as usize).max(6);
        let along = ((len0 / params.spacing).round() as usize).max(1);
        let cap_rings = ((0.5 * std::f64::consts::PI * r0 / params.spacing).round() as usize).clamp(1, 4);

        // rings: (axial position as fraction of length, axial offset in radii, ring radius factor)
        let mut rings: Vec<(f64, f64, f64)> = Vec::new();
        for k in (1..=cap_rings).rev() {
            let th = 0.5 * std::f64::consts::PI * k as f64 / (cap_rings + 1) as f64;
            rings.push((0.0, -th.sin(), th.cos()));
        }
        for k in 0..=along {
            rings.push((k as f64 / along as f64, 0.0, 1.0));
        }
        for k in 1..=cap_rings {
            let th = 0.5 * std::f64::consts::PI * k as f64 / (cap_rings + 1) as f64;
            rings.push((1.0, th.sin(), th.cos()));
        }

        let seg = end - start;
        let parent = parents[cap.driver];
        let blend_len = 0.25 * len0;
        let mut push_vertex = |p: Vector3<f64>, axial0: f64| {
            let mut row = vec![0.0; nj];
            if parent >= 0 && axial0 < blend_len {
                let wp = 0.5 * (1.0 - axial0.max(0.0) / blend_len);
                row[parent as usize] = wp;
                row[cap.driver] = 1.0 - wp;
            } else {
                row[cap.driver] = 1.0;
            }
            vertices.push(p);
            weights.push(row);
            vertices.len() - 1
        };

        let south = push_vertex(start - axis * r, -r0);
        let mut ring_ids: Vec<Vec<usize>> = Vec::new();
        for &(frac, ax, rad) in &rings {
            let ids = (0..around)
                .map(|a| {
                    let phi = 2.0 * std::f64::consts::PI * a as f64 / around as f64;
                    let radial = u * phi.cos() + w * phi.sin();
                    let p = start + seg * frac + axis * (ax * r) + radial * (rad * r);
                    push_vertex(p, frac * len0 + ax * r0)
                })
                .collect();
            ring_ids.push(ids);
        }
        let north = push_vertex(end + axis * r, len0 + r0);

        for ids in &ring_ids {
            for a in 0..around {
                edges.push([ids[a], ids[(a + 1) % around]]);
            }
        }
        for a in 0..around {
            let b = (a + 1) % around;
            edges.push([south, ring_ids[0][a]]);
            faces.push([south, ring_ids[0][b], ring_ids[0][a]]);
            let last = ring_ids.last().unwrap();
            edges.push([last[a], north]);
            faces.push([north, last[a], last[b]]);
        }
        for pair in ring_ids.windows(2) {
            let (lo, hi) = (&pair[0], &pair[1]);
            for a in 0..around {
                let b = (a + 1) % around;
                edges.push([lo[a], hi[a]]);
                edges.push([lo[a], hi[b]]);
                faces.push([lo[a], lo[b], hi[b]]);
                faces.push([lo[a], hi[b], hi[a]]);
            }
        }
    }
    Built {
        joints,
        parents,
        vertices,
        edges,
        faces,
        weights,
    }
}

/// Procedural 16-joint capsule human in a T-pose (arms horizontal), y up, facing +z.
///
/// Shape coefficients scale groups of bone lengths and capsule radii by
/// `1 + gain·(β_0 + β_group)`: β0 overall, β1 arms, β2 legs, β3 torso, β4 limb
/// radius, β5 torso radius, β6 shoulder width, β7 hip width, β8 head, β9 neck.
pub fn capsule_human(params: &CapsuleParams) -> BodyTemplate {
    let zero = [0.0; NUM_SHAPE];
    let base = build_capsule_human(params, &zero);
    let mut vertex_shape_dirs = vec![[Vector3::zeros(); NUM_SHAPE]; base.vertices.len()];
    let mut joint_shape_dirs = vec![[Vector3::zeros(); NUM_SHAPE]; base.joints.len()];
    for k in 0..NUM_SHAPE {
        let mut e = zero;
        e[k] = 1.0;
        let b = build_capsule_human(params, &e);
        for (i, v) in b.vertices.iter().enumerate() {
            vertex_shape_dirs[i][k] = v - base.vertices[i];
        }
        for (i, j) in b.joints.iter().enumerate() {
            joint_shape_dirs[i][k] = j - base.joints[i];
        }
    }
    BodyTemplate {
        canonical_vertices: base.vertices,
        edges: dedup_edges(base.edges),
        faces: base.faces,
        joints: base.joints,
        parents: base.parents,
        skin_weights: base.weights,
        vertex_shape_dirs,
        joint_shape_dirs,
    }
}

fn dedup_edges(edges: Vec<[usize; 2]>) -> Vec<[usize; 2]> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for [a, b] in edges {
        let key = (a.min(b), a.max(b));
        if seen.insert(key, ()).is_none() {
            out.push([key.0, key.1]);
        }
    }
    out
}
