//! STL import and voxel-surface export.
//!
//! Binary STL is the canonical format: 80-byte header, little-endian u32
//! triangle count, then 50-byte records (normal + 3 vertices as f32 triples,
//! 2 attribute bytes). ASCII files are accepted on input via the `solid`
//! keyword heuristic, falling back to binary when the ASCII body fails to
//! parse.

use crate::error::{Result, TopoError};
use crate::optimizer::DensityField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub normal: [f32; 3],
    pub vertices: [[f32; 3]; 3],
}

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub triangles: Vec<Triangle>,
}

impl TriangleMesh {
    pub fn new(triangles: Vec<Triangle>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(TopoError::EmptyMesh);
        }
        for t in &triangles {
            for v in &t.vertices {
                if v.iter().any(|c| !c.is_finite()) {
                    return Err(TopoError::MalformedStl(
                        "non-finite vertex coordinate".into(),
                    ));
                }
            }
        }
        Ok(TriangleMesh { triangles })
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for t in &self.triangles {
            for v in &t.vertices {
                for a in 0..3 {
                    min[a] = min[a].min(v[a] as f64);
                    max[a] = max[a].max(v[a] as f64);
                }
            }
        }
        (min, max)
    }
}

/// Parses binary or ASCII STL bytes.
pub fn parse_stl(bytes: &[u8]) -> Result<TriangleMesh> {
    let looks_ascii = bytes
        .iter()
        .skip_while(|b| b.is_ascii_whitespace())
        .take(5)
        .map(|&b| b.to_ascii_lowercase())
        .eq(*b"solid");
    if looks_ascii {
        if let Ok(mesh) = parse_ascii(bytes) {
            return Ok(mesh);
        }
        // Binary files sometimes start with "solid" in the header.
    }
    parse_binary(bytes)
}

fn parse_binary(bytes: &[u8]) -> Result<TriangleMesh> {
    if bytes.len() < 84 {
        return Err(TopoError::MalformedStl(format!(
            "binary STL needs at least 84 bytes, got {}",
            bytes.len()
        )));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if count == 0 {
        return Err(TopoError::EmptyMesh);
    }
    let expected = 84 + 50 * count;
    if bytes.len() != expected {
        return Err(TopoError::MalformedStl(format!(
            "triangle count {count} implies {expected} bytes, file has {}",
            bytes.len()
        )));
    }
    let mut triangles = Vec::with_capacity(count);
    for i in 0..count {
        let rec = &bytes[84 + 50 * i..84 + 50 * (i + 1)];
        let f = |k: usize| f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().unwrap());
        triangles.push(Triangle {
            normal: [f(0), f(1), f(2)],
            vertices: [
                [f(3), f(4), f(5)],
                [f(6), f(7), f(8)],
                [f(9), f(10), f(11)],
            ],
        });
    }
    TriangleMesh::new(triangles)
}

fn parse_ascii(bytes: &[u8]) -> Result<TriangleMesh> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| TopoError::MalformedStl("ASCII STL is not valid UTF-8".into()))?;
    let mut tokens = text.split_whitespace().peekable();
    let bad = |what: &str| TopoError::MalformedStl(format!("ASCII STL: {what}"));

    if tokens.next().map(|t| t.to_ascii_lowercase()) != Some("solid".into()) {
        return Err(bad("missing `solid` keyword"));
    }
    // Optional solid name: skip tokens until `facet` or `endsolid`.
    let mut triangles = Vec::new();
    loop {
        let tok = loop {
            match tokens.next() {
                Some(t) => {
                    let l = t.to_ascii_lowercase();
                    if l == "facet" || l == "endsolid" {
                        break l;
                    }
                    if !triangles.is_empty() {
                        return Err(bad(&format!("unexpected token `{t}`")));
                    }
                    // part of the solid name
                }
                None => return Err(bad("unterminated solid")),
            }
        };
        if tok == "endsolid" {
            break;
        }
        expect_token(&mut tokens, "normal")?;
        let normal = [
            next_number(&mut tokens)?,
            next_number(&mut tokens)?,
            next_number(&mut tokens)?,
        ];
        expect_token(&mut tokens, "outer")?;
        expect_token(&mut tokens, "loop")?;
        let mut vertices = [[0.0f32; 3]; 3];
        for v in &mut vertices {
            expect_token(&mut tokens, "vertex")?;
            for c in v.iter_mut() {
                *c = next_number(&mut tokens)?;
            }
        }
        expect_token(&mut tokens, "endloop")?;
        expect_token(&mut tokens, "endfacet")?;
        triangles.push(Triangle { normal, vertices });
    }
    TriangleMesh::new(triangles)
}

fn expect_token<'a>(tokens: &mut impl Iterator<Item = &'a str>, word: &str) -> Result<()> {
    match tokens.next() {
        Some(t) if t.eq_ignore_ascii_case(word) => Ok(()),
        other => Err(TopoError::MalformedStl(format!(
            "ASCII STL: expected `{word}`, got {other:?}"
        ))),
    }
}

fn next_number<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<f32> {
    tokens
        .next()
        .ok_or_else(|| TopoError::MalformedStl("ASCII STL: truncated number list".into()))?
        .parse::<f32>()
        .map_err(|e| TopoError::MalformedStl(format!("ASCII STL: bad number: {e}")))
}

/// Serializes triangles as binary STL.
pub fn write_binary_stl(triangles: &[Triangle]) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * triangles.len());
    let header = format!("topo3d {} voxel surface export", env!("CARGO_PKG_VERSION"));
    let mut header_bytes = header.into_bytes();
    header_bytes.resize(80, b' ');
    out.extend_from_slice(&header_bytes);
    out.extend_from_slice(&(triangles.len() as u32).to_le_bytes());
    for t in triangles {
        for c in t.normal {
            out.extend_from_slice(&c.to_le_bytes());
        }
        for v in t.vertices {
            for c in v {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        out.extend_from_slice(&[0u8, 0u8]);
    }
    out
}

/// Emits the boundary surface of the above-threshold voxel set as binary
/// STL, vertex coordinates in element-length units.
pub fn export_stl(
    rho: &DensityField,
    dims: (usize, usize, usize),
    threshold: f64,
) -> Result<Vec<u8>> {
    let (nelx, nely, nelz) = dims;
    if rho.rho.len() != nelx * nely * nelz {
        return Err(TopoError::DimensionMismatch {
            expected: nelx * nely * nelz,
            got: rho.rho.len(),
        });
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(TopoError::InvalidConfig(format!(
            "export threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let occupied =
        |ex: i64, ey: i64, ez: i64| -> bool {
            if ex < 0 || ey < 0 || ez < 0 || ex >= nelx as i64 || ey >= nely as i64 || ez >= nelz as i64
            {
                return false;
            }
            let e = ez as usize * nelx * nely + ex as usize * nely + ey as usize;
            rho.rho[e] > threshold
        };

    let mut triangles = Vec::new();
    for ez in 0..nelz as i64 {
        for ex in 0..nelx as i64 {
            for ey in 0..nely as i64 {
                if !occupied(ex, ey, ez) {
                    continue;
                }
                for face in FACES {
                    let (dx, dy, dz) = face.neighbor;
                    if occupied(ex + dx, ey + dy, ez + dz) {
                        continue;
                    }
                    let corner = |off: [i64; 3]| -> [f32; 3] {
                        [
                            (ex + off[0]) as f32,
                            (ey + off[1]) as f32,
                            (ez + off[2]) as f32,
                        ]
                    };
                    let q: Vec<[f32; 3]> = face.corners.iter().map(|&o| corner(o)).collect();
                    triangles.push(Triangle {
                        normal: face.normal,
                        vertices: [q[0], q[1], q[2]],
                    });
                    triangles.push(Triangle {
                        normal: face.normal,
                        vertices: [q[0], q[2], q[3]],
                    });
                }
            }
        }
    }
    if triangles.is_empty() {
        return Err(TopoError::EmptyDesign(threshold));
    }
    Ok(write_binary_stl(&triangles))
}

struct Face {
    neighbor: (i64, i64, i64),
    normal: [f32; 3],
    /// Quad corners counter-clockwise seen from outside.
    corners: [[i64; 3]; 4],
}

const FACES: [Face; 6] = [
    Face {
        neighbor: (-1, 0, 0),
        normal: [-1.0, 0.0, 0.0],
        corners: [[0, 0, 0], [0, 0, 1], [0, 1, 1], [0, 1, 0]],
    },
    Face {
        neighbor: (1, 0, 0),
        normal: [1.0, 0.0, 0.0],
        corners: [[1, 0, 0], [1, 1, 0], [1, 1, 1], [1, 0, 1]],
    },
    Face {
        neighbor: (0, -1, 0),
        normal: [0.0, -1.0, 0.0],
        corners: [[0, 0, 0], [1, 0, 0], [1, 0, 1], [0, 0, 1]],
    },
    Face {
        neighbor: (0, 1, 0),
        normal: [0.0, 1.0, 0.0],
        corners: [[0, 1, 0], [0, 1, 1], [1, 1, 1], [1, 1, 0]],
    },
    Face {
        neighbor: (0, 0, -1),
        normal: [0.0, 0.0, -1.0],
        corners: [[0, 0, 0], [0, 1, 0], [1, 1, 0], [1, 0, 0]],
    },
    Face {
        neighbor: (0, 0, 1),
        normal: [0.0, 0.0, 1.0],
        corners: [[0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]],
    },
];

/// Canonical 12-triangle unit cube, used by tests and examples.
pub fn unit_cube_mesh() -> TriangleMesh {
    let rho = DensityField::uniform(1, 1.0);
    let bytes = export_stl(&rho, (1, 1, 1), 0.5).unwrap();
    parse_stl(&bytes).unwrap()
}
