//! Uniform rectangular partitions, interior degree-of-freedom numbering,
//! and the 2x2 macro-element patches used by the postprocessing operator.
//!
//! Nodes are numbered lexicographically by (y, x); element k = j*m + i is
//! the axis-aligned rectangle whose lower-left node sits at grid position
//! (i, j). All structures are immutable after construction and safe to
//! share across threads.

use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn unit_square() -> Self {
        Rect::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// Uniform partition of a rectangle into `m x m` bilinear elements.
#[derive(Debug, Clone)]
pub struct Mesh {
    /// Subdivisions per axis.
    pub m: usize,
    pub domain: Rect,
    /// Element width.
    pub hx: f64,
    /// Element height.
    pub hy: f64,
    /// Mesh size parameter: the larger element side.
    pub h: f64,
    /// Node coordinates, numbered lexicographically by (y, x).
    pub nodes: Vec<(f64, f64)>,
    /// Per element, its 4 node indices in counterclockwise order starting
    /// at the lower-left corner.
    pub elements: Vec<[usize; 4]>,
    /// True exactly for nodes on the boundary of the domain.
    pub boundary: Vec<bool>,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_interior_nodes(&self) -> usize {
        (self.m - 1) * (self.m - 1)
    }

    /// Node index at grid position (i, j), 0 <= i, j <= m.
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.m + 1) + i
    }

    /// Element index at grid position (i, j), 0 <= i, j < m.
    pub fn element_index(&self, i: usize, j: usize) -> usize {
        j * self.m + i
    }

    /// Coordinates of the lower-left corner of element `e`.
    pub fn element_origin(&self, e: usize) -> (f64, f64) {
        self.nodes[self.elements[e][0]]
    }

    /// Element containing (x, y) together with local coordinates in
    /// `[0, 1]^2`. Points outside the domain are clamped to it.
    pub fn locate(&self, x: f64, y: f64) -> (usize, f64, f64) {
        let fx = ((x - self.domain.x0) / self.hx).floor();
        let fy = ((y - self.domain.y0) / self.hy).floor();
        let i = (fx.max(0.0) as usize).min(self.m - 1);
        let j = (fy.max(0.0) as usize).min(self.m - 1);
        let (ox, oy) = self.nodes[self.node_index(i, j)];
        let xi = (x - ox) / self.hx;
        let eta = (y - oy) / self.hy;
        (self.element_index(i, j), xi, eta)
    }
}

/// Bijection between interior nodes and dense dof indices.
///
/// Boundary nodes carry no dof; the dof order is lexicographic by (y, x),
/// matching the node order restricted to the interior.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub node_to_dof: Vec<Option<usize>>,
    pub dof_to_node: Vec<usize>,
}

impl DofMap {
    pub fn n_dofs(&self) -> usize {
        self.dof_to_node.len()
    }
}

/// One 2x2 group of elements together with the nine fine-mesh nodes at the
/// biquadratic lattice positions (corners, edge midpoints, center).
#[derive(Debug, Clone)]
pub struct MacroPatch {
    pub elements: [usize; 4],
    /// Row-major 3x3 lattice: `nodes[b * 3 + a]` sits at local position
    /// (a/2, b/2) of the macro cell.
    pub nodes: [usize; 9],
}

/// Disjoint tiling of the mesh by 2x2 macro patches; requires even `m`.
#[derive(Debug, Clone)]
pub struct MacroPatchSet {
    pub patches: Vec<MacroPatch>,
    /// Patches per axis (= m / 2).
    pub patches_per_axis: usize,
}

impl MacroPatchSet {
    pub fn patch_index(&self, pi: usize, pj: usize) -> usize {
        pj * self.patches_per_axis + pi
    }

    /// Patch containing element `e` of the underlying mesh.
    pub fn patch_of_element(&self, mesh: &Mesh, e: usize) -> usize {
        let i = e % mesh.m;
        let j = e / mesh.m;
        self.patch_index(i / 2, j / 2)
    }
}

pub fn build_uniform_mesh(m: usize, domain: Rect) -> Result<Mesh> {
    if m < 1 {
        return Err(Error::InvalidArgument(format!(
            "subdivision count must be at least 1, got {m}"
        )));
    }
    if !(domain.width() > 0.0) || !(domain.height() > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "degenerate domain [{}, {}] x [{}, {}]",
            domain.x0, domain.x1, domain.y0, domain.y1
        )));
    }

    let mf = m as f64;
    let hx = domain.width() / mf;
    let hy = domain.height() / mf;

    let mut nodes = Vec::with_capacity((m + 1) * (m + 1));
    let mut boundary = Vec::with_capacity((m + 1) * (m + 1));
    for j in 0..=m {
        for i in 0..=m {
            // Written exactly as origin + i * side / m so node coordinates
            // are bit-for-bit reproducible.
            let x = domain.x0 + i as f64 * domain.width() / mf;
            let y = domain.y0 + j as f64 * domain.height() / mf;
            nodes.push((x, y));
            boundary.push(i == 0 || i == m || j == 0 || j == m);
        }
    }

    let mut elements = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            let v0 = j * (m + 1) + i;
            let v1 = v0 + 1;
            let v2 = v1 + (m + 1);
            let v3 = v0 + (m + 1);
            elements.push([v0, v1, v2, v3]);
        }
    }

    Ok(Mesh {
        m,
        domain,
        hx,
        hy,
        h: hx.max(hy),
        nodes,
        elements,
        boundary,
    })
}

pub fn build_dof_map(mesh: &Mesh) -> DofMap {
    let mut node_to_dof = alloc::vec![None; mesh.n_nodes()];
    let mut dof_to_node = Vec::with_capacity(mesh.n_interior_nodes());
    for j in 1..mesh.m {
        for i in 1..mesh.m {
            let node = mesh.node_index(i, j);
            node_to_dof[node] = Some(dof_to_node.len());
            dof_to_node.push(node);
        }
    }
    DofMap {
        node_to_dof,
        dof_to_node,
    }
}

pub fn build_macro_patches(mesh: &Mesh) -> Result<MacroPatchSet> {
    if mesh.m % 2 != 0 {
        return Err(Error::UnsupportedMesh(format!(
            "macro patches need an even subdivision count, got {}",
            mesh.m
        )));
    }
    let half = mesh.m / 2;
    let mut patches = Vec::with_capacity(half * half);
    for pj in 0..half {
        for pi in 0..half {
            let (ei, ej) = (2 * pi, 2 * pj);
            let elements = [
                mesh.element_index(ei, ej),
                mesh.element_index(ei + 1, ej),
                mesh.element_index(ei, ej + 1),
                mesh.element_index(ei + 1, ej + 1),
            ];
            let mut nodes = [0usize; 9];
            for b in 0..3 {
                for a in 0..3 {
                    nodes[b * 3 + a] = mesh.node_index(ei + a, ej + b);
                }
            }
            patches.push(MacroPatch { elements, nodes });
        }
    }
    Ok(MacroPatchSet {
        patches,
        patches_per_axis: half,
    })
}
