//! Orthographic SVG rendering of spherical point sequences.
//!
//! The sphere is projected onto the plane orthogonal to a view direction;
//! the outline circle is the silhouette of the unit sphere. Curves between
//! consecutive points follow geodesic arcs sampled at a fixed rate, so the
//! drawing is deterministic for fixed input and view.

use std::fmt::Write as _;

use sphere_subdiv::geometry::UnitPoint;
use sphere_subdiv::linalg;
use sphere_subdiv::mean::geodesic_average;
use sphere_subdiv::schemes::{BoundaryRule, PointSequence};

/// Points sampled on each geodesic edge (including one endpoint).
pub const EDGE_SAMPLES: usize = 32;

#[derive(Debug)]
pub enum RenderError {
    /// Only points on the 2-sphere (ambient dimension 3) can be drawn.
    DimensionUnsupported(usize),
    /// An edge connects antipodal points and has no unique geodesic.
    DegenerateEdge(String),
}

impl std::fmt::Display for RenderError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RenderError::DimensionUnsupported(d) => write!(
                f,
                "rendering needs points on the 2-sphere (ambient dimension 3), got dimension {d}"
            ),
            RenderError::DegenerateEdge(msg) => write!(f, "cannot draw edge: {msg}"),
        }
    }
}

impl std::error::Error for RenderError {}

/// Orthonormal frame (right, up, towards-viewer) for a view direction.
fn view_frame(view: [f64; 3]) -> Result<[[f64; 3]; 3], RenderError> {
    let n = linalg::norm(&view);
    if n < 1e-9 {
        return Err(RenderError::DegenerateEdge(
            "view direction must be nonzero".into(),
        ));
    }
    let w = [view[0] / n, view[1] / n, view[2] / n];
    // Helper axis least aligned with the view.
    let axis = {
        let abs = [w[0].abs(), w[1].abs(), w[2].abs()];
        if abs[0] <= abs[1] && abs[0] <= abs[2] {
            [1.0, 0.0, 0.0]
        } else if abs[1] <= abs[2] {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        }
    };
    let mut u = [
        axis[1] * w[2] - axis[2] * w[1],
        axis[2] * w[0] - axis[0] * w[2],
        axis[0] * w[1] - axis[1] * w[0],
    ];
    let un = linalg::norm(&u);
    for c in u.iter_mut() {
        *c /= un;
    }
    let v = [
        w[1] * u[2] - w[2] * u[1],
        w[2] * u[0] - w[0] * u[2],
        w[0] * u[1] - w[1] * u[0],
    ];
    Ok([u, v, w])
}

fn project(p: &UnitPoint<f64>, frame: &[[f64; 3]; 3]) -> (f64, f64) {
    let c = p.coords();
    // SVG y grows downward; negate the up coordinate.
    (linalg::dot(c, &frame[0]), -linalg::dot(c, &frame[1]))
}

/// One SVG path command string through the sequence, geodesic arcs sampled
/// at [`EDGE_SAMPLES`] points per edge, closed with `Z` for periodic input.
fn path_data(
    seq: &PointSequence<f64>,
    frame: &[[f64; 3]; 3],
) -> Result<String, RenderError> {
    let points = seq.points();
    let mut d = String::new();
    let (x, y) = project(&points[0], frame);
    write!(d, "M {x:.5} {y:.5}").expect("writing to a string cannot fail");
    let closed = seq.boundary() == BoundaryRule::Periodic;
    let edges = if closed { points.len() } else { points.len() - 1 };
    for e in 0..edges {
        let a = &points[e];
        let b = &points[(e + 1) % points.len()];
        for s in 1..=EDGE_SAMPLES {
            let t = s as f64 / EDGE_SAMPLES as f64;
            let q = geodesic_average(a, b, t)
                .map_err(|err| RenderError::DegenerateEdge(err.to_string()))?;
            let (x, y) = project(&q, frame);
            write!(d, " L {x:.5} {y:.5}").expect("writing to a string cannot fail");
        }
    }
    if closed {
        d.push_str(" Z");
    }
    Ok(d)
}

/// Renders the input polygon and, when given, its refinement. The document
/// holds exactly one silhouette circle plus one path per drawn sequence.
pub fn render(
    polygon: &PointSequence<f64>,
    refined: Option<&PointSequence<f64>>,
    view: [f64; 3],
) -> Result<String, RenderError> {
    for seq in std::iter::once(polygon).chain(refined) {
        if seq.ambient_dim() != 3 {
            return Err(RenderError::DimensionUnsupported(seq.ambient_dim()));
        }
    }
    let frame = view_frame(view)?;
    let mut svg = String::new();
    svg.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.1 -1.1 2.2 2.2\" width=\"640\" height=\"640\">\n",
    );
    svg.push_str(
        "  <circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#c8c8c8\" stroke-width=\"0.006\"/>\n",
    );
    let polygon_path = path_data(polygon, &frame)?;
    writeln!(
        svg,
        "  <path d=\"{polygon_path}\" fill=\"none\" stroke=\"#d07030\" stroke-width=\"0.008\"/>"
    )
    .expect("writing to a string cannot fail");
    if let Some(refined) = refined {
        let refined_path = path_data(refined, &frame)?;
        writeln!(
            svg,
            "  <path d=\"{refined_path}\" fill=\"none\" stroke=\"#3060c0\" stroke-width=\"0.005\"/>"
        )
        .expect("writing to a string cannot fail");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Default view direction: the diagonal (1,1,1)/sqrt(3).
pub fn default_view() -> [f64; 3] {
    let s = 3.0f64.sqrt().recip();
    [s, s, s]
}
