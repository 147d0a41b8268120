//! SVG rendering of fields, decompositions, networks, and routes.
//!
//! The potential is rasterized once into an embedded PNG heat layer
//! (white = free, saturated red = restricted); cells, edges, and routes
//! are drawn as vector elements on top in field coordinates, so the SVG
//! viewBox matches the field bounding box and everything scales together.

use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;

use crate::decomposition::QuadNode;
use crate::error::{io_context, Result};
use crate::geom::Vec2;
use crate::metrics::Route;
use crate::network::RoutingNetwork;
use crate::scenario::Scenario;

/// Heat-layer resolution (pixels per side).
pub const RASTER_SIZE: u32 = 256;

/// Optional overlays; the potential raster and the endpoint markers are
/// always drawn.
#[derive(Default)]
pub struct PlotArtifacts<'a> {
    pub tree: Option<&'a QuadNode>,
    pub network: Option<&'a RoutingNetwork>,
    /// `(planner label, route)` pairs, drawn in order.
    pub routes: Vec<(&'a str, &'a Route)>,
}

fn planner_color(label: &str) -> &'static str {
    match label {
        "PM" => "#7570b3",
        "APF" => "#1b9e77",
        "APF*" => "#66a61e",
        "M-APF" => "#e6ab02",
        "Larp" => "#0b3d91",
        _ => "#444444",
    }
}

/// Field-to-viewport mapping: the viewBox spans the field, y flipped so
/// north is up.
struct Frame {
    min_x: f64,
    max_y: f64,
}

impl Frame {
    fn x(&self, p: Vec2) -> f64 {
        p.x - self.min_x
    }

    fn y(&self, p: Vec2) -> f64 {
        self.max_y - p.y
    }
}

fn heat_png(scenario: &Scenario, frame: &Frame) -> String {
    let field = scenario.field();
    let step = scenario.field_size / RASTER_SIZE as f64;
    let mut img = image::RgbImage::new(RASTER_SIZE, RASTER_SIZE);
    for (i, j, pixel) in img.enumerate_pixels_mut() {
        let x = frame.min_x + (i as f64 + 0.5) * step;
        let y = frame.max_y - (j as f64 + 0.5) * step;
        let sigma = field.potential(Vec2::new(x, y));
        let fade = (255.0 * (1.0 - sigma)).round() as u8;
        *pixel = image::Rgb([255, fade, fade]);
    }
    let mut buf = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut buf), image::ImageFormat::Png)
        .expect("in-memory png encoding succeeds");
    BASE64.encode(buf)
}

/// Render the scenario and overlays as a standalone SVG document.
pub fn render_svg(scenario: &Scenario, artifacts: &PlotArtifacts) -> String {
    let size = scenario.field_size;
    let half = size / 2.0;
    let frame = Frame {
        min_x: scenario.field_center.x - half,
        max_y: scenario.field_center.y + half,
    };
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {size} {size}\" \
         width=\"768\" height=\"768\">\n"
    ));
    svg.push_str(&format!(
        "  <image x=\"0\" y=\"0\" width=\"{size}\" height=\"{size}\" \
         preserveAspectRatio=\"none\" image-rendering=\"pixelated\" \
         href=\"data:image/png;base64,{}\"/>\n",
        heat_png(scenario, &frame)
    ));

    if let Some(tree) = artifacts.tree {
        svg.push_str(&format!(
            "  <g fill=\"none\" stroke=\"#00000055\" stroke-width=\"{:.4}\">\n",
            size / 1536.0
        ));
        for leaf in tree.leaves() {
            let corner = leaf.center() + Vec2::new(-leaf.side() / 2.0, leaf.side() / 2.0);
            svg.push_str(&format!(
                "    <rect x=\"{:.4}\" y=\"{:.4}\" width=\"{:.4}\" height=\"{:.4}\"/>\n",
                frame.x(corner),
                frame.y(corner),
                leaf.side(),
                leaf.side()
            ));
        }
        svg.push_str("  </g>\n");
    }

    if let Some(network) = artifacts.network {
        svg.push_str(&format!(
            "  <g stroke=\"#3366cc66\" stroke-width=\"{:.4}\">\n",
            size / 2048.0
        ));
        for &(a, b) in network.edges() {
            let pa = network.nodes()[a].center;
            let pb = network.nodes()[b].center;
            svg.push_str(&format!(
                "    <line x1=\"{:.4}\" y1=\"{:.4}\" x2=\"{:.4}\" y2=\"{:.4}\"/>\n",
                frame.x(pa),
                frame.y(pa),
                frame.x(pb),
                frame.y(pb)
            ));
        }
        svg.push_str("  </g>\n");
    }

    for (label, route) in &artifacts.routes {
        let points: Vec<String> = route
            .points
            .iter()
            .map(|&p| format!("{:.4},{:.4}", frame.x(p), frame.y(p)))
            .collect();
        svg.push_str(&format!(
            "  <polyline data-planner=\"{label}\" points=\"{}\" fill=\"none\" \
             stroke=\"{}\" stroke-width=\"{:.4}\" stroke-linejoin=\"round\"/>\n",
            points.join(" "),
            planner_color(label),
            size / 256.0
        ));
    }

    let marker_radius = size / 96.0;
    svg.push_str(&format!(
        "  <circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"{:.4}\" fill=\"red\"/>\n",
        frame.x(scenario.start),
        frame.y(scenario.start),
        marker_radius
    ));
    svg.push_str(&format!(
        "  <circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"{:.4}\" fill=\"#1a9850\"/>\n",
        frame.x(scenario.goal),
        frame.y(scenario.goal),
        marker_radius
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Render and write to `path`.
pub fn render_plot(scenario: &Scenario, artifacts: &PlotArtifacts, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(scenario, artifacts)).map_err(|e| io_context(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, SearchConfig};

    fn scenario() -> Scenario {
        Scenario::from_json(
            r#"{"units": [{"kind": "point", "location": [32.0, 32.0],
                "repulsion": [[1.0, 0.0], [0.0, 1.0]]}],
                "start": [2.0, 2.0], "goal": [62.0, 62.0]}"#,
        )
        .unwrap()
    }

    #[test]
    fn field_only_render_has_raster_markers_and_no_overlays() {
        let svg = render_svg(&scenario(), &PlotArtifacts::default());
        assert!(svg.contains("data:image/png;base64,"));
        assert!(svg.contains("fill=\"red\""), "start marker present");
        assert!(!svg.contains("<polyline"));
        assert!(!svg.contains("<rect"));
        assert!(!svg.contains("<line"));
    }

    #[test]
    fn raster_is_full_resolution_and_red_on_the_unit() {
        let svg = render_svg(&scenario(), &PlotArtifacts::default());
        let encoded = svg
            .split("base64,")
            .nth(1)
            .and_then(|rest| rest.split('"').next())
            .unwrap();
        let bytes = BASE64.decode(encoded).unwrap();
        let img = image::load_from_memory(&bytes).unwrap().to_rgb8();
        assert_eq!(img.dimensions(), (RASTER_SIZE, RASTER_SIZE));
        // The unit sits at the field center; the nearest pixel center is
        // an eighth of a meter off, so the pixel is red up to that offset.
        let center = *img.get_pixel(RASTER_SIZE / 2, RASTER_SIZE / 2);
        assert_eq!(center[0], 255);
        assert!(center[1] <= 8, "σ ≈ 1 at the unit, got {center:?}");
        assert_eq!(*img.get_pixel(2, 2), image::Rgb([255, 255, 255]));
    }

    #[test]
    fn leaf_outlines_match_leaf_count_and_edges_match_edge_count() {
        let s = scenario();
        let tree = s.build_tree().unwrap();
        let network = build_network(&tree, &SearchConfig::default());
        let artifacts = PlotArtifacts {
            tree: Some(&tree),
            network: Some(&network),
            routes: Vec::new(),
        };
        let svg = render_svg(&s, &artifacts);
        assert_eq!(svg.matches("<rect").count(), tree.leaves().len());
        assert_eq!(svg.matches("<line").count(), network.edges().len());
    }

    #[test]
    fn route_polyline_preserves_vertex_count() {
        let s = scenario();
        let route = Route::new(vec![
            Vec2::new(2.0, 2.0),
            Vec2::new(10.0, 5.0),
            Vec2::new(20.0, 20.0),
            Vec2::new(62.0, 62.0),
        ]);
        let artifacts = PlotArtifacts {
            routes: vec![("Larp", &route)],
            ..PlotArtifacts::default()
        };
        let svg = render_svg(&s, &artifacts);
        let points = svg
            .split("points=\"")
            .nth(1)
            .and_then(|rest| rest.split('"').next())
            .unwrap();
        assert_eq!(points.split_whitespace().count(), route.points.len());
        assert!(svg.contains("data-planner=\"Larp\""));
    }

    #[test]
    fn render_plot_writes_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plot.svg");
        render_plot(&scenario(), &PlotArtifacts::default(), &path).unwrap();
        let written = std::fs::read_to_string(&path).unwrap();
        assert!(written.starts_with("<svg"));
        assert!(written.ends_with("</svg>\n"));
    }
}
