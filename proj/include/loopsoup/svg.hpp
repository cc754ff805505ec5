#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "loopsoup/cluster.hpp"
#include "loopsoup/exploration.hpp"
#include "loopsoup/geometry.hpp"
#include "loopsoup/topology.hpp"

namespace loopsoup {

// Layer toggles and palette. Default colors follow the usual presentation:
// red outer contours, blue boundary-touching loops, black interior loops,
// green exploration highlight.
struct RenderSpec {
  bool show_fillings = true;
  bool show_loops = true;
  bool show_contours = true;
  bool split_boundary_touching = true;
  bool show_exploration = false;
  double scale = 6.0;  // pixels per lattice unit
  std::string color_fill = "#f4e9d8";
  std::string color_contour = "#d62728";
  std::string color_boundary = "#1f77b4";
  std::string color_interior = "#000000";
  std::string color_highlight = "#2ca02c";
  std::string color_domain = "#bbbbbb";
};

namespace detail {

inline std::string fmt_px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

// Standalone SVG of a sample: fillings, loops, outer contours and an
// optional exploration overlay, in that z-order.
inline std::string render_svg(const LatticeDomain& domain,
                              const std::vector<RwLoop>& loops,
                              const RenderSpec& spec,
                              const ExplorationResult* exploration = nullptr) {
  const Box b = domain.bounds().expanded(1);
  const double s = spec.scale;
  auto px = [&](double x) { return (x - b.xmin) * s; };
  auto py = [&](double y) { return (b.ymax - y) * s; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         detail::fmt_px(b.width() * s) + "\" height=\"" +
         detail::fmt_px(b.height() * s) + "\" viewBox=\"0 0 " +
         detail::fmt_px(b.width() * s) + " " + detail::fmt_px(b.height() * s) +
         "\">\n";

  // Domain outline.
  if (domain.kind() == DomainKind::disk) {
    svg += "<circle cx=\"" + detail::fmt_px(px(0)) + "\" cy=\"" +
           detail::fmt_px(py(0)) + "\" r=\"" +
           detail::fmt_px(domain.radius() * s) + "\" fill=\"none\" stroke=\"" +
           spec.color_domain + "\" stroke-width=\"1\"/>\n";
  } else {
    svg += "<rect x=\"" + detail::fmt_px(px(-domain.width() - 0.5)) + "\" y=\"" +
           detail::fmt_px(py(domain.height() + 0.5)) + "\" width=\"" +
           detail::fmt_px((2 * domain.width() + 1) * s) + "\" height=\"" +
           detail::fmt_px((domain.height() + 1) * s) + "\" fill=\"none\" stroke=\"" +
           spec.color_domain + "\" stroke-width=\"1\"/>\n";
  }

  ClusterAnalysis analysis(loops, build_clusters(loops));

  // Contour corners live on the dual lattice; cell (x,y) is drawn centered
  // on the site, so corner (cx,cy) maps to (cx-0.5, cy-0.5).
  auto contour_path = [&](const Contour& contour) {
    std::string path;
    for (std::size_t i = 0; i < contour.corners.size(); ++i) {
      const Site c = contour.corners[i];
      path += (i == 0 ? "M" : "L");
      path += detail::fmt_px(px(c.x - 0.5)) + " " + detail::fmt_px(py(c.y - 0.5)) + " ";
    }
    path += "Z";
    return path;
  };

  std::vector<Contour> contours;
  std::vector<std::vector<int>> boundary_sets;
  for (int id : analysis.outermost()) {
    const CompleteCluster cc = analysis.complete_cluster(id);
    contours.push_back(outer_contour(cc.filling));
    boundary_sets.push_back(analysis.boundary_touching_loops(cc));
  }

  if (spec.show_fillings) {
    svg += "<g fill=\"" + spec.color_fill + "\" stroke=\"none\">\n";
    for (const Contour& contour : contours)
      svg += "<path d=\"" + contour_path(contour) + "\"/>\n";
    svg += "</g>\n";
  }

  if (spec.show_loops) {
    std::vector<bool> is_boundary(loops.size(), false);
    if (spec.split_boundary_touching)
      for (const auto& set : boundary_sets)
        for (int i : set) is_boundary[static_cast<std::size_t>(i)] = true;
    svg += "<g fill=\"none\" stroke-width=\"1\">\n";
    for (std::size_t i = 0; i < loops.size(); ++i) {
      std::string pts;
      for (Site site : loops[i].sites)
        pts += detail::fmt_px(px(site.x)) + "," + detail::fmt_px(py(site.y)) + " ";
      // Close the polyline: vertex count = loop length + 1.
      pts += detail::fmt_px(px(loops[i].sites.front().x)) + "," +
             detail::fmt_px(py(loops[i].sites.front().y));
      svg += "<polyline points=\"" + pts + "\" stroke=\"" +
             (is_boundary[i] ? spec.color_boundary : spec.color_interior) +
             "\"/>\n";
    }
    svg += "</g>\n";
  }

  if (spec.show_contours) {
    svg += "<g fill=\"none\" stroke=\"" + spec.color_contour +
           "\" stroke-width=\"1.5\">\n";
    for (const Contour& contour : contours)
      svg += "<path d=\"" + contour_path(contour) + "\"/>\n";
    svg += "</g>\n";
  }

  if (spec.show_exploration && exploration != nullptr) {
    svg += "<g fill=\"" + spec.color_highlight + "\" fill-opacity=\"0.35\" stroke=\"none\">\n";
    for (Site site : exploration->discovered)
      svg += "<rect x=\"" + detail::fmt_px(px(site.x - 0.5)) + "\" y=\"" +
             detail::fmt_px(py(site.y + 0.5)) + "\" width=\"" + detail::fmt_px(s) +
             "\" height=\"" + detail::fmt_px(s) + "\"/>\n";
    if (exploration->found) {
      svg += "<circle cx=\"" + detail::fmt_px(px(exploration->hit_site.x)) +
             "\" cy=\"" + detail::fmt_px(py(exploration->hit_site.y)) +
             "\" r=\"" + detail::fmt_px(0.6 * s) + "\" fill=\"" +
             spec.color_highlight + "\"/>\n";
    }
    svg += "</g>\n";
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace loopsoup
