// Command-line laboratory around the loop-soup library: sampling, cluster
// phase scans, chord exploration, pinning fits, restriction tests and SVG
// rendering. Every output file embeds the manifest that regenerates it.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loopsoup/cluster.hpp"
#include "loopsoup/exploration.hpp"
#include "loopsoup/parallel.hpp"
#include "loopsoup/restriction.hpp"
#include "loopsoup/serialize.hpp"
#include "loopsoup/soup.hpp"
#include "loopsoup/stats.hpp"
#include "loopsoup/svg.hpp"
#include "loopsoup/version.hpp"

using namespace loopsoup;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct CommonOpts {
  std::string domain = "disk:32";
  double c = 1.0;
  int cutoff = 4;
  int n_max = 0;
  std::uint64_t seed = 0;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--domain", opts.domain, "disk:R or box:W,H");
  cmd->add_option("--c", opts.c, "loop-soup intensity");
  cmd->add_option("--cutoff", opts.cutoff, "minimum loop length (even)");
  cmd->add_option("--nmax", opts.n_max, "maximum loop length (0 = default)");
  cmd->add_option("--seed", opts.seed, "base seed");
  cmd->add_option("--workers", opts.workers, "worker threads (0 = auto)");
}

SoupConfig make_config(const CommonOpts& opts) {
  SoupConfig config{parse_domain(opts.domain)};
  config.c = opts.c;
  config.cutoff = opts.cutoff;
  config.n_max = opts.n_max;
  config.seed = opts.seed;
  config.validate();
  return config;
}

Json base_manifest(const std::string& command, const CommonOpts& opts) {
  Json m;
  m["tool"] = kToolName;
  m["version"] = kVersion;
  m["command"] = command;
  m["domain"] = opts.domain;
  m["c"] = opts.c;
  m["cutoff"] = opts.cutoff;
  m["n_max"] = opts.n_max;
  m["seed"] = opts.seed;
  return m;
}

Site parse_site(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("expected x,y");
  return Site{std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok == "14/15")
      out.push_back(14.0 / 15.0);
    else
      out.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

HullMap parse_hull(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("hull: expected a,eps");
  return hull_map(std::stod(text.substr(0, comma)),
                  std::stod(text.substr(comma + 1)));
}

// ---------------------------------------------------------------------------

int cmd_sample(const CommonOpts& opts, const std::string& out) {
  const SoupConfig config = make_config(opts);
  const LoopSoupSample sample = sample_loop_soup(config);
  Json manifest = base_manifest("sample", opts);
  manifest["out"] = out;
  write_text_file(out, to_file_text(sample_to_json(sample, manifest)));
  return kExitOk;
}

int cmd_render(const std::string& in, const std::string& out,
               const std::string& layers, double scale,
               const std::string& explore_target) {
  const Json j = Json::parse(read_text_file(in));
  const LoopSoupSample sample = sample_from_json(j);
  RenderSpec spec;
  spec.scale = scale;
  if (layers != "all") {
    spec.show_fillings = spec.show_loops = spec.show_contours = false;
    spec.split_boundary_touching = false;
    std::size_t pos = 0;
    while (pos <= layers.size()) {
      const auto comma = layers.find(',', pos);
      const std::string tok = layers.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (tok == "fillings")
        spec.show_fillings = true;
      else if (tok == "loops")
        spec.show_loops = true;
      else if (tok == "contours")
        spec.show_contours = true;
      else if (tok == "boundary")
        spec.show_loops = spec.split_boundary_touching = true;
      else if (tok == "interior")
        spec.show_loops = true;
      else
        throw std::invalid_argument("unknown layer '" + tok + "'");
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  std::optional<ExplorationResult> exploration;
  if (!explore_target.empty()) {
    const Site target = parse_site(explore_target);
    ClusterAnalysis analysis(sample.loops, build_clusters(sample.loops));
    exploration = explore_chord(analysis, sample.config.domain, target);
    spec.show_exploration = true;
  }
  write_text_file(out, render_svg(sample.config.domain, sample.loops, spec,
                                  exploration ? &*exploration : nullptr));
  return kExitOk;
}

int cmd_phase_scan(const CommonOpts& opts, const std::string& cgrid_text,
                   int min_clusters, int diameter_floor, int max_seeds,
                   int permutations, const std::string& out,
                   const std::string& csv) {
  const std::vector<double> cgrid = parse_grid(cgrid_text);
  if (cgrid.empty()) throw std::invalid_argument("empty c grid");
  const LatticeDomain domain = parse_domain(opts.domain);
  const int floor =
      diameter_floor > 0
          ? diameter_floor
          : (domain.kind() == DomainKind::disk ? domain.radius() / 4 : 16);
  const int workers = worker_count(opts.workers);

  Json points = Json::array();
  std::vector<double> fractions;
  std::vector<long long> hits_per_c, n_per_c;
  for (std::size_t ci = 0; ci < cgrid.size(); ++ci) {
    long long hits = 0, total = 0;
    bool insufficient = false;
    int seeds_used = 0;
    // Seed batches in parallel; outcomes land in per-seed slots so the
    // report is independent of the worker count.
    while (total < min_clusters && seeds_used < max_seeds) {
      const int batch =
          std::min(max_seeds - seeds_used, std::max(workers * 2, 8));
      std::vector<std::vector<int>> outcome(static_cast<std::size_t>(batch));
      parallel_for(static_cast<std::size_t>(batch), workers, [&](std::size_t b) {
        SoupConfig config{domain};
        config.c = cgrid[ci];
        config.cutoff = opts.cutoff;
        config.n_max = opts.n_max;
        config.seed = detail::derive_seed(
            opts.seed, 0x70686173ull + ci,
            static_cast<std::uint64_t>(seeds_used) + b);
        const LoopSoupSample sample = sample_loop_soup(config);
        ClusterAnalysis analysis(sample.loops, build_clusters(sample.loops));
        for (int id : analysis.outermost()) {
          const CompleteCluster cc = analysis.complete_cluster(id);
          if (linf_diameter(cc.trace) < floor) continue;
          const std::vector<int> touching = analysis.boundary_touching_loops(cc);
          outcome[b].push_back(
              subset_connected(analysis.loops(), touching) ? 1 : 0);
        }
      });
      for (const auto& slot : outcome)
        for (int v : slot) {
          ++total;
          hits += v;
        }
      seeds_used += batch;
    }
    if (total < min_clusters) insufficient = true;
    Json point;
    point["c"] = cgrid[ci];
    point["clusters"] = total;
    point["seeds"] = seeds_used;
    if (total > 0) {
      const auto wilson = wilson_interval(hits, total, 0.95, opts.seed);
      point["hookup"] = report_to_json(wilson);
      fractions.push_back(wilson.estimate);
    } else {
      fractions.push_back(0.0);
    }
    hits_per_c.push_back(hits);
    n_per_c.push_back(total);
    if (insufficient) point["insufficient_clusters"] = true;
    points.push_back(std::move(point));
  }

  Json report;
  Json manifest = base_manifest("phase-scan", opts);
  manifest["cgrid"] = cgrid;
  manifest["min_clusters"] = min_clusters;
  manifest["diameter_floor"] = floor;
  manifest["max_seeds"] = max_seeds;
  manifest["permutations"] = permutations;
  manifest["out"] = out;
  report["manifest"] = manifest;
  report["points"] = points;
  if (cgrid.size() >= 4) {
    const auto spearman =
        spearman_monotone(cgrid, fractions, permutations, opts.seed);
    report["spearman"] = report_to_json(spearman);
  } else {
    report["spearman_skipped"] = "fewer than 4 grid points";
  }
  if (cgrid.size() >= 2 && n_per_c.front() > 0 && n_per_c.back() > 0) {
    report["endpoint_drop_z"] =
        two_proportion_z(hits_per_c.front(), n_per_c.front(), hits_per_c.back(),
                         n_per_c.back());
  }
  write_text_file(out, to_file_text(report));
  if (!csv.empty()) {
    std::string text = "c,hookup_fraction,ci_low,ci_high,n\n";
    for (std::size_t i = 0; i < cgrid.size(); ++i) {
      const auto& p = points[i];
      if (!p.contains("hookup")) continue;
      char line[160];
      std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%lld\n", cgrid[i],
                    p["hookup"]["estimate"].get<double>(),
                    p["hookup"]["ci_low"].get<double>(),
                    p["hookup"]["ci_high"].get<double>(), n_per_c[i]);
      text += line;
    }
    write_text_file(csv, text);
  }
  return kExitOk;
}

int cmd_explore(const CommonOpts& opts, const std::string& target_text,
                const std::string& out) {
  const SoupConfig config = make_config(opts);
  const Site target = parse_site(target_text);
  const LoopSoupSample sample = sample_loop_soup(config);
  ClusterAnalysis analysis(sample.loops, build_clusters(sample.loops));
  const ExplorationResult result =
      explore_chord(analysis, config.domain, target);

  Json j;
  Json manifest = base_manifest("explore", opts);
  manifest["target"] = Json::array({target.x, target.y});
  manifest["out"] = out;
  j["manifest"] = manifest;
  j["status"] = result.found ? "ok" : "no-surrounding-cluster";
  if (result.found) {
    j["T"] = Json::array({result.hit_site.x, result.hit_site.y});
    j["hit_cluster"] = result.hit_cluster;
  }
  Json discovered = Json::array();
  for (Site s : result.discovered) discovered.push_back(Json::array({s.x, s.y}));
  j["discovered"] = std::move(discovered);
  j["remaining_component_size"] = result.remaining_component.size();
  write_text_file(out, to_file_text(j));
  return kExitOk;
}

int cmd_pinning_fit(const CommonOpts& opts, const std::string& anchor_text,
                    const std::string& pin_text, const std::string& eps_text,
                    int replicas, const std::string& out) {
  const SoupConfig config = make_config(opts);
  const Site anchor = parse_site(anchor_text);
  Site pin{};
  if (pin_text.empty()) {
    pin = config.domain.kind() == DomainKind::disk
              ? Site{config.domain.radius(), 0}
              : Site{0, 0};
  } else {
    pin = parse_site(pin_text);
  }
  const std::vector<double> grid = parse_grid(eps_text);
  const PinningScalingReport report =
      estimate_pinning_scaling(config, anchor, pin, grid, replicas);

  Json j;
  Json manifest = base_manifest("pinning-fit", opts);
  manifest["anchor"] = Json::array({anchor.x, anchor.y});
  manifest["pin"] = Json::array({pin.x, pin.y});
  manifest["eps_grid"] = grid;
  manifest["replicas"] = replicas;
  manifest["out"] = out;
  j["manifest"] = manifest;
  Json us = Json::array();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    Json u = report_to_json(report.u[g]);
    u["eps"] = grid[g];
    us.push_back(std::move(u));
  }
  j["u"] = std::move(us);
  j["monotone_violations"] = report.monotone_violations;
  if (report.degenerate) {
    j["degenerate_fit"] = true;
  } else {
    j["beta"] = report.beta;
    j["beta_stderr"] = report.beta_stderr;
    j["beta_ci"] = Json::array({report.beta_ci_low, report.beta_ci_high});
  }
  write_text_file(out, to_file_text(j));
  return kExitOk;
}

int cmd_restriction_test(const CommonOpts& opts, const std::string& hull1_text,
                         const std::string& hull2_text, double lambda,
                         double scale, int replicas, const std::string& out) {
  const LatticeDomain domain = parse_domain(opts.domain);
  if (domain.kind() != DomainKind::half_plane_box)
    throw std::invalid_argument("restriction-test runs in a box domain");
  std::vector<Site> arc;
  for (int x = 0; x <= domain.width(); ++x) arc.push_back(Site{x, 0});
  const HullMap hull1 = parse_hull(hull1_text);
  const int workers = worker_count(opts.workers);

  Json j;
  Json manifest = base_manifest("restriction-test", opts);
  manifest["hull"] = hull1_text;
  manifest["lambda"] = lambda;
  manifest["scale"] = scale;
  manifest["replicas"] = replicas;
  manifest["out"] = out;
  if (hull2_text.empty()) {
    const RestrictionEstimate est =
        avoidance_probability(domain, arc, lambda, hull1, scale, replicas,
                              opts.seed, std::nullopt, workers);
    j["manifest"] = manifest;
    j["avoidance"] = report_to_json(est.avoidance);
    j["phi_prime_origin"] = est.hull.derivative_at_origin();
    if (est.degenerate) j["degenerate"] = true;
  } else {
    manifest["hull2"] = hull2_text;
    const HullMap hull2 = parse_hull(hull2_text);
    const RatioTestReport report = restriction_ratio_test(
        domain, arc, lambda, hull1, hull2, scale, replicas, opts.seed, workers);
    j["manifest"] = manifest;
    j["avoidance_1"] = report_to_json(report.first.avoidance);
    j["avoidance_2"] = report_to_json(report.second.avoidance);
    j["predicted_ratio"] = report.predicted_ratio;
    if (report.degenerate) {
      j["degenerate"] = true;
    } else {
      j["ratio"] = report.ratio;
      j["stderr"] = report.stderr_ratio;
      j["z"] = report.z;
    }
  }
  write_text_file(out, to_file_text(j));
  return kExitOk;
}

int cmd_cutpoint_contrast(const CommonOpts& opts, const std::string& rgrid_text,
                          double lambda, int replicas, const std::string& out) {
  std::vector<int> rgrid;
  for (double v : parse_grid(rgrid_text)) rgrid.push_back(static_cast<int>(v));
  const CutpointContrastReport report = cutpoint_contrast(
      rgrid, lambda, replicas, opts.seed, 200000, worker_count(opts.workers));

  Json j;
  Json manifest = base_manifest("cutpoint-contrast", opts);
  manifest["rgrid"] = rgrid;
  manifest["lambda"] = lambda;
  manifest["replicas"] = replicas;
  manifest["out"] = out;
  j["manifest"] = manifest;
  Json points = Json::array();
  for (const auto& p : report.points) {
    Json point;
    point["R"] = p.scale;
    point["loop_freq"] = report_to_json(p.loop_freq);
    point["excursion_freq"] = report_to_json(p.excursion_freq);
    point["excursion_arc_freq"] = report_to_json(p.excursion_arc_freq);
    point["loop_conditioning_failures"] = p.loop_conditioning_failures;
    point["excursion_conditioning_failures"] = p.excursion_conditioning_failures;
    points.push_back(std::move(point));
  }
  j["points"] = std::move(points);
  j["z_largest"] = report.z_largest;
  if (report.conditioning_failure) j["conditioning_failure"] = true;
  write_text_file(out, to_file_text(j));
  if (report.conditioning_failure) {
    std::cerr << "cutpoint-contrast: conditioning never succeeded at some scale\n";
    return kExitBudget;
  }
  return kExitOk;
}

int cmd_glued_sample(const CommonOpts& opts, int delta, int glue_x,
                     int max_tries, const std::string& out) {
  const SoupConfig config = make_config(opts);
  const int w0 = glue_x > 0 ? glue_x : config.domain.width() / 2;
  const GluedSample glued = sample_glued_near(config, delta, w0, max_tries);

  Json manifest = base_manifest("glued-sample", opts);
  manifest["delta"] = delta;
  manifest["glue_x"] = w0;
  manifest["max_tries"] = max_tries;
  manifest["out"] = out;
  if (!glued.accepted) {
    Json j;
    j["manifest"] = manifest;
    j["status"] = "tries-exhausted";
    j["tries"] = glued.tries;
    write_text_file(out, to_file_text(j));
    std::cerr << "glued-sample: E_delta not realized within " << glued.tries
              << " tries\n";
    return kExitBudget;
  }
  Json j = sample_to_json(glued.sample, manifest);
  j["glue"] = Json::object();
  j["glue"]["status"] = "accepted";
  j["glue"]["tries"] = glued.tries;
  j["glue"]["acceptance_rate"] = 1.0 / static_cast<double>(glued.tries);
  j["glue"]["sample_seed"] = glued.sample_seed;
  Json members = Json::array();
  for (int i : glued.cluster.member_loops) members.push_back(i);
  j["glue"]["cluster_loops"] = std::move(members);
  write_text_file(out, to_file_text(j));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-walk loop-soup laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CommonOpts opts;
  std::string out = "out.json";
  std::string in;
  std::string target = "0,0";
  std::string anchor = "0,0";
  std::string pin;
  std::string eps_grid = "2,4,8";
  std::string cgrid = "0.2,0.4,0.6,0.8,14/15,1.0";
  std::string rgrid = "32,64,96";
  std::string hull1 = "-2,1";
  std::string hull2;
  std::string layers = "all";
  std::string csv;
  std::string explore_target;
  double lambda = 0.25;
  double scale = 6.0;
  double hull_scale = 8.0;
  int replicas = 1000;
  int min_clusters = 500;
  int diameter_floor = 0;
  int max_seeds = 4000;
  int permutations = 10000;
  int delta = 2;
  int glue_x = 0;
  int max_tries = 10000;

  auto* sample = app.add_subcommand("sample", "draw a loop soup and save it");
  add_common(sample, opts);
  sample->add_option("--out", out, "output JSON path");

  auto* render = app.add_subcommand("render", "render a sample file to SVG");
  render->add_option("--in", in, "sample JSON path")->required();
  render->add_option("--out", out, "output SVG path");
  render->add_option("--layers", layers,
                     "all or list of fillings,loops,contours,boundary,interior");
  render->add_option("--scale", scale, "pixels per lattice unit");
  render->add_option("--explore-target", explore_target,
                     "overlay a chord exploration toward x,y");

  auto* phase = app.add_subcommand("phase-scan",
                                   "hookup fraction of boundary-touching loops");
  add_common(phase, opts);
  phase->add_option("--cgrid", cgrid, "comma-separated intensities");
  phase->add_option("--min-clusters", min_clusters,
                    "macroscopic clusters per grid point");
  phase->add_option("--diameter-floor", diameter_floor,
                    "macroscopic diameter floor (0 = R/4)");
  phase->add_option("--max-seeds", max_seeds, "seed budget per grid point");
  phase->add_option("--permutations", permutations, "Spearman permutations");
  phase->add_option("--out", out, "output JSON path");
  phase->add_option("--csv", csv, "optional CSV of the scan points");

  auto* explore = app.add_subcommand("explore", "chord exploration of a soup");
  add_common(explore, opts);
  explore->add_option("--target", target, "target point x,y");
  explore->add_option("--out", out, "output JSON path");

  auto* pinning = app.add_subcommand("pinning-fit",
                                     "estimate the pinning exponent beta");
  add_common(pinning, opts);
  pinning->add_option("--anchor", anchor, "anchor point x,y");
  pinning->add_option("--pin", pin, "boundary pin point x,y");
  pinning->add_option("--eps", eps_grid, "comma-separated pinning radii");
  pinning->add_option("--replicas", replicas, "samples per grid point");
  pinning->add_option("--out", out, "output JSON path");

  auto* restriction = app.add_subcommand(
      "restriction-test", "avoidance probabilities against hull predictions");
  add_common(restriction, opts);
  restriction->add_option("--lambda", lambda, "excursion intensity per arc site");
  restriction->add_option("--hull", hull1, "half-disk hull a,eps (a < 0)");
  restriction->add_option("--hull2", hull2, "second hull for the ratio test");
  restriction->add_option("--scale", hull_scale, "lattice units per unit length");
  restriction->add_option("--replicas", replicas, "Monte Carlo replicas");
  restriction->add_option("--out", out, "output JSON path");

  auto* cutpoint = app.add_subcommand("cutpoint-contrast",
                                      "loop vs excursion cut-site frequencies");
  add_common(cutpoint, opts);
  cutpoint->add_option("--rgrid", rgrid, "comma-separated domain scales");
  cutpoint->add_option("--lambda", lambda, "excursion intensity per arc site");
  cutpoint->add_option("--replicas", replicas, "replicas per scale");
  cutpoint->add_option("--out", out, "output JSON path");

  auto* glued = app.add_subcommand("glued-sample",
                                   "rejection-sample the E_delta gluing event");
  add_common(glued, opts);
  glued->add_option("--delta", delta, "gluing band half-height");
  glued->add_option("--glue-x", glue_x, "glue abscissa w0 (0 = W/2)");
  glued->add_option("--max-tries", max_tries, "rejection budget");
  glued->add_option("--out", out, "output JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample->parsed()) return cmd_sample(opts, out);
    if (render->parsed())
      return cmd_render(in, out, layers, scale, explore_target);
    if (phase->parsed())
      return cmd_phase_scan(opts, cgrid, min_clusters, diameter_floor,
                            max_seeds, permutations, out, csv);
    if (explore->parsed()) return cmd_explore(opts, target, out);
    if (pinning->parsed())
      return cmd_pinning_fit(opts, anchor, pin, eps_grid, replicas, out);
    if (restriction->parsed())
      return cmd_restriction_test(opts, hull1, hull2, lambda, hull_scale,
                                  replicas, out);
    if (cutpoint->parsed())
      return cmd_cutpoint_contrast(opts, rgrid, lambda, replicas, out);
    if (glued->parsed())
      return cmd_glued_sample(opts, delta, glue_x, max_tries, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
