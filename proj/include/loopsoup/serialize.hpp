#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "loopsoup/geometry.hpp"
#include "loopsoup/soup.hpp"
#include "loopsoup/stats.hpp"
#include "loopsoup/version.hpp"

namespace loopsoup {

using Json = nlohmann::ordered_json;

inline LatticeDomain parse_domain(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("domain: expected disk:R or box:W,H");
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (kind == "disk") return LatticeDomain::disk(std::stoi(rest));
  if (kind == "box") {
    const auto comma = rest.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("domain: box needs W,H");
    return LatticeDomain::half_plane_box(std::stoi(rest.substr(0, comma)),
                                         std::stoi(rest.substr(comma + 1)));
  }
  throw std::invalid_argument("domain: unknown kind '" + kind + "'");
}

inline Json config_to_json(const SoupConfig& config) {
  Json j;
  j["domain"] = config.domain.describe();
  j["c"] = config.c;
  j["cutoff"] = config.cutoff;
  j["n_max"] = config.effective_n_max();
  j["seed"] = config.seed;
  return j;
}

inline SoupConfig config_from_json(const Json& j) {
  SoupConfig config{parse_domain(j.at("domain").get<std::string>())};
  config.c = j.at("c").get<double>();
  config.cutoff = j.at("cutoff").get<int>();
  config.n_max = j.at("n_max").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  return config;
}

inline Json sample_to_json(const LoopSoupSample& sample, const Json& manifest) {
  Json j;
  j["format"] = "loopsoup-sample";
  j["version"] = kVersion;
  j["manifest"] = manifest;
  j["config"] = config_to_json(sample.config);
  j["truncation_tail_mass"] = sample.truncation_tail_mass;
  Json lengths = Json::array();
  for (const LengthStats& s : sample.per_length)
    if (s.drawn > 0)
      lengths.push_back(Json::array({s.length, s.drawn, s.kept}));
  j["per_length"] = std::move(lengths);
  Json loops = Json::array();
  for (const RwLoop& loop : sample.loops) {
    Json pts = Json::array();
    for (Site s : loop.sites) pts.push_back(Json::array({s.x, s.y}));
    loops.push_back(std::move(pts));
  }
  j["loops"] = std::move(loops);
  return j;
}

inline LoopSoupSample sample_from_json(const Json& j) {
  if (j.at("format").get<std::string>() != "loopsoup-sample")
    throw std::invalid_argument("sample_from_json: not a sample file");
  LoopSoupSample sample;
  sample.config = config_from_json(j.at("config"));
  sample.truncation_tail_mass = j.at("truncation_tail_mass").get<double>();
  for (const auto& row : j.at("per_length")) {
    LengthStats s;
    s.length = row.at(0).get<int>();
    s.drawn = row.at(1).get<long long>();
    s.kept = row.at(2).get<long long>();
    sample.per_length.push_back(s);
  }
  for (const auto& pts : j.at("loops")) {
    RwLoop loop;
    for (const auto& p : pts)
      loop.sites.push_back(Site{p.at(0).get<int>(), p.at(1).get<int>()});
    sample.loops.push_back(std::move(loop));
  }
  return sample;
}

inline Json report_to_json(const EstimatorReport& r) {
  Json j;
  j["estimate"] = r.estimate;
  j["ci_low"] = r.ci_low;
  j["ci_high"] = r.ci_high;
  j["n"] = r.n;
  j["method"] = r.method;
  j["seed_hash"] = r.seed_hash;
  return j;
}

inline Json report_to_json(const GofReport& r) {
  Json j;
  j["statistic"] = r.statistic;
  j["dof"] = r.dof;
  j["p_value"] = r.p_value;
  j["binning"] = r.binning;
  if (r.flagged) j["flag"] = r.flag_reason;
  return j;
}

// Canonical file encoding: 2-space indent plus trailing newline, so that
// identical structures serialize byte-identically.
inline std::string to_file_text(const Json& j) { return j.dump(2) + "\n"; }

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace loopsoup
