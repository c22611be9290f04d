#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mpls/error.hpp"
#include "mpls/io.hpp"

namespace mpls::io {
namespace {

using nlohmann::json;

std::string cell(double x) {
  if (!std::isfinite(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? NAN : j.get<double>(); }

}  // namespace

ResultFormat parse_format(const std::string& s) {
  if (s == "csv") return ResultFormat::csv;
  if (s == "json") return ResultFormat::json;
  throw ConfigError("unknown output format '" + s + "' (expected csv or json)");
}

std::string results_csv(const SweepResult& r) {
  std::string out =
      "axis1,axis2,mean_r2x,std_r2x,mean_r2y,std_r2y,mean_stability,std_stability,theory_r2x,theory_r2y,theta_crit,"
      "trials_effective\n";
  for (const PointRecord& p : r.points) {
    out += cell(p.axis1) + "," + (r.axis2_param ? cell(p.axis2) : "") + "," + cell(p.r2_x.mean) + "," +
           cell(p.r2_x.std) + "," + cell(p.r2_y.mean) + "," + cell(p.r2_y.std) + "," + cell(p.stability.mean) + "," +
           cell(p.stability.std) + "," + cell(p.theory_r2_x) + "," + cell(p.theory_r2_y) + "," + cell(p.theta_crit) +
           "," + std::to_string(p.trials_effective) + "\n";
  }
  return out;
}

std::string results_json(const SweepResult& r, const RunMetadata& meta) {
  json doc;
  doc["schema_version"] = kResultSchemaVersion;
  doc["version"] = meta.version;
  doc["preset"] = meta.preset;
  doc["scale"] = meta.scale;
  doc["name"] = r.name;
  doc["seed"] = r.seed;
  doc["axis1_param"] = to_string(r.axis1_param);
  doc["axis2_param"] = r.axis2_param ? json(to_string(*r.axis2_param)) : json(nullptr);
  doc["correlation"] = number_or_null(r.correlation);
  doc["correlation_supercritical"] = number_or_null(r.correlation_supercritical);
  doc["total_runtime"] = r.total_runtime;
  json points = json::array();
  for (const PointRecord& p : r.points) {
    json e;
    e["axis1"] = number_or_null(p.axis1);
    e["axis2"] = number_or_null(p.axis2);
    e["theta"] = number_or_null(p.theta);
    e["rho"] = number_or_null(p.rho);
    e["mean_r2x"] = number_or_null(p.r2_x.mean);
    e["std_r2x"] = number_or_null(p.r2_x.std);
    e["mean_r2y"] = number_or_null(p.r2_y.mean);
    e["std_r2y"] = number_or_null(p.r2_y.std);
    e["mean_stability"] = number_or_null(p.stability.mean);
    e["std_stability"] = number_or_null(p.stability.std);
    e["theory_r2x"] = number_or_null(p.theory_r2_x);
    e["theory_r2y"] = number_or_null(p.theory_r2_y);
    e["theta_crit"] = number_or_null(p.theta_crit);
    e["trials"] = p.trials;
    e["trials_effective"] = p.trials_effective;
    e["valid"] = p.valid;
    e["seeds_digest"] = p.seeds_digest;
    e["mean_runtime"] = number_or_null(p.mean_runtime);
    e["errors"] = p.errors;
    points.push_back(std::move(e));
  }
  doc["points"] = std::move(points);
  return doc.dump(2) + "\n";
}

SweepResult parse_results_json(const std::string& text) {
  SweepResult r;
  try {
    const json doc = json::parse(text);
    if (doc.at("schema_version").get<int>() > kResultSchemaVersion) {
      throw IoError("results: schema version " + std::to_string(doc.at("schema_version").get<int>()) +
                    " is newer than supported " + std::to_string(kResultSchemaVersion));
    }
    r.name = doc.at("name").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.axis1_param = parse_axis_param(doc.at("axis1_param").get<std::string>());
    if (!doc.at("axis2_param").is_null()) r.axis2_param = parse_axis_param(doc.at("axis2_param").get<std::string>());
    r.correlation = number_from(doc.at("correlation"));
    r.correlation_supercritical = number_from(doc.at("correlation_supercritical"));
    r.total_runtime = doc.at("total_runtime").get<double>();
    for (const json& e : doc.at("points")) {
      PointRecord p;
      p.axis1 = number_from(e.at("axis1"));
      p.axis2 = number_from(e.at("axis2"));
      p.theta = number_from(e.at("theta"));
      p.rho = number_from(e.at("rho"));
      p.r2_x = {number_from(e.at("mean_r2x")), number_from(e.at("std_r2x"))};
      p.r2_y = {number_from(e.at("mean_r2y")), number_from(e.at("std_r2y"))};
      p.stability = {number_from(e.at("mean_stability")), number_from(e.at("std_stability"))};
      p.theory_r2_x = number_from(e.at("theory_r2x"));
      p.theory_r2_y = number_from(e.at("theory_r2y"));
      p.theta_crit = number_from(e.at("theta_crit"));
      p.trials = e.at("trials").get<int>();
      p.trials_effective = e.at("trials_effective").get<int>();
      p.valid = e.at("valid").get<bool>();
      p.seeds_digest = e.at("seeds_digest").get<std::uint64_t>();
      p.mean_runtime = number_from(e.at("mean_runtime"));
      p.errors = e.at("errors").get<std::vector<std::string>>();
      r.points.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("results: malformed JSON: ") + e.what());
  }
  return r;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit_results(const SweepResult& result, ResultFormat format, const std::filesystem::path& path,
                  const RunMetadata& meta) {
  write_file_atomic(path, format == ResultFormat::csv ? results_csv(result) : results_json(result, meta));
}

}  // namespace mpls::io
