#include "rbflow/output.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rbflow/error.hpp"

namespace rbflow {

namespace {

using Json = nlohmann::ordered_json;

void cell(std::ostringstream& out, const std::optional<double>& v) {
  out << ',';
  if (v) out << format_number(*v);
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json threshold_json(const ThresholdCheck& c) { return {{"holds", c.holds}, {"threshold", c.threshold}}; }

Json config_json(const RunConfig& config) {
  Json out = Json::object();
  std::istringstream in(render_config(config));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

Json hypotheses_json(const HypothesisReport& h) {
  Json out = {{"n", h.n},
              {"rho", h.rho},
              {"c", h.c},
              {"a", h.a},
              {"prop_admissibility", h.prop_admissibility},
              {"rho_within_limit", h.rho_within_limit},
              {"thm12_case1", threshold_json(h.thm12_case1)},
              {"thm12_case2", threshold_json(h.thm12_case2)},
              {"nonneg_curvature_operator", h.nonneg_curvature_operator},
              {"nonneg_ricci", h.nonneg_ricci},
              {"positive_ricci", h.positive_ricci},
              {"thm13", {{"holds", h.thm13}, {"a", h.a}, {"deficit", h.thm13_deficit}, {"R_bound", h.thm13_R_bound}}},
              {"thm14", h.thm14},
              {"R0_min", h.R0_min},
              {"R0_max", h.R0_max},
              {"pinch0", optional_number(h.pinch0)}};
  if (h.rescale) {
    out["rescale"] = {{"eps_max_R0", h.rescale->eps_max_R0},
                      {"T_prime", h.rescale->T_prime},
                      {"alpha", h.rescale->alpha}};
  } else {
    out["rescale"] = nullptr;
  }
  out["notes"] = h.notes;
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::string series_csv(const std::vector<MonitorRecord>& records) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << format_number(r.t);
    cell(out, r.lambda0);
    cell(out, r.lambda1);
    cell(out, r.Q);
    cell(out, r.rhs31);
    cell(out, r.rhs32);
    cell(out, r.rhs41);
    cell(out, r.fd0);
    cell(out, r.fd1);
    cell(out, r.R_min);
    cell(out, r.R_max);
    cell(out, r.sigma);
    cell(out, r.pinch);
    out << '\n';
  }
  return out.str();
}

std::string summary_json(const RunSummary& s) {
  Json audits = Json::array();
  for (const auto& v : s.audits.verdicts) {
    audits.push_back({{"name", v.name}, {"verdict", to_string(v.verdict)}, {"detail", v.detail}});
  }
  Json extrema = Json::object();
  for (const auto& [name, e] : s.extrema) extrema[name] = {{"min", e.min}, {"max", e.max}};

  Json out = {{"config", config_json(s.config)},
              {"t_stop", s.t_stop},
              {"stop_reason", to_string(s.stop_reason)},
              {"hypotheses", hypotheses_json(s.hypotheses)},
              {"audits", audits},
              {"extrema", extrema},
              {"wall_seconds", s.wall_seconds},
              {"exit_code", s.exit_code},
              {"error", s.error},
              {"records", s.records.size()}};
  return out.dump(2) + "\n";
}

std::string plot_script(const std::string& csv_name) {
  std::ostringstream out;
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set xlabel 't'\n"
      << "set grid\n"
      << "plot '" << csv_name << "' using 1:2 with linespoints, \\\n"
      << "     '' using 1:3 with linespoints, \\\n"
      << "     '' using 1:4 with linespoints\n";
  return out.str();
}

std::filesystem::path emit_series(const RunSummary& summary, const std::string& format,
                                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  if (format == "json") {
    const auto path = dir / "summary.json";
    write_file(path, summary_json(summary));
    return path;
  }
  if (summary.records.empty()) throw Error("emit_series: no records to write");
  if (format == "csv") {
    const auto path = dir / "series.csv";
    write_file(path, series_csv(summary.records));
    return path;
  }
  if (format == "plot") {
    const auto path = dir / "series.gp";
    write_file(path, plot_script("series.csv"));
    return path;
  }
  throw ConfigError("unknown output format '" + format + "'");
}

}  // namespace rbflow
