#include "rbflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "rbflow/monitor.hpp"

namespace rbflow {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) out += (k ? "," : "") + items[k];
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "family", "n", "rho", "c", "resolution", "preset", "amplitude", "seed", "s0", "su2_a",
      "su2_b", "su2_c", "dt", "dt_policy", "t_max", "blowup_threshold", "sample_interval",
      "min_dt", "eigenpairs", "lemma32", "fd", "tol", "max_iter", "a", "audits", "stride",
      "divergence_bound", "out", "formats"};
  return keys;
}

struct Entry {
  std::string value;
  int line;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  std::vector<ConfigIssue> issues;

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  int line(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }

  std::optional<double> real(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& e = entries_.at(key);
    double x = 0.0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    auto [ptr, ec] = std::from_chars(begin, end, x);
    if (ec != std::errc() || ptr != end || !std::isfinite(x)) {
      issues.push_back({e.line, key + ": expected a number, got '" + e.value + "'"});
      return std::nullopt;
    }
    return x;
  }

  std::optional<long long> integer(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& e = entries_.at(key);
    long long x = 0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    auto [ptr, ec] = std::from_chars(begin, end, x);
    if (ec != std::errc() || ptr != end) {
      issues.push_back({e.line, key + ": expected an integer, got '" + e.value + "'"});
      return std::nullopt;
    }
    return x;
  }

  std::optional<bool> boolean(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& e = entries_.at(key);
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    issues.push_back({e.line, key + ": expected true/false, got '" + e.value + "'"});
    return std::nullopt;
  }

  template <typename Enum>
  std::optional<Enum> choice(const std::string& key, const std::map<std::string, Enum>& options) {
    if (!has(key)) return std::nullopt;
    const auto& e = entries_.at(key);
    if (auto it = options.find(e.value); it != options.end()) return it->second;
    std::string allowed;
    for (const auto& [name, _] : options) allowed += (allowed.empty() ? "" : ", ") + name;
    issues.push_back({e.line, key + ": '" + e.value + "' is not one of " + allowed});
    return std::nullopt;
  }

  std::optional<std::string> text(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return entries_.at(key).value;
  }

 private:
  std::map<std::string, Entry> entries_;
};

const std::map<std::string, FamilyKind> kFamilies = {
    {"einstein_sphere", FamilyKind::EinsteinSphere},
    {"conformal_torus", FamilyKind::ConformalTorus2D},
    {"conformal_sphere", FamilyKind::ConformalSphere2D},
    {"su2", FamilyKind::SU2Homogeneous}};

const std::map<std::string, Preset> kPresets = {{"zero", Preset::Zero},
                                                {"constant", Preset::Constant},
                                                {"cos_x", Preset::CosX},
                                                {"cos_xy", Preset::CosXY},
                                                {"random_band", Preset::RandomBand}};

const std::map<std::string, DtPolicy> kPolicies = {{"fixed", DtPolicy::Fixed},
                                                   {"cfl_adaptive", DtPolicy::CflAdaptive}};

std::string policy_name(DtPolicy p) { return p == DtPolicy::Fixed ? "fixed" : "cfl_adaptive"; }

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ConfigParseError::ConfigParseError(std::vector<ConfigIssue> issues)
    : ConfigError([&] {
        std::ostringstream msg;
        for (std::size_t k = 0; k < issues.size(); ++k) {
          if (k) msg << "\n";
          if (issues[k].line > 0) msg << "line " << issues[k].line << ": ";
          msg << issues[k].message;
        }
        return msg.str();
      }()),
      issues_(std::move(issues)) {}

RunConfig parse_config(const std::string& text) {
  std::vector<ConfigIssue> issues;
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back({lineno, "expected 'key = value'"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().count(key)) {
      issues.push_back({lineno, "unknown key '" + key + "'"});
      continue;
    }
    if (value.empty()) {
      issues.push_back({lineno, key + ": missing value"});
      continue;
    }
    if (entries.count(key)) {
      issues.push_back({lineno, "duplicate key '" + key + "' (first on line " +
                                    std::to_string(entries[key].line) + ")"});
      continue;
    }
    entries[key] = {value, lineno};
  }

  Reader r(std::move(entries));
  for (const char* required : {"family", "n", "rho"}) {
    if (!r.has(required)) issues.push_back({0, std::string("missing required key '") + required + "'"});
  }

  RunConfig cfg;
  const auto family = r.choice("family", kFamilies);
  if (family) cfg.family.kind = *family;
  if (auto n = r.integer("n")) cfg.family.n = static_cast<int>(*n);
  cfg.flow.n = cfg.family.n;
  if (auto rho = r.real("rho")) cfg.flow.rho = *rho;
  if (auto c = r.real("c")) cfg.flow.c = *c;

  const FamilyKind kind = cfg.family.kind;
  const bool conformal = is_conformal(kind);
  cfg.family.resolution = kind == FamilyKind::ConformalTorus2D ? 32 : kind == FamilyKind::ConformalSphere2D ? 3 : 0;
  if (auto res = r.integer("resolution")) cfg.family.resolution = static_cast<int>(*res);
  if (auto p = r.choice("preset", kPresets)) cfg.family.initial.preset = *p;
  if (auto A = r.real("amplitude")) cfg.family.initial.amplitude = *A;
  if (auto seed = r.integer("seed")) {
    if (*seed < 0) r.issues.push_back({r.line("seed"), "seed must be >= 0"});
    cfg.family.seed = static_cast<std::uint64_t>(std::max<long long>(0, *seed));
  }
  if (auto s0 = r.real("s0")) cfg.family.initial.s0 = *s0;
  if (auto x = r.real("su2_a")) cfg.family.initial.triple[0] = *x;
  if (auto x = r.real("su2_b")) cfg.family.initial.triple[1] = *x;
  if (auto x = r.real("su2_c")) cfg.family.initial.triple[2] = *x;

  cfg.flow.dt_policy = conformal ? DtPolicy::CflAdaptive : DtPolicy::Fixed;
  if (auto dt = r.real("dt")) cfg.flow.dt_init = *dt;
  if (auto p = r.choice("dt_policy", kPolicies)) cfg.flow.dt_policy = *p;
  if (auto x = r.real("t_max")) cfg.flow.t_max = *x;
  if (auto x = r.real("blowup_threshold")) cfg.flow.blowup_threshold = *x;
  if (auto x = r.real("sample_interval")) cfg.flow.sample_interval = *x;
  if (auto x = r.real("min_dt")) cfg.flow.min_dt = *x;

  if (auto list = r.text("eigenpairs")) {
    cfg.lambda0 = cfg.lambda1 = false;
    for (const auto& item : split_list(*list)) {
      if (item == "lambda0") {
        cfg.lambda0 = true;
      } else if (item == "lambda1") {
        cfg.lambda1 = true;
      } else if (item != "none") {
        r.issues.push_back({r.line("eigenpairs"), "eigenpairs: unknown entry '" + item + "'"});
      }
    }
  }
  if (kind == FamilyKind::SU2Homogeneous) cfg.lambda0 = cfg.lambda1 = false;
  if (auto b = r.boolean("lemma32")) cfg.lemma32 = *b;
  if (auto b = r.boolean("fd")) cfg.finite_differences = *b;
  if (auto x = r.real("tol")) cfg.solver.tol = *x;
  if (auto x = r.integer("max_iter")) cfg.solver.max_iter = static_cast<int>(*x);
  if (auto x = r.real("a")) cfg.a = *x;
  if (auto x = r.integer("stride")) cfg.stride = static_cast<int>(*x);
  if (auto x = r.real("divergence_bound")) cfg.divergence_bound = *x;
  if (auto x = r.text("out")) cfg.out_dir = *x;

  cfg.audits = audit_names();
  if (auto list = r.text("audits")) {
    const auto items = split_list(*list);
    if (!(items.size() == 1 && items[0] == "all")) {
      cfg.audits.clear();
      const auto& names = audit_names();
      for (const auto& item : items) {
        if (std::find(names.begin(), names.end(), item) == names.end()) {
          r.issues.push_back({r.line("audits"), "audits: unknown audit '" + item + "'"});
        } else {
          cfg.audits.push_back(item);
        }
      }
    }
  }
  if (auto list = r.text("formats")) {
    cfg.formats.clear();
    for (const auto& item : split_list(*list)) {
      if (item == "csv" || item == "json" || item == "plot") {
        cfg.formats.push_back(item);
      } else {
        r.issues.push_back({r.line("formats"), "formats: unknown format '" + item + "'"});
      }
    }
  }

  // Invariants, each reported against the line of the key it concerns.
  const int n = cfg.family.n;
  if (family && r.has("n")) {
    if (kind == FamilyKind::SU2Homogeneous && n != 3) r.issues.push_back({r.line("n"), "su2 requires n = 3"});
    if (conformal && n != 2) r.issues.push_back({r.line("n"), "conformal families require n = 2"});
    if (kind == FamilyKind::EinsteinSphere && n < 2) r.issues.push_back({r.line("n"), "einstein_sphere requires n >= 2"});
  }
  if (family && r.has("n") && r.has("rho") && n >= 2) {
    const double limit = rho_limit(n);
    if (conformal && !(cfg.flow.rho < limit)) {
      r.issues.push_back({r.line("rho"), "rho must be < 1/(2(n-1)) = " + format_number(limit) + " for PDE families"});
    } else if (!conformal && !(cfg.flow.rho <= limit)) {
      r.issues.push_back({r.line("rho"), "rho must be <= 1/(2(n-1)) = " + format_number(limit)});
    }
  }
  if (kind == FamilyKind::ConformalTorus2D && cfg.family.resolution < 8) {
    r.issues.push_back({r.line("resolution"), "torus grid resolution must be >= 8"});
  }
  if (kind == FamilyKind::ConformalSphere2D && (cfg.family.resolution < 2 || cfg.family.resolution > 8)) {
    r.issues.push_back({r.line("resolution"), "icosphere subdivision must be in [2, 8]"});
  }
  if (!(cfg.family.initial.s0 > 0.0)) r.issues.push_back({r.line("s0"), "s0 must be > 0"});
  for (const char* key : {"su2_a", "su2_b", "su2_c"}) {
    if (auto x = r.real(key); x && !(*x > 0.0)) r.issues.push_back({r.line(key), std::string(key) + " must be > 0"});
  }
  if (!(cfg.flow.dt_init > 0.0)) r.issues.push_back({r.line("dt"), "dt must be > 0"});
  if (!(cfg.flow.t_max > 0.0)) r.issues.push_back({r.line("t_max"), "t_max must be > 0"});
  if (!(cfg.flow.blowup_threshold > 0.0)) r.issues.push_back({r.line("blowup_threshold"), "blowup_threshold must be > 0"});
  if (!(cfg.flow.sample_interval >= 0.0)) r.issues.push_back({r.line("sample_interval"), "sample_interval must be >= 0"});
  if (!(cfg.flow.min_dt > 0.0)) r.issues.push_back({r.line("min_dt"), "min_dt must be > 0"});
  if (!(cfg.solver.tol > 0.0)) r.issues.push_back({r.line("tol"), "tol must be > 0"});
  if (cfg.solver.max_iter < 1) r.issues.push_back({r.line("max_iter"), "max_iter must be >= 1"});
  if (cfg.stride < 1) r.issues.push_back({r.line("stride"), "stride must be >= 1"});
  if (cfg.a < 0.0) r.issues.push_back({r.line("a"), "a must be >= 0"});

  issues.insert(issues.end(), r.issues.begin(), r.issues.end());
  if (!issues.empty()) {
    std::stable_sort(issues.begin(), issues.end(),
                     [](const ConfigIssue& x, const ConfigIssue& y) { return x.line < y.line; });
    throw ConfigParseError(std::move(issues));
  }
  return cfg;
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream out;
  const auto& f = cfg.family;
  out << "family = " << to_string(f.kind) << "\n";
  out << "n = " << f.n << "\n";
  out << "rho = " << format_number(cfg.flow.rho) << "\n";
  out << "c = " << format_number(cfg.flow.c) << "\n";
  out << "resolution = " << f.resolution << "\n";
  out << "preset = " << to_string(f.initial.preset) << "\n";
  out << "amplitude = " << format_number(f.initial.amplitude) << "\n";
  out << "seed = " << f.seed << "\n";
  out << "s0 = " << format_number(f.initial.s0) << "\n";
  out << "su2_a = " << format_number(f.initial.triple[0]) << "\n";
  out << "su2_b = " << format_number(f.initial.triple[1]) << "\n";
  out << "su2_c = " << format_number(f.initial.triple[2]) << "\n";
  out << "dt = " << format_number(cfg.flow.dt_init) << "\n";
  out << "dt_policy = " << policy_name(cfg.flow.dt_policy) << "\n";
  out << "t_max = " << format_number(cfg.flow.t_max) << "\n";
  out << "blowup_threshold = " << format_number(cfg.flow.blowup_threshold) << "\n";
  out << "sample_interval = " << format_number(cfg.flow.sample_interval) << "\n";
  out << "min_dt = " << format_number(cfg.flow.min_dt) << "\n";
  std::vector<std::string> eig;
  if (cfg.lambda0) eig.push_back("lambda0");
  if (cfg.lambda1) eig.push_back("lambda1");
  out << "eigenpairs = " << (eig.empty() ? std::string("none") : join(eig)) << "\n";
  out << "lemma32 = " << (cfg.lemma32 ? "true" : "false") << "\n";
  out << "fd = " << (cfg.finite_differences ? "true" : "false") << "\n";
  out << "tol = " << format_number(cfg.solver.tol) << "\n";
  out << "max_iter = " << cfg.solver.max_iter << "\n";
  out << "a = " << format_number(cfg.a) << "\n";
  if (!cfg.audits.empty()) out << "audits = " << join(cfg.audits) << "\n";
  out << "stride = " << cfg.stride << "\n";
  out << "divergence_bound = " << format_number(cfg.divergence_bound) << "\n";
  if (!cfg.out_dir.empty()) out << "out = " << cfg.out_dir << "\n";
  if (!cfg.formats.empty()) out << "formats = " << join(cfg.formats) << "\n";
  return out.str();
}

std::string override_key(const std::string& text, const std::string& key, const std::string& value) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string raw;
  bool replaced = false;
  while (std::getline(in, raw)) {
    const auto hash = raw.find('#');
    const std::string body = hash == std::string::npos ? raw : raw.substr(0, hash);
    const auto eq = body.find('=');
    if (eq != std::string::npos && trim(body.substr(0, eq)) == key) {
      out << key << " = " << value << "\n";
      replaced = true;
    } else {
      out << raw << "\n";
    }
  }
  if (!replaced) out << key << " = " << value << "\n";
  return out.str();
}

}  // namespace rbflow
