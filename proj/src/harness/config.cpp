#include "usc/harness/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "usc/errors.hpp"

namespace usc::harness {
namespace {

struct RawValue {
  std::string text;
  int line = 0;
};

using Section = std::map<std::string, RawValue>;

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string StripComment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

class FieldReader {
 public:
  FieldReader(const std::string& source, const std::string& section, const std::string& key, const RawValue& v)
      : source_(source), section_(section), key_(key), v_(v) {}

  [[noreturn]] void Fail(const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(v_.line) + ": field '" + section_ + "." + key_ + "': " + msg);
  }

  double Number() const { return ParseNumber(v_.text); }

  long Integer() const {
    const std::string& t = v_.text;
    if (t.rfind("2^", 0) == 0) {
      const long k = ParseInteger(t.substr(2));
      if (k < 0 || k > 62) Fail("exponent out of range");
      return 1L << k;
    }
    return ParseInteger(t);
  }

  std::uint64_t Unsigned() const {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(v_.text.c_str(), &end, 10);
    if (v_.text.empty() || *end != '\0' || errno != 0 || v_.text[0] == '-') Fail("expected an unsigned integer");
    return v;
  }

  bool Bool() const {
    if (v_.text == "true") return true;
    if (v_.text == "false") return false;
    Fail("expected true or false");
  }

  std::string String() const { return Unquote(v_.text); }

  std::vector<std::string> StringList() const {
    std::vector<std::string> out;
    for (const std::string& item : Items()) out.push_back(Unquote(item));
    return out;
  }

  std::vector<double> NumberList() const {
    std::vector<double> out;
    for (const std::string& item : Items()) out.push_back(ParseNumber(item));
    return out;
  }

 private:
  double ParseNumber(const std::string& t) const {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0' || errno != 0) Fail("expected a number, got '" + t + "'");
    return v;
  }

  long ParseInteger(const std::string& t) const {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || *end != '\0' || errno != 0) Fail("expected an integer, got '" + t + "'");
    return v;
  }

  std::string Unquote(const std::string& t) const {
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') return t.substr(1, t.size() - 2);
    if (t.find('"') != std::string::npos) Fail("unbalanced quotes");
    return t;
  }

  std::vector<std::string> Items() const {
    const std::string& t = v_.text;
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') Fail("expected a list [a, b, ...]");
    std::vector<std::string> out;
    const std::string body = Trim(t.substr(1, t.size() - 2));
    if (body.empty()) return out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = Trim(item);
      if (item.empty()) Fail("empty list element");
      out.push_back(item);
    }
    return out;
  }

  const std::string& source_;
  const std::string& section_;
  const std::string& key_;
  const RawValue& v_;
};

}  // namespace

FeasibleSet DomainSpec::Build(int dim) const {
  if (dim < 1) throw ConfigError("dim must be ≥ 1");
  auto to_vec = [&](const std::vector<double>& v, const char* what) {
    if (static_cast<int>(v.size()) != dim) {
      throw ConfigError(std::string("domain.") + what + " has " + std::to_string(v.size()) +
                        " entries, expected dim = " + std::to_string(dim));
    }
    return Vector(Eigen::Map<const Vector>(v.data(), dim));
  };
  try {
    if (kind == "ball") {
      const Vector c = center.empty() ? Vector(Vector::Zero(dim)) : to_vec(center, "center");
      return FeasibleSet::MakeBall(c, radius);
    }
    if (kind == "box") {
      std::vector<double> lo = lower, hi = upper;
      if (lo.empty()) lo.assign(static_cast<size_t>(dim), -1.0);
      if (hi.empty()) hi.assign(static_cast<size_t>(dim), 1.0);
      return FeasibleSet::MakeBox(to_vec(lo, "lower"), to_vec(hi, "upper"));
    }
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
  throw ConfigError("domain.kind must be ball or box, got '" + kind + "'");
}

ExperimentConfig ParseConfig(const std::string& text, const std::string& source) {
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = Trim(StripComment(raw));
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[' && line.back() == ']') {
      current = Trim(line.substr(1, line.size() - 2));
      if (current.empty()) throw ConfigError(where + "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + line + "'");
    if (current.empty()) throw ConfigError(where + "key outside of any [section]");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (value.empty()) throw ConfigError(where + "field '" + current + "." + key + "': missing value");
    if (!sections[current].emplace(key, RawValue{value, line_no}).second) {
      throw ConfigError(where + "field '" + current + "." + key + "' set twice");
    }
  }

  ExperimentConfig cfg;
  bool dim_set = false;
  for (const auto& [section, entries] : sections) {
    for (const auto& [key, value] : entries) {
      const FieldReader f(source, section, key, value);
      if (section == "stream") {
        if (key == "class") {
          try {
            cfg.stream.stream_class = ParseStreamClass(f.String());
          } catch (const ConfigError& e) {
            f.Fail(e.what());
          }
        } else if (key == "dim") {
          cfg.stream.dim = static_cast<int>(f.Integer());
          dim_set = true;
        } else if (key == "horizon") {
          cfg.stream.horizon = f.Integer();
        } else if (key == "seed") {
          cfg.stream.seed = f.Unsigned();
        } else if (key == "parameter") {
          cfg.stream.true_parameter = f.Number();
        } else if (key == "grad_bound") {
          cfg.stream.grad_bound = f.Number();
        } else if (key == "huber_delta") {
          cfg.stream.huber_delta = f.Number();
        } else if (key == "realizable") {
          cfg.stream.realizable = f.Bool();
        } else if (key == "label_offset") {
          cfg.stream.label_offset = f.Number();
        } else {
          f.Fail("unknown key");
        }
      } else if (section == "domain") {
        if (key == "kind") {
          cfg.domain.kind = f.String();
        } else if (key == "center") {
          cfg.domain.center = f.NumberList();
        } else if (key == "radius") {
          cfg.domain.radius = f.Number();
        } else if (key == "lower") {
          cfg.domain.lower = f.NumberList();
        } else if (key == "upper") {
          cfg.domain.upper = f.NumberList();
        } else {
          f.Fail("unknown key");
        }
      } else if (section == "pool") {
        if (key == "strong") {
          cfg.pool.strong = f.StringList();
        } else if (key == "expconcave") {
          cfg.pool.expconcave = f.StringList();
        } else if (key == "convex") {
          cfg.pool.convex = f.StringList();
        } else if (key == "sogd_delta") {
          cfg.sogd_delta = f.Number();
        } else {
          f.Fail("unknown key");
        }
      } else if (section == "baselines") {
        if (key != "experts") f.Fail("unknown key");
        for (const std::string& item : f.StringList()) {
          BaselineSpec b;
          const auto colon = item.find(':');
          b.name = item.substr(0, colon);
          if (colon != std::string::npos) {
            const RawValue pv{item.substr(colon + 1), value.line};
            b.parameter = FieldReader(source, section, key, pv).Number();
          }
          cfg.baselines.push_back(b);
        }
      } else if (section == "comparator") {
        if (key == "pgd_iters") {
          cfg.comparator.pgd_iters = static_cast<int>(f.Integer());
        } else if (key == "starts") {
          cfg.comparator.starts = static_cast<int>(f.Integer());
        } else if (key == "grid_resolution") {
          cfg.comparator.grid_resolution = f.Number();
        } else {
          f.Fail("unknown key");
        }
      } else if (section == "output") {
        if (key != "dir") f.Fail("unknown key");
        cfg.output_dir = f.String();
      } else {
        throw ConfigError(source + ":" + std::to_string(value.line) + ": unknown section [" + section + "]");
      }
    }
  }
  if (!dim_set) {
    if (!cfg.domain.center.empty()) cfg.stream.dim = static_cast<int>(cfg.domain.center.size());
    if (!cfg.domain.lower.empty()) cfg.stream.dim = static_cast<int>(cfg.domain.lower.size());
  }
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), path);
}

void ValidateConfig(const ExperimentConfig& cfg, const ExpertRegistry& registry) {
  if (cfg.stream.horizon < 1) throw ConfigError("horizon must be ≥ 1");
  if (cfg.stream.dim < 1) throw ConfigError("dim must be ≥ 1");
  if (!(cfg.stream.grad_bound > 0.0)) throw ConfigError("grad_bound must be positive");
  if (cfg.stream.stream_class != StreamClass::kConvex) {
    const double lo = 1.0 / static_cast<double>(cfg.stream.horizon);
    if (!(cfg.stream.true_parameter >= lo && cfg.stream.true_parameter <= 1.0)) {
      throw ConfigError("stream.parameter must lie in [1/T, 1]");
    }
  }
  if (cfg.comparator.pgd_iters < 1) throw ConfigError("comparator.pgd_iters must be ≥ 1");
  if (cfg.comparator.starts < 1) throw ConfigError("comparator.starts must be ≥ 1");
  if (cfg.comparator.grid_resolution < 0.0) throw ConfigError("comparator.grid_resolution must be ≥ 0");
  if (!(cfg.sogd_delta > 0.0)) throw ConfigError("pool.sogd_delta must be positive");
  for (const auto* list : {&cfg.pool.strong, &cfg.pool.expconcave, &cfg.pool.convex}) {
    for (const std::string& name : *list) registry.Get(name);
  }
  if (cfg.pool.strong.empty() && cfg.pool.expconcave.empty() && cfg.pool.convex.empty()) {
    throw ConfigError("pool: all algorithm lists are empty");
  }
  for (const BaselineSpec& b : cfg.baselines) registry.Get(b.name);
  cfg.domain.Build(cfg.stream.dim);
}

}  // namespace usc::harness
