#include "usc/harness/trace.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "usc/errors.hpp"

namespace usc::harness {
namespace fs = std::filesystem;

double RunTrace::UscCumulativeLoss() const {
  double s = 0.0;
  for (double v : usc_loss) s += v;
  return s;
}

double RunTrace::UscRegret() const { return UscCumulativeLoss() - comparator_loss; }

double RunTrace::ExpertCumulativeLoss(size_t i) const {
  double s = 0.0;
  for (const auto& row : expert_loss) s += row.at(i);
  return s;
}

double RunTrace::ExpertRegret(size_t i) const { return ExpertCumulativeLoss(i) - comparator_loss; }

double RunTrace::SumSquaredGradients() const {
  double s = 0.0;
  for (double g : grad_norm) s += g * g;
  return s;
}

double RunTrace::GradientVariation() const {
  double s = 0.0;
  for (double v : variation_term) s += v;
  return s;
}

std::vector<double> RunTrace::UscCumulativeRegretCurve() const {
  std::vector<double> out(usc_loss.size());
  double s = 0.0;
  for (size_t t = 0; t < usc_loss.size(); ++t) {
    s += usc_loss[t] - comparator_round_loss[t];
    out[t] = s;
  }
  return out;
}

double WeightEntropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

size_t TopExpert(const std::vector<double>& p) {
  size_t best = 0;
  for (size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return best;
}

std::string FormatNumber(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

namespace {

std::ofstream OpenOut(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  return out;
}

std::vector<std::vector<std::string>> ReadCsv(const fs::path& p, std::vector<std::string>* header) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read '" + p.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      if (header) *header = cells;
      first = false;
      continue;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

double ToDouble(const std::string& s, const fs::path& file) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ConfigError(file.string() + ": malformed number '" + s + "'");
  return v;
}

}  // namespace

void WriteTrace(const std::string& dir, const RunTrace& tr) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  const size_t n = tr.num_experts();
  const size_t rounds = tr.usc_loss.size();

  {
    auto out = OpenOut(root / "trace.csv");
    out << "t,usc_loss,usc_cumregret,grad_norm,weight_entropy,top_expert_id,top_expert_weight\n";
    const std::vector<double> curve = tr.UscCumulativeRegretCurve();
    for (size_t t = 0; t < rounds; ++t) {
      const size_t top = TopExpert(tr.expert_weight[t]);
      out << (t + 1) << ',' << FormatNumber(tr.usc_loss[t]) << ',' << FormatNumber(curve[t]) << ','
          << FormatNumber(tr.grad_norm[t]) << ',' << FormatNumber(WeightEntropy(tr.expert_weight[t])) << ',' << top
          << ',' << FormatNumber(tr.expert_weight[t][top]) << '\n';
    }
  }
  {
    auto out = OpenOut(root / "experts.csv");
    out << "t,comparator_loss,meta_linloss,variation_term";
    for (size_t i = 0; i < n; ++i) out << ",e" << i << "_loss,e" << i << "_linloss,e" << i << "_weight";
    out << '\n';
    for (size_t t = 0; t < rounds; ++t) {
      out << (t + 1) << ',' << FormatNumber(tr.comparator_round_loss[t]) << ',' << FormatNumber(tr.meta_linloss[t])
          << ',' << FormatNumber(tr.variation_term[t]);
      for (size_t i = 0; i < n; ++i) {
        out << ',' << FormatNumber(tr.expert_loss[t][i]) << ',' << FormatNumber(tr.expert_linloss[t][i]) << ','
            << FormatNumber(tr.expert_weight[t][i]);
      }
      out << '\n';
    }
  }
  {
    auto out = OpenOut(root / "pool.csv");
    out << "id,name,class,parameter,cum_loss,regret\n";
    for (size_t i = 0; i < n; ++i) {
      out << i << ',' << tr.experts[i].name << ',' << ToString(tr.experts[i].expert_class) << ','
          << FormatNumber(tr.experts[i].parameter) << ',' << FormatNumber(tr.ExpertCumulativeLoss(i)) << ','
          << FormatNumber(tr.ExpertRegret(i)) << '\n';
    }
  }
  {
    auto out = OpenOut(root / "baselines.csv");
    out << "name,class,parameter,cum_loss,regret\n";
    for (const BaselineResult& b : tr.baselines) {
      out << b.expert.name << ',' << ToString(b.expert.expert_class) << ',' << FormatNumber(b.expert.parameter) << ','
          << FormatNumber(b.cumulative_loss) << ',' << FormatNumber(b.regret) << '\n';
    }
  }
  {
    auto out = OpenOut(root / "summary.csv");
    out << "key,value\n";
    out << "stream_class," << ToString(tr.stream_class) << '\n';
    out << "true_parameter," << FormatNumber(tr.true_parameter) << '\n';
    out << "grad_bound," << FormatNumber(tr.grad_bound) << '\n';
    out << "diameter," << FormatNumber(tr.diameter) << '\n';
    out << "horizon," << tr.horizon << '\n';
    out << "dim," << tr.dim << '\n';
    out << "smoothness," << FormatNumber(tr.smoothness) << '\n';
    out << "num_experts," << n << '\n';
    out << "comparator_loss," << FormatNumber(tr.comparator_loss) << '\n';
    out << "comparator_gradient_mapping," << FormatNumber(tr.comparator_gradient_mapping) << '\n';
    for (Eigen::Index i = 0; i < tr.x_star.size(); ++i) out << "x_star_" << i << ',' << FormatNumber(tr.x_star[i]) << '\n';
    out << "usc_cum_loss," << FormatNumber(tr.UscCumulativeLoss()) << '\n';
    out << "usc_regret," << FormatNumber(tr.UscRegret()) << '\n';
    out << "gradient_variation," << FormatNumber(tr.GradientVariation()) << '\n';
    out << "sum_sq_gradients," << FormatNumber(tr.SumSquaredGradients()) << '\n';
  }
}

RunTrace ReadTrace(const std::string& dir) {
  const fs::path root(dir);
  RunTrace tr;

  const fs::path summary = root / "summary.csv";
  std::map<std::string, std::string> kv;
  for (const auto& row : ReadCsv(summary, nullptr)) {
    if (row.size() != 2) throw ConfigError(summary.string() + ": expected key,value rows");
    kv[row[0]] = row[1];
  }
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw ConfigError(summary.string() + ": missing key '" + k + "'");
    return it->second;
  };
  tr.stream_class = ParseStreamClass(get("stream_class"));
  tr.true_parameter = ToDouble(get("true_parameter"), summary);
  tr.grad_bound = ToDouble(get("grad_bound"), summary);
  tr.diameter = ToDouble(get("diameter"), summary);
  tr.horizon = static_cast<long>(ToDouble(get("horizon"), summary));
  tr.dim = static_cast<int>(ToDouble(get("dim"), summary));
  tr.smoothness = ToDouble(get("smoothness"), summary);
  tr.comparator_loss = ToDouble(get("comparator_loss"), summary);
  tr.comparator_gradient_mapping = ToDouble(get("comparator_gradient_mapping"), summary);
  tr.x_star.resize(tr.dim);
  for (int i = 0; i < tr.dim; ++i) tr.x_star[i] = ToDouble(get("x_star_" + std::to_string(i)), summary);

  const fs::path pool = root / "pool.csv";
  for (const auto& row : ReadCsv(pool, nullptr)) {
    if (row.size() != 6) throw ConfigError(pool.string() + ": expected 6 columns");
    tr.experts.push_back({row[1], ParseExpertClass(row[2]), ToDouble(row[3], pool)});
  }
  const size_t n = tr.experts.size();

  const fs::path baselines = root / "baselines.csv";
  for (const auto& row : ReadCsv(baselines, nullptr)) {
    if (row.size() != 5) throw ConfigError(baselines.string() + ": expected 5 columns");
    tr.baselines.push_back(
        {{row[0], ParseExpertClass(row[1]), ToDouble(row[2], baselines)}, ToDouble(row[3], baselines), ToDouble(row[4], baselines)});
  }

  const fs::path trace = root / "trace.csv";
  for (const auto& row : ReadCsv(trace, nullptr)) {
    if (row.size() != 7) throw ConfigError(trace.string() + ": expected 7 columns");
    tr.usc_loss.push_back(ToDouble(row[1], trace));
    tr.grad_norm.push_back(ToDouble(row[3], trace));
  }

  const fs::path experts = root / "experts.csv";
  for (const auto& row : ReadCsv(experts, nullptr)) {
    if (row.size() != 4 + 3 * n) throw ConfigError(experts.string() + ": column count does not match pool.csv");
    tr.comparator_round_loss.push_back(ToDouble(row[1], experts));
    tr.meta_linloss.push_back(ToDouble(row[2], experts));
    tr.variation_term.push_back(ToDouble(row[3], experts));
    std::vector<double> loss(n), lin(n), w(n);
    for (size_t i = 0; i < n; ++i) {
      loss[i] = ToDouble(row[4 + 3 * i], experts);
      lin[i] = ToDouble(row[5 + 3 * i], experts);
      w[i] = ToDouble(row[6 + 3 * i], experts);
    }
    tr.expert_loss.push_back(std::move(loss));
    tr.expert_linloss.push_back(std::move(lin));
    tr.expert_weight.push_back(std::move(w));
  }
  if (tr.usc_loss.size() != tr.meta_linloss.size()) {
    throw ConfigError("trace.csv and experts.csv have different round counts");
  }
  return tr;
}

}  // namespace usc::harness
