#include "grasswalk/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "grasswalk/errors.hpp"

namespace grasswalk {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json double_to_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double double_from_json(const ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ArgumentError("trace: expected a number, got " + j.dump());
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string round_to_json(const RoundRecord& r, bool emit_iterates) {
  ordered_json j;
  j["round"] = r.round;
  j["loss"] = double_to_json(r.loss);
  j["accepted_from_sample"] = r.chosen_sample;
  j["solver_evals"] = r.solver_evals;
  ordered_json minima = ordered_json::array();
  for (double v : r.sample_minima) minima.push_back(double_to_json(v));
  j["sample_minima"] = std::move(minima);
  j["min_evaluated"] = double_to_json(r.min_evaluated);
  if (emit_iterates) {
    ordered_json x = ordered_json::array();
    for (Eigen::Index i = 0; i < r.x.size(); ++i) x.push_back(double_to_json(r.x[i]));
    j["x"] = std::move(x);
  }
  j["flags"] = r.flags;
  return j.dump();
}

std::string trace_to_jsonl(const WalkTrace& trace, bool emit_iterates) {
  std::string out;
  for (const RoundRecord& r : trace.rounds) {
    out += round_to_json(r, emit_iterates);
    out += '\n';
  }
  return out;
}

std::vector<RoundRecord> parse_trace_jsonl(std::string_view text) {
  std::vector<RoundRecord> rounds;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const ordered_json j = ordered_json::parse(line);
      RoundRecord r;
      r.round = j.at("round").get<int>();
      r.loss = double_from_json(j.at("loss"));
      r.chosen_sample = j.at("accepted_from_sample").get<int>();
      r.solver_evals = j.at("solver_evals").get<std::uint64_t>();
      for (const auto& v : j.at("sample_minima")) r.sample_minima.push_back(double_from_json(v));
      r.min_evaluated = double_from_json(j.at("min_evaluated"));
      if (j.contains("x")) {
        const auto& x = j.at("x");
        r.x.resize(static_cast<Eigen::Index>(x.size()));
        for (std::size_t i = 0; i < x.size(); ++i) {
          r.x[static_cast<Eigen::Index>(i)] = double_from_json(x[i]);
        }
      }
      r.flags = j.at("flags").get<std::vector<std::string>>();
      rounds.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ArgumentError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rounds;
}

std::string summary_csv(const StudySummary& summary) {
  std::ostringstream out;
  out << "trial,final_loss,rounds,evals,success\n";
  for (const TrialOutcome& o : summary.outcomes) {
    out << o.trial << ',' << format_double(o.final_loss) << ',' << o.rounds << ',' << o.evals
        << ',' << (o.success ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string blindspot_csv(const BlindSpotSummary& summary) {
  std::ostringstream out;
  out << "trial,divergence_round,final_loss,final_clipped_loss,max_abs_loss_diff,identical\n";
  for (const BlindSpotOutcome& o : summary.outcomes) {
    out << o.trial << ',' << (o.divergence_round ? std::to_string(*o.divergence_round) : "")
        << ',' << format_double(o.final_loss) << ',' << format_double(o.final_clipped_loss) << ','
        << format_double(o.max_abs_loss_diff) << ',' << (o.identical_traces ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace grasswalk
