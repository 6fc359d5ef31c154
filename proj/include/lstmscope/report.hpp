#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lstmscope/ablation.hpp"
#include "lstmscope/errors.hpp"
#include "lstmscope/metrics.hpp"

namespace lstmscope {

// Shortest decimal representation that round-trips the exact double.
// Deterministic output keeps report files byte-identical across runs.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {
inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open output file for writing: " + path);
  return out;
}
}  // namespace detail

inline constexpr const char* kCharacterizationCsvHeader =
    "cell,settle_time,delta,amplitude,correlation,frequency";

inline void write_characterization_csv(const std::vector<CellCharacterization>& chars,
                                       const std::string& path) {
  require(!chars.empty(), "write_characterization_csv: empty results");
  auto out = detail::open_for_write(path);
  out << kCharacterizationCsvHeader << "\n";
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const auto& ch = chars[i];
    out << i << "," << ch.step.settling_time << "," << format_double(ch.step.delta_response)
        << "," << format_double(ch.sine.amplitude) << ","
        << format_double(ch.sine.correlation) << "," << format_double(ch.sine.frequency)
        << "\n";
  }
  require(static_cast<bool>(out), "failed writing " + path);
}

// Richer companion to the CSV: every metric field plus per-metric summary
// statistics (mean and population std, the "M ± S" convention).
inline void write_characterization_json(const std::vector<CellCharacterization>& chars,
                                        const std::string& path) {
  require(!chars.empty(), "write_characterization_json: empty results");
  nlohmann::ordered_json doc;
  doc["cells"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const auto& ch = chars[i];
    doc["cells"].push_back({{"cell", i},
                            {"layer", ch.layer},
                            {"cell_in_layer", ch.cell_index},
                            {"initial_response", ch.step.initial_response},
                            {"final_response", ch.step.final_response},
                            {"delta_response", ch.step.delta_response},
                            {"settling_time", ch.step.settling_time},
                            {"amplitude", ch.sine.amplitude},
                            {"frequency", ch.sine.frequency},
                            {"correlation", ch.sine.correlation},
                            {"cyclic", ch.sine.cyclic}});
  }
  doc["summary"] = nlohmann::ordered_json::object();
  for (const std::string metric :
       {"settling_time", "delta_response", "amplitude", "correlation", "frequency"}) {
    Vec values;
    values.reserve(chars.size());
    for (const auto& ch : chars) values.push_back(metric_value(ch, metric));
    const Summary s = summarize(values);
    doc["summary"][metric] = {{"mean", s.mean},
                              {"std", s.stddev},
                              {"rendered", format_mean_std(s.mean, s.stddev)}};
  }
  auto out = detail::open_for_write(path);
  out << doc.dump(2) << "\n";
  require(static_cast<bool>(out), "failed writing " + path);
}

// Plain-text summary table, one row per metric. The second number is the
// population standard deviation (labeled explicitly to avoid the mean ±
// variance ambiguity).
inline std::string summary_text(const std::vector<CellCharacterization>& chars) {
  require(!chars.empty(), "summary_text: empty results");
  std::ostringstream out;
  out << "metric summaries over " << chars.size()
      << " cells (mean ± std, population std)\n";
  auto row = [&](const std::string& name, const Vec& values) {
    const Summary s = summarize(values);
    out << "  " << name << ": " << format_mean_std(s.mean, s.stddev) << "\n";
  };
  for (const std::string metric :
       {"settling_time", "delta_response", "amplitude", "correlation", "frequency"}) {
    Vec values;
    values.reserve(chars.size());
    for (const auto& ch : chars) values.push_back(metric_value(ch, metric));
    row(metric, values);
  }
  Vec abs_amp, abs_delta;
  for (const auto& ch : chars) {
    abs_amp.push_back(std::abs(ch.sine.amplitude));
    abs_delta.push_back(std::abs(ch.step.delta_response));
  }
  row("abs_amplitude", abs_amp);
  row("abs_delta_response", abs_delta);
  out << "  frequency unit: cycles/step\n";
  return out.str();
}

inline constexpr const char* kAblationCsvHeader = "cell,baseline,ablated,impact";

inline void write_ablation_csv(const std::vector<AblationRecord>& records,
                               const std::string& path) {
  require(!records.empty(), "write_ablation_csv: empty results");
  auto out = detail::open_for_write(path);
  out << kAblationCsvHeader << "\n";
  for (const auto& r : records)
    out << r.cell_index << "," << format_double(r.baseline_score) << ","
        << format_double(r.ablated_score) << "," << format_double(r.impact) << "\n";
  require(static_cast<bool>(out), "failed writing " + path);
}

// Readers for the report subcommand (regenerate summaries/plots from stored
// results). Only the CSV columns are recovered.
namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  return out;
}

inline double parse_double_field(const std::string& s, const std::string& path,
                                 std::size_t line_no) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(s, &consumed);
    require(consumed == s.size(), "bad numeric field in " + path + " line " +
                                      std::to_string(line_no));
    return v;
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("bad numeric field in " + path + " line " + std::to_string(line_no));
  }
}

}  // namespace detail

inline std::vector<CellCharacterization> read_characterization_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open characterization file: " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty characterization file: " + path);
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  require(line == kCharacterizationCsvHeader,
          "characterization file " + path + " has unexpected header: " + line);
  std::vector<CellCharacterization> chars;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    require(fields.size() == 6, "characterization file " + path + " line " +
                                    std::to_string(line_no) + " has " +
                                    std::to_string(fields.size()) + " fields, expected 6");
    CellCharacterization ch;
    ch.cell_index = static_cast<std::size_t>(
        detail::parse_double_field(fields[0], path, line_no));
    ch.step.settling_time = static_cast<std::size_t>(
        detail::parse_double_field(fields[1], path, line_no));
    ch.step.delta_response = detail::parse_double_field(fields[2], path, line_no);
    ch.sine.amplitude = detail::parse_double_field(fields[3], path, line_no);
    ch.sine.correlation = detail::parse_double_field(fields[4], path, line_no);
    ch.sine.frequency = detail::parse_double_field(fields[5], path, line_no);
    chars.push_back(ch);
  }
  require(!chars.empty(), "characterization file " + path + " has no rows");
  return chars;
}

inline std::vector<AblationRecord> read_ablation_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open ablation file: " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty ablation file: " + path);
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  require(line == kAblationCsvHeader,
          "ablation file " + path + " has unexpected header: " + line);
  std::vector<AblationRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    require(fields.size() == 4, "ablation file " + path + " line " +
                                    std::to_string(line_no) + " has " +
                                    std::to_string(fields.size()) + " fields, expected 4");
    AblationRecord r;
    r.cell_index = static_cast<std::size_t>(
        detail::parse_double_field(fields[0], path, line_no));
    r.baseline_score = detail::parse_double_field(fields[1], path, line_no);
    r.ablated_score = detail::parse_double_field(fields[2], path, line_no);
    r.impact = detail::parse_double_field(fields[3], path, line_no);
    records.push_back(r);
  }
  require(!records.empty(), "ablation file " + path + " has no rows");
  return records;
}

// Centered moving average used only for plotting ablation impact trends;
// stored records stay raw.
inline Vec moving_average(const Vec& values, std::size_t window) {
  require(window >= 1, "moving_average: window must be >= 1");
  Vec out(values.size(), 0.0);
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(window) / 2;
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(values.size()); ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(values.size()) - 1, i + half);
    double acc = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) acc += values[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace lstmscope
