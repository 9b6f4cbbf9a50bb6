#include "fleetpdm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fleetpdm::report {

namespace {

std::string fixed(double v, int precision) {
  if (std::isnan(v)) return "NA";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string scientific(double v) {
  if (std::isnan(v)) return "NA";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report file: " + path);
  return out;
}

std::vector<const evalbench::LearnerResult*> by_accuracy(const evalbench::BenchResult& result) {
  std::vector<const evalbench::LearnerResult*> order;
  for (const auto& lr : result.learners) order.push_back(&lr);
  std::sort(order.begin(), order.end(),
            [](const evalbench::LearnerResult* a, const evalbench::LearnerResult* b) {
              double aa = std::isnan(a->median_accuracy) ? -1 : a->median_accuracy;
              double bb = std::isnan(b->median_accuracy) ? -1 : b->median_accuracy;
              if (aa != bb) return aa > bb;
              return a->name < b->name;
            });
  return order;
}

std::string confusion_cell(const evalbench::SliceOutcome& s) {
  if (s.degenerate) return "NA";
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%ld:%ld:%ld:%ld", s.metrics.tn, s.metrics.fp, s.metrics.fn,
                s.metrics.tp);
  return buf;
}

const char* group_color(const std::string& group) {
  if (group == "error-counts") return "#d62728";
  if (group == "sensor-stats") return "#1f77b4";
  if (group == "replacement-ages") return "#2ca02c";
  return "#7f7f7f";  // metadata
}

}  // namespace

void write_bench_csv(const evalbench::BenchResult& result, const std::string& path) {
  auto out = open_out(path);
  out << "learner,slices_used,median_accuracy,median_recall,median_precision,median_f1,"
         "median_fit_predict_seconds,relative_time";
  for (double f : result.split.train_fractions) {
    out << ",confusion_" << static_cast<int>(std::lround(f * 100)) << " (tn:fp:fn:tp)";
  }
  out << ",balanced_test\n";
  for (const auto* lr : by_accuracy(result)) {
    out << lr->name << ',' << lr->slices_used << ',' << fixed(lr->median_accuracy, 6) << ','
        << fixed(lr->median_recall, 6) << ',' << fixed(lr->median_precision, 6) << ','
        << fixed(lr->median_f1, 6) << ',' << scientific(lr->median_wall_seconds) << ','
        << fixed(lr->relative_time, 3);
    for (const auto& s : lr->slices) out << ',' << confusion_cell(s);
    out << ',' << (result.balanced_test ? "true" : "false") << '\n';
  }
  if (!out) throw std::runtime_error("report write failed: " + path);
}

void write_bench_markdown(const evalbench::BenchResult& result, const std::string& path) {
  auto out = open_out(path);
  out << "# Classifier benchmark\n\n";
  out << "Learners sorted by median accuracy across "
      << result.split.train_fractions.size() << " time slices";
  out << (result.balanced_test ? " (balanced test sides).\n\n" : " (unbalanced test sides).\n\n");
  out << "| learner | median accuracy | median recall | median precision | median F1 | "
         "median fit+predict (s) | relative time | slices used |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  for (const auto* lr : by_accuracy(result)) {
    out << "| " << lr->name << " | " << fixed(lr->median_accuracy, 4) << " | "
        << fixed(lr->median_recall, 4) << " | " << fixed(lr->median_precision, 4) << " | "
        << fixed(lr->median_f1, 4) << " | " << scientific(lr->median_wall_seconds) << " | "
        << fixed(lr->relative_time, 2) << " | " << lr->slices_used << " |\n";
  }
  if (!out) throw std::runtime_error("report write failed: " + path);
}

void write_bench_svg(const evalbench::BenchResult& result, const std::string& path) {
  auto order = by_accuracy(result);
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" "
         "font-family=\"monospace\" font-size=\"14\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-size=\"18\">"
         "Classifier accuracy and relative execution time</text>\n";
  out << "<text x=\"400\" y=\"52\" text-anchor=\"middle\" fill=\"#555555\">"
         "median accuracy (bar) and relative fit+predict time (annotation)</text>\n";

  const double left = 120, width = 560, top = 90;
  const double slot = order.empty() ? 0 : std::min(70.0, 480.0 / static_cast<double>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto* lr = order[i];
    double acc = std::isnan(lr->median_accuracy) ? 0 : lr->median_accuracy;
    double y = top + slot * static_cast<double>(i);
    double bar = width * acc;
    out << "<text x=\"" << fixed(left - 10, 1) << "\" y=\"" << fixed(y + slot / 2 + 5, 1)
        << "\" text-anchor=\"end\">" << lr->name << "</text>\n";
    out << "<rect x=\"" << fixed(left, 1) << "\" y=\"" << fixed(y + slot * 0.15, 1)
        << "\" width=\"" << fixed(bar, 1) << "\" height=\"" << fixed(slot * 0.7, 1)
        << "\" fill=\"#1f77b4\"/>\n";
    out << "<text x=\"" << fixed(left + bar + 8, 1) << "\" y=\"" << fixed(y + slot / 2 + 5, 1)
        << "\">" << fixed(acc, 3) << " | x" << fixed(lr->relative_time, 2) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("report write failed: " + path);
}

void write_importance_csv(const evalbench::ImportanceReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "rank,feature,group,score\n";
  for (const auto& e : report.entries) {
    out << e.rank << ',' << e.feature << ',' << e.group << ',' << fixed(e.score, 6) << '\n';
  }
  if (!out) throw std::runtime_error("report write failed: " + path);
}

void write_importance_markdown(const evalbench::ImportanceReport& report,
                               const std::string& path) {
  auto out = open_out(path);
  out << "# Input variable importance\n\n";
  out << "Random forest out-of-bag permutation importance, rank 1 = most important "
         "(train fraction " << fixed(report.fraction_used, 2) << ").\n\n";
  out << "| rank | feature | group | score |\n|---|---|---|---|\n";
  for (const auto& e : report.entries) {
    out << "| " << e.rank << " | " << e.feature << " | " << e.group << " | " << fixed(e.score, 6)
        << " |\n";
  }
  if (!out) throw std::runtime_error("report write failed: " + path);
}

void write_importance_svg(const evalbench::ImportanceReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" "
         "font-family=\"monospace\" font-size=\"11\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"400\" y=\"26\" text-anchor=\"middle\" font-size=\"18\">"
         "Rank order of input variable importance</text>\n";

  const char* groups[4] = {"error-counts", "sensor-stats", "replacement-ages", "metadata"};
  double lx = 60;
  for (const char* g : groups) {
    out << "<rect x=\"" << fixed(lx, 1) << "\" y=\"38\" width=\"12\" height=\"12\" fill=\""
        << group_color(g) << "\"/>\n";
    out << "<text x=\"" << fixed(lx + 16, 1) << "\" y=\"48\">" << g << "</text>\n";
    lx += 180;
  }

  double max_score = 0;
  for (const auto& e : report.entries) max_score = std::max(max_score, e.score);
  if (max_score <= 0) max_score = 1;

  const double left = 230, width = 500, top = 64;
  const double slot =
      report.entries.empty() ? 0 : std::min(19.0, 520.0 / static_cast<double>(report.entries.size()));
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    double y = top + slot * static_cast<double>(i);
    double bar = width * std::max(0.0, e.score) / max_score;
    out << "<text x=\"" << fixed(left - 8, 1) << "\" y=\"" << fixed(y + slot - 5, 1)
        << "\" text-anchor=\"end\">" << e.rank << " " << e.feature << "</text>\n";
    out << "<rect x=\"" << fixed(left, 1) << "\" y=\"" << fixed(y + 2, 1) << "\" width=\""
        << fixed(bar, 1) << "\" height=\"" << fixed(slot - 6, 1) << "\" fill=\""
        << group_color(e.group) << "\"/>\n";
    out << "<text x=\"" << fixed(left + bar + 6, 1) << "\" y=\"" << fixed(y + slot - 5, 1)
        << "\">" << fixed(e.score, 4) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("report write failed: " + path);
}

}  // namespace fleetpdm::report
