// Human-preference similarity machinery: survey ingestion, empirical grasp
// frequencies, the similarity score sim = 1 - |p_h - p_x|, and the report
// (aligned text + JSON) with per-method provenance.
#pragma once

#include <cfenv>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>

#include "partgrasp/backends.hpp"
#include "partgrasp/grasp.hpp"
#include "partgrasp/partition.hpp"

namespace partgrasp {

struct SurveyRecord {
  std::string object_label;
  std::string part_a;  // region a: the majority-preferred part
  std::string part_b;
  double p_a_human = 0.0;  // fraction in [0,1]
};

struct MethodFrequency {
  std::string object_label;
  std::string method;
  double p_a_method = 0.0;  // fraction in [0,1]
  int n_grasps = 0;
};

enum class Provenance { Measured, Reference };

inline std::string to_string(Provenance p) {
  return p == Provenance::Measured ? "measured" : "reference";
}

inline double similarity_score(double p_a_human, double p_a_method) {
  if (!(p_a_human >= 0.0 && p_a_human <= 1.0))
    throw OutOfRange("p_a_human = " + format_g9(p_a_human));
  if (!(p_a_method >= 0.0 && p_a_method <= 1.0))
    throw OutOfRange("p_a_method = " + format_g9(p_a_method));
  return 1.0 - std::abs(p_a_human - p_a_method);
}

// Fraction of grasps whose contacts all lie in region a.
inline MethodFrequency empirical_frequency(const GraspSet& grasps,
                                           const RegionPartition& partition,
                                           const std::string& object_label = "",
                                           const std::string& method = "") {
  if (grasps.grasps.empty()) throw EmptyGraspSet("cannot compute a frequency");
  int inside = 0;
  for (const auto& g : grasps.grasps) {
    const int faces[2] = {g.contact_a.face, g.contact_b.face};
    if (region_of_grasp(partition, faces) == GraspRegion::InsideA) ++inside;
  }
  MethodFrequency out;
  out.object_label = object_label;
  out.method = method;
  out.n_grasps = static_cast<int>(grasps.grasps.size());
  out.p_a_method = static_cast<double>(inside) / out.n_grasps;
  return out;
}

inline std::vector<SurveyRecord> ingest_survey(const std::filesystem::path& path) {
  auto table = detail::load_csv(path);
  const int c_obj = detail::csv_column(table, "object", path);
  const int c_a = detail::csv_column(table, "part_a", path);
  const int c_b = detail::csv_column(table, "part_b", path);
  const int c_p = detail::csv_column(table, "p_a", path);
  const int c_unit = detail::csv_column(table, "unit", path);
  std::vector<SurveyRecord> out;
  for (const auto& row : table.rows) {
    SurveyRecord rec;
    rec.object_label = trim(row[c_obj]);
    rec.part_a = to_lower(trim(row[c_a]));
    rec.part_b = to_lower(trim(row[c_b]));
    if (rec.object_label.empty()) throw ParseError(path.string() + ": empty object label");
    if (rec.part_a == rec.part_b)
      throw ParseError(path.string() + ": part_a equals part_b for '" +
                       rec.object_label + "'");
    double value = 0.0;
    try {
      value = std::stod(row[c_p]);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": bad p_a for '" + rec.object_label + "'");
    }
    const std::string unit = to_lower(trim(row[c_unit]));
    if (unit == "percent")
      value /= 100.0;
    else if (unit != "fraction")
      throw ParseError(path.string() + ": unknown unit '" + unit + "'");
    if (!(value >= 0.0 && value <= 1.0))
      throw InvalidFraction(path.string() + ": p_a = " + row[c_p] + " " + unit +
                            " for '" + rec.object_label + "'");
    rec.p_a_human = value;
    out.push_back(std::move(rec));
  }
  return out;
}

struct ReferenceScore {
  std::string object_label;
  std::string method;
  double sim = 0.0;
};

struct SimilarityReport {
  struct Row {
    std::string object_label;
    std::string part_a;
    double p_a_human = 0.0;
    std::map<std::string, double> sims;  // method -> raw similarity
  };
  std::vector<Row> rows;
  std::vector<std::string> methods;  // column order
  std::map<std::string, double> averages;
  std::map<std::string, Provenance> provenance;

  void check_consistency() const {
    for (const auto& m : methods) {
      double sum = 0.0;
      int n = 0;
      for (const auto& row : rows) {
        auto it = row.sims.find(m);
        if (it == row.sims.end()) continue;
        if (!(it->second >= 0.0 && it->second <= 1.0))
          throw OutOfRange("similarity for " + row.object_label + "/" + m);
        sum += it->second;
        ++n;
      }
      const double mean = n ? sum / n : 0.0;
      if (std::abs(mean - averages.at(m)) > 1e-12)
        throw Error(ErrorCode::Generic, "report average inconsistent for " + m);
    }
  }
};

// Banker's rounding to two decimals, the display convention of the report.
inline double round_half_even_2(double x) {
  return std::nearbyint(x * 100.0) / 100.0;
}

inline SimilarityReport build_report(const std::vector<SurveyRecord>& survey,
                                     const std::vector<MethodFrequency>& freqs,
                                     const std::vector<ReferenceScore>& references = {}) {
  SimilarityReport report;
  std::map<std::string, size_t> row_of;
  for (const auto& rec : survey) {
    if (row_of.count(rec.object_label))
      throw DuplicateObject("survey row '" + rec.object_label + "'");
    row_of[rec.object_label] = report.rows.size();
    report.rows.push_back({rec.object_label, rec.part_a, rec.p_a_human, {}});
  }
  auto method_column = [&](const std::string& name, Provenance prov) {
    if (!report.provenance.count(name)) {
      report.methods.push_back(name);
      report.provenance[name] = prov;
    }
  };
  for (const auto& f : freqs) {
    auto it = row_of.find(f.object_label);
    if (it == row_of.end())
      throw MissingSurveyRow("no survey row for '" + f.object_label + "'");
    method_column(f.method, Provenance::Measured);
    auto& row = report.rows[it->second];
    if (row.sims.count(f.method))
      throw DuplicateObject("duplicate frequency for '" + f.object_label + "'/" + f.method);
    row.sims[f.method] = similarity_score(row.p_a_human, f.p_a_method);
  }
  for (const auto& r : references) {
    auto it = row_of.find(r.object_label);
    if (it == row_of.end())
      throw MissingSurveyRow("no survey row for '" + r.object_label + "'");
    method_column(r.method, Provenance::Reference);
    auto& row = report.rows[it->second];
    if (row.sims.count(r.method))
      throw DuplicateObject("duplicate reference for '" + r.object_label + "'/" + r.method);
    if (!(r.sim >= 0.0 && r.sim <= 1.0))
      throw OutOfRange("reference sim for '" + r.object_label + "'");
    row.sims[r.method] = r.sim;
  }
  if (report.methods.empty())
    throw MissingSurveyRow("no method column supplied");
  for (const auto& m : report.methods) {
    double sum = 0.0;
    int n = 0;
    for (const auto& row : report.rows) {
      auto it = row.sims.find(m);
      if (it != row.sims.end()) {
        sum += it->second;
        ++n;
      }
    }
    report.averages[m] = n ? sum / n : 0.0;
  }
  report.check_consistency();
  return report;
}

inline std::string report_to_text(const SimilarityReport& report) {
  report.check_consistency();
  std::ostringstream out;
  size_t obj_w = 12, part_w = 14;
  for (const auto& row : report.rows) {
    obj_w = std::max(obj_w, row.object_label.size());
    part_w = std::max(part_w, row.part_a.size() + 7);
  }
  out << std::left << std::setw(static_cast<int>(obj_w) + 2) << "Object"
      << std::setw(static_cast<int>(part_w) + 2) << "Preferred Part";
  for (const auto& m : report.methods)
    out << std::right << std::setw(static_cast<int>(std::max<size_t>(m.size(), 6)) + 2) << m;
  out << '\n';
  for (const auto& row : report.rows) {
    std::ostringstream part;
    part << row.part_a << ' ' << std::fixed << std::setprecision(1)
         << row.p_a_human * 100.0 << '%';
    out << std::left << std::setw(static_cast<int>(obj_w) + 2) << row.object_label
        << std::setw(static_cast<int>(part_w) + 2) << part.str();
    for (const auto& m : report.methods) {
      const int w = static_cast<int>(std::max<size_t>(m.size(), 6)) + 2;
      auto it = row.sims.find(m);
      if (it == row.sims.end()) {
        out << std::right << std::setw(w) << "-";
      } else {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(2) << round_half_even_2(it->second);
        out << std::right << std::setw(w) << cell.str();
      }
    }
    out << '\n';
  }
  out << std::left << std::setw(static_cast<int>(obj_w) + 2) << "Average"
      << std::setw(static_cast<int>(part_w) + 2) << "";
  for (const auto& m : report.methods) {
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(2) << round_half_even_2(report.averages.at(m));
    out << std::right << std::setw(static_cast<int>(std::max<size_t>(m.size(), 6)) + 2)
        << cell.str();
  }
  out << '\n';
  out << "provenance:";
  for (const auto& m : report.methods)
    out << ' ' << m << '=' << to_string(report.provenance.at(m));
  out << '\n';
  return out.str();
}

inline std::string report_to_json(const SimilarityReport& report) {
  report.check_consistency();
  nlohmann::json doc;
  doc["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["object"] = row.object_label;
    r["part_a"] = row.part_a;
    r["p_a_human"] = row.p_a_human;
    r["sims"] = nlohmann::json::object();
    for (const auto& [m, sim] : row.sims) r["sims"][m] = sim;
    doc["rows"].push_back(std::move(r));
  }
  doc["averages"] = nlohmann::json::object();
  for (const auto& [m, avg] : report.averages) doc["averages"][m] = avg;
  doc["provenance"] = nlohmann::json::object();
  for (const auto& [m, p] : report.provenance) doc["provenance"][m] = to_string(p);
  return doc.dump(1) + "\n";
}

// Searches the k/n frequency grid for a count reproducing a published
// similarity; the key consistency check for imported baseline scores.
inline std::optional<int> backsolve_count(double p_a_human, double published_sim,
                                          int n_grasps = 20, double tolerance = 0.005) {
  std::optional<int> best;
  double best_err = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n_grasps; ++k) {
    const double sim = 1.0 - std::abs(p_a_human - static_cast<double>(k) / n_grasps);
    const double err = std::abs(sim - published_sim);
    if (err < best_err) {
      best_err = err;
      best = k;
    }
  }
  if (best_err <= tolerance + 1e-12) return best;
  return std::nullopt;
}

inline std::vector<ReferenceScore> load_reference_scores(
    const std::filesystem::path& path, const std::string& method_filter = "") {
  auto table = detail::load_csv(path);
  const int c_obj = detail::csv_column(table, "object", path);
  const int c_method = detail::csv_column(table, "method", path);
  const int c_score = detail::csv_column(table, "score", path);
  std::vector<ReferenceScore> out;
  for (const auto& row : table.rows) {
    ReferenceScore r;
    r.object_label = trim(row[c_obj]);
    r.method = trim(row[c_method]);
    if (!method_filter.empty() && r.method != method_filter) continue;
    try {
      r.sim = std::stod(row[c_score]);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": bad score for '" + r.object_label + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace partgrasp
